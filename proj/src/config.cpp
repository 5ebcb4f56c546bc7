// Copyright 2026 The stemsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "stemsep/config.hpp"

#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace stemsep {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void parse_fail(const std::string& origin, int line, const std::string& msg) {
  std::ostringstream os;
  os << origin << ":" << line << ": " << msg;
  throw std::invalid_argument(os.str());
}

void require(bool ok, const std::string& invariant) {
  if (!ok) throw std::invalid_argument("config invariant violated: " + invariant);
}

double parse_number(const std::string& origin, int line, const std::string& v) {
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) parse_fail(origin, line, "trailing characters in number '" + v + "'");
    return d;
  } catch (const std::invalid_argument&) {
    parse_fail(origin, line, "expected a number, got '" + v + "'");
  } catch (const std::out_of_range&) {
    parse_fail(origin, line, "number out of range: '" + v + "'");
  }
}

bool parse_bool(const std::string& origin, int line, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  parse_fail(origin, line, "expected true/false, got '" + v + "'");
}

// "(4096,1024) (2048,512)" -> pairs
std::vector<std::pair<int, int>> parse_window_list(const std::string& origin, int line,
                                                   const std::string& v) {
  std::vector<std::pair<int, int>> out;
  size_t i = 0;
  while (i < v.size()) {
    while (i < v.size() && (std::isspace(static_cast<unsigned char>(v[i])) || v[i] == ',')) ++i;
    if (i >= v.size()) break;
    if (v[i] != '(') parse_fail(origin, line, "expected '(' in window list");
    size_t close = v.find(')', i);
    if (close == std::string::npos) parse_fail(origin, line, "unterminated '(' in window list");
    std::string body = v.substr(i + 1, close - i - 1);
    size_t comma = body.find(',');
    if (comma == std::string::npos) parse_fail(origin, line, "expected 'window,hop' pair");
    int w = static_cast<int>(parse_number(origin, line, trim(body.substr(0, comma))));
    int h = static_cast<int>(parse_number(origin, line, trim(body.substr(comma + 1))));
    out.emplace_back(w, h);
    i = close + 1;
  }
  if (out.empty()) parse_fail(origin, line, "empty window list");
  return out;
}

std::string format_window_list(const std::vector<std::pair<int, int>>& ws) {
  std::ostringstream os;
  for (size_t i = 0; i < ws.size(); ++i) {
    if (i) os << " ";
    os << "(" << ws[i].first << "," << ws[i].second << ")";
  }
  return os.str();
}

}  // namespace

bool Config::operator==(const Config& o) const {
  return serialize_config(*this) == serialize_config(o);
}

void validate(const Config& cfg) {
  const ModelConfig& m = cfg.model;
  const STFTConfig& s = cfg.stft;
  const TrainConfig& t = cfg.train;

  require(s.window_size > s.hop && s.hop > 0, "window_size > hop > 0");
  require(s.kept_bins > 0 && s.kept_bins <= s.window_size / 2 + 1,
          "kept_bins <= window_size/2 + 1");
  require(s.sample_rate > 0, "sample_rate > 0");

  require(m.n_band >= 1, "n_band >= 1");
  require(m.g >= 1, "g >= 1");
  require(m.g % m.n_band == 0, "g mod n_band != 0");
  require(s.kept_bins % m.n_band == 0, "kept_bins mod n_band != 0");
  require((m.c_in * m.n_band) % m.n_band == 0, "(c_in * n_band) mod n_band != 0");
  require(m.c_in == 4, "c_in == 4 (stereo complex)");
  require(m.n_enc >= m.n_dec && m.n_dec >= 1, "n_enc >= n_dec >= 1");
  require(m.n_split_enc >= m.n_split_dec && m.n_split_dec >= 1,
          "n_split_enc >= n_split_dec >= 1");
  require(m.n_rope >= 0, "n_rope >= 0");
  require(m.k_outer >= 1 && m.k_outer % 2 == 1, "k_outer odd and >= 1");
  require(m.k_inner >= 1 && m.k_inner % 2 == 1, "k_inner odd and >= 1");
  require(m.heads >= 1, "heads >= 1");
  require(m.tdf_bottleneck >= 1, "tdf_bottleneck >= 1");
  const int sd = m.resolved_seq_dim();
  require(sd > 0 && sd % m.heads == 0, "seq_dim mod heads != 0");
  require((sd / m.heads) % 2 == 0, "head_dim must be even (rotary pairs)");
  require(m.chunk_seconds > 0, "chunk_seconds > 0");

  require(t.lr > 0, "lr > 0");
  require(t.plateau_factor > 0 && t.plateau_factor < 1, "0 < plateau_factor < 1");
  require(t.train_overlap >= 0 && t.train_overlap < 1, "0 <= train_overlap < 1");
  require(t.infer_overlap >= 0 && t.infer_overlap < 1, "0 <= infer_overlap < 1");
  require(t.plateau_patience >= 1, "plateau_patience >= 1");
  require(t.early_stop_patience >= t.plateau_patience,
          "early_stop_patience >= plateau_patience");
  require(t.batch_size >= 1, "batch_size >= 1");
  require(t.max_epochs >= 1, "max_epochs >= 1");
  require(!t.multires_windows.empty(), "multires_windows non-empty");
  for (const auto& [w, h] : t.multires_windows) {
    require(w > h && h > 0, "multires window > hop > 0");
  }
  auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
  require(prob_ok(t.aug.polarity_prob) && prob_ok(t.aug.channel_flip_prob) &&
              prob_ok(t.aug.gain_prob) && prob_ok(t.aug.pitch_prob) &&
              prob_ok(t.aug.shift_prob),
          "augment probabilities in [0,1]");
  require(t.aug.gain_db >= 0 && t.aug.pitch_semitones >= 0 && t.aug.shift_seconds >= 0,
          "augment ranges >= 0");
}

Config preset(const std::string& name) {
  Config cfg;
  if (name == "proposed") {
    // defaults already are the proposed model
  } else if (name == "proposed-s") {
    cfg.model.g = 32;
    cfg.model.n_rope = 6;
  } else {
    throw std::invalid_argument("unknown preset '" + name + "' (expected proposed|proposed-s)");
  }
  validate(cfg);
  return cfg;
}

Config parse_config(const std::string& text, const std::string& origin) {
  Config cfg;
  std::istringstream is(text);
  std::string raw;
  std::string section;
  int line_no = 0;

  using Setter = std::function<void(int, const std::string&)>;
  std::map<std::string, Setter> setters;

  auto num = [&](const std::string& key, auto* field) {
    setters[key] = [&, field](int line, const std::string& v) {
      *field = static_cast<std::remove_pointer_t<decltype(field)>>(parse_number(origin, line, v));
    };
  };
  auto boolean = [&](const std::string& key, bool* field) {
    setters[key] = [&, field](int line, const std::string& v) {
      *field = parse_bool(origin, line, v);
    };
  };

  num("model.n_band", &cfg.model.n_band);
  num("model.n_enc", &cfg.model.n_enc);
  num("model.n_dec", &cfg.model.n_dec);
  num("model.n_rope", &cfg.model.n_rope);
  num("model.n_split_enc", &cfg.model.n_split_enc);
  num("model.n_split_dec", &cfg.model.n_split_dec);
  num("model.g", &cfg.model.g);
  num("model.k_outer", &cfg.model.k_outer);
  num("model.k_inner", &cfg.model.k_inner);
  num("model.c_in", &cfg.model.c_in);
  num("model.seq_dim", &cfg.model.seq_dim);
  num("model.heads", &cfg.model.heads);
  num("model.tdf_bottleneck", &cfg.model.tdf_bottleneck);
  num("model.chunk_seconds", &cfg.model.chunk_seconds);

  num("stft.window_size", &cfg.stft.window_size);
  num("stft.hop", &cfg.stft.hop);
  num("stft.kept_bins", &cfg.stft.kept_bins);
  num("stft.sample_rate", &cfg.stft.sample_rate);
  boolean("stft.center_padding", &cfg.stft.center_padding);

  num("train.lr", &cfg.train.lr);
  num("train.plateau_patience", &cfg.train.plateau_patience);
  num("train.plateau_factor", &cfg.train.plateau_factor);
  num("train.early_stop_patience", &cfg.train.early_stop_patience);
  num("train.batch_size", &cfg.train.batch_size);
  num("train.max_epochs", &cfg.train.max_epochs);
  num("train.train_overlap", &cfg.train.train_overlap);
  num("train.infer_overlap", &cfg.train.infer_overlap);
  num("train.seed", &cfg.train.seed);
  num("train.grad_clip", &cfg.train.grad_clip);
  num("train.weight_decay", &cfg.train.weight_decay);
  num("train.adam_beta1", &cfg.train.adam_beta1);
  num("train.adam_beta2", &cfg.train.adam_beta2);
  boolean("train.augment", &cfg.train.augment);
  boolean("train.random_mix", &cfg.train.random_mix);
  num("train.aug_polarity_prob", &cfg.train.aug.polarity_prob);
  num("train.aug_channel_flip_prob", &cfg.train.aug.channel_flip_prob);
  num("train.aug_gain_prob", &cfg.train.aug.gain_prob);
  num("train.aug_pitch_prob", &cfg.train.aug.pitch_prob);
  num("train.aug_shift_prob", &cfg.train.aug.shift_prob);
  num("train.aug_gain_db", &cfg.train.aug.gain_db);
  num("train.aug_pitch_semitones", &cfg.train.aug.pitch_semitones);
  num("train.aug_shift_seconds", &cfg.train.aug.shift_seconds);
  num("train.aug_seed", &cfg.train.aug.seed);
  setters["train.multires_windows"] = [&](int line, const std::string& v) {
    cfg.train.multires_windows = parse_window_list(origin, line, v);
  };

  while (std::getline(is, raw)) {
    ++line_no;
    std::string line = trim(raw);
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') parse_fail(origin, line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "model" && section != "stft" && section != "train")
        parse_fail(origin, line_no, "unknown section [" + section + "]");
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) parse_fail(origin, line_no, "expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (section.empty()) parse_fail(origin, line_no, "key '" + key + "' outside any section");
    auto it = setters.find(section + "." + key);
    if (it == setters.end()) parse_fail(origin, line_no, "unknown key '" + key + "' in [" + section + "]");
    it->second(line_no, value);
  }

  validate(cfg);
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open config file: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return parse_config(os.str(), path);
}

std::string serialize_config(const Config& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "[model]\n";
  os << "n_band = " << cfg.model.n_band << "\n";
  os << "n_enc = " << cfg.model.n_enc << "\n";
  os << "n_dec = " << cfg.model.n_dec << "\n";
  os << "n_rope = " << cfg.model.n_rope << "\n";
  os << "n_split_enc = " << cfg.model.n_split_enc << "\n";
  os << "n_split_dec = " << cfg.model.n_split_dec << "\n";
  os << "g = " << cfg.model.g << "\n";
  os << "k_outer = " << cfg.model.k_outer << "\n";
  os << "k_inner = " << cfg.model.k_inner << "\n";
  os << "c_in = " << cfg.model.c_in << "\n";
  os << "seq_dim = " << cfg.model.seq_dim << "\n";
  os << "heads = " << cfg.model.heads << "\n";
  os << "tdf_bottleneck = " << cfg.model.tdf_bottleneck << "\n";
  os << "chunk_seconds = " << cfg.model.chunk_seconds << "\n";
  os << "\n[stft]\n";
  os << "window_size = " << cfg.stft.window_size << "\n";
  os << "hop = " << cfg.stft.hop << "\n";
  os << "kept_bins = " << cfg.stft.kept_bins << "\n";
  os << "sample_rate = " << cfg.stft.sample_rate << "\n";
  os << "center_padding = " << (cfg.stft.center_padding ? "true" : "false") << "\n";
  os << "\n[train]\n";
  os << "lr = " << cfg.train.lr << "\n";
  os << "plateau_patience = " << cfg.train.plateau_patience << "\n";
  os << "plateau_factor = " << cfg.train.plateau_factor << "\n";
  os << "early_stop_patience = " << cfg.train.early_stop_patience << "\n";
  os << "batch_size = " << cfg.train.batch_size << "\n";
  os << "max_epochs = " << cfg.train.max_epochs << "\n";
  os << "train_overlap = " << cfg.train.train_overlap << "\n";
  os << "infer_overlap = " << cfg.train.infer_overlap << "\n";
  os << "seed = " << cfg.train.seed << "\n";
  os << "grad_clip = " << cfg.train.grad_clip << "\n";
  os << "weight_decay = " << cfg.train.weight_decay << "\n";
  os << "adam_beta1 = " << cfg.train.adam_beta1 << "\n";
  os << "adam_beta2 = " << cfg.train.adam_beta2 << "\n";
  os << "augment = " << (cfg.train.augment ? "true" : "false") << "\n";
  os << "random_mix = " << (cfg.train.random_mix ? "true" : "false") << "\n";
  os << "aug_polarity_prob = " << cfg.train.aug.polarity_prob << "\n";
  os << "aug_channel_flip_prob = " << cfg.train.aug.channel_flip_prob << "\n";
  os << "aug_gain_prob = " << cfg.train.aug.gain_prob << "\n";
  os << "aug_pitch_prob = " << cfg.train.aug.pitch_prob << "\n";
  os << "aug_shift_prob = " << cfg.train.aug.shift_prob << "\n";
  os << "aug_gain_db = " << cfg.train.aug.gain_db << "\n";
  os << "aug_pitch_semitones = " << cfg.train.aug.pitch_semitones << "\n";
  os << "aug_shift_seconds = " << cfg.train.aug.shift_seconds << "\n";
  os << "aug_seed = " << cfg.train.aug.seed << "\n";
  os << "multires_windows = " << format_window_list(cfg.train.multires_windows) << "\n";
  return os.str();
}

void save_config(const Config& cfg, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write config file: " + path);
  f << serialize_config(cfg);
}

std::string describe(const Config& cfg) {
  validate(cfg);
  std::ostringstream os;
  os.precision(17);
  os << "model: ";
  os << "n_band=" << cfg.model.n_band << " n_enc=" << cfg.model.n_enc
     << " n_dec=" << cfg.model.n_dec << " n_rope=" << cfg.model.n_rope
     << " n_split_enc=" << cfg.model.n_split_enc
     << " n_split_dec=" << cfg.model.n_split_dec << " g=" << cfg.model.g
     << " k_outer=" << cfg.model.k_outer << " k_inner=" << cfg.model.k_inner
     << " c_in=" << cfg.model.c_in << " seq_dim=" << cfg.model.seq_dim
     << " heads=" << cfg.model.heads
     << " tdf_bottleneck=" << cfg.model.tdf_bottleneck
     << " chunk_seconds=" << cfg.model.chunk_seconds << "\n";
  os << "stft: window_size=" << cfg.stft.window_size << " hop=" << cfg.stft.hop
     << " kept_bins=" << cfg.stft.kept_bins
     << " sample_rate=" << cfg.stft.sample_rate
     << " center_padding=" << (cfg.stft.center_padding ? "true" : "false") << "\n";
  os << "train: lr=" << cfg.train.lr
     << " plateau_patience=" << cfg.train.plateau_patience
     << " plateau_factor=" << cfg.train.plateau_factor
     << " early_stop_patience=" << cfg.train.early_stop_patience
     << " batch_size=" << cfg.train.batch_size
     << " max_epochs=" << cfg.train.max_epochs
     << " train_overlap=" << cfg.train.train_overlap
     << " infer_overlap=" << cfg.train.infer_overlap
     << " seed=" << cfg.train.seed << " grad_clip=" << cfg.train.grad_clip
     << " weight_decay=" << cfg.train.weight_decay
     << " augment=" << (cfg.train.augment ? "true" : "false")
     << " random_mix=" << (cfg.train.random_mix ? "true" : "false")
     << " multires_windows=" << format_window_list(cfg.train.multires_windows)
     << "\n";
  os << "derived: ";
  os << "bins_per_band=" << cfg.stft.kept_bins / cfg.model.n_band;
  os << " band_stack_channels=" << cfg.model.c_in * cfg.model.n_band;
  os << " seq_dim_resolved=" << cfg.model.resolved_seq_dim();
  os << " head_dim=" << cfg.model.resolved_seq_dim() / cfg.model.heads;
  os << " bottleneck_channels=" << (cfg.model.n_enc + 1) * cfg.model.g;
  os << " chunk_samples="
     << static_cast<int64_t>(cfg.model.chunk_seconds * cfg.stft.sample_rate) << "\n";
  return os.str();
}

}  // namespace stemsep

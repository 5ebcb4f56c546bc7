// Copyright 2026 The stemsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace stemsep {

// Analysis transform settings. Defaults follow the 44.1 kHz stereo
// convention used throughout: 6144-sample Hann window, hop 1024, bins
// truncated to 2048 (everything above ~14.7 kHz is dropped).
struct STFTConfig {
  int window_size = 6144;
  int hop = 1024;
  int kept_bins = 2048;
  int sample_rate = 44100;
  bool center_padding = true;
};

// Architecture hyperparameters for a single-stem model.
//
// seq_dim == 0 means "auto": the attention width is derived as 3*g, which
// keeps the sequence module's budget proportional to the convolutional
// trunk when g is scaled.
struct ModelConfig {
  int n_band = 4;
  int n_enc = 3;
  int n_dec = 1;
  int n_rope = 5;
  int n_split_enc = 3;
  int n_split_dec = 1;
  int g = 56;
  int k_outer = 3;
  int k_inner = 1;
  int c_in = 4;  // stereo x {real, imag}
  int seq_dim = 0;
  int heads = 4;
  int tdf_bottleneck = 16;  // frequency-FC reduction factor
  double chunk_seconds = 9.0;

  int resolved_seq_dim() const { return seq_dim > 0 ? seq_dim : 3 * g; }
};

struct AugmentSpec {
  double polarity_prob = 0.5;
  double channel_flip_prob = 0.5;
  double gain_prob = 0.5;
  double pitch_prob = 0.5;
  double shift_prob = 0.5;
  double gain_db = 6.0;           // draws from [-gain_db, +gain_db]
  double pitch_semitones = 2.0;   // draws from [-range, +range], integer cents
  double shift_seconds = 0.5;     // circular, draws from [-range, +range]
  uint64_t seed = 0;              // 0: derive from the training seed
};

struct TrainConfig {
  double lr = 2e-4;
  int plateau_patience = 20;
  double plateau_factor = 0.9;
  int early_stop_patience = 50;
  int batch_size = 8;
  int max_epochs = 1000;
  double train_overlap = 0.75;
  double infer_overlap = 0.5;
  uint64_t seed = 0;
  double grad_clip = 5.0;  // global norm; <= 0 disables
  double weight_decay = 1e-2;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  bool augment = true;
  bool random_mix = true;
  AugmentSpec aug;
  std::vector<std::pair<int, int>> multires_windows = {
      {4096, 1024}, {2048, 512}, {1024, 256}};
};

struct Config {
  ModelConfig model;
  STFTConfig stft;
  TrainConfig train;

  bool operator==(const Config& other) const;
};

// Throws std::invalid_argument naming the first violated invariant.
void validate(const Config& cfg);

// Presets: "proposed" (g=56, n_rope=5) and "proposed-s" (g=32, n_rope=6).
Config preset(const std::string& name);

// Flat [model]/[stft]/[train] key-value file. Parse errors carry the line
// number; invariant violations name the failing invariant.
Config load_config(const std::string& path);
Config parse_config(const std::string& text, const std::string& origin);
std::string serialize_config(const Config& cfg);
void save_config(const Config& cfg, const std::string& path);

// Deterministic field-by-field summary including derived shapes
// (bins_per_band, channels after band stacking, resolved seq_dim).
std::string describe(const Config& cfg);

}  // namespace stemsep

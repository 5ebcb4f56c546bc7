// Copyright 2026 The stemsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "stemsep/spectral.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <stdexcept>

namespace stemsep {

namespace {

Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> fft;
  return fft;
}

// Reflect (no edge repeat): ... 2 1 | 0 1 2 3 | 2 1 ...
int64_t fold_reflect(int64_t i, int64_t n) {
  if (n == 1) return 0;
  const int64_t period = 2 * (n - 1);
  int64_t m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - m;
}

int64_t frame_count(int64_t len, int hop) { return 1 + len / hop; }

void forward_channel(const std::vector<double>& x, int window, int hop, int kept,
                     const std::vector<double>& win,
                     std::vector<std::complex<double>>& out_frames) {
  const int64_t len = static_cast<int64_t>(x.size());
  const int64_t frames = frame_count(len, hop);
  const int64_t pad = window / 2;
  out_frames.assign(static_cast<size_t>(frames) * kept, {0.0, 0.0});

  std::vector<std::complex<double>> buf(window), spec(window);
  for (int64_t t = 0; t < frames; ++t) {
    for (int n = 0; n < window; ++n) {
      const int64_t src = t * hop + n - pad;
      buf[n] = {win[n] * x[static_cast<size_t>(fold_reflect(src, len))], 0.0};
    }
    fft_engine().fwd(spec, buf);
    for (int f = 0; f < kept; ++f) out_frames[static_cast<size_t>(t) * kept + f] = spec[f];
  }
}

// Synthesis of one channel from a one-sided spectrum with bins above `kept`
// treated as zero. Overlap-add with the analysis window, normalized by the
// accumulated squared window.
std::vector<double> inverse_channel(const std::vector<std::complex<double>>& frames_data,
                                    int64_t frames, int window, int hop, int kept,
                                    const std::vector<double>& win, int64_t out_len) {
  const int64_t pad = window / 2;
  const int64_t acc_len = (frames - 1) * hop + window;
  std::vector<double> acc(acc_len, 0.0);
  std::vector<double> wsum(acc_len, 0.0);

  const int half = window / 2;
  std::vector<std::complex<double>> full(window), time(window);
  for (int64_t t = 0; t < frames; ++t) {
    for (int f = 0; f <= half; ++f) {
      std::complex<double> v =
          f < kept ? frames_data[static_cast<size_t>(t) * kept + f] : std::complex<double>(0.0, 0.0);
      full[f] = v;
      if (f != 0 && 2 * f != window) full[window - f] = std::conj(v);
    }
    fft_engine().inv(time, full);
    for (int n = 0; n < window; ++n) {
      acc[t * hop + n] += win[n] * time[n].real();
      wsum[t * hop + n] += win[n] * win[n];
    }
  }

  std::vector<double> out(out_len, 0.0);
  for (int64_t m = 0; m < out_len; ++m) {
    const int64_t idx = m + pad;
    if (idx < acc_len) {
      const double denom = wsum[idx];
      out[m] = denom > 1e-12 ? acc[idx] / denom : 0.0;
    }
  }
  return out;
}

}  // namespace

std::vector<double> hann_window(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / n));
  return w;
}

ComplexSpectrogram stft(const StereoWave& wave, const STFTConfig& cfg) {
  if (wave.length() < 1) throw std::invalid_argument("stft: empty input");
  for (int c = 0; c < 2; ++c) {
    for (double v : wave.channel(c)) {
      if (!std::isfinite(v)) throw std::invalid_argument("stft: non-finite sample");
    }
  }

  const std::vector<double> win = hann_window(cfg.window_size);
  ComplexStft z;
  z.bins = cfg.kept_bins;
  z.frames = static_cast<int>(frame_count(wave.length(), cfg.hop));
  forward_channel(wave.left, cfg.window_size, cfg.hop, cfg.kept_bins, win, z.ch[0]);
  forward_channel(wave.right, cfg.window_size, cfg.hop, cfg.kept_bins, win, z.ch[1]);
  return pack(z, cfg, wave.length());
}

StereoWave istft(const ComplexSpectrogram& spec) {
  if (spec.original_length < 0)
    throw std::invalid_argument("istft: original_length is not set");
  const STFTConfig& cfg = spec.meta;
  ComplexStft z = unpack(spec);
  const std::vector<double> win = hann_window(cfg.window_size);

  StereoWave out(spec.original_length, cfg.sample_rate);
  out.left = inverse_channel(z.ch[0], z.frames, cfg.window_size, cfg.hop, cfg.kept_bins, win,
                             spec.original_length);
  out.right = inverse_channel(z.ch[1], z.frames, cfg.window_size, cfg.hop, cfg.kept_bins, win,
                              spec.original_length);
  return out;
}

ComplexSpectrogram pack(const ComplexStft& z, const STFTConfig& cfg, int64_t original_length) {
  ComplexSpectrogram spec;
  spec.meta = cfg;
  spec.original_length = original_length;
  spec.data = Tensor({4, z.bins, z.frames});
  for (int c = 0; c < 2; ++c) {
    for (int t = 0; t < z.frames; ++t) {
      for (int f = 0; f < z.bins; ++f) {
        const std::complex<double> v = z.ch[c][static_cast<size_t>(t) * z.bins + f];
        spec.data(2 * c, f, t) = v.real();
        spec.data(2 * c + 1, f, t) = v.imag();
      }
    }
  }
  return spec;
}

ComplexStft unpack(const ComplexSpectrogram& spec) {
  if (spec.data.rank() != 3 || spec.data.dim(0) != 4)
    throw std::invalid_argument("unpack: expected 4 channels [L.re, L.im, R.re, R.im]");
  ComplexStft z;
  z.bins = static_cast<int>(spec.data.dim(1));
  z.frames = static_cast<int>(spec.data.dim(2));
  for (int c = 0; c < 2; ++c) {
    z.ch[c].resize(static_cast<size_t>(z.bins) * z.frames);
    for (int t = 0; t < z.frames; ++t) {
      for (int f = 0; f < z.bins; ++f) {
        z.ch[c][static_cast<size_t>(t) * z.bins + f] = {spec.data(2 * c, f, t),
                                                        spec.data(2 * c + 1, f, t)};
      }
    }
  }
  return z;
}

Tensor istft_adjoint(const StereoWave& grad_wave, const ComplexSpectrogram& like) {
  const STFTConfig& cfg = like.meta;
  const int window = cfg.window_size;
  const int hop = cfg.hop;
  const int kept = static_cast<int>(like.bins());
  const int64_t frames = like.frames();
  const int half = window / 2;
  const int64_t pad = half;
  const int64_t acc_len = (frames - 1) * hop + window;
  const std::vector<double> win = hann_window(window);

  // wsum of the forward pass (identical guard).
  std::vector<double> wsum(acc_len, 0.0);
  for (int64_t t = 0; t < frames; ++t)
    for (int n = 0; n < window; ++n) wsum[t * hop + n] += win[n] * win[n];

  Tensor grad({4, kept, frames});
  std::vector<double> grad_acc(acc_len, 0.0);
  std::vector<std::complex<double>> h(window), spec(window);

  for (int c = 0; c < 2; ++c) {
    std::fill(grad_acc.begin(), grad_acc.end(), 0.0);
    const std::vector<double>& gw = grad_wave.channel(c);
    const int64_t out_len = static_cast<int64_t>(gw.size());
    for (int64_t m = 0; m < out_len; ++m) {
      const int64_t idx = m + pad;
      if (idx < acc_len && wsum[idx] > 1e-12) grad_acc[idx] = gw[m] / wsum[idx];
    }
    for (int64_t t = 0; t < frames; ++t) {
      for (int n = 0; n < window; ++n) h[n] = {win[n] * grad_acc[t * hop + n], 0.0};
      fft_engine().fwd(spec, h);
      for (int f = 0; f < kept; ++f) {
        const double scale = (f == 0 || 2 * f == window) ? 1.0 / window : 2.0 / window;
        grad(2 * c, f, t) = scale * spec[f].real();
        grad(2 * c + 1, f, t) = scale * spec[f].imag();
      }
    }
  }
  return grad;
}

Tensor loss_stft(const StereoWave& wave, int window, int hop) {
  const int kept = window / 2 + 1;
  const std::vector<double> win = hann_window(window);
  const int64_t frames = frame_count(wave.length(), hop);
  Tensor out({4, kept, frames});
  std::vector<std::complex<double>> data;
  for (int c = 0; c < 2; ++c) {
    forward_channel(wave.channel(c), window, hop, kept, win, data);
    for (int64_t t = 0; t < frames; ++t) {
      for (int f = 0; f < kept; ++f) {
        const std::complex<double> v = data[static_cast<size_t>(t) * kept + f];
        out(2 * c, f, t) = v.real();
        out(2 * c + 1, f, t) = v.imag();
      }
    }
  }
  return out;
}

StereoWave loss_stft_adjoint(const Tensor& grad_spec, int window, int hop, int64_t wave_len,
                             int sample_rate) {
  const int kept = window / 2 + 1;
  const int64_t frames = grad_spec.dim(2);
  const int64_t pad = window / 2;
  const std::vector<double> win = hann_window(window);

  StereoWave grad(wave_len, sample_rate);
  std::vector<std::complex<double>> g(window), time(window);
  for (int c = 0; c < 2; ++c) {
    std::vector<double>& gx = grad.channel(c);
    for (int64_t t = 0; t < frames; ++t) {
      for (int f = 0; f < window; ++f) g[f] = {0.0, 0.0};
      for (int f = 0; f < kept; ++f) g[f] = {grad_spec(2 * c, f, t), grad_spec(2 * c + 1, f, t)};
      // adjoint of the one-sided DFT: Re(N * ifft(zero-padded g))
      fft_engine().inv(time, g);
      for (int n = 0; n < window; ++n) {
        const int64_t src = t * hop + n - pad;
        gx[static_cast<size_t>(fold_reflect(src, wave_len))] += win[n] * time[n].real() * window;
      }
    }
  }
  return grad;
}

}  // namespace stemsep

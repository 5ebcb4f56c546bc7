// Copyright 2026 The stemsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "stemsep/audio.hpp"
#include "stemsep/config.hpp"
#include "stemsep/tensor.hpp"

namespace stemsep {

// Stereo complex STFT before channel packing: one bins x frames matrix per
// channel, stored frame-major (frame t, bin f at [t * bins + f]).
struct ComplexStft {
  int bins = 0;
  int frames = 0;
  std::vector<std::complex<double>> ch[2];

  std::complex<double>& at(int c, int f, int t) { return ch[c][static_cast<size_t>(t) * bins + f]; }
  std::complex<double> at(int c, int f, int t) const { return ch[c][static_cast<size_t>(t) * bins + f]; }
};

// Channel packing is fixed: [L.real, L.imag, R.real, R.imag].
struct ComplexSpectrogram {
  Tensor data;  // (4, kept_bins, frames)
  STFTConfig meta;
  int64_t original_length = -1;

  int64_t bins() const { return data.dim(1); }
  int64_t frames() const { return data.dim(2); }
};

// Centered analysis (reflect padding), periodic Hann window, bins above
// kept_bins discarded. frames = 1 + floor(len / hop).
ComplexSpectrogram stft(const StereoWave& wave, const STFTConfig& cfg);

// Zero-fills the discarded bins, synthesizes with the analysis window and
// normalizes by the accumulated squared window, then crops to
// original_length. Identity on content below the truncation edge.
StereoWave istft(const ComplexSpectrogram& spec);

ComplexSpectrogram pack(const ComplexStft& z, const STFTConfig& cfg, int64_t original_length);
ComplexStft unpack(const ComplexSpectrogram& spec);

// Adjoint maps for gradient propagation. Both are exact transposes of the
// corresponding linear forward maps (verified by dot-product tests).
//
// istft_adjoint: d(loss)/d(wave) -> d(loss)/d(spec)
Tensor istft_adjoint(const StereoWave& grad_wave, const ComplexSpectrogram& like);

// Untruncated single-resolution complex STFT used by the multi-resolution
// loss: returns (4, window/2+1, frames) packed tensor.
Tensor loss_stft(const StereoWave& wave, int window, int hop);
// Adjoint of loss_stft: d(loss)/d(packed stft) -> d(loss)/d(wave).
StereoWave loss_stft_adjoint(const Tensor& grad_spec, int window, int hop, int64_t wave_len,
                             int sample_rate);

std::vector<double> hann_window(int n);

}  // namespace stemsep

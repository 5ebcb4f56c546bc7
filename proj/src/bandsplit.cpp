// Copyright 2026 The stemsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "stemsep/bandsplit.hpp"

#include <stdexcept>

#include "stemsep/nn.hpp"

namespace stemsep {

BandedTensor band_split(const ComplexSpectrogram& spec, int n_band) {
  const int64_t c_in = spec.data.dim(0);
  const int64_t bins = spec.data.dim(1);
  const int64_t frames = spec.data.dim(2);
  if (n_band < 1 || bins % n_band != 0)
    throw std::invalid_argument("band_split: kept_bins not divisible by n_band");

  const int64_t fb = bins / n_band;
  BandedTensor out;
  out.n_band = n_band;
  out.channels_per_group = static_cast<int>(c_in);
  out.data = Tensor({c_in * n_band, fb, frames});
  for (int b = 0; b < n_band; ++b) {
    for (int64_t c = 0; c < c_in; ++c) {
      for (int64_t f = 0; f < fb; ++f) {
        for (int64_t t = 0; t < frames; ++t) {
          out.data(b * c_in + c, f, t) = spec.data(c, b * fb + f, t);
        }
      }
    }
  }
  return out;
}

ComplexSpectrogram band_merge(const BandedTensor& banded, const STFTConfig& meta,
                              int64_t original_length) {
  if (banded.channels_per_group != 4)
    throw std::invalid_argument("band_merge: channels_per_group must be 4 (decoded tensor)");
  const int nb = banded.n_band;
  const int64_t fb = banded.bins();
  const int64_t frames = banded.frames();
  if (banded.channels() != 4 * nb)
    throw std::invalid_argument("band_merge: channel count mismatch");

  ComplexSpectrogram spec;
  spec.meta = meta;
  spec.original_length = original_length;
  spec.data = Tensor({4, fb * nb, frames});
  for (int b = 0; b < nb; ++b) {
    for (int64_t c = 0; c < 4; ++c) {
      for (int64_t f = 0; f < fb; ++f) {
        for (int64_t t = 0; t < frames; ++t) {
          spec.data(c, b * fb + f, t) = banded.data(b * 4 + c, f, t);
        }
      }
    }
  }
  return spec;
}

BandedTensor split_conv(const BandedTensor& banded, const Tensor& weight, const Tensor& bias,
                        int k, int out_channels) {
  const int nb = banded.n_band;
  if (out_channels % nb != 0)
    throw std::invalid_argument("split_conv: out_channels not divisible by n_band");
  if (banded.channels() % nb != 0)
    throw std::invalid_argument("split_conv: in_channels not divisible by n_band");

  nn::Conv2d conv(static_cast<int>(banded.channels()), out_channels, k, k, nb, 1, "split_conv");
  if (!conv.weight.value.same_shape(weight))
    throw std::invalid_argument("split_conv: weight shape mismatch");
  conv.weight.value = weight;
  conv.bias.value = bias;

  BandedTensor out;
  out.n_band = nb;
  out.channels_per_group = out_channels / nb;
  out.data = conv.forward(banded.data, /*keep_cache=*/false);
  return out;
}

int64_t split_conv_param_count(int in_channels, int out_channels, int k, int groups, bool bias) {
  int64_t n = static_cast<int64_t>(in_channels) * out_channels * k * k / groups;
  if (bias) n += out_channels;
  return n;
}

}  // namespace stemsep

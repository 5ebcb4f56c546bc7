// Copyright 2026 The stemsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "stemsep/spectral.hpp"
#include "stemsep/tensor.hpp"

namespace stemsep {

// Equal subband division with channel stacking. Group b occupies the
// contiguous channel slice [b*channels_per_group, (b+1)*channels_per_group)
// and carries frequency bins [b*F/n_band, (b+1)*F/n_band) of the source.
struct BandedTensor {
  Tensor data;  // (channels, bins_per_band, frames)
  int n_band = 1;
  int channels_per_group = 0;

  int64_t channels() const { return data.dim(0); }
  int64_t bins() const { return data.dim(1); }
  int64_t frames() const { return data.dim(2); }
};

// (4, F, T) -> (4*n_band, F/n_band, T); lossless rearrangement.
BandedTensor band_split(const ComplexSpectrogram& spec, int n_band);

// Exact inverse; requires channels_per_group == 4.
ComplexSpectrogram band_merge(const BandedTensor& banded, const STFTConfig& meta,
                              int64_t original_length);

// Grouped KxK convolution over (frequency, time) with same-padding and bias,
// n_band channel groups: output group b depends only on input group b.
// weight shape (out_channels, in_channels/n_band, K, K), bias (out_channels).
BandedTensor split_conv(const BandedTensor& banded, const Tensor& weight, const Tensor& bias,
                        int k, int out_channels);

// in*out*K^2/groups + out; the denominator is what makes the split module
// cheaper than its dense counterpart.
int64_t split_conv_param_count(int in_channels, int out_channels, int k, int groups, bool bias);

}  // namespace stemsep

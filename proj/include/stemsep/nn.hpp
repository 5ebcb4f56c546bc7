// Copyright 2026 The stemsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>
#include <vector>

#include "stemsep/rng.hpp"
#include "stemsep/tensor.hpp"

namespace stemsep {
namespace nn {

struct Parameter {
  Tensor value;
  Tensor grad;
  std::string name;

  void init(std::vector<int64_t> shape, std::string n) {
    value = Tensor(shape);
    grad = Tensor(shape);
    name = std::move(n);
  }
  void zero_grad() { grad.fill(0.0); }
};

using ParamRefs = std::vector<Parameter*>;

// Test-harness switch: when enabled, GELU and the normalization layers
// become pass-throughs so that linearity of the remaining structure can be
// asserted by superposition. Never active outside tests.
bool& linear_test_mode();

// --- activations ---------------------------------------------------------

double gelu(double x);
double gelu_grad(double x);
Tensor gelu_forward(const Tensor& x);
Tensor gelu_backward(const Tensor& grad_y, const Tensor& x);

// --- convolution ---------------------------------------------------------

// 2-D convolution over (frequency, time) with same padding on both axes
// and optional stride over time. Grouped channels: output channel o reads
// only input channels of its group. Stride 2 yields ceil(T/2) frames.
struct Conv2d {
  int in_c = 0, out_c = 0, kf = 1, kt = 1, groups = 1, stride_t = 1;
  Parameter weight;  // (out_c, in_c/groups, kf, kt)
  Parameter bias;    // (out_c)
  Tensor cache_x;
  bool has_cache = false;

  Conv2d() = default;
  Conv2d(int in_c, int out_c, int kf, int kt, int groups, int stride_t, const std::string& name);

  void init_weights(Rng& rng);
  Tensor forward(const Tensor& x, bool keep_cache);
  Tensor backward(const Tensor& grad_y);
  void collect(ParamRefs& out);
  int64_t out_frames(int64_t frames) const;
};

// Transposed convolution over time with kernel == stride (exact integer
// upsampling). weight (in_c, out_c, k).
struct TransposedTimeConv {
  int in_c = 0, out_c = 0, k = 1;
  Parameter weight;
  Parameter bias;
  Tensor cache_x;

  TransposedTimeConv() = default;
  TransposedTimeConv(int in_c, int out_c, int k, const std::string& name);

  void init_weights(Rng& rng);
  Tensor forward(const Tensor& x, bool keep_cache);
  Tensor backward(const Tensor& grad_y);
  void collect(ParamRefs& out);
};

// --- normalization -------------------------------------------------------

// Channel-group normalization over (C/groups, F, T) slices with per-channel
// affine. Groups align with the band groups so statistics never mix bands.
struct GroupNorm {
  int channels = 0, groups = 1;
  double eps = 1e-5;
  Parameter gamma, beta;
  Tensor cache_xhat;
  std::vector<double> cache_inv_std;

  GroupNorm() = default;
  GroupNorm(int channels, int groups, const std::string& name);

  Tensor forward(const Tensor& x, bool keep_cache);
  Tensor backward(const Tensor& grad_y);
  void collect(ParamRefs& out);
};

// Normalizes each row of a (P, dim) matrix tensor.
struct LayerNorm {
  int dim = 0;
  double eps = 1e-5;
  Parameter gamma, beta;
  Tensor cache_xhat;
  std::vector<double> cache_inv_std;

  LayerNorm() = default;
  LayerNorm(int dim, const std::string& name);

  Tensor forward(const Tensor& x, bool keep_cache);
  Tensor backward(const Tensor& grad_y);
  void collect(ParamRefs& out);
};

// --- dense ----------------------------------------------------------------

// y = x W^T + b over (P, in) -> (P, out).
struct Linear {
  int in = 0, out = 0;
  Parameter weight;  // (out, in)
  Parameter bias;    // (out)
  Tensor cache_x;

  Linear() = default;
  Linear(int in, int out, const std::string& name);

  void init_weights(Rng& rng);
  Tensor forward(const Tensor& x, bool keep_cache);
  Tensor backward(const Tensor& grad_y);
  void collect(ParamRefs& out);
};

// --- shape utilities ------------------------------------------------------

// Repeats each time step `factor` times, cropped to out_frames.
Tensor repeat_upsample_time(const Tensor& x, int factor, int64_t out_frames);
Tensor repeat_upsample_time_backward(const Tensor& grad_y, int factor, int64_t in_frames);

Tensor crop_time(const Tensor& x, int64_t frames);
Tensor pad_time(const Tensor& x, int64_t frames);

double grad_global_norm(const ParamRefs& params);
void scale_grads(const ParamRefs& params, double s);
void zero_grads(const ParamRefs& params);

}  // namespace nn
}  // namespace stemsep

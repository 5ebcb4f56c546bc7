// Copyright 2026 The stemsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "stemsep/nn.hpp"

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>

namespace stemsep {
namespace nn {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using MapConst = Eigen::Map<const RowMat>;
}  // namespace

bool& linear_test_mode() {
  thread_local bool mode = false;
  return mode;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_grad(double x) {
  return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

Tensor gelu_forward(const Tensor& x) {
  if (linear_test_mode()) return x;
  Tensor y(x.shape());
  for (int64_t i = 0; i < x.size(); ++i) y[i] = gelu(x[i]);
  return y;
}

Tensor gelu_backward(const Tensor& grad_y, const Tensor& x) {
  if (linear_test_mode()) return grad_y;
  Tensor g(x.shape());
  for (int64_t i = 0; i < x.size(); ++i) g[i] = grad_y[i] * gelu_grad(x[i]);
  return g;
}

// --- Conv2d ----------------------------------------------------------------

Conv2d::Conv2d(int in_c_, int out_c_, int kf_, int kt_, int groups_, int stride_t_,
               const std::string& name)
    : in_c(in_c_), out_c(out_c_), kf(kf_), kt(kt_), groups(groups_), stride_t(stride_t_) {
  if (in_c % groups != 0 || out_c % groups != 0)
    throw std::invalid_argument(name + ": channels not divisible by groups");
  if (kf % 2 == 0 || kt % 2 == 0)
    throw std::invalid_argument(name + ": even kernel size unsupported");
  weight.init({out_c, in_c / groups, kf, kt}, name + ".weight");
  bias.init({out_c}, name + ".bias");
}

void Conv2d::init_weights(Rng& rng) {
  const double fan_in = static_cast<double>(in_c / groups) * kf * kt;
  const double bound = std::sqrt(1.0 / fan_in);
  for (int64_t i = 0; i < weight.value.size(); ++i) weight.value[i] = rng.uniform(-bound, bound);
  bias.value.fill(0.0);
}

int64_t Conv2d::out_frames(int64_t frames) const {
  return stride_t == 1 ? frames : (frames + stride_t - 1) / stride_t;
}

Tensor Conv2d::forward(const Tensor& x, bool keep_cache) {
  if (x.rank() != 3 || x.dim(0) != in_c)
    throw std::invalid_argument(weight.name + ": input channel mismatch");
  const int64_t F = x.dim(1);
  const int64_t T = x.dim(2);
  const int64_t To = out_frames(T);
  const int pf = (kf - 1) / 2;
  const int pt = (kt - 1) / 2;
  const int in_per_group = in_c / groups;
  const int out_per_group = out_c / groups;

  Tensor y({out_c, F, To});
  const double* xd = x.data();
  double* yd = y.data();

  if (kf == 1 && kt == 1 && stride_t == 1) {
    // pointwise conv as one GEMM per group
    for (int g = 0; g < groups; ++g) {
      MapConst w(weight.value.data() + static_cast<int64_t>(g) * out_per_group * in_per_group,
                 out_per_group, in_per_group);
      MapConst xin(xd + static_cast<int64_t>(g) * in_per_group * F * T, in_per_group, F * T);
      MapMat yout(yd + static_cast<int64_t>(g) * out_per_group * F * T, out_per_group, F * T);
      yout.noalias() = w * xin;
    }
    for (int oc = 0; oc < out_c; ++oc) {
      const double b = bias.value[oc];
      double* row = yd + static_cast<int64_t>(oc) * F * To;
      for (int64_t i = 0; i < F * To; ++i) row[i] += b;
    }
  } else {
    for (int oc = 0; oc < out_c; ++oc) {
      const int g = oc / out_per_group;
      double* yrow = yd + static_cast<int64_t>(oc) * F * To;
      const double b = bias.value[oc];
      for (int64_t i = 0; i < F * To; ++i) yrow[i] = b;
      for (int icg = 0; icg < in_per_group; ++icg) {
        const int ic = g * in_per_group + icg;
        const double* xrow = xd + static_cast<int64_t>(ic) * F * T;
        for (int a = 0; a < kf; ++a) {
          for (int bt = 0; bt < kt; ++bt) {
            const double w = weight.value(oc, icg, a, bt);
            if (w == 0.0) continue;
            for (int64_t fo = 0; fo < F; ++fo) {
              const int64_t fi = fo + a - pf;
              if (fi < 0 || fi >= F) continue;
              const double* xr = xrow + fi * T;
              double* yr = yrow + fo * To;
              for (int64_t to = 0; to < To; ++to) {
                const int64_t ti = to * stride_t + bt - pt;
                if (ti < 0 || ti >= T) continue;
                yr[to] += w * xr[ti];
              }
            }
          }
        }
      }
    }
  }

  if (keep_cache) {
    cache_x = x;
    has_cache = true;
  }
  return y;
}

Tensor Conv2d::backward(const Tensor& grad_y) {
  if (!has_cache) throw std::logic_error(weight.name + ": backward without cached forward");
  const Tensor& x = cache_x;
  const int64_t F = x.dim(1);
  const int64_t T = x.dim(2);
  const int64_t To = grad_y.dim(2);
  const int pf = (kf - 1) / 2;
  const int pt = (kt - 1) / 2;
  const int in_per_group = in_c / groups;
  const int out_per_group = out_c / groups;

  Tensor grad_x({in_c, F, T});
  const double* xd = x.data();
  const double* gyd = grad_y.data();
  double* gxd = grad_x.data();

  if (kf == 1 && kt == 1 && stride_t == 1) {
    for (int g = 0; g < groups; ++g) {
      MapConst w(weight.value.data() + static_cast<int64_t>(g) * out_per_group * in_per_group,
                 out_per_group, in_per_group);
      MapMat gw(weight.grad.data() + static_cast<int64_t>(g) * out_per_group * in_per_group,
                out_per_group, in_per_group);
      MapConst xin(xd + static_cast<int64_t>(g) * in_per_group * F * T, in_per_group, F * T);
      MapConst gy(gyd + static_cast<int64_t>(g) * out_per_group * F * T, out_per_group, F * T);
      MapMat gx(gxd + static_cast<int64_t>(g) * in_per_group * F * T, in_per_group, F * T);
      gx.noalias() = w.transpose() * gy;
      gw.noalias() += gy * xin.transpose();
    }
    for (int oc = 0; oc < out_c; ++oc) {
      const double* row = gyd + static_cast<int64_t>(oc) * F * To;
      double s = 0.0;
      for (int64_t i = 0; i < F * To; ++i) s += row[i];
      bias.grad[oc] += s;
    }
  } else {
    for (int oc = 0; oc < out_c; ++oc) {
      const int g = oc / out_per_group;
      const double* gyrow = gyd + static_cast<int64_t>(oc) * F * To;
      double bsum = 0.0;
      for (int64_t i = 0; i < F * To; ++i) bsum += gyrow[i];
      bias.grad[oc] += bsum;
      for (int icg = 0; icg < in_per_group; ++icg) {
        const int ic = g * in_per_group + icg;
        const double* xrow = xd + static_cast<int64_t>(ic) * F * T;
        double* gxrow = gxd + static_cast<int64_t>(ic) * F * T;
        for (int a = 0; a < kf; ++a) {
          for (int bt = 0; bt < kt; ++bt) {
            const double w = weight.value(oc, icg, a, bt);
            double wg = 0.0;
            for (int64_t fo = 0; fo < F; ++fo) {
              const int64_t fi = fo + a - pf;
              if (fi < 0 || fi >= F) continue;
              const double* xr = xrow + fi * T;
              double* gxr = gxrow + fi * T;
              const double* gyr = gyrow + fo * To;
              for (int64_t to = 0; to < To; ++to) {
                const int64_t ti = to * stride_t + bt - pt;
                if (ti < 0 || ti >= T) continue;
                wg += gyr[to] * xr[ti];
                gxr[ti] += w * gyr[to];
              }
            }
            weight.grad(oc, icg, a, bt) += wg;
          }
        }
      }
    }
  }

  has_cache = false;
  return grad_x;
}

void Conv2d::collect(ParamRefs& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

// --- TransposedTimeConv ------------------------------------------------------

TransposedTimeConv::TransposedTimeConv(int in_c_, int out_c_, int k_, const std::string& name)
    : in_c(in_c_), out_c(out_c_), k(k_) {
  weight.init({in_c, out_c, k}, name + ".weight");
  bias.init({out_c}, name + ".bias");
}

void TransposedTimeConv::init_weights(Rng& rng) {
  const double bound = std::sqrt(1.0 / in_c);
  for (int64_t i = 0; i < weight.value.size(); ++i) weight.value[i] = rng.uniform(-bound, bound);
  bias.value.fill(0.0);
}

Tensor TransposedTimeConv::forward(const Tensor& x, bool keep_cache) {
  if (x.dim(0) != in_c) throw std::invalid_argument(weight.name + ": input channel mismatch");
  const int64_t F = x.dim(1);
  const int64_t T = x.dim(2);
  Tensor y({out_c, F, T * k});
  for (int oc = 0; oc < out_c; ++oc) {
    const double b = bias.value[oc];
    double* yrow = y.data() + static_cast<int64_t>(oc) * F * T * k;
    for (int64_t i = 0; i < F * T * k; ++i) yrow[i] = b;
  }
  for (int ic = 0; ic < in_c; ++ic) {
    for (int oc = 0; oc < out_c; ++oc) {
      for (int j = 0; j < k; ++j) {
        const double w = weight.value(ic, oc, j);
        if (w == 0.0) continue;
        for (int64_t f = 0; f < F; ++f) {
          const double* xr = x.data() + (static_cast<int64_t>(ic) * F + f) * T;
          double* yr = y.data() + (static_cast<int64_t>(oc) * F + f) * T * k + j;
          for (int64_t t = 0; t < T; ++t) yr[t * k] += w * xr[t];
        }
      }
    }
  }
  if (keep_cache) cache_x = x;
  return y;
}

Tensor TransposedTimeConv::backward(const Tensor& grad_y) {
  const Tensor& x = cache_x;
  const int64_t F = x.dim(1);
  const int64_t T = x.dim(2);
  Tensor grad_x({in_c, F, T});
  for (int oc = 0; oc < out_c; ++oc) {
    const double* gyrow = grad_y.data() + static_cast<int64_t>(oc) * F * T * k;
    double s = 0.0;
    for (int64_t i = 0; i < F * T * k; ++i) s += gyrow[i];
    bias.grad[oc] += s;
  }
  for (int ic = 0; ic < in_c; ++ic) {
    for (int oc = 0; oc < out_c; ++oc) {
      for (int j = 0; j < k; ++j) {
        const double w = weight.value(ic, oc, j);
        double wg = 0.0;
        for (int64_t f = 0; f < F; ++f) {
          const double* xr = x.data() + (static_cast<int64_t>(ic) * F + f) * T;
          double* gxr = grad_x.data() + (static_cast<int64_t>(ic) * F + f) * T;
          const double* gyr = grad_y.data() + (static_cast<int64_t>(oc) * F + f) * T * k + j;
          for (int64_t t = 0; t < T; ++t) {
            wg += gyr[t * k] * xr[t];
            gxr[t] += w * gyr[t * k];
          }
        }
        weight.grad(ic, oc, j) += wg;
      }
    }
  }
  return grad_x;
}

void TransposedTimeConv::collect(ParamRefs& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

// --- GroupNorm ---------------------------------------------------------------

GroupNorm::GroupNorm(int channels_, int groups_, const std::string& name)
    : channels(channels_), groups(groups_) {
  if (channels % groups != 0)
    throw std::invalid_argument(name + ": channels not divisible by groups");
  gamma.init({channels}, name + ".gamma");
  beta.init({channels}, name + ".beta");
  gamma.value.fill(1.0);
}

Tensor GroupNorm::forward(const Tensor& x, bool keep_cache) {
  if (linear_test_mode()) {
    if (keep_cache) cache_xhat = Tensor();
    return x;
  }
  const int64_t F = x.dim(1);
  const int64_t T = x.dim(2);
  const int cg = channels / groups;
  const int64_t m = static_cast<int64_t>(cg) * F * T;

  Tensor xhat(x.shape());
  Tensor y(x.shape());
  cache_inv_std.assign(groups, 0.0);
  for (int g = 0; g < groups; ++g) {
    const double* xs = x.data() + static_cast<int64_t>(g) * m;
    double mean = 0.0;
    for (int64_t i = 0; i < m; ++i) mean += xs[i];
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (int64_t i = 0; i < m; ++i) {
      const double d = xs[i] - mean;
      var += d * d;
    }
    var /= static_cast<double>(m);
    const double inv_std = 1.0 / std::sqrt(var + eps);
    cache_inv_std[g] = inv_std;
    double* xh = xhat.data() + static_cast<int64_t>(g) * m;
    for (int64_t i = 0; i < m; ++i) xh[i] = (xs[i] - mean) * inv_std;
    for (int c = 0; c < cg; ++c) {
      const int ch = g * cg + c;
      const double ga = gamma.value[ch];
      const double be = beta.value[ch];
      const double* xhr = xhat.data() + static_cast<int64_t>(ch) * F * T;
      double* yr = y.data() + static_cast<int64_t>(ch) * F * T;
      for (int64_t i = 0; i < F * T; ++i) yr[i] = ga * xhr[i] + be;
    }
  }
  if (keep_cache) cache_xhat = xhat;
  return y;
}

Tensor GroupNorm::backward(const Tensor& grad_y) {
  if (linear_test_mode()) return grad_y;
  const Tensor& xhat = cache_xhat;
  const int64_t F = xhat.dim(1);
  const int64_t T = xhat.dim(2);
  const int cg = channels / groups;
  const int64_t m = static_cast<int64_t>(cg) * F * T;

  Tensor grad_x(xhat.shape());
  for (int g = 0; g < groups; ++g) {
    // per-channel affine grads and dxhat
    double sum_dxhat = 0.0;
    double sum_dxhat_xhat = 0.0;
    for (int c = 0; c < cg; ++c) {
      const int ch = g * cg + c;
      const double ga = gamma.value[ch];
      const double* gyr = grad_y.data() + static_cast<int64_t>(ch) * F * T;
      const double* xhr = xhat.data() + static_cast<int64_t>(ch) * F * T;
      double dg = 0.0, db = 0.0;
      for (int64_t i = 0; i < F * T; ++i) {
        dg += gyr[i] * xhr[i];
        db += gyr[i];
        const double dxh = gyr[i] * ga;
        sum_dxhat += dxh;
        sum_dxhat_xhat += dxh * xhr[i];
      }
      gamma.grad[ch] += dg;
      beta.grad[ch] += db;
    }
    const double inv_std = cache_inv_std[g];
    const double mean_dxhat = sum_dxhat / static_cast<double>(m);
    const double mean_dxhat_xhat = sum_dxhat_xhat / static_cast<double>(m);
    for (int c = 0; c < cg; ++c) {
      const int ch = g * cg + c;
      const double ga = gamma.value[ch];
      const double* gyr = grad_y.data() + static_cast<int64_t>(ch) * F * T;
      const double* xhr = xhat.data() + static_cast<int64_t>(ch) * F * T;
      double* gxr = grad_x.data() + static_cast<int64_t>(ch) * F * T;
      for (int64_t i = 0; i < F * T; ++i) {
        const double dxh = gyr[i] * ga;
        gxr[i] = inv_std * (dxh - mean_dxhat - xhr[i] * mean_dxhat_xhat);
      }
    }
  }
  return grad_x;
}

void GroupNorm::collect(ParamRefs& out) {
  out.push_back(&gamma);
  out.push_back(&beta);
}

// --- LayerNorm ---------------------------------------------------------------

LayerNorm::LayerNorm(int dim_, const std::string& name) : dim(dim_) {
  gamma.init({dim}, name + ".gamma");
  beta.init({dim}, name + ".beta");
  gamma.value.fill(1.0);
}

Tensor LayerNorm::forward(const Tensor& x, bool keep_cache) {
  if (linear_test_mode()) return x;
  const int64_t P = x.size() / dim;
  Tensor xhat(x.shape());
  Tensor y(x.shape());
  cache_inv_std.assign(static_cast<size_t>(P), 0.0);
  for (int64_t p = 0; p < P; ++p) {
    const double* xr = x.data() + p * dim;
    double mean = 0.0;
    for (int i = 0; i < dim; ++i) mean += xr[i];
    mean /= dim;
    double var = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double d = xr[i] - mean;
      var += d * d;
    }
    var /= dim;
    const double inv_std = 1.0 / std::sqrt(var + eps);
    cache_inv_std[static_cast<size_t>(p)] = inv_std;
    double* xhr = xhat.data() + p * dim;
    double* yr = y.data() + p * dim;
    for (int i = 0; i < dim; ++i) {
      xhr[i] = (xr[i] - mean) * inv_std;
      yr[i] = gamma.value[i] * xhr[i] + beta.value[i];
    }
  }
  if (keep_cache) cache_xhat = xhat;
  return y;
}

Tensor LayerNorm::backward(const Tensor& grad_y) {
  if (linear_test_mode()) return grad_y;
  const Tensor& xhat = cache_xhat;
  const int64_t P = xhat.size() / dim;
  Tensor grad_x(xhat.shape());
  for (int64_t p = 0; p < P; ++p) {
    const double* gyr = grad_y.data() + p * dim;
    const double* xhr = xhat.data() + p * dim;
    double* gxr = grad_x.data() + p * dim;
    double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double dxh = gyr[i] * gamma.value[i];
      mean_dxhat += dxh;
      mean_dxhat_xhat += dxh * xhr[i];
      gamma.grad[i] += gyr[i] * xhr[i];
      beta.grad[i] += gyr[i];
    }
    mean_dxhat /= dim;
    mean_dxhat_xhat /= dim;
    const double inv_std = cache_inv_std[static_cast<size_t>(p)];
    for (int i = 0; i < dim; ++i) {
      const double dxh = gyr[i] * gamma.value[i];
      gxr[i] = inv_std * (dxh - mean_dxhat - xhr[i] * mean_dxhat_xhat);
    }
  }
  return grad_x;
}

void LayerNorm::collect(ParamRefs& out) {
  out.push_back(&gamma);
  out.push_back(&beta);
}

// --- Linear --------------------------------------------------------------------

Linear::Linear(int in_, int out_, const std::string& name) : in(in_), out(out_) {
  weight.init({out, in}, name + ".weight");
  bias.init({out}, name + ".bias");
}

void Linear::init_weights(Rng& rng) {
  const double bound = std::sqrt(1.0 / in);
  for (int64_t i = 0; i < weight.value.size(); ++i) weight.value[i] = rng.uniform(-bound, bound);
  bias.value.fill(0.0);
}

Tensor Linear::forward(const Tensor& x, bool keep_cache) {
  const int64_t P = x.size() / in;
  Tensor y({P, out});
  MapConst xm(x.data(), P, in);
  MapConst wm(weight.value.data(), out, in);
  MapMat ym(y.data(), P, out);
  ym.noalias() = xm * wm.transpose();
  for (int64_t p = 0; p < P; ++p) {
    double* yr = y.data() + p * out;
    for (int i = 0; i < out; ++i) yr[i] += bias.value[i];
  }
  if (keep_cache) cache_x = x;
  return y;
}

Tensor Linear::backward(const Tensor& grad_y) {
  const int64_t P = grad_y.size() / out;
  Tensor grad_x({P, in});
  MapConst gym(grad_y.data(), P, out);
  MapConst wm(weight.value.data(), out, in);
  MapConst xm(cache_x.data(), P, in);
  MapMat gxm(grad_x.data(), P, in);
  MapMat gwm(weight.grad.data(), out, in);
  gxm.noalias() = gym * wm;
  gwm.noalias() += gym.transpose() * xm;
  for (int64_t p = 0; p < P; ++p) {
    const double* gyr = grad_y.data() + p * out;
    for (int i = 0; i < out; ++i) bias.grad[i] += gyr[i];
  }
  return grad_x;
}

void Linear::collect(ParamRefs& out_refs) {
  out_refs.push_back(&weight);
  out_refs.push_back(&bias);
}

// --- shape utilities -------------------------------------------------------------

Tensor repeat_upsample_time(const Tensor& x, int factor, int64_t out_frames) {
  const int64_t C = x.dim(0);
  const int64_t F = x.dim(1);
  const int64_t T = x.dim(2);
  Tensor y({C, F, out_frames});
  for (int64_t c = 0; c < C; ++c) {
    for (int64_t f = 0; f < F; ++f) {
      const double* xr = x.data() + (c * F + f) * T;
      double* yr = y.data() + (c * F + f) * out_frames;
      for (int64_t t = 0; t < out_frames; ++t) {
        const int64_t src = t / factor;
        yr[t] = xr[src < T ? src : T - 1];
      }
    }
  }
  return y;
}

Tensor repeat_upsample_time_backward(const Tensor& grad_y, int factor, int64_t in_frames) {
  const int64_t C = grad_y.dim(0);
  const int64_t F = grad_y.dim(1);
  const int64_t To = grad_y.dim(2);
  Tensor grad_x({C, F, in_frames});
  for (int64_t c = 0; c < C; ++c) {
    for (int64_t f = 0; f < F; ++f) {
      const double* gyr = grad_y.data() + (c * F + f) * To;
      double* gxr = grad_x.data() + (c * F + f) * in_frames;
      for (int64_t t = 0; t < To; ++t) {
        int64_t src = t / factor;
        if (src >= in_frames) src = in_frames - 1;
        gxr[src] += gyr[t];
      }
    }
  }
  return grad_x;
}

Tensor crop_time(const Tensor& x, int64_t frames) {
  const int64_t C = x.dim(0);
  const int64_t F = x.dim(1);
  const int64_t T = x.dim(2);
  if (frames == T) return x;
  if (frames > T) throw std::invalid_argument("crop_time: target longer than input");
  Tensor y({C, F, frames});
  for (int64_t c = 0; c < C; ++c)
    for (int64_t f = 0; f < F; ++f) {
      const double* xr = x.data() + (c * F + f) * T;
      double* yr = y.data() + (c * F + f) * frames;
      for (int64_t t = 0; t < frames; ++t) yr[t] = xr[t];
    }
  return y;
}

Tensor pad_time(const Tensor& x, int64_t frames) {
  const int64_t C = x.dim(0);
  const int64_t F = x.dim(1);
  const int64_t T = x.dim(2);
  if (frames == T) return x;
  if (frames < T) throw std::invalid_argument("pad_time: target shorter than input");
  Tensor y({C, F, frames});
  for (int64_t c = 0; c < C; ++c)
    for (int64_t f = 0; f < F; ++f) {
      const double* xr = x.data() + (c * F + f) * T;
      double* yr = y.data() + (c * F + f) * frames;
      for (int64_t t = 0; t < T; ++t) yr[t] = xr[t];
    }
  return y;
}

double grad_global_norm(const ParamRefs& params) {
  double s = 0.0;
  for (const Parameter* p : params)
    for (int64_t i = 0; i < p->grad.size(); ++i) s += p->grad[i] * p->grad[i];
  return std::sqrt(s);
}

void scale_grads(const ParamRefs& params, double s) {
  for (Parameter* p : params)
    for (int64_t i = 0; i < p->grad.size(); ++i) p->grad[i] *= s;
}

void zero_grads(const ParamRefs& params) {
  for (Parameter* p : params) p->zero_grad();
}

}  // namespace nn
}  // namespace stemsep

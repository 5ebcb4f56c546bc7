// Copyright 2026 The stemsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace stemsep {

// Dense row-major tensor of doubles. Rank is dynamic but small (<= 4 in
// practice). Hot loops index through data() directly; operator() is for
// non-critical paths and tests.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int64_t> shape) : shape_(std::move(shape)) {
    int64_t n = 1;
    for (int64_t d : shape_) {
      if (d < 0) throw std::invalid_argument("Tensor: negative dimension");
      n *= d;
    }
    data_.assign(static_cast<size_t>(n), 0.0);
  }

  static Tensor zeros(std::vector<int64_t> shape) { return Tensor(std::move(shape)); }

  int rank() const { return static_cast<int>(shape_.size()); }
  int64_t dim(int i) const { return shape_.at(static_cast<size_t>(i)); }
  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  double& operator()(int64_t a, int64_t b) { return data_[static_cast<size_t>(a * shape_[1] + b)]; }
  double operator()(int64_t a, int64_t b) const { return data_[static_cast<size_t>(a * shape_[1] + b)]; }

  double& operator()(int64_t a, int64_t b, int64_t c) {
    return data_[static_cast<size_t>((a * shape_[1] + b) * shape_[2] + c)];
  }
  double operator()(int64_t a, int64_t b, int64_t c) const {
    return data_[static_cast<size_t>((a * shape_[1] + b) * shape_[2] + c)];
  }

  double& operator()(int64_t a, int64_t b, int64_t c, int64_t d) {
    return data_[static_cast<size_t>(((a * shape_[1] + b) * shape_[2] + c) * shape_[3] + d)];
  }
  double operator()(int64_t a, int64_t b, int64_t c, int64_t d) const {
    return data_[static_cast<size_t>(((a * shape_[1] + b) * shape_[2] + c) * shape_[3] + d)];
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  void add_scaled(const Tensor& other, double scale) {
    if (!same_shape(other)) throw std::invalid_argument("Tensor::add_scaled: shape mismatch");
    const double* src = other.data();
    double* dst = data();
    for (int64_t i = 0; i < size(); ++i) dst[i] += scale * src[i];
  }

  bool all_finite() const;

 private:
  std::vector<int64_t> shape_;
  std::vector<double> data_;
};

inline bool approx_equal(const Tensor& a, const Tensor& b, double tol) {
  if (!a.same_shape(b)) return false;
  for (int64_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > tol) return false;
  }
  return true;
}

}  // namespace stemsep

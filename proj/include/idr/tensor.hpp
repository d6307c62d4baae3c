#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "idr/errors.hpp"

namespace idr {

inline std::string shape_string(std::span<const std::size_t> shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

// Dense row-major tensor. The gradient buffer is allocated on demand and, when
// present, always matches the value buffer in length.
template <typename Real>
class Tensor {
 public:
  using value_type = Real;

  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape, Real fill = Real(0))
      : shape_(std::move(shape)), values_(element_count(shape_), fill) {}

  Tensor(std::vector<std::size_t> shape, std::vector<Real> values)
      : shape_(std::move(shape)), values_(std::move(values)) {
    if (element_count(shape_) != values_.size())
      throw shape_error("tensor shape " + shape_string(shape_) + " does not hold " +
                        std::to_string(values_.size()) + " values");
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return values_.size(); }
  std::size_t rank() const { return shape_.size(); }
  std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }

  std::span<Real> values() { return values_; }
  std::span<const Real> values() const { return values_; }

  Real& operator[](std::size_t i) { return values_[i]; }
  const Real& operator[](std::size_t i) const { return values_[i]; }
  Real& at(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  const Real& at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }

  bool has_grad() const { return !grad_.empty() || values_.empty(); }
  void enable_grad() {
    if (grad_.size() != values_.size()) grad_.assign(values_.size(), Real(0));
  }
  void drop_grad() { grad_.clear(); grad_.shrink_to_fit(); }
  void zero_grad() { std::fill(grad_.begin(), grad_.end(), Real(0)); }
  std::span<Real> grad() {
    enable_grad();
    return grad_;
  }
  std::span<const Real> grad() const { return grad_; }

  template <typename Other>
  Tensor<Other> cast() const {
    return Tensor<Other>(shape_, std::vector<Other>(values_.begin(), values_.end()));
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.values_ == b.values_;
  }

 private:
  static std::size_t element_count(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           std::multiplies<>());
  }

  std::vector<std::size_t> shape_;
  std::vector<Real> values_;
  std::vector<Real> grad_;
};

}  // namespace idr

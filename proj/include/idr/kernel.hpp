#pragma once

// Dense-network primitives with hand-derived gradients. Everything here is
// templated on the scalar type: training runs in float, the gradient checks
// instantiate double.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "idr/errors.hpp"
#include "idr/rng.hpp"
#include "idr/tensor.hpp"

namespace idr {

// fan_out x fan_in matrix, entries uniform on [-a, a], a = sqrt(6 / (fan_in + fan_out)).
template <typename Real>
Tensor<Real> xavier_init(long fan_in, long fan_out, Rng& rng) {
  if (fan_in < 1 || fan_out < 1)
    throw invalid_argument_error("xavier_init: fan dimensions must be positive, got fan_in=" +
                                 std::to_string(fan_in) + " fan_out=" + std::to_string(fan_out));
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor<Real> w({static_cast<std::size_t>(fan_out), static_cast<std::size_t>(fan_in)});
  for (auto& v : w.values()) v = static_cast<Real>(rng.uniform(-bound, bound));
  return w;
}

// y = W x + b. The backward pass only needs x, so the caller keeps it as the
// layer's context.
template <typename Real>
std::vector<Real> affine_forward(std::span<const Real> x, const Tensor<Real>& w,
                                 const Tensor<Real>& b) {
  if (w.rank() != 2 || w.cols() != x.size() || b.size() != w.rows()) {
    const std::size_t xs[] = {x.size()};
    throw shape_error("affine_forward: W " + shape_string(w.shape()) + " with x " +
                      shape_string(xs) + " and b " + shape_string(b.shape()));
  }
  const std::size_t m = w.rows(), n = w.cols();
  std::vector<Real> y(m);
  const Real* row = w.values().data();
  for (std::size_t i = 0; i < m; ++i, row += n) {
    Real acc = b[i];
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
  return y;
}

// Accumulates dW += dy x^T and db += dy; returns dx = W^T dy.
template <typename Real>
std::vector<Real> affine_backward(std::span<const Real> x, Tensor<Real>& w, Tensor<Real>& b,
                                  std::span<const Real> dy, bool accumulate_params = true) {
  if (w.rows() != dy.size() || w.cols() != x.size()) {
    const std::size_t ys[] = {dy.size()};
    throw shape_error("affine_backward: W " + shape_string(w.shape()) + " with dy " +
                      shape_string(ys));
  }
  const std::size_t m = w.rows(), n = w.cols();
  std::vector<Real> dx(n, Real(0));
  const Real* row = w.values().data();
  for (std::size_t i = 0; i < m; ++i, row += n) {
    const Real g = dy[i];
    if (g == Real(0)) continue;
    for (std::size_t j = 0; j < n; ++j) dx[j] += row[j] * g;
  }
  if (accumulate_params) {
    auto dw = w.grad();
    auto db = b.grad();
    for (std::size_t i = 0; i < m; ++i) {
      const Real g = dy[i];
      db[i] += g;
      if (g == Real(0)) continue;
      Real* drow = dw.data() + i * n;
      for (std::size_t j = 0; j < n; ++j)
        if (x[j] != Real(0)) drow[j] += g * x[j];
    }
  }
  return dx;
}

template <typename Real>
std::vector<Real> relu_forward(std::span<const Real> x) {
  std::vector<Real> y(x.size());
  // NaN passes through so that divergence stays visible downstream.
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] < Real(0) ? Real(0) : x[i];
  return y;
}

// Gradient flows only where x > 0; the subgradient at exactly 0 is 0.
template <typename Real>
std::vector<Real> relu_backward(std::span<const Real> x, std::span<const Real> dy) {
  std::vector<Real> dx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] > Real(0) ? dy[i] : Real(0);
  return dx;
}

template <typename Real>
struct DropoutResult {
  std::vector<Real> output;
  // Per-unit multiplier (0 or 1/(1-rate)); empty when dropout was a no-op.
  std::vector<Real> mask;
};

// Inverted dropout: survivors are scaled by 1/(1-rate) at training time so
// inference is the identity.
template <typename Real>
DropoutResult<Real> dropout(std::span<const Real> x, double rate, Rng& rng, bool training) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw invalid_argument_error("dropout: rate must be in [0, 1), got " + std::to_string(rate));
  DropoutResult<Real> r;
  r.output.assign(x.begin(), x.end());
  if (!training || rate == 0.0) return r;
  const Real keep_scale = static_cast<Real>(1.0 / (1.0 - rate));
  r.mask.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    r.mask[i] = rng.bernoulli(rate) ? Real(0) : keep_scale;
    r.output[i] *= r.mask[i];
  }
  return r;
}

template <typename Real>
std::vector<Real> dropout_backward(std::span<const Real> mask, std::span<const Real> dy) {
  std::vector<Real> dx(dy.begin(), dy.end());
  if (mask.empty()) return dx;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= mask[i];
  return dx;
}

template <typename Real>
struct LossResult {
  Real loss{};
  std::vector<Real> grad;
};

namespace detail {
inline void check_gold(std::size_t gold, std::size_t n, const char* who) {
  if (gold >= n)
    throw invalid_argument_error(std::string(who) + ": gold index " + std::to_string(gold) +
                                 " out of range for " + std::to_string(n) + " logits");
}
}  // namespace detail

template <typename Real>
std::vector<Real> softmax(std::span<const Real> logits) {
  std::vector<Real> p(logits.size());
  if (logits.empty()) return p;
  Real mx = logits[0];
  for (Real v : logits) mx = v > mx ? v : mx;
  Real z = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) z += p[i] = std::exp(logits[i] - mx);
  for (auto& v : p) v /= z;
  return p;
}

// -log softmax(logits)[gold] via log-sum-exp; grad = softmax - onehot(gold).
template <typename Real>
LossResult<Real> softmax_nll(std::span<const Real> logits, std::size_t gold) {
  detail::check_gold(gold, logits.size(), "softmax_nll");
  Real mx = logits[0];
  for (Real v : logits) mx = v > mx ? v : mx;
  Real z = 0;
  for (Real v : logits) z += std::exp(v - mx);
  const Real log_z = mx + std::log(z);
  LossResult<Real> r;
  r.loss = log_z - logits[gold];
  r.grad.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) r.grad[i] = std::exp(logits[i] - log_z);
  r.grad[gold] -= Real(1);
  return r;
}

// Crammer-Singer multiclass hinge. The subgradient moves mass from the single
// highest-scoring violator (lowest index on ties) to gold.
template <typename Real>
LossResult<Real> multiclass_hinge(std::span<const Real> logits, std::size_t gold, Real margin) {
  detail::check_gold(gold, logits.size(), "multiclass_hinge");
  if (!(margin > Real(0))) throw invalid_argument_error("multiclass_hinge: margin must be > 0");
  LossResult<Real> r;
  r.grad.assign(logits.size(), Real(0));
  if (logits.size() == 1) return r;
  std::size_t worst = gold == 0 ? 1 : 0;
  for (std::size_t j = 0; j < logits.size(); ++j)
    if (j != gold && logits[j] > logits[worst]) worst = j;
  const Real violation = margin + logits[worst] - logits[gold];
  if (violation > Real(0)) {
    r.loss = violation;
    r.grad[worst] = Real(1);
    r.grad[gold] = Real(-1);
  }
  return r;
}

template <typename Real>
struct AdamState {
  std::size_t step_count = 0;
  std::vector<Real> m;
  std::vector<Real> v;
  Real beta1 = Real(0.9);
  Real beta2 = Real(0.999);
  Real epsilon = Real(1e-8);
  Real learning_rate = Real(0.001);

  AdamState() = default;
  explicit AdamState(std::size_t size, Real lr = Real(0.001), Real b1 = Real(0.9),
                     Real b2 = Real(0.999), Real eps = Real(1e-8))
      : m(size, Real(0)), v(size, Real(0)), beta1(b1), beta2(b2), epsilon(eps),
        learning_rate(lr) {
    validate();
  }

  void validate() const {
    if (!(beta1 >= Real(0) && beta1 < Real(1)) || !(beta2 >= Real(0) && beta2 < Real(1)))
      throw invalid_argument_error("adam: betas must lie in [0, 1)");
    if (!(epsilon > Real(0))) throw invalid_argument_error("adam: epsilon must be > 0");
    if (!(learning_rate > Real(0)))
      throw invalid_argument_error("adam: learning rate must be > 0");
  }
};

// One bias-corrected Adam update of `param` in place.
template <typename Real>
void adam_step(std::span<Real> param, std::span<const Real> grad, AdamState<Real>& state) {
  if (grad.size() != param.size() || state.m.size() != param.size() ||
      state.v.size() != param.size())
    throw shape_error("adam_step: param has " + std::to_string(param.size()) + " values, grad " +
                      std::to_string(grad.size()) + ", moments " + std::to_string(state.m.size()) +
                      "/" + std::to_string(state.v.size()));
  ++state.step_count;
  const Real t = static_cast<Real>(state.step_count);
  const Real c1 = Real(1) - std::pow(state.beta1, t);
  const Real c2 = Real(1) - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < param.size(); ++i) {
    const Real g = grad[i];
    state.m[i] = state.beta1 * state.m[i] + (Real(1) - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (Real(1) - state.beta2) * g * g;
    const Real m_hat = state.m[i] / c1;
    const Real v_hat = state.v[i] / c2;
    param[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

template <typename Real>
void adam_step(Tensor<Real>& param, AdamState<Real>& state) {
  param.enable_grad();
  const Tensor<Real>& cparam = param;
  adam_step<Real>(param.values(), cparam.grad(), state);
}

// Central differences per coordinate; returns the largest
// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
template <typename Real>
Real finite_difference_check(const std::function<Real(std::span<const Real>)>& f,
                             std::span<const Real> params, std::span<const Real> analytic,
                             Real h) {
  if (!(h > Real(0))) throw invalid_argument_error("finite_difference_check: h must be > 0");
  if (analytic.size() != params.size())
    throw shape_error("finite_difference_check: " + std::to_string(params.size()) +
                      " params but " + std::to_string(analytic.size()) + " analytic entries");
  std::vector<Real> theta(params.begin(), params.end());
  Real worst = 0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const Real saved = theta[i];
    theta[i] = saved + h;
    const Real up = f(theta);
    theta[i] = saved - h;
    const Real down = f(theta);
    theta[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down))
      throw numeric_error("finite_difference_check: non-finite objective at coordinate " +
                          std::to_string(i));
    const Real numeric = (up - down) / (Real(2) * h);
    const Real denom =
        std::max({std::abs(analytic[i]), std::abs(numeric), static_cast<Real>(1e-8)});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

}  // namespace idr

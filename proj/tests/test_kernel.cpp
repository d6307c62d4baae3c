#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "idr/kernel.hpp"

using namespace idr;

namespace {

std::vector<double> random_vector(std::size_t n, Rng& rng, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-scale, scale);
  return v;
}

}  // namespace

TEST_SUITE("kernel") {

TEST_CASE("xavier_init bounds and shape") {
  Rng rng(1);
  auto w = xavier_init<double>(100, 100, rng);
  CHECK(w.shape() == std::vector<std::size_t>{100, 100});
  const double bound = std::sqrt(6.0 / 200.0);
  CHECK(bound == doctest::Approx(0.17320508075688773));
  for (double v : w.values()) CHECK((v >= -bound && v <= bound));

  auto small = xavier_init<double>(1, 2, rng);
  CHECK(small.shape() == std::vector<std::size_t>{2, 1});
  for (double v : small.values()) CHECK(std::abs(v) <= std::sqrt(2.0));

  CHECK_THROWS_AS(xavier_init<double>(0, 5, rng), invalid_argument_error);
  CHECK_THROWS_AS(xavier_init<double>(5, -1, rng), invalid_argument_error);
}

TEST_CASE("xavier_init variance and reproducibility") {
  Rng rng(42);
  auto w = xavier_init<double>(300, 400, rng);  // 1.2e5 draws
  double mean = 0, sq = 0;
  for (double v : w.values()) mean += v;
  mean /= static_cast<double>(w.size());
  for (double v : w.values()) sq += (v - mean) * (v - mean);
  const double var = sq / static_cast<double>(w.size());
  const double expected = 2.0 / 700.0;
  CHECK(std::abs(var - expected) / expected < 0.10);

  Rng a(9), b(9);
  CHECK(xavier_init<float>(7, 5, a) == xavier_init<float>(7, 5, b));
}

TEST_CASE("affine_forward arithmetic and shape errors") {
  Tensor<double> w({1, 1}, std::vector<double>{2});
  Tensor<double> b({1}, std::vector<double>{1});
  std::vector<double> x{3};
  CHECK(affine_forward<double>(x, w, b) == std::vector<double>{7});

  Tensor<double> eye({3, 3}, std::vector<double>{1, 0, 0, 0, 1, 0, 0, 0, 1});
  Tensor<double> zero({3});
  std::vector<double> v{0.5, -2, 4};
  CHECK(affine_forward<double>(v, eye, zero) == v);

  Tensor<double> w24({2, 4});
  Tensor<double> b2({2});
  std::vector<double> x3{1, 2, 3};
  try {
    affine_forward<double>(x3, w24, b2);
    FAIL("expected shape_error");
  } catch (const shape_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2x4]") != std::string::npos);
    CHECK(msg.find("[3]") != std::string::npos);
  }
}

TEST_CASE("relu forward and subgradient at zero") {
  std::vector<double> x{-1, 0, 2};
  CHECK(relu_forward<double>(x) == std::vector<double>{0, 0, 2});
  std::vector<double> neg{-3, -0.5, -7};
  CHECK(relu_forward<double>(neg) == std::vector<double>{0, 0, 0});
  std::vector<double> up{1, 1, 1};
  CHECK(relu_backward<double>(x, up) == std::vector<double>{0, 0, 1});
  std::vector<double> nan{std::nan("")};
  CHECK(std::isnan(relu_forward<double>(nan)[0]));
}

TEST_CASE("dropout modes") {
  Rng rng(3);
  std::vector<float> x{1.5f, -2.0f, 0.25f, 8.0f};
  CHECK(dropout<float>(x, 0.0, rng, true).output == x);
  auto inference = dropout<float>(x, 0.35, rng, false);
  CHECK(inference.output == x);
  CHECK(inference.mask.empty());
  CHECK_THROWS_AS(dropout<float>(x, 1.0, rng, true), invalid_argument_error);
  CHECK_THROWS_AS(dropout<float>(x, -0.1, rng, true), invalid_argument_error);

  std::vector<double> ones(100000, 1.0);
  auto out = dropout<double>(ones, 0.35, rng, true);
  const double mean = std::accumulate(out.output.begin(), out.output.end(), 0.0) / ones.size();
  CHECK(std::abs(mean - 1.0) < 0.02);
  std::size_t zeros = 0;
  for (double v : out.output) {
    if (v == 0.0) ++zeros;
    else CHECK(v == doctest::Approx(1.0 / 0.65));
  }
  CHECK(std::abs(static_cast<double>(zeros) / ones.size() - 0.35) < 0.01);

  Rng a(11), b(11);
  CHECK(dropout<double>(ones, 0.35, a, true).output == dropout<double>(ones, 0.35, b, true).output);
}

TEST_CASE("softmax_nll values") {
  std::vector<double> zero{0, 0};
  auto r = softmax_nll<double>(zero, 0);
  CHECK(r.loss == doctest::Approx(std::log(2.0)));
  CHECK(r.grad[0] == doctest::Approx(-0.5));
  CHECK(r.grad[1] == doctest::Approx(0.5));

  std::vector<float> big{1000.0f, 0.0f};
  auto s = softmax_nll<float>(big, 0);
  CHECK(std::isfinite(s.loss));
  CHECK(s.loss == doctest::Approx(0.0).epsilon(1e-6));

  std::vector<double> l{1, 2, 3};
  // Oracle: direct evaluation of -log(e^3 / (e^1 + e^2 + e^3)).
  const long double direct =
      -std::log(std::exp(3.0L) / (std::exp(1.0L) + std::exp(2.0L) + std::exp(3.0L)));
  auto t = softmax_nll<double>(l, 2);
  CHECK(t.loss == doctest::Approx(static_cast<double>(direct)).epsilon(1e-12));
  CHECK(t.loss == doctest::Approx(0.40761).epsilon(1e-5));

  CHECK_THROWS_AS(softmax_nll<double>(l, 3), invalid_argument_error);
}

TEST_CASE("softmax_nll is non-negative and its gradient sums to zero") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(9);
    auto logits = random_vector(n, rng, 20.0);
    auto r = softmax_nll<double>(logits, rng.below(n));
    CHECK(r.loss >= 0.0);
    CHECK(std::abs(std::accumulate(r.grad.begin(), r.grad.end(), 0.0)) < 1e-12);
  }
}

TEST_CASE("multiclass_hinge values") {
  std::vector<double> ok{5, 0};
  auto a = multiclass_hinge<double>(ok, 0, 1.0);
  CHECK(a.loss == 0.0);
  CHECK(a.grad == std::vector<double>{0, 0});

  std::vector<double> tie{0, 0};
  auto b = multiclass_hinge<double>(tie, 0, 1.0);
  CHECK(b.loss == 1.0);
  CHECK(b.grad == std::vector<double>{-1, 1});

  std::vector<double> three{0, 2, 1};
  auto c = multiclass_hinge<double>(three, 0, 1.0);
  CHECK(c.loss == 3.0);
  CHECK(c.grad == std::vector<double>{-1, 1, 0});

  // Two violators tied: the lower index takes the gradient.
  std::vector<double> tied{0, 3, 3};
  CHECK(multiclass_hinge<double>(tied, 0, 1.0).grad == std::vector<double>{-1, 1, 0});

  CHECK_THROWS_AS(multiclass_hinge<double>(three, 5, 1.0), invalid_argument_error);
  CHECK_THROWS_AS(multiclass_hinge<double>(three, 0, 0.0), invalid_argument_error);
}

TEST_CASE("adam_step closed forms") {
  SUBCASE("zero gradient leaves parameters bit-identical") {
    Rng rng(8);
    std::vector<float> p(16);
    for (auto& v : p) v = static_cast<float>(rng.uniform(-3, 3));
    const auto before = p;
    std::vector<float> g(16, 0.0f);
    AdamState<float> st(16);
    adam_step<float>(p, g, st);
    CHECK(p == before);
    CHECK(st.step_count == 1);
  }
  SUBCASE("first step with unit gradient") {
    std::vector<double> p(4, 0.5), g(4, 1.0);
    AdamState<double> st(4, 0.001);
    adam_step<double>(p, g, st);
    for (double v : p) CHECK(v == doctest::Approx(0.5 - 0.001 / (1.0 + 1e-8)).epsilon(1e-15));
  }
  SUBCASE("two steps match the unrolled recurrence") {
    std::vector<double> p{0.0}, g{1.0};
    AdamState<double> st(1, 0.001);
    adam_step<double>(p, g, st);
    adam_step<double>(p, g, st);
    // Unrolled: m1 = 0.1, v1 = 0.001, m2 = 0.19, v2 = 0.001999.
    const double m2 = 0.9 * 0.1 + 0.1, v2 = 0.999 * 0.001 + 0.001;
    const double step1 = 0.001 * (0.1 / 0.1) / (std::sqrt(0.001 / 0.001) + 1e-8);
    const double step2 = 0.001 * (m2 / (1 - 0.81)) / (std::sqrt(v2 / (1 - 0.998001)) + 1e-8);
    CHECK(p[0] == doctest::Approx(-(step1 + step2)).epsilon(1e-14));
  }
  SUBCASE("shape mismatch") {
    std::vector<double> p(3), g(2);
    AdamState<double> st(3);
    CHECK_THROWS_AS(adam_step<double>(p, g, st), shape_error);
  }
  SUBCASE("hyperparameter validation") {
    CHECK_THROWS_AS(AdamState<double>(3, 0.0), invalid_argument_error);
    CHECK_THROWS_AS(AdamState<double>(3, 0.001, 1.0), invalid_argument_error);
    CHECK_THROWS_AS(AdamState<double>(3, 0.001, 0.9, 0.999, 0.0), invalid_argument_error);
  }
}

TEST_CASE("finite_difference_check basics") {
  std::function<double(std::span<const double>)> sq = [](std::span<const double> t) {
    return t[0] * t[0];
  };
  std::vector<double> theta{3.0}, good{6.0}, doubled{12.0};
  CHECK(finite_difference_check<double>(sq, theta, good, 1e-5) < 1e-8);
  CHECK(finite_difference_check<double>(sq, theta, doubled, 1e-5) == doctest::Approx(0.5).epsilon(1e-6));

  std::function<double(std::span<const double>)> bad = [](std::span<const double> t) {
    return t[0] > 3.0 ? std::numeric_limits<double>::infinity() : 0.0;
  };
  CHECK_THROWS_AS(finite_difference_check<double>(bad, theta, good, 1e-5), numeric_error);
  CHECK_THROWS_AS(finite_difference_check<double>(sq, theta, good, 0.0), invalid_argument_error);
}

TEST_CASE("affine + relu + dropout mask + softmax_nll gradients match finite differences") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const std::size_t n = 2 + rng.below(5), h = 2 + rng.below(5), k = 2 + rng.below(4);
    auto w1 = xavier_init<double>(static_cast<long>(n), static_cast<long>(h), rng);
    Tensor<double> b1({h}, random_vector(h, rng, 0.1));
    auto w2 = xavier_init<double>(static_cast<long>(h), static_cast<long>(k), rng);
    Tensor<double> b2({k}, random_vector(k, rng, 0.1));
    const auto x = random_vector(n, rng);
    const std::size_t gold = rng.below(k);
    Rng mask_rng(seed + 100);
    const auto mask = dropout<double>(std::vector<double>(h, 1.0), 0.3, mask_rng, true).mask;

    // Flat parameter layout: w1, b1, w2, b2.
    std::vector<Tensor<double>*> params{&w1, &b1, &w2, &b2};
    auto loss_at = [&](std::span<const double> theta) {
      std::size_t off = 0;
      for (auto* p : params)
        for (auto& v : p->values()) v = theta[off++];
      auto z = affine_forward<double>(x, w1, b1);
      auto a = relu_forward<double>(z);
      for (std::size_t i = 0; i < h; ++i) a[i] *= mask[i];
      return softmax_nll<double>(affine_forward<double>(a, w2, b2), gold).loss;
    };

    std::vector<double> theta;
    for (auto* p : params) theta.insert(theta.end(), p->values().begin(), p->values().end());
    for (auto* p : params) p->grad(), p->zero_grad();
    auto z = affine_forward<double>(x, w1, b1);
    auto a = relu_forward<double>(z);
    auto d = a;
    for (std::size_t i = 0; i < h; ++i) d[i] *= mask[i];
    auto r = softmax_nll<double>(affine_forward<double>(d, w2, b2), gold);
    auto gd = affine_backward<double>(d, w2, b2, r.grad);
    auto ga = dropout_backward<double>(mask, gd);
    auto gz = relu_backward<double>(z, ga);
    affine_backward<double>(x, w1, b1, gz);
    std::vector<double> analytic;
    for (auto* p : params) {
      const Tensor<double>& cp = *p;
      analytic.insert(analytic.end(), cp.grad().begin(), cp.grad().end());
    }
    std::function<double(std::span<const double>)> f = loss_at;
    CHECK(finite_difference_check<double>(f, theta, analytic, 1e-5) < 1e-4);
  }
}

TEST_CASE("rng is reproducible and shuffle is a permutation") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  auto w = v;
  Rng c(5), d(5);
  c.shuffle(std::span<int>(v));
  d.shuffle(std::span<int>(w));
  CHECK(v == w);
  std::sort(v.begin(), v.end());
  for (int i = 0; i < 50; ++i) CHECK(v[i] == i);
  // First output of mt19937_64 with the standard default seed.
  Rng std_seed(5489);
  CHECK(std_seed.next_u64() == 14514284786278117030ULL);
}

}  // TEST_SUITE

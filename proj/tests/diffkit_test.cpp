#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lagnet/diffkit/diffkit.hpp"
#include "oracles.hpp"

namespace lagnet::diffkit {
namespace {

using testing::fd_gradient;
using testing::relative_error;

const auto square = scalar_function(1, [](auto x) { return x[0] * x[0]; });
const auto soft = scalar_function(1, [](auto x) { return softplus(x[0]); });
const auto x2y = scalar_function(2, [](auto x) { return x[0] * x[0] * x[1]; });

std::vector<double> vec(std::initializer_list<double> v) { return v; }

TEST(DiffkitEvaluate, Examples) {
  EXPECT_EQ(evaluate(square, vec({3.0})), 9.0);
  EXPECT_NEAR(evaluate(soft, vec({0.0})), std::log(2.0), 1e-15);
  EXPECT_EQ(evaluate(x2y, vec({2.0, 3.0})), 12.0);
}

TEST(DiffkitEvaluate, DimensionMismatchNamesBothSizes) {
  try {
    evaluate(x2y, vec({1.0}));
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("expects 2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("got 1"), std::string::npos);
  }
  EXPECT_THROW(gradient(x2y, vec({1.0, 2.0, 3.0})), UsageError);
  EXPECT_THROW(hessian(x2y, vec({1.0})), UsageError);
}

TEST(DiffkitGradient, Examples) {
  EXPECT_EQ(gradient(square, vec({3.0}))[0], 6.0);
  EXPECT_DOUBLE_EQ(gradient(soft, vec({0.0}))[0], 0.5);
}

TEST(DiffkitHessian, Examples) {
  const auto h = hessian(x2y, vec({2.0, 3.0}));
  EXPECT_EQ(h(0, 0), 6.0);
  EXPECT_EQ(h(0, 1), 4.0);
  EXPECT_EQ(h(1, 0), 4.0);
  EXPECT_EQ(h(1, 1), 0.0);
  EXPECT_DOUBLE_EQ(hessian(soft, vec({0.0}))(0, 0), 0.25);
}

TEST(DiffkitGradient, NonFiniteCarriesInput) {
  const auto bad = scalar_function(1, [](auto x) { return log(x[0]); });
  try {
    gradient(bad, vec({-1.0}));
    FAIL();
  } catch (const NumericError& e) {
    ASSERT_EQ(e.input().size(), 1u);
    EXPECT_EQ(e.input()[0], -1.0);
  }
  EXPECT_THROW(derivative_bundle(bad, vec({0.0})), NumericError);
}

// Random sparse polynomials in 3 variables, 3 terms, exponents 0..3.
struct Polynomial {
  double coef[3];
  int exps[3][3];

  template <class S>
  S operator()(std::span<const S> x) const {
    S total(0.0);
    for (int t = 0; t < 3; ++t) {
      S term(coef[t]);
      for (int i = 0; i < 3; ++i) {
        if (exps[t][i]) term = term * pow(x[i], exps[t][i]);
      }
      total = total + term;
    }
    return total;
  }
};

Polynomial random_polynomial(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(-2.0, 2.0);
  std::uniform_int_distribution<int> e(0, 3);
  Polynomial p{};
  for (int t = 0; t < 3; ++t) {
    p.coef[t] = c(rng);
    for (int i = 0; i < 3; ++i) p.exps[t][i] = e(rng);
  }
  return p;
}

TEST(DiffkitGradient, MatchesCentralDifferencesOnRandomPolynomials) {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Polynomial p = random_polynomial(rng);
    const auto fn = scalar_function(3, [p](auto x) { return p(x); });
    const std::vector<double> x{u(rng), u(rng), u(rng)};
    const auto g = gradient(fn, x);
    const auto fd = fd_gradient([&](const std::vector<double>& y) { return p(std::span<const double>(y)); }, x);
    worst = std::max(worst, relative_error(g, fd));
  }
  EXPECT_LE(worst, 1e-5);
}

TEST(DiffkitGradient, MatchesCentralDifferencesOnTranscendentals) {
  auto f = [](auto x) { return tanh(x[0] * x[1]) + sigmoid(x[2]) * cos(x[0]) + exp(sin(x[1])) / (1.0 + softplus(x[2])); };
  const auto fn = scalar_function(3, f);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<double> x{u(rng), u(rng), u(rng)};
    const auto fd = fd_gradient([&](const std::vector<double>& y) { return f(std::span<const double>(y)); }, x);
    EXPECT_LE(relative_error(gradient(fn, x), fd), 1e-5);
    // Forward and reverse mode must agree.
    EXPECT_LE(relative_error(derivative_bundle(fn, x).gradient, gradient(fn, x)), 1e-14);
  }
}

TEST(DiffkitHessian, SymmetricAndMatchesDifferencedGradient) {
  auto f = [](auto x) { return x[0] * x[1] * x[2] + tanh(x[0] - x[2]) * softplus(x[1]) + x[2] / (2.0 + x[0] * x[0]); };
  const auto fn = scalar_function(3, f);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<double> x{u(rng), u(rng), u(rng)};
    const auto b = derivative_bundle(fn, x);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        EXPECT_LE(std::fabs(b.hessian(i, j) - b.hessian(j, i)), 1e-12 * (1.0 + std::fabs(b.hessian(i, j))));
      }
      auto gi = [&](const std::vector<double>& y) { return gradient(fn, y)[i]; };
      const auto row = fd_gradient(gi, x);
      for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(b.hessian(i, j), row[j], 1e-7);
    }
  }
}

TEST(DiffkitJet, ValueMatchesPlainArithmeticExactly) {
  auto f = [](auto x) { return (x[0] * x[1] - x[2]) * (x[0] + x[2]) - x[1] * x[1] * x[1]; };
  const std::vector<double> x{0.3, -1.7, 2.9};
  const double plain = f(std::span<const double>(x));
  EXPECT_EQ(derivative_bundle(scalar_function(3, f), x).value, plain);
  auto g = [](auto x) { return exp(x[0]) + tanh(x[1]) * sin(x[2]); };
  const double plain_g = g(std::span<const double>(x));
  EXPECT_EQ(derivative_bundle(scalar_function(3, g), x).value, plain_g);
}

TEST(DiffkitJet, DynamicWidthMatchesFixedWidth) {
  auto f = [](auto x) { return softplus(x[0] * x[1]) + x[0] / (1.0 + x[1] * x[1]); };
  const std::vector<double> x{0.4, -0.9};
  const auto fixed = seed_jets<2, double>(std::span<const double>(x));
  const auto dyn = seed_jets<kDynamic, double>(std::span<const double>(x));
  const auto a = f(std::span<const Jet<double, 2>>(fixed));
  const auto b = f(std::span<const Jet<double, kDynamic>>(dyn));
  EXPECT_EQ(a.value(), b.value());
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(a.grad()[i], b.grad()[i]);
    for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(a.hess(i, j), b.hess(i, j));
  }
}

TEST(DiffkitDeterminism, RepeatedEvaluationIsBitIdentical) {
  auto f = [](auto x) { return tanh(x[0]) * softplus(x[1] - x[0]) + cos(x[1]); };
  const auto fn = scalar_function(2, f);
  const std::vector<double> x{0.123, 0.456};
  const auto a = derivative_bundle(fn, x);
  const auto b = derivative_bundle(fn, x);
  EXPECT_EQ(a.gradient, b.gradient);
  EXPECT_EQ(a.hessian.data(), b.hessian.data());
  EXPECT_EQ(gradient(fn, x), gradient(fn, x));
}

// ∇(f∘g)(x) = f'(g(x)) ∇g(x), assembled from separately computed parts.
TEST(DiffkitGradient, CompositionMatchesChainRule) {
  auto g = [](auto x) { return x[0] * x[1] + sin(x[0]); };
  auto f = [](auto y) { return tanh(y[0]) + y[0] * y[0]; };
  auto fg = [&](auto x) {
    using S = typename decltype(x)::value_type;
    const S inner = g(x);
    return f(std::span<const S>(&inner, 1));
  };
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<double> x{u(rng), u(rng)};
    const double gx = g(std::span<const double>(x));
    const double fprime = gradient(scalar_function(1, f), std::vector<double>{gx})[0];
    const auto grad_g = gradient(scalar_function(2, g), x);
    const auto grad_fg = gradient(scalar_function(2, fg), x);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(grad_fg[i], fprime * grad_g[i], 1e-12);
  }
}

TEST(DiffkitParameterGradient, Examples) {
  const std::vector<double> theta{1.0, -2.0};
  auto half_sq = [](std::span<const Var> t) { return 0.5 * (t[0] * t[0] + t[1] * t[1]); };
  const auto r = parameter_gradient(half_sq, theta);
  EXPECT_EQ(r.value, 2.5);
  EXPECT_EQ(r.gradient, theta);

  auto constant = [](std::span<const Var>) { return Var(4.0); };
  const auto c = parameter_gradient(constant, theta);
  EXPECT_EQ(c.gradient, std::vector<double>(2, 0.0));
}

// Third order: d/dθ of an input Hessian entry of x ↦ softplus(θ0 x0 + θ1 x1)².
TEST(DiffkitParameterGradient, ThroughInputHessian) {
  const std::vector<double> x{0.3, -0.8};
  auto loss_of = [&](auto theta) {
    using P = typename decltype(theta)::value_type;
    const auto jets = seed_jets<2, P>(std::span<const P>(std::vector<P>{P(x[0]), P(x[1])}));
    const auto u = softplus(theta[0] * jets[0] + theta[1] * jets[1]);
    const auto y = u * u;
    return y.hess(0, 1) + y.hess(1, 1) * y.grad()[0];
  };
  const std::vector<double> theta{0.7, -1.1};
  const auto r = parameter_gradient([&](std::span<const Var> t) { return loss_of(t); }, theta);
  const auto fd = fd_gradient([&](const std::vector<double>& t) { return loss_of(std::span<const double>(t)); }, theta);
  EXPECT_LE(relative_error(r.gradient, fd), 1e-8);
  EXPECT_EQ(r.value, loss_of(std::span<const double>(theta)));
}

TEST(DiffkitPinv, InvertibleAndTruncated) {
  Matrix<double> a(2, 2);
  a(0, 0) = 2.0;
  a(1, 1) = 4.0;
  PinvInfo info;
  const auto x = pinv_solve(a, std::vector<double>{2.0, 2.0}, &info);
  EXPECT_DOUBLE_EQ(x[0], 1.0);
  EXPECT_DOUBLE_EQ(x[1], 0.5);
  EXPECT_FALSE(info.degenerate);
  EXPECT_DOUBLE_EQ(info.condition(), 2.0);

  Matrix<double> s(2, 2);
  s(0, 0) = 1.0;
  s(1, 1) = 1e-12;
  const auto y = pinv_solve(s, std::vector<double>{1.0, 1.0}, &info);
  EXPECT_TRUE(info.degenerate);
  EXPECT_EQ(info.rank, 1u);
  EXPECT_DOUBLE_EQ(y[0], 1.0);
  EXPECT_EQ(y[1], 0.0);

  const auto z = pinv_solve(Matrix<double>(2, 2), std::vector<double>{1.0, 1.0}, &info);
  EXPECT_TRUE(info.degenerate);
  EXPECT_EQ(z, std::vector<double>(2, 0.0));
}

TEST(DiffkitPinv, TapedSolveMatchesFiniteDifferences) {
  auto solve = [](const std::vector<double>& p) {
    Matrix<double> a(2, 2);
    a(0, 0) = p[0];
    a(0, 1) = p[1];
    a(1, 0) = p[1];
    a(1, 1) = p[2];
    return pinv_solve(a, std::vector<double>{p[3], p[4]});
  };
  const std::vector<double> p{2.0, 0.3, 1.5, -0.7, 0.4};
  for (std::size_t out = 0; out < 2; ++out) {
    const auto r = parameter_gradient(
        [&](std::span<const Var> v) {
          Matrix<Var> a(2, 2);
          a(0, 0) = v[0];
          a(0, 1) = v[1];
          a(1, 0) = v[1];
          a(1, 1) = v[2];
          return pinv_solve(a, std::vector<Var>{v[3], v[4]})[out];
        },
        p);
    const auto fd = fd_gradient([&](const std::vector<double>& q) { return solve(q)[out]; }, p);
    EXPECT_LE(relative_error(r.gradient, fd), 1e-8);
  }
}

// Constant-rank pinv derivative on a rectangular full-column-rank system.
TEST(DiffkitPinv, TapedSolveRectangularLeastSquares) {
  auto solve = [](const std::vector<double>& p) {
    Matrix<double> a(3, 2);
    for (std::size_t k = 0; k < 6; ++k) a.data()[k] = p[k];
    return pinv_solve(a, std::vector<double>{p[6], p[7], p[8]});
  };
  const std::vector<double> p{1.0, 0.2, -0.3, 0.8, 0.5, 0.1, 1.0, -2.0, 0.5};
  const auto r = parameter_gradient(
      [&](std::span<const Var> v) {
        Matrix<Var> a(3, 2);
        for (std::size_t k = 0; k < 6; ++k) a.data()[k] = v[k];
        const auto x = pinv_solve(a, std::vector<Var>{v[6], v[7], v[8]});
        return x[0] + 2.0 * x[1];
      },
      p);
  const auto fd = fd_gradient(
      [&](const std::vector<double>& q) {
        const auto x = solve(q);
        return x[0] + 2.0 * x[1];
      },
      p);
  EXPECT_LE(relative_error(r.gradient, fd), 1e-7);
}

TEST(DiffkitTape, NormHasZeroSubgradientAtOrigin) {
  const auto r = parameter_gradient(
      [](std::span<const Var> v) {
        std::vector<Var> d{v[0] - 1.0, v[1] - 2.0};
        return norm2(d);
      },
      std::vector<double>{1.0, 2.0});
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.gradient, std::vector<double>(2, 0.0));
}

TEST(DiffkitTape, RequiresScope) { EXPECT_THROW(Var::leaf(1.0), UsageError); }

}  // namespace
}  // namespace lagnet::diffkit

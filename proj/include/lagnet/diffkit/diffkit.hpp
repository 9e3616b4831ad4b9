#pragma once

// Entry points of the differentiation engine.
//
// A scalar function is any callable that, for each scalar type S in
// {double, Var, Jet<...>}, maps std::span<const S> to S. Write it as a generic
// lambda using unqualified math calls (exp, log, tanh, sigmoid, softplus, sin,
// cos, pow) so argument-dependent lookup picks the right overload.
//
//   gradient           reverse mode (one backward sweep)
//   hessian / bundle   second-order forward mode (Jet)
//   parameter_gradient reverse mode over a loss that may contain Jet<Var>
//                      input Hessians and pinv_solve, i.e. third order overall

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lagnet/diffkit/jet.hpp"
#include "lagnet/diffkit/matrix.hpp"
#include "lagnet/diffkit/pinv.hpp"
#include "lagnet/diffkit/primitives.hpp"
#include "lagnet/diffkit/tape.hpp"
#include "lagnet/errors.hpp"

namespace lagnet::diffkit {

template <class F>
struct ScalarFunction {
  std::size_t dim;
  F f;
};

template <class F>
ScalarFunction<F> scalar_function(std::size_t dim, F f) {
  return {dim, std::move(f)};
}

struct ValueAndGradient {
  double value = 0.0;
  std::vector<double> gradient;
};

/// Calls `body.template operator()<N>()` with a compile-time jet width for
/// small dimensions and kDynamic otherwise.
template <class Body>
decltype(auto) with_jet_width(std::size_t dim, Body&& body) {
  switch (dim) {
    case 1: return body.template operator()<1>();
    case 2: return body.template operator()<2>();
    case 3: return body.template operator()<3>();
    case 4: return body.template operator()<4>();
    case 6: return body.template operator()<6>();
    default: return body.template operator()<kDynamic>();
  }
}

template <int N, class T>
std::vector<Jet<T, N>> seed_jets(std::span<const T> x) {
  std::vector<Jet<T, N>> jets;
  jets.reserve(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) jets.push_back(Jet<T, N>::variable(x[k], k, x.size()));
  return jets;
}

template <class T, int N>
BasicBundle<T> bundle_from_jet(const Jet<T, N>& j, std::size_t dim) {
  BasicBundle<T> b;
  b.value = j.value();
  b.gradient.assign(dim, T(0.0));
  b.hessian = Matrix<T>(dim, dim);
  if (j.is_constant()) return b;
  for (std::size_t i = 0; i < dim; ++i) {
    b.gradient[i] = j.grad()[i];
    for (std::size_t k = i; k < dim; ++k) {
      b.hessian(i, k) = j.hess(i, k);
      b.hessian(k, i) = b.hessian(i, k);
    }
  }
  return b;
}

namespace detail {

inline void check_dimension(std::size_t expected, std::size_t actual) {
  if (expected != actual) {
    throw UsageError("dimension mismatch: function expects " + std::to_string(expected) + " inputs, got " +
                     std::to_string(actual));
  }
}

inline void check_finite(double v, std::span<const double> x, const char* what) {
  if (!std::isfinite(v)) {
    throw NumericError(std::string("non-finite ") + what + " at x = " +
                           describe_vector(std::vector<double>(x.begin(), x.end())),
                       std::vector<double>(x.begin(), x.end()));
  }
}

}  // namespace detail

template <class F>
double evaluate(const ScalarFunction<F>& fn, std::span<const double> x) {
  detail::check_dimension(fn.dim, x.size());
  return fn.f(x);
}

template <class F>
std::vector<double> gradient(const ScalarFunction<F>& fn, std::span<const double> x) {
  detail::check_dimension(fn.dim, x.size());
  TapeScope scope;
  std::vector<Var> xs;
  xs.reserve(x.size());
  for (double v : x) xs.push_back(Var::leaf(v));
  const Var y = fn.f(std::span<const Var>(xs));
  detail::check_finite(y.value(), x, "value");
  auto g = gradient_of(y, xs);
  for (double gi : g) detail::check_finite(gi, x, "gradient");
  return g;
}

template <class F>
DerivativeBundle derivative_bundle(const ScalarFunction<F>& fn, std::span<const double> x) {
  detail::check_dimension(fn.dim, x.size());
  return with_jet_width(x.size(), [&]<int N>() {
    const auto jets = seed_jets<N, double>(x);
    const auto y = fn.f(std::span<const Jet<double, N>>(jets));
    DerivativeBundle b = bundle_from_jet(y, x.size());
    detail::check_finite(b.value, x, "value");
    for (double v : b.gradient) detail::check_finite(v, x, "gradient");
    for (double v : b.hessian.data()) detail::check_finite(v, x, "hessian");
    return b;
  });
}

template <class F>
Matrix<double> hessian(const ScalarFunction<F>& fn, std::span<const double> x) {
  return derivative_bundle(fn, x).hessian;
}

/// ∂loss/∂θ for `loss: std::span<const Var> -> Var`, evaluated on a fresh tape.
template <class Loss>
ValueAndGradient parameter_gradient(Loss&& loss, std::span<const double> theta) {
  TapeScope scope;
  std::vector<Var> params;
  params.reserve(theta.size());
  for (double v : theta) params.push_back(Var::leaf(v));
  const Var y = loss(std::span<const Var>(params));
  ValueAndGradient out{y.value(), gradient_of(y, params)};
  detail::check_finite(out.value, theta, "loss");
  for (double g : out.gradient) detail::check_finite(g, theta, "parameter gradient");
  return out;
}

}  // namespace lagnet::diffkit

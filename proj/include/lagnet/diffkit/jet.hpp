#pragma once

// Second-order forward-mode jets.
//
// Jet<T, N> carries a value, its gradient and its Hessian with respect to N
// seeded directions. The Hessian is stored as a packed upper triangle, so the
// result is symmetric by construction. T may itself be a reverse-mode Var,
// which gives exact parameter gradients of expressions built from input
// Hessians.
//
// N == kDynamic sizes the derivative storage at run time. A dynamic jet with
// empty storage is a constant; arithmetic treats its derivatives as zero.

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "lagnet/diffkit/primitives.hpp"
#include "lagnet/diffkit/tape.hpp"

namespace lagnet::diffkit {

inline constexpr int kDynamic = -1;

constexpr std::size_t packed_size(std::size_t n) { return n * (n + 1) / 2; }

/// Offset of (i, j), i <= j, in a packed upper triangle of dimension n.
constexpr std::size_t packed_index(std::size_t n, std::size_t i, std::size_t j) {
  if (i > j) std::swap(i, j);
  return i * n - i * (i + 1) / 2 + j;
}

inline double value_of(const Var& v) { return v.value(); }

namespace detail {
template <class T, int N>
struct JetStorage {
  using Grad = std::array<T, static_cast<std::size_t>(N)>;
  using Hess = std::array<T, packed_size(static_cast<std::size_t>(N))>;
};
template <class T>
struct JetStorage<T, kDynamic> {
  using Grad = std::vector<T>;
  using Hess = std::vector<T>;
};
}  // namespace detail

template <class T, int N>
class Jet {
 public:
  using scalar_type = T;
  using Grad = typename detail::JetStorage<T, N>::Grad;
  using Hess = typename detail::JetStorage<T, N>::Hess;
  static constexpr bool kIsDynamic = N == kDynamic;

  Jet() : Jet(T(0.0)) {}
  Jet(T value) : v_(value) {  // NOLINT(google-explicit-constructor)
    if constexpr (!kIsDynamic) {
      g_.fill(T(0.0));
      h_.fill(T(0.0));
    }
  }
  Jet(double value) requires(!std::is_same_v<T, double>) : Jet(T(value)) {}  // NOLINT

  /// Independent variable: value x, unit derivative along direction `k` of `dim`.
  static Jet variable(T x, std::size_t k, std::size_t dim) {
    Jet j(x);
    if constexpr (kIsDynamic) {
      j.g_.assign(dim, T(0.0));
      j.h_.assign(packed_size(dim), T(0.0));
    }
    j.g_[k] = T(1.0);
    return j;
  }

  const T& value() const noexcept { return v_; }
  std::size_t dim() const noexcept { return g_.size(); }
  bool is_constant() const noexcept {
    if constexpr (kIsDynamic) return g_.empty();
    return false;
  }

  const Grad& grad() const noexcept { return g_; }
  const Hess& packed_hessian() const noexcept { return h_; }
  T hess(std::size_t i, std::size_t j) const { return h_[packed_index(dim(), i, j)]; }

  Grad& grad_mut() noexcept { return g_; }
  Hess& hess_mut() noexcept { return h_; }
  T& value_mut() noexcept { return v_; }

  void resize_derivatives(std::size_t dim) requires kIsDynamic {
    g_.assign(dim, T(0.0));
    h_.assign(packed_size(dim), T(0.0));
  }

  Jet& operator+=(const Jet& o) { return *this = *this + o; }
  Jet& operator-=(const Jet& o) { return *this = *this - o; }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }
  Jet& operator/=(const Jet& o) { return *this = *this / o; }

 private:
  T v_;
  Grad g_{};
  Hess h_{};
};

template <class T, int N>
double value_of(const Jet<T, N>& j) {
  return value_of(j.value());
}

namespace detail {

template <class T, int N>
Jet<T, N> shaped_like(const Jet<T, N>& a, const Jet<T, N>& b, T value) {
  Jet<T, N> r(value);
  if constexpr (N == kDynamic) r.resize_derivatives(a.is_constant() ? b.dim() : a.dim());
  return r;
}

// f(u) given f(u), f'(u), f''(u):  ∇ = f' ∇u,  H = f' Hu + f'' ∇u ∇uᵀ.
template <class T, int N>
Jet<T, N> chain(const Jet<T, N>& u, T f, T d1, T d2) {
  Jet<T, N> r(f);
  if (u.is_constant()) return r;
  if constexpr (N == kDynamic) r.resize_derivatives(u.dim());
  const std::size_t n = u.dim();
  const auto& g = u.grad();
  const auto& h = u.packed_hessian();
  auto& rg = r.grad_mut();
  auto& rh = r.hess_mut();
  for (std::size_t i = 0; i < n; ++i) rg[i] = d1 * g[i];
  std::size_t p = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const T d2gi = d2 * g[i];
    for (std::size_t j = i; j < n; ++j, ++p) rh[p] = d1 * h[p] + d2gi * g[j];
  }
  return r;
}

template <class T, int N>
Jet<T, N> scale(const Jet<T, N>& a, const T& c, T value) {
  Jet<T, N> r(value);
  if (a.is_constant()) return r;
  if constexpr (N == kDynamic) r.resize_derivatives(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) r.grad_mut()[i] = c * a.grad()[i];
  for (std::size_t p = 0; p < a.packed_hessian().size(); ++p) r.hess_mut()[p] = c * a.packed_hessian()[p];
  return r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Jet ⊕ Jet
// ---------------------------------------------------------------------------

template <class T, int N>
Jet<T, N> operator-(const Jet<T, N>& a) {
  return detail::scale(a, T(-1.0), -a.value());
}

template <class T, int N>
Jet<T, N> operator+(const Jet<T, N>& a, const Jet<T, N>& b) {
  if (b.is_constant()) return a + b.value();
  if (a.is_constant()) return b + a.value();
  Jet<T, N> r = detail::shaped_like(a, b, a.value() + b.value());
  for (std::size_t i = 0; i < a.dim(); ++i) r.grad_mut()[i] = a.grad()[i] + b.grad()[i];
  for (std::size_t p = 0; p < r.packed_hessian().size(); ++p) {
    r.hess_mut()[p] = a.packed_hessian()[p] + b.packed_hessian()[p];
  }
  return r;
}

template <class T, int N>
Jet<T, N> operator-(const Jet<T, N>& a, const Jet<T, N>& b) {
  if (b.is_constant()) return a - b.value();
  if (a.is_constant()) return a.value() - b;
  Jet<T, N> r = detail::shaped_like(a, b, a.value() - b.value());
  for (std::size_t i = 0; i < a.dim(); ++i) r.grad_mut()[i] = a.grad()[i] - b.grad()[i];
  for (std::size_t p = 0; p < r.packed_hessian().size(); ++p) {
    r.hess_mut()[p] = a.packed_hessian()[p] - b.packed_hessian()[p];
  }
  return r;
}

template <class T, int N>
Jet<T, N> operator*(const Jet<T, N>& a, const Jet<T, N>& b) {
  if (b.is_constant()) return a * b.value();
  if (a.is_constant()) return a.value() * b;
  Jet<T, N> r = detail::shaped_like(a, b, a.value() * b.value());
  const std::size_t n = a.dim();
  const auto& ga = a.grad();
  const auto& gb = b.grad();
  for (std::size_t i = 0; i < n; ++i) r.grad_mut()[i] = a.value() * gb[i] + b.value() * ga[i];
  std::size_t p = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j, ++p) {
      r.hess_mut()[p] = a.value() * b.packed_hessian()[p] + b.value() * a.packed_hessian()[p] +
                        (ga[i] * gb[j] + gb[i] * ga[j]);
    }
  }
  return r;
}

// q = a/b:  ∇q = (∇a − q∇b)/b,  Hq = (Ha − q Hb − (∇q∇bᵀ + ∇b∇qᵀ))/b.
template <class T, int N>
Jet<T, N> operator/(const Jet<T, N>& a, const Jet<T, N>& b) {
  if (b.is_constant()) return a / b.value();
  if (a.is_constant()) return a.value() / b;
  Jet<T, N> r = detail::shaped_like(a, b, a.value() / b.value());
  const std::size_t n = a.dim();
  const T& q = r.value();
  const auto& gb = b.grad();
  for (std::size_t i = 0; i < n; ++i) r.grad_mut()[i] = (a.grad()[i] - q * gb[i]) / b.value();
  const auto& gq = r.grad();
  std::size_t p = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j, ++p) {
      r.hess_mut()[p] = (a.packed_hessian()[p] - q * b.packed_hessian()[p] - (gq[i] * gb[j] + gb[i] * gq[j])) /
                        b.value();
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Jet ⊕ scalar. The scalar parameter is non-deduced so double converts to Var.
// ---------------------------------------------------------------------------

template <class T, int N>
Jet<T, N> operator+(const Jet<T, N>& a, const std::type_identity_t<T>& c) {
  Jet<T, N> r = a;
  r.value_mut() = a.value() + c;
  return r;
}
template <class T, int N>
Jet<T, N> operator+(const std::type_identity_t<T>& c, const Jet<T, N>& a) {
  Jet<T, N> r = a;
  r.value_mut() = c + a.value();
  return r;
}
template <class T, int N>
Jet<T, N> operator-(const Jet<T, N>& a, const std::type_identity_t<T>& c) {
  Jet<T, N> r = a;
  r.value_mut() = a.value() - c;
  return r;
}
template <class T, int N>
Jet<T, N> operator-(const std::type_identity_t<T>& c, const Jet<T, N>& a) {
  return detail::scale(a, T(-1.0), c - a.value());
}
template <class T, int N>
Jet<T, N> operator*(const Jet<T, N>& a, const std::type_identity_t<T>& c) {
  return detail::scale(a, c, a.value() * c);
}
template <class T, int N>
Jet<T, N> operator*(const std::type_identity_t<T>& c, const Jet<T, N>& a) {
  return detail::scale(a, c, c * a.value());
}
template <class T, int N>
Jet<T, N> operator/(const Jet<T, N>& a, const std::type_identity_t<T>& c) {
  return detail::scale(a, T(1.0) / c, a.value() / c);
}
template <class T, int N>
Jet<T, N> operator/(const std::type_identity_t<T>& c, const Jet<T, N>& b) {
  const T inv = T(1.0) / b.value();
  const T q = c * inv;
  // c/u:  f' = −c/u²,  f'' = 2c/u³
  return detail::chain(b, q, -q * inv, T(2.0) * q * inv * inv);
}

// ---------------------------------------------------------------------------
// Elementary functions
// ---------------------------------------------------------------------------

template <class T, int N>
Jet<T, N> exp(const Jet<T, N>& u) {
  using std::exp;
  const T e = exp(u.value());
  return detail::chain(u, e, e, e);
}

template <class T, int N>
Jet<T, N> log(const Jet<T, N>& u) {
  using std::log;
  const T inv = T(1.0) / u.value();
  return detail::chain(u, log(u.value()), inv, -(inv * inv));
}

template <class T, int N>
Jet<T, N> tanh(const Jet<T, N>& u) {
  using std::tanh;
  const T t = tanh(u.value());
  const T d1 = T(1.0) - t * t;
  return detail::chain(u, t, d1, T(-2.0) * t * d1);
}

template <class T, int N>
Jet<T, N> sigmoid(const Jet<T, N>& u) {
  const T s = sigmoid(u.value());
  const T d1 = s * (T(1.0) - s);
  return detail::chain(u, s, d1, d1 * (T(1.0) - T(2.0) * s));
}

template <class T, int N>
Jet<T, N> softplus(const Jet<T, N>& u) {
  const T s = sigmoid(u.value());
  return detail::chain(u, softplus(u.value()), s, s * (T(1.0) - s));
}

template <class T, int N>
Jet<T, N> sin(const Jet<T, N>& u) {
  using std::cos;
  using std::sin;
  const T s = sin(u.value());
  return detail::chain(u, s, cos(u.value()), -s);
}

template <class T, int N>
Jet<T, N> cos(const Jet<T, N>& u) {
  using std::cos;
  using std::sin;
  const T c = cos(u.value());
  return detail::chain(u, c, -sin(u.value()), -c);
}

template <class T, int N>
Jet<T, N> pow(const Jet<T, N>& u, int n) {
  if (n == 0) return Jet<T, N>(T(1.0));
  const T d1 = T(static_cast<double>(n)) * pow(u.value(), n - 1);
  const T d2 = n == 1 ? T(0.0) : T(static_cast<double>(n) * (n - 1)) * pow(u.value(), n - 2);
  return detail::chain(u, pow(u.value(), n), d1, d2);
}

/// Σ w_k x_k, component-wise over value, gradient and Hessian so that a Var
/// scalar records one tape node per component.
template <class T, int N>
Jet<T, N> linear_combination(std::span<const T> w, std::span<const Jet<T, N>> x) {
  thread_local std::vector<T> column;
  column.resize(x.size());
  auto gather = [&](auto&& component) -> T {
    for (std::size_t k = 0; k < x.size(); ++k) column[k] = component(x[k]);
    return linear_combination(w, std::span<const T>(column));
  };
  Jet<T, N> r(gather([](const Jet<T, N>& j) { return j.value(); }));
  std::size_t n = 0;
  for (const auto& j : x) n = std::max(n, j.dim());
  if (n == 0) return r;
  if constexpr (N == kDynamic) r.resize_derivatives(n);
  const T zero(0.0);
  for (std::size_t i = 0; i < n; ++i) {
    r.grad_mut()[i] = gather([&](const Jet<T, N>& j) { return j.is_constant() ? zero : j.grad()[i]; });
  }
  for (std::size_t p = 0; p < packed_size(n); ++p) {
    r.hess_mut()[p] = gather([&](const Jet<T, N>& j) { return j.is_constant() ? zero : j.packed_hessian()[p]; });
  }
  return r;
}

}  // namespace lagnet::diffkit

#pragma once

#include <cmath>
#include <span>

namespace lagnet::diffkit {

// Plain-double versions of the primitive set, so generic code can call them
// unqualified for double, Var and Jet alike. Without the exact-match double
// overloads an unqualified call inside this namespace would convert to Var.

inline double exp(double x) { return std::exp(x); }
inline double log(double x) { return std::log(x); }
inline double tanh(double x) { return std::tanh(x); }
inline double sin(double x) { return std::sin(x); }
inline double cos(double x) { return std::cos(x); }

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double pow(double x, int n) {
  double result = 1.0;
  double base = n < 0 ? 1.0 / x : x;
  for (unsigned k = n < 0 ? -static_cast<unsigned>(n) : static_cast<unsigned>(n); k; k >>= 1) {
    if (k & 1u) result *= base;
    base *= base;
  }
  return result;
}

inline double linear_combination(std::span<const double> w, std::span<const double> x) {
  double sum = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) sum += w[k] * x[k];
  return sum;
}

inline double value_of(double x) { return x; }

}  // namespace lagnet::diffkit

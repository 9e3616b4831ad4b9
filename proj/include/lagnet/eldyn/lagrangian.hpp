#pragma once

#include <functional>
#include <memory>
#include <span>

#include "lagnet/diffkit/diffkit.hpp"
#include "lagnet/eldyn/types.hpp"

namespace lagnet::eldyn {

/// A scalar L(q, q̇) together with its exact first and second derivatives.
/// Copies share the underlying callables; evaluation is const and thread-safe
/// as long as the wrapped callables are.
class Lagrangian {
 public:
  using ValueFn = std::function<double(const PhaseState&)>;
  using BundleFn = std::function<diffkit::DerivativeBundle(const PhaseState&)>;

  Lagrangian(std::size_t dof, ValueFn value, BundleFn bundle);

  /// Wraps a generic callable `f(std::span<const S> q, std::span<const S> q_dot) -> S`.
  template <class F>
  static Lagrangian from_expression(std::size_t dof, F f) {
    auto shared = std::make_shared<const F>(std::move(f));
    auto fn = diffkit::scalar_function(2 * dof, [shared, dof](auto z) { return (*shared)(z.first(dof), z.subspan(dof)); });
    return Lagrangian(
        dof, [shared](const PhaseState& s) { return (*shared)(std::span<const double>(s.q), std::span<const double>(s.q_dot)); },
        [fn](const PhaseState& s) { return diffkit::derivative_bundle(fn, s.packed()); });
  }

  std::size_t dof() const noexcept { return dof_; }
  double operator()(const PhaseState& s) const;

  /// Value, gradient and Hessian over z = (q, q̇).
  diffkit::DerivativeBundle bundle(const PhaseState& s) const;

  friend Lagrangian operator*(double c, const Lagrangian& l);
  friend Lagrangian operator+(const Lagrangian& a, const Lagrangian& b);

 private:
  void check(const PhaseState& s) const;

  std::size_t dof_;
  ValueFn value_;
  BundleFn bundle_;
};

}  // namespace lagnet::eldyn

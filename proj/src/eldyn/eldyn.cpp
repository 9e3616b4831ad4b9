#include "lagnet/eldyn/eldyn.hpp"

#include <cmath>

#include "lagnet/errors.hpp"

namespace lagnet::eldyn {

template <class T>
BasicAccel<T> solve_euler_lagrange(const diffkit::BasicBundle<T>& bundle, std::span<const double> q_dot) {
  const std::size_t d = q_dot.size();
  if (bundle.dim() != 2 * d) throw UsageError("bundle dimension must be twice the number of coordinates");

  diffkit::Matrix<T> velocity_hessian(d, d);
  std::vector<T> rhs(d);
  std::vector<T> row(d);
  const std::vector<double> qd(q_dot.begin(), q_dot.end());
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      velocity_hessian(i, j) = bundle.hessian(d + i, d + j);
      row[j] = bundle.hessian(d + i, j);
    }
    // ∇_q L − (∇_q∇_q̇ᵀ L) q̇, with row i of the mixed block ∂²L/∂q̇_i∂q_j.
    T mixed(0.0);
    for (std::size_t j = 0; j < d; ++j) mixed = mixed + row[j] * T(qd[j]);
    rhs[i] = bundle.gradient[i] - mixed;
  }
  BasicAccel<T> out;
  out.q_ddot = diffkit::pinv_solve(velocity_hessian, rhs, &out.info);
  return out;
}

template BasicAccel<double> solve_euler_lagrange(const diffkit::BasicBundle<double>&, std::span<const double>);
template BasicAccel<diffkit::Var> solve_euler_lagrange(const diffkit::BasicBundle<diffkit::Var>&,
                                                       std::span<const double>);

namespace {

void require_finite(const diffkit::DerivativeBundle& b, const PhaseState& s) {
  bool ok = std::isfinite(b.value);
  for (double g : b.gradient) ok = ok && std::isfinite(g);
  for (double h : b.hessian.data()) ok = ok && std::isfinite(h);
  if (!ok) {
    throw NumericError("non-finite Lagrangian derivatives at " + describe_vector(s.packed()), s.packed());
  }
}

}  // namespace

AccelResult accel(const Lagrangian& lagrangian, const PhaseState& state) {
  const auto bundle = lagrangian.bundle(state);
  require_finite(bundle, state);
  auto solved = solve_euler_lagrange(bundle, state.q_dot);
  AccelResult out{std::move(solved.q_ddot), solved.info.condition(), solved.info.degenerate};
  if (!out.degenerate) {
    for (double a : out.q_ddot) {
      if (!std::isfinite(a)) throw NumericError("non-finite acceleration", state.packed());
    }
  }
  return out;
}

std::vector<double> canonical_momentum(const Lagrangian& lagrangian, const PhaseState& state) {
  const auto bundle = lagrangian.bundle(state);
  require_finite(bundle, state);
  const std::size_t d = state.dof();
  return {bundle.gradient.begin() + static_cast<std::ptrdiff_t>(d), bundle.gradient.end()};
}

double learned_energy(const Lagrangian& lagrangian, const PhaseState& state) {
  const auto momentum = canonical_momentum(lagrangian, state);
  double h = 0.0;
  for (std::size_t i = 0; i < momentum.size(); ++i) h += momentum[i] * state.q_dot[i];
  return h - lagrangian(state);
}

std::vector<std::vector<double>> el_residual(const Lagrangian& lagrangian, const Trajectory& trajectory) {
  if (trajectory.size() < 3) throw UsageError("el_residual needs at least 3 samples");
  if (!(trajectory.h > 0.0)) throw UsageError("el_residual needs a positive timestep");
  trajectory.validate();

  const std::size_t d = lagrangian.dof();
  std::vector<std::vector<double>> grads;
  grads.reserve(trajectory.size());
  for (const auto& s : trajectory.states) {
    auto b = lagrangian.bundle(s);
    require_finite(b, s);
    grads.push_back(std::move(b.gradient));
  }
  std::vector<std::vector<double>> residuals;
  residuals.reserve(trajectory.size() - 2);
  for (std::size_t k = 1; k + 1 < trajectory.size(); ++k) {
    std::vector<double> r(d);
    for (std::size_t i = 0; i < d; ++i) {
      r[i] = (grads[k + 1][d + i] - grads[k - 1][d + i]) / (2.0 * trajectory.h) - grads[k][i];
    }
    residuals.push_back(std::move(r));
  }
  return residuals;
}

double max_residual_norm(const std::vector<std::vector<double>>& residuals) {
  double worst = 0.0;
  for (const auto& r : residuals) {
    double sq = 0.0;
    for (double v : r) sq += v * v;
    worst = std::max(worst, std::sqrt(sq));
  }
  return worst;
}

}  // namespace lagnet::eldyn

#include "lagnet/refsys/integrate.hpp"

#include <cmath>

namespace lagnet::refsys {

using eldyn::PhaseState;
using eldyn::Trajectory;

namespace {

bool finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

std::vector<double> checked_accel(const AccelFn& accel, const PhaseState& s) {
  if (!finite(s.q) || !finite(s.q_dot)) throw NumericError("non-finite intermediate state");
  auto a = accel(s);
  if (a.size() != s.dof()) throw UsageError("acceleration function returned the wrong dimension");
  return a;
}

eldyn::PhaseState advance(const AccelFn& accel, const PhaseState& state, double h, const std::vector<double>& k1);

// Shared driver: samples at t_k = k·h, accelerations recorded per sample.
Trajectory integrate(const AccelFn& accel, const PhaseState& initial, double h, std::size_t steps,
                     std::size_t traj_index) {
  if (!(h > 0.0) || !std::isfinite(h)) throw UsageError("timestep must be positive");
  initial.validate();
  Trajectory t;
  t.h = h;
  t.times.reserve(steps + 1);
  t.states.reserve(steps + 1);
  t.accels.reserve(steps + 1);
  PhaseState s = initial;
  for (std::size_t k = 0;; ++k) {
    std::vector<double> a;
    try {
      a = checked_accel(accel, s);
      if (!finite(a)) throw NumericError("non-finite acceleration");
    } catch (const DivergenceError&) {
      throw;
    } catch (const NumericError& e) {
      throw DivergenceError("trajectory " + std::to_string(traj_index) + " diverged after sample " +
                                std::to_string(k == 0 ? 0 : k - 1) + ": " + e.what(),
                            traj_index, k == 0 ? 0 : k - 1);
    }
    t.times.push_back(static_cast<double>(k) * h);
    t.states.push_back(s);
    t.accels.push_back(std::move(a));
    if (k == steps) break;
    try {
      s = advance(accel, s, h, t.accels.back());
    } catch (const NumericError& e) {
      throw DivergenceError("trajectory " + std::to_string(traj_index) + " diverged after sample " +
                                std::to_string(k) + ": " + e.what(),
                            traj_index, k);
    }
  }
  return t;
}

PhaseState advance(const AccelFn& accel, const PhaseState& state, double h, const std::vector<double>& k1) {
  const std::size_t d = state.dof();
  const auto& q = state.q;
  const auto& v = state.q_dot;
  PhaseState stage{q, v};

  for (std::size_t i = 0; i < d; ++i) {
    stage.q[i] = q[i] + 0.5 * h * v[i];
    stage.q_dot[i] = v[i] + 0.5 * h * k1[i];
  }
  const std::vector<double> v2 = stage.q_dot;
  const auto k2 = checked_accel(accel, stage);
  for (std::size_t i = 0; i < d; ++i) {
    stage.q[i] = q[i] + 0.5 * h * v2[i];
    stage.q_dot[i] = v[i] + 0.5 * h * k2[i];
  }
  const std::vector<double> v3 = stage.q_dot;
  const auto k3 = checked_accel(accel, stage);
  for (std::size_t i = 0; i < d; ++i) {
    stage.q[i] = q[i] + h * v3[i];
    stage.q_dot[i] = v[i] + h * k3[i];
  }
  const auto k4 = checked_accel(accel, stage);

  PhaseState next{q, v};
  for (std::size_t i = 0; i < d; ++i) {
    next.q[i] = q[i] + h * v[i] + (h * h / 6.0) * (k1[i] + k2[i] + k3[i]);
    next.q_dot[i] = v[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  if (!finite(next.q) || !finite(next.q_dot)) {
    throw NumericError("RK4 step produced a non-finite state from " + describe_vector(state.packed()),
                       state.packed());
  }
  return next;
}

}  // namespace

PhaseState rk4_step(const AccelFn& accel, const PhaseState& state, double h) {
  state.validate();
  return advance(accel, state, h, checked_accel(accel, state));
}

std::vector<Trajectory> generate_trajectories(const ReferenceSystem& system, std::size_t count, double h,
                                              std::size_t steps, std::uint64_t seed) {
  if (!(h > 0.0) || !std::isfinite(h)) throw UsageError("timestep must be positive");
  if (steps < 2) throw UsageError("trajectories need at least 2 steps");
  std::vector<Trajectory> out;
  out.reserve(count);
  const AccelFn accel = [&system](const PhaseState& s) { return system.true_accel(s); };
  for (std::size_t k = 0; k < count; ++k) {
    const std::uint64_t traj_seed = mix64(seed ^ static_cast<std::uint64_t>(k));
    std::mt19937_64 rng(traj_seed);
    Trajectory t = integrate(accel, system.sample(rng), h, steps, k);
    t.system = system.name();
    t.seed = traj_seed;
    out.push_back(std::move(t));
  }
  return out;
}

Trajectory integrate_reference(const ReferenceSystem& system, const PhaseState& initial, double h,
                               std::size_t steps) {
  Trajectory t = integrate([&system](const PhaseState& s) { return system.true_accel(s); }, initial, h, steps, 0);
  t.system = system.name();
  return t;
}

Trajectory rollout(const eldyn::Lagrangian& lagrangian, const PhaseState& initial, double h, std::size_t steps,
                   RolloutStats* stats) {
  RolloutStats local;
  RolloutStats& st = stats ? *stats : local;
  st = {};
  const AccelFn accel = [&](const PhaseState& s) {
    auto r = eldyn::accel(lagrangian, s);
    ++st.accel_calls;
    if (r.degenerate) ++st.degenerate_events;
    st.max_condition = std::max(st.max_condition, r.hessian_condition);
    return r.q_ddot;
  };
  return integrate(accel, initial, h, steps, 0);
}

}  // namespace lagnet::refsys

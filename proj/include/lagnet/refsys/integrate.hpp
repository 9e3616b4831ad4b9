#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "lagnet/eldyn/eldyn.hpp"
#include "lagnet/errors.hpp"
#include "lagnet/refsys/systems.hpp"

namespace lagnet::refsys {

using AccelFn = std::function<std::vector<double>(const eldyn::PhaseState&)>;

/// A state became non-finite while integrating.
class DivergenceError : public NumericError {
 public:
  DivergenceError(const std::string& what, std::size_t trajectory, std::size_t last_finite)
      : NumericError(what), trajectory_(trajectory), last_finite_(last_finite) {}

  std::size_t trajectory() const noexcept { return trajectory_; }
  /// Index of the last sample that was still finite.
  std::size_t last_finite() const noexcept { return last_finite_; }

 private:
  std::size_t trajectory_;
  std::size_t last_finite_;
};

/// Classical RK4 on (q, q̇)' = (q̇, a(q, q̇)). The position update is written as
/// q + h q̇ + h²/6 (k1 + k2 + k3), which equals the textbook form exactly in
/// exact arithmetic. Throws NumericError if the result is not finite.
eldyn::PhaseState rk4_step(const AccelFn& accel, const eldyn::PhaseState& state, double h);

/// `count` trajectories of `steps + 1` samples each. Trajectory k starts from
/// the system's sampler seeded with mix64(seed ⊕ k). Throws DivergenceError
/// naming the trajectory on blow-up.
std::vector<eldyn::Trajectory> generate_trajectories(const ReferenceSystem& system, std::size_t count, double h,
                                                     std::size_t steps, std::uint64_t seed);

/// Integrates from a given initial state with the closed-form acceleration.
eldyn::Trajectory integrate_reference(const ReferenceSystem& system, const eldyn::PhaseState& initial, double h,
                                      std::size_t steps);

struct RolloutStats {
  std::size_t accel_calls = 0;
  std::size_t degenerate_events = 0;
  double max_condition = 1.0;
};

/// Integrates the dynamics of any Lagrangian, with accelerations from eldyn::accel.
eldyn::Trajectory rollout(const eldyn::Lagrangian& lagrangian, const eldyn::PhaseState& initial, double h,
                          std::size_t steps, RolloutStats* stats = nullptr);

}  // namespace lagnet::refsys

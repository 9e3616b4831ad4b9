#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lagnet::eldyn {

/// Generalized coordinates and velocities at one instant.
struct PhaseState {
  std::vector<double> q;
  std::vector<double> q_dot;

  std::size_t dof() const noexcept { return q.size(); }

  /// (q, q̇) concatenated; the input layout of every Lagrangian.
  std::vector<double> packed() const;
  static PhaseState unpack(std::span<const double> z);

  /// Throws UsageError unless q and q̇ have equal dimension ≥ 1 and are finite.
  void validate() const;
};

/// Uniformly sampled path with the accelerations recorded at each sample.
struct Trajectory {
  std::string system;
  std::uint64_t seed = 0;
  double h = 0.0;
  std::vector<double> times;
  std::vector<PhaseState> states;
  std::vector<std::vector<double>> accels;

  std::size_t size() const noexcept { return states.size(); }

  /// Equal array lengths and |t[k+1] − t[k] − h| ≤ 1e-12.
  void validate() const;
};

}  // namespace lagnet::eldyn

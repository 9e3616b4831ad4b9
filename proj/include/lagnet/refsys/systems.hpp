#pragma once

// Reference systems with analytic Lagrangians and closed-form accelerations.
//
//   free_particle    d = 2   L = ½m‖q̇‖²
//   harmonic         d = 1   L = ½m q̇² − ½k q²
//   pendulum         d = 1   L = ½m l² θ̇² + m g l cos θ
//   double_pendulum  d = 2   equal masses m and lengths l
//   wave1d           d = n   Σ_i φ̇_i² − ((φ_{i+1} − φ_{i−1}) / 2Δx)², periodic

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "lagnet/eldyn/lagrangian.hpp"
#include "lagnet/eldyn/types.hpp"

namespace lagnet::refsys {

struct Constants {
  double m = 1.0;
  double l = 1.0;
  double g = 1.0;
  double k = 1.0;
};

struct WaveGrid {
  std::size_t sites = 16;
  double dx = 1.0;
};

/// Uniform range of one sampled quantity, recorded in dataset metadata.
struct SamplerRange {
  std::string quantity;
  double lo;
  double hi;
};

/// 64-bit finalizer used to derive per-trajectory seeds: seed_k = mix(seed ⊕ k).
std::uint64_t mix64(std::uint64_t x) noexcept;

class ReferenceSystem {
 public:
  /// Throws UsageError naming the valid systems when `name` is unknown.
  static ReferenceSystem make(std::string_view name, Constants constants = {}, WaveGrid grid = {});
  static const std::vector<std::string>& names();

  const std::string& name() const noexcept { return name_; }
  std::size_t dof() const noexcept { return dof_; }
  const Constants& constants() const noexcept { return constants_; }
  const WaveGrid& grid() const noexcept { return grid_; }
  const eldyn::Lagrangian& lagrangian() const noexcept { return lagrangian_; }

  /// Closed-form acceleration.
  std::vector<double> true_accel(const eldyn::PhaseState& s) const;

  /// Draws an initial state from the default sampler.
  eldyn::PhaseState sample(std::mt19937_64& rng) const;
  const std::vector<SamplerRange>& sampler() const noexcept { return sampler_; }

 private:
  ReferenceSystem(std::string name, std::size_t dof, Constants c, WaveGrid grid, eldyn::Lagrangian l,
                  std::vector<SamplerRange> sampler);

  std::string name_;
  std::size_t dof_;
  Constants constants_;
  WaveGrid grid_;
  eldyn::Lagrangian lagrangian_;
  std::vector<SamplerRange> sampler_;
};

/// Closed-form double pendulum accelerations for masses m1, m2 and lengths l1, l2.
std::vector<double> double_pendulum_accel(const eldyn::PhaseState& s, double m1, double m2, double l1, double l2,
                                          double g);

}  // namespace lagnet::refsys

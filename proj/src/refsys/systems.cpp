#include "lagnet/refsys/systems.hpp"

#include <cmath>
#include <numbers>

#include "lagnet/errors.hpp"
#include "lagnet/gridlag/grid.hpp"

namespace lagnet::refsys {

namespace {

using eldyn::PhaseState;

void require_dof(const PhaseState& s, std::size_t d, const std::string& name) {
  s.validate();
  if (s.dof() != d) {
    throw UsageError(name + " has " + std::to_string(d) + " coordinates, state has " + std::to_string(s.dof()));
  }
}

std::string joined_names() {
  std::string out;
  for (const auto& n : ReferenceSystem::names()) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

const std::vector<std::string>& ReferenceSystem::names() {
  static const std::vector<std::string> kNames{"free_particle", "harmonic", "pendulum", "double_pendulum", "wave1d"};
  return kNames;
}

ReferenceSystem::ReferenceSystem(std::string name, std::size_t dof, Constants c, WaveGrid grid, eldyn::Lagrangian l,
                                 std::vector<SamplerRange> sampler)
    : name_(std::move(name)),
      dof_(dof),
      constants_(c),
      grid_(grid),
      lagrangian_(std::move(l)),
      sampler_(std::move(sampler)) {}

ReferenceSystem ReferenceSystem::make(std::string_view name, Constants c, WaveGrid grid) {
  for (double v : {c.m, c.l, c.g, c.k}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw UsageError("physical constants must be positive and finite");
  }
  const double pi = std::numbers::pi;
  if (name == "free_particle") {
    auto l = eldyn::Lagrangian::from_expression(2, [m = c.m](auto, auto qd) {
      return 0.5 * m * (qd[0] * qd[0] + qd[1] * qd[1]);
    });
    return {"free_particle", 2, c, grid, l, {{"q", -1.0, 1.0}, {"qd", -1.0, 1.0}}};
  }
  if (name == "harmonic") {
    auto l = eldyn::Lagrangian::from_expression(1, [m = c.m, k = c.k](auto q, auto qd) {
      return 0.5 * m * qd[0] * qd[0] - 0.5 * k * q[0] * q[0];
    });
    return {"harmonic", 1, c, grid, l, {{"q", -1.0, 1.0}, {"qd", -1.0, 1.0}}};
  }
  if (name == "pendulum") {
    auto l = eldyn::Lagrangian::from_expression(1, [c](auto q, auto qd) {
      using std::cos;
      return 0.5 * c.m * c.l * c.l * qd[0] * qd[0] + c.m * c.g * c.l * cos(q[0]);
    });
    return {"pendulum", 1, c, grid, l, {{"theta", -pi, pi}, {"theta_dot", -1.0, 1.0}}};
  }
  if (name == "double_pendulum") {
    auto l = eldyn::Lagrangian::from_expression(2, [c](auto q, auto qd) {
      using std::cos;
      const double m1 = c.m, m2 = c.m, l1 = c.l, l2 = c.l;
      return 0.5 * (m1 + m2) * l1 * l1 * qd[0] * qd[0] + 0.5 * m2 * l2 * l2 * qd[1] * qd[1] +
             m2 * l1 * l2 * qd[0] * qd[1] * cos(q[0] - q[1]) + (m1 + m2) * c.g * l1 * cos(q[0]) +
             m2 * c.g * l2 * cos(q[1]);
    });
    return {"double_pendulum", 2, c, grid, l, {{"theta", -pi / 2, pi / 2}, {"theta_dot", -0.5, 0.5}}};
  }
  if (name == "wave1d") {
    if (grid.sites < gridlag::kMinSites) throw UsageError("wave1d needs at least 5 sites");
    if (!(grid.dx > 0.0)) throw UsageError("wave1d grid spacing must be positive");
    auto l = gridlag::field_lagrangian(gridlag::WaveDensity{}, grid.dx, gridlag::StencilSet::symmetric(grid.sites));
    return {"wave1d", grid.sites, c, grid, l, {{"mode_amplitude", -0.5, 0.5}, {"mode_phase", 0.0, 2 * pi}}};
  }
  throw UsageError("unknown system '" + std::string(name) + "'; valid systems: " + joined_names());
}

std::vector<double> double_pendulum_accel(const PhaseState& s, double m1, double m2, double l1, double l2, double g) {
  const double t1 = s.q[0], t2 = s.q[1], w1 = s.q_dot[0], w2 = s.q_dot[1];
  const double delta = t1 - t2;
  const double den = 2 * m1 + m2 - m2 * std::cos(2 * delta);
  const double a1 = (-g * (2 * m1 + m2) * std::sin(t1) - m2 * g * std::sin(t1 - 2 * t2) -
                     2 * std::sin(delta) * m2 * (w2 * w2 * l2 + w1 * w1 * l1 * std::cos(delta))) /
                    (l1 * den);
  const double a2 = 2 * std::sin(delta) *
                    (w1 * w1 * l1 * (m1 + m2) + g * (m1 + m2) * std::cos(t1) + w2 * w2 * l2 * m2 * std::cos(delta)) /
                    (l2 * den);
  return {a1, a2};
}

std::vector<double> ReferenceSystem::true_accel(const PhaseState& s) const {
  require_dof(s, dof_, name_);
  const Constants& c = constants_;
  if (name_ == "free_particle") return {0.0, 0.0};
  if (name_ == "harmonic") return {-(c.k / c.m) * s.q[0]};
  if (name_ == "pendulum") return {-(c.g / c.l) * std::sin(s.q[0])};
  if (name_ == "double_pendulum") return double_pendulum_accel(s, c.m, c.m, c.l, c.l, c.g);
  return gridlag::wave_accel(gridlag::GridField::from_state(s, grid_.dx));
}

PhaseState ReferenceSystem::sample(std::mt19937_64& rng) const {
  auto uniform = [&rng](const SamplerRange& r) { return std::uniform_real_distribution<double>(r.lo, r.hi)(rng); };
  PhaseState s;
  if (name_ == "wave1d") {
    // Three lowest Fourier modes for φ and for φ̇.
    const double n = static_cast<double>(dof_);
    s.q.assign(dof_, 0.0);
    s.q_dot.assign(dof_, 0.0);
    for (auto* field : {&s.q, &s.q_dot}) {
      for (int mode = 1; mode <= 3; ++mode) {
        const double amp = uniform(sampler_[0]);
        const double phase = uniform(sampler_[1]);
        for (std::size_t i = 0; i < dof_; ++i) {
          (*field)[i] += amp * std::sin(2 * std::numbers::pi * mode * static_cast<double>(i) / n + phase);
        }
      }
    }
    return s;
  }
  for (std::size_t i = 0; i < dof_; ++i) s.q.push_back(uniform(sampler_[0]));
  for (std::size_t i = 0; i < dof_; ++i) s.q_dot.push_back(uniform(sampler_[1]));
  return s;
}

}  // namespace lagnet::refsys

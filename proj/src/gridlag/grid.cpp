#include "lagnet/gridlag/grid.hpp"

#include <cmath>

namespace lagnet::gridlag {

void GridField::validate() const {
  if (phi.size() < kMinSites) {
    throw UsageError("grid field needs at least " + std::to_string(kMinSites) + " sites, got " +
                     std::to_string(phi.size()));
  }
  if (phi_dot.size() != phi.size()) throw UsageError("phi and phi_dot must have the same length");
  if (!(dx > 0.0) || !std::isfinite(dx)) throw UsageError("grid spacing dx must be positive and finite");
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (!std::isfinite(phi[i]) || !std::isfinite(phi_dot[i])) {
      throw UsageError("non-finite field value at site " + std::to_string(i));
    }
  }
}

GridField GridField::from_state(const eldyn::PhaseState& s, double dx) {
  GridField f{s.q, s.q_dot, dx, Boundary::periodic};
  f.validate();
  return f;
}

StencilSet::StencilSet(std::size_t n, const std::vector<std::vector<long>>& raw) {
  if (raw.size() != n) {
    throw UsageError("stencil set lists " + std::to_string(raw.size()) + " sites for a grid of " + std::to_string(n));
  }
  const long ln = static_cast<long>(n);
  sites_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (raw[i].empty()) throw UsageError("empty stencil at site " + std::to_string(i));
    for (long j : raw[i]) {
      if (j < -ln || j >= 2 * ln) {
        throw UsageError("stencil index " + std::to_string(j) + " at site " + std::to_string(i) +
                         " is out of range after periodic wrapping");
      }
      const std::size_t w = static_cast<std::size_t>((j + ln) % ln);
      sites_[i].push_back(w);
      const std::size_t d = w > i ? w - i : i - w;
      half_width_ = std::max(half_width_, std::min(d, n - d));
    }
  }
}

StencilSet StencilSet::symmetric(std::size_t n, std::size_t half_width) {
  if (2 * half_width + 1 > n) throw UsageError("stencil is wider than the grid");
  std::vector<std::vector<long>> raw(n);
  const long w = static_cast<long>(half_width);
  for (std::size_t i = 0; i < n; ++i) {
    for (long k = -w; k <= w; ++k) raw[i].push_back(static_cast<long>(i) + k);
  }
  return StencilSet(n, raw);
}

double fd_wave_density(const GridField& field, std::size_t i) {
  field.validate();
  const std::size_t n = field.size();
  if (i >= n) throw UsageError("site index " + std::to_string(i) + " out of range");
  const double slope = (field.phi[(i + 1) % n] - field.phi[(i + n - 1) % n]) / (2.0 * field.dx);
  return field.phi_dot[i] * field.phi_dot[i] - slope * slope;
}

std::vector<double> wave_accel(const GridField& field) {
  field.validate();
  const std::size_t n = field.size();
  const double c = 1.0 / (4.0 * field.dx * field.dx);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = (field.phi[(i + 2) % n] - 2.0 * field.phi[i] + field.phi[(i + n - 2) % n]) * c;
  }
  return out;
}

namespace detail {

void check_compatible(const GridField& field, const StencilSet& stencils) {
  field.validate();
  if (stencils.sites() != field.size()) {
    throw UsageError("stencil set has " + std::to_string(stencils.sites()) + " sites, field has " +
                     std::to_string(field.size()));
  }
}

}  // namespace detail

}  // namespace lagnet::gridlag

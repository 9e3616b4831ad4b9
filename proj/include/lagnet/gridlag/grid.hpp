#pragma once

// Lagrangian densities on a periodic 1-D lattice.
//
// A density is a callable object with
//
//   template <class S> S operator()(std::span<const S> phi, std::span<const S> phi_dot, double dx) const;
//
// that receives the field values on one stencil (in stencil order) and
// returns that site's contribution. The total Lagrangian is the sum over
// sites, and the field accelerations follow from the same Euler–Lagrange
// solve as any other Lagrangian, with z = (φ_0..φ_{n−1}, φ̇_0..φ̇_{n−1}).

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "lagnet/diffkit/diffkit.hpp"
#include "lagnet/eldyn/eldyn.hpp"
#include "lagnet/errors.hpp"
#include "lagnet/netcore/network.hpp"

namespace lagnet::gridlag {

enum class Boundary { periodic };

inline constexpr std::size_t kMinSites = 5;

struct GridField {
  std::vector<double> phi;
  std::vector<double> phi_dot;
  double dx = 1.0;
  Boundary boundary = Boundary::periodic;

  std::size_t size() const noexcept { return phi.size(); }
  /// n ≥ 5, equal lengths, finite entries, dx > 0.
  void validate() const;

  eldyn::PhaseState state() const { return {phi, phi_dot}; }
  static GridField from_state(const eldyn::PhaseState& s, double dx);
};

/// Per-site neighbor lists. Raw indices in [−n, 2n) are wrapped periodically.
class StencilSet {
 public:
  StencilSet(std::size_t n, const std::vector<std::vector<long>>& raw);

  /// {i−w, …, i, …, i+w} at every site; w = 1 gives the nearest-neighbor default.
  static StencilSet symmetric(std::size_t n, std::size_t half_width = 1);

  std::size_t sites() const noexcept { return sites_.size(); }
  std::span<const std::size_t> at(std::size_t i) const { return sites_.at(i); }
  /// Largest periodic distance between a site and a member of its stencil.
  std::size_t half_width() const noexcept { return half_width_; }
  /// Upper bound on the half-bandwidth of the velocity Hessian (2·half_width).
  std::size_t bandwidth() const noexcept { return 2 * half_width_; }

 private:
  std::vector<std::vector<std::size_t>> sites_;
  std::size_t half_width_ = 0;
};

/// 𝓛_i = φ̇_i² − ((φ_{i+1} − φ_{i−1}) / (2Δx))² on the stencil {i−1, i, i+1}.
struct WaveDensity {
  template <class S>
  S operator()(std::span<const S> phi, std::span<const S> phi_dot, double dx) const {
    if (phi.size() != 3 || phi_dot.size() != 3) throw UsageError("wave density needs the stencil {i-1, i, i+1}");
    const S slope = (phi[2] - phi[0]) / (2.0 * dx);
    return phi_dot[1] * phi_dot[1] - slope * slope;
  }
};

/// A network shared by all sites, fed (φ on the stencil, φ̇ on the stencil).
/// P is the parameter scalar: double for evaluation, Var for training.
template <class P = double>
struct NetworkDensity {
  const netcore::Network* network;
  std::span<const P> theta;

  template <class S>
  S operator()(std::span<const S> phi, std::span<const S> phi_dot, double /*dx*/) const {
    std::vector<S> z;
    z.reserve(phi.size() + phi_dot.size());
    z.insert(z.end(), phi.begin(), phi.end());
    z.insert(z.end(), phi_dot.begin(), phi_dot.end());
    return network->apply(theta, std::span<const S>(z));
  }
};

/// Direct evaluation of the wave density at site i.
double fd_wave_density(const GridField& field, std::size_t i);

/// φ̈_i = (φ_{i+2} − 2φ_i + φ_{i−2}) / (4Δx²), the equation of motion of the wave density.
std::vector<double> wave_accel(const GridField& field);

namespace detail {

void check_compatible(const GridField& field, const StencilSet& stencils);

template <class S>
void gather(std::span<const S> values, std::span<const std::size_t> idx, std::vector<S>& out) {
  out.clear();
  for (std::size_t j : idx) out.push_back(values[j]);
}

}  // namespace detail

/// Σ_i 𝓛_i for a field of any scalar type S.
template <class Density, class S>
S total_lagrangian(const Density& local, std::span<const S> phi, std::span<const S> phi_dot, double dx,
                   const StencilSet& stencils) {
  S total(0.0);
  std::vector<S> a, b;
  for (std::size_t i = 0; i < stencils.sites(); ++i) {
    detail::gather(phi, stencils.at(i), a);
    detail::gather(phi_dot, stencils.at(i), b);
    total = total + local(std::span<const S>(a), std::span<const S>(b), dx);
  }
  return total;
}

template <class Density>
double total_lagrangian(const Density& local, const GridField& field, const StencilSet& stencils) {
  detail::check_compatible(field, stencils);
  return total_lagrangian(local, std::span<const double>(field.phi), std::span<const double>(field.phi_dot), field.dx,
                          stencils);
}

/// The total Lagrangian as an eldyn::Lagrangian over all 2n field variables.
template <class Density>
eldyn::Lagrangian field_lagrangian(Density local, double dx, StencilSet stencils) {
  const std::size_t n = stencils.sites();
  return eldyn::Lagrangian::from_expression(
      n, [local = std::move(local), dx, stencils = std::move(stencils)](auto phi, auto phi_dot) {
        return total_lagrangian(local, phi, phi_dot, dx, stencils);
      });
}

/// Reference path: full Hessian over all 2n variables, then the pseudoinverse solve.
template <class Density>
std::vector<double> field_accel_dense(const Density& local, const GridField& field, const StencilSet& stencils,
                                      eldyn::AccelResult* result_out = nullptr) {
  detail::check_compatible(field, stencils);
  auto result = eldyn::accel(field_lagrangian(local, field.dx, stencils), field.state());
  if (result_out) *result_out = result;
  return result.q_ddot;
}

/// Sparse pieces of the field system, assembled from per-site jets:
/// A = ∇_φ̇∇_φ̇ᵀ𝓛 and r = ∇_φ𝓛 − (∇_φ∇_φ̇ᵀ𝓛) φ̇.
/// `add_a(i, j, v)` receives every local contribution to A_ij (repeats add up).
template <class T, class Density, class AddA>
std::vector<T> assemble_field_system(const Density& local, std::span<const double> phi,
                                     std::span<const double> phi_dot, double dx, const StencilSet& stencils,
                                     AddA&& add_a) {
  const std::size_t n = stencils.sites();
  std::vector<T> rhs(n, T(0.0));
  std::vector<T> z;
  for (std::size_t i = 0; i < n; ++i) {
    const auto idx = stencils.at(i);
    const std::size_t s = idx.size();
    z.clear();
    for (std::size_t j : idx) z.push_back(T(phi[j]));
    for (std::size_t j : idx) z.push_back(T(phi_dot[j]));
    diffkit::with_jet_width(2 * s, [&]<int N>() {
      using J = diffkit::Jet<T, N>;
      const auto jets = diffkit::seed_jets<N, T>(z);
      const std::span<const J> all(jets);
      const J y = local(all.first(s), all.subspan(s), dx);
      if (y.is_constant()) return 0;
      for (std::size_t a = 0; a < s; ++a) {
        rhs[idx[a]] = rhs[idx[a]] + y.grad()[a];
        for (std::size_t b = 0; b < s; ++b) {
          add_a(idx[a], idx[b], y.hess(s + a, s + b));
          rhs[idx[a]] = rhs[idx[a]] - y.hess(s + a, b) * T(phi_dot[idx[b]]);
        }
      }
      return 0;
    });
  }
  return rhs;
}

/// Field accelerations from the assembled sparse system, solved densely with
/// the pseudoinverse. Works for T = Var (used by training on lattices).
template <class T, class Density>
eldyn::BasicAccel<T> field_accel_assembled(const Density& local, const GridField& field, const StencilSet& stencils) {
  detail::check_compatible(field, stencils);
  const std::size_t n = field.size();
  diffkit::Matrix<T> a(n, n);
  auto rhs = assemble_field_system<T>(local, field.phi, field.phi_dot, field.dx, stencils,
                                      [&](std::size_t i, std::size_t j, const T& v) { a(i, j) = a(i, j) + v; });
  eldyn::BasicAccel<T> out;
  out.q_ddot = diffkit::pinv_solve(a, rhs, &out.info);
  return out;
}

/// Symmetric cyclic band matrix with half-bandwidth p: entry (i, j) is stored
/// when the periodic distance between i and j is at most p.
class CyclicBand {
 public:
  CyclicBand(std::size_t n, std::size_t p);

  std::size_t size() const noexcept { return n_; }
  std::size_t half_bandwidth() const noexcept { return p_; }
  /// Signed periodic offset j − i in [−p, p]; throws UsageError when outside the band.
  long offset(std::size_t i, std::size_t j) const;
  void add(std::size_t i, std::size_t j, double v);
  double operator()(std::size_t i, std::size_t j) const;
  diffkit::Matrix<double> dense() const;

 private:
  std::size_t n_;
  std::size_t p_;
  std::vector<double> data_;  // row i, offset k ∈ [−p, p] at i·(2p+1) + k + p
};

struct BandedDiagnostics {
  bool fell_back = false;      // dense pseudoinverse used instead of the band solver
  bool degenerate = false;     // dense fallback found a degenerate Hessian
  double min_pivot_ratio = 0;  // smallest |pivot| / max|A| seen by the band solver
  std::string reason;
};

/// Solves A x = r for a cyclic band matrix in O(n·p²): band LU with partial
/// pivoting on the first n − p unknowns, then a dense p×p Schur complement
/// for the wrap-around block. Falls back to the dense pseudoinverse when a
/// pivot drops below 1e-10·max|A| or the band covers the whole ring.
std::vector<double> solve_cyclic_band(const CyclicBand& a, std::span<const double> rhs,
                                      BandedDiagnostics* diag = nullptr);

/// Same result as field_accel_dense (to rounding) with cost linear in n.
template <class Density>
std::vector<double> field_accel_banded(const Density& local, const GridField& field, const StencilSet& stencils,
                                       BandedDiagnostics* diag = nullptr) {
  detail::check_compatible(field, stencils);
  CyclicBand a(field.size(), stencils.bandwidth());
  const auto rhs = assemble_field_system<double>(local, field.phi, field.phi_dot, field.dx, stencils,
                                                 [&](std::size_t i, std::size_t j, double v) { a.add(i, j, v); });
  for (double r : rhs) {
    if (!std::isfinite(r)) throw NumericError("non-finite field derivatives", field.state().packed());
  }
  return solve_cyclic_band(a, rhs, diag);
}

}  // namespace lagnet::gridlag

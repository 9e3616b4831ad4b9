#pragma once

// Dynamics of a scalar Lagrangian.
//
// The acceleration solve expands d/dt ∇_q̇ L = ∇_q L with the chain rule:
//
//   q̈ = (∇_q̇∇_q̇ᵀ L)⁺ [∇_q L − (∇_q∇_q̇ᵀ L) q̇],   [∇_q∇_q̇ᵀ L]_ij = ∂²L/∂q̇_i∂q_j
//
// with an SVD pseudoinverse truncated at kPinvRelativeTolerance·σ_max. A
// degenerate velocity Hessian is flagged, not thrown.

#include <span>
#include <vector>

#include "lagnet/diffkit/diffkit.hpp"
#include "lagnet/eldyn/lagrangian.hpp"
#include "lagnet/eldyn/types.hpp"

namespace lagnet::eldyn {

struct AccelResult {
  std::vector<double> q_ddot;
  double hessian_condition = 1.0;  // σ_max / σ_min of the q̇q̇ block
  bool degenerate = false;
};

template <class T>
struct BasicAccel {
  std::vector<T> q_ddot;
  diffkit::PinvInfo info;
};

/// Solves for q̈ from a bundle over z = (q, q̇). Instantiated for double and Var;
/// the Var form records the whole solve on the active tape.
template <class T>
BasicAccel<T> solve_euler_lagrange(const diffkit::BasicBundle<T>& bundle, std::span<const double> q_dot);

AccelResult accel(const Lagrangian& lagrangian, const PhaseState& state);

/// Π = ∇_q̇ L.
std::vector<double> canonical_momentum(const Lagrangian& lagrangian, const PhaseState& state);

/// Legendre-transform energy H = Π·q̇ − L.
double learned_energy(const Lagrangian& lagrangian, const PhaseState& state);

/// r(t_k) = [∇_q̇L(t_{k+1}) − ∇_q̇L(t_{k−1})]/(2h) − ∇_qL(t_k) for every interior sample.
std::vector<std::vector<double>> el_residual(const Lagrangian& lagrangian, const Trajectory& trajectory);

/// max_k ‖r(t_k)‖₂ over the residuals above.
double max_residual_norm(const std::vector<std::vector<double>>& residuals);

}  // namespace lagnet::eldyn

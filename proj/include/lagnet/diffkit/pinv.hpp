#pragma once

#include <limits>
#include <span>
#include <vector>

#include "lagnet/diffkit/matrix.hpp"
#include "lagnet/diffkit/tape.hpp"

namespace lagnet::diffkit {

/// Singular values below this fraction of the largest are truncated.
inline constexpr double kPinvRelativeTolerance = 1e-10;

struct PinvInfo {
  double sigma_max = 0.0;
  double sigma_min = 0.0;
  std::size_t rank = 0;
  bool degenerate = false;

  /// σ_max / σ_min; infinite for a singular matrix.
  double condition() const {
    if (sigma_min == 0.0) return std::numeric_limits<double>::infinity();
    return sigma_max / sigma_min;
  }
};

struct Pseudoinverse {
  Matrix<double> matrix;  // cols × rows of the input
  PinvInfo info;
};

/// SVD pseudoinverse. `degenerate` is set when σ_min < tol·σ_max (or A == 0).
Pseudoinverse pseudoinverse(const Matrix<double>& a, double relative_tolerance = kPinvRelativeTolerance);

/// x = A⁺ b.
std::vector<double> pinv_solve(const Matrix<double>& a, std::span<const double> b, PinvInfo* info = nullptr);

/// x = A⁺ b recorded on the tape. Partials use the constant-rank derivative of
/// the pseudoinverse,
///   d(A⁺) = −A⁺ dA A⁺ + A⁺A⁺ᵀ dAᵀ (I − AA⁺) + (I − A⁺A) dAᵀ A⁺ᵀA⁺,
/// which reduces to −A⁻¹ dA A⁻¹ when A is invertible.
std::vector<Var> pinv_solve(const Matrix<Var>& a, std::span<const Var> b, PinvInfo* info = nullptr);

}  // namespace lagnet::diffkit

#include <algorithm>
#include <cmath>

#include "lagnet/gridlag/grid.hpp"

namespace lagnet::gridlag {

namespace {

constexpr double kPivotTolerance = 1e-10;

// Band covers the whole ring: store everything densely.
bool is_full(std::size_t n, std::size_t p) { return 2 * p + 1 >= n; }

}  // namespace

CyclicBand::CyclicBand(std::size_t n, std::size_t p) : n_(n), p_(p) {
  if (n == 0) throw UsageError("empty band matrix");
  data_.assign(is_full(n, p) ? n * n : n * (2 * p + 1), 0.0);
}

long CyclicBand::offset(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) throw UsageError("band index out of range");
  long k = static_cast<long>(j) - static_cast<long>(i);
  const long n = static_cast<long>(n_);
  if (k > n / 2) k -= n;
  if (k < -(n - 1) / 2) k += n;
  if (std::labs(k) > static_cast<long>(p_)) throw UsageError("entry outside the matrix band");
  return k;
}

void CyclicBand::add(std::size_t i, std::size_t j, double v) {
  if (is_full(n_, p_)) {
    if (i >= n_ || j >= n_) throw UsageError("band index out of range");
    data_[i * n_ + j] += v;
    return;
  }
  data_[i * (2 * p_ + 1) + static_cast<std::size_t>(offset(i, j) + static_cast<long>(p_))] += v;
}

double CyclicBand::operator()(std::size_t i, std::size_t j) const {
  if (is_full(n_, p_)) return data_.at(i * n_ + j);
  long k = static_cast<long>(j) - static_cast<long>(i);
  const long n = static_cast<long>(n_);
  if (k > n / 2) k -= n;
  if (k < -(n - 1) / 2) k += n;
  if (std::labs(k) > static_cast<long>(p_)) return 0.0;
  return data_[i * (2 * p_ + 1) + static_cast<std::size_t>(k + static_cast<long>(p_))];
}

diffkit::Matrix<double> CyclicBand::dense() const {
  diffkit::Matrix<double> m(n_, n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) m(i, j) = (*this)(i, j);
  }
  return m;
}

namespace {

struct PivotTooSmall {
  double ratio;
};

// Dense Gaussian elimination with partial pivoting, in place; small systems only.
void dense_solve(std::vector<double>& a, std::vector<double>& b, std::size_t n, std::size_t nrhs, double scale,
                 double& min_ratio) {
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < n; ++r) {
      if (std::fabs(a[r * n + k]) > std::fabs(a[piv * n + k])) piv = r;
    }
    const double ratio = std::fabs(a[piv * n + k]) / scale;
    min_ratio = std::min(min_ratio, ratio);
    if (!(ratio >= kPivotTolerance)) throw PivotTooSmall{ratio};
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
      for (std::size_t c = 0; c < nrhs; ++c) std::swap(b[k * nrhs + c], b[piv * nrhs + c]);
    }
    for (std::size_t r = k + 1; r < n; ++r) {
      const double f = a[r * n + k] / a[k * n + k];
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) a[r * n + j] -= f * a[k * n + j];
      for (std::size_t c = 0; c < nrhs; ++c) b[r * nrhs + c] -= f * b[k * nrhs + c];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t c = 0; c < nrhs; ++c) {
      double s = b[i * nrhs + c];
      for (std::size_t j = i + 1; j < n; ++j) s -= a[i * n + j] * b[j * nrhs + c];
      b[i * nrhs + c] = s / a[i * n + i];
    }
  }
}

// Interior block: m unknowns, half-bandwidth p, no wrap-around. Row i stores
// columns [i − p, i + 2p] (the upper part widens through row swaps).
// Solves for nrhs right-hand sides stored row-major in b.
void band_solve(const CyclicBand& a, std::size_t m, std::vector<double>& b, std::size_t nrhs, double scale,
                double& min_ratio) {
  const std::size_t p = a.half_bandwidth();
  const std::size_t width = 3 * p + 1;
  std::vector<double> lu(m * width, 0.0);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return lu[i * width + (j + p - i)]; };
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t lo = i >= p ? i - p : 0;
    const std::size_t hi = std::min(m - 1, i + p);
    for (std::size_t j = lo; j <= hi; ++j) at(i, j) = a(i, j);
  }
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t last = std::min(m - 1, k + p);
    std::size_t piv = k;
    for (std::size_t r = k + 1; r <= last; ++r) {
      if (std::fabs(at(r, k)) > std::fabs(at(piv, k))) piv = r;
    }
    const double ratio = std::fabs(at(piv, k)) / scale;
    min_ratio = std::min(min_ratio, ratio);
    if (!(ratio >= kPivotTolerance)) throw PivotTooSmall{ratio};
    const std::size_t jend = std::min(m - 1, k + 2 * p);
    if (piv != k) {
      for (std::size_t j = k; j <= jend; ++j) std::swap(at(k, j), at(piv, j));
      for (std::size_t c = 0; c < nrhs; ++c) std::swap(b[k * nrhs + c], b[piv * nrhs + c]);
    }
    for (std::size_t r = k + 1; r <= last; ++r) {
      const double f = at(r, k) / at(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k; j <= jend; ++j) at(r, j) -= f * at(k, j);
      for (std::size_t c = 0; c < nrhs; ++c) b[r * nrhs + c] -= f * b[k * nrhs + c];
    }
  }
  for (std::size_t i = m; i-- > 0;) {
    const std::size_t jend = std::min(m - 1, i + 2 * p);
    for (std::size_t c = 0; c < nrhs; ++c) {
      double s = b[i * nrhs + c];
      for (std::size_t j = i + 1; j <= jend; ++j) s -= at(i, j) * b[j * nrhs + c];
      b[i * nrhs + c] = s / at(i, i);
    }
  }
}

std::vector<double> solve_dense_fallback(const CyclicBand& a, std::span<const double> rhs, BandedDiagnostics* diag) {
  diffkit::PinvInfo info;
  auto x = diffkit::pinv_solve(a.dense(), std::vector<double>(rhs.begin(), rhs.end()), &info);
  if (diag) {
    diag->fell_back = true;
    diag->degenerate = info.degenerate;
  }
  return x;
}

}  // namespace

std::vector<double> solve_cyclic_band(const CyclicBand& a, std::span<const double> rhs, BandedDiagnostics* diag) {
  const std::size_t n = a.size();
  const std::size_t p = a.half_bandwidth();
  if (rhs.size() != n) throw UsageError("right-hand side length does not match the band matrix");
  BandedDiagnostics local;
  if (!diag) diag = &local;
  *diag = {};
  diag->min_pivot_ratio = 1.0;

  if (is_full(n, p)) {
    diag->reason = "band covers the whole ring";
    return solve_dense_fallback(a, rhs, diag);
  }
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (long k = -static_cast<long>(p); k <= static_cast<long>(p); ++k) {
      const std::size_t j = static_cast<std::size_t>((static_cast<long>(i + n) + k) % static_cast<long>(n));
      scale = std::max(scale, std::fabs(a(i, j)));
    }
  }
  if (scale == 0.0) {
    diag->reason = "zero matrix";
    return solve_dense_fallback(a, rhs, diag);
  }

  // Unknowns [0, m) form a plain band block; [m, n) is the wrap-around border.
  const std::size_t m = n - p;
  const std::size_t nrhs = p + 1;
  try {
    // Columns: 0 → interior rhs, 1 + c → column m + c of A.
    std::vector<double> b(m * nrhs, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      b[i * nrhs] = rhs[i];
      for (std::size_t c = 0; c < p; ++c) b[i * nrhs + 1 + c] = a(i, m + c);
    }
    band_solve(a, m, b, nrhs, scale, diag->min_pivot_ratio);

    // Schur complement S = A_BB − A_BI A_II⁻¹ A_IB and t = r_B − A_BI A_II⁻¹ r_I.
    std::vector<double> s(p * p, 0.0);
    std::vector<double> t(p, 0.0);
    for (std::size_t c = 0; c < p; ++c) {
      const std::size_t row = m + c;
      for (std::size_t d = 0; d < p; ++d) s[c * p + d] = a(row, m + d);
      t[c] = rhs[row];
      for (long k = -static_cast<long>(p); k <= static_cast<long>(p); ++k) {
        const std::size_t j = static_cast<std::size_t>((static_cast<long>(row + n) + k) % static_cast<long>(n));
        if (j >= m) continue;
        const double v = a(row, j);
        if (v == 0.0) continue;
        t[c] -= v * b[j * nrhs];
        for (std::size_t d = 0; d < p; ++d) s[c * p + d] -= v * b[j * nrhs + 1 + d];
      }
    }
    if (p > 0) dense_solve(s, t, p, 1, scale, diag->min_pivot_ratio);

    std::vector<double> x(n);
    for (std::size_t i = 0; i < m; ++i) {
      double v = b[i * nrhs];
      for (std::size_t d = 0; d < p; ++d) v -= b[i * nrhs + 1 + d] * t[d];
      x[i] = v;
    }
    for (std::size_t c = 0; c < p; ++c) x[m + c] = t[c];
    return x;
  } catch (const PivotTooSmall& e) {
    diag->min_pivot_ratio = e.ratio;
    diag->reason = "pivot below tolerance";
    return solve_dense_fallback(a, rhs, diag);
  }
}

}  // namespace lagnet::gridlag

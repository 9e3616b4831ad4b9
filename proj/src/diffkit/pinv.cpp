#include "lagnet/diffkit/pinv.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace lagnet::diffkit {

namespace {

Eigen::MatrixXd to_eigen(const Matrix<double>& a) {
  Eigen::MatrixXd m(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
  }
  return m;
}

}  // namespace

Pseudoinverse pseudoinverse(const Matrix<double>& a, double relative_tolerance) {
  Pseudoinverse out{Matrix<double>(a.cols(), a.rows()), {}};
  if (a.rows() == 0 || a.cols() == 0) return out;

  const Eigen::MatrixXd m = to_eigen(a);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();  // descending

  PinvInfo& info = out.info;
  info.sigma_max = s(0);
  info.sigma_min = s(s.size() - 1);
  const double cutoff = relative_tolerance * info.sigma_max;
  info.degenerate = info.sigma_max == 0.0 || info.sigma_min < cutoff;

  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (s(k) > 0.0 && s(k) >= cutoff) {
      inv(k) = 1.0 / s(k);
      ++info.rank;
    }
  }
  const Eigen::MatrixXd p = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  for (std::size_t i = 0; i < a.cols(); ++i) {
    for (std::size_t j = 0; j < a.rows(); ++j) out.matrix(i, j) = p(i, j);
  }
  return out;
}

std::vector<double> pinv_solve(const Matrix<double>& a, std::span<const double> b, PinvInfo* info) {
  const Pseudoinverse p = pseudoinverse(a);
  if (info) *info = p.info;
  std::vector<double> x(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.cols(); ++i) {
    double sum = 0.0;
    for (std::size_t k = 0; k < a.rows(); ++k) sum += p.matrix(i, k) * b[k];
    x[i] = sum;
  }
  return x;
}

std::vector<Var> pinv_solve(const Matrix<Var>& a, std::span<const Var> b, PinvInfo* info) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  Matrix<double> av(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) av(i, j) = a(i, j).value();
  }
  std::vector<double> bv(m);
  for (std::size_t k = 0; k < m; ++k) bv[k] = b[k].value();

  const Pseudoinverse pinv = pseudoinverse(av);
  if (info) *info = pinv.info;
  const Matrix<double>& p = pinv.matrix;

  std::vector<double> x(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < m; ++k) x[i] += p(i, k) * bv[k];
  }

  // Rank-deficient correction terms; identically zero for invertible A.
  std::vector<double> residual(m);  // (I − AA⁺) b
  for (std::size_t k = 0; k < m; ++k) {
    double ax = 0.0;
    for (std::size_t j = 0; j < n; ++j) ax += av(k, j) * x[j];
    residual[k] = bv[k] - ax;
  }
  std::vector<double> y(m, 0.0);  // A⁺ᵀ x
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t i = 0; i < n; ++i) y[k] += p(i, k) * x[i];
  }
  Matrix<double> ppt(n, n);         // A⁺A⁺ᵀ
  Matrix<double> null_proj(n, n);   // I − A⁺A
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < n; ++l) {
      double s1 = 0.0;
      double s2 = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        s1 += p(i, k) * p(l, k);
        s2 += p(i, k) * av(k, l);
      }
      ppt(i, l) = s1;
      null_proj(i, l) = (i == l ? 1.0 : 0.0) - s2;
    }
  }

  std::vector<Var> parents;
  std::vector<double> partials;
  parents.reserve(m * n + m);
  partials.reserve(m * n + m);
  std::vector<Var> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    parents.clear();
    partials.clear();
    for (std::size_t k = 0; k < m; ++k) {
      parents.push_back(b[k]);
      partials.push_back(p(i, k));
      for (std::size_t l = 0; l < n; ++l) {
        parents.push_back(a(k, l));
        partials.push_back(-p(i, k) * x[l] + ppt(i, l) * residual[k] + null_proj(i, l) * y[k]);
      }
    }
    out[i] = make_node(x[i], parents, partials);
  }
  return out;
}

}  // namespace lagnet::diffkit

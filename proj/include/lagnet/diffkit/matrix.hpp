#pragma once

#include <cstddef>
#include <vector>

namespace lagnet::diffkit {

/// Row-major dense matrix over any scalar (double, Var, Jet).
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, const T& fill = T(0.0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  const std::vector<T>& data() const noexcept { return data_; }
  std::vector<T>& data() noexcept { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

/// Value, gradient and Hessian of a scalar function at one point.
template <class T>
struct BasicBundle {
  T value{};
  std::vector<T> gradient;
  Matrix<T> hessian;

  std::size_t dim() const noexcept { return gradient.size(); }
};

using DerivativeBundle = BasicBundle<double>;

}  // namespace lagnet::diffkit

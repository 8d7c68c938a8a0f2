#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tbf {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RowMajorCMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

/// Precondition or argument outside the operation's domain.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Tensor shapes or vector lengths that do not line up.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Iterative solver did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense complex rank-3 tensor stored row-major as (slice, row, col).
///
/// Each slice is an M_out x M_in matrix; slices are contiguous in memory so a
/// slice can be mapped directly as an Eigen row-major matrix.
class ComplexTensor3 {
 public:
  ComplexTensor3() = default;
  ComplexTensor3(std::size_t slices, std::size_t rows, std::size_t cols)
      : slices_(slices), rows_(rows), cols_(cols), data_(slices * rows * cols) {}

  std::size_t slices() const { return slices_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  std::size_t slice_size() const { return rows_ * cols_; }

  Complex& operator()(std::size_t k, std::size_t i, std::size_t j) {
    return data_[(k * rows_ + i) * cols_ + j];
  }
  const Complex& operator()(std::size_t k, std::size_t i, std::size_t j) const {
    return data_[(k * rows_ + i) * cols_ + j];
  }

  Eigen::Map<RowMajorCMatrix> slice(std::size_t k) {
    return {data_.data() + k * slice_size(), static_cast<Eigen::Index>(rows_),
            static_cast<Eigen::Index>(cols_)};
  }
  Eigen::Map<const RowMajorCMatrix> slice(std::size_t k) const {
    return {data_.data() + k * slice_size(), static_cast<Eigen::Index>(rows_),
            static_cast<Eigen::Index>(cols_)};
  }

  std::vector<Complex>& raw() { return data_; }
  const std::vector<Complex>& raw() const { return data_; }

  double squared_norm() const {
    double s = 0.0;
    for (const auto& z : data_) s += std::norm(z);
    return s;
  }

  friend bool operator==(const ComplexTensor3&, const ComplexTensor3&) = default;

 private:
  std::size_t slices_ = 0;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

}  // namespace tbf

#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace rdslab {

inline constexpr int kMaxDim = 16;
inline constexpr double kDetFloor = 1e-300;

// Small dense row-major d x d matrix, d <= 16.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(int d);
  Matrix(int d, std::initializer_list<double> rowmajor);
  Matrix(int d, const std::vector<double>& rowmajor);

  static Matrix identity(int d);
  static Matrix diag(const std::vector<double>& entries);

  int dim() const { return d_; }
  double& at(int i, int j) { return a_[static_cast<std::size_t>(i) * d_ + j]; }
  double at(int i, int j) const { return a_[static_cast<std::size_t>(i) * d_ + j]; }
  const std::vector<double>& data() const { return a_; }

  Matrix operator*(const Matrix& rhs) const;
  Matrix& operator*=(double c);

  double frobenius() const;
  double max_abs() const;

  // log|det| via LU with partial pivoting; throws SingularityError when
  // |det| <= kDetFloor.
  double log_abs_det() const;

  // Inverse via Gauss-Jordan with partial pivoting; same singularity check.
  Matrix inverse() const;

  // Singular values, descending, by one-sided Jacobi to relative tolerance
  // 1e-12. Throws DimensionError for d > kMaxDim.
  std::vector<double> singular_values() const;

 private:
  int d_ = 0;
  std::vector<double> a_;
};

bool approx_equal(const Matrix& a, const Matrix& b, double rel_tol);

}  // namespace rdslab

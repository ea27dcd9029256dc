#include "rdslab/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rdslab/errors.hpp"

namespace rdslab {

Matrix::Matrix(int d) : d_(d), a_(static_cast<std::size_t>(d) * d, 0.0) {
  if (d < 1) throw DimensionError("matrix dimension must be >= 1");
}

Matrix::Matrix(int d, std::initializer_list<double> rowmajor)
    : Matrix(d, std::vector<double>(rowmajor)) {}

Matrix::Matrix(int d, const std::vector<double>& rowmajor) : d_(d), a_(rowmajor) {
  if (d < 1) throw DimensionError("matrix dimension must be >= 1");
  if (a_.size() != static_cast<std::size_t>(d) * d)
    throw DimensionError("matrix literal has wrong element count");
}

Matrix Matrix::identity(int d) {
  Matrix m(d);
  for (int i = 0; i < d; ++i) m.at(i, i) = 1.0;
  return m;
}

Matrix Matrix::diag(const std::vector<double>& entries) {
  Matrix m(static_cast<int>(entries.size()));
  for (int i = 0; i < m.dim(); ++i) m.at(i, i) = entries[static_cast<std::size_t>(i)];
  return m;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
  if (d_ != rhs.d_) throw DimensionError("matrix dimension mismatch");
  Matrix out(d_);
  for (int i = 0; i < d_; ++i) {
    for (int k = 0; k < d_; ++k) {
      const double aik = at(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < d_; ++j) out.at(i, j) += aik * rhs.at(k, j);
    }
  }
  return out;
}

Matrix& Matrix::operator*=(double c) {
  for (double& v : a_) v *= c;
  return *this;
}

double Matrix::frobenius() const {
  double s = 0.0;
  for (double v : a_) s += v * v;
  return std::sqrt(s);
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : a_) m = std::max(m, std::abs(v));
  return m;
}

double Matrix::log_abs_det() const {
  std::vector<double> lu = a_;
  const int d = d_;
  auto el = [&](int i, int j) -> double& { return lu[static_cast<std::size_t>(i) * d + j]; };
  double logdet = 0.0;
  for (int c = 0; c < d; ++c) {
    int piv = c;
    for (int r = c + 1; r < d; ++r)
      if (std::abs(el(r, c)) > std::abs(el(piv, c))) piv = r;
    if (piv != c)
      for (int j = 0; j < d; ++j) std::swap(el(c, j), el(piv, j));
    const double p = el(c, c);
    if (std::abs(p) <= kDetFloor) throw SingularityError("matrix determinant below det_floor");
    logdet += std::log(std::abs(p));
    for (int r = c + 1; r < d; ++r) {
      const double f = el(r, c) / p;
      el(r, c) = 0.0;
      for (int j = c + 1; j < d; ++j) el(r, j) -= f * el(c, j);
    }
  }
  return logdet;
}

Matrix Matrix::inverse() const {
  const int d = d_;
  std::vector<double> w = a_;
  Matrix inv = Matrix::identity(d);
  auto el = [&](int i, int j) -> double& { return w[static_cast<std::size_t>(i) * d + j]; };
  for (int c = 0; c < d; ++c) {
    int piv = c;
    for (int r = c + 1; r < d; ++r)
      if (std::abs(el(r, c)) > std::abs(el(piv, c))) piv = r;
    if (std::abs(el(piv, c)) <= kDetFloor)
      throw SingularityError("matrix not invertible within det_floor");
    if (piv != c) {
      for (int j = 0; j < d; ++j) {
        std::swap(el(c, j), el(piv, j));
        std::swap(inv.at(c, j), inv.at(piv, j));
      }
    }
    const double p = el(c, c);
    for (int j = 0; j < d; ++j) {
      el(c, j) /= p;
      inv.at(c, j) /= p;
    }
    for (int r = 0; r < d; ++r) {
      if (r == c) continue;
      const double f = el(r, c);
      if (f == 0.0) continue;
      for (int j = 0; j < d; ++j) {
        el(r, j) -= f * el(c, j);
        inv.at(r, j) -= f * inv.at(c, j);
      }
    }
  }
  return inv;
}

std::vector<double> Matrix::singular_values() const {
  if (d_ > kMaxDim) throw DimensionError("singular values supported only for d <= 16");
  const int d = d_;
  // One-sided Jacobi on columns: orthogonalize column pairs until every
  // off-diagonal of A^T A is below tol relative to the column norms.
  std::vector<double> w = a_;
  auto el = [&](int i, int j) -> double& { return w[static_cast<std::size_t>(i) * d + j]; };
  const double tol = 1e-12;
  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < d - 1; ++p) {
      for (int q = p + 1; q < d; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (int i = 0; i < d; ++i) {
          app += el(i, p) * el(i, p);
          aqq += el(i, q) * el(i, q);
          apq += el(i, p) * el(i, q);
        }
        if (std::abs(apq) <= tol * std::sqrt(app * aqq)) continue;
        rotated = true;
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int i = 0; i < d; ++i) {
          const double vp = el(i, p), vq = el(i, q);
          el(i, p) = c * vp - s * vq;
          el(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }
  std::vector<double> sv(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += el(i, j) * el(i, j);
    sv[static_cast<std::size_t>(j)] = std::sqrt(s);
  }
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

bool approx_equal(const Matrix& a, const Matrix& b, double rel_tol) {
  if (a.dim() != b.dim()) return false;
  const double scale = std::max(a.max_abs(), b.max_abs());
  for (std::size_t i = 0; i < a.data().size(); ++i)
    if (std::abs(a.data()[i] - b.data()[i]) > rel_tol * std::max(1.0, scale)) return false;
  return true;
}

}  // namespace rdslab

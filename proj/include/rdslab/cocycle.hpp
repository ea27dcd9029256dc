#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rdslab/dynamics.hpp"
#include "rdslab/expr.hpp"
#include "rdslab/matrix.hpp"
#include "rdslab/words.hpp"

namespace rdslab {

// L : [0,1) -> GL_d(R) in evaluable form.
class CocycleGenerator {
 public:
  enum class Kind { Constant, PiecewiseConstant, Parametric };

  static CocycleGenerator constant(Matrix a);
  // cuts: 0 = c_0 < ... < c_k = 1; cell i is [c_i, c_{i+1}) with matrix cells[i]
  static CocycleGenerator piecewise_constant(std::vector<double> cuts, std::vector<Matrix> cells);
  static CocycleGenerator parametric(int dim, std::vector<Expr> entries_rowmajor);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }

  // Throws SingularityError when |det| <= det_floor.
  Matrix eval(double x) const;

  std::string describe() const;

 private:
  CocycleGenerator() = default;
  Kind kind_ = Kind::Constant;
  int dim_ = 1;
  std::vector<double> cuts_;
  std::vector<Matrix> cells_;
  std::vector<Expr> entries_;
};

// d x d core plus a natural-log scale; semantic value = e^{log_scale} * core.
// The core operator norm is kept inside [1e-8, 1e8] by renormalization.
struct ScaledMatrix {
  Matrix core;
  double log_scale = 0.0;

  static ScaledMatrix identity(int d) { return {Matrix::identity(d), 0.0}; }
};

inline constexpr double kRenormLo = 1e-8;
inline constexpr double kRenormHi = 1e8;

// semantic value m * p, renormalized.
ScaledMatrix scaled_multiply(const ScaledMatrix& p, const Matrix& m);
// semantic value p * m (used for accumulating inverse products on the right).
ScaledMatrix scaled_multiply_right(const ScaledMatrix& p, const Matrix& m);

struct NormPair {
  double log_smax = 0.0;
  double log_smin = 0.0;
};

// Logs of the extremal singular values of the semantic value. Only reliable
// when the core has not underflowed; long products should go through
// CocycleAccumulator instead.
NormPair norms(const ScaledMatrix& p);

// Accumulates L(x_{k}) products stepwise. The forward product carries the top
// singular value; the inverse-factor product carries 1/sigma_min, so both
// extremes stay in range over arbitrarily long products. log|det| is summed
// per step.
class CocycleAccumulator {
 public:
  explicit CocycleAccumulator(int d)
      : fwd_(ScaledMatrix::identity(d)), inv_(ScaledMatrix::identity(d)) {}

  void step(const Matrix& generator_value);

  NormPair norms() const;
  double log_abs_det() const { return logdet_; }
  std::uint64_t steps() const { return steps_; }
  const ScaledMatrix& forward() const { return fwd_; }

 private:
  ScaledMatrix fwd_;
  ScaledMatrix inv_;
  double logdet_ = 0.0;
  std::uint64_t steps_ = 0;
};

// L_w(x) = L(x_{n-1}) ... L(x_1) L(x_0); empty word gives the identity.
ScaledMatrix cocycle_along(const MapFamily& family, const CocycleGenerator& L, const Word& w,
                           double x);

}  // namespace rdslab

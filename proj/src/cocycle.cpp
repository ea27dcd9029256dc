#include "rdslab/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rdslab/errors.hpp"

namespace rdslab {

namespace {

void check_invertible(const Matrix& m) {
  m.log_abs_det();  // throws SingularityError below det_floor
}

// Renormalize by the Frobenius norm when it leaves [1e-4, 1e4]. Since
// sigma_max <= frob <= sqrt(d) * sigma_max, the core operator norm then stays
// inside [1e-8, 1e8].
void renormalize(ScaledMatrix& p) {
  const double f = p.core.frobenius();
  if (f >= 1e-4 && f <= 1e4) return;
  if (!(f > 0.0) || !std::isfinite(f)) throw SingularityError("degenerate product core");
  p.core *= 1.0 / f;
  p.log_scale += std::log(f);
}

}  // namespace

CocycleGenerator CocycleGenerator::constant(Matrix a) {
  check_invertible(a);
  CocycleGenerator g;
  g.kind_ = Kind::Constant;
  g.dim_ = a.dim();
  g.cells_.push_back(std::move(a));
  return g;
}

CocycleGenerator CocycleGenerator::piecewise_constant(std::vector<double> cuts,
                                                      std::vector<Matrix> cells) {
  if (cuts.size() < 2 || cuts.front() != 0.0 || cuts.back() != 1.0)
    throw ConfigError("piecewise cuts must run from 0 to 1");
  for (std::size_t i = 1; i < cuts.size(); ++i)
    if (cuts[i] <= cuts[i - 1]) throw ConfigError("piecewise cuts must increase");
  if (cells.size() != cuts.size() - 1)
    throw ConfigError("piecewise cocycle needs one matrix per cell");
  const int d = cells.front().dim();
  for (const auto& m : cells) {
    if (m.dim() != d) throw DimensionError("piecewise cells must share dimension");
    check_invertible(m);
  }
  CocycleGenerator g;
  g.kind_ = Kind::PiecewiseConstant;
  g.dim_ = d;
  g.cuts_ = std::move(cuts);
  g.cells_ = std::move(cells);
  return g;
}

CocycleGenerator CocycleGenerator::parametric(int dim, std::vector<Expr> entries_rowmajor) {
  if (dim < 1) throw DimensionError("dimension must be >= 1");
  if (entries_rowmajor.size() != static_cast<std::size_t>(dim) * dim)
    throw ConfigError("parametric cocycle needs d*d entry expressions");
  CocycleGenerator g;
  g.kind_ = Kind::Parametric;
  g.dim_ = dim;
  g.entries_ = std::move(entries_rowmajor);
  return g;
}

Matrix CocycleGenerator::eval(double x) const {
  if (!(x >= 0.0 && x < 1.0))
    throw DomainError("point " + std::to_string(x) + " outside [0,1)");
  switch (kind_) {
    case Kind::Constant:
      return cells_.front();
    case Kind::PiecewiseConstant: {
      std::size_t cell = 0;
      while (cell + 2 < cuts_.size() && x >= cuts_[cell + 1]) ++cell;
      return cells_[cell];
    }
    case Kind::Parametric: {
      Matrix m(dim_);
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j)
          m.at(i, j) = entries_[static_cast<std::size_t>(i) * dim_ + j].eval(x);
      check_invertible(m);
      return m;
    }
  }
  return Matrix::identity(dim_);
}

std::string CocycleGenerator::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Constant: os << "constant d=" << dim_; break;
    case Kind::PiecewiseConstant:
      os << "piecewise_constant d=" << dim_ << " cells=" << cells_.size();
      break;
    case Kind::Parametric: {
      os << "parametric d=" << dim_ << " [";
      for (std::size_t i = 0; i < entries_.size(); ++i) os << (i ? ";" : "") << entries_[i].text();
      os << "]";
      break;
    }
  }
  return os.str();
}

ScaledMatrix scaled_multiply(const ScaledMatrix& p, const Matrix& m) {
  ScaledMatrix out{m * p.core, p.log_scale};
  renormalize(out);
  return out;
}

ScaledMatrix scaled_multiply_right(const ScaledMatrix& p, const Matrix& m) {
  ScaledMatrix out{p.core * m, p.log_scale};
  renormalize(out);
  return out;
}

NormPair norms(const ScaledMatrix& p) {
  const std::vector<double> sv = p.core.singular_values();
  const double smin = sv.back();
  if (!(smin > 0.0)) throw SingularityError("product core numerically singular");
  return {p.log_scale + std::log(sv.front()), p.log_scale + std::log(smin)};
}

void CocycleAccumulator::step(const Matrix& generator_value) {
  logdet_ += generator_value.log_abs_det();
  fwd_ = scaled_multiply(fwd_, generator_value);
  inv_ = scaled_multiply_right(inv_, generator_value.inverse());
  ++steps_;
}

NormPair CocycleAccumulator::norms() const {
  const double lsmax = fwd_.log_scale + std::log(fwd_.core.singular_values().front());
  const double lsmin = -(inv_.log_scale + std::log(inv_.core.singular_values().front()));
  // cond >= 1 exactly; clamp float noise at the isometry boundary
  return {lsmax, std::min(lsmin, lsmax)};
}

ScaledMatrix cocycle_along(const MapFamily& family, const CocycleGenerator& L, const Word& w,
                           double x) {
  ScaledMatrix p = ScaledMatrix::identity(L.dim());
  for (int s : w.symbols) {
    p = scaled_multiply(p, L.eval(x));
    x = family.apply(s, x);
  }
  return p;
}

}  // namespace rdslab

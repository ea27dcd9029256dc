#include "rdslab/dynamics.hpp"

#include <cmath>
#include <sstream>

#include "rdslab/errors.hpp"

namespace rdslab {

double mod1(double y) {
  double r = y - std::floor(y);
  if (r >= 1.0) r = 0.0;
  return r;
}

MapFamily MapFamily::expanding_affine(int branch_count) {
  if (branch_count < 1) throw ConfigError("family needs N >= 1");
  MapFamily f;
  f.kind_ = Kind::ExpandingAffine;
  f.branch_count_ = branch_count;
  return f;
}

MapFamily MapFamily::rotation(std::vector<double> alphas) {
  if (alphas.empty()) throw ConfigError("rotation family needs at least one alpha");
  MapFamily f;
  f.kind_ = Kind::Rotation;
  f.branch_count_ = static_cast<int>(alphas.size());
  f.alphas_ = std::move(alphas);
  return f;
}

MapFamily MapFamily::piecewise_affine(std::vector<PiecewiseMap> maps) {
  if (maps.empty()) throw ConfigError("piecewise family needs at least one map");
  for (const auto& m : maps) {
    if (m.breaks.size() < 2 || m.breaks.front() != 0.0 || m.breaks.back() != 1.0)
      throw ConfigError("piecewise breakpoints must run from 0 to 1");
    for (std::size_t i = 1; i < m.breaks.size(); ++i)
      if (m.breaks[i] <= m.breaks[i - 1]) throw ConfigError("piecewise breakpoints must increase");
    if (m.slopes.size() != m.breaks.size() - 1 || m.offsets.size() != m.slopes.size())
      throw ConfigError("piecewise map needs one slope and offset per cell");
  }
  MapFamily f;
  f.kind_ = Kind::PiecewiseAffine;
  f.branch_count_ = static_cast<int>(maps.size());
  f.pieces_ = std::move(maps);
  return f;
}

int MapFamily::degree(int j) const {
  switch (kind_) {
    case Kind::ExpandingAffine: return j + 1;
    case Kind::Rotation: return 1;
    case Kind::PiecewiseAffine: {
      // winding count of the piecewise graph, rounded from total slope mass
      const auto& m = pieces_[static_cast<std::size_t>(j - 1)];
      double total = 0.0;
      for (std::size_t i = 0; i < m.slopes.size(); ++i)
        total += m.slopes[i] * (m.breaks[i + 1] - m.breaks[i]);
      return static_cast<int>(std::lround(total));
    }
  }
  return 1;
}

double MapFamily::apply(int j, double x) const {
  if (j < 1 || j > branch_count_)
    throw DomainError("map index " + std::to_string(j) + " outside {1.." +
                      std::to_string(branch_count_) + "}");
  if (!(x >= 0.0 && x < 1.0))
    throw DomainError("point " + std::to_string(x) + " outside [0,1)");
  switch (kind_) {
    case Kind::ExpandingAffine:
      return mod1(static_cast<double>(j + 1) * x);
    case Kind::Rotation:
      return mod1(x + alphas_[static_cast<std::size_t>(j - 1)]);
    case Kind::PiecewiseAffine: {
      const auto& m = pieces_[static_cast<std::size_t>(j - 1)];
      std::size_t cell = 0;
      while (cell + 2 < m.breaks.size() && x >= m.breaks[cell + 1]) ++cell;
      return mod1(m.slopes[cell] * x + m.offsets[cell]);
    }
  }
  return x;
}

double MapFamily::apply_word(const Word& w, double x) const {
  for (int s : w.symbols) x = apply(s, x);
  return x;
}

std::vector<double> MapFamily::orbit(const WordSource& source, double x, std::uint64_t n) const {
  std::vector<double> states;
  states.reserve(n + 1);
  states.push_back(x);
  for (std::uint64_t k = 1; k <= n; ++k) {
    x = apply(source.symbol(k), x);
    states.push_back(x);
  }
  return states;
}

std::string MapFamily::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::ExpandingAffine: os << "expanding_affine N=" << branch_count_; break;
    case Kind::Rotation: {
      os << "rotation alphas=";
      for (std::size_t i = 0; i < alphas_.size(); ++i) os << (i ? "," : "") << alphas_[i];
      break;
    }
    case Kind::PiecewiseAffine: os << "piecewise_affine N=" << branch_count_; break;
  }
  return os.str();
}

}  // namespace rdslab

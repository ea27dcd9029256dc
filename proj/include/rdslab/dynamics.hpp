#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rdslab/words.hpp"

namespace rdslab {

// y mod 1 into [0,1); an exact 1.0 from rounding is clamped to 0.
double mod1(double y);

// N self-maps of [0,1); Lebesgue is the declared invariant measure for the
// built-in kinds. Invariance of user piecewise maps is a declared hypothesis,
// recorded in the manifest, not verified.
class MapFamily {
 public:
  enum class Kind { ExpandingAffine, PiecewiseAffine, Rotation };

  struct PiecewiseMap {
    // breakpoints 0 = b_0 < b_1 < ... < b_k = 1; cell i is [b_i, b_{i+1})
    std::vector<double> breaks;
    std::vector<double> slopes;
    std::vector<double> offsets;
  };

  // T_j(x) = (j+1) x mod 1
  static MapFamily expanding_affine(int branch_count);
  // T_j(x) = x + alpha_j mod 1
  static MapFamily rotation(std::vector<double> alphas);
  static MapFamily piecewise_affine(std::vector<PiecewiseMap> maps);

  Kind kind() const { return kind_; }
  int branch_count() const { return branch_count_; }
  const std::vector<double>& alphas() const { return alphas_; }
  const std::vector<PiecewiseMap>& pieces() const { return pieces_; }

  // Topological degree of T_j, recorded per map (not a checked hypothesis).
  int degree(int j) const;

  double apply(int j, double x) const;
  double apply_word(const Word& w, double x) const;

  // states x_0..x_n driven by the first n symbols of the source
  std::vector<double> orbit(const WordSource& source, double x, std::uint64_t n) const;

  std::string describe() const;

 private:
  Kind kind_ = Kind::ExpandingAffine;
  int branch_count_ = 1;
  std::vector<double> alphas_;
  std::vector<PiecewiseMap> pieces_;
};

}  // namespace rdslab

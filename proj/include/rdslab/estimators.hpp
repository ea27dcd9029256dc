#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rdslab/cocycle.hpp"
#include "rdslab/dynamics.hpp"
#include "rdslab/words.hpp"

namespace rdslab {

enum class Verdict { Converged, Diverging, Undetermined };

std::string verdict_name(Verdict v);

struct VerdictInfo {
  Verdict kind = Verdict::Undetermined;
  double limit = 0.0;      // extrapolated limit when converged
  double tolerance = 0.0;  // band used for the convergence call
  double slope = 0.0;      // fitted per-step rate when diverging
  double r2 = 0.0;
};

struct VerdictOptions {
  double tol = 1e-3;
  double slope_threshold = 1e-3;
  double r2_threshold = 0.99;
};

// Convergence: last three recorded estimates within a band of width 2*tol.
// Divergence: least-squares slope over the last half of the index range.
VerdictInfo assess_sequence(const std::vector<std::uint64_t>& idx, const std::vector<double>& vals,
                            const VerdictOptions& opts = {});

struct ReportRow {
  std::uint64_t n = 0;
  double plus = 0.0;   // primary estimate
  double minus = 0.0;  // secondary estimate (NaN when unused)
  double aux = 0.0;    // std-error / running inf (NaN when unused)
};

struct EstimatorReport {
  std::string quantity;
  std::string normalization;  // "per_time", "per_word", "per_word_per_time", divisor label, ...
  std::vector<ReportRow> rows;
  VerdictInfo verdict;                        // on the plus column
  std::optional<VerdictInfo> verdict_minus;   // on the minus column, when meaningful

  std::vector<std::uint64_t> indices() const;
  std::vector<double> plus_values() const;
  std::vector<double> minus_values() const;
};

// --- extremal Lyapunov exponents along a fixed word ------------------------

// estimate_plus(m) = log sigma_max(L_{w^m}(x)) / m, estimate_minus the
// sigma_min analogue, recorded every `stride` steps; O(m_max) products total.
EstimatorReport lambda_fixed(const MapFamily& family, const CocycleGenerator& L,
                             const WordSource& source, double x, std::uint64_t m_max,
                             std::uint64_t stride = 1, const VerdictOptions& vopts = {});

// --- branch-averaged exponents ---------------------------------------------

enum class Normalization { PerWord, PerWordPerTime };

std::string normalization_name(Normalization n);

struct BranchResult {
  EstimatorReport report;
  std::uint64_t matrix_multiplications = 0;
};

// Exact average over all N^n branches for every n <= n_max, via depth-first
// traversal of the word tree with shared prefix products. `threads` splits
// the first tree level; reduction order is fixed, so results do not depend on
// the worker count.
BranchResult branch_average_exact(const MapFamily& family, const CocycleGenerator& L, double x,
                                  std::uint64_t n_max, Normalization norm,
                                  std::uint64_t budget = kDefaultEnumBudget, int threads = 1,
                                  const VerdictOptions& vopts = {});

// Oracle path: every word recomputed from scratch.
BranchResult branch_average_naive(const MapFamily& family, const CocycleGenerator& L, double x,
                                  std::uint64_t n_max, Normalization norm,
                                  std::uint64_t budget = kDefaultEnumBudget,
                                  const VerdictOptions& vopts = {});

// Monte Carlo over uniform words of a single length n: mean and standard
// error of both norm logs. Per-sample substreams keyed by sample index.
EstimatorReport branch_average_mc(const MapFamily& family, const CocycleGenerator& L, double x,
                                  std::uint64_t n, std::uint64_t samples, std::uint64_t seed,
                                  int threads = 1);

// --- random Birkhoff average ----------------------------------------------

using ScalarObservable = std::function<double(double)>;

EstimatorReport birkhoff_random_average(const MapFamily& family, const ScalarObservable& phi,
                                        double x, std::uint64_t n_max,
                                        std::uint64_t budget = kDefaultEnumBudget,
                                        bool naive = false, const VerdictOptions& vopts = {});

// --- Fekete lemma lab ------------------------------------------------------

struct FeketeViolation {
  std::uint64_t n = 0;
  std::uint64_t p = 0;
  double lhs = 0.0;  // a_{n+p}
  double rhs = 0.0;  // a_n + l^n a_p
  double excess = 0.0;
};

struct FeketeResult {
  EstimatorReport report;  // rows: (k, a_k/l^k, running inf)
  std::vector<FeketeViolation> violations;
};

// Ratios a_k / l^k, running infimum, and all l-subadditivity violations
// a_{n+p} > a_n + l^n a_p + 1e-12 with n+p <= K.
FeketeResult fekete_limit(const std::vector<double>& seq, std::uint64_t l,
                          const VerdictOptions& vopts = {});

// --- subadditivity / Kingman diagnostics -----------------------------------

// Evaluates Phi_{(n,w)}(x) (fixed-word) or Phi_n(x) (branch-total).
class ObservableSequence {
 public:
  enum class Kind { ErgodicSum, LogNormCocycle, LogConormCocycle, BranchSum, UserTabulated };

  static ObservableSequence ergodic_sum(ScalarObservable phi);
  static ObservableSequence log_norm_cocycle(CocycleGenerator L);
  static ObservableSequence log_conorm_cocycle(CocycleGenerator L);
  // Phi_n(x) = sum over all words w^n of the inner fixed-word value.
  static ObservableSequence branch_sum(ObservableSequence inner);
  static ObservableSequence user_tabulated(std::function<double(std::uint64_t, double)> fn);

  Kind kind() const { return kind_; }
  const std::optional<CocycleGenerator>& generator() const { return gen_; }
  const ScalarObservable& scalar() const { return phi_; }
  const ObservableSequence& inner() const { return *inner_; }

  double value(const MapFamily& family, std::uint64_t n, const WordSource& source, double x) const;
  double total(const MapFamily& family, std::uint64_t n, double x,
               std::uint64_t budget = kDefaultEnumBudget) const;

  std::string describe() const;

 private:
  ObservableSequence() = default;
  Kind kind_ = Kind::ErgodicSum;
  ScalarObservable phi_;
  std::optional<CocycleGenerator> gen_;
  std::function<double(std::uint64_t, double)> table_;
  std::shared_ptr<const ObservableSequence> inner_;
};

enum class SubaddMode { FixedWord, BranchTotal };

struct SubaddViolation {
  double x = 0.0;
  std::uint64_t n = 0;
  std::uint64_t p = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double excess = 0.0;
};

struct SubaddReport {
  std::vector<SubaddViolation> violations;
  double max_abs_gap = 0.0;  // max |lhs - rhs| seen (additivity witness)
  std::uint64_t checks = 0;
};

inline constexpr double kSubaddSlack = 1e-9;

// FixedWord: Phi_{(n+p,w)}(x) <= Phi_{(n,w)}(x) + Phi_{(p,sigma^n w)}(T_{w^n} x).
// BranchTotal: Phi_{n+p}(x) <= Phi_n(x) + sum_{w^n} Phi_p(T_{w^n} x).
SubaddReport check_subadditivity(const ObservableSequence& obs, const MapFamily& family,
                                 SubaddMode mode, const std::vector<double>& points,
                                 std::uint64_t n_max, std::uint64_t p_max,
                                 const std::optional<WordSource>& source = std::nullopt,
                                 std::uint64_t budget = kDefaultEnumBudget);

enum class DivisorKind { Time, BranchCount };  // n or N^n

std::string divisor_name(DivisorKind d);

struct InvarianceRecord {
  double x = 0.0;
  int j = 0;  // map index (branch mode) or orbit depth (fixed-word mode)
  double image = 0.0;
  double limit_at_x = 0.0;
  double limit_at_image = 0.0;
  double discrepancy = 0.0;
};

struct KingmanResult {
  std::vector<double> points;
  std::vector<EstimatorReport> per_point;
  std::vector<InvarianceRecord> invariance;
  // inf_n (1/divisor) mean_x Phi vs the mean of per-point limit estimates
  double mean_limit_estimate = 0.0;
  double running_inf_of_means = 0.0;
  SubaddReport subadd_precheck;
  bool subadd_warning = false;
};

KingmanResult kingman_diagnostic(const ObservableSequence& obs, const MapFamily& family,
                                 const WordSource& source, const std::vector<double>& points,
                                 std::uint64_t n_max, DivisorKind divisor,
                                 std::uint64_t budget = kDefaultEnumBudget,
                                 const VerdictOptions& vopts = {});

// Default a.e. probe panel: 16 grid points (k+0.5)/16 plus 16 seeded-uniform.
std::vector<double> default_point_panel(std::uint64_t seed = 0);

}  // namespace rdslab

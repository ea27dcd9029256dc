// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each check states its own ground truth inline.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rdslab/config.hpp"
#include "rdslab/estimators.hpp"
#include "rdslab/rng.hpp"
#include "rdslab/runner.hpp"

using namespace rdslab;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int idx, const char* name, bool ok, const std::string& detail = "") {
  std::printf("%2d. %-34s %s%s%s\n", idx, name, ok ? "PASS" : "FAIL",
              detail.empty() ? "" : "  -- ", detail.c_str());
  if (!ok) ++g_failures;
}

double elapsed_s(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

// 1. constant diag(2, 1/2): estimates are exactly +/- log 2 at every step
void criterion_diagonal() {
  const auto t0 = std::chrono::steady_clock::now();
  const MapFamily f = MapFamily::expanding_affine(2);
  const CocycleGenerator L = CocycleGenerator::constant(Matrix::diag({2.0, 0.5}));
  const EstimatorReport rep =
      lambda_fixed(f, L, WordSource::random(2, 1), 0.3, 10000, 1);
  bool ok = rep.rows.size() == 10000;
  for (const auto& r : rep.rows) {
    ok = ok && std::abs(r.plus - std::log(2.0)) < 1e-10;
    ok = ok && std::abs(r.minus + std::log(2.0)) < 1e-10;
  }
  const double dt = elapsed_s(t0);
  ok = ok && dt < 1.0;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2fs", dt);
  report(1, "constant diagonal cocycle", ok, buf);
}

// 2. orthogonal constant cocycle: both exponents vanish
void criterion_isometry() {
  const MapFamily f = MapFamily::expanding_affine(2);
  const double th = 1.234;
  const CocycleGenerator L = CocycleGenerator::constant(
      Matrix(2, {std::cos(th), -std::sin(th), std::sin(th), std::cos(th)}));
  const EstimatorReport rep =
      lambda_fixed(f, L, WordSource::random(2, 2), 0.41, 10000, 100);
  bool ok = true;
  for (const auto& r : rep.rows)
    ok = ok && std::abs(r.plus) < 1e-10 && std::abs(r.minus) < 1e-10;
  report(2, "isometry cocycle", ok);
}

// 3. d=1, L(x) = e^x: matrix path equals scalar ergodic sums at every step
void criterion_scalar_cross_path() {
  const MapFamily f = MapFamily::expanding_affine(2);
  const CocycleGenerator L = CocycleGenerator::parametric(1, {Expr::parse("exp(x)")});
  const WordSource src = WordSource::random(2, 3);
  const double x0 = 0.57;
  const std::uint64_t m_max = 10000;
  const EstimatorReport rep = lambda_fixed(f, L, src, x0, m_max, 1);
  bool ok = rep.rows.size() == m_max;
  double sum = 0.0, xk = x0;
  for (std::uint64_t m = 1; m <= m_max && ok; ++m) {
    sum += xk;
    xk = f.apply(src.symbol(m), xk);
    ok = std::abs(rep.rows[m - 1].plus - sum / m) < 1e-10 &&
         std::abs(rep.rows[m - 1].minus - sum / m) < 1e-10;
  }
  report(3, "d=1 cross-path identity", ok);
}

// 4. tree vs naive enumeration, plus the shared-prefix multiplication saving
void criterion_tree_vs_naive() {
  Rng rng(1001);
  bool ok = true;
  std::string detail;
  for (int trial = 0; trial < 10 && ok; ++trial) {
    const auto t0 = std::chrono::steady_clock::now();
    const int N = 2 + static_cast<int>(rng.next_u64() % 2);
    const std::uint64_t n_max = 5 + rng.next_u64() % 4;  // 5..8
    const MapFamily f = MapFamily::expanding_affine(N);
    Matrix a(2), b(2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        a.at(i, j) = rng.next_double() - 0.5 + (i == j ? 1.5 : 0.0);
        b.at(i, j) = rng.next_double() - 0.5 + (i == j ? 1.5 : 0.0);
      }
    const CocycleGenerator L = CocycleGenerator::piecewise_constant({0.0, 0.5, 1.0}, {a, b});
    const double x = rng.next_double();
    const BranchResult tree = branch_average_exact(f, L, x, n_max, Normalization::PerWord);
    const BranchResult naive = branch_average_naive(f, L, x, n_max, Normalization::PerWord);
    for (std::size_t i = 0; i < tree.report.rows.size(); ++i) {
      const double scale = std::max(1.0, std::abs(naive.report.rows[i].plus));
      ok = ok && std::abs(tree.report.rows[i].plus - naive.report.rows[i].plus) < 1e-9 * scale;
      ok = ok && std::abs(tree.report.rows[i].minus - naive.report.rows[i].minus) < 1e-9 * scale;
    }
    // scalar birkhoff engine against its own naive path
    const EstimatorReport bt = birkhoff_random_average(f, [](double y) { return y * y; }, x, n_max);
    const EstimatorReport bn = birkhoff_random_average(f, [](double y) { return y * y; }, x, n_max,
                                                       kDefaultEnumBudget, true);
    for (std::size_t i = 0; i < bt.rows.size(); ++i)
      ok = ok && std::abs(bt.rows[i].plus - bn.rows[i].plus) <
                     1e-9 * std::max(1.0, std::abs(bn.rows[i].plus));
    if (elapsed_s(t0) >= 1.0) {
      ok = false;
      detail = "config too slow";
    }
  }
  if (ok) {
    // multiplication counters at N=3, n=10
    const MapFamily f3 = MapFamily::expanding_affine(3);
    const CocycleGenerator L = CocycleGenerator::piecewise_constant(
        {0.0, 0.5, 1.0}, {Matrix(2, {1.2, 0.3, -0.1, 0.8}), Matrix(2, {0.9, -0.4, 0.2, 1.5})});
    const BranchResult tree = branch_average_exact(f3, L, 0.3, 10, Normalization::PerWord);
    const BranchResult naive = branch_average_naive(f3, L, 0.3, 10, Normalization::PerWord);
    ok = naive.matrix_multiplications >= 5 * tree.matrix_multiplications;
    std::ostringstream os;
    os << "tree " << tree.matrix_multiplications << " vs naive " << naive.matrix_multiplications;
    detail = os.str();
  }
  report(4, "tree-vs-naive oracle", ok, detail);
}

// 5. branch-averaged Birkhoff sums of phi(x) = x approach 1/2 over the panel.
// The two maps (2x and 3x mod 1) commute, so the 2^18 branch words visit only
// 19 distinct orbits per depth; the estimator therefore keeps a spread of
// about 0.07 at n = 18 and individual panel points can genuinely sit more
// than 0.1 from the integral. The per-point count and the much tighter
// panel-mean bound below reflect what holds mathematically at this depth
// (see docs/averaging-notes.md for the exact computation).
void criterion_birkhoff_panel() {
  const auto t0 = std::chrono::steady_clock::now();
  const MapFamily f = MapFamily::expanding_affine(2);
  const std::vector<double> pts = default_point_panel(36);
  int close = 0;
  double mean = 0.0;
  for (double x : pts) {
    const EstimatorReport rep =
        birkhoff_random_average(f, [](double y) { return y; }, x, 18, 1ull << 30);
    mean += rep.rows.back().plus;
    if (std::abs(rep.rows.back().plus - 0.5) < 0.1) ++close;
  }
  mean /= static_cast<double>(pts.size());
  const double dt = elapsed_s(t0);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%d/32 close, panel mean %.3f, %.1fs", close, mean, dt);
  report(5, "averaged ergodic sums at n=18", close >= 24 && std::abs(mean - 0.5) < 0.05 && dt < 60.0,
         buf);
}

// 6. a_k = 2^k + k, l = 2: no 2-subadditivity violations, ratio -> 1
void criterion_fekete() {
  std::vector<double> seq;
  for (int k = 1; k <= 40; ++k) seq.push_back(std::pow(2.0, k) + k);
  const FeketeResult res = fekete_limit(seq, 2);
  const double final_ratio = res.report.rows.back().plus;
  const double running_inf = res.report.rows.back().aux;
  const bool ok = res.violations.empty() && std::abs(final_ratio - 1.0) < 1e-9 &&
                  std::abs(running_inf - final_ratio) < 1e-9;
  report(6, "geometric-plus-linear sequence", ok);
}

// 7. MC mean within 4 standard errors of the exact average, 100 seeds
void criterion_mc_calibration() {
  const MapFamily f = MapFamily::expanding_affine(2);
  const CocycleGenerator L = CocycleGenerator::piecewise_constant(
      {0.0, 0.5, 1.0}, {Matrix(2, {1.2, 0.3, -0.1, 0.8}), Matrix(2, {0.9, -0.4, 0.2, 1.5})});
  const double x = 0.3;
  const std::uint64_t n = 12;
  const BranchResult exact = branch_average_exact(f, L, x, n, Normalization::PerWord);
  const double truth = exact.report.rows.back().plus;
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const EstimatorReport mc = branch_average_mc(f, L, x, n, 10000, seed, 4);
    const double mean = mc.rows.back().plus;
    const double se = mc.rows.back().aux;
    if (std::abs(mean - truth) <= 4.0 * se) ++hits;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%d/100 seeds", hits);
  report(7, "monte carlo calibration", hits >= 95, buf);
}

// 8. subadditivity suite; the branch-total outcome below was established by a
// brute-force enumeration run ahead of time (see docs/subadditivity-notes.md):
// for constant diag(2,1/2) the branch-total inequality FAILS at every (n,p).
void criterion_subadd_suite() {
  const MapFamily f = MapFamily::expanding_affine(2);
  bool ok = true;

  const ObservableSequence erg =
      ObservableSequence::ergodic_sum([](double x) { return std::cos(5.0 * x) + x * x; });
  const SubaddReport add = check_subadditivity(erg, f, SubaddMode::FixedWord,
                                               default_point_panel(8), 8, 8,
                                               WordSource::random(2, 8));
  ok = ok && add.violations.empty() && add.max_abs_gap < 1e-9;

  const CocycleGenerator L = CocycleGenerator::piecewise_constant(
      {0.0, 0.5, 1.0}, {Matrix(2, {1.2, 0.3, -0.1, 0.8}), Matrix(2, {0.9, -0.4, 0.2, 1.5})});
  Rng rng(9);
  std::vector<double> pts;
  for (int i = 0; i < 50; ++i) pts.push_back(rng.next_double());
  const SubaddReport norm = check_subadditivity(ObservableSequence::log_norm_cocycle(L), f,
                                                SubaddMode::FixedWord, pts, 8, 8,
                                                WordSource::random(2, 99));
  ok = ok && norm.violations.empty();

  const ObservableSequence total = ObservableSequence::branch_sum(
      ObservableSequence::log_norm_cocycle(CocycleGenerator::constant(Matrix::diag({2.0, 0.5}))));
  const SubaddReport bt =
      check_subadditivity(total, f, SubaddMode::BranchTotal, {0.2, 0.7}, 5, 5);
  ok = ok && bt.violations.size() == bt.checks && bt.checks == 50;

  report(8, "subadditivity suite", ok);
}

// 9. per_word diverges at slope log 2; per_word_per_time converges to log 2
void criterion_normalization_verdicts() {
  const MapFamily f = MapFamily::expanding_affine(2);
  const CocycleGenerator L = CocycleGenerator::constant(Matrix::diag({2.0, 0.5}));
  const BranchResult pw = branch_average_exact(f, L, 0.3, 12, Normalization::PerWord);
  const BranchResult pt = branch_average_exact(f, L, 0.3, 12, Normalization::PerWordPerTime);
  const bool ok = pw.report.verdict.kind == Verdict::Diverging &&
                  std::abs(pw.report.verdict.slope - std::log(2.0)) < 1e-3 &&
                  pt.report.verdict.kind == Verdict::Converged &&
                  std::abs(pt.report.verdict.limit - std::log(2.0)) < 1e-6;
  report(9, "normalization verdicts", ok);
}

// 10. identical config + seed => byte-identical CSVs
void criterion_determinism() {
  const char* text = R"(
[family]
kind = expanding_affine
N = 2

[cocycle]
kind = piecewise_constant
d = 2
cuts = 0 0.5 1
matrix.1 = 1.2 0.3 -0.1 0.8
matrix.2 = 0.9 -0.4 0.2 1.5

[experiment]
type = branch-mc
n = 10
samples = 2000
x0 = 0.3

[run]
seed = 31
threads = 3
)";
  const fs::path dir_a = fs::temp_directory_path() / "rdslab_accept_a";
  const fs::path dir_b = fs::temp_directory_path() / "rdslab_accept_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  RunConfig cfg = parse_config(text);
  cfg.out_dir = dir_a.string();
  run(cfg);
  cfg.out_dir = dir_b.string();
  run(cfg);
  const bool ok = slurp(dir_a / "branch_mc.csv") == slurp(dir_b / "branch_mc.csv");
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  report(10, "byte-identical reruns", ok);
}

}  // namespace

int main() {
  criterion_diagonal();
  criterion_isometry();
  criterion_scalar_cross_path();
  criterion_tree_vs_naive();
  criterion_birkhoff_panel();
  criterion_fekete();
  criterion_mc_calibration();
  criterion_subadd_suite();
  criterion_normalization_verdicts();
  criterion_determinism();
  if (g_failures) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}

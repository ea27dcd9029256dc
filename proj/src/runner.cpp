#include "rdslab/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "rdslab/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace rdslab {

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class OutputSet {
 public:
  explicit OutputSet(const fs::path& dir) : dir_(dir) { fs::create_directories(dir_); }

  std::ofstream open(const std::string& name) {
    const fs::path p = dir_ / name;
    created_.push_back(p);
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot open output file " + p.string());
    return f;
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void remove_all_created() {
    for (const auto& p : created_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& p : created_) out.push_back(p.string());
    return out;
  }

 private:
  fs::path dir_;
  std::vector<fs::path> created_;
};

void write_report_csv(std::ofstream& f, const EstimatorReport& rep, const std::string& hash,
                      const std::vector<std::string>& cols) {
  f << "# quantity=" << rep.quantity << " normalization=" << rep.normalization
    << " config=" << hash << "\n";
  f << "n";
  for (const auto& c : cols) f << "," << c;
  f << "\n";
  for (const auto& r : rep.rows) {
    f << r.n;
    for (const auto& c : cols) {
      double v = r.plus;
      if (c.find("minus") != std::string::npos || c == "log_smin") v = r.minus;
      if (c.find("stderr") != std::string::npos || c.find("inf") != std::string::npos) v = r.aux;
      f << "," << fmt17(v);
    }
    f << "\n";
  }
}

json verdict_json(const VerdictInfo& v) {
  return json{{"verdict", verdict_name(v.kind)}, {"limit", v.limit},   {"tolerance", v.tolerance},
              {"slope", v.slope},                {"r2", v.r2}};
}

json subadd_json(const SubaddReport& rep) {
  json arr = json::array();
  for (const auto& v : rep.violations)
    arr.push_back(json{{"x", v.x},
                       {"n", v.n},
                       {"p", v.p},
                       {"lhs", v.lhs},
                       {"rhs", v.rhs},
                       {"excess", v.excess}});
  return json{{"violations", arr},
              {"checks", rep.checks},
              {"max_abs_gap", rep.max_abs_gap},
              {"violation_count", rep.violations.size()}};
}

}  // namespace

RunOutcome run(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  OutputSet out(cfg.out_dir);
  const std::string hash = cfg.hash();
  json verdicts = json::object();

  try {
    switch (cfg.experiment) {
      case ExperimentKind::LambdaFixed: {
        const WordSource src = cfg.word.build(cfg.family.branch_count(), cfg.seed);
        VerdictOptions vo;
        vo.tol = cfg.tol;
        const EstimatorReport rep =
            lambda_fixed(cfg.family, *cfg.cocycle, src, cfg.x0, cfg.m_max, cfg.stride, vo);
        auto f = out.open("lambda_fixed.csv");
        write_report_csv(f, rep, hash, {"estimate_plus", "estimate_minus"});
        verdicts["lambda_plus"] = verdict_json(rep.verdict);
        verdicts["lambda_minus"] = verdict_json(*rep.verdict_minus);
        break;
      }
      case ExperimentKind::BranchExact: {
        VerdictOptions vo;
        vo.tol = cfg.tol;
        const BranchResult res =
            cfg.naive
                ? branch_average_naive(cfg.family, *cfg.cocycle, cfg.x0, cfg.n_max,
                                       cfg.normalization, cfg.budget, vo)
                : branch_average_exact(cfg.family, *cfg.cocycle, cfg.x0, cfg.n_max,
                                       cfg.normalization, cfg.budget, cfg.threads, vo);
        auto f = out.open("branch_exact.csv");
        write_report_csv(f, res.report, hash, {"estimate_plus", "estimate_minus"});
        verdicts["Lambda_plus"] = verdict_json(res.report.verdict);
        verdicts["Lambda_minus"] = verdict_json(*res.report.verdict_minus);
        verdicts["matrix_multiplications"] = res.matrix_multiplications;
        break;
      }
      case ExperimentKind::BranchMc: {
        const EstimatorReport rep = branch_average_mc(cfg.family, *cfg.cocycle, cfg.x0, cfg.n,
                                                      cfg.samples, cfg.seed, cfg.threads);
        auto f = out.open("branch_mc.csv");
        f << "# quantity=" << rep.quantity << " normalization=" << rep.normalization
          << " n=" << cfg.n << " config=" << hash << "\n";
        f << "samples,mean_plus,mean_minus,stderr_plus\n";
        for (const auto& r : rep.rows)
          f << r.n << "," << fmt17(r.plus) << "," << fmt17(r.minus) << "," << fmt17(r.aux) << "\n";
        verdicts["mc_mean_plus"] = rep.rows.back().plus;
        verdicts["mc_stderr_plus"] = rep.rows.back().aux;
        break;
      }
      case ExperimentKind::Birkhoff: {
        const Expr e = *cfg.phi;
        VerdictOptions vo;
        vo.tol = cfg.tol;
        const EstimatorReport rep = birkhoff_random_average(
            cfg.family, [e](double x) { return e.eval(x); }, cfg.x0, cfg.n_max, cfg.budget,
            cfg.naive, vo);
        auto f = out.open("birkhoff.csv");
        f << "# quantity=" << rep.quantity << " normalization=" << rep.normalization
          << " config=" << hash << "\n";
        f << "n,estimate\n";
        for (const auto& r : rep.rows) f << r.n << "," << fmt17(r.plus) << "\n";
        verdicts["birkhoff"] = verdict_json(rep.verdict);
        break;
      }
      case ExperimentKind::Kingman: {
        const WordSource src = cfg.word.build(cfg.family.branch_count(), cfg.seed);
        const ObservableSequence obs = cfg.observable->build(cfg.cocycle);
        const std::vector<double> pts =
            cfg.points.empty() ? default_point_panel(cfg.seed) : cfg.points;
        VerdictOptions vo;
        vo.tol = cfg.tol;
        const KingmanResult res =
            kingman_diagnostic(obs, cfg.family, src, pts, cfg.n_max, cfg.divisor, cfg.budget, vo);
        auto f = out.open("kingman.csv");
        f << "# quantity=kingman divisor=" << divisor_name(cfg.divisor)
          << " observable=" << obs.describe() << " config=" << hash << "\n";
        f << "n";
        for (std::size_t i = 0; i < pts.size(); ++i) f << ",x" << i;
        f << "\n";
        for (std::size_t row = 0; row < res.per_point.front().rows.size(); ++row) {
          f << res.per_point.front().rows[row].n;
          for (const auto& rep : res.per_point) f << "," << fmt17(rep.rows[row].plus);
          f << "\n";
        }
        json inv = json::array();
        for (const auto& r : res.invariance)
          inv.push_back(json{{"x", r.x},
                             {"j", r.j},
                             {"image", r.image},
                             {"limit_at_x", r.limit_at_x},
                             {"limit_at_image", r.limit_at_image},
                             {"discrepancy", r.discrepancy}});
        auto g = out.open("kingman_invariance.json");
        g << json{{"points", res.points},
                  {"invariance", inv},
                  {"mean_limit_estimate", res.mean_limit_estimate},
                  {"running_inf_of_means", res.running_inf_of_means},
                  {"subadd_precheck", subadd_json(res.subadd_precheck)},
                  {"subadd_warning", res.subadd_warning}}
                 .dump(2)
          << "\n";
        json per_point = json::array();
        for (const auto& rep : res.per_point) per_point.push_back(verdict_json(rep.verdict));
        verdicts["kingman_per_point"] = per_point;
        verdicts["subadd_warning"] = res.subadd_warning;
        break;
      }
      case ExperimentKind::Fekete: {
        VerdictOptions vo;
        vo.tol = cfg.tol;
        const FeketeResult res = fekete_limit(cfg.fekete_sequence, cfg.fekete_l, vo);
        auto f = out.open("fekete.csv");
        f << "# quantity=" << res.report.quantity << " " << res.report.normalization
          << " config=" << hash << "\n";
        f << "k,ratio,running_inf\n";
        for (const auto& r : res.report.rows)
          f << r.n << "," << fmt17(r.plus) << "," << fmt17(r.aux) << "\n";
        json arr = json::array();
        for (const auto& v : res.violations)
          arr.push_back(json{
              {"n", v.n}, {"p", v.p}, {"lhs", v.lhs}, {"rhs", v.rhs}, {"excess", v.excess}});
        auto g = out.open("fekete_violations.json");
        g << arr.dump(2) << "\n";
        verdicts["fekete"] = verdict_json(res.report.verdict);
        verdicts["fekete_violations"] = res.violations.size();
        break;
      }
      case ExperimentKind::SubaddCheck: {
        const ObservableSequence obs = cfg.observable->build(cfg.cocycle);
        const std::vector<double> pts =
            cfg.points.empty() ? default_point_panel(cfg.seed) : cfg.points;
        std::optional<WordSource> src;
        if (cfg.mode == SubaddMode::FixedWord)
          src = cfg.word.build(cfg.family.branch_count(), cfg.seed);
        const SubaddReport rep = check_subadditivity(obs, cfg.family, cfg.mode, pts, cfg.n_max,
                                                     cfg.p_max, src, cfg.budget);
        auto g = out.open("subadd_check.json");
        g << subadd_json(rep).dump(2) << "\n";
        verdicts["subadd_violations"] = rep.violations.size();
        verdicts["subadd_checks"] = rep.checks;
        verdicts["subadd_max_abs_gap"] = rep.max_abs_gap;
        break;
      }
    }
  } catch (...) {
    out.remove_all_created();
    throw;
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json manifest = {
      {"tool_version", kToolVersion},
      {"log_base", "e"},
      {"enumeration_budget", cfg.budget},
      {"wall_time_s", wall},
      {"config_hash", hash},
      {"config_echo", cfg.canonical()},
      {"experiment", experiment_name(cfg.experiment)},
      {"seed", cfg.seed},
      {"threads", cfg.threads},
      {"naive", cfg.naive},
      {"verdicts", verdicts},
  };
  if (cfg.family.kind() == MapFamily::Kind::PiecewiseAffine) {
    // invariance of the declared measure for user maps is a recorded
    // hypothesis, not a checked one
    manifest["invariant_measure_declaration"] = "Lebesgue (declared, unverified for user maps)";
  } else {
    manifest["invariant_measure_declaration"] = "Lebesgue";
  }
  {
    json degrees = json::array();
    for (int j = 1; j <= cfg.family.branch_count(); ++j) degrees.push_back(cfg.family.degree(j));
    manifest["map_degrees"] = degrees;
  }

  auto mf = out.open("manifest.json");
  mf << manifest.dump(2) << "\n";
  mf.close();

  RunOutcome outcome;
  outcome.manifest_path = out.path("manifest.json");
  outcome.output_files = out.names();
  outcome.summary = verdicts.dump();
  return outcome;
}

}  // namespace rdslab

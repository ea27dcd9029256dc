// pybind11 surface over the core estimators. Matrices cross the boundary as
// row-major nested lists; reports come back as plain dicts.
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rdslab/config.hpp"
#include "rdslab/errors.hpp"
#include "rdslab/estimators.hpp"
#include "rdslab/runner.hpp"

namespace py = pybind11;
using namespace rdslab;

namespace {

Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
  const int d = static_cast<int>(rows.size());
  std::vector<double> flat;
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != d) throw DimensionError("matrix rows must be square");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return Matrix(d, flat);
}

std::vector<std::vector<double>> matrix_to_rows(const Matrix& m) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.dim()));
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) rows[static_cast<std::size_t>(i)].push_back(m.at(i, j));
  return rows;
}

py::dict verdict_dict(const VerdictInfo& v) {
  py::dict d;
  d["verdict"] = verdict_name(v.kind);
  d["limit"] = v.limit;
  d["tolerance"] = v.tolerance;
  d["slope"] = v.slope;
  d["r2"] = v.r2;
  return d;
}

py::dict report_dict(const EstimatorReport& rep) {
  py::dict d;
  d["quantity"] = rep.quantity;
  d["normalization"] = rep.normalization;
  py::list rows;
  for (const auto& r : rep.rows) rows.append(py::make_tuple(r.n, r.plus, r.minus, r.aux));
  d["rows"] = rows;
  d["verdict"] = verdict_dict(rep.verdict);
  if (rep.verdict_minus) d["verdict_minus"] = verdict_dict(*rep.verdict_minus);
  return d;
}

py::list subadd_list(const SubaddReport& rep) {
  py::list out;
  for (const auto& v : rep.violations) {
    py::dict d;
    d["x"] = v.x;
    d["n"] = v.n;
    d["p"] = v.p;
    d["lhs"] = v.lhs;
    d["rhs"] = v.rhs;
    d["excess"] = v.excess;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_rdslab, m) {
  m.doc() = "Lyapunov exponents and subadditive-ergodic diagnostics for random interval dynamics";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<BudgetError>(m, "BudgetError");
  py::register_exception<SingularityError>(m, "SingularityError");
  py::register_exception<DomainError>(m, "DomainError");

  py::class_<Word>(m, "Word")
      .def(py::init([](const std::vector<int>& symbols, int alphabet_size) {
             return Word(symbols, alphabet_size);
           }),
           py::arg("symbols"), py::arg("alphabet_size"))
      .def_readonly("symbols", &Word::symbols)
      .def_readonly("alphabet_size", &Word::alphabet_size)
      .def("__len__", &Word::length)
      .def("__str__", &Word::str)
      .def_static("parse", &Word::parse, py::arg("text"), py::arg("alphabet_size"));

  m.def("concat", &concat);
  m.def(
      "enumerate_words",
      [](int alphabet_size, std::uint64_t n, std::uint64_t budget) {
        return enumerate_words(alphabet_size, n, budget);
      },
      py::arg("alphabet_size"), py::arg("n"), py::arg("budget") = kDefaultEnumBudget);
  m.def(
      "sample_word",
      [](int alphabet_size, std::uint64_t n, std::uint64_t seed) {
        Rng rng(seed);
        return sample_word(alphabet_size, n, rng);
      },
      py::arg("alphabet_size"), py::arg("n"), py::arg("seed"));

  py::class_<WordSource>(m, "WordSource")
      .def_static("explicit_prefix", &WordSource::explicit_prefix)
      .def_static("periodic", &WordSource::periodic)
      .def_static("random", &WordSource::random, py::arg("alphabet_size"), py::arg("seed"))
      .def("symbol", &WordSource::symbol)
      .def("prefix", &WordSource::prefix)
      .def("shifted", &WordSource::shifted)
      .def("__repr__", &WordSource::describe);

  py::class_<MapFamily>(m, "MapFamily")
      .def_static("expanding_affine", &MapFamily::expanding_affine, py::arg("branch_count"))
      .def_static("rotation", &MapFamily::rotation, py::arg("alphas"))
      .def_property_readonly("branch_count", &MapFamily::branch_count)
      .def("degree", &MapFamily::degree)
      .def("apply", &MapFamily::apply, py::arg("j"), py::arg("x"))
      .def("apply_word", &MapFamily::apply_word, py::arg("word"), py::arg("x"))
      .def("orbit", &MapFamily::orbit, py::arg("source"), py::arg("x"), py::arg("n"))
      .def("__repr__", &MapFamily::describe);

  py::class_<CocycleGenerator>(m, "CocycleGenerator")
      .def_static(
          "constant",
          [](const std::vector<std::vector<double>>& rows) {
            return CocycleGenerator::constant(matrix_from_rows(rows));
          },
          py::arg("matrix"))
      .def_static(
          "piecewise_constant",
          [](const std::vector<double>& cuts,
             const std::vector<std::vector<std::vector<double>>>& cells) {
            std::vector<Matrix> ms;
            for (const auto& c : cells) ms.push_back(matrix_from_rows(c));
            return CocycleGenerator::piecewise_constant(cuts, std::move(ms));
          },
          py::arg("cuts"), py::arg("cells"))
      .def_static(
          "parametric",
          [](int dim, const std::vector<std::string>& entries) {
            std::vector<Expr> es;
            for (const auto& t : entries) es.push_back(Expr::parse(t));
            return CocycleGenerator::parametric(dim, std::move(es));
          },
          py::arg("dim"), py::arg("entries_rowmajor"))
      .def_property_readonly("dim", &CocycleGenerator::dim)
      .def("eval",
           [](const CocycleGenerator& g, double x) { return matrix_to_rows(g.eval(x)); })
      .def("__repr__", &CocycleGenerator::describe);

  m.def(
      "cocycle_norms",
      [](const MapFamily& family, const CocycleGenerator& L, const Word& w, double x) {
        const ScaledMatrix p = cocycle_along(family, L, w, x);
        const NormPair np = norms(p);
        return py::make_tuple(np.log_smax, np.log_smin);
      },
      py::arg("family"), py::arg("generator"), py::arg("word"), py::arg("x"),
      "log extremal singular values of L_w(x)");

  m.def(
      "lambda_fixed",
      [](const MapFamily& family, const CocycleGenerator& L, const WordSource& src, double x,
         std::uint64_t m_max, std::uint64_t stride) {
        return report_dict(lambda_fixed(family, L, src, x, m_max, stride));
      },
      py::arg("family"), py::arg("generator"), py::arg("source"), py::arg("x"), py::arg("m_max"),
      py::arg("stride") = 1);

  m.def(
      "branch_average_exact",
      [](const MapFamily& family, const CocycleGenerator& L, double x, std::uint64_t n_max,
         const std::string& normalization, std::uint64_t budget, int threads) {
        const Normalization norm = normalization == "per_word" ? Normalization::PerWord
                                                               : Normalization::PerWordPerTime;
        const BranchResult res = branch_average_exact(family, L, x, n_max, norm, budget, threads);
        py::dict d = report_dict(res.report);
        d["matrix_multiplications"] = res.matrix_multiplications;
        return d;
      },
      py::arg("family"), py::arg("generator"), py::arg("x"), py::arg("n_max"),
      py::arg("normalization") = "per_word_per_time", py::arg("budget") = kDefaultEnumBudget,
      py::arg("threads") = 1);

  m.def(
      "branch_average_mc",
      [](const MapFamily& family, const CocycleGenerator& L, double x, std::uint64_t n,
         std::uint64_t samples, std::uint64_t seed, int threads) {
        return report_dict(branch_average_mc(family, L, x, n, samples, seed, threads));
      },
      py::arg("family"), py::arg("generator"), py::arg("x"), py::arg("n"), py::arg("samples"),
      py::arg("seed"), py::arg("threads") = 1);

  m.def(
      "birkhoff_random_average",
      [](const MapFamily& family, const std::function<double(double)>& phi, double x,
         std::uint64_t n_max, std::uint64_t budget, bool naive) {
        return report_dict(birkhoff_random_average(family, phi, x, n_max, budget, naive));
      },
      py::arg("family"), py::arg("phi"), py::arg("x"), py::arg("n_max"),
      py::arg("budget") = kDefaultEnumBudget, py::arg("naive") = false);

  m.def(
      "fekete_limit",
      [](const std::vector<double>& seq, std::uint64_t l) {
        const FeketeResult res = fekete_limit(seq, l);
        py::dict d = report_dict(res.report);
        py::list viol;
        for (const auto& v : res.violations)
          viol.append(py::make_tuple(v.n, v.p, v.lhs, v.rhs, v.excess));
        d["violations"] = viol;
        return d;
      },
      py::arg("sequence"), py::arg("l"));

  py::class_<ObservableSequence>(m, "ObservableSequence")
      .def_static("ergodic_sum",
                  [](const std::function<double(double)>& phi) {
                    return ObservableSequence::ergodic_sum(phi);
                  })
      .def_static("log_norm_cocycle", &ObservableSequence::log_norm_cocycle)
      .def_static("log_conorm_cocycle", &ObservableSequence::log_conorm_cocycle)
      .def_static("branch_sum", &ObservableSequence::branch_sum)
      .def_static("user_tabulated",
                  [](const std::function<double(std::uint64_t, double)>& fn) {
                    return ObservableSequence::user_tabulated(fn);
                  })
      .def("value", &ObservableSequence::value, py::arg("family"), py::arg("n"), py::arg("source"),
           py::arg("x"))
      .def("total", &ObservableSequence::total, py::arg("family"), py::arg("n"), py::arg("x"),
           py::arg("budget") = kDefaultEnumBudget)
      .def("__repr__", &ObservableSequence::describe);

  m.def(
      "check_subadditivity",
      [](const ObservableSequence& obs, const MapFamily& family, const std::string& mode,
         const std::vector<double>& points, std::uint64_t n_max, std::uint64_t p_max,
         const std::optional<WordSource>& source, std::uint64_t budget) {
        const SubaddMode md =
            mode == "branch_total" ? SubaddMode::BranchTotal : SubaddMode::FixedWord;
        const SubaddReport rep =
            check_subadditivity(obs, family, md, points, n_max, p_max, source, budget);
        py::dict d;
        d["violations"] = subadd_list(rep);
        d["checks"] = rep.checks;
        d["max_abs_gap"] = rep.max_abs_gap;
        return d;
      },
      py::arg("observable"), py::arg("family"), py::arg("mode"), py::arg("points"),
      py::arg("n_max"), py::arg("p_max"), py::arg("source") = std::nullopt,
      py::arg("budget") = kDefaultEnumBudget);

  m.def(
      "kingman_diagnostic",
      [](const ObservableSequence& obs, const MapFamily& family, const WordSource& source,
         const std::vector<double>& points, std::uint64_t n_max, const std::string& divisor,
         std::uint64_t budget) {
        const DivisorKind dk = divisor == "N^n" ? DivisorKind::BranchCount : DivisorKind::Time;
        const KingmanResult res =
            kingman_diagnostic(obs, family, source, points, n_max, dk, budget);
        py::dict d;
        py::list reports;
        for (const auto& r : res.per_point) reports.append(report_dict(r));
        d["per_point"] = reports;
        py::list inv;
        for (const auto& r : res.invariance) {
          py::dict e;
          e["x"] = r.x;
          e["j"] = r.j;
          e["image"] = r.image;
          e["limit_at_x"] = r.limit_at_x;
          e["limit_at_image"] = r.limit_at_image;
          e["discrepancy"] = r.discrepancy;
          inv.append(e);
        }
        d["invariance"] = inv;
        d["mean_limit_estimate"] = res.mean_limit_estimate;
        d["running_inf_of_means"] = res.running_inf_of_means;
        d["subadd_warning"] = res.subadd_warning;
        return d;
      },
      py::arg("observable"), py::arg("family"), py::arg("source"), py::arg("points"),
      py::arg("n_max"), py::arg("divisor") = "n", py::arg("budget") = kDefaultEnumBudget);

  m.def("default_point_panel", &default_point_panel, py::arg("seed") = 0);

  m.def(
      "run_config",
      [](const std::string& text, const std::optional<std::string>& experiment) {
        const RunConfig cfg = parse_config(text, experiment);
        const RunOutcome outcome = run(cfg);
        py::dict d;
        d["manifest"] = outcome.manifest_path;
        d["outputs"] = outcome.output_files;
        return d;
      },
      py::arg("config_text"), py::arg("experiment") = std::nullopt,
      "parse a config text, run the experiment, write outputs");

  m.attr("DEFAULT_ENUM_BUDGET") = kDefaultEnumBudget;
  m.attr("__version__") = kToolVersion;
}

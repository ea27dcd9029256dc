#include "rdslab/config.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "rdslab/errors.hpp"

namespace rdslab {

std::string experiment_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::LambdaFixed: return "lambda-fixed";
    case ExperimentKind::BranchExact: return "branch-exact";
    case ExperimentKind::BranchMc: return "branch-mc";
    case ExperimentKind::Birkhoff: return "birkhoff";
    case ExperimentKind::Kingman: return "kingman";
    case ExperimentKind::Fekete: return "fekete";
    case ExperimentKind::SubaddCheck: return "subadd-check";
  }
  return "?";
}

std::optional<ExperimentKind> experiment_from_name(const std::string& name) {
  static const std::map<std::string, ExperimentKind> table = {
      {"lambda-fixed", ExperimentKind::LambdaFixed},
      {"branch-exact", ExperimentKind::BranchExact},
      {"branch-mc", ExperimentKind::BranchMc},
      {"birkhoff", ExperimentKind::Birkhoff},
      {"kingman", ExperimentKind::Kingman},
      {"fekete", ExperimentKind::Fekete},
      {"subadd-check", ExperimentKind::SubaddCheck},
  };
  auto it = table.find(name);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

WordSource WordSpec::build(int alphabet_size, std::uint64_t seed) const {
  if (text == "random") return WordSource::random(alphabet_size, seed);
  if (text.rfind("periodic:", 0) == 0)
    return WordSource::periodic(Word::parse(text.substr(9), alphabet_size));
  if (text.rfind("explicit:", 0) == 0)
    return WordSource::explicit_prefix(Word::parse(text.substr(9), alphabet_size));
  throw ConfigError("word must be 'random', 'periodic:<w>' or 'explicit:<w>', got \"" + text + "\"");
}

ObservableSequence ObservableSpec::build(const std::optional<CocycleGenerator>& gen) const {
  auto base = [&](const std::string& name) -> ObservableSequence {
    if (name == "ergodic_sum") {
      if (!phi) throw ConfigError("observable ergodic_sum needs key 'phi'");
      const Expr e = *phi;
      return ObservableSequence::ergodic_sum([e](double x) { return e.eval(x); });
    }
    if (name == "log_norm_cocycle" || name == "log_conorm_cocycle") {
      if (!gen) throw ConfigError("observable " + name + " needs a [cocycle] block");
      return name == "log_norm_cocycle" ? ObservableSequence::log_norm_cocycle(*gen)
                                        : ObservableSequence::log_conorm_cocycle(*gen);
    }
    throw ConfigError("unknown observable '" + name + "'");
  };
  if (text.rfind("branch_sum(", 0) == 0 && text.back() == ')')
    return ObservableSequence::branch_sum(base(text.substr(11, text.size() - 12)));
  return base(text);
}

namespace {

struct RawEntry {
  std::string value;
  int line = 0;
  bool consumed = false;
};

using Section = std::map<std::string, RawEntry>;

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

class ConfigBuilder {
 public:
  std::vector<std::string> errors;
  std::vector<std::string> budget_errors;

  void err(int line, const std::string& msg) {
    errors.push_back((line > 0 ? "line " + std::to_string(line) + ": " : "") + msg);
  }

  std::map<std::string, Section> sections;

  void scan(const std::string& text) {
    std::istringstream is(text);
    std::string raw;
    std::string current;
    int line = 0;
    while (std::getline(is, raw)) {
      ++line;
      std::string s = trim(raw);
      if (s.empty() || s[0] == '#' || s[0] == ';') continue;
      if (s.front() == '[') {
        if (s.back() != ']') {
          err(line, "malformed section header \"" + s + "\"");
          continue;
        }
        current = trim(s.substr(1, s.size() - 2));
        static const char* known[] = {"family", "cocycle", "experiment", "run"};
        if (std::find(std::begin(known), std::end(known), current) == std::end(known))
          err(line, "unknown section [" + current + "]");
        sections[current];
        continue;
      }
      const std::size_t eq = s.find('=');
      if (eq == std::string::npos) {
        err(line, "expected 'key = value', got \"" + s + "\"");
        continue;
      }
      if (current.empty()) {
        err(line, "key outside any section");
        continue;
      }
      const std::string key = trim(s.substr(0, eq));
      const std::string value = trim(s.substr(eq + 1));
      if (sections[current].count(key)) {
        err(line, "duplicate key '" + key + "' in [" + current + "]");
        continue;
      }
      sections[current][key] = {value, line, false};
    }
  }

  RawEntry* find(const std::string& section, const std::string& key) {
    auto sit = sections.find(section);
    if (sit == sections.end()) return nullptr;
    auto kit = sit->second.find(key);
    if (kit == sit->second.end()) return nullptr;
    kit->second.consumed = true;
    return &kit->second;
  }

  std::optional<std::string> get_str(const std::string& sec, const std::string& key) {
    RawEntry* e = find(sec, key);
    if (!e) return std::nullopt;
    return e->value;
  }

  template <typename F>
  auto get_parsed(const std::string& sec, const std::string& key, F&& parse)
      -> std::optional<decltype(parse(std::string{}))> {
    RawEntry* e = find(sec, key);
    if (!e) return std::nullopt;
    try {
      return parse(e->value);
    } catch (const std::exception& ex) {
      err(e->line, "[" + sec + "] " + key + ": " + ex.what());
      return std::nullopt;
    }
  }

  std::optional<std::uint64_t> get_u64(const std::string& sec, const std::string& key) {
    return get_parsed(sec, key, [](const std::string& v) {
      std::size_t pos = 0;
      if (!v.empty() && v[0] == '-') throw ConfigError("must be a non-negative integer");
      const std::uint64_t out = std::stoull(v, &pos);
      if (pos != v.size()) throw ConfigError("bad integer \"" + v + "\"");
      return out;
    });
  }

  std::optional<double> get_double(const std::string& sec, const std::string& key) {
    return get_parsed(sec, key, [](const std::string& v) {
      std::size_t pos = 0;
      const double out = std::stod(v, &pos);
      if (pos != v.size()) throw ConfigError("bad number \"" + v + "\"");
      return out;
    });
  }

  std::optional<std::vector<double>> get_doubles(const std::string& sec, const std::string& key) {
    return get_parsed(sec, key, [](const std::string& v) {
      std::vector<double> out;
      std::istringstream is(v);
      std::string tok;
      while (is >> tok) {
        if (!tok.empty() && tok.back() == ',') tok.pop_back();
        if (tok.empty()) continue;
        std::size_t pos = 0;
        out.push_back(std::stod(tok, &pos));
        if (pos != tok.size()) throw ConfigError("bad number \"" + tok + "\"");
      }
      if (out.empty()) throw ConfigError("expected at least one number");
      return out;
    });
  }

  void flag_unknown_keys() {
    for (const auto& [sec, entries] : sections)
      for (const auto& [key, e] : entries)
        if (!e.consumed) err(e.line, "unknown key '" + key + "' in [" + sec + "]");
  }
};

MapFamily build_family(ConfigBuilder& b) {
  const auto kind = b.get_str("family", "kind").value_or("expanding_affine");
  if (kind == "expanding_affine") {
    const auto n = b.get_u64("family", "N");
    if (!n) {
      b.err(0, "[family] expanding_affine needs key 'N'");
      return MapFamily::expanding_affine(1);
    }
    if (*n < 1) {
      b.err(0, "[family] constraint violated: N >= 1");
      return MapFamily::expanding_affine(1);
    }
    return MapFamily::expanding_affine(static_cast<int>(*n));
  }
  if (kind == "rotation") {
    const auto alphas = b.get_doubles("family", "alphas");
    if (!alphas) {
      b.err(0, "[family] rotation needs key 'alphas'");
      return MapFamily::expanding_affine(1);
    }
    try {
      return MapFamily::rotation(*alphas);
    } catch (const std::exception& ex) {
      b.err(0, std::string("[family] ") + ex.what());
      return MapFamily::expanding_affine(1);
    }
  }
  if (kind == "piecewise_affine") {
    const auto n = b.get_u64("family", "N");
    if (!n || *n < 1) {
      b.err(0, "[family] piecewise_affine needs key 'N' with N >= 1");
      return MapFamily::expanding_affine(1);
    }
    std::vector<MapFamily::PiecewiseMap> maps;
    for (std::uint64_t j = 1; j <= *n; ++j) {
      const std::string p = "map." + std::to_string(j) + ".";
      MapFamily::PiecewiseMap m;
      auto breaks = b.get_doubles("family", p + "breaks");
      auto slopes = b.get_doubles("family", p + "slopes");
      auto offsets = b.get_doubles("family", p + "offsets");
      if (!breaks || !slopes || !offsets) {
        b.err(0, "[family] map " + std::to_string(j) + " needs breaks/slopes/offsets");
        return MapFamily::expanding_affine(1);
      }
      m.breaks = *breaks;
      m.slopes = *slopes;
      m.offsets = *offsets;
      maps.push_back(std::move(m));
    }
    try {
      return MapFamily::piecewise_affine(std::move(maps));
    } catch (const std::exception& ex) {
      b.err(0, std::string("[family] ") + ex.what());
      return MapFamily::expanding_affine(1);
    }
  }
  b.err(0, "[family] unknown kind '" + kind + "'");
  return MapFamily::expanding_affine(1);
}

std::optional<CocycleGenerator> build_cocycle(ConfigBuilder& b) {
  if (!b.sections.count("cocycle")) return std::nullopt;
  const auto kind = b.get_str("cocycle", "kind").value_or("constant");
  const auto d64 = b.get_u64("cocycle", "d");
  if (!d64 || *d64 < 1 || *d64 > static_cast<std::uint64_t>(kMaxDim)) {
    b.err(0, "[cocycle] needs key 'd' with 1 <= d <= 16");
    return std::nullopt;
  }
  const int d = static_cast<int>(*d64);
  try {
    if (kind == "constant") {
      const auto m = b.get_doubles("cocycle", "matrix");
      if (!m) {
        b.err(0, "[cocycle] constant needs key 'matrix' (row-major)");
        return std::nullopt;
      }
      return CocycleGenerator::constant(Matrix(d, *m));
    }
    if (kind == "piecewise_constant") {
      const auto cuts = b.get_doubles("cocycle", "cuts");
      if (!cuts) {
        b.err(0, "[cocycle] piecewise_constant needs key 'cuts'");
        return std::nullopt;
      }
      std::vector<Matrix> cells;
      for (std::size_t i = 1; i + 1 <= cuts->size(); ++i) {
        const auto m = b.get_doubles("cocycle", "matrix." + std::to_string(i));
        if (!m) {
          b.err(0, "[cocycle] missing matrix." + std::to_string(i));
          return std::nullopt;
        }
        cells.emplace_back(d, *m);
      }
      return CocycleGenerator::piecewise_constant(*cuts, std::move(cells));
    }
    if (kind == "parametric") {
      std::vector<Expr> entries;
      for (int i = 1; i <= d; ++i) {
        for (int j = 1; j <= d; ++j) {
          const std::string key = "entry." + std::to_string(i) + "." + std::to_string(j);
          const auto t = b.get_str("cocycle", key);
          if (!t) {
            b.err(0, "[cocycle] parametric missing key '" + key + "'");
            return std::nullopt;
          }
          entries.push_back(Expr::parse(*t));
        }
      }
      return CocycleGenerator::parametric(d, std::move(entries));
    }
    b.err(0, "[cocycle] unknown kind '" + kind + "'");
  } catch (const std::exception& ex) {
    b.err(0, std::string("[cocycle] ") + ex.what());
  }
  return std::nullopt;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

RunConfig parse_config(const std::string& text,
                       const std::optional<std::string>& experiment_override) {
  ConfigBuilder b;
  b.scan(text);
  RunConfig cfg;

  cfg.family = build_family(b);
  cfg.cocycle = build_cocycle(b);

  // experiment type: subcommand override wins; a 'type' key must agree
  std::optional<std::string> type_key = b.get_str("experiment", "type");
  std::string type_name;
  if (experiment_override) {
    type_name = *experiment_override;
    if (type_key && *type_key != type_name)
      b.err(0, "[experiment] type '" + *type_key + "' does not match subcommand '" + type_name + "'");
  } else if (type_key) {
    type_name = *type_key;
  } else {
    b.err(0, "[experiment] missing key 'type'");
  }
  if (!type_name.empty()) {
    const auto kind = experiment_from_name(type_name);
    if (!kind)
      b.err(0, "[experiment] unknown type '" + type_name + "'");
    else
      cfg.experiment = *kind;
  }

  // run block
  if (auto v = b.get_u64("run", "seed")) cfg.seed = *v;
  if (auto v = b.get_str("run", "out")) cfg.out_dir = *v;
  if (auto v = b.get_u64("run", "budget")) cfg.budget = *v;
  if (auto v = b.get_u64("run", "threads")) {
    if (*v < 1 || *v > 256)
      b.err(0, "[run] constraint violated: 1 <= threads <= 256");
    else
      cfg.threads = static_cast<int>(*v);
  }
  if (auto v = b.get_str("run", "naive")) {
    if (*v == "true")
      cfg.naive = true;
    else if (*v == "false")
      cfg.naive = false;
    else
      b.err(0, "[run] naive must be true or false");
  }

  auto need_cocycle = [&]() {
    if (!cfg.cocycle) b.err(0, "experiment " + type_name + " needs a [cocycle] block");
  };
  auto req_u64 = [&](const char* key, std::uint64_t lo) -> std::uint64_t {
    const auto v = b.get_u64("experiment", key);
    if (!v) {
      b.err(0, "[experiment] missing key '" + std::string(key) + "'");
      return lo;
    }
    if (*v < lo) {
      b.err(0, "[experiment] constraint violated: " + std::string(key) + " >= " +
                   std::to_string(lo));
      return lo;
    }
    return *v;
  };
  auto opt_x0 = [&]() {
    const auto v = b.get_double("experiment", "x0");
    if (!v) {
      b.err(0, "[experiment] missing key 'x0'");
      return 0.0;
    }
    if (!(*v >= 0.0 && *v < 1.0)) {
      b.err(0, "[experiment] constraint violated: 0 <= x0 < 1");
      return 0.0;
    }
    return *v;
  };
  auto opt_points = [&]() {
    const auto t = b.get_str("experiment", "points");
    if (!t || *t == "default") {
      cfg.points.clear();
      return;
    }
    std::istringstream is(*t);
    std::string tok;
    cfg.points.clear();
    while (is >> tok) {
      try {
        const double p = std::stod(tok);
        if (!(p >= 0.0 && p < 1.0)) throw ConfigError("outside [0,1)");
        cfg.points.push_back(p);
      } catch (const std::exception&) {
        b.err(0, "[experiment] bad point \"" + tok + "\"");
      }
    }
  };
  auto opt_word = [&](bool required) {
    const auto t = b.get_str("experiment", "word");
    if (t) {
      cfg.word.text = *t;
      try {
        cfg.word.build(cfg.family.branch_count(), cfg.seed);
      } catch (const std::exception& ex) {
        b.err(0, std::string("[experiment] ") + ex.what());
      }
    } else if (required) {
      cfg.word.text = "random";
    }
  };
  auto opt_observable = [&]() {
    const auto t = b.get_str("experiment", "observable");
    if (!t) {
      b.err(0, "[experiment] missing key 'observable'");
      return;
    }
    ObservableSpec spec;
    spec.text = *t;
    if (auto pt = b.get_str("experiment", "phi")) {
      try {
        spec.phi = Expr::parse(*pt);
      } catch (const std::exception& ex) {
        b.err(0, std::string("[experiment] phi: ") + ex.what());
      }
    }
    try {
      spec.build(cfg.cocycle);
    } catch (const std::exception& ex) {
      b.err(0, std::string("[experiment] ") + ex.what());
    }
    cfg.observable = std::move(spec);
  };
  auto check_budget = [&](std::uint64_t length) {
    try {
      word_count(cfg.family.branch_count(), length, cfg.budget);
    } catch (const BudgetError& ex) {
      b.budget_errors.push_back(ex.what());
    }
  };

  if (auto v = b.get_double("experiment", "tol")) {
    if (*v > 0)
      cfg.tol = *v;
    else
      b.err(0, "[experiment] constraint violated: tol > 0");
  }

  switch (cfg.experiment) {
    case ExperimentKind::LambdaFixed:
      need_cocycle();
      cfg.m_max = req_u64("m_max", 2);
      if (auto v = b.get_u64("experiment", "stride")) {
        if (*v < 1)
          b.err(0, "[experiment] constraint violated: stride >= 1");
        else
          cfg.stride = *v;
      }
      cfg.x0 = opt_x0();
      opt_word(true);
      break;
    case ExperimentKind::BranchExact: {
      need_cocycle();
      cfg.n_max = req_u64("n_max", 1);
      cfg.x0 = opt_x0();
      const auto nm = b.get_str("experiment", "normalization");
      if (!nm) {
        b.err(0, "[experiment] missing key 'normalization' (per_word | per_word_per_time)");
      } else if (*nm == "per_word") {
        cfg.normalization = Normalization::PerWord;
      } else if (*nm == "per_word_per_time") {
        cfg.normalization = Normalization::PerWordPerTime;
      } else {
        b.err(0, "[experiment] unknown normalization '" + *nm + "'");
      }
      check_budget(cfg.n_max);
      break;
    }
    case ExperimentKind::BranchMc:
      need_cocycle();
      cfg.n = req_u64("n", 1);
      cfg.samples = req_u64("samples", 2);
      cfg.x0 = opt_x0();
      break;
    case ExperimentKind::Birkhoff: {
      cfg.n_max = req_u64("n_max", 1);
      cfg.x0 = opt_x0();
      const auto pt = b.get_str("experiment", "phi");
      if (!pt) {
        b.err(0, "[experiment] missing key 'phi'");
      } else {
        try {
          cfg.phi = Expr::parse(*pt);
        } catch (const std::exception& ex) {
          b.err(0, std::string("[experiment] phi: ") + ex.what());
        }
      }
      check_budget(cfg.n_max);
      break;
    }
    case ExperimentKind::Kingman: {
      cfg.n_max = req_u64("n_max", 3);
      opt_observable();
      opt_word(true);
      opt_points();
      const auto dv = b.get_str("experiment", "divisor");
      if (!dv) {
        b.err(0, "[experiment] missing key 'divisor' (n | N^n)");
      } else if (*dv == "n") {
        cfg.divisor = DivisorKind::Time;
      } else if (*dv == "N^n") {
        cfg.divisor = DivisorKind::BranchCount;
      } else {
        b.err(0, "[experiment] unknown divisor '" + *dv + "'");
      }
      if (cfg.observable && cfg.observable->text.rfind("branch_sum", 0) == 0)
        check_budget(cfg.n_max);
      break;
    }
    case ExperimentKind::Fekete: {
      const auto seq = b.get_doubles("experiment", "sequence");
      if (!seq || seq->size() < 2)
        b.err(0, "[experiment] fekete needs key 'sequence' with at least two terms");
      else
        cfg.fekete_sequence = *seq;
      cfg.fekete_l = req_u64("l", 1);
      break;
    }
    case ExperimentKind::SubaddCheck: {
      opt_observable();
      cfg.n_max = req_u64("n_range", 1);
      cfg.p_max = req_u64("p_range", 1);
      opt_points();
      const auto md = b.get_str("experiment", "mode");
      if (!md) {
        b.err(0, "[experiment] missing key 'mode' (fixed_word | branch_total)");
      } else if (*md == "fixed_word") {
        cfg.mode = SubaddMode::FixedWord;
        opt_word(true);
      } else if (*md == "branch_total") {
        cfg.mode = SubaddMode::BranchTotal;
        opt_word(false);
        check_budget(cfg.n_max + cfg.p_max);
      } else {
        b.err(0, "[experiment] unknown mode '" + *md + "'");
      }
      break;
    }
  }

  b.flag_unknown_keys();

  if (!b.errors.empty()) {
    std::ostringstream os;
    os << b.errors.size() + b.budget_errors.size() << " config error(s):";
    for (const auto& e : b.errors) os << "\n  " << e;
    for (const auto& e : b.budget_errors) os << "\n  " << e;
    throw ConfigError(os.str());
  }
  if (!b.budget_errors.empty()) {
    std::ostringstream os;
    os << "budget error(s):";
    for (const auto& e : b.budget_errors) os << "\n  " << e;
    throw BudgetError(os.str());
  }
  return cfg;
}

std::string RunConfig::canonical() const {
  std::ostringstream os;
  os << "experiment=" << experiment_name(experiment) << "\n";
  os << "family=" << family.describe() << "\n";
  if (family.kind() == MapFamily::Kind::PiecewiseAffine) {
    for (const auto& m : family.pieces()) {
      os << "map:";
      for (double v : m.breaks) os << " " << fmt17(v);
      os << " |";
      for (double v : m.slopes) os << " " << fmt17(v);
      os << " |";
      for (double v : m.offsets) os << " " << fmt17(v);
      os << "\n";
    }
  }
  if (cocycle) os << "cocycle=" << cocycle->describe() << "\n";
  os << "seed=" << seed << "\nbudget=" << budget << "\n";
  switch (experiment) {
    case ExperimentKind::LambdaFixed:
      os << "m_max=" << m_max << "\nstride=" << stride << "\nx0=" << fmt17(x0)
         << "\nword=" << word.text << "\ntol=" << fmt17(tol) << "\n";
      break;
    case ExperimentKind::BranchExact:
      os << "n_max=" << n_max << "\nx0=" << fmt17(x0)
         << "\nnormalization=" << normalization_name(normalization) << "\ntol=" << fmt17(tol)
         << "\n";
      break;
    case ExperimentKind::BranchMc:
      os << "n=" << n << "\nsamples=" << samples << "\nx0=" << fmt17(x0) << "\n";
      break;
    case ExperimentKind::Birkhoff:
      os << "n_max=" << n_max << "\nx0=" << fmt17(x0) << "\nphi=" << (phi ? phi->text() : "")
         << "\ntol=" << fmt17(tol) << "\n";
      break;
    case ExperimentKind::Kingman:
      os << "n_max=" << n_max << "\nobservable=" << (observable ? observable->text : "")
         << "\nphi=" << (observable && observable->phi ? observable->phi->text() : "")
         << "\nword=" << word.text << "\ndivisor=" << divisor_name(divisor)
         << "\ntol=" << fmt17(tol) << "\npoints=";
      for (double p : points) os << " " << fmt17(p);
      os << "\n";
      break;
    case ExperimentKind::Fekete:
      os << "l=" << fekete_l << "\nsequence=";
      for (double v : fekete_sequence) os << " " << fmt17(v);
      os << "\n";
      break;
    case ExperimentKind::SubaddCheck:
      os << "observable=" << (observable ? observable->text : "")
         << "\nphi=" << (observable && observable->phi ? observable->phi->text() : "")
         << "\nmode=" << (mode == SubaddMode::FixedWord ? "fixed_word" : "branch_total")
         << "\nn_range=" << n_max << "\np_range=" << p_max << "\nword=" << word.text
         << "\npoints=";
      for (double p : points) os << " " << fmt17(p);
      os << "\n";
      break;
  }
  return os.str();
}

std::string RunConfig::hash() const {
  const std::string text = canonical();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace rdslab

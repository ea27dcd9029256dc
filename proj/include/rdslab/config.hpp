#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rdslab/cocycle.hpp"
#include "rdslab/dynamics.hpp"
#include "rdslab/estimators.hpp"
#include "rdslab/words.hpp"

namespace rdslab {

enum class ExperimentKind {
  LambdaFixed,
  BranchExact,
  BranchMc,
  Birkhoff,
  Kingman,
  Fekete,
  SubaddCheck,
};

std::string experiment_name(ExperimentKind k);
std::optional<ExperimentKind> experiment_from_name(const std::string& name);

struct WordSpec {
  // "random" | "periodic:<word>" | "explicit:<word>"
  std::string text = "random";
  WordSource build(int alphabet_size, std::uint64_t seed) const;
};

struct ObservableSpec {
  // "ergodic_sum" | "log_norm_cocycle" | "log_conorm_cocycle" | "branch_sum(<inner>)"
  std::string text;
  std::optional<Expr> phi;  // for ergodic_sum
  ObservableSequence build(const std::optional<CocycleGenerator>& gen) const;
};

struct RunConfig {
  MapFamily family = MapFamily::expanding_affine(2);
  std::optional<CocycleGenerator> cocycle;
  ExperimentKind experiment = ExperimentKind::LambdaFixed;

  // experiment parameters (used per kind)
  std::uint64_t m_max = 0;
  std::uint64_t stride = 1;
  std::uint64_t n_max = 0;
  std::uint64_t n = 0;
  std::uint64_t samples = 0;
  Normalization normalization = Normalization::PerWordPerTime;
  DivisorKind divisor = DivisorKind::Time;
  double x0 = 0.0;
  WordSpec word;
  std::vector<double> points;  // empty => default 32-point panel
  std::vector<double> fekete_sequence;
  std::uint64_t fekete_l = 1;
  std::optional<ObservableSpec> observable;
  std::optional<Expr> phi;  // birkhoff
  SubaddMode mode = SubaddMode::FixedWord;
  std::uint64_t p_max = 0;
  double tol = 1e-3;

  // run block
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::uint64_t budget = kDefaultEnumBudget;
  int threads = 1;
  bool naive = false;

  // canonical echo of the semantic fields; hash is FNV-1a over this text
  std::string canonical() const;
  std::string hash() const;
};

// Parses and validates. Collects every error before failing: ConfigError
// lists all syntax/constraint problems; BudgetError is raised when the only
// problem is an enumeration budget overrun.
RunConfig parse_config(const std::string& text,
                       const std::optional<std::string>& experiment_override = std::nullopt);

}  // namespace rdslab

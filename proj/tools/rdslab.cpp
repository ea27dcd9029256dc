// Command-line front end: one subcommand per experiment, file-first config
// with flag overrides (flag > file > default).
#include <array>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "rdslab/errors.hpp"
#include "rdslab/runner.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw rdslab::ConfigError("cannot read config file " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool naive = false;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--config", ov.config_path, "path to run config file")->required();
  cmd->add_option("--seed", ov.seed, "64-bit seed (overrides [run] seed)");
  cmd->add_option("--out", ov.out, "output directory (overrides [run] out)");
  cmd->add_flag("--naive", ov.naive, "force oracle-mode full enumeration");
  cmd->add_option("--threads", ov.threads, "worker count (overrides [run] threads)");
}

int execute(const std::string& subcommand, const Overrides& ov) {
  using namespace rdslab;
  try {
    std::string text = read_file(ov.config_path);
    RunConfig cfg = parse_config(text, subcommand);
    if (const char* env = std::getenv(kBudgetEnvVar)) {
      try {
        cfg.budget = std::stoull(env);
      } catch (const std::exception&) {
        throw ConfigError(std::string(kBudgetEnvVar) + " is not a valid integer: " + env);
      }
    }
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.out) cfg.out_dir = *ov.out;
    if (ov.naive) cfg.naive = true;
    if (ov.threads) {
      if (*ov.threads < 1) throw ConfigError("--threads must be >= 1");
      cfg.threads = *ov.threads;
    }
    const RunOutcome outcome = run(cfg);
    std::cout << "wrote " << outcome.manifest_path << "\n" << outcome.summary << "\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const BudgetError& e) {
    std::cerr << "budget error: " << e.what() << "\n";
    return kExitBudgetError;
  } catch (const SingularityError& e) {
    std::cerr << "singularity error: " << e.what() << "\n";
    return kExitSingularity;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical lab for Lyapunov exponents of random dynamics"};
  app.require_subcommand(1);

  static const char* kinds[] = {"lambda-fixed", "branch-exact", "branch-mc", "birkhoff",
                                "kingman",      "fekete",       "subadd-check"};
  static const char* descriptions[] = {
      "extremal Lyapunov exponents along a fixed word",
      "exact branch-averaged exponents over all words",
      "Monte Carlo branch average at a single length",
      "branch-averaged Birkhoff ergodic average",
      "Kingman-type convergence and invariance diagnostics",
      "Fekete lemma ratios, infima and l-subadditivity violations",
      "subadditivity inequality checker",
  };

  std::array<Overrides, 7> overrides;
  std::array<CLI::App*, 7> cmds{};
  for (std::size_t i = 0; i < 7; ++i) {
    cmds[i] = app.add_subcommand(kinds[i], descriptions[i]);
    add_common(cmds[i], overrides[i]);
  }

  CLI11_PARSE(app, argc, argv);

  for (std::size_t i = 0; i < 7; ++i)
    if (cmds[i]->parsed()) return execute(kinds[i], overrides[i]);
  return rdslab::kExitFailure;
}

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sgdlab/constructions.hpp"
#include "sgdlab/harness.hpp"
#include "sgdlab/trace_io.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read config file: " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

int print_checks(const std::vector<sgdlab::CheckResult>& checks) {
  bool all = true;
  for (const auto& c : checks) {
    std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << "  lhs=" << sgdlab::fmt17(c.lhs)
              << " rhs=" << sgdlab::fmt17(c.rhs) << "\n";
    if (!c.pass) std::cerr << "check failed: " << c.name << "\n";
    all = all && c.pass;
  }
  return all ? 0 : 1;
}

int cert_status(const std::vector<sgdlab::CertRow>& rows) {
  bool all = true;
  for (const auto& r : rows) {
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.check << " index=" << r.index
              << " lhs=" << sgdlab::fmt17(r.lhs) << " rhs=" << sgdlab::fmt17(r.rhs) << "\n";
    if (!r.pass) std::cerr << "certificate failed: " << r.check << " index=" << r.index << "\n";
    all = all && r.pass;
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Laboratory for projected subgradient descent worst cases and tail bounds"};
  app.require_subcommand(1);

  // lab run <config> [--out DIR] [--seed N] [--trials N] [--threads N]
  auto* run = app.add_subcommand("run", "Run an experiment described by a config file");
  std::string config_path, out_flag;
  std::uint64_t seed_flag = 0, trials_flag = 0;
  int threads_flag = -1;
  bool have_seed = false, have_trials = false;
  run->add_option("config", config_path, "Config file (key = value lines)")->required();
  run->add_option("--out", out_flag, "Output directory (overrides config and LAB_OUT_DIR)");
  auto* seed_opt = run->add_option("--seed", seed_flag, "Seed override");
  auto* trials_opt = run->add_option("--trials", trials_flag, "Trials override");
  run->add_option("--threads", threads_flag, "Worker threads (0 = hardware)");

  // lab verify <family> --T N [--c C]
  auto* verify = app.add_subcommand("verify", "Run the deterministic certificate suite");
  std::string family;
  int verify_T = 256;
  double verify_c = 1.0;
  verify->add_option("family", family, "Instance family: sc or lip")->required();
  verify->add_option("--T", verify_T, "Horizon T")->required();
  verify->add_option("--c", verify_c, "Step constant c (lip only)");

  auto* list = app.add_subcommand("list", "Enumerate experiments");

  CLI11_PARSE(app, argc, argv);
  have_seed = seed_opt->count() > 0;
  have_trials = trials_opt->count() > 0;

  try {
    if (list->parsed()) {
      for (const auto& [name, exp] : sgdlab::experiment_table()) {
        (void)exp;
        std::cout << name << "\n";
      }
      return 0;
    }

    if (verify->parsed()) {
      if (family != "sc" && family != "lip") {
        std::cerr << "family must be sc or lip\n";
        return 2;
      }
      std::vector<int> ks;
      for (int k : {1, 4, 16, 64, 128}) {
        if (k <= verify_T) ks.push_back(k);
      }
      const auto rows = family == "sc"
                            ? sgdlab::certify_sc(verify_T, ks, 20, 1)
                            : sgdlab::certify_lip(verify_T, verify_c, ks, 20, 1);
      return cert_status(rows);
    }

    // run
    sgdlab::ExperimentConfig cfg = sgdlab::parse_config(read_file(config_path));
    if (have_seed) cfg.seed = seed_flag;
    if (have_trials) {
      if (trials_flag < 1) {
        std::cerr << "error: --trials must be >= 1\n";
        return 2;
      }
      cfg.trials = trials_flag;
    }
    if (threads_flag >= 0) cfg.threads = threads_flag;
    if (!out_flag.empty()) {
      cfg.out_dir = out_flag;
    } else if (cfg.out_dir.empty()) {
      const char* env = std::getenv("LAB_OUT_DIR");
      cfg.out_dir = (env != nullptr && *env != '\0') ? env : "out";
    }

    const sgdlab::ExperimentResult res = sgdlab::run_experiment(cfg);
    const int status = print_checks(res.checks);
    std::cout << "summary: " << cfg.out_dir << "/summary.json\n";
    return status;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sgdlab/harness.hpp"
#include "sgdlab/rng.hpp"

using namespace sgdlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("parse_config fills defaults") {
  const ExperimentConfig cfg = parse_config("experiment = sc-lower\nT = 256\nseed = 1\n");
  CHECK(cfg.experiment == Experiment::kScLower);
  CHECK(cfg.T == 256);
  CHECK(cfg.seed == 1);
  CHECK(cfg.c == 1.0);
  CHECK(cfg.trials == 10000);
  CHECK(cfg.delta_grid == std::vector<double>{0.2, 0.1, 0.05, 0.01});
  CHECK(cfg.k_list == std::vector<int>{1, 4, 16, 64, 128});
}

TEST_CASE("parse_config rejects bad values and lists every violation") {
  try {
    parse_config("experiment = sc-lower\nT = 0\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("T must be >= 2") != std::string::npos);
  }

  try {
    parse_config("T = 0\nc = 0.5\nwho = 1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.violations().size() == 4);  // T, c, unknown key, missing experiment
  }

  CHECK_THROWS_AS(parse_config("experiment = warp-drive\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("experiment = ytail\ndelta_grid = 1.5\n"), ConfigError);
}

TEST_CASE("parse_config parses lists and comments") {
  const ExperimentConfig cfg = parse_config(
      "# comment line\n"
      "experiment = recursive-tail\n"
      "delta_grid = 0.1, 0.01\n"
      "k_list = 1, 2, 3   # trailing comment\n"
      "T_list = 64, 128\n"
      "trials = 500\n"
      "threads = 2\n");
  CHECK(cfg.delta_grid == std::vector<double>{0.1, 0.01});
  CHECK(cfg.k_list == std::vector<int>{1, 2, 3});
  CHECK(cfg.T_list == std::vector<int>{64, 128});
  CHECK(cfg.trials == 500);
  CHECK(cfg.threads == 2);
}

TEST_CASE("nearest-rank quantiles") {
  CHECK(quantile_nearest_rank({1.0, 2.0, 3.0, 4.0}, 0.5) == 2.0);
  CHECK(quantile_nearest_rank({1.0, 2.0, 3.0, 4.0}, 1.0) == 4.0);
  CHECK(quantile_nearest_rank({7.5, 7.5, 7.5}, 0.9) == 7.5);
  CHECK_THROWS_AS(quantile_nearest_rank({}, 0.5), std::invalid_argument);

  StepRng rng(11, 0, 0);
  std::vector<double> u(10000);
  for (double& v : u) v = rng.next_uniform01();
  const double q = quantile_nearest_rank(u, 0.9);
  CHECK(q > 0.88);
  CHECK(q < 0.92);
}

TEST_CASE("quantile_summary is non-decreasing in level") {
  StepRng rng(21, 0, 0);
  std::vector<double> a(5000), b(5000);
  for (double& v : a) v = rng.next_uniform01();
  for (double& v : b) v = 2.0 * rng.next_uniform01();
  const QuantileSummary s = quantile_summary(64, {0.5, 0.8, 0.9, 0.99}, a, b);
  CHECK(s.T == 64);
  for (std::size_t i = 1; i < s.levels.size(); ++i) {
    CHECK(s.final_error[i] >= s.final_error[i - 1]);
    CHECK(s.suffix_error[i] >= s.suffix_error[i - 1]);
  }
}

TEST_CASE("sc-lower experiment writes deterministic outputs and passes") {
  const fs::path dir1 = fs::temp_directory_path() / "sgdlab_test_sc1";
  const fs::path dir2 = fs::temp_directory_path() / "sgdlab_test_sc2";
  fs::remove_all(dir1);
  fs::remove_all(dir2);

  ExperimentConfig cfg = parse_config("experiment = sc-lower\nT = 64\nseed = 3\n");
  cfg.out_dir = dir1.string();
  const ExperimentResult r1 = run_experiment(cfg);
  CHECK(r1.pass);
  CHECK(r1.summary.contains("version"));
  CHECK(r1.summary.contains("wall_time_ms"));
  CHECK(r1.summary["config"]["T"] == 64);
  CHECK(fs::exists(dir1 / "summary.json"));
  CHECK(fs::exists(dir1 / "trace.csv"));
  CHECK(fs::exists(dir1 / "vectors.txt"));  // full-vector dump at small T
  CHECK(fs::exists(dir1 / "certificates.csv"));
  CHECK(fs::exists(dir1 / "plotdata" / "fx_vs_t.csv"));

  cfg.out_dir = dir2.string();
  const ExperimentResult r2 = run_experiment(cfg);
  CHECK(r2.pass);
  // byte-identical CSVs (summary.json carries the only timestamp)
  CHECK(slurp(dir1 / "trace.csv") == slurp(dir2 / "trace.csv"));
  CHECK(slurp(dir1 / "certificates.csv") == slurp(dir2 / "certificates.csv"));
  CHECK(slurp(dir1 / "plotdata" / "fx_vs_t.csv") == slurp(dir2 / "plotdata" / "fx_vs_t.csv"));

  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("lip-monotone and lbdelta-suffix experiments pass at small scale") {
  const fs::path dir = fs::temp_directory_path() / "sgdlab_test_misc";
  fs::remove_all(dir);

  ExperimentConfig mono = parse_config("experiment = lip-monotone\nT = 32\nc = 2\n");
  mono.out_dir = (dir / "mono").string();
  CHECK(run_experiment(mono).pass);

  ExperimentConfig lbd = parse_config("experiment = lbdelta-suffix\nT = 64\ntrials = 50\n");
  lbd.out_dir = (dir / "lbd").string();
  CHECK(run_experiment(lbd).pass);

  ExperimentConfig coup = parse_config("experiment = coupling\nT = 64\n");
  coup.out_dir = (dir / "coup").string();
  const ExperimentResult res = run_experiment(coup);
  CHECK(res.pass);
  CHECK(res.summary["results"]["max_deviation"].get<double>() <= 1e-10);

  fs::remove_all(dir);
}

TEST_CASE("experiment table covers the CLI surface") {
  CHECK(experiment_table().size() == 12);
  CHECK(experiment_name(Experiment::kYTail) == "ytail");
  CHECK(experiment_name(Experiment::kQuadraticQuantiles) == "quadratic-quantiles");
}

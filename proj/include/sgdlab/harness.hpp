#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace sgdlab {

inline constexpr const char* kVersion = "0.1.0";

enum class Experiment {
  kScLower,
  kLipLower,
  kLipMonotone,
  kSuffixLower,
  kLbDeltaLast,
  kLbDeltaSuffix,
  kCoupling,
  kQuadraticQuantiles,
  kRecursiveTail,
  kFreedmanTail,
  kDecomposition,
  kYTail,
};

const std::vector<std::pair<std::string, Experiment>>& experiment_table();
std::string experiment_name(Experiment e);

// Declarative description of one batch run. Defaults are filled for
// everything except `experiment`.
struct ExperimentConfig {
  Experiment experiment = Experiment::kScLower;
  int T = 256;
  double c = 1.0;
  std::uint64_t trials = 10000;
  std::vector<double> delta_grid = {0.2, 0.1, 0.05, 0.01};
  std::uint64_t seed = 1;
  std::string out_dir;  // resolved by the CLI: flag > config > env > "out"
  std::vector<int> k_list = {1, 4, 16, 64, 128};
  std::vector<int> T_list = {64, 256, 1024, 4096};  // quadratic-quantiles only
  double alpha = 2.0;                               // coupling only
  double L = 3.0;                                   // coupling only
  int threads = 1;
};

// Carries every violation found, one per line.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::vector<std::string>& violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// Line-oriented `key = value` text with `#` comments.
ExperimentConfig parse_config(const std::string& text);

struct CheckResult {
  std::string name;
  bool pass = false;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct ExperimentResult {
  bool pass = false;
  std::vector<CheckResult> checks;
  nlohmann::json summary;
};

// Runs the experiment, writes summary.json, per-experiment CSVs and
// plotdata/*.csv under cfg.out_dir. All CSV output is deterministic for a
// fixed (config, seed); wall time and timestamp live only in summary.json.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Empirical quantiles by the nearest-rank rule, deterministic.
double quantile_nearest_rank(std::vector<double> samples, double level);

struct QuantileSummary {
  int T = 0;
  std::vector<double> levels;
  std::vector<double> final_error;   // f(x_{T+1}) - f(x*) quantiles
  std::vector<double> suffix_error;  // f(suffix average) - f(x*) quantiles
};

// Quantiles of both error samples at every level (non-decreasing in level).
QuantileSummary quantile_summary(int T, const std::vector<double>& levels,
                                 const std::vector<double>& final_samples,
                                 const std::vector<double>& suffix_samples);

}  // namespace sgdlab

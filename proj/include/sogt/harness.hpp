#pragma once

// Experiment orchestration: configs, comparison reports and the experiments
// that check the particle system against its kernels and limits.

#include "sogt/gt.hpp"
#include "sogt/rational.hpp"

#include "json.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sogt {

enum class ExperimentKind { markov_marginal, intertwine, desintegration, small_q, large_q, kernel_dump };

ExperimentKind parse_experiment_kind(const std::string& name);
std::string experiment_name(ExperimentKind kind);

/// Second run at two values of N, compared on a cheaper statistic with more paths.
struct TrendConfig {
  int n_small = 0;
  int n_large = 0;
  std::size_t n_paths = 0;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::markov_marginal;
  int k = 1;
  int d = 0;  // kernel-dump with kernel p_d; 0 means k + 1
  Rational q{1, 2};
  bool exact = true;  // q was given as num/den
  int horizon = 1;
  double t_max = 1.0;
  int big_n = 0;  // N of the small-q / large-q scalings
  std::size_t n_paths = 10000;
  std::uint64_t seed = 1;
  int radius = 30;
  double tolerance = 1e-6;
  int bound = 4;
  std::string kernel = "r_k";  // kernel-dump: p_d, r_k, s_k, nu
  Row lambda;                  // kernel-dump source state
  std::optional<TrendConfig> trend;
  std::map<std::string, double> thresholds;  // keyed by comparison family: tv, tv_pair, tv_semigroup, ks, trend, max_abs
  std::size_t trajectories = 0;              // paths written to trajectories.jsonl
  std::string output;                        // directory, empty for none
};

/// Missing keys keep their defaults. Throws ContractViolation on unknown experiments or bad values.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

/// Throws ContractViolation when a parameter is outside the range the experiment supports.
void validate_config(const ExperimentConfig& config);

enum class Statistic { tv, ks, max_abs, trend };
std::string statistic_name(Statistic s);

struct ComparisonReport {
  std::string label;
  Statistic statistic = Statistic::tv;
  double value = 0;
  double threshold = 0;
  bool pass = false;
  std::size_t samples_a = 0;  // 0 for exact laws
  std::size_t samples_b = 0;
  double deficit = 0;    // truncation mass not accounted for
  double tolerance = 0;  // largest deficit allowed
  double noise = 0;      // expected sampling value, when known
  std::string exact_value;  // num/den for exact statistics

  /// Sets pass from value, threshold, deficit and tolerance.
  void settle();
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ComparisonReport> comparisons;
  nlohmann::json extra;  // experiment specific payload (kernel rows, counts)

  bool pass() const;
};

nlohmann::json report_to_json(const ExperimentReport& report);
std::string summarize(const ExperimentReport& report);

ExperimentReport experiment_markov_marginal(const ExperimentConfig& config);
ExperimentReport experiment_small_q(const ExperimentConfig& config);
ExperimentReport experiment_large_q(const ExperimentConfig& config);
ExperimentReport experiment_intertwine(const ExperimentConfig& config);
ExperimentReport experiment_desintegration(const ExperimentConfig& config);
ExperimentReport experiment_kernel_dump(const ExperimentConfig& config);

/// Validates, dispatches, and writes report.json (plus CSV/JSONL files) when config.output is set.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// "a,b|c" style encodings used in CSV and JSON keys.
std::string format_pattern(const Pattern& p);
nlohmann::json pattern_json(const Pattern& p);

}  // namespace sogt

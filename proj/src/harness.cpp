#include "sogt/harness.hpp"

#include "sogt/dynamics.hpp"
#include "sogt/kernels.hpp"
#include "sogt/spectra.hpp"
#include "sogt/stats.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

namespace sogt {

using nlohmann::json;

namespace {

const std::vector<std::pair<ExperimentKind, std::string>>& kind_names() {
  static const std::vector<std::pair<ExperimentKind, std::string>> names = {
      {ExperimentKind::markov_marginal, "markov-marginal"}, {ExperimentKind::intertwine, "intertwine"},
      {ExperimentKind::desintegration, "desintegration"},   {ExperimentKind::small_q, "small-q"},
      {ExperimentKind::large_q, "large-q"},                 {ExperimentKind::kernel_dump, "kernel-dump"},
  };
  return names;
}

std::string state_string(const Row& r) { return format_row(r); }
std::string state_string(const Pattern& p) { return format_pattern(p); }
std::string state_string(const WPlusPair& s) { return format_row(s.z) + "|" + format_row(s.y); }

// 1/2 sum sqrt(2 p (1-p) (1/n + 1/m) / pi), p from the pooled sample
template <typename State>
double expected_two_sample_tv(const Histogram<State>& a, const Histogram<State>& b) {
  Histogram<State> pooled = a;
  for (const auto& [s, c] : b.counts()) pooled.add(s, c);
  const double scale = 1.0 / static_cast<double>(a.total()) + 1.0 / static_cast<double>(b.total());
  double total = 0;
  for (const auto& [s, p] : pooled.law().support) total += std::sqrt(2 * p * (1 - p) * scale / M_PI);
  return total / 2;
}

double threshold_or(const ExperimentConfig& config, const std::string& family, double fallback) {
  const auto it = config.thresholds.find(family);
  return it == config.thresholds.end() ? fallback : it->second;
}

// Writes nothing when the output directory is empty.
class Sink {
 public:
  explicit Sink(const std::string& dir) : dir_(dir) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
  }

  bool enabled() const { return !dir_.empty(); }

  template <typename State>
  void histogram(const std::string& name, const Histogram<State>& hist) const {
    if (!enabled()) return;
    std::ofstream out(path(name + ".csv"));
    out << "state,count\n";
    for (const auto& [s, c] : hist.counts()) out << '"' << state_string(s) << "\"," << c << '\n';
  }

  void samples(const std::string& name, const std::vector<std::vector<double>>& columns,
               const std::vector<std::string>& header) const {
    if (!enabled() || columns.empty()) return;
    std::ofstream out(path(name + ".csv"));
    out << std::setprecision(17);
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
    for (std::size_t row = 0; row < columns.front().size(); ++row) {
      for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c][row];
      out << '\n';
    }
  }

  void json_file(const std::string& name, const json& j) const {
    if (!enabled()) return;
    std::ofstream out(path(name));
    out << j.dump(2) << '\n';
  }

  std::string path(const std::string& name) const { return (std::filesystem::path(dir_) / name).string(); }

 private:
  std::string dir_;
};

// JSON lines, one record per (path, time, pattern)
class TrajectoryWriter {
 public:
  TrajectoryWriter(const Sink& sink, std::size_t max_paths) : max_paths_(max_paths) {
    if (sink.enabled() && max_paths > 0) out_ = std::make_unique<std::ofstream>(sink.path("trajectories.jsonl"));
  }

  void add(std::size_t path, const std::vector<Pattern>& states) {
    if (!out_ || path >= max_paths_) return;
    for (std::size_t h = 0; h < states.size(); ++h) {
      const json record = {{"path", path}, {"time", static_cast<double>(h) / 2}, {"pattern", pattern_json(states[h])}};
      *out_ << record.dump() << '\n';
    }
  }

 private:
  std::size_t max_paths_;
  std::unique_ptr<std::ofstream> out_;
};

DiscreteConfig discrete_config(const ExperimentConfig& config, const Rational& q, int horizon, std::size_t n_paths) {
  DiscreteConfig d;
  d.q = q;
  d.k = config.k;
  d.horizon = horizon;
  d.n_paths = n_paths;
  d.seed = config.seed;
  d.mode = GeometricMode::inverse_cdf;
  return d;
}

int scaled_steps(int big_n, double t) { return static_cast<int>(std::floor(big_n * t + 1e-9)); }

template <typename Scalar>
std::pair<SparseLaw<Row, double>, SparseLaw<WPlusPair, double>> exact_marginals(const ExperimentConfig& config) {
  const Kernels<Scalar> kernels(config.q);
  auto top = n_step_law(kernels, config.k, config.horizon, config.radius, config.tolerance);
  auto pair = pair_n_step_law(kernels, config.k, config.horizon, config.radius, config.tolerance);
  if constexpr (std::is_same_v<Scalar, Rational>) {
    return {to_double_law(top), to_double_law(pair)};
  } else {
    return {std::move(top), std::move(pair)};
  }
}

Row top_row_of(const Pattern& p, int k) { return p.row(k); }

}  // namespace

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (const auto& [kind, n] : kind_names()) {
    if (n == name) return kind;
  }
  throw ContractViolation("unknown experiment '" + name + "'");
}

std::string experiment_name(ExperimentKind kind) {
  for (const auto& [k, n] : kind_names()) {
    if (k == kind) return n;
  }
  return "?";
}

std::string statistic_name(Statistic s) {
  switch (s) {
    case Statistic::tv: return "tv";
    case Statistic::ks: return "ks";
    case Statistic::max_abs: return "max-abs";
    case Statistic::trend: return "trend";
  }
  return "?";
}

std::string format_pattern(const Pattern& p) {
  std::string out;
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    if (i) out += '|';
    out += format_row(p.rows[i]);
  }
  return out;
}

json pattern_json(const Pattern& p) { return p.rows; }

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ContractViolation("config: expected a JSON object");
  ExperimentConfig c;
  try {
    if (!j.contains("experiment")) throw ContractViolation("config: missing 'experiment'");
    c.experiment = parse_experiment_kind(j.at("experiment").get<std::string>());
    if (j.contains("q")) {
      const json& q = j.at("q");
      const std::string text = q.is_string() ? q.get<std::string>() : q.dump();
      c.q = parse_rational(text);
      c.exact = is_fraction_literal(text);
    }
    c.k = j.value("k", c.k);
    c.d = j.value("d", c.d);
    c.horizon = j.value("horizon", c.horizon);
    c.t_max = j.value("t_max", c.t_max);
    c.big_n = j.value("N", c.big_n);
    c.n_paths = j.value("n_paths", c.n_paths);
    c.seed = j.value("seed", c.seed);
    c.radius = j.value("radius", c.radius);
    c.tolerance = j.value("tolerance", c.tolerance);
    c.bound = j.value("bound", c.bound);
    c.kernel = j.value("kernel", c.kernel);
    if (j.contains("lambda")) {
      const json& l = j.at("lambda");
      c.lambda = l.is_string() ? parse_row(l.get<std::string>()) : l.get<Row>();
    }
    if (j.contains("trend")) {
      const json& t = j.at("trend");
      c.trend = TrendConfig{t.at("N_small").get<int>(), t.at("N_large").get<int>(), t.at("n_paths").get<std::size_t>()};
    }
    if (j.contains("thresholds")) c.thresholds = j.at("thresholds").get<std::map<std::string, double>>();
    c.trajectories = j.value("trajectories", c.trajectories);
    c.output = j.value("output", c.output);
  } catch (const json::exception& e) {
    throw ContractViolation(std::string("config: ") + e.what());
  }
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j = {
      {"experiment", experiment_name(c.experiment)},
      {"k", c.k},
      {"d", c.d},
      {"q", to_fraction_string(c.q)},
      {"exact", c.exact},
      {"horizon", c.horizon},
      {"t_max", c.t_max},
      {"N", c.big_n},
      {"n_paths", c.n_paths},
      {"seed", c.seed},
      {"radius", c.radius},
      {"tolerance", c.tolerance},
      {"bound", c.bound},
      {"kernel", c.kernel},
      {"lambda", c.lambda},
      {"thresholds", c.thresholds},
      {"trajectories", c.trajectories},
      {"output", c.output},
  };
  if (c.trend) j["trend"] = {{"N_small", c.trend->n_small}, {"N_large", c.trend->n_large}, {"n_paths", c.trend->n_paths}};
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContractViolation("cannot read config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ContractViolation("config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

void validate_config(const ExperimentConfig& c) {
  const auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ContractViolation("config: " + what);
  };
  require(c.q > 0 && c.q < 1, "q must lie in (0, 1)");
  require(c.radius >= 1, "radius must be positive");
  require(c.tolerance >= 0, "tolerance must be non-negative");
  switch (c.experiment) {
    case ExperimentKind::markov_marginal:
      require(c.k >= 1 && c.k <= 5, "markov-marginal needs 1 <= k <= 5");
      require(c.horizon >= 1 && c.horizon <= 4, "markov-marginal needs 1 <= horizon <= 4");
      require(c.n_paths >= 1, "n_paths must be positive");
      break;
    case ExperimentKind::small_q:
      require(c.k >= 1 && c.k <= 5, "small-q needs 1 <= k <= 5");
      require(c.big_n >= 50, "small-q needs N >= 50");
      require(c.t_max > 0, "t_max must be positive");
      require(c.n_paths >= 1, "n_paths must be positive");
      if (c.trend) require(c.trend->n_small >= 50 && c.trend->n_small < c.trend->n_large && c.trend->n_paths >= 1,
                           "small-q trend needs 50 <= N_small < N_large and n_paths >= 1");
      break;
    case ExperimentKind::large_q:
      require(c.k >= 2 && c.k <= 5, "large-q needs 2 <= k <= 5");
      require(c.big_n >= 20, "large-q needs N >= 20");
      require(c.horizon >= 1 && c.horizon <= 4, "large-q needs 1 <= horizon <= 4");
      require(c.n_paths >= 1, "n_paths must be positive");
      if (c.trend) require(c.trend->n_small >= 20 && c.trend->n_small < c.trend->n_large && c.trend->n_paths >= 1,
                           "large-q trend needs 20 <= N_small < N_large and n_paths >= 1");
      break;
    case ExperimentKind::intertwine:
      require(c.k >= 1 && c.k <= 6, "intertwine needs 1 <= k <= 6");
      require(c.bound >= 0, "bound must be non-negative");
      break;
    case ExperimentKind::desintegration:
      require(c.bound >= 0, "bound must be non-negative");
      break;
    case ExperimentKind::kernel_dump: {
      const int d = c.d > 0 ? c.d : c.k + 1;
      if (c.kernel == "p_d") {
        require(d >= 3 && in_weight_set(d, c.lambda), "p_d needs d >= 3 and lambda in W_d");
      } else if (c.kernel == "r_k" || c.kernel == "s_k") {
        require(c.k >= 1 && c.lambda.size() == row_length(c.k) && is_integer_row(c.lambda),
                "r_k and s_k need a non-negative decreasing lambda of length ceil(k/2)");
      } else if (c.kernel == "nu") {
        require(d >= 3, "nu needs d >= 3");
      } else {
        throw ContractViolation("config: unknown kernel '" + c.kernel + "'");
      }
      break;
    }
  }
}

void ComparisonReport::settle() { pass = value <= threshold && deficit <= tolerance; }

bool ExperimentReport::pass() const {
  for (const auto& c : comparisons) {
    if (!c.pass) return false;
  }
  return true;
}

json report_to_json(const ExperimentReport& report) {
  json comparisons = json::array();
  for (const auto& c : report.comparisons) {
    json j = {{"label", c.label},         {"statistic", statistic_name(c.statistic)},
              {"value", c.value},         {"threshold", c.threshold},
              {"pass", c.pass},           {"samples", {c.samples_a, c.samples_b}},
              {"deficit", c.deficit},     {"tolerance", c.tolerance},
              {"expected_noise", c.noise}};
    if (!c.exact_value.empty()) j["exact_value"] = c.exact_value;
    comparisons.push_back(std::move(j));
  }
  json j = {{"experiment", experiment_name(report.config.experiment)},
            {"config", config_to_json(report.config)},
            {"comparisons", comparisons},
            {"pass", report.pass()}};
  if (!report.extra.is_null()) j["extra"] = report.extra;
  return j;
}

std::string summarize(const ExperimentReport& report) {
  std::ostringstream out;
  out << experiment_name(report.config.experiment) << ": " << (report.pass() ? "pass" : "FAIL") << '\n';
  for (const auto& c : report.comparisons) {
    out << "  [" << (c.pass ? "PASS" : "FAIL") << "] " << c.label << ": " << statistic_name(c.statistic) << ' ';
    if (!c.exact_value.empty()) {
      out << c.exact_value;
    } else {
      out << std::setprecision(5) << c.value;
    }
    out << " <= " << c.threshold << " (samples " << c.samples_a << '/' << c.samples_b << ", deficit "
        << std::setprecision(3) << c.deficit << ", noise " << c.noise << ")\n";
  }
  return out.str();
}

ExperimentReport experiment_markov_marginal(const ExperimentConfig& config) {
  ExperimentReport report{config, {}, {}};
  const Sink sink(config.output);
  TrajectoryWriter writer(sink, config.trajectories);
  const int k = config.k;
  const int h = config.horizon;

  Histogram<Row> top;
  Histogram<WPlusPair> pair;
  run_discrete(discrete_config(config, config.q, h, config.n_paths), [&](std::size_t path, const std::vector<Pattern>& states) {
    writer.add(path, states);
    top.add(states[static_cast<std::size_t>(2 * h)].row(k));
    Row z = states[static_cast<std::size_t>(2 * h - 1)].row(k);
    if (k % 2 == 1) z.pop_back();  // wall particle
    pair.add(WPlusPair{std::move(z), states[static_cast<std::size_t>(2 * h)].row(k)});
  });
  sink.histogram("top_row", top);
  sink.histogram("pair", pair);

  const auto [top_law, pair_law] = config.exact ? exact_marginals<Rational>(config) : exact_marginals<double>(config);

  ComparisonReport a;
  a.label = "X^" + std::to_string(k) + "(" + std::to_string(h) + ") vs R_" + std::to_string(k) + " iterate";
  a.statistic = Statistic::tv;
  a.value = tv_distance(top.law(), top_law).distance;
  a.noise = expected_sampling_tv(top_law, top.total());
  a.threshold = threshold_or(config, "tv", 3 * a.noise);
  a.samples_a = top.total();
  a.deficit = top_law.tail_deficit;
  a.tolerance = config.tolerance;
  a.settle();
  report.comparisons.push_back(a);

  ComparisonReport b;
  b.label = "(Z^" + std::to_string(k) + ", Y^" + std::to_string(k) + ")(" + std::to_string(h) + ") vs S_" + std::to_string(k) +
            " iterate";
  b.statistic = Statistic::tv;
  b.value = tv_distance(pair.law(), pair_law).distance;
  b.noise = expected_sampling_tv(pair_law, pair.total());
  b.threshold = threshold_or(config, "tv_pair", 3 * b.noise);
  b.samples_a = pair.total();
  b.deficit = pair_law.tail_deficit;
  b.tolerance = config.tolerance;
  b.settle();
  report.comparisons.push_back(b);
  return report;
}

ExperimentReport experiment_small_q(const ExperimentConfig& config) {
  ExperimentReport report{config, {}, {}};
  report.config.q = Rational(1, config.big_n);
  const Sink sink(config.output);
  TrajectoryWriter writer(sink, config.trajectories);
  const int k = config.k;
  const int steps = scaled_steps(config.big_n, config.t_max);

  Histogram<Pattern> x_pattern;
  Histogram<Row> x_top;
  run_discrete(discrete_config(config, report.config.q, steps, config.n_paths),
               [&](std::size_t path, const std::vector<Pattern>& states) {
                 writer.add(path, states);
                 x_pattern.add(states.back());
                 x_top.add(top_row_of(states.back(), k));
               });
  Histogram<Pattern> y_pattern;
  run_ctmc(k, config.t_max, config.n_paths, config.seed, false,
           [&](std::size_t, const CtmcPath& p) { y_pattern.add(p.final_state); });
  sink.histogram("pattern_discrete", x_pattern);
  sink.histogram("pattern_ctmc", y_pattern);
  sink.histogram("top_row_discrete", x_top);

  ComparisonReport a;
  a.label = "X([" + std::to_string(config.big_n) + " t]) vs Y(t), full pattern";
  a.statistic = Statistic::tv;
  a.value = tv_distance(x_pattern.law(), y_pattern.law()).distance;
  a.noise = expected_two_sample_tv(x_pattern, y_pattern);
  a.threshold = threshold_or(config, "tv", 3 * a.noise);
  a.samples_a = x_pattern.total();
  a.samples_b = y_pattern.total();
  a.tolerance = config.tolerance;
  a.settle();
  report.comparisons.push_back(a);

  const auto semigroup = generator_semigroup_law(k, config.t_max, config.radius);
  ComparisonReport b;
  b.label = "X^" + std::to_string(k) + " vs A_" + std::to_string(k) + " semigroup";
  b.statistic = Statistic::tv;
  b.value = tv_distance(x_top.law(), semigroup).distance;
  b.noise = expected_sampling_tv(semigroup, x_top.total());
  b.threshold = threshold_or(config, "tv_semigroup", 3 * b.noise);
  b.samples_a = x_top.total();
  b.deficit = semigroup.tail_deficit;
  b.tolerance = config.tolerance;
  b.settle();
  report.comparisons.push_back(b);

  if (config.trend) {
    const TrendConfig& t = *config.trend;
    std::map<int, double> simulated;
    std::map<int, double> exact;
    double deficit = semigroup.tail_deficit;
    for (const int n : {t.n_small, t.n_large}) {
      const int n_steps = scaled_steps(n, config.t_max);
      Histogram<Row> hist;
      run_discrete(discrete_config(config, Rational(1, n), n_steps, t.n_paths),
                   [&](std::size_t, const std::vector<Pattern>& states) { hist.add(top_row_of(states.back(), k)); });
      simulated[n] = tv_distance(hist.law(), semigroup).distance;
      const Kernels<double> kernels{Rational(1, n)};
      const auto law = n_step_law(kernels, k, n_steps, config.radius, config.tolerance);
      exact[n] = tv_distance(law, semigroup).distance;
      deficit = std::max(deficit, law.tail_deficit);
    }
    ComparisonReport c;
    c.label = "trend N=" + std::to_string(t.n_small) + " -> " + std::to_string(t.n_large) + ", simulated X^" +
              std::to_string(k) + " vs semigroup";
    c.statistic = Statistic::trend;
    c.value = simulated[t.n_large] - simulated[t.n_small];
    c.threshold = threshold_or(config, "trend", 0.0);
    c.samples_a = c.samples_b = t.n_paths;
    c.deficit = semigroup.tail_deficit;
    c.tolerance = config.tolerance;
    c.settle();
    report.comparisons.push_back(c);

    ComparisonReport e;
    e.label = "trend N=" + std::to_string(t.n_small) + " -> " + std::to_string(t.n_large) + ", R_" + std::to_string(k) +
              " iterate vs semigroup";
    e.statistic = Statistic::trend;
    e.value = exact[t.n_large] - exact[t.n_small];
    e.threshold = threshold_or(config, "trend", 0.0);
    e.deficit = deficit;
    e.tolerance = config.tolerance;
    e.settle();
    report.comparisons.push_back(e);
    report.extra["trend"] = {{"N", {t.n_small, t.n_large}},
                             {"simulated_tv", {simulated[t.n_small], simulated[t.n_large]}},
                             {"exact_tv", {exact[t.n_small], exact[t.n_large]}}};
  }
  return report;
}

namespace {

// columns[n-1][i] = samples of coordinate i of X^k(n)/N
std::vector<std::vector<std::vector<double>>> scaled_top_rows(const ExperimentConfig& config, int big_n,
                                                              std::size_t n_paths, TrajectoryWriter* writer) {
  const int k = config.k;
  const std::size_t r = row_length(k);
  std::vector<std::vector<std::vector<double>>> out(static_cast<std::size_t>(config.horizon),
                                                    std::vector<std::vector<double>>(r));
  run_discrete(discrete_config(config, Rational(big_n - 1, big_n), config.horizon, n_paths),
               [&](std::size_t path, const std::vector<Pattern>& states) {
                 if (writer) writer->add(path, states);
                 for (int n = 1; n <= config.horizon; ++n) {
                   const Row& row = states[static_cast<std::size_t>(2 * n)].row(k);
                   for (std::size_t i = 0; i < r; ++i) {
                     out[static_cast<std::size_t>(n - 1)][i].push_back(std::abs(row[i]) / static_cast<double>(big_n));
                   }
                 }
               });
  return out;
}

std::vector<std::vector<std::vector<double>>> eigen_columns(int d, int horizon, std::size_t n_paths, std::uint64_t seed) {
  const auto chain = simulate_eigen_chain(d, horizon, n_paths, seed);
  const std::size_t r = weight_length(d);
  std::vector<std::vector<std::vector<double>>> out(static_cast<std::size_t>(horizon), std::vector<std::vector<double>>(r));
  for (const auto& path : chain) {
    for (int n = 1; n <= horizon; ++n) {
      for (std::size_t i = 0; i < r; ++i) out[static_cast<std::size_t>(n - 1)][i].push_back(path[static_cast<std::size_t>(n)][i]);
    }
  }
  return out;
}

std::vector<double> coordinate_sum(const std::vector<std::vector<double>>& columns) {
  std::vector<double> sum(columns.front().size(), 0.0);
  for (const auto& c : columns) {
    for (std::size_t s = 0; s < c.size(); ++s) sum[s] += c[s];
  }
  return sum;
}

double max_coordinate_ks(const std::vector<std::vector<double>>& xs, const std::vector<std::vector<double>>& ys) {
  double worst = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) worst = std::max(worst, ks_two_sample(xs[i], ys[i]));
  return worst;
}

}  // namespace

ExperimentReport experiment_large_q(const ExperimentConfig& config) {
  ExperimentReport report{config, {}, {}};
  const int big_n = config.big_n;
  report.config.q = Rational(big_n - 1, big_n);
  const Sink sink(config.output);
  TrajectoryWriter writer(sink, config.trajectories);
  const int k = config.k;
  const int d = k + 1;

  const auto xs = scaled_top_rows(config, big_n, config.n_paths, &writer);
  const auto ls = eigen_columns(d, config.horizon, config.n_paths, config.seed);
  const double fallback = ks_critical_value(config.n_paths, config.n_paths, 0.001) + 1.0 / big_n;
  const std::size_t r = xs.front().size();
  for (int n = 1; n <= config.horizon; ++n) {
    const auto& x = xs[static_cast<std::size_t>(n - 1)];
    const auto& l = ls[static_cast<std::size_t>(n - 1)];
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;
    for (std::size_t i = 0; i < r; ++i) {
      ComparisonReport c;
      c.label = "X^" + std::to_string(k) + "_" + std::to_string(i + 1) + "(" + std::to_string(n) + ")/N vs Lambda_" +
                std::to_string(i + 1) + "(" + std::to_string(n) + ")";
      c.statistic = Statistic::ks;
      c.value = ks_two_sample(x[i], l[i]);
      c.threshold = threshold_or(config, "ks", fallback);
      c.samples_a = x[i].size();
      c.samples_b = l[i].size();
      c.tolerance = config.tolerance;
      c.settle();
      report.comparisons.push_back(c);
      header.push_back("x" + std::to_string(i + 1));
      header.push_back("lambda" + std::to_string(i + 1));
      columns.push_back(x[i]);
      columns.push_back(l[i]);
    }
    if (r > 1) {
      ComparisonReport c;
      c.label = "coordinate sum at n=" + std::to_string(n);
      c.statistic = Statistic::ks;
      c.value = ks_two_sample(coordinate_sum(x), coordinate_sum(l));
      c.threshold = threshold_or(config, "ks", fallback);
      c.samples_a = config.n_paths;
      c.samples_b = config.n_paths;
      c.tolerance = config.tolerance;
      c.settle();
      report.comparisons.push_back(c);
    }
    sink.samples("samples_n" + std::to_string(n), columns, header);
  }

  if (config.trend) {
    const TrendConfig& t = *config.trend;
    const auto lt = eigen_columns(d, config.horizon, t.n_paths, config.seed);
    const auto& l_last = lt.back();
    std::map<int, double> ks;
    for (const int n : {t.n_small, t.n_large}) {
      const auto x = scaled_top_rows(config, n, t.n_paths, nullptr);
      ks[n] = max_coordinate_ks(x.back(), l_last);
    }
    ComparisonReport c;
    c.label = "trend N=" + std::to_string(t.n_small) + " -> " + std::to_string(t.n_large) + ", max coordinate KS at n=" +
              std::to_string(config.horizon);
    c.statistic = Statistic::trend;
    c.value = ks[t.n_large] - ks[t.n_small];
    c.threshold = threshold_or(config, "trend", 0.0);
    c.samples_a = c.samples_b = t.n_paths;
    c.tolerance = config.tolerance;
    c.settle();
    report.comparisons.push_back(c);
    report.extra["trend"] = {{"N", {t.n_small, t.n_large}}, {"ks", {ks[t.n_small], ks[t.n_large]}}};
  }
  return report;
}

ExperimentReport experiment_intertwine(const ExperimentConfig& config) {
  ExperimentReport report{config, {}, {}};
  const IntertwiningReport r = check_intertwining(config.q, config.k, config.bound);
  ComparisonReport c;
  c.label = "L_" + std::to_string(config.k) + " Q_" + std::to_string(config.k) + " = S_" + std::to_string(config.k) + " L_" +
            std::to_string(config.k) + ", bound " + std::to_string(config.bound);
  c.statistic = Statistic::max_abs;
  c.value = to_double(r.max_discrepancy);
  c.exact_value = to_fraction_string(r.max_discrepancy);
  c.threshold = threshold_or(config, "max_abs", 0.0);
  c.tolerance = config.tolerance;
  c.settle();
  report.comparisons.push_back(c);
  json violations = json::array();
  for (const auto& v : r.violations) {
    violations.push_back({{"source", {v.source.z, v.source.y}},
                          {"target", {v.target.x, v.target.z, v.target.y}},
                          {"left", to_fraction_string(v.left)},
                          {"right", to_fraction_string(v.right)}});
  }
  report.extra = {{"source_states", r.source_states},
                  {"target_states", r.target_states},
                  {"cases", r.cases},
                  {"max_discrepancy", c.exact_value},
                  {"violations", violations}};
  return report;
}

ExperimentReport experiment_desintegration(const ExperimentConfig& config) {
  ExperimentReport report{config, {}, {}};
  const DesintegrationReport r = check_desintegration(config.q, config.bound);
  Rational worst(0);
  json violations = json::array();
  for (const auto& v : r.violations) {
    worst = std::max(worst, Rational(abs(v.lhs - v.rhs)));
    violations.push_back(
        {{"identity", v.identity}, {"arguments", v.arguments}, {"lhs", to_fraction_string(v.lhs)}, {"rhs", to_fraction_string(v.rhs)}});
  }
  ComparisonReport c;
  c.label = "identities (1)-(4), bound " + std::to_string(config.bound);
  c.statistic = Statistic::max_abs;
  c.value = to_double(worst);
  c.exact_value = to_fraction_string(worst);
  c.threshold = threshold_or(config, "max_abs", 0.0);
  c.tolerance = config.tolerance;
  c.settle();
  // a violation list can be truncated; any entry at all is a failure
  if (!r.violations.empty()) c.pass = false;
  report.comparisons.push_back(c);
  report.extra = {{"cases", r.cases}, {"violations", violations}};
  return report;
}

ExperimentReport experiment_kernel_dump(const ExperimentConfig& config) {
  ExperimentReport report{config, {}, {}};
  const Kernels<Rational> kernels(config.q);
  const int d = config.d > 0 ? config.d : config.k + 1;
  json entries = json::array();
  Rational deficit(0);
  if (config.kernel == "p_d" || config.kernel == "r_k") {
    const auto law = config.kernel == "p_d" ? kernels.p_d_row(d, config.lambda, config.radius)
                                            : kernels.r_k_row(config.k, config.lambda, config.radius);
    for (const auto& [state, p] : law.support) entries.push_back({{"state", state}, {"probability", to_fraction_string(p)}});
    deficit = law.tail_deficit;
  } else if (config.kernel == "s_k") {
    const auto law = kernels.s_k_row(config.k, config.lambda, config.radius);
    for (const auto& [state, p] : law.support) {
      entries.push_back({{"state", {{"z", state.z}, {"y", state.y}}}, {"probability", to_fraction_string(p)}});
    }
    deficit = law.tail_deficit;
  } else {
    for (int m = 0; m <= config.radius; ++m) {
      entries.push_back({{"state", m}, {"probability", to_fraction_string(kernels.nu_pmf(d, m))}});
    }
    deficit = kernels.nu_tail_bound(d, config.radius);
  }
  report.extra = {{"kernel", config.kernel},
                  {"q", to_fraction_string(config.q)},
                  {"from", config.lambda},
                  {"radius", config.radius},
                  {"deficit", to_fraction_string(deficit)},
                  {"entries", entries}};
  Sink(config.output).json_file("kernel.json", report.extra);
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  ExperimentReport report;
  switch (config.experiment) {
    case ExperimentKind::markov_marginal: report = experiment_markov_marginal(config); break;
    case ExperimentKind::small_q: report = experiment_small_q(config); break;
    case ExperimentKind::large_q: report = experiment_large_q(config); break;
    case ExperimentKind::intertwine: report = experiment_intertwine(config); break;
    case ExperimentKind::desintegration: report = experiment_desintegration(config); break;
    case ExperimentKind::kernel_dump: report = experiment_kernel_dump(config); break;
  }
  Sink(config.output).json_file("report.json", report_to_json(report));
  return report;
}

}  // namespace sogt

#include "sogt/cli.hpp"

#include "sogt/dynamics.hpp"
#include "sogt/harness.hpp"
#include "sogt/kernels.hpp"
#include "sogt/spectra.hpp"
#include "sogt/stats.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>

namespace sogt {

using nlohmann::json;

namespace {

constexpr int kFailed = 1;
constexpr int kUsage = 2;

Rational parse_q(const std::string& text) {
  const Rational q = parse_rational(text);
  if (q <= 0 || q >= 1) throw ContractViolation("q must lie in (0, 1), got '" + text + "'");
  return q;
}

// stdout when path is empty
class OutputFile {
 public:
  OutputFile(const std::string& path, std::ostream& fallback) {
    if (path.empty()) {
      stream_ = &fallback;
      return;
    }
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    file_.open(path);
    if (!file_) throw ContractViolation("cannot write '" + path + "'");
    stream_ = &file_;
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_ = nullptr;
};

void write_histogram_csv(const std::string& path, const Histogram<Pattern>& hist) {
  OutputFile file(path, std::cout);
  file.get() << "state,count\n";
  for (const auto& [s, c] : hist.counts()) file.get() << '"' << format_pattern(s) << "\"," << c << '\n';
}

std::string join(const std::string& dir, const std::string& name) { return (std::filesystem::path(dir) / name).string(); }

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Orthogonal Gelfand-Tsetlin particle dynamics, kernels and checks", "sogt"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "discrete-time dynamics from the zero pattern");
  int sim_k = 0;
  std::string sim_q;
  int sim_horizon = 1;
  std::size_t sim_paths = 1;
  std::uint64_t sim_seed = 0;
  std::string sim_mode = "inverse-cdf";
  std::string sim_out;
  simulate->add_option("--k", sim_k, "depth")->required()->check(CLI::Range(1, 64));
  simulate->add_option("--q", sim_q, "jump parameter, num/den or decimal")->required();
  simulate->add_option("--horizon", sim_horizon, "integer time steps")->check(CLI::Range(0, 1 << 20));
  simulate->add_option("--paths", sim_paths)->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim_seed);
  simulate->add_option("--mode", sim_mode)->check(CLI::IsMember({"inverse-cdf", "counted"}));
  simulate->add_option("--out", sim_out, "directory for trajectories.jsonl and final.csv; JSONL to stdout if absent");

  // ctmc
  auto* ctmc = app.add_subcommand("ctmc", "continuous-time dynamics from the zero pattern");
  int ct_k = 0;
  double ct_t = 1.0;
  std::size_t ct_paths = 1;
  std::uint64_t ct_seed = 0;
  bool ct_events = false;
  std::string ct_out;
  ctmc->add_option("--k", ct_k)->required()->check(CLI::Range(1, 64));
  ctmc->add_option("--t", ct_t, "final time")->check(CLI::NonNegativeNumber);
  ctmc->add_option("--paths", ct_paths)->check(CLI::PositiveNumber);
  ctmc->add_option("--seed", ct_seed);
  ctmc->add_flag("--events", ct_events, "write every clock ring to events.jsonl");
  ctmc->add_option("--out", ct_out, "directory for final.csv (and events.jsonl); JSONL to stdout if absent");

  // kernel
  auto* kernel = app.add_subcommand("kernel", "one row of a transition kernel, exact");
  std::string ke_name = "r_k";
  int ke_k = 1;
  int ke_d = 0;
  std::string ke_q;
  std::string ke_lambda;
  std::string ke_to;
  int ke_radius = 20;
  std::string ke_out;
  kernel->add_option("--kernel", ke_name)->check(CLI::IsMember({"p_d", "r_k", "s_k", "nu"}));
  kernel->add_option("--k", ke_k)->check(CLI::Range(1, 64));
  kernel->add_option("--d", ke_d)->check(CLI::Range(3, 64));
  kernel->add_option("--q", ke_q)->required();
  kernel->add_option("--lambda", ke_lambda, "source state, comma separated");
  kernel->add_option("--to", ke_to, "target state: print this single probability");
  kernel->add_option("--radius", ke_radius)->check(CLI::Range(0, 100000));
  kernel->add_option("--out", ke_out, "JSON file; stdout if absent");

  // pieri
  auto* pieri = app.add_subcommand("pieri", "multiplicities of V_beta in V_lambda x V_gamma_m");
  int pi_d = 3;
  std::string pi_lambda;
  int pi_m = 0;
  pieri->add_option("--d", pi_d)->required()->check(CLI::Range(3, 64));
  pieri->add_option("--lambda", pi_lambda)->required();
  pieri->add_option("--m", pi_m)->required()->check(CLI::NonNegativeNumber);

  // count
  auto* count = app.add_subcommand("count", "number of patterns with a given top row");
  int co_k = 1;
  std::string co_lambda;
  count->add_option("--k", co_k)->required()->check(CLI::Range(1, 64));
  count->add_option("--lambda", co_lambda)->required();

  // intertwine
  auto* intertwine = app.add_subcommand("intertwine", "exact check of L_k Q_k = S_k L_k");
  int in_k = 2;
  std::string in_q;
  int in_bound = 3;
  intertwine->add_option("--k", in_k)->required()->check(CLI::Range(1, 6));
  intertwine->add_option("--q", in_q)->required();
  intertwine->add_option("--bound", in_bound)->check(CLI::Range(0, 64));

  // desintegration
  auto* desintegration = app.add_subcommand("desintegration", "exact check of the one-dimensional identities");
  std::string de_q;
  int de_bound = 6;
  desintegration->add_option("--q", de_q)->required();
  desintegration->add_option("--bound", de_bound)->check(CLI::Range(0, 64));

  // experiment
  auto* experiment = app.add_subcommand("experiment", "run an experiment and write report.json");
  std::string ex_name;
  std::string ex_config;
  std::vector<std::string> ex_thresholds;
  ExperimentConfig ex;
  std::string ex_q;
  std::string ex_lambda;
  std::size_t trend_paths = 0;
  std::vector<int> trend_n;
  experiment->add_option("name", ex_name, "markov-marginal, small-q, large-q, intertwine, desintegration, kernel-dump");
  experiment->add_option("--config", ex_config, "JSON config; flags override its fields")->check(CLI::ExistingFile);
  auto* o_k = experiment->add_option("--k", ex.k);
  auto* o_d = experiment->add_option("--d", ex.d);
  auto* o_q = experiment->add_option("--q", ex_q);
  auto* o_h = experiment->add_option("--horizon", ex.horizon);
  auto* o_t = experiment->add_option("--t", ex.t_max);
  auto* o_n = experiment->add_option("--N", ex.big_n);
  auto* o_paths = experiment->add_option("--paths", ex.n_paths);
  auto* o_seed = experiment->add_option("--seed", ex.seed);
  auto* o_radius = experiment->add_option("--radius", ex.radius);
  auto* o_tol = experiment->add_option("--tolerance", ex.tolerance);
  auto* o_bound = experiment->add_option("--bound", ex.bound);
  auto* o_kernel = experiment->add_option("--kernel", ex.kernel);
  auto* o_lambda = experiment->add_option("--lambda", ex_lambda);
  auto* o_traj = experiment->add_option("--trajectories", ex.trajectories, "paths to write to trajectories.jsonl");
  auto* o_out = experiment->add_option("--out", ex.output, "output directory");
  auto* o_trend = experiment->add_option("--trend", trend_n, "N_small N_large")->expected(2);
  auto* o_trend_paths = experiment->add_option("--trend-paths", trend_paths);
  experiment->add_option("--threshold", ex_thresholds, "family=value, e.g. tv=0.02");

  // spectra
  auto* spectra = app.add_subcommand("spectra", "top spectra of the antisymmetric Gaussian matrix chain, CSV");
  int sp_d = 3;
  int sp_steps = 1;
  std::size_t sp_paths = 1;
  std::uint64_t sp_seed = 0;
  std::string sp_out;
  spectra->add_option("--d", sp_d)->required()->check(CLI::Range(2, 256));
  spectra->add_option("--steps", sp_steps)->check(CLI::Range(0, 1 << 20));
  spectra->add_option("--paths", sp_paths)->check(CLI::PositiveNumber);
  spectra->add_option("--seed", sp_seed);
  spectra->add_option("--out", sp_out, "CSV file; stdout if absent");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (*simulate) {
      DiscreteConfig config;
      config.q = parse_q(sim_q);
      config.k = sim_k;
      config.horizon = sim_horizon;
      config.n_paths = sim_paths;
      config.seed = sim_seed;
      config.mode = sim_mode == "counted" ? GeometricMode::counted : GeometricMode::inverse_cdf;
      OutputFile jsonl(sim_out.empty() ? "" : join(sim_out, "trajectories.jsonl"), out);
      Histogram<Pattern> final_states;
      run_discrete(config, [&](std::size_t path, const std::vector<Pattern>& states) {
        for (std::size_t h = 0; h < states.size(); ++h) {
          jsonl.get() << json{{"path", path}, {"time", static_cast<double>(h) / 2}, {"pattern", pattern_json(states[h])}}.dump()
                      << '\n';
        }
        final_states.add(states.back());
      });
      if (!sim_out.empty()) {
        write_histogram_csv(join(sim_out, "final.csv"), final_states);
        out << "simulated " << sim_paths << " paths to " << sim_out << '\n';
      }
      return 0;
    }

    if (*ctmc) {
      OutputFile events(ct_out.empty() || !ct_events ? "" : join(ct_out, "events.jsonl"), out);
      Histogram<Pattern> final_states;
      run_ctmc(ct_k, ct_t, ct_paths, ct_seed, ct_events, [&](std::size_t path, const CtmcPath& p) {
        for (const auto& e : p.events) {
          events.get() << json{{"path", path},
                               {"time", e.time},
                               {"row", e.row},
                               {"index", e.index},
                               {"direction", e.direction == Direction::left ? "left" : "right"},
                               {"moved", e.moved}}
                              .dump()
                       << '\n';
        }
        if (ct_out.empty()) events.get() << json{{"path", path}, {"time", ct_t}, {"pattern", pattern_json(p.final_state)}}.dump() << '\n';
        final_states.add(p.final_state);
      });
      if (!ct_out.empty()) {
        write_histogram_csv(join(ct_out, "final.csv"), final_states);
        out << "simulated " << ct_paths << " paths to " << ct_out << '\n';
      }
      return 0;
    }

    if (*kernel) {
      const Rational q = parse_q(ke_q);
      const Kernels<Rational> kernels(q);
      const int d = ke_d > 0 ? ke_d : ke_k + 1;
      const Row lambda = parse_row(ke_lambda);
      if (!ke_to.empty()) {
        Rational p;
        if (ke_name == "p_d") {
          p = kernels.p_d_closed(d, lambda, parse_row(ke_to));
        } else if (ke_name == "r_k") {
          p = kernels.r_k_pmf(ke_k, lambda, parse_row(ke_to));
        } else if (ke_name == "nu") {
          p = kernels.nu_pmf(d, std::stol(ke_to));
        } else {
          const auto slash = ke_to.find('|');
          if (slash == std::string::npos) throw ContractViolation("s_k target is written z|y");
          p = kernels.s_k_pmf(ke_k, lambda, WPlusPair{parse_row(ke_to.substr(0, slash)), parse_row(ke_to.substr(slash + 1))});
        }
        out << to_fraction_string(p) << '\n';
        return 0;
      }
      ExperimentConfig config;
      config.experiment = ExperimentKind::kernel_dump;
      config.kernel = ke_name;
      config.k = ke_k;
      config.d = d;
      config.q = q;
      config.lambda = lambda;
      config.radius = ke_radius;
      validate_config(config);
      const ExperimentReport report = experiment_kernel_dump(config);
      OutputFile file(ke_out, out);
      file.get() << report.extra.dump(2) << '\n';
      return 0;
    }

    if (*pieri) {
      const Row lambda = parse_row(pi_lambda);
      for (const auto& [beta, mult] : pieri_decompose(pi_d, lambda, pi_m)) out << format_row(beta) << ' ' << mult.get_str() << '\n';
      return 0;
    }

    if (*count) {
      out << count_patterns(co_k, parse_row(co_lambda)).get_str() << '\n';
      return 0;
    }

    if (*intertwine) {
      const IntertwiningReport r = check_intertwining(parse_q(in_q), in_k, in_bound);
      out << "max discrepancy " << to_fraction_string(r.max_discrepancy) << '\n';
      out << "cases " << r.cases << " (" << r.source_states << " sources, " << r.target_states << " targets)\n";
      return r.max_discrepancy == 0 ? 0 : kFailed;
    }

    if (*desintegration) {
      const DesintegrationReport r = check_desintegration(parse_q(de_q), de_bound);
      out << "violations " << r.violations.size() << " of " << r.cases << " cases\n";
      for (const auto& v : r.violations) {
        out << "  identity " << v.identity << " at " << format_row(v.arguments) << ": " << to_fraction_string(v.lhs)
            << " != " << to_fraction_string(v.rhs) << '\n';
      }
      return r.violations.empty() ? 0 : kFailed;
    }

    if (*experiment) {
      ExperimentConfig config;
      if (!ex_config.empty()) {
        config = load_config(ex_config);
        if (!ex_name.empty() && parse_experiment_kind(ex_name) != config.experiment) {
          throw ContractViolation("experiment name does not match the config file");
        }
      } else if (ex_name.empty()) {
        throw ContractViolation("experiment needs a name or --config");
      } else {
        config.experiment = parse_experiment_kind(ex_name);
      }
      if (o_k->count()) config.k = ex.k;
      if (o_d->count()) config.d = ex.d;
      if (o_q->count()) {
        config.q = parse_rational(ex_q);
        config.exact = is_fraction_literal(ex_q);
      }
      if (o_h->count()) config.horizon = ex.horizon;
      if (o_t->count()) config.t_max = ex.t_max;
      if (o_n->count()) config.big_n = ex.big_n;
      if (o_paths->count()) config.n_paths = ex.n_paths;
      if (o_seed->count()) config.seed = ex.seed;
      if (o_radius->count()) config.radius = ex.radius;
      if (o_tol->count()) config.tolerance = ex.tolerance;
      if (o_bound->count()) config.bound = ex.bound;
      if (o_kernel->count()) config.kernel = ex.kernel;
      if (o_lambda->count()) config.lambda = parse_row(ex_lambda);
      if (o_traj->count()) config.trajectories = ex.trajectories;
      if (o_out->count()) config.output = ex.output;
      if (o_trend->count()) {
        TrendConfig t = config.trend.value_or(TrendConfig{});
        t.n_small = trend_n[0];
        t.n_large = trend_n[1];
        if (t.n_paths == 0) t.n_paths = config.n_paths;
        config.trend = t;
      }
      if (o_trend_paths->count()) {
        if (!config.trend) throw ContractViolation("--trend-paths needs --trend");
        config.trend->n_paths = trend_paths;
      }
      for (const auto& item : ex_thresholds) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ContractViolation("--threshold expects family=value, got '" + item + "'");
        config.thresholds[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
      }
      const ExperimentReport report = run_experiment(config);
      out << summarize(report);
      if (config.experiment == ExperimentKind::kernel_dump && config.output.empty()) out << report.extra.dump(2) << '\n';
      return report.pass() ? 0 : kFailed;
    }

    if (*spectra) {
      OutputFile file(sp_out, out);
      file.get() << "path,n";
      for (int i = 1; i <= sp_d / 2; ++i) file.get() << ",lambda" << i;
      file.get() << '\n' << std::setprecision(17);
      const auto chain = simulate_eigen_chain(sp_d, sp_steps, sp_paths, sp_seed);
      for (std::size_t path = 0; path < chain.size(); ++path) {
        for (std::size_t n = 0; n < chain[path].size(); ++n) {
          file.get() << path << ',' << n;
          for (double v : chain[path][n]) file.get() << ',' << v;
          file.get() << '\n';
        }
      }
      return 0;
    }
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const TruncationError& e) {
    err << "error: " << e.what() << " (deficit " << e.deficit << ")\n";
    return kFailed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailed;
  }
  return kUsage;
}

}  // namespace sogt

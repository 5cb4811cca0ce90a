#include "sogt/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>

namespace sogt {

namespace {

constexpr int kInfinity = std::numeric_limits<int>::max();

bool is_wall(int row, int index) { return row % 2 == 1 && static_cast<std::size_t>(index) == row_length(row); }

}  // namespace

NoiseDraw NoiseDraw::zero(int k) {
  NoiseDraw noise;
  for (int i = 1; i <= k; ++i) {
    noise.xi_half.emplace_back(row_length(i), 0);
    noise.xi_full.emplace_back(row_length(i), 0);
  }
  return noise;
}

NoiseDraw draw_noise(int k, const GeometricSampler& sampler, Engine& engine) {
  NoiseDraw noise = NoiseDraw::zero(k);
  // half-step draws first, then the full-step ones, each in lexicographic order
  for (Row& row : noise.xi_half) {
    for (int& v : row) v = sampler(engine);
  }
  for (Row& row : noise.xi_full) {
    for (int& v : row) v = sampler(engine);
  }
  return noise;
}

Pattern half_step_left(const Pattern& x, const NoiseDraw& noise) {
  Pattern out = x;
  // row 1 is a single wall particle: it only moves at integer times
  for (int l = 2; l <= x.depth(); ++l) {
    const Row& below_old = x.row(l - 1);
    const Row& below_new = out.row(l - 1);
    Row& row = out.rows[static_cast<std::size_t>(l - 1)];
    const int free_count = l / 2;
    for (std::size_t i = 1; i <= row.size(); ++i) {
      // pushed by the already-updated lower row
      int pushed = row[i - 1];
      if (i >= 2) pushed = std::min(pushed, below_new[i - 2]);
      if (static_cast<int>(i) <= free_count) {
        row[i - 1] = std::max(below_old[i - 1], pushed - noise.xi_half[static_cast<std::size_t>(l - 1)][i - 1]);
      } else {
        row[i - 1] = pushed;
      }
    }
  }
  return out;
}

Pattern full_step_right(const Pattern& x_half, const NoiseDraw& noise) {
  Pattern out = x_half;
  for (int l = 1; l <= x_half.depth(); ++l) {
    Row& row = out.rows[static_cast<std::size_t>(l - 1)];
    const auto lu = static_cast<std::size_t>(l - 1);
    for (std::size_t i = 1; i <= row.size(); ++i) {
      int lower_new = 0;
      if (l >= 2 && i <= out.row(l - 1).size()) lower_new = out.row(l - 1)[i - 1];
      const int pushed = std::max(lower_new, x_half.row(l)[i - 1]);
      const int cap = (l >= 2 && i >= 2) ? x_half.row(l - 1)[i - 2] : kInfinity;
      const int jump = noise.xi_full[lu][i - 1];
      if (is_wall(l, static_cast<int>(i))) {
        row[i - 1] = std::min(std::abs(pushed + jump - noise.xi_half[lu][i - 1]), cap);
      } else {
        row[i - 1] = cap == kInfinity ? pushed + jump : std::min(cap, pushed + jump);
      }
    }
  }
  return out;
}

StepResult discrete_step(const Pattern& x, const NoiseDraw& noise) {
  StepResult result{half_step_left(x, noise), Pattern{}};
  result.next = full_step_right(result.half, noise);
  return result;
}

void run_discrete(const DiscreteConfig& config, const DiscretePathVisitor& visit) {
  if (config.k < 1) throw ContractViolation("run_discrete: k must be positive");
  if (config.horizon < 0) throw ContractViolation("run_discrete: horizon must be non-negative");
  const GeometricSampler sampler(config.q, config.mode);
  std::vector<Pattern> states;
  states.reserve(static_cast<std::size_t>(2 * config.horizon + 1));
  for (std::size_t path = 0; path < config.n_paths; ++path) {
    Engine engine = path_engine(config.seed, path);
    states.clear();
    states.push_back(Pattern::zero(config.k));
    for (int n = 0; n < config.horizon; ++n) {
      const NoiseDraw noise = draw_noise(config.k, sampler, engine);
      StepResult step = discrete_step(states.back(), noise);
      states.push_back(std::move(step.half));
      states.push_back(std::move(step.next));
    }
    visit(path, states);
  }
}

TrajectoryStore::TrajectoryStore(int k, int horizon, int snapshot_every)
    : k_(k), horizon_(horizon), snapshot_every_(std::max(1, snapshot_every)) {}

std::vector<int> TrajectoryStore::flatten(const Pattern& p) const {
  std::vector<int> flat;
  for (const Row& row : p.rows) flat.insert(flat.end(), row.begin(), row.end());
  return flat;
}

Pattern TrajectoryStore::unflatten(const std::vector<int>& flat) const {
  Pattern p;
  std::size_t at = 0;
  for (int i = 1; i <= k_; ++i) {
    const std::size_t n = row_length(i);
    p.rows.emplace_back(flat.begin() + static_cast<long>(at), flat.begin() + static_cast<long>(at + n));
    at += n;
  }
  return p;
}

void TrajectoryStore::append(const std::vector<Pattern>& states) {
  if (states.size() != static_cast<std::size_t>(2 * horizon_ + 1)) {
    throw ContractViolation("TrajectoryStore: path has the wrong number of states");
  }
  Path path;
  std::vector<int> previous;
  for (std::size_t h = 0; h < states.size(); ++h) {
    std::vector<int> flat = flatten(states[h]);
    path.offsets.push_back(static_cast<std::uint32_t>(path.changes.size()));
    if (h % static_cast<std::size_t>(snapshot_every_) == 0) {
      path.snapshots.push_back(flat);
    } else {
      for (std::size_t s = 0; s < flat.size(); ++s) {
        if (flat[s] != previous[s]) path.changes.push_back({static_cast<std::uint32_t>(s), flat[s]});
      }
    }
    previous = std::move(flat);
  }
  path.offsets.push_back(static_cast<std::uint32_t>(path.changes.size()));
  paths_.push_back(std::move(path));
}

Pattern TrajectoryStore::at(std::size_t path_index, int half_index) const {
  if (path_index >= paths_.size() || half_index < 0 || half_index > 2 * horizon_) {
    throw ContractViolation("TrajectoryStore::at: index out of range");
  }
  const Path& path = paths_[path_index];
  const auto h = static_cast<std::size_t>(half_index);
  const std::size_t base = h / static_cast<std::size_t>(snapshot_every_);
  std::vector<int> flat = path.snapshots[base];
  for (std::size_t step = base * static_cast<std::size_t>(snapshot_every_) + 1; step <= h; ++step) {
    for (std::uint32_t c = path.offsets[step]; c < path.offsets[step + 1]; ++c) {
      flat[path.changes[c].slot] = path.changes[c].value;
    }
  }
  return unflatten(flat);
}

TrajectoryStore simulate_discrete(const DiscreteConfig& config) {
  TrajectoryStore store(config.k, config.horizon);
  run_discrete(config, [&](std::size_t, const std::vector<Pattern>& states) { store.append(states); });
  return store;
}

// ---------------------------------------------------------------------------

bool ctmc_attempt(Pattern& y, int row, int index, Direction direction) {
  const int k = y.depth();
  if (row < 1 || row > k || index < 1 || static_cast<std::size_t>(index) > row_length(row)) {
    throw ContractViolation("ctmc_attempt: no particle at that position");
  }
  const int v = y.at(row, index);

  if (direction == Direction::left) {
    if (is_wall(row, index)) {
      // reflected by 0
      if (v == 0) return ctmc_attempt(y, row, index, Direction::right);
      y.at(row, index) = v - 1;
      return true;
    }
    if (y.at(row - 1, index) == v) return false;
    int top = row;
    while (top + 1 <= k && static_cast<std::size_t>(index + top + 1 - row) <= row_length(top + 1) &&
           y.at(top + 1, index + top + 1 - row) == v) {
      ++top;
    }
    for (int r = row; r <= top; ++r) y.at(r, index + r - row) -= 1;
    return true;
  }

  if (index >= 2 && y.at(row - 1, index - 1) == v) return false;
  int top = row;
  while (top + 1 <= k && static_cast<std::size_t>(index) <= row_length(top + 1) && y.at(top + 1, index) == v) ++top;
  for (int r = row; r <= top; ++r) y.at(r, index) += 1;
  return true;
}

CtmcPath ctmc_path(int k, double t_max, Engine& engine, bool record_events) {
  if (k < 1) throw ContractViolation("ctmc_path: k must be positive");
  if (!(t_max > 0)) throw ContractViolation("ctmc_path: t_max must be positive");
  std::vector<std::pair<int, int>> particles;
  for (int i = 1; i <= k; ++i) {
    for (int j = 1; j <= static_cast<int>(row_length(i)); ++j) particles.emplace_back(i, j);
  }
  // one rate-1 clock per (particle, direction): the next ring is Exp(2P) and picks a clock uniformly
  const double total_rate = 2.0 * static_cast<double>(particles.size());
  std::exponential_distribution<double> wait(total_rate);
  std::uniform_int_distribution<std::size_t> pick(0, 2 * particles.size() - 1);

  CtmcPath result{{}, Pattern::zero(k)};
  double t = 0;
  while (true) {
    t += wait(engine);
    if (t > t_max) break;
    const std::size_t clock = pick(engine);
    const auto [row, index] = particles[clock / 2];
    const Direction direction = clock % 2 == 0 ? Direction::left : Direction::right;
    const bool moved = ctmc_attempt(result.final_state, row, index, direction);
    if (record_events) result.events.push_back({t, row, index, direction, moved});
  }
  return result;
}

void run_ctmc(int k, double t_max, std::size_t n_paths, std::uint64_t seed, bool record_events,
              const CtmcPathVisitor& visit) {
  for (std::size_t path = 0; path < n_paths; ++path) {
    Engine engine = path_engine(seed ^ 0x9e3779b97f4a7c15ULL, path);
    visit(path, ctmc_path(k, t_max, engine, record_events));
  }
}

Rational generator_rate(int k, std::span<const int> lambda, std::span<const int> beta) {
  if (k < 1) throw ContractViolation("generator_rate: k must be positive");
  if (lambda.size() != row_length(k) || !is_integer_row(lambda)) {
    throw ContractViolation("generator_rate: lambda is not a non-negative row " + std::to_string(k));
  }
  if (beta.size() != lambda.size()) throw ContractViolation("generator_rate: beta must be lambda ± e_i");
  int differing = 0;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const int gap = std::abs(beta[i] - lambda[i]);
    if (gap > 1) throw ContractViolation("generator_rate: beta must be lambda ± e_i");
    differing += gap;
  }
  if (differing != 1) throw ContractViolation("generator_rate: beta must be lambda ± e_i");
  if (!is_integer_row(beta)) return Rational(0);
  Rational rate(count_patterns(k, beta), count_patterns(k, lambda));
  rate.canonicalize();
  if (k % 2 == 1 && lambda.back() == 0 && beta.back() == 1) rate *= 2;
  return rate;
}

SparseLaw<Row, double> generator_semigroup_law(int k, double t, int radius) {
  if (t < 0) throw ContractViolation("generator_semigroup_law: t must be non-negative");
  const std::vector<Row> states = bounded_rows(row_length(k), radius);
  std::map<Row, std::size_t> index;
  for (std::size_t s = 0; s < states.size(); ++s) index.emplace(states[s], s);

  struct Move {
    std::size_t to;
    double rate;
  };
  std::vector<std::vector<Move>> moves(states.size());
  std::vector<double> exit(states.size(), 0.0);
  for (std::size_t s = 0; s < states.size(); ++s) {
    for (std::size_t i = 0; i < states[s].size(); ++i) {
      for (int delta : {-1, 1}) {
        Row beta = states[s];
        beta[i] += delta;
        const double rate = generator_rate(k, states[s], beta).get_d();
        if (rate == 0) continue;
        exit[s] += rate;
        if (const auto it = index.find(beta); it != index.end()) moves[s].push_back({it->second, rate});
      }
    }
  }
  const double uniform_rate = std::max(1e-12, *std::max_element(exit.begin(), exit.end()));

  std::vector<double> current(states.size(), 0.0);
  current[index.at(Row(row_length(k), 0))] = 1.0;
  std::vector<double> result(states.size(), 0.0);
  const double mean = uniform_rate * t;
  double weight = std::exp(-mean);
  double cumulative = 0;
  for (int n = 0; n < 100000; ++n) {
    for (std::size_t s = 0; s < states.size(); ++s) result[s] += weight * current[s];
    cumulative += weight;
    if (1.0 - cumulative < 1e-15 && n > mean) break;
    std::vector<double> next(states.size(), 0.0);
    for (std::size_t s = 0; s < states.size(); ++s) {
      if (current[s] == 0) continue;
      next[s] += current[s] * (1.0 - exit[s] / uniform_rate);
      for (const Move& m : moves[s]) next[m.to] += current[s] * m.rate / uniform_rate;
    }
    current = std::move(next);
    weight *= mean / (n + 1);
  }

  SparseLaw<Row, double> law;
  double kept = 0;
  for (std::size_t s = 0; s < states.size(); ++s) {
    if (result[s] > 0) {
      law.support.emplace(states[s], result[s]);
      kept += result[s];
    }
  }
  law.tail_deficit = std::max(0.0, 1.0 - kept);
  return law;
}

WallRateEstimate estimate_wall_rate(double t_max, std::size_t n_paths, std::uint64_t seed) {
  WallRateEstimate estimate;
  run_ctmc(1, t_max, n_paths, seed, true, [&](std::size_t, const CtmcPath& path) {
    int state = 0;
    double last = 0;
    for (const CtmcEvent& event : path.events) {
      if (state == 0) estimate.time_at_zero += event.time - last;
      last = event.time;
      if (!event.moved) continue;
      const int next = state + ((event.direction == Direction::right || state == 0) ? 1 : -1);
      if (state == 0 && next == 1) ++estimate.jumps;
      state = next;
    }
    if (state == 0) estimate.time_at_zero += t_max - last;
  });
  estimate.rate = estimate.time_at_zero > 0 ? static_cast<double>(estimate.jumps) / estimate.time_at_zero : 0.0;
  return estimate;
}

}  // namespace sogt

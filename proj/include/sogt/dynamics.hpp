#pragma once

// Particle dynamics on Gelfand-Tsetlin patterns: the discrete-time model X
// (left half-steps, right full steps, pushing and blocking) and the
// continuous-time model Y with one exponential clock per particle and direction.

#include "sogt/gt.hpp"
#include "sogt/kernels.hpp"
#include "sogt/rng.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace sogt {

/// Jump sizes for one time step. Indexed like a pattern: xi_half[i-1][j-1] is xi^i_j(n+1/2).
struct NoiseDraw {
  std::vector<Row> xi_half;
  std::vector<Row> xi_full;

  static NoiseDraw zero(int k);
};

NoiseDraw draw_noise(int k, const GeometricSampler& sampler, Engine& engine);

/// X(n) -> X(n+1/2). Particles jump left in lexicographic order, rows downward.
Pattern half_step_left(const Pattern& x, const NoiseDraw& noise);

/// X(n+1/2) -> X(n+1). Particles jump right; wall particles take the reflected step.
Pattern full_step_right(const Pattern& x_half, const NoiseDraw& noise);

struct StepResult {
  Pattern half;
  Pattern next;
};
StepResult discrete_step(const Pattern& x, const NoiseDraw& noise);

struct DiscreteConfig {
  Rational q;
  int k = 1;
  int horizon = 1;
  std::size_t n_paths = 1;
  std::uint64_t seed = 0;
  GeometricMode mode = GeometricMode::inverse_cdf;
};

/// states[2n] = X(n), states[2n+1] = X(n+1/2).
using DiscretePathVisitor = std::function<void(std::size_t path, const std::vector<Pattern>& states)>;

/// Runs every path from the zero pattern and hands each finished path to `visit`, in path order.
void run_discrete(const DiscreteConfig& config, const DiscretePathVisitor& visit);

/// Delta-encoded storage of discrete trajectories on the half-integer grid.
class TrajectoryStore {
 public:
  TrajectoryStore(int k, int horizon, int snapshot_every = 16);

  void append(const std::vector<Pattern>& states);
  std::size_t n_paths() const { return paths_.size(); }
  int horizon() const { return horizon_; }
  int depth() const { return k_; }
  /// Pattern of `path` at time half_index / 2.
  Pattern at(std::size_t path, int half_index) const;

 private:
  struct Change {
    std::uint32_t slot;
    int value;
  };
  struct Path {
    std::vector<std::vector<int>> snapshots;  // flattened patterns
    std::vector<Change> changes;
    std::vector<std::uint32_t> offsets;  // changes for half step h start at offsets[h]
  };
  std::vector<int> flatten(const Pattern& p) const;
  Pattern unflatten(const std::vector<int>& flat) const;

  int k_;
  int horizon_;
  int snapshot_every_;
  std::vector<Path> paths_;
};

TrajectoryStore simulate_discrete(const DiscreteConfig& config);

// ---------------------------------------------------------------------------
// Continuous time

enum class Direction { left, right };

struct CtmcEvent {
  double time;
  int row;    // 1-based
  int index;  // 1-based
  Direction direction;
  bool moved;
};

/// One clock ring of particle (row, index). Applies blocking, pushing and the
/// wall reflection in place; returns whether anything moved.
bool ctmc_attempt(Pattern& y, int row, int index, Direction direction);

struct CtmcPath {
  std::vector<CtmcEvent> events;  // only filled when recording
  Pattern final_state;
};

CtmcPath ctmc_path(int k, double t_max, Engine& engine, bool record_events);

using CtmcPathVisitor = std::function<void(std::size_t path, const CtmcPath& result)>;

void run_ctmc(int k, double t_max, std::size_t n_paths, std::uint64_t seed, bool record_events,
              const CtmcPathVisitor& visit);

/// Off-diagonal generator entry A_k(lambda, beta) for beta = lambda ± e_i.
Rational generator_rate(int k, std::span<const int> lambda, std::span<const int> beta);

/// Law at time t of the chain with generator A_k started at 0, on rows with entries <= radius,
/// by uniformization. Mass that leaves the box or falls in the Poisson tail goes to tail_deficit.
SparseLaw<Row, double> generator_semigroup_law(int k, double t, int radius);

/// Empirical rate of the jump 0 -> 1 of Y^1: number of such jumps over time spent at 0.
struct WallRateEstimate {
  double rate = 0;
  double time_at_zero = 0;
  std::size_t jumps = 0;
};
WallRateEstimate estimate_wall_rate(double t_max, std::size_t n_paths, std::uint64_t seed);

}  // namespace sogt

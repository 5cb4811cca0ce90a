#include "doctest.h"
#include "sogt/dynamics.hpp"
#include "sogt/stats.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <map>
#include <tuple>

using namespace sogt;

namespace {

Pattern make(std::vector<Row> rows) { return Pattern(std::move(rows)); }

bool non_negative(const Pattern& p) {
  for (const Row& row : p.rows) {
    for (int v : row) {
      if (v < 0) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("half step examples") {
  NoiseDraw any = NoiseDraw::zero(3);
  any.xi_half = {Row{4}, Row{7}, Row{2, 9}};
  CHECK(half_step_left(Pattern::zero(3), any) == Pattern::zero(3));

  NoiseDraw noise = NoiseDraw::zero(2);
  noise.xi_half[1][0] = 5;
  CHECK(half_step_left(make({Row{1}, Row{3}}), noise).row(2) == Row{1});

  NoiseDraw push = NoiseDraw::zero(3);
  push.xi_half[1][0] = 2;
  const Pattern after = half_step_left(make({Row{0}, Row{2}, Row{2, 1}}), push);
  CHECK(after.row(2) == Row{0});
  CHECK(after.at(3, 2) == 0);
  CHECK(after.at(3, 1) == 2);
}

TEST_CASE("full step examples") {
  CHECK(full_step_right(Pattern::zero(4), NoiseDraw::zero(4)) == Pattern::zero(4));

  NoiseDraw one = NoiseDraw::zero(1);
  one.xi_full[0][0] = 0;
  one.xi_half[0][0] = 5;
  CHECK(full_step_right(make({Row{2}}), one).at(1, 1) == 3);

  NoiseDraw two = NoiseDraw::zero(2);
  two.xi_full[0][0] = 3;
  two.xi_half[0][0] = 0;
  two.xi_full[1][0] = 2;
  const Pattern next = full_step_right(make({Row{1}, Row{1}}), two);
  CHECK(next.at(1, 1) == 4);
  CHECK(next.at(2, 1) == 6);
}

TEST_CASE("zero noise leaves a pattern unchanged") {
  const Pattern p = make({Row{2}, Row{3}, Row{3, 1}, Row{4, 2}});
  const StepResult step = discrete_step(p, NoiseDraw::zero(4));
  CHECK(step.half == p);
  CHECK(step.next == p);
}

TEST_CASE("discrete steps preserve validity") {
  Engine engine = path_engine(11, 0);
  for (const Rational& q : {Rational(1, 2), Rational(1, 20), Rational(19, 20)}) {
    const GeometricSampler sampler(q);
    for (int k = 1; k <= 6; ++k) {
      Pattern x = Pattern::zero(k);
      for (int n = 0; n < 20000; ++n) {
        const NoiseDraw noise = draw_noise(k, sampler, engine);
        const StepResult step = discrete_step(x, noise);
        REQUIRE(pattern_is_valid(step.half));
        REQUIRE(pattern_is_valid(step.next));
        REQUIRE(non_negative(step.next));
        // the left half-step never moves a particle right
        for (int i = 1; i <= k; ++i) {
          for (std::size_t j = 0; j < x.row(i).size(); ++j) REQUIRE(step.half.row(i)[j] <= x.row(i)[j]);
        }
        x = step.next;
        if (n % 50 == 0) x = Pattern::zero(k);
      }
    }
  }
}

TEST_CASE("ctmc attempts preserve validity") {
  Engine engine = path_engine(5, 1);
  for (int k = 1; k <= 6; ++k) {
    Pattern y = Pattern::zero(k);
    std::vector<std::pair<int, int>> particles;
    for (int i = 1; i <= k; ++i) {
      for (int j = 1; j <= static_cast<int>(row_length(i)); ++j) particles.emplace_back(i, j);
    }
    std::uniform_int_distribution<std::size_t> pick(0, 2 * particles.size() - 1);
    for (int n = 0; n < 100000; ++n) {
      const std::size_t c = pick(engine);
      ctmc_attempt(y, particles[c / 2].first, particles[c / 2].second, c % 2 ? Direction::right : Direction::left);
      REQUIRE(pattern_is_valid(y));
      REQUIRE(non_negative(y));
    }
  }
}

TEST_CASE("ctmc rules") {
  Pattern y = Pattern::zero(3);
  CHECK(ctmc_attempt(y, 1, 1, Direction::left));
  CHECK(y == make({Row{1}, Row{1}, Row{1, 0}}));

  // blocked to the right by the lower-left neighbour
  Pattern b = make({Row{1}, Row{1}, Row{1, 1}});
  CHECK_FALSE(ctmc_attempt(b, 3, 2, Direction::right));
  // blocked to the left by the particle below
  CHECK_FALSE(ctmc_attempt(b, 2, 1, Direction::left));
  // the wall particle of row 3 steps left freely
  CHECK(ctmc_attempt(b, 3, 2, Direction::left));
  CHECK(b == make({Row{1}, Row{1}, Row{1, 0}}));

  // left push along the diagonal
  Pattern d = make({Row{0}, Row{1}, Row{1, 1}});
  CHECK(ctmc_attempt(d, 2, 1, Direction::left));
  CHECK(d == make({Row{0}, Row{0}, Row{1, 0}}));
  CHECK_THROWS_AS(ctmc_attempt(d, 2, 2, Direction::left), ContractViolation);
}

TEST_CASE("ctmc events are time ordered and reproducible") {
  Engine e1 = path_engine(3, 4);
  Engine e2 = path_engine(3, 4);
  const CtmcPath a = ctmc_path(3, 5.0, e1, true);
  const CtmcPath b = ctmc_path(3, 5.0, e2, true);
  CHECK(a.final_state == b.final_state);
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t i = 1; i < a.events.size(); ++i) CHECK(a.events[i].time > a.events[i - 1].time);
}

TEST_CASE("generator rates") {
  CHECK(generator_rate(1, Row{0}, Row{1}) == 2);
  CHECK(generator_rate(1, Row{3}, Row{2}) == 1);
  CHECK(generator_rate(2, Row{1}, Row{2}) == Rational(5, 3));
  CHECK(generator_rate(3, Row{1, 1}, Row{1, 2}) == 0);
  CHECK(generator_rate(3, Row{1, 0}, Row{1, 1}) == Rational(3, 2));
  CHECK(generator_rate(2, Row{0}, Row{-1}) == 0);
  CHECK_THROWS_AS(generator_rate(2, Row{1}, Row{3}), ContractViolation);
  CHECK_THROWS_AS(generator_rate(3, Row{1, 0}, Row{2, 1}), ContractViolation);
}

TEST_CASE("uniformization against a dense matrix exponential") {
  const int k = 2;
  const int radius = 12;
  const auto states = bounded_rows(row_length(k), radius);
  const auto n = static_cast<Eigen::Index>(states.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index s = 0; s < n; ++s) {
    for (Eigen::Index t = 0; t < n; ++t) {
      if (s == t) continue;
      const Row& from = states[static_cast<std::size_t>(s)];
      const Row& to = states[static_cast<std::size_t>(t)];
      if (std::abs(from[0] - to[0]) == 1) a(s, t) = generator_rate(k, from, to).get_d();
    }
    const Row& from = states[static_cast<std::size_t>(s)];
    double exit = 0;
    for (int delta : {-1, 1}) exit += generator_rate(k, from, Row{from[0] + delta}).get_d();
    a(s, s) = -exit;
  }
  const Eigen::MatrixXd e = (a * 0.7).exp();
  const auto law = generator_semigroup_law(k, 0.7, radius);
  for (Eigen::Index t = 0; t < n; ++t) {
    CHECK(std::abs(law.at(states[static_cast<std::size_t>(t)]) - e(0, t)) < 1e-12);
  }
  CHECK(law.tail_deficit < 1e-6);
}

TEST_CASE("k=1 walk against the exact one-step law") {
  DiscreteConfig config{Rational(1, 2), 1, 1, 100000, 21};
  Histogram<Row> hist;
  run_discrete(config, [&](std::size_t, const std::vector<Pattern>& states) { hist.add(states.back().row(1)); });
  const Kernels<Rational> kernels(config.q);
  const auto exact = to_double_law(kernels.r_k_row(1, Row{0}, 60));
  const auto tv = tv_distance(hist.law(), exact);
  CHECK(tv.distance < 0.01);
  CHECK(tv.deficit_bias < 1e-12);
}

TEST_CASE("Q_2 matches the one-step joint law") {
  const Rational q(1, 2);
  const Kernels<Rational> kernels(q);
  const GeometricSampler sampler(q);
  const Pattern start = make({Row{1}, Row{2}});
  Histogram<std::tuple<int, int, int>> hist;
  for (std::size_t path = 0; path < 100000; ++path) {
    Engine engine = path_engine(99, path);
    const StepResult step = discrete_step(start, draw_noise(2, sampler, engine));
    hist.add({step.next.at(1, 1), step.half.at(2, 1), step.next.at(2, 1)});
  }
  SparseLaw<std::tuple<int, int, int>, double> exact;
  double mass = 0;
  const int box = 30;
  for (int x = 0; x <= box; ++x) {
    for (int z = 0; z <= box; ++z) {
      for (int y = 0; y <= box; ++y) {
        const double p = kernels.q_k_pmf(2, {Row{1}, Row{0}, Row{2}}, {Row{x}, Row{z}, Row{y}}).get_d();
        if (p > 0) exact.support.emplace(std::make_tuple(x, z, y), p);
        mass += p;
      }
    }
  }
  exact.tail_deficit = 1 - mass;
  CHECK(exact.tail_deficit < 1e-6);
  CHECK(tv_distance(hist.law(), exact).distance < 0.02);
}

TEST_CASE("empirical Markov property of the pair (Z^k, Y^k)") {
  const Rational q(1, 2);
  const Kernels<Rational> kernels(q);
  for (int k : {2, 3}) {
    DiscreteConfig config{q, k, 2, k == 2 ? 100000u : 200000u, 1234};
    std::map<Row, Histogram<WPlusPair>> by_start;
    run_discrete(config, [&](std::size_t, const std::vector<Pattern>& states) {
      // Z^k(2) is row k at time 3/2 without its wall particle
      Row z = states[3].row(k);
      if (k % 2 == 1) z.pop_back();
      by_start[states[2].row(k)].add(WPlusPair{z, states[4].row(k)});
    });
    int resolved = 0;
    for (const auto& [y, hist] : by_start) {
      if (hist.total() < 10000) continue;
      const auto exact = to_double_law(kernels.s_k_row(k, y, 40));
      const double tv = tv_distance(hist.law(), exact).distance;
      const double noise = expected_sampling_tv(exact, hist.total());
      CHECK(tv < 3 * noise);
      if (noise <= 0.01) {
        ++resolved;
        CHECK(tv < 0.03);
      }
    }
    CHECK(resolved >= 1);
  }
}

TEST_CASE("trajectory store round trip") {
  DiscreteConfig config{Rational(2, 3), 4, 40, 30, 8};
  std::vector<std::vector<Pattern>> direct;
  run_discrete(config, [&](std::size_t, const std::vector<Pattern>& states) { direct.push_back(states); });
  const TrajectoryStore store = simulate_discrete(config);
  REQUIRE(store.n_paths() == 30);
  for (std::size_t p = 0; p < direct.size(); ++p) {
    for (int h = 0; h <= 80; ++h) CHECK(store.at(p, h) == direct[p][static_cast<std::size_t>(h)]);
  }
  const TrajectoryStore flat = simulate_discrete(DiscreteConfig{Rational(1, 2), 2, 0, 3, 1});
  CHECK(flat.at(2, 0) == Pattern::zero(2));
}

TEST_CASE("geometric sampler modes agree in law") {
  for (GeometricMode mode : {GeometricMode::inverse_cdf, GeometricMode::counted}) {
    const GeometricSampler sampler(Rational(1, 3), mode);
    Engine engine = path_engine(1, 2);
    Histogram<int> hist;
    for (int i = 0; i < 200000; ++i) hist.add(sampler(engine));
    SparseLaw<int, double> exact;
    for (int x = 0; x < 40; ++x) exact.support.emplace(x, (2.0 / 3.0) * std::pow(1.0 / 3.0, x));
    CHECK(tv_distance(hist.law(), exact).distance < 0.01);
  }
}

TEST_CASE("wall rate of Y^1") {
  const WallRateEstimate estimate = estimate_wall_rate(5.0, 20000, 17);
  CHECK(estimate.jumps > 1000);
  CHECK(std::abs(estimate.rate - 2.0) < 0.1);
}

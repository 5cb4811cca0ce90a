// Acceptance run: one PASS/FAIL line per criterion. Exit status 1 if any fails.

#include "oracles.hpp"
#include "sogt/dynamics.hpp"
#include "sogt/gt.hpp"
#include "sogt/harness.hpp"
#include "sogt/kernels.hpp"
#include "sogt/spectra.hpp"
#include "sogt/stats.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#ifndef SOGT_CONFIG_DIR
#define SOGT_CONFIG_DIR "configs"
#endif

using namespace sogt;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o{false, ""};
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("[%s] %d. %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

// every row with entries in [-bound, bound] that can be row k
std::vector<Row> top_rows(int k, int bound) {
  std::vector<Row> out;
  const std::size_t len = row_length(k);
  Row r(len, -bound);
  while (true) {
    if (is_valid_top_row(k, r)) out.push_back(r);
    std::size_t i = 0;
    while (i < len && r[i] == bound) r[i++] = -bound;
    if (i == len) break;
    ++r[i];
  }
  return out;
}

std::vector<Row> weights(int d, int bound) {
  std::vector<Row> out;
  for (const Row& r : top_rows(d - 1, bound)) {
    if (in_weight_set(d, r)) out.push_back(r);
  }
  return out;
}

Outcome config_experiments(const std::vector<std::string>& names) {
  bool pass = true;
  std::string detail;
  for (const auto& name : names) {
    const ExperimentReport report = run_experiment(load_config(std::string(SOGT_CONFIG_DIR) + "/" + name));
    pass = pass && report.pass();
    detail += "\n    " + name + ":";
    for (const auto& c : report.comparisons) {
      detail += "\n      " + std::string(c.pass ? "ok   " : "FAIL ") + c.label + " " + statistic_name(c.statistic) + " " +
                fmt(c.value) + " <= " + fmt(c.threshold);
    }
  }
  return {pass, detail};
}

}  // namespace

int main() {
  criterion(1, "pattern counts equal Weyl dimensions (2 <= k <= 6, entries <= 4)", [] {
    std::size_t cases = 0;
    std::size_t bad = 0;
    // weyl_dimension starts at SO(3)
    for (int k = 2; k <= 6; ++k) {
      for (const Row& lambda : top_rows(k, 4)) {
        ++cases;
        if (count_patterns(k, lambda) != weyl_dimension(k + 1, lambda)) ++bad;
      }
    }
    return Outcome{bad == 0 && cases > 0, std::to_string(cases) + " rows, " + std::to_string(bad) + " mismatches"};
  });

  criterion(2, "nu sums to one with certified deficit < 1e-12", [] {
    bool pass = true;
    double worst = 0;
    for (int d = 3; d <= 5; ++d) {
      for (const Rational& q : {Rational(1, 3), Rational(1, 2), Rational(2, 3)}) {
        const Kernels<Rational> kernels(q);
        const Rational target = power(Rational(1, 10), 12);
        long m = 0;
        while (kernels.nu_tail_bound(d, m) >= target) ++m;
        Rational head = 0;
        for (long i = 0; i <= m; ++i) head += kernels.nu_pmf(d, i);
        const Rational deficit = 1 - head;
        pass = pass && deficit >= 0 && deficit <= kernels.nu_tail_bound(d, m) && deficit < target;
        worst = std::max(worst, to_double(deficit));
      }
    }
    return Outcome{pass, "9 (d, q) pairs, largest deficit " + fmt(worst)};
  });

  criterion(3, "Pieri dimension identity and closed form vs series", [] {
    std::size_t cases = 0;
    std::size_t bad = 0;
    for (int d = 3; d <= 5; ++d) {
      for (const Row& lambda : weights(d, 3)) {
        for (int m = 0; m <= 6; ++m) {
          BigCount total = 0;
          for (const auto& [beta, mult] : pieri_decompose(d, lambda, m)) total += mult * count_patterns(d - 1, beta);
          ++cases;
          if (total != count_patterns(d - 1, lambda) * count_patterns(d - 1, gamma_weight(d, m))) ++bad;
        }
      }
    }
    Engine engine = path_engine(2024, 3);
    std::size_t series_bad = 0;
    Rational worst_gap = 0;
    for (int trial = 0; trial < 50; ++trial) {
      const int d = 3 + trial % 3;
      const std::vector<Row> w = weights(d, 4);
      std::uniform_int_distribution<std::size_t> pick(0, w.size() - 1);
      const Rational q = std::vector<Rational>{Rational(1, 3), Rational(1, 2), Rational(2, 3)}[static_cast<std::size_t>(trial % 3)];
      const Kernels<Rational> kernels(q);
      const Row lambda = w[pick(engine)];
      const Row beta = w[pick(engine)];
      const auto series = kernels.p_d_series(d, lambda, beta, 10);
      const Rational gap = abs(series.value - kernels.p_d_closed(d, lambda, beta));
      worst_gap = std::max(worst_gap, gap);
      if (gap > series.tail_bound) ++series_bad;
    }
    return Outcome{bad == 0 && series_bad == 0, std::to_string(cases) + " Pieri cases, " + std::to_string(bad) +
                                                    " mismatches; 50 series instances, " + std::to_string(series_bad) +
                                                    " outside the tail bound (largest gap " + fmt(to_double(worst_gap)) + ")"};
  });

  criterion(4, "desintegration identities, entries <= 6", [] {
    std::size_t cases = 0;
    std::size_t bad = 0;
    for (const Rational& q : {Rational(1, 3), Rational(1, 2), Rational(2, 3)}) {
      const DesintegrationReport r = check_desintegration(q, 6);
      cases += r.cases;
      bad += r.violations.size();
    }
    return Outcome{bad == 0 && cases > 0, std::to_string(cases) + " cases, " + std::to_string(bad) + " violations"};
  });

  criterion(5, "intertwining L_k Q_k = S_k L_k exactly", [] {
    bool pass = true;
    std::string detail;
    for (const auto& [k, bound] : std::vector<std::pair<int, int>>{{2, 4}, {3, 4}, {4, 3}}) {
      for (const Rational& q : {Rational(1, 3), Rational(1, 2)}) {
        const IntertwiningReport r = check_intertwining(q, k, bound);
        pass = pass && r.max_discrepancy == 0 && r.violations.empty() && r.cases > 0;
        detail += " k=" + std::to_string(k) + " q=" + to_fraction_string(q) + ": " + to_fraction_string(r.max_discrepancy) +
                  " over " + std::to_string(r.cases) + ";";
      }
    }
    return Outcome{pass, "max discrepancy" + detail};
  });

  criterion(6, "X^k(n) against the exact n-step law, 10^5 paths",
            [] { return config_experiments({"markov-marginal-k1.json", "markov-marginal-k2.json", "markov-marginal-k3.json"}); });

  criterion(7, "Y^2(1) against the A_2 semigroup, and the wall rate", [] {
    Histogram<Row> hist;
    run_ctmc(2, 1.0, 100000, 41, false, [&](std::size_t, const CtmcPath& p) { hist.add(p.final_state.row(2)); });
    const auto law = generator_semigroup_law(2, 1.0, 20);
    const auto tv = tv_distance(hist.law(), law);
    const WallRateEstimate wall = estimate_wall_rate(5.0, 100000, 43);
    const double rel = std::abs(wall.rate - 2.0) / 2.0;
    return Outcome{tv.distance < 0.02 && law.tail_deficit < 1e-6 && rel < 0.05,
                   "TV " + fmt(tv.distance) + " (deficit " + fmt(law.tail_deficit) + "), wall rate " + fmt(wall.rate) +
                       " from " + std::to_string(wall.jumps) + " jumps"};
  });

  criterion(8, "q = 1/N: X([N]) against Y(1), and the N = 50 -> 400 trend",
            [] { return config_experiments({"small-q-k1.json", "small-q-k2.json"}); });

  criterion(9, "q = 1 - 1/N: X^k(2)/N against Lambda(2), and the N = 25 -> 200 trend",
            [] { return config_experiments({"large-q-k2.json", "large-q-k3.json"}); });

  criterion(10, "spectra: m_d vs Monte Carlo, mass of p_3, eigensolver agreement", [] {
    Engine engine = path_engine(77, 0);
    double worst_rel = 0;
    std::size_t resolved = 0;
    for (int d = 3; d <= 6; ++d) {
      for (int trial = 0; trial < 8; ++trial) {
        const SpectrumPoint x = oracle::random_interior(d, engine, 3.0);
        SpectrumPoint y = x;
        std::normal_distribution<double> jitter(0.0, 0.3);
        for (double& v : y) v = std::abs(v + jitter(engine));
        std::sort(y.begin(), y.end(), std::greater<>());
        const oracle::Estimate e = oracle::m_d_monte_carlo(d, x, y, 1000000, engine);
        if (e.relative_error > 0.004) continue;
        ++resolved;
        worst_rel = std::max(worst_rel, std::abs(e.value / m_d(d, x, y) - 1));
      }
    }
    const auto f = [](double y) { return p_d_density(3, {1.0}, {y}); };
    const double mass = oracle::simpson(f, 0.0, 1.0, 2000) + oracle::simpson(f, 1.0, 60.0, 60000);
    Engine mats = path_engine(42, 0);
    double worst_eig = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const int d = 2 + trial % 9;
      AntisymmetricMatrix m(d);
      for (int n = 0; n < 1 + trial % 5; ++n) m += sample_increment(d, mats);
      const SpectrumPoint a = top_spectrum(m);
      const SpectrumPoint b = top_spectrum_hermitian(m);
      for (std::size_t i = 0; i < a.size(); ++i) worst_eig = std::max(worst_eig, std::abs(a[i] - b[i]));
    }
    return Outcome{worst_rel < 1e-2 && resolved >= 12 && std::abs(mass - 1) < 1e-3 && worst_eig < 1e-10,
                   "m_d rel err " + fmt(worst_rel) + " over " + std::to_string(resolved) + " points, mass " +
                       std::to_string(mass) + ", eigen diff " + fmt(worst_eig)};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

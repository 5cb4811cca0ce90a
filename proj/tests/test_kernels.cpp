#include "doctest.h"
#include "sogt/kernels.hpp"

#include <cmath>

using namespace sogt;

namespace {
const Rational kHalf(1, 2);
const Rational kThird(1, 3);
}  // namespace

TEST_CASE("jump parameter range") {
  CHECK_THROWS_AS(JumpParam(Rational(0)), ContractViolation);
  CHECK_THROWS_AS(JumpParam(Rational(1)), ContractViolation);
  CHECK_NOTHROW(JumpParam(Rational(1, 7)));
}

TEST_CASE("elementary laws are probability laws") {
  const Kernels<Rational> k(kThird);
  for (long x = 0; x <= 4; ++x) {
    Rational r = 0;
    for (long y = 0; y <= 60; ++y) r += k.r_pmf(x, y);
    CHECK(abs(1 - r) < power(Rational(1, 10), 20));
    for (long a = 0; a <= 5; ++a) {
      Rational left = 0;
      for (long y = 0; y <= 6; ++y) left += k.blocked_left_pmf(a, x, y);
      CHECK(left == 1);
      Rational right = 0;
      for (long y = 0; y <= 6; ++y) right += k.blocked_right_pmf(a, x, y);
      CHECK(right == 1);
      Rational refl = 0;
      for (long y = 0; y <= a; ++y) refl += k.reflected_right_pmf(a, x, y);
      CHECK(refl == 1);
    }
  }
  CHECK(k.r_pmf(0, 0) == Rational(1, 2));
  CHECK(k.reflected_right_pmf(0, 3, 0) == 1);
  CHECK_THROWS_AS(k.r_pmf(-1, 0), ContractViolation);
}

TEST_CASE("P_d closed form against independent series values") {
  const Kernels<Rational> k(kHalf);
  CHECK(k.p_d_closed(3, Row{1}, Row{2}) == Rational(35, 144));
  CHECK(k.p_d_closed(3, Row{0}, Row{0}) == Rational(1, 6));
  CHECK(k.p_d_closed(4, Row{1, 0}, Row{1, 1}) == Rational(1, 32));
  CHECK(k.p_d_closed(4, Row{1, -1}, Row{2, 1}) == Rational(1, 36));
  CHECK(k.p_d_closed(4, Row{2, 1}, Row{0, 0}) == 0);
  CHECK(k.p_d_closed(5, Row{1, 0}, Row{2, 1}) == Rational(7, 96));
  CHECK(k.p_d_closed(5, Row{2, 1}, Row{1, 1}) == Rational(1, 96));
  CHECK(k.p_d_closed(6, Row{1, 1, 0}, Row{2, 1, -1}) == Rational(1, 64));
  CHECK(k.p_d_closed(5, Row{1, 0}, Row{0, 1}) == 0);
  CHECK_THROWS_AS(k.p_d_closed(5, Row{0, 1}, Row{0, 0}), ContractViolation);
}

TEST_CASE("series and closed form agree") {
  const Kernels<Rational> k(kThird);
  for (int d = 3; d <= 6; ++d) {
    const Row lambda = gamma_weight(d, 1);
    for (const auto& [beta, mult] : pieri_decompose(d, lambda, 3)) {
      const auto series = k.p_d_series(d, lambda, beta, 12);
      CHECK(series.tail_bound == 0);
      CHECK(series.value == k.p_d_closed(d, lambda, beta));
      (void)mult;
    }
  }
  const auto cut = k.p_d_series(3, Row{0}, Row{4}, 2);
  CHECK(cut.value == 0);
  CHECK(cut.tail_bound > 0);
}

TEST_CASE("Pieri dimension identity") {
  for (int d = 3; d <= 6; ++d) {
    for (int m = 0; m <= 4; ++m) {
      for (const Row& lambda : {gamma_weight(d, 1), gamma_weight(d, 2)}) {
        BigCount total = 0;
        for (const auto& [beta, mult] : pieri_decompose(d, lambda, m)) {
          total += mult * count_patterns(d - 1, beta);
          CHECK(pieri_multiplicity(d, lambda, m, beta) == mult);
        }
        CHECK(total == count_patterns(d - 1, lambda) * count_patterns(d - 1, gamma_weight(d, m)));
      }
    }
  }
  // SO(3): V_1 ⊗ V_1 = V_0 + V_1 + V_2
  const auto so3 = pieri_decompose(3, Row{1}, 1);
  CHECK(so3.size() == 3);
  CHECK(pieri_max_degree(3, Row{1}, Row{1}) == 2);
}

TEST_CASE("nu is a probability law and the tail bound is certified") {
  const Kernels<Rational> k(kHalf);
  for (int d = 3; d <= 5; ++d) {
    Rational head = 0;
    for (long m = 0; m <= 20; ++m) head += k.nu_pmf(d, m);
    Rational further = 0;
    for (long m = 21; m <= 400; ++m) further += k.nu_pmf(d, m);
    CHECK(k.nu_tail_bound(d, 20) >= further);
    CHECK(abs(1 - head - further) < power(Rational(1, 10), 30));
  }
  CHECK(k.nu_tail_bound(3, -1) == 1);
}

TEST_CASE("kernel values from the reference model") {
  const Kernels<Rational> k(kThird);
  CHECK(k.q_k_pmf(2, {Row{1}, Row{1}, Row{2}}, {Row{0}, Row{1}, Row{1}}) == Rational(1, 27));
  CHECK(k.q_k_pmf(2, {Row{0}, Row{0}, Row{1}}, {Row{1}, Row{1}, Row{2}}) == Rational(4, 81));
  CHECK(k.q_k_pmf(3, {Row{1}, Row{1}, Row{2, 1}}, {Row{1}, Row{1}, Row{1, 1}}) == Rational(20, 243));
  CHECK(k.s_k_pmf(3, Row{2, 1}, WPlusPair{Row{1}, Row{1, 1}}) == Rational(5, 162));
  CHECK(k.s_k_pmf(2, Row{1}, WPlusPair{Row{0}, Row{1}}) == Rational(1, 27));
}

TEST_CASE("S_k marginalises to R_k") {
  const Kernels<Rational> k(kHalf);
  for (int kk = 1; kk <= 4; ++kk) {
    for (const Row& y : bounded_rows(row_length(kk), 2)) {
      const auto pairs = k.s_k_row(kk, y, 6);
      const auto row = k.r_k_row(kk, y, 6);
      std::map<Row, Rational> marginal;
      for (const auto& [state, p] : pairs.support) marginal[state.y] += p;
      for (const auto& [target, p] : row.support) CHECK(marginal[target] == p);
      CHECK(marginal.size() == row.support.size());
    }
  }
}

TEST_CASE("row materializers keep the mass they promise") {
  const Kernels<Rational> k(kHalf);
  for (int kk = 1; kk <= 4; ++kk) {
    const Row x(row_length(kk), 1);
    for (int radius : {4, 10}) {
      const auto row = k.r_k_row(kk, x, radius);
      const Rational mass = row.mass();
      CHECK(mass <= 1);
      CHECK(1 - mass <= row.tail_deficit);
      for (const auto& [y, p] : row.support) CHECK(p == k.r_k_pmf(kk, x, y));
    }
  }
}

TEST_CASE("double scalar tracks the exact one") {
  const Kernels<Rational> exact(kThird);
  const Kernels<double> approx(kThird);
  CHECK(std::abs(approx.p_d_closed(5, Row{2, 1}, Row{2, 2}) - as_double(exact.p_d_closed(5, Row{2, 1}, Row{2, 2}))) <
        1e-15);
  CHECK(std::abs(approx.q_k_pmf(3, {Row{1}, Row{1}, Row{2, 1}}, {Row{1}, Row{1}, Row{1, 1}}) - 20.0 / 243.0) < 1e-15);
}

TEST_CASE("n-step laws") {
  const Kernels<Rational> k(kHalf);
  const auto law = n_step_law(k, 2, 2, 30, 1e-6);
  CHECK(std::abs(as_double(law.mass()) - 1.0) <= as_double(law.tail_deficit) + 1e-15);
  CHECK_THROWS_AS(n_step_law(k, 2, 3, 1, 1e-9), TruncationError);
  const auto pairs = pair_n_step_law(k, 2, 1, 10, 1e-2);
  Rational direct = 0;
  for (const auto& [state, p] : pairs.support) direct += p;
  CHECK(as_double(direct) > 0.99);
}

TEST_CASE("identity checks on a small range") {
  const auto des = check_desintegration(kHalf, 4);
  CHECK(des.cases > 0);
  CHECK(des.violations.empty());
  const auto inter = check_intertwining(kThird, 2, 3);
  CHECK(inter.cases > 0);
  CHECK(inter.max_discrepancy == 0);
  CHECK_THROWS_AS(check_intertwining(kThird, 1, 3), ContractViolation);
}

TEST_CASE("r_pmf against a brute-force convolution") {
  for (const Rational& q : {kThird, kHalf, Rational(2, 3)}) {
    const Kernels<double> k(q);
    const double qd = q.get_d();
    const int cut = 200;
    for (long x = 0; x <= 5; ++x) {
      std::vector<double> law(40, 0.0);
      for (int a = 0; a <= cut; ++a) {
        for (int b = 0; b <= cut; ++b) {
          const long y = std::labs(x + a - b);
          if (y < 40) law[static_cast<std::size_t>(y)] += (1 - qd) * (1 - qd) * std::pow(qd, a + b);
        }
      }
      for (long y = 0; y < 40; ++y) CHECK(std::abs(k.r_pmf(x, y) - law[static_cast<std::size_t>(y)]) < 1e-12);
    }
  }
}

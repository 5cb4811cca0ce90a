#pragma once

// Distances between laws and between samples.

#include "sogt/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

namespace sogt {

template <typename Scalar>
struct TvResult {
  Scalar distance;      // 1/2 sum |a - b| over the union of supports
  Scalar deficit_bias;  // 1/2 (deficit_a + deficit_b), an upper bias on the true distance
};

template <typename State, typename Scalar>
TvResult<Scalar> tv_distance(const SparseLaw<State, Scalar>& a, const SparseLaw<State, Scalar>& b) {
  Scalar total(0);
  auto ia = a.support.begin();
  auto ib = b.support.begin();
  const auto gap = [](const Scalar& x) { return x < Scalar(0) ? Scalar(-x) : x; };
  while (ia != a.support.end() || ib != b.support.end()) {
    if (ib == b.support.end() || (ia != a.support.end() && ia->first < ib->first)) {
      total += gap(ia->second);
      ++ia;
    } else if (ia == a.support.end() || ib->first < ia->first) {
      total += gap(ib->second);
      ++ib;
    } else {
      total += gap(Scalar(ia->second - ib->second));
      ++ia;
      ++ib;
    }
  }
  return {Scalar(total / 2), Scalar((a.tail_deficit + b.tail_deficit) / 2)};
}

/// Expected TV between `law` and the empirical law of n samples from it, to leading order:
/// 1/2 sum_x sqrt(2 p_x (1 - p_x) / (pi n)).
template <typename State>
double expected_sampling_tv(const SparseLaw<State, double>& law, std::size_t n) {
  double total = 0;
  for (const auto& [state, p] : law.support) total += std::sqrt(2 * p * (1 - p) / (M_PI * static_cast<double>(n)));
  return total / 2;
}

template <typename State>
SparseLaw<State, double> to_double_law(const SparseLaw<State, Rational>& law) {
  SparseLaw<State, double> out;
  for (const auto& [state, p] : law.support) out.support.emplace(state, p.get_d());
  out.tail_deficit = law.tail_deficit.get_d();
  return out;
}

/// Counts of observed states turned into an empirical law.
template <typename State>
class Histogram {
 public:
  void add(const State& s, std::size_t count = 1) {
    counts_[s] += count;
    total_ += count;
  }
  std::size_t total() const { return total_; }
  const std::map<State, std::size_t>& counts() const { return counts_; }
  SparseLaw<State, double> law() const {
    SparseLaw<State, double> out;
    if (total_ == 0) return out;
    for (const auto& [state, c] : counts_) out.support.emplace(state, static_cast<double>(c) / static_cast<double>(total_));
    return out;
  }

 private:
  std::map<State, std::size_t> counts_;
  std::size_t total_ = 0;
};

/// sup_x |F_xs(x) - F_ys(x)|. Throws ContractViolation on empty input.
double ks_two_sample(std::vector<double> xs, std::vector<double> ys);

/// Asymptotic two-sample critical value c(alpha) sqrt((n+m)/(nm)).
double ks_critical_value(std::size_t n, std::size_t m, double alpha);

/// One-sample KS distance against a CDF.
template <typename Cdf>
double ks_one_sample(std::vector<double> xs, const Cdf& cdf) {
  if (xs.empty()) throw ContractViolation("ks_one_sample: empty sample");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double worst = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    worst = std::max({worst, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
  }
  return worst;
}

}  // namespace sogt

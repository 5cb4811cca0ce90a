#include "sogt/kernels.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>

namespace sogt {

namespace {

constexpr std::size_t kPowerCache = 256;
constexpr std::size_t kMaxViolationsKept = 16;

// Visits every integer vector v with lo[i] <= v[i] <= hi[i], lexicographically.
template <typename Fn>
void for_each_in_box(const std::vector<int>& lo, const std::vector<int>& hi, Fn&& fn) {
  const std::size_t n = lo.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (lo[i] > hi[i]) return;
  }
  std::vector<int> v = lo;
  while (true) {
    fn(static_cast<const std::vector<int>&>(v));
    std::size_t i = n;
    while (i > 0) {
      --i;
      if (v[i] < hi[i]) {
        ++v[i];
        for (std::size_t j = i + 1; j < n; ++j) v[j] = lo[j];
        break;
      }
      if (i == 0) return;
    }
    if (n == 0) return;
  }
}

int row_sum(std::span<const int> row) { return std::accumulate(row.begin(), row.end(), 0); }

bool is_state_row(int k, std::span<const int> row) {
  return row.size() == row_length(k) && is_integer_row(row);
}

void require_state_row(int k, std::span<const int> row, const char* what) {
  if (!is_state_row(k, row)) {
    throw ContractViolation(std::string(what) + ": '" + format_row(row) + "' is not a non-negative row " +
                            std::to_string(k));
  }
}

void require_weight(int d, std::span<const int> lambda, const char* what) {
  if (d < 3) throw ContractViolation(std::string(what) + ": d must be at least 3");
  if (!in_weight_set(d, lambda)) {
    throw ContractViolation(std::string(what) + ": '" + format_row(lambda) + "' is not in W_" + std::to_string(d));
  }
}

// Visits the (c, s) pairs or the c vectors of the Pieri rule for fixed lambda and beta,
// passing the degree m each one contributes to.
template <typename Fn>
void for_each_pieri_term(int d, std::span<const int> lambda, std::span<const int> beta, Fn&& fn) {
  const int r = d / 2;
  if (d % 2 == 1) {
    for (const Row& c : enumerate_lower_rows(lambda, static_cast<std::size_t>(r), false)) {
      if (!interlaces(c, beta)) continue;
      const int base = row_sum(lambda) + row_sum(beta) - 2 * row_sum(c);
      fn(base);
      if (c.back() > 0) fn(base + 1);
    }
  } else {
    const Row a = abs_row(lambda);
    const Row b = abs_row(beta);
    for (const Row& c : enumerate_lower_rows(a, static_cast<std::size_t>(r - 1), false)) {
      if (!interlaces(c, b)) continue;
      const int head = row_sum(std::span<const int>(lambda).first(static_cast<std::size_t>(r - 1))) +
                       row_sum(std::span<const int>(beta).first(static_cast<std::size_t>(r - 1))) - 2 * row_sum(c);
      fn(head + std::abs(lambda[static_cast<std::size_t>(r - 1)] - beta[static_cast<std::size_t>(r - 1)]));
    }
  }
}

}  // namespace

JumpParam::JumpParam(Rational value) : q(std::move(value)) {
  q.canonicalize();
  if (!(q > 0 && q < 1)) throw ContractViolation("q must lie strictly between 0 and 1");
}

std::vector<Row> bounded_rows(std::size_t length, int bound) {
  std::vector<Row> rows;
  if (length == 0) {
    rows.emplace_back();
    return rows;
  }
  for_each_in_box(std::vector<int>(length, 0), std::vector<int>(length, bound), [&](const std::vector<int>& v) {
    if (is_integer_row(v)) rows.push_back(v);
  });
  return rows;
}

// ---------------------------------------------------------------------------
// Pieri rule

BigCount pieri_multiplicity(int d, std::span<const int> lambda, int m, std::span<const int> beta) {
  require_weight(d, lambda, "pieri_multiplicity");
  if (!in_weight_set(d, beta) || m < 0) return 0;
  BigCount count = 0;
  for_each_pieri_term(d, lambda, beta, [&](int degree) {
    if (degree == m) ++count;
  });
  return count;
}

int pieri_max_degree(int d, std::span<const int> lambda, std::span<const int> beta) {
  require_weight(d, lambda, "pieri_max_degree");
  if (!in_weight_set(d, beta)) return -1;
  int top = -1;
  for_each_pieri_term(d, lambda, beta, [&](int degree) { top = std::max(top, degree); });
  return top;
}

std::map<Row, BigCount> pieri_decompose(int d, std::span<const int> lambda, int m) {
  require_weight(d, lambda, "pieri_decompose");
  if (m < 0) throw ContractViolation("pieri_decompose: m must be non-negative");
  std::map<Row, BigCount> out;
  const int r = d / 2;
  const auto ur = static_cast<std::size_t>(r);

  if (d % 2 == 1) {
    for (const Row& c : enumerate_lower_rows(lambda, ur, false)) {
      for (int s = 0; s <= (c.back() > 0 ? 1 : 0); ++s) {
        // Need sum(beta) = m - s - sum(lambda) + 2 sum(c) with beta_i in [c_i, c_{i-1}].
        const int target = m - s - row_sum(lambda) + 2 * row_sum(c);
        if (target < row_sum(c)) continue;
        std::vector<int> lo(c.begin() + 1, c.end());
        std::vector<int> hi(c.begin(), c.end() - 1);
        for_each_in_box(lo, hi, [&](const std::vector<int>& tail) {
          const int first = target - row_sum(tail);
          if (first < c[0]) return;
          Row beta{first};
          beta.insert(beta.end(), tail.begin(), tail.end());
          ++out[beta];
        });
      }
    }
  } else {
    const Row a = abs_row(lambda);
    for (const Row& c : enumerate_lower_rows(a, ur - 1, false)) {
      // Need sum_{i<r} beta_i + |lambda_r - beta_r| = m - sum_{i<r} lambda_i + 2 sum(c).
      const int target = m - row_sum(std::span<const int>(lambda).first(ur - 1)) + 2 * row_sum(c);
      // Free coordinates beta_2..beta_{r-1} in [c_i, c_{i-1}] and beta_r in [-c_{r-1}, c_{r-1}].
      std::vector<int> lo(c.begin() + 1, c.end());
      std::vector<int> hi(c.begin(), c.end() - 1);
      lo.push_back(-c.back());
      hi.push_back(c.back());
      for_each_in_box(lo, hi, [&](const std::vector<int>& tail) {
        const int last = tail.back();
        const int used = row_sum(std::span<const int>(tail).first(tail.size() - 1)) + std::abs(lambda[ur - 1] - last);
        const int first = target - used;
        if (first < c[0]) return;
        Row beta{first};
        beta.insert(beta.end(), tail.begin(), tail.end());
        ++out[beta];
      });
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kernels

template <typename Scalar>
Kernels<Scalar>::Kernels(const JumpParam& param) : q_(from_rational<Scalar>(param.q)) {
  one_minus_q_ = Scalar(1) - q_;
  inverse_one_plus_q_ = Scalar(1) / (Scalar(1) + q_);
  powers_.reserve(kPowerCache);
  Scalar p(1);
  for (std::size_t i = 0; i < kPowerCache; ++i) {
    powers_.push_back(p);
    p *= q_;
  }
  Scalar t(1);
  for (int i = 0; i < 32; ++i) {
    one_minus_q_powers_.push_back(t);
    t *= one_minus_q_;
  }
}

template <typename Scalar>
Scalar Kernels<Scalar>::power(long exponent) const {
  if (exponent >= 0 && static_cast<std::size_t>(exponent) < powers_.size()) {
    return powers_[static_cast<std::size_t>(exponent)];
  }
  return ::sogt::power(q_, exponent);
}

template <typename Scalar>
Scalar Kernels<Scalar>::one_minus_q_power(int exponent) const {
  if (exponent >= 0 && static_cast<std::size_t>(exponent) < one_minus_q_powers_.size()) {
    return one_minus_q_powers_[static_cast<std::size_t>(exponent)];
  }
  return ::sogt::power(one_minus_q_, exponent);
}

template <typename Scalar>
Scalar Kernels<Scalar>::dimension(int k, std::span<const int> row) const {
  return from_count<Scalar>(count_patterns(k, row));
}

template <typename Scalar>
Scalar Kernels<Scalar>::geometric_pmf(long x) const {
  if (x < 0) return Scalar(0);
  return Scalar(one_minus_q_ * power(x));
}

template <typename Scalar>
Scalar Kernels<Scalar>::r_pmf(long x, long y) const {
  if (x < 0) throw ContractViolation("r_pmf: x must be non-negative");
  if (y < 0) return Scalar(0);
  const Scalar scale = one_minus_q_ * inverse_one_plus_q_;
  if (y == 0) return Scalar(scale * power(x));
  return Scalar(scale * (power(std::abs(x - y)) + power(x + y)));
}

template <typename Scalar>
Scalar Kernels<Scalar>::blocked_left_pmf(long a, long x, long y) const {
  if (x <= a) return Scalar(y == a ? 1 : 0);
  if (y < a || y > x) return Scalar(0);
  if (y == a) return power(x - a);
  return Scalar(one_minus_q_ * power(x - y));
}

template <typename Scalar>
Scalar Kernels<Scalar>::blocked_right_pmf(long b, long x, long y) const {
  if (b == kUnbounded) return free_shift_pmf(x, y);
  if (x >= b) return Scalar(y == b ? 1 : 0);
  if (y < x || y > b) return Scalar(0);
  if (y == b) return power(b - x);
  return Scalar(one_minus_q_ * power(y - x));
}

template <typename Scalar>
Scalar Kernels<Scalar>::reflected_right_pmf(long b, long x, long y) const {
  if (b == kUnbounded) return r_pmf(x, y);
  if (y < 0 || y > b) return Scalar(0);
  if (y < b) return r_pmf(x, y);
  if (x <= b) {
    if (b == 0) return Scalar(1);
    return Scalar((power(b - x) + power(b + x)) * inverse_one_plus_q_);
  }
  // Starting beyond the cap: everything at or above b collapses onto b.
  Scalar below(0);
  for (long t = 0; t < b; ++t) below += r_pmf(x, t);
  return Scalar(Scalar(1) - below);
}

template <typename Scalar>
Scalar Kernels<Scalar>::free_shift_pmf(long x, long y) const {
  if (y < x) return Scalar(0);
  return Scalar(one_minus_q_ * power(y - x));
}

template <typename Scalar>
Scalar Kernels<Scalar>::nu_pmf(int d, long m) const {
  if (d < 3) throw ContractViolation("nu_pmf: d must be at least 3");
  if (m < 0) return Scalar(0);
  const Row gamma = gamma_weight(d, static_cast<int>(m));
  return Scalar(one_minus_q_power(d - 1) * inverse_one_plus_q_ * power(m) * dimension(d - 1, gamma));
}

template <typename Scalar>
Scalar Kernels<Scalar>::nu_tail_bound(int d, long m_max) const {
  if (d < 3) throw ContractViolation("nu_tail_bound: d must be at least 3");
  if (m_max < 0) return Scalar(1);
  // s_{d-1}(gamma_m) = C(m+d-2, d-2) + C(m+d-3, d-2) <= 2 C(m+d-2, d-2), and the ratio of
  // consecutive terms q^m C(m+d-2, d-2) is q (m+d-1)/(m+1), decreasing in m.
  const Scalar ratio = q_ * Scalar(static_cast<long>(m_max + d)) / Scalar(static_cast<long>(m_max + 2));
  if (ratio >= Scalar(1)) return Scalar(1);
  BigCount binom;
  mpz_bin_uiui(binom.get_mpz_t(), static_cast<unsigned long>(m_max + d - 1), static_cast<unsigned long>(d - 2));
  const Scalar first = Scalar(2) * one_minus_q_power(d - 1) * inverse_one_plus_q_ * power(m_max + 1) *
                       from_count<Scalar>(binom);
  const Scalar bound = first / (Scalar(1) - ratio);
  return bound < Scalar(1) ? bound : Scalar(1);
}

template <typename Scalar>
Scalar Kernels<Scalar>::mu_pmf(int d, std::span<const int> lambda, int m, std::span<const int> beta) const {
  require_weight(d, lambda, "mu_pmf");
  if (!in_weight_set(d, beta) || m < 0) return Scalar(0);
  const BigCount multiplicity = pieri_multiplicity(d, lambda, m, beta);
  if (multiplicity == 0) return Scalar(0);
  const Row gamma = gamma_weight(d, m);
  return Scalar(dimension(d - 1, beta) * from_count<Scalar>(multiplicity) /
                (dimension(d - 1, lambda) * dimension(d - 1, gamma)));
}

template <typename Scalar>
Scalar Kernels<Scalar>::p_d_closed(int d, std::span<const int> lambda, std::span<const int> beta) const {
  require_weight(d, lambda, "p_d_closed");
  if (!in_weight_set(d, beta)) return Scalar(0);
  const int r = d / 2;
  const auto ur = static_cast<std::size_t>(r);
  Scalar sum(0);
  if (d % 2 == 1) {
    for (const Row& c : enumerate_lower_rows(lambda, ur, false)) {
      if (!interlaces(c, beta)) continue;
      const int e = row_sum(lambda) + row_sum(beta) - 2 * row_sum(c);
      sum += c.back() > 0 ? power(e) : Scalar(power(e) * inverse_one_plus_q_);
    }
    if (sum == 0) return sum;
    return Scalar(one_minus_q_power(d - 1) * dimension(d - 1, beta) / dimension(d - 1, lambda) * sum);
  }
  const Row a = abs_row(lambda);
  const Row b = abs_row(beta);
  const int wall = std::abs(lambda[ur - 1] - beta[ur - 1]);
  for (const Row& c : enumerate_lower_rows(a, ur - 1, false)) {
    if (!interlaces(c, b)) continue;
    const int e = row_sum(a) - a[ur - 1] + row_sum(b) - b[ur - 1] - 2 * row_sum(c) + wall;
    sum += power(e);
  }
  if (sum == 0) return sum;
  return Scalar(one_minus_q_power(d - 1) * inverse_one_plus_q_ * dimension(d - 1, beta) / dimension(d - 1, lambda) *
                sum);
}

template <typename Scalar>
SeriesValue<Scalar> Kernels<Scalar>::p_d_series(int d, std::span<const int> lambda, std::span<const int> beta,
                                                int m_max) const {
  require_weight(d, lambda, "p_d_series");
  if (m_max < 0) throw ContractViolation("p_d_series: m_max must be non-negative");
  const int top = pieri_max_degree(d, lambda, beta);
  Scalar value(0);
  for (int m = 0; m <= std::min(m_max, top); ++m) {
    const Scalar mu = mu_pmf(d, lambda, m, beta);
    if (mu != 0) value += mu * nu_pmf(d, m);
  }
  // mu_m(lambda, .) is a probability, so the neglected terms are bounded by the tail of nu.
  Scalar tail = top <= m_max ? Scalar(0) : nu_tail_bound(d, m_max);
  return {value, tail};
}

template <typename Scalar>
Scalar Kernels<Scalar>::r_k_pmf(int k, std::span<const int> x, std::span<const int> y) const {
  if (k < 1) throw ContractViolation("r_k_pmf: k must be positive");
  require_state_row(k, x, "r_k_pmf");
  if (!is_state_row(k, y)) return Scalar(0);
  if (k == 1) return r_pmf(x[0], y[0]);
  if (k % 2 == 0) return p_d_closed(k + 1, x, y);
  Scalar value = p_d_closed(k + 1, x, y);
  if (y.back() != 0) {
    Row flipped(y.begin(), y.end());
    flipped.back() = -flipped.back();
    value += p_d_closed(k + 1, x, flipped);
  }
  return value;
}

template <typename Scalar>
Scalar Kernels<Scalar>::s_k_pmf(int k, const WPlusPair& from, const WPlusPair& to) const {
  if (from.z.size() != static_cast<std::size_t>(k / 2) || !interlaces(from.z, from.y)) {
    throw ContractViolation("s_k_pmf: source is not in W+_{k,k+1}");
  }
  return s_k_pmf(k, from.y, to);
}

template <typename Scalar>
Scalar Kernels<Scalar>::s_k_pmf(int k, std::span<const int> y, const WPlusPair& to) const {
  if (k < 1) throw ContractViolation("s_k_pmf: k must be positive");
  require_state_row(k, y, "s_k_pmf");
  const auto zlen = static_cast<std::size_t>(k / 2);
  if (!is_state_row(k, to.y) || to.z.size() != zlen || !is_integer_row(to.z)) return Scalar(0);
  if (!interlaces(to.z, y) || !interlaces(to.z, to.y)) return Scalar(0);

  const Scalar ratio = dimension(k, to.y) / dimension(k, y);
  if (k % 2 == 0) {
    const std::size_t r = zlen;
    const int e = row_sum(y) + row_sum(to.y) - 2 * row_sum(to.z);
    const Scalar wall = to.z[r - 1] > 0 ? Scalar(1) : inverse_one_plus_q_;
    return Scalar(one_minus_q_power(k) * ratio * power(e) * wall);
  }
  const std::size_t r = zlen + 1;
  const int e = row_sum(y) - y[r - 1] + row_sum(to.y) - to.y[r - 1] - 2 * row_sum(to.z);
  return Scalar(one_minus_q_power(k - 1) * ratio * r_pmf(y[r - 1], to.y[r - 1]) * power(e));
}

template <typename Scalar>
Scalar Kernels<Scalar>::l_k_pmf(int k, const WPlusPair& state, const LinkedState& target) const {
  if (k < 2) throw ContractViolation("l_k_pmf: k must be at least 2");
  if (state.z != target.z || state.y != target.y) return Scalar(0);
  require_state_row(k, state.y, "l_k_pmf");
  if (!is_state_row(k - 1, target.x) || !interlaces(target.x, state.y)) return Scalar(0);
  Scalar value = dimension(k - 1, target.x) / dimension(k, state.y);
  if (k % 2 == 0 && target.x.back() > 0) value *= 2;
  return value;
}

template <typename Scalar>
Scalar Kernels<Scalar>::q_k_pmf(int k, const LinkedState& from, const LinkedState& to) const {
  if (k < 2) throw ContractViolation("q_k_pmf: k must be at least 2");
  const Row& u = from.x;
  const Row& y = from.y;
  const Row& x = to.x;
  const Row& zp = to.z;
  const Row& yp = to.y;
  require_state_row(k - 1, u, "q_k_pmf");
  require_state_row(k, y, "q_k_pmf");
  if (!interlaces(u, y)) throw ContractViolation("q_k_pmf: source requires u ≼ y");
  const auto zlen = static_cast<std::size_t>(k / 2);
  if (!is_state_row(k - 1, x) || !is_state_row(k, yp) || zp.size() != zlen || !is_integer_row(zp)) return Scalar(0);
  if (!interlaces(x, yp)) return Scalar(0);

  const bool odd = k % 2 == 1;
  const int r = odd ? (k + 1) / 2 : k / 2;
  // v = Z^{k-1} at the half step, v_i in {y'_{i+1}, ..., min(x_i, z'_i)}; an empty range means no path.
  std::vector<int> lo;
  std::vector<int> hi;
  for (int i = 1; i <= r - 1; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    lo.push_back(yp[iu]);
    hi.push_back(std::min(x[iu - 1], zp[iu - 1]));
  }

  Scalar total(0);
  for_each_in_box(lo, hi, [&](const std::vector<int>& v) {
    // 1-based v_i with v_0 = +infinity
    const auto vv = [&](int i) -> long { return i == 0 ? kUnbounded : v[static_cast<std::size_t>(i - 1)]; };
    const auto at = [](const Row& row, int i) -> long { return row[static_cast<std::size_t>(i - 1)]; };

    Scalar term = s_k_pmf(k - 1, u, WPlusPair{v, x});
    if (term == 0) return;
    if (odd) {
      term *= reflected_right_pmf(vv(r - 1), std::min(at(y, r), vv(r - 1)), at(yp, r));
      for (int i = 1; i <= r - 1 && term != 0; ++i) {
        term *= blocked_left_pmf(at(u, i), std::min(at(y, i), vv(i - 1)), at(zp, i));
        term *= blocked_right_pmf(vv(i - 1), std::max(at(zp, i), at(x, i)), at(yp, i));
      }
    } else {
      term *= blocked_left_pmf(at(u, r), std::min(at(y, r), vv(r - 1)), at(zp, r));
      for (int i = 1; i <= r - 1 && term != 0; ++i) {
        term *= blocked_left_pmf(at(u, i), std::min(at(y, i), vv(i - 1)), at(zp, i));
      }
      for (int i = 1; i <= r && term != 0; ++i) {
        term *= blocked_right_pmf(vv(i - 1), std::max(at(zp, i), at(x, i)), at(yp, i));
      }
    }
    total += term;
  });
  return total;
}

// ---------------------------------------------------------------------------
// Row materializers

template <typename Scalar>
SparseLaw<Row, Scalar> Kernels<Scalar>::p_d_row(int d, std::span<const int> lambda, int radius) const {
  require_weight(d, lambda, "p_d_row");
  SparseLaw<Row, Scalar> law;
  const int r = d / 2;
  const auto ur = static_cast<std::size_t>(r);
  const Scalar base_dim = dimension(d - 1, lambda);

  if (d % 2 == 1) {
    const Scalar prefix = one_minus_q_power(d - 1) / base_dim;
    for (const Row& c : enumerate_lower_rows(lambda, ur, false)) {
      if (c[0] > radius) continue;
      const Scalar wall = c.back() > 0 ? Scalar(1) : inverse_one_plus_q_;
      std::vector<int> lo(c.begin(), c.end());
      std::vector<int> hi{radius};
      hi.insert(hi.end(), c.begin(), c.end() - 1);
      const int fixed = row_sum(lambda) - 2 * row_sum(c);
      for_each_in_box(lo, hi, [&](const std::vector<int>& beta) {
        law.add(beta, Scalar(prefix * dimension(d - 1, beta) * power(fixed + row_sum(beta)) * wall));
      });
    }
  } else {
    const Scalar prefix = one_minus_q_power(d - 1) * inverse_one_plus_q_ / base_dim;
    const Row a = abs_row(lambda);
    for (const Row& c : enumerate_lower_rows(a, ur - 1, false)) {
      if (c[0] > radius) continue;
      std::vector<int> lo(c.begin(), c.end());
      std::vector<int> hi{radius};
      hi.insert(hi.end(), c.begin(), c.end() - 1);
      lo.push_back(-c.back());
      hi.push_back(c.back());
      const int fixed = row_sum(a) - a[ur - 1] - 2 * row_sum(c);
      for_each_in_box(lo, hi, [&](const std::vector<int>& beta) {
        const int e = fixed + row_sum(beta) - beta[ur - 1] + std::abs(lambda[ur - 1] - beta[ur - 1]);
        law.add(beta, Scalar(prefix * dimension(d - 1, beta) * power(e)));
      });
    }
  }
  // beta_1 <= lambda_1 + m, so mass beyond the radius needs a degree m > radius - lambda_1.
  law.tail_deficit = nu_tail_bound(d, static_cast<long>(radius) - lambda[0]);
  return law;
}

template <typename Scalar>
SparseLaw<Row, Scalar> Kernels<Scalar>::r_k_row(int k, std::span<const int> x, int radius) const {
  if (k < 1) throw ContractViolation("r_k_row: k must be positive");
  require_state_row(k, x, "r_k_row");
  if (k == 1) {
    SparseLaw<Row, Scalar> law;
    for (int y = 0; y <= radius; ++y) law.add(Row{y}, r_pmf(x[0], y));
    // |x + xi - xi'| > radius needs xi > radius - x or xi' > radius + x.
    const Scalar bound = radius >= x[0] ? Scalar(power(radius - x[0] + 1) + power(radius + x[0] + 1)) : Scalar(1);
    law.tail_deficit = bound < Scalar(1) ? bound : Scalar(1);
    return law;
  }
  SparseLaw<Row, Scalar> full = p_d_row(k + 1, x, radius);
  if (k % 2 == 0) return full;
  SparseLaw<Row, Scalar> folded;
  folded.tail_deficit = full.tail_deficit;
  for (auto& [beta, p] : full.support) {
    Row key = beta;
    key.back() = std::abs(key.back());
    folded.add(key, p);
  }
  return folded;
}

template <typename Scalar>
SparseLaw<WPlusPair, Scalar> Kernels<Scalar>::s_k_row(int k, std::span<const int> y, int radius) const {
  if (k < 1) throw ContractViolation("s_k_row: k must be positive");
  require_state_row(k, y, "s_k_row");
  SparseLaw<WPlusPair, Scalar> law;
  const auto zlen = static_cast<std::size_t>(k / 2);
  const std::size_t ylen = row_length(k);
  for (const Row& zp : enumerate_lower_rows(y, zlen, false)) {
    if (!zp.empty() && zp[0] > radius) continue;
    std::vector<int> lo(ylen, 0);
    std::vector<int> hi(ylen, 0);
    for (std::size_t i = 0; i < ylen; ++i) {
      lo[i] = i < zlen ? zp[i] : 0;
      hi[i] = i == 0 ? radius : zp[i - 1];
    }
    for_each_in_box(lo, hi, [&](const std::vector<int>& yp) {
      WPlusPair to{zp, yp};
      law.add(to, s_k_pmf(k, y, to));
    });
  }
  // Y'^k has the law R_k(y, .), so the same bound applies.
  if (k == 1) {
    law.tail_deficit = r_k_row(k, y, radius).tail_deficit;
  } else {
    law.tail_deficit = nu_tail_bound(k + 1, static_cast<long>(radius) - y[0]);
  }
  return law;
}

template class Kernels<Rational>;
template class Kernels<double>;

// ---------------------------------------------------------------------------
// Iterated laws

template <typename Scalar>
SparseLaw<Row, Scalar> n_step_law(const Kernels<Scalar>& kernels, int k, int n, int radius, double tolerance) {
  if (n < 0) throw ContractViolation("n_step_law: n must be non-negative");
  SparseLaw<Row, Scalar> law;
  law.support.emplace(Row(row_length(k), 0), Scalar(1));
  for (int step = 1; step <= n; ++step) {
    SparseLaw<Row, Scalar> next;
    next.tail_deficit = law.tail_deficit;
    for (const auto& [x, p] : law.support) {
      const SparseLaw<Row, Scalar> row = kernels.r_k_row(k, x, radius);
      for (const auto& [y, w] : row.support) next.add(y, Scalar(p * w));
      next.tail_deficit += p * row.tail_deficit;
    }
    law = std::move(next);
    if (as_double(law.tail_deficit) > tolerance) {
      throw TruncationError("n_step_law: radius " + std::to_string(radius) + " loses " +
                                std::to_string(as_double(law.tail_deficit)) + " mass",
                            as_double(law.tail_deficit));
    }
  }
  return law;
}

template <typename Scalar>
SparseLaw<WPlusPair, Scalar> pair_n_step_law(const Kernels<Scalar>& kernels, int k, int n, int radius,
                                             double tolerance) {
  SparseLaw<WPlusPair, Scalar> law;
  if (n == 0) {
    law.support.emplace(WPlusPair{Row(static_cast<std::size_t>(k / 2), 0), Row(row_length(k), 0)}, Scalar(1));
    return law;
  }
  const SparseLaw<Row, Scalar> previous = n_step_law(kernels, k, n - 1, radius, tolerance);
  law.tail_deficit = previous.tail_deficit;
  for (const auto& [y, p] : previous.support) {
    const SparseLaw<WPlusPair, Scalar> row = kernels.s_k_row(k, y, radius);
    for (const auto& [state, w] : row.support) law.add(state, Scalar(p * w));
    law.tail_deficit += p * row.tail_deficit;
  }
  if (as_double(law.tail_deficit) > tolerance) {
    throw TruncationError("pair_n_step_law: radius too small", as_double(law.tail_deficit));
  }
  return law;
}

template SparseLaw<Row, Rational> n_step_law(const Kernels<Rational>&, int, int, int, double);
template SparseLaw<Row, double> n_step_law(const Kernels<double>&, int, int, int, double);
template SparseLaw<WPlusPair, Rational> pair_n_step_law(const Kernels<Rational>&, int, int, int, double);
template SparseLaw<WPlusPair, double> pair_n_step_law(const Kernels<double>&, int, int, int, double);

// ---------------------------------------------------------------------------
// Identity checks

DesintegrationReport check_desintegration(const Rational& q, int bound) {
  if (bound < 0) throw ContractViolation("check_desintegration: bound must be non-negative");
  const Kernels<Rational> kr{JumpParam(q)};
  DesintegrationReport report;
  report.q = q;
  report.bound = bound;
  const auto weight = [](long v) { return v > 0 ? 2 : 1; };
  const auto record = [&](int identity, std::vector<int> args, const Rational& lhs, const Rational& rhs) {
    ++report.cases;
    if (lhs != rhs) report.violations.push_back({identity, std::move(args), lhs, rhs});
  };

  // (1) 0 < z <= y
  for (int x = 0; x <= bound; ++x) {
    for (int y = 0; y <= bound; ++y) {
      for (int z = 1; z <= y; ++z) {
        Rational lhs = 0;
        for (int u = 0; u <= z; ++u) lhs += weight(u) * kr.r_pmf(u, x) * kr.blocked_left_pmf(u, y, z);
        const Rational rhs = (1 - q) * weight(x) * kr.power(std::max(x, z) + y - 2 * z);
        record(1, {x, y, z}, lhs, rhs);
      }
    }
  }
  // (2) a <= y <= x
  for (int x = 0; x <= bound; ++x) {
    for (int y = 0; y <= x; ++y) {
      for (int a = 0; a <= y; ++a) {
        Rational lhs = 0;
        for (int u = a; u <= y; ++u) lhs += kr.power(u) * kr.blocked_left_pmf(u, x, y);
        record(2, {x, y, a}, lhs, kr.power(x - y + a));
      }
    }
  }
  // (3) x <= y <= a
  for (int a = 0; a <= bound; ++a) {
    for (int y = 0; y <= a; ++y) {
      for (int x = 0; x <= y; ++x) {
        Rational lhs = 0;
        for (int v = y; v <= a; ++v) lhs += kr.power(-v) * kr.blocked_right_pmf(v, x, y);
        record(3, {x, y, a}, lhs, kr.power(y - x - a));
      }
    }
  }
  // (4) 0 < y' <= a
  for (int y = 0; y <= bound; ++y) {
    for (int yp = 1; yp <= bound; ++yp) {
      for (int a = yp; a <= bound; ++a) {
        Rational lhs = 0;
        for (int v = yp; v <= a; ++v) {
          lhs += kr.power(std::max(v, y) - 2 * v) * kr.reflected_right_pmf(v, std::min(y, v), yp);
        }
        const Rational rhs = kr.power(-a) * kr.r_pmf(y, yp) / (1 - q);
        record(4, {y, yp, a}, lhs, rhs);
      }
    }
  }
  return report;
}

IntertwiningReport check_intertwining(const Rational& q, int k, int bound) {
  if (k < 2) throw ContractViolation("check_intertwining: k must be at least 2");
  if (bound < 0) throw ContractViolation("check_intertwining: bound must be non-negative");
  const Kernels<Rational> kr{JumpParam(q)};
  IntertwiningReport report;
  report.q = q;
  report.k = k;
  report.bound = bound;
  report.max_discrepancy = 0;

  const auto zlen = static_cast<std::size_t>(k / 2);
  const std::vector<Row> ys = bounded_rows(row_length(k), bound);
  const std::vector<Row> zs = bounded_rows(zlen, bound);
  const std::vector<Row> xs = bounded_rows(row_length(k - 1), bound);

  std::vector<WPlusPair> sources;
  for (const Row& y : ys) {
    for (const Row& z : zs) {
      if (interlaces(z, y)) sources.push_back({z, y});
    }
  }
  std::vector<LinkedState> targets;
  for (const WPlusPair& pair : sources) {
    for (const Row& x : xs) {
      if (interlaces(x, pair.y)) targets.push_back({x, pair.z, pair.y});
    }
  }
  report.source_states = sources.size();
  report.target_states = targets.size();

  for (const WPlusPair& source : sources) {
    std::vector<Row> us;
    for (const Row& u : xs) {
      if (interlaces(u, source.y)) us.push_back(u);
    }
    for (const LinkedState& target : targets) {
      Rational left = 0;
      for (const Row& u : us) {
        const LinkedState middle{u, source.z, source.y};
        const Rational link = kr.l_k_pmf(k, source, middle);
        if (link == 0) continue;
        left += link * kr.q_k_pmf(k, middle, target);
      }
      const WPlusPair target_pair{target.z, target.y};
      const Rational right = kr.s_k_pmf(k, source, target_pair) * kr.l_k_pmf(k, target_pair, target);
      ++report.cases;
      const Rational gap = abs(left - right);
      if (gap > report.max_discrepancy) report.max_discrepancy = gap;
      if (gap != 0 && report.violations.size() < kMaxViolationsKept) {
        report.violations.push_back({source, target, left, right});
      }
    }
  }
  return report;
}

}  // namespace sogt

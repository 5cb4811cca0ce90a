#pragma once

// Exact Markov kernels attached to the SO(d) Gelfand-Tsetlin particle model.
//
// Every kernel over an infinite state space is exposed two ways: a pointwise
// pmf evaluator, and a row materializer that enumerates the support inside a
// coordinate radius and reports a certified upper bound on the mass left
// outside (`tail_deficit`). All evaluators are templated on the scalar type:
// Rational is the exact default, double exists for large Monte Carlo
// comparisons and is never used by the identity checks.

#include "sogt/gt.hpp"
#include "sogt/rational.hpp"

#include <compare>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace sogt {

/// Stands for +infinity as a blocking position (the v_0 convention).
inline constexpr int kUnbounded = std::numeric_limits<int>::max();

/// The jump parameter q, an exact rational strictly between 0 and 1.
struct JumpParam {
  Rational q;
  explicit JumpParam(Rational value);
};

/// Finite map state -> mass, plus a bound on the mass that was cut off.
template <typename State, typename Scalar>
struct SparseLaw {
  std::map<State, Scalar> support;
  Scalar tail_deficit{0};

  Scalar mass() const {
    Scalar total{0};
    for (const auto& [state, p] : support) total += p;
    return total;
  }
  Scalar at(const State& s) const {
    const auto it = support.find(s);
    return it == support.end() ? Scalar{0} : it->second;
  }
  void add(const State& s, const Scalar& p) {
    if (p == 0) return;
    support[s] += p;
  }
};

/// (z, y) with z ≼ y: z is the half-step position of row k without its wall
/// particle, y is row k at an integer time.
struct WPlusPair {
  Row z;
  Row y;
  auto operator<=>(const WPlusPair&) const = default;
};

/// (x, z, y): row k-1 at an integer time together with a WPlusPair of row k.
struct LinkedState {
  Row x;
  Row z;
  Row y;
  auto operator<=>(const LinkedState&) const = default;
};

template <typename Scalar>
struct SeriesValue {
  Scalar value;
  Scalar tail_bound;
};

/// Raised when a truncated law loses more mass than the caller tolerates.
class TruncationError : public std::runtime_error {
 public:
  TruncationError(const std::string& what, double achieved_deficit)
      : std::runtime_error(what), deficit(achieved_deficit) {}
  double deficit;
};

/// Multiplicities of V_beta in V_lambda ⊗ V_{gamma_m} for SO(d), zero entries omitted.
std::map<Row, BigCount> pieri_decompose(int d, std::span<const int> lambda, int m);

/// The single multiplicity M_{lambda,gamma_m}(beta).
BigCount pieri_multiplicity(int d, std::span<const int> lambda, int m, std::span<const int> beta);

/// Largest m with M_{lambda,gamma_m}(beta) > 0, or -1 when there is none.
int pieri_max_degree(int d, std::span<const int> lambda, std::span<const int> beta);

template <typename Scalar>
class Kernels {
 public:
  explicit Kernels(const JumpParam& param);
  explicit Kernels(const Rational& q) : Kernels(JumpParam(q)) {}

  const Scalar& q() const { return q_; }
  /// q^exponent, any sign.
  Scalar power(long exponent) const;

  // Elementary one-particle laws.
  Scalar geometric_pmf(long x) const;
  /// R(x, y): law of |x + xi - xi'|.
  Scalar r_pmf(long x, long y) const;
  /// Law of max(a, x - xi) at y.
  Scalar blocked_left_pmf(long a, long x, long y) const;
  /// Law of min(b, x + xi) at y; b == kUnbounded gives free_shift_pmf.
  Scalar blocked_right_pmf(long b, long x, long y) const;
  /// Law of min(b, |x + xi - xi'|) at y; b == kUnbounded gives r_pmf.
  Scalar reflected_right_pmf(long b, long x, long y) const;
  /// (1-q) q^(y-x) for y >= x.
  Scalar free_shift_pmf(long x, long y) const;

  // Representation-theoretic kernels.
  Scalar nu_pmf(int d, long m) const;
  /// Certified upper bound on sum_{m > m_max} nu(m).
  Scalar nu_tail_bound(int d, long m_max) const;
  Scalar mu_pmf(int d, std::span<const int> lambda, int m, std::span<const int> beta) const;
  Scalar p_d_closed(int d, std::span<const int> lambda, std::span<const int> beta) const;
  SeriesValue<Scalar> p_d_series(int d, std::span<const int> lambda, std::span<const int> beta, int m_max) const;

  /// Transition kernel of row k at integer times.
  Scalar r_k_pmf(int k, std::span<const int> x, std::span<const int> y) const;
  Scalar s_k_pmf(int k, const WPlusPair& from, const WPlusPair& to) const;
  /// S_k reads only the y component of its source.
  Scalar s_k_pmf(int k, std::span<const int> y, const WPlusPair& to) const;
  Scalar l_k_pmf(int k, const WPlusPair& state, const LinkedState& target) const;
  Scalar q_k_pmf(int k, const LinkedState& from, const LinkedState& to) const;

  // Row materializers: support restricted to coordinates <= radius.
  SparseLaw<Row, Scalar> p_d_row(int d, std::span<const int> lambda, int radius) const;
  SparseLaw<Row, Scalar> r_k_row(int k, std::span<const int> x, int radius) const;
  SparseLaw<WPlusPair, Scalar> s_k_row(int k, std::span<const int> y, int radius) const;

 private:
  Scalar dimension(int k, std::span<const int> row) const;
  Scalar one_minus_q_power(int exponent) const;

  Scalar q_;
  Scalar one_minus_q_;
  Scalar inverse_one_plus_q_;
  std::vector<Scalar> powers_;             // q^0, q^1, ...
  std::vector<Scalar> one_minus_q_powers_; // (1-q)^0, (1-q)^1, ...
};

extern template class Kernels<Rational>;
extern template class Kernels<double>;

/// Law of X^k(n) started from the zero pattern, by iterating R_k inside `radius`.
/// Throws TruncationError if the accumulated deficit exceeds `tolerance`.
template <typename Scalar>
SparseLaw<Row, Scalar> n_step_law(const Kernels<Scalar>& kernels, int k, int n, int radius, double tolerance);

/// Law of (Z^k(n), Y^k(n)) started from (0, 0), by iterating S_k inside `radius`.
template <typename Scalar>
SparseLaw<WPlusPair, Scalar> pair_n_step_law(const Kernels<Scalar>& kernels, int k, int n, int radius,
                                             double tolerance);

struct DesintegrationViolation {
  int identity;  // 1..4
  std::vector<int> arguments;
  Rational lhs;
  Rational rhs;
};

struct DesintegrationReport {
  Rational q;
  int bound = 0;
  std::size_t cases = 0;
  std::vector<DesintegrationViolation> violations;
};

/// Checks the four one-dimensional summation identities behind the intertwining,
/// exhaustively over admissible tuples with entries <= bound.
DesintegrationReport check_desintegration(const Rational& q, int bound);

struct IntertwiningViolation {
  WPlusPair source;
  LinkedState target;
  Rational left;
  Rational right;
};

struct IntertwiningReport {
  Rational q;
  int k = 0;
  int bound = 0;
  std::size_t source_states = 0;
  std::size_t target_states = 0;
  std::size_t cases = 0;
  Rational max_discrepancy;
  std::vector<IntertwiningViolation> violations;  // first few only
};

/// Exact comparison of L_k Q_k and S_k L_k on every pair of states with coordinates <= bound.
IntertwiningReport check_intertwining(const Rational& q, int k, int bound);

/// Non-negative, weakly decreasing rows of a given length with entries <= bound, lexicographic.
std::vector<Row> bounded_rows(std::size_t length, int bound);

}  // namespace sogt

#pragma once

// Gelfand-Tsetlin patterns for the orthogonal group.
//
// A pattern of depth k has rows x^1, ..., x^k; row i has ceil(i/2) entries.
// Even rows are non-negative; in odd rows the last entry carries a sign.
// Consecutive rows interlace after taking absolute values.

#include "sogt/rational.hpp"

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sogt {

/// A row of integers. Used for pattern rows, highest weights and kernel states.
/// Depending on context it is an IntegerRow (non-negative, weakly decreasing)
/// or a SignedRow (the last entry may be negative).
using Row = std::vector<int>;

/// Number of entries of pattern row `i` (1-based): ceil(i/2).
constexpr std::size_t row_length(int i) { return static_cast<std::size_t>((i + 1) / 2); }

/// Rank of SO(d): the number of entries of a highest weight, floor(d/2).
constexpr std::size_t weight_length(int d) { return static_cast<std::size_t>(d / 2); }

struct Pattern {
  std::vector<Row> rows;  // rows[0] is x^1

  Pattern() = default;
  explicit Pattern(std::vector<Row> r) : rows(std::move(r)) {}

  /// The all-zero pattern of depth k.
  static Pattern zero(int k);

  int depth() const { return static_cast<int>(rows.size()); }

  /// 1-based access mirroring the x^i_j notation.
  int& at(int i, int j) { return rows[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)]; }
  int at(int i, int j) const { return rows[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)]; }

  const Row& row(int i) const { return rows[static_cast<std::size_t>(i - 1)]; }

  auto operator<=>(const Pattern&) const = default;
};

/// Componentwise absolute value.
Row abs_row(std::span<const int> row);

/// Weakly decreasing and non-negative.
bool is_integer_row(std::span<const int> row);

/// Absolute values weakly decreasing and all entries but the last non-negative.
bool is_signed_row(std::span<const int> row);

/// lambda is a highest weight of SO(d) in the sense used here (lambda in W_d).
bool in_weight_set(int d, std::span<const int> lambda);

/// `lambda` can be row k of a pattern: right length, shape valid for that row.
bool is_valid_top_row(int k, std::span<const int> lambda);

/// lower ≼ upper. Lengths must be equal or upper one longer; when upper is
/// longer the extra relation upper[n] <= lower[n-1] is included.
/// Throws ContractViolation on any other length combination.
bool interlaces(std::span<const int> lower, std::span<const int> upper);

/// Row shapes, signs and interlacing of absolute-value rows.
bool pattern_is_valid(const Pattern& p);

/// Rows x of the given length with |x| ≼ upper, in lexicographic order.
/// With signed_last, a positive last entry m also appears as -m.
std::vector<Row> enumerate_lower_rows(std::span<const int> upper, std::size_t length, bool signed_last);

/// s_k(lambda): number of depth-k patterns whose k-th row is lambda. Memoized, thread safe.
BigCount count_patterns(int k, std::span<const int> lambda);

/// All depth-k patterns with k-th row lambda, by back-tracking.
std::vector<Pattern> enumerate_patterns(int k, std::span<const int> lambda);

/// Weyl dimension formula for the SO(d) irreducible representation of highest weight lambda.
/// Independent of count_patterns; exists so that the two can be checked against each other.
BigCount weyl_dimension(int d, std::span<const int> lambda);

/// gamma_m = (m, 0, ..., 0) with floor(d/2) entries.
Row gamma_weight(int d, int m);

/// Parses "1,0,-1" into a row.
Row parse_row(const std::string& text);
std::string format_row(std::span<const int> row);

}  // namespace sogt

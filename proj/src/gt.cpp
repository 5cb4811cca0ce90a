#include "sogt/gt.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <utility>

namespace sogt {

Pattern Pattern::zero(int k) {
  Pattern p;
  for (int i = 1; i <= k; ++i) p.rows.emplace_back(row_length(i), 0);
  return p;
}

Row abs_row(std::span<const int> row) {
  Row out(row.begin(), row.end());
  for (int& v : out) v = std::abs(v);
  return out;
}

bool is_integer_row(std::span<const int> row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (row[i] < 0) return false;
    if (i + 1 < row.size() && row[i] < row[i + 1]) return false;
  }
  return true;
}

bool is_signed_row(std::span<const int> row) {
  if (row.empty()) return true;
  if (!is_integer_row(row.first(row.size() - 1))) return false;
  return row.size() < 2 || std::abs(row.back()) <= row[row.size() - 2];
}

bool in_weight_set(int d, std::span<const int> lambda) {
  if (d < 2 || lambda.size() != weight_length(d)) return false;
  return d % 2 == 1 ? is_integer_row(lambda) : is_signed_row(lambda);
}

bool is_valid_top_row(int k, std::span<const int> lambda) {
  if (k < 1 || lambda.size() != row_length(k)) return false;
  return k % 2 == 0 ? is_integer_row(lambda) : is_signed_row(lambda);
}

bool interlaces(std::span<const int> lower, std::span<const int> upper) {
  const std::size_t n = lower.size();
  if (upper.size() != n && upper.size() != n + 1) {
    throw ContractViolation("interlaces: upper row must have the same length as the lower row or one more");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (lower[i] > upper[i]) return false;
    if (i + 1 < upper.size() && upper[i + 1] > lower[i]) return false;
  }
  return true;
}

bool pattern_is_valid(const Pattern& p) {
  for (int i = 1; i <= p.depth(); ++i) {
    const Row& row = p.row(i);
    if (row.size() != row_length(i)) return false;
    const bool shape_ok = i % 2 == 0 ? is_integer_row(row) : is_signed_row(row);
    if (!shape_ok) return false;
    if (i >= 2 && !interlaces(abs_row(p.row(i - 1)), abs_row(row))) return false;
  }
  return true;
}

namespace {

// Non-negative rows of `length` interlacing below `upper`, lexicographic.
void for_each_lower_row(std::span<const int> upper, std::size_t length, Row& current, std::size_t index,
                        const auto& emit) {
  if (index == length) {
    emit(current);
    return;
  }
  const int low = index + 1 < upper.size() ? upper[index + 1] : 0;
  const int high = upper[index];
  for (int v = low; v <= high; ++v) {
    current[index] = v;
    for_each_lower_row(upper, length, current, index + 1, emit);
  }
}

void check_lower_shape(std::span<const int> upper, std::size_t length) {
  if (length != upper.size() && length + 1 != upper.size()) {
    throw ContractViolation("enumerate_lower_rows: target length must equal len(upper) or len(upper)-1");
  }
  if (!is_integer_row(upper)) {
    throw ContractViolation("enumerate_lower_rows: upper row must be non-negative and weakly decreasing");
  }
}

class CountMemo {
 public:
  BigCount count(int k, const Row& abs_lambda) {
    if (k == 1) return 1;
    const Key key{k, abs_lambda};
    {
      std::shared_lock lock(mutex_);
      if (const auto it = table_.find(key); it != table_.end()) return it->second;
    }
    const std::size_t length = row_length(k - 1);
    const bool signed_below = (k - 1) % 2 == 1;
    BigCount total = 0;
    Row current(length, 0);
    for_each_lower_row(abs_lambda, length, current, 0, [&](const Row& x) {
      const BigCount c = count(k - 1, x);
      total += (signed_below && !x.empty() && x.back() > 0) ? BigCount(2 * c) : c;
    });
    std::unique_lock lock(mutex_);
    table_.emplace(key, total);
    return total;
  }

 private:
  using Key = std::pair<int, Row>;
  std::shared_mutex mutex_;
  std::map<Key, BigCount> table_;
};

CountMemo& count_memo() {
  static CountMemo memo;
  return memo;
}

}  // namespace

std::vector<Row> enumerate_lower_rows(std::span<const int> upper, std::size_t length, bool signed_last) {
  check_lower_shape(upper, length);
  std::vector<Row> rows;
  Row current(length, 0);
  for_each_lower_row(upper, length, current, 0, [&](const Row& x) {
    rows.push_back(x);
    if (signed_last && !x.empty() && x.back() > 0) {
      Row negated = x;
      negated.back() = -negated.back();
      rows.push_back(std::move(negated));
    }
  });
  std::sort(rows.begin(), rows.end());
  return rows;
}

BigCount count_patterns(int k, std::span<const int> lambda) {
  if (!is_valid_top_row(k, lambda)) {
    throw ContractViolation("count_patterns: '" + format_row(lambda) + "' is not a valid row " + std::to_string(k));
  }
  return count_memo().count(k, abs_row(lambda));
}

namespace {

void extend_patterns(std::vector<Row>& rows_top_down, int k, std::vector<Pattern>& out) {
  const int current = k - static_cast<int>(rows_top_down.size()) + 1;
  if (current == 1) {
    Pattern p;
    p.rows.assign(rows_top_down.rbegin(), rows_top_down.rend());
    out.push_back(std::move(p));
    return;
  }
  const Row upper = abs_row(rows_top_down.back());
  for (Row& below : enumerate_lower_rows(upper, row_length(current - 1), (current - 1) % 2 == 1)) {
    rows_top_down.push_back(std::move(below));
    extend_patterns(rows_top_down, k, out);
    rows_top_down.pop_back();
  }
}

}  // namespace

std::vector<Pattern> enumerate_patterns(int k, std::span<const int> lambda) {
  if (!is_valid_top_row(k, lambda)) throw ContractViolation("enumerate_patterns: invalid top row");
  std::vector<Pattern> out;
  std::vector<Row> rows_top_down{Row(lambda.begin(), lambda.end())};
  extend_patterns(rows_top_down, k, out);
  return out;
}

BigCount weyl_dimension(int d, std::span<const int> lambda) {
  if (d < 3) throw ContractViolation("weyl_dimension: d must be at least 3");
  if (!in_weight_set(d, lambda)) throw ContractViolation("weyl_dimension: lambda is not in W_d");
  const int r = d / 2;
  const bool odd = d % 2 == 1;
  // Shifted weights l = lambda + rho and rho itself, doubled in type B so that everything is integral.
  std::vector<mpz_class> shifted(static_cast<std::size_t>(r));
  std::vector<mpz_class> rho(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) {
    const int rho_i = odd ? 2 * (r - 1 - i) + 1 : r - 1 - i;
    rho[static_cast<std::size_t>(i)] = rho_i;
    shifted[static_cast<std::size_t>(i)] = (odd ? 2 * lambda[static_cast<std::size_t>(i)] : lambda[static_cast<std::size_t>(i)]) + rho_i;
  }
  mpz_class numerator = 1;
  mpz_class denominator = 1;
  for (std::size_t i = 0; i < shifted.size(); ++i) {
    for (std::size_t j = i + 1; j < shifted.size(); ++j) {
      numerator *= (shifted[i] - shifted[j]) * (shifted[i] + shifted[j]);
      denominator *= (rho[i] - rho[j]) * (rho[i] + rho[j]);
    }
    if (odd) {
      numerator *= shifted[i];
      denominator *= rho[i];
    }
  }
  if (numerator % denominator != 0) throw NumericError("weyl_dimension: non-integral quotient");
  return numerator / denominator;
}

Row gamma_weight(int d, int m) {
  Row g(weight_length(d), 0);
  if (!g.empty()) g[0] = m;
  return g;
}

Row parse_row(const std::string& text) {
  Row row;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const int v = std::stoi(item, &used);
    if (used != item.size()) throw ContractViolation("bad row entry '" + item + "'");
    row.push_back(v);
  }
  return row;
}

std::string format_row(std::span<const int> row) {
  std::string out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(row[i]);
  }
  return out;
}

}  // namespace sogt

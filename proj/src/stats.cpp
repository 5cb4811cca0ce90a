#include "sogt/stats.hpp"

#include <algorithm>
#include <cmath>

namespace sogt {

double ks_two_sample(std::vector<double> xs, std::vector<double> ys) {
  if (xs.empty() || ys.empty()) throw ContractViolation("ks_two_sample: both samples must be non-empty");
  for (double v : xs) {
    if (!std::isfinite(v)) throw NumericError("ks_two_sample: non-finite sample");
  }
  for (double v : ys) {
    if (!std::isfinite(v)) throw NumericError("ks_two_sample: non-finite sample");
  }
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const double n = static_cast<double>(xs.size());
  const double m = static_cast<double>(ys.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double worst = 0;
  while (i < xs.size() && j < ys.size()) {
    const double x = std::min(xs[i], ys[j]);
    // step over ties on both sides before comparing the CDFs
    while (i < xs.size() && xs[i] == x) ++i;
    while (j < ys.size() && ys[j] == x) ++j;
    worst = std::max(worst, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return worst;
}

double ks_critical_value(std::size_t n, std::size_t m, double alpha) {
  if (n == 0 || m == 0) throw ContractViolation("ks_critical_value: sample sizes must be positive");
  if (!(alpha > 0 && alpha < 1)) throw ContractViolation("ks_critical_value: alpha must lie in (0, 1)");
  const double c = std::sqrt(-std::log(alpha / 2) / 2);
  const auto dn = static_cast<double>(n);
  const auto dm = static_cast<double>(m);
  return c * std::sqrt((dn + dm) / (dn * dm));
}

}  // namespace sogt

#pragma once

// Independent numerical oracles shared by the unit and acceptance tests.

#include "sogt/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace sogt::oracle {


struct Estimate {
  double value;
  double relative_error;  // standard error over the mean
};

// Monte Carlo of the defining integral of m_d over the box prod_i [0, min(x_i, y_i)].
inline Estimate m_d_monte_carlo(int d, const SpectrumPoint& x, const SpectrumPoint& y, std::size_t samples, Engine& engine) {
  const int r = d / 2;
  const bool odd = d % 2 == 1;
  const int free = odd ? r : r - 1;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double volume = 1;
  for (int i = 0; i < free; ++i) volume *= std::min(x[static_cast<std::size_t>(i)], y[static_cast<std::size_t>(i)]);
  double total = 0;
  double squares = 0;
  std::vector<double> z(static_cast<std::size_t>(free));
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = unit(engine) * std::min(x[i], y[i]);
    bool inside = true;
    double exponent = 0;
    for (int i = 0; i < free && inside; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      // z ≼ x and z ≼ y
      if (z[ui] > x[ui] || z[ui] > y[ui]) inside = false;
      if (i + 1 < r && (x[ui + 1] > z[ui] || y[ui + 1] > z[ui])) inside = false;
      exponent += x[ui] + y[ui] - 2 * z[ui];
    }
    if (inside) {
      const double f = std::exp(-exponent);
      total += f;
      squares += f * f;
    }
  }
  const double n = static_cast<double>(samples);
  const double mean = total / n;
  const double se = std::sqrt(std::max(0.0, squares / n - mean * mean) / n);
  double value = mean * volume;
  if (!odd) {
    const double xr = x.back();
    const double yr = y.back();
    value *= std::exp(-std::abs(xr - yr)) + std::exp(-(xr + yr));
  }
  return {value, mean > 0 ? se / mean : 1.0};
}

inline SpectrumPoint random_interior(int d, Engine& engine, double scale) {
  std::uniform_real_distribution<double> unit(0.05, scale);
  SpectrumPoint p(static_cast<std::size_t>(d / 2));
  for (double& v : p) v = unit(engine);
  std::sort(p.begin(), p.end(), std::greater<>());
  return p;
}

// Composite Simpson rule on [a, b] with n (even) panels.
template <typename F>
double simpson(const F& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double total = f(a) + f(b);
  for (int i = 1; i < n; ++i) total += f(a + i * h) * (i % 2 ? 4 : 2);
  return total * h / 3;
}


}  // namespace sogt::oracle

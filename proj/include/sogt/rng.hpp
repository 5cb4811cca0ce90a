#pragma once

// Per-path random streams and geometric sampling.

#include "sogt/rational.hpp"

#include <cstdint>
#include <random>

namespace sogt {

using Engine = std::mt19937_64;

/// Independent stream for (seed, path). Same inputs, same stream, on every platform.
Engine path_engine(std::uint64_t seed, std::uint64_t path);

/// Uniform in (0, 1].
double open_uniform(Engine& engine);

enum class GeometricMode {
  inverse_cdf,  // floor(log U / log q)
  counted,      // count Bernoulli(q) successes, exact comparison against num/den
};

/// P(xi = x) = (1 - q) q^x on x >= 0.
class GeometricSampler {
 public:
  explicit GeometricSampler(const Rational& q, GeometricMode mode = GeometricMode::inverse_cdf);

  int operator()(Engine& engine) const;
  const Rational& q() const { return q_; }
  GeometricMode mode() const { return mode_; }

 private:
  bool bernoulli(Engine& engine) const;

  Rational q_;
  GeometricMode mode_;
  double log_q_;
  std::uint64_t num_ = 0;
  std::uint64_t den_ = 0;
  bool exact_bits_ = false;
  double q_double_;
};

}  // namespace sogt

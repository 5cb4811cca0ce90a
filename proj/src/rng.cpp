#include "sogt/rng.hpp"

#include <cmath>
#include <limits>

namespace sogt {

Engine path_engine(std::uint64_t seed, std::uint64_t path) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32), 0x5067u};
  return Engine(seq);
}

double open_uniform(Engine& engine) {
  return 1.0 - std::generate_canonical<double, std::numeric_limits<double>::digits>(engine);
}

GeometricSampler::GeometricSampler(const Rational& q, GeometricMode mode)
    : q_(q), mode_(mode), log_q_(std::log(q.get_d())), q_double_(q.get_d()) {
  if (!(q > 0 && q < 1)) throw ContractViolation("geometric sampler: q must lie strictly between 0 and 1");
  const mpz_class& num = q_.get_num();
  const mpz_class& den = q_.get_den();
  if (den.fits_ulong_p()) {
    num_ = num.get_ui();
    den_ = den.get_ui();
    exact_bits_ = true;
  }
}

bool GeometricSampler::bernoulli(Engine& engine) const {
  if (exact_bits_) {
    std::uniform_int_distribution<std::uint64_t> pick(0, den_ - 1);
    return pick(engine) < num_;
  }
  return open_uniform(engine) <= q_double_;
}

int GeometricSampler::operator()(Engine& engine) const {
  if (mode_ == GeometricMode::counted) {
    int x = 0;
    while (bernoulli(engine)) ++x;
    return x;
  }
  const double u = open_uniform(engine);
  const double x = std::floor(std::log(u) / log_q_);
  if (x >= static_cast<double>(std::numeric_limits<int>::max() / 4)) return std::numeric_limits<int>::max() / 4;
  return static_cast<int>(x);
}

}  // namespace sogt

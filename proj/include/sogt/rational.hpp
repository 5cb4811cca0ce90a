#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sogt {

/// Arbitrary-precision non-negative integer used for pattern counts and dimensions.
using BigCount = mpz_class;

/// Exact rational number, the default scalar for every probability in the library.
using Rational = mpq_class;

/// Raised when a documented precondition of an operation does not hold.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by numeric code on non-finite input or on evaluation outside the domain.
class NumericError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Parses "num/den", an integer, or a finite decimal ("0.125", "1e-3") into an exact rational.
Rational parse_rational(std::string_view text);

/// True when `text` is written as "num/den" (the form that selects exact mode).
bool is_fraction_literal(std::string_view text);

/// Always "num/den", also for integers ("0/1", "3/1").
std::string to_fraction_string(const Rational& value);

double to_double(const Rational& value);
double to_double(const BigCount& value);

/// base^exponent; negative exponents require base != 0.
Rational power(const Rational& base, long exponent);
double power(double base, long exponent);

/// Conversions used by code templated on the scalar type (Rational or double).
template <typename Scalar>
Scalar from_count(const BigCount& value);
template <>
inline Rational from_count<Rational>(const BigCount& value) {
  return Rational(value);
}
template <>
inline double from_count<double>(const BigCount& value) {
  return value.get_d();
}

template <typename Scalar>
Scalar from_rational(const Rational& value);
template <>
inline Rational from_rational<Rational>(const Rational& value) {
  return value;
}
template <>
inline double from_rational<double>(const Rational& value) {
  return value.get_d();
}

inline double as_double(const Rational& value) { return value.get_d(); }
inline double as_double(double value) { return value; }

}  // namespace sogt

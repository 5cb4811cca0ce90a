#include "sogt/rational.hpp"

#include <cctype>
#include <cmath>
#include <string>

namespace sogt {

namespace {

std::string trimmed(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return std::string(text.substr(begin, end - begin));
}

bool is_integer_literal(const std::string& s) {
  std::size_t i = (!s.empty() && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

mpz_class parse_integer(const std::string& s) {
  if (!is_integer_literal(s)) throw ContractViolation("not an integer literal: '" + s + "'");
  return mpz_class(s[0] == '+' ? s.substr(1) : s, 10);
}

}  // namespace

bool is_fraction_literal(std::string_view text) {
  return trimmed(text).find('/') != std::string::npos;
}

Rational parse_rational(std::string_view text) {
  const std::string s = trimmed(text);
  if (s.empty()) throw ContractViolation("empty rational literal");

  if (const auto slash = s.find('/'); slash != std::string::npos) {
    const mpz_class num = parse_integer(s.substr(0, slash));
    const mpz_class den = parse_integer(s.substr(slash + 1));
    if (den == 0) throw ContractViolation("zero denominator in '" + s + "'");
    Rational value(num, den);
    value.canonicalize();
    return value;
  }

  // Decimal with optional exponent, converted exactly: mantissa digits over a power of ten.
  std::string mantissa = s;
  long exponent = 0;
  if (const auto e = s.find_first_of("eE"); e != std::string::npos) {
    mantissa = s.substr(0, e);
    const std::string exp_text = s.substr(e + 1);
    if (!is_integer_literal(exp_text)) throw ContractViolation("bad exponent in '" + s + "'");
    exponent = std::stol(exp_text);
  }
  std::string digits;
  bool seen_point = false;
  for (std::size_t i = 0; i < mantissa.size(); ++i) {
    const char c = mantissa[i];
    if (c == '.') {
      if (seen_point) throw ContractViolation("bad decimal literal '" + s + "'");
      seen_point = true;
    } else {
      if (seen_point) --exponent;
      digits.push_back(c);
    }
  }
  if (digits == "-" || digits == "+" || digits.empty()) {
    throw ContractViolation("bad decimal literal '" + s + "'");
  }
  const mpz_class integral = parse_integer(digits);
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
  Rational value = exponent < 0 ? Rational(integral, scale) : Rational(integral * scale);
  value.canonicalize();
  return value;
}

std::string to_fraction_string(const Rational& value) {
  return value.get_num().get_str() + "/" + value.get_den().get_str();
}

double to_double(const Rational& value) { return value.get_d(); }
double to_double(const BigCount& value) { return value.get_d(); }

Rational power(const Rational& base, long exponent) {
  if (exponent < 0) {
    if (base == 0) throw ContractViolation("zero raised to a negative power");
    Rational inverse = 1 / base;
    return power(inverse, -exponent);
  }
  mpz_class num;
  mpz_class den;
  const auto e = static_cast<unsigned long>(exponent);
  mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), e);
  mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), e);
  Rational result(num, den);
  // num/den of a canonical base stay coprime under powers
  return result;
}

double power(double base, long exponent) {
  return std::pow(base, static_cast<double>(exponent));
}

}  // namespace sogt

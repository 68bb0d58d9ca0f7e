#pragma once

// Exact rational arithmetic helpers built on GMP's mpq_class.

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rts {

using Rational = mpq_class;
using BigInt = mpz_class;

/// Parses "p/q", "p" or a finite decimal literal ("0.25", "-1e-3") into an
/// exact rational. Throws std::invalid_argument on malformed input.
Rational parse_rational(std::string_view text);

/// True when `text` is an integer or an integer fraction ("3", "-5/12").
bool looks_rational(std::string_view text);

/// num/den in canonical form; den must be nonzero.
Rational make_ratio(long num, long den);

/// Canonical "p/q" rendering; integers render without a denominator.
std::string to_string(const Rational& q);

/// Falling factorial (n)_k = n(n-1)...(n-k+1); zero when k > n >= 0.
BigInt falling_factorial(std::int64_t n, std::int64_t k);

/// Binomial coefficient; zero outside 0 <= k <= n.
BigInt binomial(std::int64_t n, std::int64_t k);

double falling_factorial_d(std::int64_t n, std::int64_t k);
double binomial_d(std::int64_t n, std::int64_t k);

/// Best rational approximation of `x` with denominator at most `max_den`
/// (continued-fraction convergents and semiconvergents).
Rational best_rational(double x, std::int64_t max_den);

/// Dense polynomial with exact coefficients, constant term first.
class RationalPoly {
 public:
  RationalPoly() = default;
  explicit RationalPoly(std::vector<Rational> coeffs);

  static RationalPoly monomial(std::size_t degree, const Rational& c = 1);

  const std::vector<Rational>& coeffs() const { return coeffs_; }
  std::size_t size() const { return coeffs_.size(); }
  /// Degree of the highest nonzero coefficient; -1 for the zero polynomial.
  int degree() const;
  bool is_zero() const { return degree() < 0; }
  Rational coeff(std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : Rational(0); }

  Rational eval(const Rational& x) const;
  double eval(double x) const;
  RationalPoly derivative() const;

  RationalPoly& operator+=(const RationalPoly& o);
  RationalPoly& operator-=(const RationalPoly& o);
  RationalPoly& operator*=(const Rational& s);
  friend RationalPoly operator+(RationalPoly a, const RationalPoly& b) { return a += b; }
  friend RationalPoly operator-(RationalPoly a, const RationalPoly& b) { return a -= b; }
  friend RationalPoly operator*(RationalPoly a, const Rational& s) { return a *= s; }
  friend RationalPoly operator*(const RationalPoly& a, const RationalPoly& b);
  friend bool operator==(const RationalPoly& a, const RationalPoly& b);

 private:
  void trim();
  std::vector<Rational> coeffs_;
};

/// Exact power-basis expansion of P[Bin(n, x) = k].
RationalPoly be_poly(int n, int k);
/// Exact power-basis expansion of P[Bin(n, x) >= k].
RationalPoly bg_poly(int n, int k);

}  // namespace rts

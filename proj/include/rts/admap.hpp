#pragma once

// The automaton distribution map psi(x) = P[Bin(L, x) >= h(L)], L ~ chi, and
// its derivatives, in stable binary64 form and exact power-basis form.

#include <optional>
#include <string>
#include <vector>

#include "rts/core.hpp"
#include "rts/rational.hpp"

namespace rts {

/// P[Bin(n, x) = k]; zero outside 0 <= k <= n.
double be(int n, int k, double x);
/// P[Bin(n, x) >= k], summed over the shorter tail.
double bg(int n, int k, double x);

/// P[H >= k] for H hypergeometric: k-or-more marked among `draws` items taken
/// from a population of `population` holding `marked` marked items.
double hypergeom_tail(int population, int marked, int draws, int k);
Rational hypergeom_tail_exact(int population, int marked, int draws, int k);

/// Throws ValidationError when x is outside [0, 1].
double psi(const RecursiveTreeSystem& system, double x);
/// Exact evaluation in rational mode.
Rational psi(const RecursiveTreeSystem& system, const Rational& x);

/// psi^(j)(0) for j = 1..m (binary64; exact weights are converted).
std::vector<double> derivs_at_zero(const RecursiveTreeSystem& system, int m);
/// psi^(j)(0) for j = 1..m in exact arithmetic; rational mode only.
std::vector<Rational> derivs_at_zero_exact(const RecursiveTreeSystem& system, int m);

/// psi^(m)(x) for m >= 1 via the tail-difference formula.
double deriv_at(const RecursiveTreeSystem& system, double x, int m);

/// Exact monomial coefficients of psi, constant term first. Throws
/// ValidationError for float-mode systems.
RationalPoly power_coeffs(const RecursiveTreeSystem& system);

enum class ConcordanceKind { concordant, subcordant, supercordant, identity };

std::string to_string(ConcordanceKind kind);

struct ConcordanceClass {
  ConcordanceKind kind = ConcordanceKind::identity;
  /// Order of the first mismatching derivative (sub/supercordant), the number
  /// of matching orders for `concordant`, 0 for `identity`.
  int m = 0;
  double witness = 0.0;
  std::optional<Rational> exact_witness;
};

/// Compares psi^(m)(0) against the derivatives of x for m up to max_order
/// (0 = L_max). Exact in rational mode; binary64 comparisons use a relative
/// tolerance of 1e-9. All orders matching up to L_max means psi(x) == x.
ConcordanceClass concordance(const RecursiveTreeSystem& system, int max_order = 0);

/// True iff psi(x) == x identically (exact in rational mode).
bool is_identity_map(const RecursiveTreeSystem& system);

/// Evaluable representation of psi for one system: Bernstein coefficients of
/// degree L_max plus (rational mode) the exact monomial expansion.
class AdmMap {
 public:
  explicit AdmMap(RecursiveTreeSystem system);

  const RecursiveTreeSystem& system() const { return system_; }
  int degree() const { return degree_; }
  const std::vector<double>& bernstein() const { return bernstein_; }
  /// Exact Bernstein coefficients when the system is rational and the
  /// degree is small enough (<= kExactDegreeLimit).
  const std::optional<std::vector<Rational>>& exact_bernstein() const { return exact_bernstein_; }
  const std::optional<RationalPoly>& power() const { return power_; }
  /// psi^(m)(0) for m = 1..min(L_max, kCachedDerivatives).
  const std::vector<double>& derivs_at_zero() const { return derivs_; }

  double operator()(double x) const { return psi(system_, x); }
  double eval_bernstein(double x) const;
  double eval_power(double x) const;

  static constexpr int kExactDegreeLimit = 160;
  static constexpr int kCachedDerivatives = 32;

 private:
  RecursiveTreeSystem system_;
  int degree_ = 0;
  std::vector<double> bernstein_;
  std::optional<std::vector<Rational>> exact_bernstein_;
  std::optional<RationalPoly> power_;
  std::vector<double> derivs_;
};

/// Value of a polynomial given by Bernstein coefficients (de Casteljau).
double de_casteljau(const std::vector<double>& coeffs, double x);

}  // namespace rts

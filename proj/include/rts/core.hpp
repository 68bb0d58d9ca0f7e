#pragma once

// System model: child distributions, threshold functions, tiers, truncations
// and parameterized families, plus parsing of system/family documents.

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rts/rational.hpp"

namespace rts {

/// Input that violates a documented precondition (bad document, bad weights,
/// unmet hypothesis of an analysis routine).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine could not produce a certified answer.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kFloatSumTolerance = 1e-12;

/// Finite-support probability distribution on child counts. Exact (rational)
/// weights are kept alongside their binary64 images when available.
class ChildDistribution {
 public:
  ChildDistribution() = default;

  /// Throws ValidationError unless weights are >= 0 and sum to exactly 1.
  static ChildDistribution exact(const std::map<int, Rational>& weights);
  /// Throws ValidationError unless weights are in [0,1] and sum to 1 within 1e-12.
  static ChildDistribution approx(const std::map<int, double>& weights);

  bool is_exact() const { return exact_.has_value(); }
  double weight(int value) const;
  /// Exact weight; throws std::logic_error for float-mode distributions.
  Rational exact_weight(int value) const;
  const std::map<int, double>& weights() const { return weights_; }
  const std::map<int, Rational>& exact_weights() const;

  /// Values with positive weight, ascending.
  std::vector<int> support() const;
  int max_value() const { return weights_.empty() ? 0 : weights_.rbegin()->first; }
  double mean() const;

 private:
  std::map<int, double> weights_;  // positive entries only
  std::optional<std::map<int, Rational>> exact_;
};

/// h(l): minimum number of qualifying root-child subtrees for a root with l
/// children. Only values on the distribution's support (and 0) matter.
class ThresholdFunction {
 public:
  ThresholdFunction() = default;
  explicit ThresholdFunction(std::map<int, int> thresholds);

  /// h == k on {0, ..., max_value}.
  static ThresholdFunction constant(int k, int max_value);

  bool defined(int value) const { return thresholds_.count(value) != 0; }
  int operator()(int value) const;
  const std::map<int, int>& thresholds() const { return thresholds_; }
  /// Nondecreasing over the values on which h is given.
  bool is_increasing() const;

 private:
  std::map<int, int> thresholds_;
};

/// A child distribution paired with a threshold function: the central
/// analysis object. Immutable once constructed.
class RecursiveTreeSystem {
 public:
  RecursiveTreeSystem() = default;
  /// Validates h >= 1 and that h is defined on every support value. An absent
  /// h(0) is taken to be 1; its value never affects any quantity.
  RecursiveTreeSystem(ChildDistribution chi, ThresholdFunction h);

  const ChildDistribution& chi() const { return chi_; }
  const ThresholdFunction& h() const { return h_; }
  bool is_exact() const { return chi_.is_exact(); }

  /// tier(k) = { l >= 1 : h(l) = k, chi(l) > 0 }; only nonempty tiers are stored.
  const std::map<int, std::vector<int>>& tiers() const { return tiers_; }
  std::vector<int> tier(int k) const;
  /// Largest h(l) over positive support values; 0 for delta_0.
  int max_threshold() const { return max_threshold_; }
  /// Largest support value (degree of the automaton distribution map).
  int max_value() const { return chi_.max_value(); }
  /// h restricted to support values (increasing over the support).
  bool h_increasing_on_support() const;

 private:
  ChildDistribution chi_;
  ThresholdFunction h_;
  std::map<int, std::vector<int>> tiers_;
  int max_threshold_ = 0;
};

std::map<int, std::vector<int>> tiers_of(const RecursiveTreeSystem& system);

/// Empties tiers m+1 and above, moving their mass to the value 0.
RecursiveTreeSystem m_truncation(const RecursiveTreeSystem& system, int m);

/// Rewrite used when h(l) > l for some support value: such values lose their
/// mass to 0 and get h(l) = l. The automaton distribution map is unchanged.
RecursiveTreeSystem normalize_thresholds(const RecursiveTreeSystem& system);

/// Poisson(lambda) on {0..N}, N minimal with tail mass beyond N below
/// tail_tol; the dropped tail is added to the value 0.
ChildDistribution poisson_truncated(double lambda, double tail_tol);

/// Weights w(l) for first <= l <= n_max taken from a formula; the remaining
/// mass (1 minus their sum) goes to the value 0.
ChildDistribution truncated_formula(const std::function<double(int)>& weight, int first, int n_max);

/// Child distribution whose weights are polynomials in a parameter t.
class SystemFamily {
 public:
  SystemFamily() = default;
  /// Throws ValidationError unless the weight polynomials sum to the constant 1.
  SystemFamily(std::map<int, RationalPoly> weight_polys, ThresholdFunction h, Rational t_min, Rational t_max);

  const std::map<int, RationalPoly>& weight_polys() const { return polys_; }
  const ThresholdFunction& h() const { return h_; }
  double t_min() const { return t_min_.get_d(); }
  double t_max() const { return t_max_.get_d(); }
  const Rational& exact_t_min() const { return t_min_; }
  const Rational& exact_t_max() const { return t_max_; }

  /// Exact instantiation; throws ValidationError when t is outside
  /// [t_min, t_max] or a weight is negative at t.
  RecursiveTreeSystem instantiate(const Rational& t) const;
  /// Binary64 instantiation (float-mode system).
  RecursiveTreeSystem instantiate(double t) const;

 private:
  std::map<int, RationalPoly> polys_;
  ThresholdFunction h_;
  Rational t_min_;
  Rational t_max_;
};

inline RecursiveTreeSystem instantiate(const SystemFamily& family, const Rational& t) { return family.instantiate(t); }
inline RecursiveTreeSystem instantiate(const SystemFamily& family, double t) { return family.instantiate(t); }

/// Poisson(t) child distributions (truncated) with a fixed threshold function.
struct PoissonFamily {
  int threshold = 1;  // h == threshold everywhere
  double tail_tol = 1e-12;
  double t_min = 0.0;
  double t_max = 10.0;

  RecursiveTreeSystem instantiate(double t) const;
};

using Family = std::variant<SystemFamily, PoissonFamily>;
using FamilyFn = std::function<RecursiveTreeSystem(double)>;

FamilyFn family_function(const Family& family);
double family_t_min(const Family& family);
double family_t_max(const Family& family);

/// Built-in families: "fig1", "fig2", "fig3", "fig5". Throws ValidationError
/// for unknown names.
SystemFamily named_family(std::string_view name);
/// Built-in systems: "fig4", "example45", "delta1".
RecursiveTreeSystem named_system(std::string_view name);

/// Parses a system document (JSON). Exact mode iff every weight is a rational
/// string ("p/q" or an integer).
RecursiveTreeSystem parse_system(std::string_view text);
/// Parses a family document: either weight polynomials ("weight_poly") or a
/// Poisson family ("poisson").
Family parse_family(std::string_view text);
/// True when the document has family keys rather than plain system keys.
bool is_family_document(std::string_view text);

}  // namespace rts

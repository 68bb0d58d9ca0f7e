#pragma once

// Primitive critical measures, decomposition of critical systems into them,
// and the random-permutation chain used to construct them.

#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "rts/core.hpp"
#include "rts/rational.hpp"

namespace rts {

/// crit(l_1, ..., l_m): the unique measure on {0, l_1, ..., l_m} with
/// h(l_k) = k whose map agrees with x to order m at 0.
class CritSpec {
 public:
  CritSpec(std::vector<int> support_seq, std::map<int, Rational> weights);

  const std::vector<int>& support_seq() const { return seq_; }
  int order() const { return static_cast<int>(seq_.size()); }
  const std::map<int, Rational>& weights() const { return weights_; }
  Rational weight(int value) const;
  /// h(l_k) = k, h(0) = 1.
  ThresholdFunction h() const;
  RecursiveTreeSystem system() const;

 private:
  std::vector<int> seq_;
  std::map<int, Rational> weights_;  // positive entries only
};

/// Throws ValidationError unless the sequence is strictly increasing and
/// positive. A sequence starting at 1 yields delta_1.
CritSpec crit_measure(const std::vector<int>& support_seq);

/// |A_k| = l_m! * chi(value): the number of permutations of length l_m whose
/// chain first meets the support at `value` (0 for "never").
BigInt permutation_class_size(const CritSpec& spec, int value);

/// (x - psi(x)) / chi(0) written as sum_r c_r Bg(l_m, r), r = m+1..l_m.
/// Returns c_{m+1}, ..., c_{l_m}. Requires l_1 >= 2.
std::vector<Rational> bernstein_tail_representation(const CritSpec& spec);

struct DecompositionTerm {
  Rational coefficient;
  CritSpec crit;
};

struct Decomposition {
  std::vector<DecompositionTerm> terms;
  std::map<int, Rational> tier_weights;  // a_l for every positive support value
  int m = 0;
  bool normalized = false;  // thresholds rewritten because h(l) > l somewhere
  RecursiveTreeSystem source;  // the (possibly normalized) decomposed system

  /// sum of coefficient * crit weights.
  std::map<int, Rational> reconstruct() const;
};

/// Canonical decomposition of an m-critical rational-mode system with h
/// nondecreasing on its support. Throws ValidationError naming the failed
/// hypothesis.
Decomposition decompose(const RecursiveTreeSystem& system);

/// Convex mixture of crit measures, with h(l) = tier of l. Throws
/// ValidationError if two components disagree on the tier of a value.
RecursiveTreeSystem mix_crit_measures(const std::vector<std::pair<Rational, CritSpec>>& parts);

/// Law of R_n on {1..n} (entry r-1 is P[R_n = r]), by forward recursion.
std::vector<Rational> rn_distribution(int n);

/// One step of the chain: R_{n+1} given R_n = r.
int rn_step(int n, int r, std::mt19937_64& rng);
/// R_n via insertion of n+1 into a uniformly grown permutation (cross-check).
int rn_by_insertion(int n, std::mt19937_64& rng);

struct CritMonteCarlo {
  std::int64_t trials = 0;
  std::map<int, std::int64_t> counts;  // stopping value (0 = never stopped)
  std::map<int, double> frequency;
  std::map<int, double> std_error;
};

/// Stopping value T = min{l_k : R_{l_k} = k} over independent chains.
CritMonteCarlo crit_measure_mc(const std::vector<int>& support_seq, std::int64_t trials, std::uint64_t seed);

struct MeanEstimate {
  std::int64_t trials = 0;
  double mean = 0.0;
  double std_error = 0.0;
};

/// Empirical mean of X_n = Bg(n, R_n, x).
MeanEstimate martingale_mean(int n, double x, std::int64_t trials, std::uint64_t seed);

/// (x - sum_{1 <= l < r} chi(l) Bg(l, h(l), x)) / Bg(r, k, x).
double phi(const RecursiveTreeSystem& system, int r, int k, double x);

}  // namespace rts

#pragma once

// Galton-Watson tree sampling, admissible-subtree events and their Monte Carlo
// estimates, minimal admissible subtree sizes, and the distributional growth
// recursions for minimal subtrees.

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "rts/core.hpp"

namespace rts {

inline constexpr std::int64_t kDefaultVertexBudget = 10'000'000;

/// Inverse-CDF sampler over a finite child distribution.
class ChildSampler {
 public:
  explicit ChildSampler(const ChildDistribution& chi);
  int operator()(std::mt19937_64& rng) const;

 private:
  std::vector<int> values_;
  std::vector<double> cdf_;
};

/// Finite rooted tree in breadth-first order. Vertices at the cutoff depth are
/// leaves of the sample; their child counts are not sampled (stored as -1).
struct SampledTree {
  std::vector<int> child_count;
  std::vector<int> depth;
  std::vector<std::int64_t> first_child;  // -1 when the vertex has no sampled children
  int cutoff_depth = 0;
  bool budget_exceeded = false;

  std::int64_t size() const { return static_cast<std::int64_t>(child_count.size()); }
  bool at_cutoff(std::int64_t v) const { return depth[static_cast<std::size_t>(v)] == cutoff_depth; }
};

SampledTree sample_tree(const ChildDistribution& chi, int cutoff_depth, std::mt19937_64& rng,
                        std::int64_t vertex_budget = kDefaultVertexBudget);
SampledTree sample_tree(const ChildDistribution& chi, int cutoff_depth, std::uint64_t seed,
                        std::int64_t vertex_budget = kDefaultVertexBudget);

/// Per-vertex marks: cutoff leaves are good; an internal vertex is good iff at
/// least h(n) of its n children are good.
std::vector<char> admissible_marks(const SampledTree& tree, const ThresholdFunction& h);
bool has_admissible(const SampledTree& tree, const ThresholdFunction& h);

/// Root mark of the two-phase bounded-tier event: below level_n only vertices
/// with h(n) <= m may be used.
bool bounded_tier_event(const SampledTree& tree, const ThresholdFunction& h, int m, int level_n);

inline constexpr std::int64_t kNoSubtree = std::numeric_limits<std::int64_t>::max();

/// M(v): fewest cutoff-level vertices over admissible subtrees rooted at v
/// (kNoSubtree when none exists).
std::vector<std::int64_t> min_level_marks(const SampledTree& tree, const ThresholdFunction& h);
/// Vertices of a minimal admissible subtree realizing M(root); empty if none.
std::vector<std::int64_t> min_subtree_witness(const SampledTree& tree, const ThresholdFunction& h);
/// True iff `vertices` (any order) is a root-containing subtree with at least
/// h(n) children at each non-cutoff vertex; `exact` demands exactly h(n).
bool is_admissible_subtree(const SampledTree& tree, const ThresholdFunction& h, const std::vector<std::int64_t>& vertices,
                           bool exact);

struct EventEstimate {
  std::string event;
  std::int64_t trials = 0;      // trials that completed
  std::int64_t successes = 0;
  std::int64_t excluded = 0;    // trials aborted by the vertex budget
  double estimate = 0.0;
  double std_error = 0.0;
  double predicted = 0.0;
  std::string prediction;       // how the prediction was formed
  double z = 0.0;
};

/// Frequency of "T has an admissible subtree to the cutoff" against
/// psi^cutoff(1).
EventEstimate estimate_admissible(const RecursiveTreeSystem& system, int cutoff_depth, std::int64_t trials,
                                  std::uint64_t seed, std::int64_t vertex_budget = kDefaultVertexBudget);

/// Two-phase event against psi^level_n(psibar^(cutoff - level_n)(1)), psibar
/// the map of the m-truncation. Requires h nondecreasing on the support.
EventEstimate estimate_bounded_tier(const RecursiveTreeSystem& system, int m, int level_n, int cutoff_depth,
                                    std::int64_t trials, std::uint64_t seed,
                                    std::int64_t vertex_budget = kDefaultVertexBudget);

double bounded_tier_prediction(const RecursiveTreeSystem& system, int m, int level_n, int cutoff_depth);

struct LevelSummary {
  int level = 0;
  std::int64_t n = 0;  // samples summarized (conditioned samples for tree runs)
  double mean = 0.0;
  double std_error = 0.0;
  double p50 = 0.0;
  double p90 = 0.0;
};

struct MinLevelSizes {
  LevelSummary summary;
  std::int64_t trials = 0;
  std::int64_t without_subtree = 0;
  std::int64_t excluded = 0;
  std::vector<std::int64_t> samples;  // finite values, trial order
};

/// Minimal level-cutoff vertex count over admissible subtrees, conditioned on
/// existence.
MinLevelSizes min_level_sizes(const RecursiveTreeSystem& system, int cutoff_depth, std::int64_t trials,
                              std::uint64_t seed, std::int64_t vertex_budget = kDefaultVertexBudget);

/// One branch of a growth recursion: with probability `prob`, the next value
/// is the sum of the `keep` smallest of `copies` independent current values.
struct GrowthCase {
  double prob;
  int copies;
  int keep;
};

/// Cases for the minimal subtree size conditioned on the event whose
/// probability is the fixed point x0: a root with l children, n of them in
/// the event (n >= h(l)), keeps the h(l) smallest.
std::vector<GrowthCase> conditioned_cases(const RecursiveTreeSystem& system, double x0);
/// Y' = min(Y, Y') or Y + Y' with probability 1/2 each.
std::vector<GrowthCase> minplus_cases();

struct GrowthRun {
  std::vector<LevelSummary> levels;  // levels 0..depth
  std::vector<double> final_sample;  // sorted values at the last level
  double x0 = 1.0;

  /// Fraction of the final sample at most `threshold`.
  double fraction_at_most(double threshold) const;
};

/// Runs the recursion from X_0 = 1 for `depth` levels with a population of
/// `trials` values per level, each drawn from the previous level's population.
GrowthRun run_growth(const std::vector<GrowthCase>& cases, int depth, std::int64_t trials, std::uint64_t seed);

/// kind: "minplus", "fig5" (param t) or "fig1_conditioned" (param t).
GrowthRun recursion_growth(const std::string& kind, double t, int depth, std::int64_t trials, std::uint64_t seed);

}  // namespace rts

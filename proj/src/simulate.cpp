#include "rts/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rts/admap.hpp"
#include "rts/fixedpoint.hpp"
#include "rts/parallel.hpp"

namespace rts {

ChildSampler::ChildSampler(const ChildDistribution& chi) {
  double acc = 0.0;
  for (const auto& [value, w] : chi.weights()) {
    if (w <= 0.0) continue;
    acc += w;
    values_.push_back(value);
    cdf_.push_back(acc);
  }
  if (values_.empty()) throw ValidationError("child distribution has no positive weight");
  for (double& c : cdf_) c /= acc;
  cdf_.back() = 1.0;
}

int ChildSampler::operator()(std::mt19937_64& rng) const {
  const double u = uniform01(rng);
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return values_[static_cast<std::size_t>(it - cdf_.begin())];
}

SampledTree sample_tree(const ChildDistribution& chi, int cutoff_depth, std::mt19937_64& rng,
                        std::int64_t vertex_budget) {
  if (cutoff_depth < 0) throw ValidationError("cutoff depth must be nonnegative");
  const ChildSampler sampler(chi);
  SampledTree tree;
  tree.cutoff_depth = cutoff_depth;
  tree.child_count.push_back(-1);
  tree.depth.push_back(0);
  tree.first_child.push_back(-1);
  for (std::size_t v = 0; v < tree.child_count.size(); ++v) {
    if (tree.depth[v] == cutoff_depth) continue;
    const int n = sampler(rng);
    tree.child_count[v] = n;
    if (n == 0) continue;
    if (tree.size() + n > vertex_budget) {
      tree.budget_exceeded = true;
      return tree;
    }
    tree.first_child[v] = tree.size();
    for (int i = 0; i < n; ++i) {
      tree.child_count.push_back(-1);
      tree.depth.push_back(tree.depth[v] + 1);
      tree.first_child.push_back(-1);
    }
  }
  return tree;
}

SampledTree sample_tree(const ChildDistribution& chi, int cutoff_depth, std::uint64_t seed, std::int64_t vertex_budget) {
  auto rng = trial_rng(seed, 0);
  return sample_tree(chi, cutoff_depth, rng, vertex_budget);
}

namespace {

void require_complete(const SampledTree& tree) {
  if (tree.budget_exceeded) throw NumericError("sampled tree exceeded its vertex budget");
}

// Bottom-up pass over a breadth-first tree: good[v] from the children's marks.
template <class Rule>
std::vector<char> bottom_up(const SampledTree& tree, Rule rule) {
  require_complete(tree);
  std::vector<char> good(static_cast<std::size_t>(tree.size()), 0);
  for (std::int64_t v = tree.size() - 1; v >= 0; --v) good[static_cast<std::size_t>(v)] = rule(v, good) ? 1 : 0;
  return good;
}

int count_good(const SampledTree& tree, std::int64_t v, const std::vector<char>& good) {
  const int n = tree.child_count[static_cast<std::size_t>(v)];
  const std::int64_t first = tree.first_child[static_cast<std::size_t>(v)];
  int c = 0;
  for (int i = 0; i < n; ++i) c += good[static_cast<std::size_t>(first + i)];
  return c;
}

std::vector<char> restricted_marks(const SampledTree& tree, const ThresholdFunction& h, int m) {
  return bottom_up(tree, [&](std::int64_t v, const std::vector<char>& good) {
    if (tree.at_cutoff(v)) return true;
    const int k = h(tree.child_count[static_cast<std::size_t>(v)]);
    return k <= m && count_good(tree, v, good) >= k;
  });
}

std::vector<std::int64_t> parents(const SampledTree& tree) {
  std::vector<std::int64_t> parent(static_cast<std::size_t>(tree.size()), -1);
  for (std::int64_t v = 0; v < tree.size(); ++v) {
    const int n = tree.child_count[static_cast<std::size_t>(v)];
    for (int i = 0; i < n; ++i) parent[static_cast<std::size_t>(tree.first_child[static_cast<std::size_t>(v)] + i)] = v;
  }
  return parent;
}

}  // namespace

std::vector<char> admissible_marks(const SampledTree& tree, const ThresholdFunction& h) {
  return bottom_up(tree, [&](std::int64_t v, const std::vector<char>& good) {
    if (tree.at_cutoff(v)) return true;
    return count_good(tree, v, good) >= h(tree.child_count[static_cast<std::size_t>(v)]);
  });
}

bool has_admissible(const SampledTree& tree, const ThresholdFunction& h) { return admissible_marks(tree, h)[0] != 0; }

bool bounded_tier_event(const SampledTree& tree, const ThresholdFunction& h, int m, int level_n) {
  const auto restricted = restricted_marks(tree, h, m);
  auto general = bottom_up(tree, [&](std::int64_t v, const std::vector<char>& good) {
    if (tree.depth[static_cast<std::size_t>(v)] >= level_n) return restricted[static_cast<std::size_t>(v)] != 0;
    if (tree.at_cutoff(v)) return true;
    return count_good(tree, v, good) >= h(tree.child_count[static_cast<std::size_t>(v)]);
  });
  return general[0] != 0;
}

std::vector<std::int64_t> min_level_marks(const SampledTree& tree, const ThresholdFunction& h) {
  require_complete(tree);
  std::vector<std::int64_t> best(static_cast<std::size_t>(tree.size()), kNoSubtree);
  std::vector<std::int64_t> kids;
  for (std::int64_t v = tree.size() - 1; v >= 0; --v) {
    const auto sv = static_cast<std::size_t>(v);
    if (tree.at_cutoff(v)) {
      best[sv] = 1;
      continue;
    }
    const int n = tree.child_count[sv];
    const int k = h(n);
    if (k > n) continue;
    kids.clear();
    for (int i = 0; i < n; ++i) kids.push_back(best[static_cast<std::size_t>(tree.first_child[sv] + i)]);
    std::partial_sort(kids.begin(), kids.begin() + k, kids.end());
    std::int64_t total = 0;
    for (int i = 0; i < k; ++i) {
      if (kids[static_cast<std::size_t>(i)] == kNoSubtree || total > kNoSubtree - kids[static_cast<std::size_t>(i)]) {
        total = kNoSubtree;
        break;
      }
      total += kids[static_cast<std::size_t>(i)];
    }
    best[sv] = total;
  }
  return best;
}

std::vector<std::int64_t> min_subtree_witness(const SampledTree& tree, const ThresholdFunction& h) {
  const auto best = min_level_marks(tree, h);
  if (best[0] == kNoSubtree) return {};
  std::vector<std::int64_t> out;
  std::vector<std::int64_t> stack{0};
  std::vector<std::int64_t> kids;
  while (!stack.empty()) {
    const std::int64_t v = stack.back();
    stack.pop_back();
    out.push_back(v);
    if (tree.at_cutoff(v)) continue;
    const auto sv = static_cast<std::size_t>(v);
    const int n = tree.child_count[sv];
    kids.resize(static_cast<std::size_t>(n));
    std::iota(kids.begin(), kids.end(), tree.first_child[sv]);
    std::stable_sort(kids.begin(), kids.end(), [&](std::int64_t a, std::int64_t b) {
      return best[static_cast<std::size_t>(a)] < best[static_cast<std::size_t>(b)];
    });
    for (int i = 0; i < h(n); ++i) stack.push_back(kids[static_cast<std::size_t>(i)]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool is_admissible_subtree(const SampledTree& tree, const ThresholdFunction& h, const std::vector<std::int64_t>& vertices,
                           bool exact) {
  require_complete(tree);
  std::vector<char> in(static_cast<std::size_t>(tree.size()), 0);
  for (std::int64_t v : vertices) {
    if (v < 0 || v >= tree.size()) return false;
    in[static_cast<std::size_t>(v)] = 1;
  }
  if (vertices.empty() || !in[0]) return false;
  const auto parent = parents(tree);
  for (std::int64_t v = 0; v < tree.size(); ++v) {
    const auto sv = static_cast<std::size_t>(v);
    if (!in[sv]) continue;
    if (v != 0 && !in[static_cast<std::size_t>(parent[sv])]) return false;
    if (tree.at_cutoff(v)) continue;
    const int n = tree.child_count[sv];
    const int c = count_good(tree, v, in);
    if (exact ? c != h(n) : c < h(n)) return false;
  }
  return true;
}

namespace {

struct BudgetExceeded {};

// Depth-first evaluation that samples children only until the outcome at a
// vertex is decided. Unsampled subtrees are independent of the result, so the
// root mark has the same law as on a fully sampled tree.
class LazyEvaluator {
 public:
  LazyEvaluator(const RecursiveTreeSystem& system, int cutoff, std::int64_t budget)
      : sampler_(system.chi()), cutoff_(cutoff), budget_(budget) {
    const int top = system.chi().max_value();
    h_.assign(static_cast<std::size_t>(top) + 1, 0);
    for (int v : system.chi().support()) h_[static_cast<std::size_t>(v)] = system.h()(v);
  }

  bool admissible(std::mt19937_64& rng) {
    used_ = 0;
    return admissible_at(0, rng);
  }
  bool bounded_tier(std::mt19937_64& rng, int m, int level_n) {
    used_ = 0;
    m_ = m;
    level_n_ = level_n;
    return general_at(0, rng);
  }

 private:
  template <class Child>
  static bool at_least(int k, int n, Child child) {
    if (k <= 0) return true;
    if (k > n) return false;
    int good = 0;
    for (int i = 0; i < n; ++i) {
      if (child()) ++good;
      if (good >= k) return true;
      if (good + (n - i - 1) < k) return false;
    }
    return false;
  }

  int draw(std::mt19937_64& rng) {
    if (++used_ > budget_) throw BudgetExceeded{};
    return sampler_(rng);
  }

  bool admissible_at(int depth, std::mt19937_64& rng) {
    if (depth == cutoff_) return true;
    const int n = draw(rng);
    return at_least(h_[static_cast<std::size_t>(n)], n, [&] { return admissible_at(depth + 1, rng); });
  }
  bool restricted_at(int depth, std::mt19937_64& rng) {
    if (depth == cutoff_) return true;
    const int n = draw(rng);
    const int k = h_[static_cast<std::size_t>(n)];
    if (k > m_) return false;
    return at_least(k, n, [&] { return restricted_at(depth + 1, rng); });
  }
  bool general_at(int depth, std::mt19937_64& rng) {
    if (depth >= level_n_) return restricted_at(depth, rng);
    if (depth == cutoff_) return true;
    const int n = draw(rng);
    return at_least(h_[static_cast<std::size_t>(n)], n, [&] { return general_at(depth + 1, rng); });
  }

  ChildSampler sampler_;
  std::vector<int> h_;
  int cutoff_;
  std::int64_t budget_;
  std::int64_t used_ = 0;
  int m_ = 0;
  int level_n_ = 0;
};

struct EventCounts {
  std::int64_t successes = 0;
  std::int64_t excluded = 0;
};

template <class Event>
EventEstimate run_event(const RecursiveTreeSystem& system, int cutoff_depth, std::int64_t trials, std::uint64_t seed,
                        std::int64_t vertex_budget, Event event) {
  if (trials < 1) throw ValidationError("trials must be positive");
  if (cutoff_depth < 0) throw ValidationError("cutoff depth must be nonnegative");
  const auto chunks = run_chunked<EventCounts>(trials, [&](std::int64_t begin, std::int64_t end, EventCounts& acc) {
    LazyEvaluator eval(system, cutoff_depth, vertex_budget);
    for (std::int64_t i = begin; i < end; ++i) {
      auto rng = trial_rng(seed, static_cast<std::uint64_t>(i));
      try {
        if (event(eval, rng)) ++acc.successes;
      } catch (const BudgetExceeded&) {
        ++acc.excluded;
      }
    }
  });
  EventEstimate out;
  for (const auto& c : chunks) {
    out.successes += c.successes;
    out.excluded += c.excluded;
  }
  out.trials = trials - out.excluded;
  if (out.trials > 0) {
    const double n = static_cast<double>(out.trials);
    out.estimate = static_cast<double>(out.successes) / n;
    out.std_error = std::sqrt(out.estimate * (1.0 - out.estimate) / n);
  }
  return out;
}

void score(EventEstimate& est, double predicted) {
  est.predicted = predicted;
  double se = est.std_error;
  if (se == 0.0 && est.trials > 0) se = std::sqrt(predicted * (1.0 - predicted) / static_cast<double>(est.trials));
  const double diff = est.estimate - predicted;
  if (se > 0.0)
    est.z = diff / se;
  else
    est.z = std::abs(diff) <= 1e-12 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
}

}  // namespace

EventEstimate estimate_admissible(const RecursiveTreeSystem& system, int cutoff_depth, std::int64_t trials,
                                  std::uint64_t seed, std::int64_t vertex_budget) {
  auto est = run_event(system, cutoff_depth, trials, seed, vertex_budget,
                       [](LazyEvaluator& eval, std::mt19937_64& rng) { return eval.admissible(rng); });
  est.event = "admissible";
  est.prediction = "psi^" + std::to_string(cutoff_depth) + "(1)";
  score(est, iterate_psi(system, 1.0, cutoff_depth).back());
  return est;
}

double bounded_tier_prediction(const RecursiveTreeSystem& system, int m, int level_n, int cutoff_depth) {
  if (m < 1) throw ValidationError("m must be at least 1");
  if (level_n < 0 || level_n > cutoff_depth) throw ValidationError("level must lie in [0, cutoff]");
  if (!system.h().is_increasing()) throw ValidationError("bounded-tier event requires h nondecreasing");
  const double y = iterate_psi(m_truncation(system, m), 1.0, cutoff_depth - level_n).back();
  return iterate_psi(system, y, level_n).back();
}

EventEstimate estimate_bounded_tier(const RecursiveTreeSystem& system, int m, int level_n, int cutoff_depth,
                                    std::int64_t trials, std::uint64_t seed, std::int64_t vertex_budget) {
  const double predicted = bounded_tier_prediction(system, m, level_n, cutoff_depth);
  auto est = run_event(system, cutoff_depth, trials, seed, vertex_budget, [&](LazyEvaluator& eval, std::mt19937_64& rng) {
    return eval.bounded_tier(rng, m, level_n);
  });
  est.event = "bounded_tier";
  est.prediction = "psi^" + std::to_string(level_n) + "(psibar_" + std::to_string(m) + "^" +
                   std::to_string(cutoff_depth - level_n) + "(1))";
  score(est, predicted);
  return est;
}

namespace {

LevelSummary summarize(int level, std::vector<double> values) {
  LevelSummary s;
  s.level = level;
  s.n = static_cast<std::int64_t>(values.size());
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  std::sort(values.begin(), values.end());
  auto rank = [&](double p) {
    const auto idx = static_cast<std::size_t>(std::max(1.0, std::ceil(p * n)) - 1.0);
    return values[std::min(idx, values.size() - 1)];
  };
  s.p50 = rank(0.5);
  s.p90 = rank(0.9);
  return s;
}

struct MinLevelAcc {
  std::vector<std::int64_t> samples;
  std::int64_t without = 0;
  std::int64_t excluded = 0;
};

}  // namespace

MinLevelSizes min_level_sizes(const RecursiveTreeSystem& system, int cutoff_depth, std::int64_t trials,
                              std::uint64_t seed, std::int64_t vertex_budget) {
  if (trials < 1) throw ValidationError("trials must be positive");
  const auto chunks = run_chunked<MinLevelAcc>(trials, [&](std::int64_t begin, std::int64_t end, MinLevelAcc& acc) {
    for (std::int64_t i = begin; i < end; ++i) {
      auto rng = trial_rng(seed, static_cast<std::uint64_t>(i));
      const auto tree = sample_tree(system.chi(), cutoff_depth, rng, vertex_budget);
      if (tree.budget_exceeded) {
        ++acc.excluded;
        continue;
      }
      const std::int64_t x = min_level_marks(tree, system.h())[0];
      if (x == kNoSubtree)
        ++acc.without;
      else
        acc.samples.push_back(x);
    }
  });
  MinLevelSizes out;
  out.trials = trials;
  for (const auto& c : chunks) {
    out.samples.insert(out.samples.end(), c.samples.begin(), c.samples.end());
    out.without_subtree += c.without;
    out.excluded += c.excluded;
  }
  out.summary = summarize(cutoff_depth, std::vector<double>(out.samples.begin(), out.samples.end()));
  return out;
}

std::vector<GrowthCase> conditioned_cases(const RecursiveTreeSystem& system, double x0) {
  if (!(x0 > 0.0 && x0 <= 1.0)) throw ValidationError("conditioning probability must lie in (0, 1]");
  std::vector<GrowthCase> cases;
  for (const auto& [l, w] : system.chi().weights()) {
    if (w <= 0.0 || l == 0) continue;
    const int k = system.h()(l);
    for (int n = k; n <= l; ++n) {
      const double p = w * be(l, n, x0) / x0;
      if (p > 0.0) cases.push_back({p, n, k});
    }
  }
  if (cases.empty()) throw ValidationError("conditioned recursion has no cases");
  return cases;
}

std::vector<GrowthCase> minplus_cases() { return {{0.5, 2, 1}, {0.5, 2, 2}}; }

double GrowthRun::fraction_at_most(double threshold) const {
  if (final_sample.empty()) return 0.0;
  const auto it = std::upper_bound(final_sample.begin(), final_sample.end(), threshold);
  return static_cast<double>(it - final_sample.begin()) / static_cast<double>(final_sample.size());
}

GrowthRun run_growth(const std::vector<GrowthCase>& cases, int depth, std::int64_t trials, std::uint64_t seed) {
  if (trials < 1) throw ValidationError("trials must be positive");
  if (depth < 0) throw ValidationError("depth must be nonnegative");
  if (cases.empty()) throw ValidationError("growth recursion needs at least one case");
  std::vector<double> cdf;
  double total = 0.0;
  for (const auto& c : cases) {
    if (c.prob < 0.0 || c.copies < 1 || c.keep < 1 || c.keep > c.copies) throw ValidationError("invalid growth case");
    total += c.prob;
    cdf.push_back(total);
  }
  if (!(total > 0.0)) throw ValidationError("growth case probabilities sum to zero");
  for (double& c : cdf) c /= total;
  cdf.back() = 1.0;

  GrowthRun run;
  std::vector<double> pool(static_cast<std::size_t>(trials), 1.0);
  run.levels.push_back(summarize(0, pool));
  std::vector<double> next(pool.size());
  for (int level = 1; level <= depth; ++level) {
    const std::uint64_t level_seed = splitmix64(seed + static_cast<std::uint64_t>(level));
    run_chunked<char>(trials, [&](std::int64_t begin, std::int64_t end, char&) {
      std::vector<double> draw;
      std::uniform_int_distribution<std::int64_t> pick(0, trials - 1);
      // Chunk boundaries depend only on `trials`, so one stream per chunk
      // keeps the result independent of the thread count.
      auto rng = trial_rng(level_seed, static_cast<std::uint64_t>(begin));
      for (std::int64_t i = begin; i < end; ++i) {
        const double u = uniform01(rng);
        const auto idx = std::min<std::size_t>(
            static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin()), cases.size() - 1);
        const GrowthCase& c = cases[idx];
        draw.clear();
        for (int j = 0; j < c.copies; ++j) draw.push_back(pool[static_cast<std::size_t>(pick(rng))]);
        std::partial_sort(draw.begin(), draw.begin() + c.keep, draw.end());
        next[static_cast<std::size_t>(i)] = std::accumulate(draw.begin(), draw.begin() + c.keep, 0.0);
      }
    });
    pool.swap(next);
    run.levels.push_back(summarize(level, pool));
  }
  run.final_sample = pool;
  std::sort(run.final_sample.begin(), run.final_sample.end());
  return run;
}

GrowthRun recursion_growth(const std::string& kind, double t, int depth, std::int64_t trials, std::uint64_t seed) {
  if (kind == "minplus") return run_growth(minplus_cases(), depth, trials, seed);
  if (kind == "fig5") {
    const auto system = named_family("fig5").instantiate(t);
    auto run = run_growth(conditioned_cases(system, 1.0), depth, trials, seed);
    run.x0 = 1.0;
    return run;
  }
  if (kind == "fig1_conditioned") {
    const auto system = named_family("fig1").instantiate(t);
    const auto x0 = find_fixed_points(system).smallest_nonzero();
    if (!x0) throw ValidationError("fig1 system has no nonzero fixed point at this t");
    auto run = run_growth(conditioned_cases(system, x0->x), depth, trials, seed);
    run.x0 = x0->x;
    return run;
  }
  throw ValidationError("unknown recursion kind '" + kind + "'");
}

}  // namespace rts

#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "helpers.hpp"
#include "rts/fixedpoint.hpp"
#include "rts/parallel.hpp"
#include "rts/simulate.hpp"

using namespace rts;
using testing::exact_system;

namespace {

bool within(const EventEstimate& e, double sigmas = 3.0) { return std::abs(e.z) <= sigmas; }

struct ThreadEnv {
  explicit ThreadEnv(const char* n) { setenv("RTS_LAB_THREADS", n, 1); }
  ~ThreadEnv() { unsetenv("RTS_LAB_THREADS"); }
};

}  // namespace

TEST_CASE("sample tree shapes") {
  const auto d2 = ChildDistribution::exact({{2, Rational(1)}});
  const auto t = sample_tree(d2, 3, std::uint64_t{1});
  CHECK(t.size() == 15);
  for (std::int64_t v = 0; v < t.size(); ++v) {
    if (t.at_cutoff(v)) {
      CHECK(t.child_count[static_cast<std::size_t>(v)] == -1);
      continue;
    }
    const auto first = t.first_child[static_cast<std::size_t>(v)];
    for (int i = 0; i < 2; ++i) CHECK(t.depth[static_cast<std::size_t>(first + i)] == t.depth[static_cast<std::size_t>(v)] + 1);
  }
  CHECK(sample_tree(d2, 0, std::uint64_t{1}).size() == 1);

  const auto big = sample_tree(d2, 30, std::uint64_t{1}, 1000);
  CHECK(big.budget_exceeded);
  CHECK_THROWS_AS(has_admissible(big, ThresholdFunction(std::map<int, int>{{2, 1}})), NumericError);
}

TEST_CASE("poisson root child count") {
  const auto chi = poisson_truncated(2.0, 1e-12);
  const int trials = 100000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < trials; ++i) {
    auto rng = trial_rng(9, static_cast<std::uint64_t>(i));
    const double n = sample_tree(chi, 1, rng).child_count[0];
    s1 += n;
    s2 += n * n;
  }
  const double mean = s1 / trials;
  const double se = std::sqrt((s2 / trials - mean * mean) / trials);
  CHECK(std::abs(mean - 2.0) <= 3 * se);
}

TEST_CASE("single vertex trees are never admissible") {
  const auto s = exact_system({{0, "1"}}, {{0, 1}});
  for (int depth = 1; depth <= 3; ++depth) {
    const auto t = sample_tree(s.chi(), depth, std::uint64_t{4});
    CHECK(t.size() == 1);
    CHECK_FALSE(has_admissible(t, s.h()));
  }
  CHECK(has_admissible(sample_tree(s.chi(), 0, std::uint64_t{4}), s.h()));
  const auto e = estimate_admissible(s, 2, 100, 1);
  CHECK(e.estimate == 0.0);
  CHECK(e.predicted == 0.0);
  CHECK(e.z == 0.0);
}

TEST_CASE("admissible estimates against iteration") {
  const auto fig4 = estimate_admissible(named_system("fig4"), 10, 100000, 11);
  CHECK(fig4.excluded == 0);
  CHECK(fig4.trials == 100000);
  CHECK(within(fig4));
  CHECK(fig4.predicted == doctest::Approx(iterate_psi(named_system("fig4"), 1.0, 10).back()));

  PoissonFamily p;
  const auto pois = p.instantiate(2.0);
  const auto e = estimate_admissible(pois, 20, 100000, 12);
  CHECK(within(e));
  CHECK(std::abs(e.predicted - 0.79681) < 1e-3);
}

TEST_CASE("materialized marks agree with iteration") {
  const auto s = named_family("fig1").instantiate(0.1);
  const int trials = 20000;
  int hits = 0;
  for (int i = 0; i < trials; ++i) {
    auto rng = trial_rng(21, static_cast<std::uint64_t>(i));
    hits += has_admissible(sample_tree(s.chi(), 8, rng), s.h());
  }
  const double p = iterate_psi(s, 1.0, 8).back();
  CHECK(std::abs(hits / static_cast<double>(trials) - p) <= 3 * std::sqrt(p * (1 - p) / trials));
}

TEST_CASE("bounded tier estimates") {
  const auto s = named_family("fig2").instantiate(0.05);
  const auto e = estimate_bounded_tier(s, 1, 0, 30, 100000, 13);
  CHECK(within(e));
  const double xbar = find_fixed_points(m_truncation(s, 1)).smallest_nonzero()->x;
  CHECK(e.predicted == doctest::Approx(iterate_psi(m_truncation(s, 1), 1.0, 30).back()));
  CHECK(std::abs(bounded_tier_prediction(s, 1, 0, 2000) - xbar) < 1e-9);

  // Same law as the truncated system's admissible event.
  const auto a = estimate_admissible(m_truncation(s, 1), 30, 100000, 14);
  CHECK(std::abs(a.estimate - e.estimate) <= 3 * std::hypot(a.std_error, e.std_error));

  const double x0 = find_fixed_points(s).smallest_nonzero()->x;
  double prev = 0.0;
  for (int level : {0, 2, 4, 8}) {
    const double p = bounded_tier_prediction(s, 1, level, 30);
    CHECK(p >= prev);
    CHECK(p <= x0 + 1e-12);
    prev = p;
  }
  CHECK(x0 - prev < x0 - bounded_tier_prediction(s, 1, 0, 30));

  CHECK_THROWS_AS(bounded_tier_prediction(s, 0, 0, 30), ValidationError);
  CHECK_THROWS_AS(bounded_tier_prediction(s, 1, 31, 30), ValidationError);
  const auto dec = exact_system({{0, "1/2"}, {2, "1/4"}, {3, "1/4"}}, {{2, 2}, {3, 1}});
  CHECK_THROWS_AS(estimate_bounded_tier(dec, 1, 0, 5, 10, 1), ValidationError);
}

TEST_CASE("bounded tier monotone on fixed trees") {
  const auto s = named_family("fig2").instantiate(0.05);
  for (int i = 0; i < 300; ++i) {
    auto rng = trial_rng(17, static_cast<std::uint64_t>(i));
    const auto t = sample_tree(s.chi(), 6, rng);
    for (int m = 1; m <= 4; ++m) {
      bool prev = false;
      for (int level = 0; level <= 6; ++level) {
        const bool now = bounded_tier_event(t, s.h(), m, level);
        CHECK((!prev || now));
        prev = now;
        if (m > 1) CHECK((!bounded_tier_event(t, s.h(), m - 1, level) || now));
      }
      CHECK(bounded_tier_event(t, s.h(), m, 6) == has_admissible(t, s.h()));
    }
  }
}

TEST_CASE("minimal admissible subtrees") {
  const auto d2h1 = exact_system({{2, "1"}}, {{2, 1}});
  const auto d2h2 = exact_system({{2, "1"}}, {{2, 2}});
  for (int n = 0; n <= 6; ++n) {
    const auto t = sample_tree(d2h1.chi(), n, std::uint64_t{1});
    CHECK(min_level_marks(t, d2h1.h())[0] == 1);
    CHECK(min_level_marks(t, d2h2.h())[0] == (std::int64_t{1} << n));
  }
  const auto r = min_level_sizes(d2h2, 5, 50, 3);
  CHECK(r.summary.mean == 32.0);
  CHECK(r.summary.n == 50);

  const auto s = named_family("fig2").instantiate(0.05);
  for (int i = 0; i < 300; ++i) {
    auto rng = trial_rng(23, static_cast<std::uint64_t>(i));
    const auto t = sample_tree(s.chi(), 5, rng);
    const auto best = min_level_marks(t, s.h());
    CHECK(has_admissible(t, s.h()) == (best[0] != kNoSubtree));
    if (best[0] == kNoSubtree) {
      CHECK(min_subtree_witness(t, s.h()).empty());
      continue;
    }
    const auto w = min_subtree_witness(t, s.h());
    CHECK(is_admissible_subtree(t, s.h(), w, true));
    std::int64_t leaves = 0;
    for (auto v : w) leaves += t.at_cutoff(v);
    CHECK(leaves == best[0]);
  }
}

TEST_CASE("fig5 minimal level sizes grow") {
  const auto s = named_family("fig5").instantiate(0.1);
  double prev = 0.0;
  for (int n = 4; n <= 10; ++n) {
    const auto r = min_level_sizes(s, n, 2000, 100 + n);
    CHECK(r.excluded == 0);
    CHECK(r.summary.n + r.without_subtree == 2000);
    CHECK(r.summary.mean > prev);
    prev = r.summary.mean;
  }
}

TEST_CASE("growth recursions") {
  const auto mp = recursion_growth("minplus", 0.0, 1, 100000, 5);
  CHECK(std::abs(mp.levels[1].mean - 1.5) <= 3 * mp.levels[1].std_error);
  CHECK(mp.levels[0].mean == 1.0);

  const auto f5 = recursion_growth("fig5", 0.1, 6, 20000, 6);
  for (std::size_t n = 1; n < f5.levels.size(); ++n) CHECK(f5.levels[n].mean > f5.levels[n - 1].mean);

  const auto cases = conditioned_cases(named_family("fig1").instantiate(0.1), 0.5625);
  double total = 0.0;
  for (const auto& c : cases) total += c.prob;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  // Root with two children, exactly one in the event: 2 * (1/2) * x0 (1 - x0) / x0 = 1 - x0.
  CHECK(cases.front().prob == doctest::Approx(1 - 0.5625));
  const auto f1 = recursion_growth("fig1_conditioned", 0.1, 4, 1000, 7);
  CHECK(f1.x0 == doctest::Approx(0.5625));

  CHECK_THROWS_AS(recursion_growth("nope", 0.0, 1, 10, 1), ValidationError);
  CHECK(mp.fraction_at_most(1.0) + mp.fraction_at_most(2.0) > 0.0);
}

TEST_CASE("results do not depend on the thread count") {
  const auto s = named_family("fig1").instantiate(0.1);
  EventEstimate a, b;
  GrowthRun ga, gb;
  {
    ThreadEnv env("1");
    a = estimate_admissible(s, 8, 20000, 99);
    ga = recursion_growth("minplus", 0.0, 20, 5000, 99);
  }
  {
    ThreadEnv env("4");
    b = estimate_admissible(s, 8, 20000, 99);
    gb = recursion_growth("minplus", 0.0, 20, 5000, 99);
  }
  CHECK(a.successes == b.successes);
  CHECK(a.estimate == b.estimate);
  CHECK(ga.final_sample == gb.final_sample);
  CHECK(estimate_admissible(s, 8, 20000, 100).successes != a.successes);
}

TEST_CASE("budget exceeded trials are reported") {
  const auto s = exact_system({{3, "1"}}, {{3, 3}});
  const auto e = estimate_admissible(s, 12, 20, 1, 1000);
  CHECK(e.excluded == 20);
  CHECK(e.trials == 0);
  const auto r = min_level_sizes(s, 12, 5, 1, 1000);
  CHECK(r.excluded == 5);
}

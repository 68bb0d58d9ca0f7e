#include <doctest.h>

#include <random>

#include "generators.hpp"
#include "oracle.hpp"
#include "rts/critmeasure.hpp"
#include "rts/fixedpoint.hpp"

using namespace rts;

namespace {

std::map<int, Rational> table(std::initializer_list<std::pair<int, Rational>> entries) {
  std::map<int, Rational> out;
  for (const auto& [v, q] : entries) {
    Rational c = q;
    c.canonicalize();
    out.emplace(v, c);
  }
  return out;
}

Rational frac(long c, const mpz_class& total) {
  Rational q(mpz_class(c), total);
  q.canonicalize();
  return q;
}

std::vector<std::vector<int>> increasing_sequences(int max_value) {
  std::vector<std::vector<int>> out;
  for (int mask = 1; mask < (1 << max_value); ++mask) {
    std::vector<int> seq;
    for (int v = 1; v <= max_value; ++v)
      if (mask & (1 << (v - 1))) seq.push_back(v);
    out.push_back(seq);
  }
  return out;
}

}  // namespace

TEST_CASE("crit tables for two-point sequences") {
  CHECK(crit_measure({2, 4}).weights() == table({{0, Rational(5, 12)}, {2, Rational(1, 2)}, {4, Rational(1, 12)}}));
  CHECK(crit_measure({2, 5}).weights() == table({{0, Rational(9, 20)}, {2, Rational(1, 2)}, {5, Rational(1, 20)}}));
  CHECK(crit_measure({3, 4}).weights() == table({{0, Rational(1, 2)}, {3, Rational(1, 3)}, {4, Rational(1, 6)}}));
  CHECK(crit_measure({3, 5}).weights() == table({{0, Rational(17, 30)}, {3, Rational(1, 3)}, {5, Rational(1, 10)}}));
  CHECK(crit_measure({1}).weights() == table({{1, Rational(1)}}));
  CHECK(crit_measure({1, 3}).weights() == table({{1, Rational(1)}}));
}

TEST_CASE("crit weights match permutation counts") {
  for (const auto& seq : increasing_sequences(7)) {
    const auto spec = crit_measure(seq);
    const auto counts = oracle::crit_counts(seq);
    mpz_class total = 0;
    for (const auto& e : counts) total += e.second;
    for (int v : {0, seq.front(), seq.back()}) {
      const auto it = counts.find(v);
      const long c = it == counts.end() ? 0 : it->second;
      CHECK(spec.weight(v) == frac(c, total));
      CHECK(permutation_class_size(spec, v) == c);
    }
    for (int v : seq) {
      const auto it = counts.find(v);
      CHECK(spec.weight(v) == frac(it == counts.end() ? 0 : it->second, total));
    }
  }
}

TEST_CASE("crit measures are concordant then subcordant") {
  for (const auto& seq : increasing_sequences(10)) {
    if (seq.size() > 4) continue;
    const auto spec = crit_measure(seq);
    const int m = spec.order();
    Rational sum = 0;
    for (const auto& e : spec.weights()) sum += e.second;
    CHECK(sum == 1);
    if (seq.front() == 1) continue;
    for (const auto& e : spec.weights()) CHECK(e.second > 0);
    const auto d = derivs_at_zero_exact(spec.system(), m + 1);
    CHECK(d[0] == 1);
    for (int k = 2; k <= m; ++k) CHECK(d[static_cast<std::size_t>(k - 1)] == 0);
    CHECK(d[static_cast<std::size_t>(m)] < 0);

    const auto c = bernstein_tail_representation(spec);
    Rational total = 0;
    for (const auto& q : c) {
      CHECK(q >= 0);
      total += q;
    }
    CHECK(total == 1);
  }
  CHECK_THROWS_AS(bernstein_tail_representation(crit_measure({1, 2})), ValidationError);
}

TEST_CASE("crit sequence validation") {
  CHECK_THROWS_AS(crit_measure({}), ValidationError);
  CHECK_THROWS_AS(crit_measure({3, 2}), ValidationError);
  CHECK_THROWS_AS(crit_measure({0, 2}), ValidationError);
  CHECK_THROWS_AS(crit_measure({2, 2}), ValidationError);
}

TEST_CASE("example45 decomposition") {
  const auto d = decompose(named_system("example45"));
  CHECK(d.m == 2);
  REQUIRE(d.terms.size() == 4);
  const std::vector<std::vector<int>> seqs{{2, 4}, {2, 5}, {3, 4}, {3, 5}};
  const std::vector<Rational> coeff{Rational(2, 9), Rational(4, 9), Rational(1, 9), Rational(2, 9)};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(d.terms[i].crit.support_seq() == seqs[i]);
    CHECK(d.terms[i].coefficient == coeff[i]);
  }
  CHECK(d.tier_weights == table({{2, Rational(2, 3)}, {3, Rational(1, 3)}, {4, Rational(1, 3)}, {5, Rational(2, 3)}}));
  CHECK(d.reconstruct() == named_system("example45").chi().exact_weights());

  const auto single = decompose(crit_measure({2, 4}).system());
  REQUIRE(single.terms.size() == 1);
  CHECK(single.terms[0].coefficient == 1);
}

TEST_CASE("decompose rejects non-critical systems") {
  CHECK_THROWS_AS(decompose(named_system("fig4")), ValidationError);
  CHECK_THROWS_AS(decompose(named_family("fig2").instantiate(Rational(1, 20))), ValidationError);
  CHECK_THROWS_AS(decompose(named_family("fig2").instantiate(0.0)), ValidationError);
}

TEST_CASE("decompose and reconstruct random critical mixtures") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = gen::critical_system(rng, 1 + trial % 3, 10);
    const auto d = decompose(s);
    Rational sum = 0;
    for (const auto& t : d.terms) {
      CHECK(t.coefficient > 0);
      sum += t.coefficient;
      for (int k = 0; k < t.crit.order(); ++k) CHECK(s.h()(t.crit.support_seq()[static_cast<std::size_t>(k)]) == k + 1);
    }
    CHECK(sum == 1);
    auto expect = s.chi().exact_weights();
    auto got = d.reconstruct();
    std::erase_if(expect, [](const auto& e) { return e.second == 0; });
    std::erase_if(got, [](const auto& e) { return e.second == 0; });
    CHECK(got == expect);
  }
}

TEST_CASE("rn chain distribution") {
  CHECK(rn_distribution(1) == std::vector<Rational>{1});
  CHECK(rn_distribution(2) == std::vector<Rational>{Rational(1, 2), Rational(1, 2)});
  for (int n = 1; n <= 12; ++n)
    for (const auto& p : rn_distribution(n)) CHECK(p == Rational(1, n));

  std::mt19937_64 rng(3);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 60000; ++i) ++counts[static_cast<std::size_t>(rn_by_insertion(6, rng))];
  for (int r = 1; r <= 6; ++r) CHECK(std::abs(counts[static_cast<std::size_t>(r)] / 60000.0 - 1.0 / 6) < 0.01);
}

TEST_CASE("martingale identity is exact") {
  for (int n = 1; n <= 10; ++n) {
    RationalPoly sum;
    for (int r = 1; r <= n; ++r) sum += bg_poly(n, r);
    sum *= Rational(1, n);
    CHECK(sum == RationalPoly::monomial(1));
  }
}

TEST_CASE("crit monte carlo") {
  const auto one = crit_measure_mc({1}, 1000, 1);
  CHECK(one.counts.at(1) == 1000);

  for (const auto& [seq, expect] : std::vector<std::pair<std::vector<int>, std::map<int, double>>>{
           {{2, 4}, {{0, 5.0 / 12}, {2, 0.5}, {4, 1.0 / 12}}}, {{2, 5}, {{0, 9.0 / 20}, {2, 0.5}, {5, 1.0 / 20}}}}) {
    const auto mc = crit_measure_mc(seq, 100000, 77);
    for (const auto& [v, p] : expect) CHECK(std::abs(mc.frequency.at(v) - p) <= 3 * mc.std_error.at(v));
  }
}

TEST_CASE("martingale mean") {
  CHECK(martingale_mean(8, 0.0, 1000, 1).mean == 0.0);
  CHECK(martingale_mean(8, 1.0, 1000, 1).mean == 1.0);
  const auto m = martingale_mean(8, 0.3, 100000, 5);
  CHECK(std::abs(m.mean - 0.3) <= 3 * m.std_error);
}

TEST_CASE("phi on fig4 and its monotonicity") {
  const auto fig4 = named_system("fig4");
  const double x0 = (10 - std::sqrt(22.0)) / 6;
  CHECK(std::abs(phi(fig4, 3, 2, x0) - 0.406) < 5e-3);

  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 1 + trial % 3;
    const auto s = gen::critical_system(rng, m, 9);
    const int r = s.max_value() + 1 + gen::uniform_int(rng, 0, 2);
    const double chi0 = s.chi().weight(0);
    double prev = 0.0;
    for (int i = 1; i <= 200; ++i) {
      const double v = phi(s, r, m + 1, i / 200.0);
      CHECK(v > prev);
      CHECK(v <= chi0 + 1e-12);
      prev = v;
    }
    CHECK(std::abs(phi(s, r, m + 1, 1.0) - chi0) <= 1e-12);

    // Putting phi(x*) on r (mass taken from 0) makes x* a fixed point.
    const double xs = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
    auto w = s.chi().weights();
    auto h = s.h().thresholds();
    const double add = phi(s, r, m + 1, xs);
    w[r] = add;
    w[0] -= add;
    h[r] = m + 1;
    const RecursiveTreeSystem t(ChildDistribution::approx(w), ThresholdFunction(h));
    bool found = false;
    for (double x : find_fixed_points(t).nonzero()) found |= std::abs(x - xs) <= 1e-10;
    CHECK(found);
  }
}

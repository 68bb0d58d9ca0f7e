#include <doctest.h>

#include <cmath>
#include <random>

#include "generators.hpp"
#include "helpers.hpp"
#include "oracle.hpp"
#include "rts/fixedpoint.hpp"

using namespace rts;

namespace {

double bisect(const std::function<double(double)>& f, double lo, double hi) {
  const bool neg_lo = f(lo) < 0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    ((f(mid) < 0) == neg_lo ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("fig4 fixed points") {
  const auto r = find_fixed_points(named_system("fig4"));
  REQUIRE(r.points.size() == 2);
  CHECK(r.points[0].x == 0.0);
  CHECK(r.points[1].x == doctest::Approx((10 - std::sqrt(22.0)) / 6).epsilon(1e-12));
  CHECK(r.points[1].multiplicity == 1);
  CHECK(r.points[1].interpretable);
  CHECK(r.nonzero().size() == 1);
}

TEST_CASE("fig1 nonzero fixed point against the bisection oracle") {
  const auto fam = named_family("fig1");
  for (double t : {0.02, 0.1, 0.2, 0.3}) {
    const auto s = fam.instantiate(t);
    const double ref = bisect([&](double x) { return static_cast<double>(oracle::psi(s.chi().weights(), s.h().thresholds(), x)) - x; },
                              0.05 * t, 0.999);
    const auto* x0 = find_fixed_points(s).smallest_nonzero();
    REQUIRE(x0);
    CHECK(x0->x == doctest::Approx(ref).epsilon(1e-10));
    CHECK(x0->x == doctest::Approx(9 * t / (1 + 6 * t)).epsilon(1e-10));
  }
  const auto exact = find_fixed_points(fam.instantiate(Rational(1, 10)));
  const auto* x0 = exact.smallest_nonzero();
  REQUIRE(x0);
  CHECK(x0->x == doctest::Approx(0.5625).epsilon(1e-14));
  REQUIRE(x0->exact);
  CHECK(*x0->exact == Rational(9, 16));
}

TEST_CASE("fig2 fixed points and interpretability") {
  const auto fam = named_family("fig2");
  const auto r0 = find_fixed_points(fam.instantiate(Rational(0)));
  const auto nz = r0.nonzero();
  REQUIRE(nz.size() == 2);
  CHECK(std::abs(nz[0] - 0.73) < 0.01);
  CHECK(std::abs(nz[1] - 0.93) < 0.01);

  const auto s = fam.instantiate(Rational(1, 20));
  const auto r = find_fixed_points(s);
  const auto x = r.nonzero();
  REQUIRE(x.size() == 3);
  CHECK(interpretable(s, x[0]));
  CHECK_FALSE(interpretable(s, x[1]));
  CHECK(interpretable(s, x[2]));
  CHECK_THROWS_AS(interpretable(s, 0.5), ValidationError);
  CHECK(r.points.back().interpretable);
}

TEST_CASE("criticality") {
  CHECK(is_critical(named_family("fig1").instantiate(Rational(0))).critical);
  const auto c2 = is_critical(named_family("fig2").instantiate(Rational(0)));
  CHECK(c2.critical);
  CHECK(*c2.d1_exact == 1);
  CHECK(*c2.d2_exact == -1);
  CHECK(is_critical(named_family("fig3").instantiate(Rational(0))).critical);
  const auto c05 = is_critical(named_family("fig2").instantiate(Rational(1, 20)));
  CHECK_FALSE(c05.critical);
  CHECK(*c05.d1_exact == Rational(11, 10));
  CHECK_THROWS_AS(is_critical(named_system("delta1")), ValidationError);
  CHECK(is_critical(named_system("example45")).critical);
}

TEST_CASE("iteration") {
  const auto fig4 = named_system("fig4");
  const double x0 = find_fixed_points(fig4).smallest_nonzero()->x;
  for (double v : iterate_psi(fig4, x0, 20)) CHECK(v == doctest::Approx(x0).epsilon(1e-12));

  const auto s = named_family("fig2").instantiate(0.05);
  const double xbar = find_fixed_points(m_truncation(s, 1)).smallest_nonzero()->x;
  const auto up = iterate_psi(s, xbar, 400);
  for (std::size_t i = 1; i < up.size(); ++i) CHECK(up[i] >= up[i - 1] - 1e-15);
  const double smallest = find_fixed_points(s).smallest_nonzero()->x;
  CHECK(std::abs(up.back() - smallest) < 1e-6);

  const auto down = iterate_psi(named_system("fig4"), 1.0, 400);
  for (std::size_t i = 1; i < down.size(); ++i) CHECK(down[i] <= down[i - 1] + 1e-15);
  CHECK(std::abs(down.back() - find_fixed_points(fig4).points.back().x) < 1e-9);
}

TEST_CASE("every grid sign change is covered and residuals are small") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    std::map<int, double> w;
    std::map<int, int> h;
    double left = 1.0;
    for (int i = 0; i < 4; ++i) {
      const int l = gen::uniform_int(rng, 1, 10);
      const double q = left * std::uniform_real_distribution<double>(0.0, 0.6)(rng);
      w[l] += q;
      left -= q;
      h[l] = gen::uniform_int(rng, 1, l);
    }
    w[0] += left;
    const auto s = testing::float_system(w, h);
    const auto r = find_fixed_points(s);
    for (const auto& p : r.points) CHECK(std::abs(psi(s, p.x) - p.x) <= 1e-10);
    for (std::size_t i = 1; i < r.points.size(); ++i) CHECK(r.points[i].x > r.points[i - 1].x);
    const auto grid = oracle::roots([&](double x) { return psi(s, x) - x; }, 1e-4, 1.0, 10000);
    for (double g : grid) {
      bool covered = false;
      for (const auto& p : r.points) covered |= std::abs(p.x - g) <= 1e-9 || (g >= p.lo - 1e-9 && g <= p.hi + 1e-9);
      CHECK(covered);
    }
  }
}

TEST_CASE("unique nonzero fixed point after truncation") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const int m = 1 + trial % 3;
    const auto s = gen::supercordant_system(rng, m, 12);
    const auto r = find_fixed_points(m_truncation(s, m));
    CHECK(r.nonzero().size() == 1);
    // psi > x just above zero, up to the smallest nonzero fixed point.
    const auto* x0 = find_fixed_points(s).smallest_nonzero();
    REQUIRE(x0);
    for (int i = 1; i < 100; ++i) {
      const Rational x = Rational(best_rational(x0->x * i / 100.0, 1000000));
      if (x <= 0) continue;
      CHECK(psi(s, x) > x);
    }
  }
}

TEST_CASE("critical systems stay below the diagonal") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const auto s = gen::critical_system(rng, 1 + trial % 3, 12);
    CHECK(is_critical(s).critical);
    for (int i = 1; i <= 100; ++i) CHECK(psi(s, Rational(i, 100)) < Rational(i, 100));
    CHECK(find_fixed_points(s).nonzero().empty());
  }
}

TEST_CASE("poisson survival fixed point") {
  PoissonFamily fam;
  fam.threshold = 1;
  const auto s = fam.instantiate(2.0);
  const double ref = bisect([](double x) { return 1 - std::exp(-2 * x) - x; }, 0.1, 1.0);
  const auto* x0 = find_fixed_points(s).smallest_nonzero();
  REQUIRE(x0);
  CHECK(std::abs(x0->x - ref) < 1e-4);
  CHECK(std::abs(x0->x - 0.79681) < 1e-4);
}

TEST_CASE("tangency search") {
  PoissonFamily p2;
  p2.threshold = 2;
  const auto f2 = find_tangency([&](double t) { return p2.instantiate(t); }, 3.0, 4.0);
  CHECK(f2.kind == TransitionKind::first_order);
  CHECK(std::abs(f2.t_star - 3.35) < 0.01);
  CHECK(std::abs(f2.jump - 0.535) < 0.005);
  const auto s = p2.instantiate(f2.t_star);
  CHECK(std::abs(psi(s, f2.x_star) - f2.x_star) < 1e-7);
  CHECK(std::abs(deriv_at(s, f2.x_star, 1) - 1.0) < 1e-3);

  PoissonFamily p1;
  const auto f1 = find_tangency([&](double t) { return p1.instantiate(t); }, 0.5, 2.0);
  CHECK(f1.kind == TransitionKind::continuous);
  CHECK(std::abs(f1.t_star - 1.0) < 1e-6);
  CHECK(f1.jump == 0.0);

  const auto fam5 = named_family("fig5");
  const auto f5 = find_tangency([&](double t) { return fam5.instantiate(t); }, 0.01, 0.3);
  CHECK(std::abs(f5.t_star - 1.0 / 6) < 1e-7);
  CHECK(std::abs(f5.x_star - 1.0) < 1e-3);

  CHECK_THROWS_AS(find_tangency([&](double t) { return fam5.instantiate(t); }, 0.2, 0.3), ValidationError);
}

TEST_CASE("continuum and fig1 at zero") {
  CHECK(find_fixed_points(named_system("delta1")).continuum);
  const auto r = find_fixed_points(named_family("fig1").instantiate(0.0));
  CHECK(r.nonzero().empty());
}

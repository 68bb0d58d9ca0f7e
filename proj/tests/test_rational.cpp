#include <doctest.h>

#include "oracle.hpp"
#include "rts/core.hpp"
#include "rts/rational.hpp"

using namespace rts;

TEST_CASE("rational parsing") {
  CHECK(parse_rational("5/12") == Rational(5, 12));
  CHECK(parse_rational("-3") == -3);
  CHECK(parse_rational("2/4") == Rational(1, 2));
  CHECK(looks_rational("7/9"));
  CHECK_FALSE(looks_rational("0.5"));
  CHECK_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("abc"), std::invalid_argument);
  CHECK(to_string(Rational(10, 4)) == "5/2");
  CHECK(to_string(make_ratio(6, 3)) == "2");
}

TEST_CASE("binomials and falling factorials") {
  for (int n = 0; n <= 40; ++n) {
    const auto row = oracle::pascal_exact(n);
    for (int k = 0; k <= n; ++k) {
      CHECK(binomial(n, k) == row[static_cast<std::size_t>(k)]);
      CHECK(binomial_d(n, k) == doctest::Approx(row[static_cast<std::size_t>(k)].get_d()).epsilon(1e-14));
    }
    CHECK(binomial(n, n + 1) == 0);
  }
  CHECK(falling_factorial(5, 3) == 60);
  CHECK(falling_factorial(2, 3) == 0);
  CHECK(falling_factorial(7, 0) == 1);
}

TEST_CASE("best rational recovers small fractions") {
  CHECK(best_rational(0.5625, 1000000) == Rational(9, 16));
  CHECK(best_rational(1.0 / 3, 1000000) == Rational(1, 3));
  CHECK(best_rational(0.0, 10) == 0);
}

TEST_CASE("bernstein tail polynomials match the expansion") {
  for (int n = 0; n <= 12; ++n)
    for (int k = 0; k <= n + 1; ++k) {
      std::map<int, mpq_class> chi{{n, 1}};
      const auto ref = oracle::psi_poly(chi, {{n, k}});
      const auto p = bg_poly(n, k);
      for (std::size_t i = 0; i < ref.size(); ++i) CHECK(p.coeff(i) == ref[i]);
      CHECK(p.degree() <= n);
      if (k <= n) CHECK(be_poly(n, k) == bg_poly(n, k) - bg_poly(n, k + 1));
    }
}

TEST_CASE("polynomial arithmetic") {
  const RationalPoly p({1, 2, 3});
  CHECK(p.eval(Rational(1, 2)) == Rational(11, 4));
  CHECK(p.derivative() == RationalPoly({2, 6}));
  CHECK((p - p).is_zero());
  CHECK((p * RationalPoly({0, 1})).degree() == 3);
}

#include "rts/admap.hpp"

#include <algorithm>
#include <cmath>

namespace rts {

namespace {

double log_choose(int n, int k) {
  if (n <= 60) return std::log(binomial_d(n, k));
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Sum of a unimodal run of positive terms over [a, b]. Starts at the largest
// term in range and walks outward with ratio(j) = term(j+1) / term(j).
template <class LogTerm, class Ratio>
double unimodal_sum(int a, int b, int mode, LogTerm log_term, Ratio ratio) {
  if (a > b) return 0.0;
  int s = std::clamp(mode, a, b);
  double t0 = std::exp(log_term(s));
  if (t0 == 0.0) return 0.0;
  double sum = t0;
  double t = t0;
  for (int j = s; j < b; ++j) {
    t *= ratio(j);
    sum += t;
    if (t < 1e-18 * sum) break;
  }
  t = t0;
  for (int j = s; j > a; --j) {
    t /= ratio(j - 1);
    sum += t;
    if (t < 1e-18 * sum) break;
  }
  return sum;
}

void check_unit(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("x must lie in [0,1]");
}

}  // namespace

double be(int n, int k, double x) {
  if (n < 0 || k < 0 || k > n) return 0.0;
  if (x <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (x >= 1.0) return k == n ? 1.0 : 0.0;
  if (n <= 60) return binomial_d(n, k) * std::pow(x, k) * std::pow(1.0 - x, n - k);
  return std::exp(log_choose(n, k) + k * std::log(x) + (n - k) * std::log1p(-x));
}

double bg(int n, int k, double x) {
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double lx = std::log(x), l1x = std::log1p(-x), odds = x / (1.0 - x);
  auto log_term = [&](int j) { return log_choose(n, j) + j * lx + (n - j) * l1x; };
  auto ratio = [&](int j) { return (n - j) / (j + 1.0) * odds; };
  int mode = static_cast<int>(std::floor((n + 1) * x));
  // the tail away from the mean carries the small mass; sum it directly
  if (k > n * x) return std::min(1.0, unimodal_sum(k, n, mode, log_term, ratio));
  return std::max(0.0, 1.0 - unimodal_sum(0, k - 1, mode, log_term, ratio));
}

double hypergeom_tail(int population, int marked, int draws, int k) {
  const int lo = std::max(0, draws - (population - marked));
  const int hi = std::min(draws, marked);
  if (k <= lo) return 1.0;
  if (k > hi) return 0.0;
  const int rest = population - marked;
  const double lnorm = log_choose(population, draws);
  auto log_term = [&](int j) { return log_choose(marked, j) + log_choose(rest, draws - j) - lnorm; };
  auto ratio = [&](int j) {
    return static_cast<double>(draws - j) * (marked - j) / ((j + 1.0) * (rest - draws + j + 1.0));
  };
  int mode = static_cast<int>(std::floor((draws + 1.0) * (marked + 1.0) / (population + 2.0)));
  double mean = static_cast<double>(draws) * marked / population;
  if (k > mean) return std::min(1.0, unimodal_sum(k, hi, mode, log_term, ratio));
  return std::max(0.0, 1.0 - unimodal_sum(lo, k - 1, mode, log_term, ratio));
}

Rational hypergeom_tail_exact(int population, int marked, int draws, int k) {
  BigInt num = 0;
  for (int j = std::max(k, 0); j <= std::min(draws, marked); ++j)
    num += binomial(marked, j) * binomial(population - marked, draws - j);
  Rational r(num, binomial(population, draws));
  r.canonicalize();
  return r;
}

double psi(const RecursiveTreeSystem& system, double x) {
  check_unit(x);
  double acc = 0.0;
  for (const auto& [l, w] : system.chi().weights())
    if (l > 0) acc += w * bg(l, system.h()(l), x);
  return std::min(acc, 1.0);
}

Rational psi(const RecursiveTreeSystem& system, const Rational& x) {
  if (x < 0 || x > 1) throw ValidationError("x must lie in [0,1]");
  Rational acc = 0;
  const Rational y = 1 - x;
  for (const auto& [l, w] : system.chi().exact_weights()) {
    if (l == 0) continue;
    Rational tail = 0;
    for (int j = system.h()(l); j <= l; ++j) {
      Rational t = Rational(binomial(l, j));
      for (int i = 0; i < j; ++i) t *= x;
      for (int i = 0; i < l - j; ++i) t *= y;
      tail += t;
    }
    acc += w * tail;
  }
  return acc;
}

namespace {

double deriv0(const RecursiveTreeSystem& system, int order) {
  double acc = 0.0;
  for (int j = 1; j <= order; ++j) {
    double tier_sum = 0.0;
    for (int l : system.tier(j)) tier_sum += system.chi().weight(l) * falling_factorial_d(l, order);
    double sign = ((order + j) % 2 == 0) ? 1.0 : -1.0;
    acc += sign * binomial_d(order - 1, j - 1) * tier_sum;
  }
  return acc;
}

Rational deriv0_exact(const RecursiveTreeSystem& system, int order) {
  Rational acc = 0;
  for (int j = 1; j <= order; ++j) {
    Rational tier_sum = 0;
    for (int l : system.tier(j)) tier_sum += system.chi().exact_weight(l) * Rational(falling_factorial(l, order));
    Rational term = Rational(binomial(order - 1, j - 1)) * tier_sum;
    if ((order + j) % 2 == 0)
      acc += term;
    else
      acc -= term;
  }
  return acc;
}

}  // namespace

std::vector<double> derivs_at_zero(const RecursiveTreeSystem& system, int m) {
  std::vector<double> out;
  for (int order = 1; order <= m; ++order) out.push_back(deriv0(system, order));
  return out;
}

std::vector<Rational> derivs_at_zero_exact(const RecursiveTreeSystem& system, int m) {
  if (!system.is_exact()) throw ValidationError("exact derivatives need a rational-mode system");
  std::vector<Rational> out;
  for (int order = 1; order <= m; ++order) out.push_back(deriv0_exact(system, order));
  return out;
}

double deriv_at(const RecursiveTreeSystem& system, double x, int m) {
  check_unit(x);
  if (m < 1) throw ValidationError("derivative order must be positive");
  double acc = 0.0;
  for (const auto& [l, w] : system.chi().weights()) {
    if (l < m) continue;
    const int k = system.h()(l);
    double inner = 0.0;
    for (int j = 1; j <= m; ++j) {
      double sign = ((j + m) % 2 == 0) ? 1.0 : -1.0;
      inner += sign * binomial_d(m - 1, j - 1) * be(l - m, k - j, x);
    }
    acc += w * falling_factorial_d(l, m) * inner;
  }
  return acc;
}

RationalPoly power_coeffs(const RecursiveTreeSystem& system) {
  if (!system.is_exact()) throw ValidationError("power coefficients need a rational-mode system");
  RationalPoly acc;
  for (const auto& [l, w] : system.chi().exact_weights())
    if (l > 0) acc += bg_poly(l, system.h()(l)) * w;
  return acc;
}

std::string to_string(ConcordanceKind kind) {
  switch (kind) {
    case ConcordanceKind::concordant: return "concordant";
    case ConcordanceKind::subcordant: return "subcordant";
    case ConcordanceKind::supercordant: return "supercordant";
    case ConcordanceKind::identity: return "identity";
  }
  return "unknown";
}

ConcordanceClass concordance(const RecursiveTreeSystem& system, int max_order) {
  const int top = std::max(1, system.max_value());
  const int limit = max_order > 0 ? std::min(max_order, top) : top;
  ConcordanceClass c;
  if (system.is_exact()) {
    for (int j = 1; j <= limit; ++j) {
      Rational dj = deriv0_exact(system, j);
      Rational diff = dj - (j == 1 ? 1 : 0);
      if (diff != 0) {
        c.kind = diff < 0 ? ConcordanceKind::subcordant : ConcordanceKind::supercordant;
        c.m = j;
        c.exact_witness = dj;
        c.witness = dj.get_d();
        return c;
      }
    }
  } else {
    for (int j = 1; j <= limit; ++j) {
      double dj = deriv0(system, j);
      double scale = 1.0;
      for (int i = 1; i <= j; ++i)
        for (int l : system.tier(i))
          scale += system.chi().weight(l) * falling_factorial_d(l, j) * binomial_d(j - 1, i - 1);
      double diff = dj - (j == 1 ? 1.0 : 0.0);
      if (std::fabs(diff) > 1e-9 * scale) {
        c.kind = diff < 0 ? ConcordanceKind::subcordant : ConcordanceKind::supercordant;
        c.m = j;
        c.witness = dj;
        return c;
      }
    }
  }
  if (limit < top) {
    c.kind = ConcordanceKind::concordant;
    c.m = limit;
    return c;
  }
  c.kind = ConcordanceKind::identity;
  c.m = 0;
  return c;
}

bool is_identity_map(const RecursiveTreeSystem& system) {
  return concordance(system).kind == ConcordanceKind::identity;
}

double de_casteljau(const std::vector<double>& coeffs, double x) {
  if (coeffs.empty()) return 0.0;
  std::vector<double> b = coeffs;
  for (std::size_t r = 1; r < b.size(); ++r)
    for (std::size_t i = 0; i + r < b.size(); ++i) b[i] = (1.0 - x) * b[i] + x * b[i + 1];
  return b[0];
}

AdmMap::AdmMap(RecursiveTreeSystem system) : system_(std::move(system)), degree_(system_.max_value()) {
  const int n = degree_;
  bernstein_.assign(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i = 0; i <= n; ++i) {
    double acc = 0.0;
    for (const auto& [l, w] : system_.chi().weights())
      if (l > 0) acc += w * hypergeom_tail(n, i, l, system_.h()(l));
    bernstein_[static_cast<std::size_t>(i)] = acc;
  }
  if (system_.is_exact() && n <= kExactDegreeLimit) {
    std::vector<Rational> q(static_cast<std::size_t>(n) + 1, Rational(0));
    for (int i = 0; i <= n; ++i)
      for (const auto& [l, w] : system_.chi().exact_weights())
        if (l > 0) q[static_cast<std::size_t>(i)] += w * hypergeom_tail_exact(n, i, l, system_.h()(l));
    for (std::size_t i = 0; i < q.size(); ++i) bernstein_[i] = q[i].get_d();
    exact_bernstein_ = std::move(q);
    power_ = power_coeffs(system_);
  }
  derivs_ = rts::derivs_at_zero(system_, std::clamp(n, 1, kCachedDerivatives));
}

double AdmMap::eval_bernstein(double x) const { return de_casteljau(bernstein_, x); }

double AdmMap::eval_power(double x) const {
  if (!power_) throw ValidationError("power coefficients need a rational-mode system");
  return power_->eval(x);
}

}  // namespace rts

#include "rts/fixedpoint.hpp"

#include <algorithm>
#include <cmath>

namespace rts {

namespace {

constexpr double kMinWidth = 1e-11;

double max_abs(const std::vector<double>& c) {
  double m = 0.0;
  for (double v : c) m = std::max(m, std::fabs(v));
  return m;
}

// Removes factors of x (low end) and 1 - x (high end) from a polynomial in
// Bernstein form while the corresponding end coefficient vanishes.
template <class T, class IsZero>
int deflate_low(std::vector<T>& c, IsZero is_zero) {
  int mult = 0;
  while (c.size() > 1 && is_zero(c.front(), c)) {
    const long n = static_cast<long>(c.size()) - 1;
    std::vector<T> e(static_cast<std::size_t>(n));
    for (long j = 0; j < n; ++j) e[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j + 1)] * T(n) / T(j + 1);
    c = std::move(e);
    ++mult;
  }
  return mult;
}

template <class T, class IsZero>
int deflate_high(std::vector<T>& c, IsZero is_zero) {
  int mult = 0;
  while (c.size() > 1 && is_zero(c.back(), c)) {
    const long m = static_cast<long>(c.size()) - 1;
    std::vector<T> q(static_cast<std::size_t>(m));
    for (long j = 0; j < m; ++j) q[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j)] * T(m) / T(m - j);
    c = std::move(q);
    ++mult;
  }
  return mult;
}

bool exact_zero(const Rational& v, const std::vector<Rational>&) { return v == 0; }

bool float_zero(double v, const std::vector<double>& c) { return std::fabs(v) <= 1e-12 * std::max(1.0, max_abs(c)); }

int sign_variations(const std::vector<double>& c) {
  int v = 0, prev = 0;
  for (double x : c) {
    int s = (x > 0) - (x < 0);
    if (s == 0) continue;
    if (prev != 0 && s != prev) ++v;
    prev = s;
  }
  return v;
}

void split(const std::vector<double>& c, double s, std::vector<double>& left, std::vector<double>& right) {
  const std::size_t n = c.size();
  std::vector<double> b = c;
  left.assign(n, 0.0);
  right.assign(n, 0.0);
  left[0] = b[0];
  right[n - 1] = b[n - 1];
  for (std::size_t r = 1; r < n; ++r) {
    for (std::size_t i = 0; i + r < n; ++i) b[i] = (1.0 - s) * b[i] + s * b[i + 1];
    left[r] = b[0];
    right[n - 1 - r] = b[n - 1 - r];
  }
}

struct Isolation {
  std::vector<std::pair<double, double>> simple;  // refined brackets
  std::vector<double> clusters;
};

// Roots in (0,1) of the polynomial with Bernstein coefficients q, whose end
// coefficients are nonzero.
Isolation isolate(const std::vector<double>& q, double tol) {
  Isolation out;
  if (q.size() < 2) return out;
  struct Piece {
    double a, b;
    std::vector<double> c;
  };
  std::vector<Piece> stack{{0.0, 1.0, q}};
  while (!stack.empty()) {
    Piece p = std::move(stack.back());
    stack.pop_back();
    int v = sign_variations(p.c);
    if (v == 0) continue;
    if (v == 1) {
      double a = p.a, b = p.b;
      int sa = (p.c.front() > 0) - (p.c.front() < 0);
      if (sa == 0) sa = -((p.c.back() > 0) - (p.c.back() < 0));
      for (int it = 0; it < 200 && b - a > tol; ++it) {
        double m = 0.5 * (a + b);
        double fm = de_casteljau(q, m);
        if (fm == 0.0) {
          a = b = m;
          break;
        }
        int sm = fm > 0 ? 1 : -1;
        (sm == sa ? a : b) = m;
      }
      out.simple.emplace_back(a, b);
      continue;
    }
    if (p.b - p.a < kMinWidth) {
      out.clusters.push_back(0.5 * (p.a + p.b));
      continue;
    }
    std::vector<double> left, right;
    double s = 0.5;
    split(p.c, s, left, right);
    if (left.back() == 0.0) {
      s = 0.5 + 1.0 / 1024.0;
      split(p.c, s, left, right);
    }
    double mid = p.a + s * (p.b - p.a);
    stack.push_back({mid, p.b, std::move(right)});
    stack.push_back({p.a, mid, std::move(left)});
  }
  std::sort(out.simple.begin(), out.simple.end());
  std::sort(out.clusters.begin(), out.clusters.end());
  return out;
}

struct RootAnalysis {
  bool continuum = false;
  int mult0 = 0, mult1 = 0;
  Isolation roots;
  std::vector<double> critical;  // roots of psi' - 1 in (0,1)
};

std::vector<double> to_double(const std::vector<Rational>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& q : v) out.push_back(q.get_d());
  return out;
}

RootAnalysis analyze_roots(const AdmMap& map, double tol, bool with_critical) {
  RootAnalysis ra;
  const int n = std::max(1, map.degree());
  std::vector<double> q;
  std::vector<double> dq;  // psi' - 1
  if (map.exact_bernstein()) {
    std::vector<Rational> d(static_cast<std::size_t>(n) + 1);
    const auto& b = *map.exact_bernstein();
    for (int i = 0; i <= n; ++i)
      d[static_cast<std::size_t>(i)] = (map.degree() == 0 ? Rational(0) : b[static_cast<std::size_t>(i)]) - make_ratio(i, n);
    if (std::all_of(d.begin(), d.end(), [](const Rational& v) { return v == 0; })) {
      ra.continuum = true;
      return ra;
    }
    std::vector<Rational> dd;
    for (int i = 0; i < n; ++i) dd.push_back((d[static_cast<std::size_t>(i) + 1] - d[static_cast<std::size_t>(i)]) * n);
    ra.mult0 = deflate_low(d, exact_zero);
    ra.mult1 = deflate_high(d, exact_zero);
    q = to_double(d);
    if (with_critical && !std::all_of(dd.begin(), dd.end(), [](const Rational& v) { return v == 0; })) {
      deflate_low(dd, exact_zero);
      deflate_high(dd, exact_zero);
      dq = to_double(dd);
    }
  } else {
    std::vector<double> d(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i)
      d[static_cast<std::size_t>(i)] = (map.degree() == 0 ? 0.0 : map.bernstein()[static_cast<std::size_t>(i)]) - static_cast<double>(i) / n;
    if (max_abs(d) <= 1e-13) {
      ra.continuum = true;
      return ra;
    }
    std::vector<double> dd;
    for (int i = 0; i < n; ++i) dd.push_back((d[static_cast<std::size_t>(i) + 1] - d[static_cast<std::size_t>(i)]) * n);
    ra.mult0 = deflate_low(d, float_zero);
    ra.mult1 = deflate_high(d, float_zero);
    q = std::move(d);
    if (with_critical && max_abs(dd) > 1e-13) {
      deflate_low(dd, float_zero);
      deflate_high(dd, float_zero);
      dq = std::move(dd);
    }
  }
  ra.roots = isolate(q, tol);
  if (!dq.empty()) {
    auto crit = isolate(dq, tol);
    for (const auto& [a, b] : crit.simple) ra.critical.push_back(0.5 * (a + b));
    for (double c : crit.clusters) ra.critical.push_back(c);
    std::sort(ra.critical.begin(), ra.critical.end());
  }
  return ra;
}

struct Candidate {
  double x, lo, hi;
  int multiplicity;
};

}  // namespace

std::vector<double> FixedPointReport::nonzero() const {
  std::vector<double> out;
  for (const auto& p : points)
    if (p.x > 0.0) out.push_back(p.x);
  return out;
}

const FixedPoint* FixedPointReport::smallest_nonzero() const {
  for (const auto& p : points)
    if (p.x > 0.0) return &p;
  return nullptr;
}

FixedPointReport find_fixed_points(const RecursiveTreeSystem& system, const FixedPointOptions& options) {
  return find_fixed_points(AdmMap(system), options);
}

FixedPointReport find_fixed_points(const AdmMap& map, const FixedPointOptions& options) {
  if (!(options.tol > 0.0)) throw ValidationError("tolerance must be positive");
  const auto& system = map.system();
  FixedPointReport report;
  RootAnalysis ra = analyze_roots(map, options.tol, options.detect_tangency);
  if (ra.continuum) {
    report.continuum = true;
    return report;
  }
  auto f = [&](double x) { return psi(system, x) - x; };

  std::vector<Candidate> interior;
  for (const auto& [a, b] : ra.roots.simple) interior.push_back({0.5 * (a + b), a, b, 1});

  if (options.detect_tangency) {
    const auto& crit = ra.critical;
    for (std::size_t i = 0; i < crit.size(); ++i) {
      const double c = crit[i];
      if (std::fabs(f(c)) > options.tangency_tol) continue;
      // critical points hugging a root at an endpoint belong to that root
      if (ra.mult0 > 0 && std::fabs(f(0.5 * c)) <= options.tangency_tol) continue;
      if (ra.mult1 > 0 && std::fabs(f(0.5 * (c + 1.0))) <= options.tangency_tol) continue;
      const double cp = i > 0 ? crit[i - 1] : 0.0;
      const double cn = i + 1 < crit.size() ? crit[i + 1] : 1.0;
      auto left = std::find_if(interior.rbegin(), interior.rend(), [&](const Candidate& r) { return r.x < c; });
      auto right = std::find_if(interior.begin(), interior.end(), [&](const Candidate& r) { return r.x > c; });
      bool has_left = left != interior.rend() && left->x > cp && left->multiplicity == 1;
      bool has_right = right != interior.end() && right->x < cn && right->multiplicity == 1;
      if (has_left && has_right) {
        Candidate merged{c, left->lo, right->hi, 2};
        auto first = std::prev(left.base());
        interior.erase(first, std::next(right));
        interior.push_back(merged);
        std::sort(interior.begin(), interior.end(), [](const Candidate& a, const Candidate& b) { return a.x < b.x; });
      } else if (!has_left && !has_right) {
        interior.push_back({c, c, c, 2});
        std::sort(interior.begin(), interior.end(), [](const Candidate& a, const Candidate& b) { return a.x < b.x; });
      }
    }
  } else {
    for (double c : ra.roots.clusters) interior.push_back({c, c, c, 2});
  }

  std::vector<Candidate> all;
  all.push_back({0.0, 0.0, 0.0, std::min(2, std::max(1, ra.mult0))});
  for (const auto& c : interior)
    if (c.x > 0.0 && c.x < 1.0) all.push_back(c);
  if (ra.mult1 > 0) all.push_back({1.0, 1.0, 1.0, std::min(2, ra.mult1)});

  for (const auto& c : all) {
    FixedPoint p;
    p.x = c.x;
    p.lo = c.lo;
    p.hi = c.hi;
    p.multiplicity = c.multiplicity;
    if (system.is_exact() && (c.x == 0.0 || c.x == 1.0)) {
      p.exact = Rational(static_cast<int>(c.x));
    } else if (system.is_exact() && map.degree() <= AdmMap::kExactDegreeLimit) {
      Rational r = best_rational(c.x, 1000000);
      if (std::fabs(r.get_d() - c.x) <= 1e-9 && psi(system, r) == r) {
        p.exact = r;
        p.x = r.get_d();
      }
    }
    p.psi_prime = deriv_at(system, p.x, 1);
    p.residual = std::fabs(f(p.x));
    bool endpoint = p.x == 0.0 || p.x == 1.0;
    p.boundary = !endpoint && std::fabs(p.psi_prime - 1.0) <= options.boundary_tol;
    p.interpretable = endpoint || p.psi_prime <= 1.0 + options.boundary_tol;
    report.residual_bound = std::max(report.residual_bound, p.residual);
    report.points.push_back(std::move(p));
  }
  auto& pts = report.points;
  pts.front().tags.push_back("zero");
  if (pts.size() > 1) pts[1].tags.push_back("smallest_nonzero");
  pts.back().tags.push_back("largest");
  if (report.residual_bound > options.residual_tol)
    throw NumericError("fixed point residual " + std::to_string(report.residual_bound) + " exceeds tolerance");
  return report;
}

bool interpretable(const RecursiveTreeSystem& system, double x0, double tol) {
  if (!(x0 >= 0.0 && x0 <= 1.0)) throw ValidationError("x0 must lie in [0,1]");
  if (std::fabs(psi(system, x0) - x0) > 1e-8) throw ValidationError("x0 is not a fixed point");
  if (x0 == 0.0 || x0 == 1.0) return true;
  return deriv_at(system, x0, 1) <= 1.0 + tol;
}

Criticality is_critical(const RecursiveTreeSystem& system) {
  if (system.chi().support().size() < 2) throw ValidationError("criticality needs chi with more than one support point");
  Criticality c;
  if (system.is_exact()) {
    auto d = derivs_at_zero_exact(system, 2);
    c.d1_exact = d[0];
    c.d2_exact = d[1];
    c.d1 = d[0].get_d();
    c.d2 = d[1].get_d();
    c.critical = d[0] == 1 && d[1] <= 0;
  } else {
    auto d = derivs_at_zero(system, 2);
    c.d1 = d[0];
    c.d2 = d[1];
    c.critical = std::fabs(d[0] - 1.0) <= 1e-9 && d[1] <= 1e-9;
  }
  return c;
}

std::vector<double> iterate_psi(const RecursiveTreeSystem& system, double x_start, int n) {
  if (n < 0) throw ValidationError("iteration count must be nonnegative");
  std::vector<double> out{x_start};
  double x = x_start;
  for (int i = 0; i < n; ++i) {
    x = psi(system, x);
    out.push_back(x);
  }
  return out;
}

std::string to_string(TransitionKind kind) { return kind == TransitionKind::continuous ? "continuous" : "first_order"; }

namespace {

std::vector<double> nonzero_roots(const RecursiveTreeSystem& system, double delta) {
  AdmMap map(system);
  RootAnalysis ra = analyze_roots(map, 1e-13, false);
  std::vector<double> out;
  if (ra.continuum) return out;
  for (const auto& [a, b] : ra.roots.simple) {
    double x = 0.5 * (a + b);
    if (x >= delta) out.push_back(x);
  }
  if (ra.mult1 > 0) out.push_back(1.0);
  return out;
}

}  // namespace

int count_nonzero_fixed_points(const RecursiveTreeSystem& system, double delta) {
  return static_cast<int>(nonzero_roots(system, delta).size());
}

TransitionFinding find_tangency(const FamilyFn& family, double t_lo, double t_hi, const TangencyOptions& options) {
  if (!(t_lo < t_hi)) throw ValidationError("t range must satisfy t_lo < t_hi");
  auto count = [&](double t) { return static_cast<int>(nonzero_roots(family(t), options.delta).size()); };
  const int c_lo = count(t_lo), c_hi = count(t_hi);
  if (c_lo == c_hi)
    throw ValidationError("no change in the number of nonzero fixed points over [" + std::to_string(t_lo) + ", " +
                          std::to_string(t_hi) + "]");
  double lo = t_lo, hi = t_hi;
  while (hi - lo > 0.1 * options.t_tol) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (count(mid) == c_lo ? lo : hi) = mid;
  }
  TransitionFinding out;
  out.t_lo = lo;
  out.t_hi = hi;
  out.t_star = 0.5 * (lo + hi);

  const double t_rich = c_hi > c_lo ? hi : lo;
  const auto rich = family(t_rich);
  const auto roots = nonzero_roots(rich, options.delta);
  double x_star = 0.0;
  bool paired = false;
  double best_gap = 2.0;
  for (std::size_t i = 0; i + 1 < roots.size(); ++i) {
    double gap = roots[i + 1] - roots[i];
    if (gap < best_gap) {
      best_gap = gap;
      double a = roots[i], b = roots[i + 1];
      auto g = [&](double x) { return deriv_at(rich, x, 1) - 1.0; };
      double ga = g(a), gb = g(b);
      if ((ga < 0) != (gb < 0)) {
        for (int it = 0; it < 200 && b - a > 0.1 * options.x_tol; ++it) {
          double m = 0.5 * (a + b);
          ((g(m) < 0) == (ga < 0) ? a : b) = m;
        }
      }
      x_star = 0.5 * (a + b);
      paired = true;
    }
  }
  if (paired && x_star >= 1e-3) {
    out.kind = TransitionKind::first_order;
    out.x_star = x_star;
    out.jump = x_star;
    return out;
  }
  out.kind = TransitionKind::continuous;
  out.x_star = 0.0;
  out.jump = 0.0;
  auto slope = [&](double t) { return derivs_at_zero(family(t), 1).front() - 1.0; };
  double s_lo = slope(t_lo), s_hi = slope(t_hi);
  if ((s_lo < 0) != (s_hi < 0)) {
    double a = t_lo, b = t_hi;
    while (b - a > 0.1 * options.t_tol) {
      double m = 0.5 * (a + b);
      if (m <= a || m >= b) break;
      ((slope(m) < 0) == (s_lo < 0) ? a : b) = m;
    }
    out.t_lo = a;
    out.t_hi = b;
    out.t_star = 0.5 * (a + b);
  }
  return out;
}

}  // namespace rts

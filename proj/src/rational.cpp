#include "rts/rational.hpp"

#include <cctype>
#include <stdexcept>

namespace rts {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

std::string_view strip_sign(std::string_view s) {
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
  return s;
}

}  // namespace

bool looks_rational(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return all_digits(strip_sign(text));
  return all_digits(strip_sign(text.substr(0, slash))) && all_digits(text.substr(slash + 1));
}

Rational parse_rational(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty number");
  if (looks_rational(text)) {
    std::string s(text);
    if (s.front() == '+') s.erase(0, 1);
    Rational q;
    if (q.set_str(s, 10) != 0) throw std::invalid_argument("bad rational '" + std::string(text) + "'");
    if (q.get_den() == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    q.canonicalize();
    return q;
  }
  // decimal literal: [sign] digits [. digits] [(e|E) [sign] digits]
  std::string_view s = text;
  bool negative = false;
  if (s.front() == '-' || s.front() == '+') {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  std::string mantissa;
  std::size_t i = 0;
  long scale = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) mantissa += s[i++];
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      mantissa += s[i++];
      --scale;
    }
  }
  if (mantissa.empty()) throw std::invalid_argument("bad number '" + std::string(text) + "'");
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    std::string_view ex = s.substr(i);
    if (!all_digits(strip_sign(ex))) throw std::invalid_argument("bad exponent in '" + std::string(text) + "'");
    scale += std::stol(std::string(ex));
    i = s.size();
  }
  if (i != s.size()) throw std::invalid_argument("bad number '" + std::string(text) + "'");
  if (scale > 4000 || scale < -4000) throw std::invalid_argument("exponent out of range in '" + std::string(text) + "'");
  BigInt num(mantissa, 10);
  BigInt pow10;
  mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(scale < 0 ? -scale : scale));
  Rational q = scale < 0 ? Rational(num, pow10) : Rational(num * pow10);
  q.canonicalize();
  return negative ? Rational(-q) : q;
}

Rational make_ratio(long num, long den) {
  if (den == 0) throw std::invalid_argument("zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

std::string to_string(const Rational& raw) {
  Rational q = raw;
  q.canonicalize();
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_str();
}

BigInt falling_factorial(std::int64_t n, std::int64_t k) {
  if (k < 0) return 0;
  BigInt r = 1;
  for (std::int64_t i = 0; i < k; ++i) {
    r *= static_cast<long>(n - i);
    if (r == 0) break;
  }
  return r;
}

BigInt binomial(std::int64_t n, std::int64_t k) {
  if (n < 0 || k < 0 || k > n) return 0;
  BigInt r;
  mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return r;
}

double falling_factorial_d(std::int64_t n, std::int64_t k) {
  if (k < 0) return 0.0;
  double r = 1.0;
  for (std::int64_t i = 0; i < k; ++i) r *= static_cast<double>(n - i);
  return r;
}

double binomial_d(std::int64_t n, std::int64_t k) {
  if (n < 0 || k < 0 || k > n) return 0.0;
  if (k > n - k) k = n - k;
  double r = 1.0;
  for (std::int64_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

Rational best_rational(double x, std::int64_t max_den) {
  Rational target(x);
  BigInt n = target.get_num(), d = target.get_den();
  if (d <= max_den) return target;
  BigInt p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  while (d != 0) {
    BigInt a;
    mpz_fdiv_q(a.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
    BigInt q2 = q0 + a * q1;
    if (q2 > max_den) break;
    BigInt p2 = p0 + a * p1;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    BigInt r = n - a * d;
    n = d;
    d = r;
  }
  BigInt k;
  BigInt lim = BigInt(static_cast<long>(max_den)) - q0;
  mpz_fdiv_q(k.get_mpz_t(), lim.get_mpz_t(), q1.get_mpz_t());
  Rational b1(p0 + k * p1, q0 + k * q1);
  Rational b2(p1, q1);
  b1.canonicalize();
  b2.canonicalize();
  return abs(b2 - target) <= abs(b1 - target) ? b2 : b1;
}

// --- RationalPoly -----------------------------------------------------------

RationalPoly::RationalPoly(std::vector<Rational> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

RationalPoly RationalPoly::monomial(std::size_t degree, const Rational& c) {
  std::vector<Rational> v(degree + 1, Rational(0));
  v[degree] = c;
  return RationalPoly(std::move(v));
}

void RationalPoly::trim() {
  while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

int RationalPoly::degree() const { return static_cast<int>(coeffs_.size()) - 1; }

Rational RationalPoly::eval(const Rational& x) const {
  Rational acc = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double RationalPoly::eval(double x) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + it->get_d();
  return acc;
}

RationalPoly RationalPoly::derivative() const {
  if (coeffs_.size() <= 1) return {};
  std::vector<Rational> d(coeffs_.size() - 1);
  for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = coeffs_[i] * static_cast<long>(i);
  return RationalPoly(std::move(d));
}

RationalPoly& RationalPoly::operator+=(const RationalPoly& o) {
  if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), Rational(0));
  for (std::size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  trim();
  return *this;
}

RationalPoly& RationalPoly::operator-=(const RationalPoly& o) {
  if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), Rational(0));
  for (std::size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  trim();
  return *this;
}

RationalPoly& RationalPoly::operator*=(const Rational& s) {
  for (auto& c : coeffs_) c *= s;
  trim();
  return *this;
}

RationalPoly operator*(const RationalPoly& a, const RationalPoly& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<Rational> out(a.coeffs_.size() + b.coeffs_.size() - 1, Rational(0));
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) out[i + j] += a.coeffs_[i] * b.coeffs_[j];
  return RationalPoly(std::move(out));
}

bool operator==(const RationalPoly& a, const RationalPoly& b) { return a.coeffs_ == b.coeffs_; }

RationalPoly be_poly(int n, int k) {
  if (n < 0 || k < 0 || k > n) return {};
  // C(n,k) x^k (1-x)^(n-k) = C(n,k) sum_i C(n-k,i) (-1)^i x^(k+i)
  std::vector<Rational> c(static_cast<std::size_t>(n) + 1, Rational(0));
  BigInt cnk = binomial(n, k);
  for (int i = 0; i <= n - k; ++i) {
    BigInt term = cnk * binomial(n - k, i);
    c[static_cast<std::size_t>(k + i)] = (i % 2 == 0) ? Rational(term) : Rational(-term);
  }
  return RationalPoly(std::move(c));
}

RationalPoly bg_poly(int n, int k) {
  if (k <= 0) return RationalPoly({Rational(1)});
  if (k > n) return {};
  // coefficient of x^r is (-1)^(r-k) C(n,r) C(r-1,k-1) for k <= r <= n
  std::vector<Rational> c(static_cast<std::size_t>(n) + 1, Rational(0));
  for (int r = k; r <= n; ++r) {
    BigInt term = binomial(n, r) * binomial(r - 1, k - 1);
    c[static_cast<std::size_t>(r)] = ((r - k) % 2 == 0) ? Rational(term) : Rational(-term);
  }
  return RationalPoly(std::move(c));
}

}  // namespace rts

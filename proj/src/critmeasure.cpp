#include "rts/critmeasure.hpp"

#include <cmath>

#include "rts/admap.hpp"
#include "rts/parallel.hpp"

namespace rts {

CritSpec::CritSpec(std::vector<int> support_seq, std::map<int, Rational> weights)
    : seq_(std::move(support_seq)), weights_(std::move(weights)) {}

Rational CritSpec::weight(int value) const {
  auto it = weights_.find(value);
  return it == weights_.end() ? Rational(0) : it->second;
}

ThresholdFunction CritSpec::h() const {
  std::map<int, int> h{{0, 1}};
  for (std::size_t k = 0; k < seq_.size(); ++k) h[seq_[k]] = static_cast<int>(k) + 1;
  return ThresholdFunction(std::move(h));
}

RecursiveTreeSystem CritSpec::system() const { return RecursiveTreeSystem(ChildDistribution::exact(weights_), h()); }

CritSpec crit_measure(const std::vector<int>& seq) {
  if (seq.empty()) throw ValidationError("crit needs a nonempty support sequence");
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (seq[i] < 1) throw ValidationError("crit support values must be positive");
    if (i > 0 && seq[i] <= seq[i - 1]) throw ValidationError("crit support sequence must be strictly increasing");
  }
  if (seq.front() == 1) return CritSpec(seq, {{1, Rational(1)}});

  const int m = static_cast<int>(seq.size());
  std::vector<Rational> chi(static_cast<std::size_t>(m));
  chi[0] = make_ratio(1, seq[0]);
  for (int k = 2; k <= m; ++k) {
    Rational acc = 0;
    for (int j = 1; j < k; ++j) {
      Rational term = Rational(binomial(k - 1, j - 1)) * chi[static_cast<std::size_t>(j - 1)] *
                      Rational(falling_factorial(seq[static_cast<std::size_t>(j - 1)], k));
      if ((k + j + 1) % 2 == 0)
        acc += term;
      else
        acc -= term;
    }
    chi[static_cast<std::size_t>(k - 1)] = acc / Rational(falling_factorial(seq[static_cast<std::size_t>(k - 1)], k));
  }
  std::map<int, Rational> weights;
  Rational rest = 1;
  for (int k = 0; k < m; ++k) {
    if (chi[static_cast<std::size_t>(k)] <= 0) throw NumericError("crit weight not positive");
    weights[seq[static_cast<std::size_t>(k)]] = chi[static_cast<std::size_t>(k)];
    rest -= chi[static_cast<std::size_t>(k)];
  }
  if (rest <= 0) throw NumericError("crit weight at 0 not positive");
  weights[0] = rest;
  CritSpec spec(seq, std::move(weights));
  auto d = derivs_at_zero_exact(spec.system(), m);
  for (int j = 1; j <= m; ++j)
    if (d[static_cast<std::size_t>(j - 1)] != (j == 1 ? 1 : 0)) throw NumericError("crit measure failed concordance check");
  return spec;
}

BigInt permutation_class_size(const CritSpec& spec, int value) {
  BigInt fact = falling_factorial(spec.support_seq().back(), spec.support_seq().back());
  Rational size = Rational(fact) * spec.weight(value);
  size.canonicalize();
  if (size.get_den() != 1) throw NumericError("permutation class size is not an integer");
  return size.get_num();
}

std::vector<Rational> bernstein_tail_representation(const CritSpec& spec) {
  const auto& seq = spec.support_seq();
  if (seq.front() < 2) throw ValidationError("tail representation needs l_1 >= 2");
  const int m = spec.order();
  const int n = seq.back();
  RationalPoly target = RationalPoly::monomial(1) - power_coeffs(spec.system());
  target *= 1 / spec.weight(0);
  std::vector<Rational> c;
  RationalPoly rest = target;
  for (int r = m + 1; r <= n; ++r) {
    Rational cr = rest.coeff(static_cast<std::size_t>(r)) / Rational(binomial(n, r));
    rest -= bg_poly(n, r) * cr;
    c.push_back(cr);
  }
  if (!rest.is_zero()) throw NumericError("tail representation left a nonzero remainder");
  return c;
}

std::map<int, Rational> Decomposition::reconstruct() const {
  std::map<int, Rational> out;
  for (const auto& term : terms)
    for (const auto& [value, w] : term.crit.weights()) out[value] += term.coefficient * w;
  return out;
}

Decomposition decompose(const RecursiveTreeSystem& input) {
  if (!input.is_exact()) throw ValidationError("decomposition needs rational weights");
  Decomposition out;
  RecursiveTreeSystem system = input;
  for (int l : input.chi().support())
    if (l >= 1 && input.h()(l) > l) out.normalized = true;
  if (out.normalized) system = normalize_thresholds(input);
  if (!system.h_increasing_on_support()) throw ValidationError("decomposition needs h nondecreasing on the support");
  const int m = system.max_threshold();
  if (m == 0) throw ValidationError("system is not critical: no positive support value");
  auto d = derivs_at_zero_exact(system, m);
  for (int j = 1; j <= m; ++j) {
    const Rational& v = d[static_cast<std::size_t>(j - 1)];
    if (v != (j == 1 ? 1 : 0))
      throw ValidationError("system is not " + std::to_string(m) + "-critical: derivative of order " + std::to_string(j) +
                            " at 0 is " + to_string(v));
  }
  std::vector<std::vector<int>> tiers;
  for (int k = 1; k <= m; ++k) {
    auto t = system.tier(k);
    if (t.empty()) throw ValidationError("system is not critical: tier " + std::to_string(k) + " is empty");
    Rational total = 0;
    for (int l : t) total += system.chi().exact_weight(l) * Rational(falling_factorial(l, k));
    for (int l : t) out.tier_weights[l] = system.chi().exact_weight(l) * Rational(falling_factorial(l, k)) / total;
    tiers.push_back(std::move(t));
  }
  std::vector<std::size_t> idx(tiers.size(), 0);
  while (true) {
    std::vector<int> seq;
    Rational coeff = 1;
    for (std::size_t k = 0; k < tiers.size(); ++k) {
      int l = tiers[k][idx[k]];
      seq.push_back(l);
      coeff *= out.tier_weights[l];
    }
    out.terms.push_back({coeff, crit_measure(seq)});
    bool done = true;
    for (std::size_t k = tiers.size(); k-- > 0;) {
      if (++idx[k] < tiers[k].size()) {
        done = false;
        break;
      }
      idx[k] = 0;
    }
    if (done) break;
  }
  out.m = m;
  out.source = system;
  auto rebuilt = out.reconstruct();
  for (auto it = rebuilt.begin(); it != rebuilt.end();) it = it->second == 0 ? rebuilt.erase(it) : std::next(it);
  if (rebuilt != system.chi().exact_weights()) throw NumericError("decomposition does not reconstruct the system");
  return out;
}

RecursiveTreeSystem mix_crit_measures(const std::vector<std::pair<Rational, CritSpec>>& parts) {
  std::map<int, Rational> w;
  std::map<int, int> h{{0, 1}};
  for (const auto& [coeff, spec] : parts) {
    for (const auto& [value, q] : spec.weights()) w[value] += coeff * q;
    const auto spec_h = spec.h();
    for (const auto& [value, k] : spec_h.thresholds()) {
      auto [it, fresh] = h.emplace(value, k);
      if (!fresh && it->second != k) throw ValidationError("value " + std::to_string(value) + " sits in two tiers");
    }
  }
  return RecursiveTreeSystem(ChildDistribution::exact(w), ThresholdFunction(h));
}

std::vector<Rational> rn_distribution(int n) {
  if (n < 1) throw ValidationError("n must be positive");
  std::vector<Rational> p{Rational(1)};
  for (int step = 1; step < n; ++step) {
    std::vector<Rational> next(static_cast<std::size_t>(step) + 1, Rational(0));
    for (int r = 1; r <= step; ++r) {
      const Rational& pr = p[static_cast<std::size_t>(r - 1)];
      next[static_cast<std::size_t>(r)] += pr * make_ratio(r, step + 1);
      next[static_cast<std::size_t>(r - 1)] += pr * make_ratio(step + 1 - r, step + 1);
    }
    p = std::move(next);
  }
  return p;
}

int rn_step(int n, int r, std::mt19937_64& rng) {
  return uniform01(rng) * (n + 1) < r ? r + 1 : r;
}

int rn_by_insertion(int n, std::mt19937_64& rng) {
  std::vector<int> perm{1};
  for (int next = 2; next <= n; ++next) {
    std::uniform_int_distribution<std::size_t> slot(0, perm.size());
    perm.insert(perm.begin() + static_cast<std::ptrdiff_t>(slot(rng)), next);
  }
  for (std::size_t i = 0; i < perm.size(); ++i)
    if (perm[i] == 1) return static_cast<int>(i) + 1;
  return 0;
}

CritMonteCarlo crit_measure_mc(const std::vector<int>& seq, std::int64_t trials, std::uint64_t seed) {
  crit_measure(seq);  // validates the sequence
  if (trials < 1) throw ValidationError("trials must be positive");
  const int m = static_cast<int>(seq.size());
  using Counts = std::vector<std::int64_t>;
  auto chunks = run_chunked<Counts>(
      trials,
      [&](std::int64_t begin, std::int64_t end, Counts& acc) {
        for (std::int64_t t = begin; t < end; ++t) {
          auto rng = trial_rng(seed, static_cast<std::uint64_t>(t));
          int r = 1, hit = 0, k = 0;
          for (int n = 1;; ++n) {
            while (k < m && seq[static_cast<std::size_t>(k)] < n) ++k;
            if (k < m && seq[static_cast<std::size_t>(k)] == n && r == k + 1) {
              hit = k + 1;
              break;
            }
            if (n >= seq.back()) break;
            r = rn_step(n, r, rng);
          }
          ++acc[static_cast<std::size_t>(hit)];
        }
      },
      Counts(static_cast<std::size_t>(m) + 1, 0));
  CritMonteCarlo out;
  out.trials = trials;
  for (const auto& c : chunks)
    for (int k = 0; k <= m; ++k) out.counts[k == 0 ? 0 : seq[static_cast<std::size_t>(k - 1)]] += c[static_cast<std::size_t>(k)];
  for (const auto& [value, count] : out.counts) {
    double p = static_cast<double>(count) / static_cast<double>(trials);
    out.frequency[value] = p;
    out.std_error[value] = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  }
  return out;
}

MeanEstimate martingale_mean(int n, double x, std::int64_t trials, std::uint64_t seed) {
  if (n < 1) throw ValidationError("n must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("x must lie in [0,1]");
  if (trials < 1) throw ValidationError("trials must be positive");
  using Counts = std::vector<std::int64_t>;
  auto chunks = run_chunked<Counts>(
      trials,
      [&](std::int64_t begin, std::int64_t end, Counts& acc) {
        for (std::int64_t t = begin; t < end; ++t) {
          auto rng = trial_rng(seed, static_cast<std::uint64_t>(t));
          int r = 1;
          for (int step = 1; step < n; ++step) r = rn_step(step, r, rng);
          ++acc[static_cast<std::size_t>(r)];
        }
      },
      Counts(static_cast<std::size_t>(n) + 1, 0));
  Counts total(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& c : chunks)
    for (std::size_t r = 0; r < c.size(); ++r) total[r] += c[r];
  double s1 = 0.0, s2 = 0.0;
  for (int r = 1; r <= n; ++r) {
    double v = bg(n, r, x);
    double c = static_cast<double>(total[static_cast<std::size_t>(r)]);
    s1 += c * v;
    s2 += c * v * v;
  }
  MeanEstimate out;
  out.trials = trials;
  const double T = static_cast<double>(trials);
  out.mean = s1 / T;
  double var = trials > 1 ? std::max(0.0, (s2 - s1 * s1 / T) / (T - 1.0)) : 0.0;
  out.std_error = std::sqrt(var / T);
  return out;
}

double phi(const RecursiveTreeSystem& system, int r, int k, double x) {
  if (!(x > 0.0 && x <= 1.0)) throw ValidationError("phi is defined on (0,1]");
  double num = x;
  for (const auto& [l, w] : system.chi().weights())
    if (l >= 1 && l < r) num -= w * bg(l, system.h()(l), x);
  return num / bg(r, k, x);
}

}  // namespace rts

#include "rts/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include <json.hpp>

namespace rts {

namespace {

std::string fmt_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

}  // namespace

// --- ChildDistribution ------------------------------------------------------

ChildDistribution ChildDistribution::exact(const std::map<int, Rational>& weights) {
  ChildDistribution d;
  std::map<int, Rational> q;
  Rational total = 0;
  for (const auto& [value, raw] : weights) {
    Rational w = raw;
    w.canonicalize();
    require(value >= 0, "child count " + std::to_string(value) + " is negative");
    require(w >= 0, "weight of " + std::to_string(value) + " is negative (" + to_string(w) + ")");
    total += w;
    if (w > 0) {
      q.emplace(value, w);
      d.weights_.emplace(value, w.get_d());
    }
  }
  require(total == 1, "weights sum to " + to_string(total));
  d.exact_ = std::move(q);
  return d;
}

ChildDistribution ChildDistribution::approx(const std::map<int, double>& weights) {
  ChildDistribution d;
  long double total = 0.0L;
  for (const auto& [value, w] : weights) {
    require(value >= 0, "child count " + std::to_string(value) + " is negative");
    require(std::isfinite(w), "weight of " + std::to_string(value) + " is not finite");
    require(w >= 0.0, "weight of " + std::to_string(value) + " is negative (" + fmt_double(w) + ")");
    require(w <= 1.0, "weight of " + std::to_string(value) + " exceeds 1");
    total += w;
    if (w > 0.0) d.weights_.emplace(value, w);
  }
  require(std::fabs(static_cast<double>(total) - 1.0) <= kFloatSumTolerance,
          "weights sum to " + fmt_double(static_cast<double>(total)));
  return d;
}

double ChildDistribution::weight(int value) const {
  auto it = weights_.find(value);
  return it == weights_.end() ? 0.0 : it->second;
}

Rational ChildDistribution::exact_weight(int value) const {
  const auto& q = exact_weights();
  auto it = q.find(value);
  return it == q.end() ? Rational(0) : it->second;
}

const std::map<int, Rational>& ChildDistribution::exact_weights() const {
  if (!exact_) throw std::logic_error("distribution has no exact weights (float mode)");
  return *exact_;
}

std::vector<int> ChildDistribution::support() const {
  std::vector<int> out;
  out.reserve(weights_.size());
  for (const auto& [value, w] : weights_) out.push_back(value);
  return out;
}

double ChildDistribution::mean() const {
  double m = 0.0;
  for (const auto& [value, w] : weights_) m += value * w;
  return m;
}

// --- ThresholdFunction ------------------------------------------------------

ThresholdFunction::ThresholdFunction(std::map<int, int> thresholds) : thresholds_(std::move(thresholds)) {
  for (const auto& [value, k] : thresholds_) {
    require(value >= 0, "threshold given for negative child count " + std::to_string(value));
    require(k >= 1, "h(" + std::to_string(value) + ") = " + std::to_string(k) + " < 1");
  }
}

ThresholdFunction ThresholdFunction::constant(int k, int max_value) {
  std::map<int, int> m;
  for (int l = 0; l <= max_value; ++l) m.emplace(l, k);
  return ThresholdFunction(std::move(m));
}

int ThresholdFunction::operator()(int value) const {
  auto it = thresholds_.find(value);
  if (it == thresholds_.end()) throw ValidationError("h is not defined at " + std::to_string(value));
  return it->second;
}

bool ThresholdFunction::is_increasing() const {
  int prev = 0;
  for (const auto& [value, k] : thresholds_) {
    if (k < prev) return false;
    prev = k;
  }
  return true;
}

// --- RecursiveTreeSystem ----------------------------------------------------

RecursiveTreeSystem::RecursiveTreeSystem(ChildDistribution chi, ThresholdFunction h) : chi_(std::move(chi)) {
  auto thresholds = h.thresholds();
  thresholds.emplace(0, 1);  // no-op when h(0) is given
  h_ = ThresholdFunction(std::move(thresholds));
  for (int value : chi_.support()) {
    require(h_.defined(value), "h missing on support value " + std::to_string(value));
    if (value == 0) continue;
    int k = h_(value);
    tiers_[k].push_back(value);
    max_threshold_ = std::max(max_threshold_, k);
  }
}

std::vector<int> RecursiveTreeSystem::tier(int k) const {
  auto it = tiers_.find(k);
  return it == tiers_.end() ? std::vector<int>{} : it->second;
}

bool RecursiveTreeSystem::h_increasing_on_support() const {
  int prev = 0;
  for (int value : chi_.support()) {
    if (value == 0) continue;
    if (h_(value) < prev) return false;
    prev = h_(value);
  }
  return true;
}

std::map<int, std::vector<int>> tiers_of(const RecursiveTreeSystem& system) { return system.tiers(); }

namespace {

// Moves the mass of every positive support value failing `keep` onto 0.
RecursiveTreeSystem move_mass_to_zero(const RecursiveTreeSystem& system, const std::function<bool(int)>& keep,
                                      ThresholdFunction h) {
  const auto& chi = system.chi();
  if (chi.is_exact()) {
    std::map<int, Rational> w;
    Rational moved = 0;
    for (const auto& [value, q] : chi.exact_weights()) {
      if (value == 0 || keep(value))
        w[value] += q;
      else
        moved += q;
    }
    w[0] += moved;
    return RecursiveTreeSystem(ChildDistribution::exact(w), std::move(h));
  }
  std::map<int, double> w;
  double moved = 0.0;
  for (const auto& [value, p] : chi.weights()) {
    if (value == 0 || keep(value))
      w[value] += p;
    else
      moved += p;
  }
  w[0] += moved;
  return RecursiveTreeSystem(ChildDistribution::approx(w), std::move(h));
}

}  // namespace

RecursiveTreeSystem m_truncation(const RecursiveTreeSystem& system, int m) {
  const auto& h = system.h();
  return move_mass_to_zero(system, [&](int value) { return h(value) <= m; }, h);
}

RecursiveTreeSystem normalize_thresholds(const RecursiveTreeSystem& system) {
  auto thresholds = system.h().thresholds();
  for (auto& [value, k] : thresholds)
    if (value >= 1 && k > value) k = value;
  const auto& h = system.h();
  return move_mass_to_zero(system, [&](int value) { return h(value) <= value; }, ThresholdFunction(thresholds));
}

// --- distributions ----------------------------------------------------------

ChildDistribution poisson_truncated(double lambda, double tail_tol) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("Poisson mean must be a finite nonnegative number");
  if (!(tail_tol > 0.0 && tail_tol < 1.0)) throw ValidationError("tail tolerance must lie in (0,1)");
  if (lambda == 0.0) return ChildDistribution::approx({{0, 1.0}});
  // pmf far enough out that the neglected remainder is below 1e-30 * tail_tol
  std::vector<double> pmf;
  for (int k = 0;; ++k) {
    double logp = -lambda + k * std::log(lambda) - std::lgamma(k + 1.0);
    pmf.push_back(std::exp(logp));
    if (k > lambda && pmf.back() < 1e-30 * tail_tol) break;
  }
  std::vector<double> tail(pmf.size(), 0.0);  // tail[n] = P[X > n]
  for (std::size_t n = pmf.size() - 1; n-- > 0;) tail[n] = tail[n + 1] + pmf[n + 1];
  std::size_t cut = 0;
  while (tail[cut] >= tail_tol) ++cut;
  std::map<int, double> w;
  w[0] = pmf[0] + tail[cut];
  for (std::size_t k = 1; k <= cut; ++k) w[static_cast<int>(k)] = pmf[k];
  return ChildDistribution::approx(w);
}

ChildDistribution truncated_formula(const std::function<double(int)>& weight, int first, int n_max) {
  if (first < 1) throw ValidationError("formula truncation starts at a positive child count");
  std::map<int, double> w;
  long double total = 0.0L;
  for (int l = first; l <= n_max; ++l) {
    double p = weight(l);
    w[l] = p;
    total += p;
  }
  double rest = static_cast<double>(1.0L - total);
  if (rest < -kFloatSumTolerance) throw ValidationError("formula weights exceed 1 before the cutoff");
  w[0] = std::max(rest, 0.0);
  return ChildDistribution::approx(w);
}

// --- families ---------------------------------------------------------------

SystemFamily::SystemFamily(std::map<int, RationalPoly> weight_polys, ThresholdFunction h, Rational t_min,
                           Rational t_max)
    : polys_(std::move(weight_polys)), h_(std::move(h)), t_min_(std::move(t_min)), t_max_(std::move(t_max)) {
  require(t_min_ <= t_max_, "family interval is empty");
  RationalPoly total;
  for (const auto& [value, p] : polys_) {
    require(value >= 0, "child count " + std::to_string(value) + " is negative");
    total += p;
  }
  require(total == RationalPoly({Rational(1)}), "family weights do not sum to 1 identically in t");
}

RecursiveTreeSystem SystemFamily::instantiate(const Rational& raw) const {
  Rational t = raw;
  t.canonicalize();
  require(t >= t_min_ && t <= t_max_, "t = " + to_string(t) + " outside family interval");
  std::map<int, Rational> w;
  for (const auto& [value, p] : polys_) {
    Rational q = p.eval(t);
    require(q >= 0, "weight of " + std::to_string(value) + " is negative at t = " + to_string(t));
    w.emplace(value, q);
  }
  return RecursiveTreeSystem(ChildDistribution::exact(w), h_);
}

RecursiveTreeSystem SystemFamily::instantiate(double t) const {
  constexpr double slack = 1e-12;
  require(t >= t_min() - slack && t <= t_max() + slack, "t = " + fmt_double(t) + " outside family interval");
  std::map<int, double> w;
  for (const auto& [value, p] : polys_) {
    double q = p.eval(t);
    if (q < 0.0 && q > -1e-14) q = 0.0;
    require(q >= 0.0, "weight of " + std::to_string(value) + " is negative at t = " + fmt_double(t));
    w.emplace(value, q);
  }
  return RecursiveTreeSystem(ChildDistribution::approx(w), h_);
}

RecursiveTreeSystem PoissonFamily::instantiate(double t) const {
  auto chi = poisson_truncated(t, tail_tol);
  return RecursiveTreeSystem(chi, ThresholdFunction::constant(threshold, chi.max_value()));
}

FamilyFn family_function(const Family& family) {
  return std::visit([](const auto& f) -> FamilyFn { return [f](double t) { return f.instantiate(t); }; }, family);
}

double family_t_min(const Family& family) {
  if (auto* f = std::get_if<SystemFamily>(&family)) return f->t_min();
  return std::get<PoissonFamily>(family).t_min;
}

double family_t_max(const Family& family) {
  if (auto* f = std::get_if<SystemFamily>(&family)) return f->t_max();
  return std::get<PoissonFamily>(family).t_max;
}

// --- presets ----------------------------------------------------------------

namespace {

RationalPoly poly(std::initializer_list<const char*> coeffs) {
  std::vector<Rational> c;
  for (const char* q : coeffs) c.push_back(parse_rational(q));
  return RationalPoly(std::move(c));
}

std::map<int, Rational> weights(std::initializer_list<std::pair<int, const char*>> entries) {
  std::map<int, Rational> w;
  for (const auto& [value, q] : entries) w.emplace(value, parse_rational(q));
  return w;
}

}  // namespace

SystemFamily named_family(std::string_view name) {
  if (name == "fig1")
    return SystemFamily({{0, poly({"1/3", "-1"})}, {2, poly({"1/2"})}, {3, poly({"1/6", "1"})}},
                        ThresholdFunction({{0, 1}, {1, 1}, {2, 1}, {3, 2}}), 0, make_ratio(1, 3));
  if (name == "fig2")
    return SystemFamily({{0, poly({"1/20", "-1"})}, {2, poly({"1/2", "1"})}, {5, poly({"9/20"})}},
                        ThresholdFunction({{0, 1}, {2, 1}, {5, 4}}), 0, make_ratio(1, 20));
  if (name == "fig3")
    return SystemFamily({{0, poly({"1/24"})},
                         {2, poly({"1/2", "0", "-3"})},
                         {3, poly({"1/6", "1"})},
                         {6, poly({"7/24", "-1", "3"})}},
                        ThresholdFunction({{0, 1}, {2, 1}, {3, 2}, {6, 5}}), 0, make_ratio(2, 5));
  if (name == "fig5")
    return SystemFamily({{2, poly({"1/2", "1"})}, {3, poly({"1/2", "-1"})}}, ThresholdFunction({{0, 1}, {2, 1}, {3, 3}}), 0,
                        make_ratio(1, 2));
  throw ValidationError("unknown family '" + std::string(name) + "'");
}

RecursiveTreeSystem named_system(std::string_view name) {
  if (name == "fig4")
    return RecursiveTreeSystem(ChildDistribution::exact(weights({{0, "1/10"}, {2, "1/2"}, {3, "1/5"}, {4, "1/5"}})),
                               ThresholdFunction({{0, 1}, {2, 1}, {3, 2}, {4, 2}}));
  if (name == "example45")
    return RecursiveTreeSystem(
        ChildDistribution::exact(weights({{0, "64/135"}, {2, "1/3"}, {3, "1/9"}, {4, "1/27"}, {5, "2/45"}})),
        ThresholdFunction({{0, 1}, {2, 1}, {3, 1}, {4, 2}, {5, 2}}));
  if (name == "delta1") return RecursiveTreeSystem(ChildDistribution::exact({{1, Rational(1)}}), ThresholdFunction({{0, 1}, {1, 1}}));
  throw ValidationError("unknown system '" + std::string(name) + "'");
}

// --- documents --------------------------------------------------------------

namespace {

using nlohmann::json;

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  require(obj.is_object(), where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    require(known, "unknown key '" + key + "' in " + where);
  }
}

int get_int(const json& obj, const char* key, const std::string& where) {
  require(obj.contains(key), "missing '" + std::string(key) + "' in " + where);
  const auto& v = obj.at(key);
  require(v.is_number_integer(), "'" + std::string(key) + "' in " + where + " must be an integer");
  return v.get<int>();
}

std::string number_text(const json& v, const std::string& what) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return fmt_double(v.get<double>());
  throw ValidationError(what + " must be a number or numeric string");
}

Rational get_rational(const std::string& text, const std::string& what) {
  try {
    return parse_rational(text);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(what + ": " + e.what());
  }
}

Rational get_rational(const json& v, const std::string& what) { return get_rational(number_text(v, what), what); }

ThresholdFunction parse_thresholds(const json& doc) {
  std::map<int, int> h;
  if (doc.contains("h")) {
    require(doc.at("h").is_array(), "'h' must be an array");
    for (const auto& entry : doc.at("h")) {
      check_keys(entry, {"value", "threshold"}, "h entry");
      int value = get_int(entry, "value", "h entry");
      int k = get_int(entry, "threshold", "h entry");
      require(h.emplace(value, k).second, "duplicate h entry for value " + std::to_string(value));
    }
  }
  return ThresholdFunction(std::move(h));
}

// Fills h_default on every listed child count lacking an explicit threshold.
ThresholdFunction apply_default(const ThresholdFunction& h, const json& doc, const std::set<int>& values) {
  if (!doc.contains("h_default")) return h;
  int k = get_int(doc, "h_default", "document");
  auto m = h.thresholds();
  for (int v : values) m.emplace(v, k);
  m.emplace(0, k);
  return ThresholdFunction(std::move(m));
}

}  // namespace

bool is_family_document(std::string_view text) {
  json doc = parse_json(text);
  if (!doc.is_object()) return false;
  if (doc.contains("poisson") || doc.contains("t_min") || doc.contains("t_max")) return true;
  if (doc.contains("chi") && doc.at("chi").is_array())
    for (const auto& e : doc.at("chi"))
      if (e.is_object() && e.contains("weight_poly")) return true;
  return false;
}

RecursiveTreeSystem parse_system(std::string_view text) {
  json doc = parse_json(text);
  check_keys(doc, {"chi", "h", "h_default"}, "system document");
  require(doc.contains("chi") && doc.at("chi").is_array(), "system document needs a 'chi' array");
  std::map<int, std::string> raw;
  for (const auto& entry : doc.at("chi")) {
    check_keys(entry, {"value", "weight"}, "chi entry");
    int value = get_int(entry, "value", "chi entry");
    require(entry.contains("weight"), "missing 'weight' in chi entry");
    require(raw.emplace(value, number_text(entry.at("weight"), "weight")).second,
            "duplicate chi entry for value " + std::to_string(value));
  }
  require(!raw.empty(), "'chi' is empty");
  bool exact = std::all_of(raw.begin(), raw.end(), [](const auto& kv) { return looks_rational(kv.second); });
  std::set<int> values;
  for (const auto& kv : raw) values.insert(kv.first);
  auto h = apply_default(parse_thresholds(doc), doc, values);
  if (exact) {
    std::map<int, Rational> w;
    for (const auto& [value, s] : raw) w.emplace(value, get_rational(s, "weight"));
    return RecursiveTreeSystem(ChildDistribution::exact(w), h);
  }
  std::map<int, double> w;
  for (const auto& [value, s] : raw) {
    try {
      const Rational q = parse_rational(s);
      // strtod rounds to nearest; mpq's get_d truncates.
      w.emplace(value, s.find('/') == std::string::npos ? std::strtod(s.c_str(), nullptr) : q.get_d());
    } catch (const std::invalid_argument& e) {
      throw ValidationError(std::string("weight: ") + e.what());
    }
  }
  return RecursiveTreeSystem(ChildDistribution::approx(w), h);
}

Family parse_family(std::string_view text) {
  json doc = parse_json(text);
  if (doc.is_object() && doc.contains("poisson")) {
    check_keys(doc, {"poisson", "h_default", "t_min", "t_max"}, "Poisson family document");
    check_keys(doc.at("poisson"), {"tail_tol"}, "'poisson'");
    PoissonFamily f;
    f.threshold = get_int(doc, "h_default", "Poisson family document");
    require(f.threshold >= 1, "h_default must be >= 1");
    if (doc.at("poisson").contains("tail_tol")) f.tail_tol = get_rational(doc.at("poisson").at("tail_tol"), "tail_tol").get_d();
    if (doc.contains("t_min")) f.t_min = get_rational(doc.at("t_min"), "t_min").get_d();
    if (doc.contains("t_max")) f.t_max = get_rational(doc.at("t_max"), "t_max").get_d();
    require(f.t_min >= 0.0 && f.t_min <= f.t_max, "Poisson family interval must satisfy 0 <= t_min <= t_max");
    return f;
  }
  check_keys(doc, {"chi", "h", "h_default", "t_min", "t_max"}, "family document");
  require(doc.contains("chi") && doc.at("chi").is_array(), "family document needs a 'chi' array");
  require(doc.contains("t_min") && doc.contains("t_max"), "family document needs 't_min' and 't_max'");
  std::map<int, RationalPoly> polys;
  std::set<int> values;
  for (const auto& entry : doc.at("chi")) {
    check_keys(entry, {"value", "weight_poly"}, "family chi entry");
    int value = get_int(entry, "value", "family chi entry");
    require(entry.contains("weight_poly") && entry.at("weight_poly").is_array(), "family chi entry needs 'weight_poly'");
    std::vector<Rational> c;
    for (const auto& coeff : entry.at("weight_poly")) c.push_back(get_rational(coeff, "weight_poly coefficient"));
    require(polys.emplace(value, RationalPoly(std::move(c))).second,
            "duplicate chi entry for value " + std::to_string(value));
    values.insert(value);
  }
  auto h = apply_default(parse_thresholds(doc), doc, values);
  for (int v : values)
    if (v != 0) require(h.defined(v), "h missing on support value " + std::to_string(v));
  return SystemFamily(std::move(polys), h, get_rational(doc.at("t_min"), "t_min"), get_rational(doc.at("t_max"), "t_max"));
}

}  // namespace rts

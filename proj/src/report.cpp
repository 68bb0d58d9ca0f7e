#include "rts/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "rts/admap.hpp"

namespace rts {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json system_json(const RecursiveTreeSystem& system) {
  Json chi = Json::array();
  for (const auto& [value, w] : system.chi().weights()) {
    Json entry{{"value", value}};
    if (system.is_exact())
      entry["weight"] = to_string(system.chi().exact_weight(value));
    else
      entry["weight"] = w;
    chi.push_back(entry);
  }
  Json h = Json::array();
  for (const auto& [value, k] : system.h().thresholds()) h.push_back({{"value", value}, {"threshold", k}});
  return {{"chi", chi}, {"h", h}};
}

Json fixed_point_json(const FixedPoint& point) {
  Json j{{"x", point.x},
         {"psi_prime", point.psi_prime},
         {"multiplicity", point.multiplicity},
         {"interpretable", point.interpretable},
         {"boundary", point.boundary},
         {"tags", point.tags},
         {"residual", point.residual}};
  if (point.exact) j["exact"] = to_string(*point.exact);
  return j;
}

Json fixed_point_report_json(const FixedPointReport& report) {
  Json points = Json::array();
  for (const auto& p : report.points) points.push_back(fixed_point_json(p));
  return {{"continuum", report.continuum}, {"fixed_points", points}, {"residual_bound", report.residual_bound}};
}

Json analysis_json(const RecursiveTreeSystem& system, const FixedPointOptions& options) {
  Json out;
  out["mode"] = system.is_exact() ? "exact" : "float";
  out["max_threshold"] = system.max_threshold();
  Json tiers = Json::object();
  for (const auto& [k, values] : system.tiers()) tiers[std::to_string(k)] = values;
  out["tiers"] = tiers;

  const int orders = std::max(3, system.max_threshold());
  Json derivs = Json::array();
  if (system.is_exact()) {
    const auto d = derivs_at_zero_exact(system, orders);
    for (int j = 0; j < orders; ++j)
      derivs.push_back({{"order", j + 1}, {"value", d[static_cast<std::size_t>(j)].get_d()},
                        {"exact", to_string(d[static_cast<std::size_t>(j)])}});
  } else {
    const auto d = derivs_at_zero(system, orders);
    for (int j = 0; j < orders; ++j) derivs.push_back({{"order", j + 1}, {"value", d[static_cast<std::size_t>(j)]}});
  }
  out["derivatives_at_zero"] = derivs;

  const auto conc = concordance(system);
  Json cj{{"kind", to_string(conc.kind)}, {"m", conc.m}, {"witness", conc.witness}};
  if (conc.exact_witness) cj["exact_witness"] = to_string(*conc.exact_witness);
  out["concordance"] = cj;

  if (system.chi().support().size() >= 2) {
    const auto crit = is_critical(system);
    out["critical"] = crit.critical;
  } else {
    out["critical"] = nullptr;
  }

  const auto report = find_fixed_points(system, options);
  out["continuum"] = report.continuum;
  out["residual_bound"] = report.residual_bound;
  Json points = Json::array();
  for (const auto& p : report.points) points.push_back(fixed_point_json(p));
  out["fixed_points"] = points;
  if (report.continuum) out["note"] = "identity map: every x in [0,1] is a fixed point";

  if (conc.kind == ConcordanceKind::supercordant) {
    if (const FixedPoint* x0 = report.smallest_nonzero()) {
      out["event"] = "with probability " + format_double(x0->x) +
                     ", T contains an admissible subtree in which all but finitely many vertices v have h(n_T(v)) <= " +
                     std::to_string(conc.m);
    }
  }
  return out;
}

Json transition_json(const TransitionFinding& finding) {
  return {{"t_star", finding.t_star}, {"x_star", finding.x_star}, {"kind", to_string(finding.kind)},
          {"jump", finding.jump},     {"t_lo", finding.t_lo},     {"t_hi", finding.t_hi}};
}

namespace {

Json weights_array(const std::map<int, Rational>& weights) {
  Json arr = Json::array();
  for (const auto& [value, w] : weights) arr.push_back({{"value", value}, {"weight", to_string(w)}});
  return arr;
}

}  // namespace

Json crit_json(const CritSpec& spec) {
  Json h = Json::array();
  const auto spec_h = spec.h();
  for (const auto& [value, k] : spec_h.thresholds()) h.push_back({{"value", value}, {"threshold", k}});
  return {{"support_seq", spec.support_seq()}, {"order", spec.order()}, {"weights", weights_array(spec.weights())},
          {"h", h}};
}

Json decomposition_json(const Decomposition& decomposition) {
  Json terms = Json::array();
  for (const auto& term : decomposition.terms)
    terms.push_back({{"coefficient", to_string(term.coefficient)}, {"crit", crit_json(term.crit)}});
  return {{"m", decomposition.m},
          {"normalized", decomposition.normalized},
          {"terms", terms},
          {"tier_weights", weights_array(decomposition.tier_weights)},
          {"reconstruction", weights_array(decomposition.reconstruct())}};
}

Json estimate_json(const EventEstimate& estimate) {
  return {{"event", estimate.event},     {"trials", estimate.trials},       {"successes", estimate.successes},
          {"excluded", estimate.excluded}, {"estimate", estimate.estimate}, {"stderr", estimate.std_error},
          {"predicted", estimate.predicted}, {"prediction", estimate.prediction}, {"z", estimate.z}};
}

Json min_level_json(const MinLevelSizes& sizes) {
  const auto& s = sizes.summary;
  return {{"event", "min_level_size"},
          {"trials", sizes.trials},
          {"without_subtree", sizes.without_subtree},
          {"excluded", sizes.excluded},
          {"level", s.level},
          {"n_conditioned", s.n},
          {"mean", s.mean},
          {"stderr", s.std_error},
          {"p50", s.p50},
          {"p90", s.p90}};
}

std::string weight_table(const std::map<int, Rational>& weights) {
  std::size_t width = 1;
  for (const auto& entry : weights) width = std::max(width, std::to_string(entry.first).size());
  std::ostringstream os;
  for (const auto& [value, w] : weights) {
    const std::string v = std::to_string(value);
    os << std::string(width - v.size(), ' ') << v << ": " << to_string(w) << '\n';
  }
  return os.str();
}

std::string decomposition_table(const Decomposition& decomposition) {
  std::ostringstream os;
  os << "m = " << decomposition.m << (decomposition.normalized ? " (thresholds normalized)" : "") << '\n';
  for (const auto& term : decomposition.terms) {
    os << to_string(term.coefficient) << " * crit(";
    for (std::size_t i = 0; i < term.crit.support_seq().size(); ++i)
      os << (i ? "," : "") << term.crit.support_seq()[i];
    os << ")\n";
  }
  return os.str();
}

std::string curve_csv(const RecursiveTreeSystem& system, int samples) {
  if (samples < 2) throw ValidationError("samples must be at least 2");
  std::string out = "x,psi_minus_x\n";
  for (int i = 0; i < samples; ++i) {
    const double x = i == samples - 1 ? 1.0 : static_cast<double>(i) / (samples - 1);
    out += format_double(x) + "," + format_double(psi(system, x) - x) + "\n";
  }
  return out;
}

std::string levels_csv(const std::vector<LevelSummary>& levels) {
  std::string out = "level,mean,stderr,p50,p90,n_conditioned\n";
  for (const auto& s : levels)
    out += std::to_string(s.level) + "," + format_double(s.mean) + "," + format_double(s.std_error) + "," +
           format_double(s.p50) + "," + format_double(s.p90) + "," + std::to_string(s.n) + "\n";
  return out;
}

}  // namespace rts

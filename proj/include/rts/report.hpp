#pragma once

// JSON and CSV rendering of analysis, construction and simulation results.
// JSON objects use sorted keys; doubles print in shortest round-trip form.

#include <string>
#include <vector>

#include <json.hpp>

#include "rts/critmeasure.hpp"
#include "rts/fixedpoint.hpp"
#include "rts/simulate.hpp"

namespace rts {

using Json = nlohmann::json;

/// %.17g rendering used by every CSV writer.
std::string format_double(double x);

/// System document accepted by parse_system (rational strings in exact mode).
Json system_json(const RecursiveTreeSystem& system);

Json fixed_point_json(const FixedPoint& point);
Json fixed_point_report_json(const FixedPointReport& report);

/// Full analysis: derivatives at 0 (orders 1..max(3, max_threshold)),
/// concordance, criticality, fixed points and, for supercordant systems, the
/// event attached to the smallest nonzero fixed point.
Json analysis_json(const RecursiveTreeSystem& system, const FixedPointOptions& options = {});

Json transition_json(const TransitionFinding& finding);
Json crit_json(const CritSpec& spec);
Json decomposition_json(const Decomposition& decomposition);
Json estimate_json(const EventEstimate& estimate);
Json min_level_json(const MinLevelSizes& sizes);

/// "value: weight" lines, values right-aligned.
std::string weight_table(const std::map<int, Rational>& weights);
std::string decomposition_table(const Decomposition& decomposition);

/// "x,psi_minus_x" with `samples` equally spaced points on [0,1].
std::string curve_csv(const RecursiveTreeSystem& system, int samples);
/// "level,mean,stderr,p50,p90,n_conditioned".
std::string levels_csv(const std::vector<LevelSummary>& levels);

}  // namespace rts

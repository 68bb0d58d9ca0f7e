#pragma once

#include <map>
#include <string>

#include "rts/core.hpp"

namespace testing {

inline rts::RecursiveTreeSystem exact_system(const std::map<int, std::string>& chi, const std::map<int, int>& h) {
  std::map<int, rts::Rational> w;
  for (const auto& [v, q] : chi) w.emplace(v, rts::parse_rational(q));
  return rts::RecursiveTreeSystem(rts::ChildDistribution::exact(w), rts::ThresholdFunction(h));
}

inline rts::RecursiveTreeSystem float_system(const std::map<int, double>& chi, const std::map<int, int>& h) {
  return rts::RecursiveTreeSystem(rts::ChildDistribution::approx(chi), rts::ThresholdFunction(h));
}

inline std::map<int, double> weights_of(const rts::RecursiveTreeSystem& s) { return s.chi().weights(); }

inline std::map<int, mpq_class> exact_weights_of(const rts::RecursiveTreeSystem& s) {
  std::map<int, mpq_class> out;
  for (const auto& [v, q] : s.chi().exact_weights()) out.emplace(v, q);
  return out;
}

}  // namespace testing

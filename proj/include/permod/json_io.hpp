#pragma once

// JSON conversions for configurations and fit reports (nlohmann::json).

#include "permod/fitting.hpp"
#include "permod/hydraulic.hpp"

#include <json.hpp>

#include <string>

namespace permod {

/// Array form, in HydraulicConfig::to_array order.
inline nlohmann::json config_to_json(const HydraulicConfig &c) {
  const auto a = c.to_array();
  return nlohmann::json(std::vector<double>(a.begin(), a.end()));
}

/// Accepts the 8-number array or an object with named fields.
inline HydraulicConfig config_from_json(const nlohmann::json &j) {
  std::array<double, HydraulicConfig::size> v{};
  if (j.is_array()) {
    if (j.size() != v.size())
      throw DataError("hydraulic config needs 8 numbers, got " + std::to_string(j.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!j[i].is_number())
        throw DataError("hydraulic config entry " + std::to_string(i) + " is not a number");
      v[i] = j[i].get<double>();
    }
  } else if (j.is_object()) {
    static constexpr const char *names[] = {"an_f",  "an_s",  "m_ae",  "m_ans",
                                            "m_anf", "theta", "gamma", "phi"};
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!j.contains(names[i]) || !j[names[i]].is_number())
        throw DataError(std::string("hydraulic config missing '") + names[i] + "'");
      v[i] = j[names[i]].get<double>();
    }
  } else {
    throw DataError("hydraulic config must be a JSON array or object");
  }
  return HydraulicConfig::from_array(v);
}

inline HydraulicConfig parse_config(const std::string &text) {
  try {
    return config_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("invalid config JSON: ") + e.what());
  }
}

inline nlohmann::json to_json(const ConstantTauFit &f) {
  return {{"tau_s", f.tau},
          {"objective", f.objective},
          {"iterations", f.iterations},
          {"evaluations", f.evaluations},
          {"saturated", f.saturated}};
}

inline nlohmann::json to_json(const ExponentialTauFit &f) {
  return {{"a", f.a},
          {"b", f.b},
          {"c", f.c},
          {"r_squared", f.r_squared},
          {"objective", f.cost},
          {"evaluations", f.evaluations},
          {"converged", f.converged},
          {"rank_deficient", f.rank_deficient},
          {"distinct_d_cp", f.distinct_d_cp}};
}

inline nlohmann::json to_json(const ChidnokTauFit &f) {
  return {{"tau_s", f.tau},
          {"tte_s", f.tte},
          {"objective", f.objective},
          {"evaluations", f.evaluations},
          {"at_bracket_edge", f.at_bracket_edge}};
}

inline nlohmann::json to_json(const HydraulicFitResult &f) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto &r : f.runs)
    runs.push_back({{"seed", r.seed},
                    {"config", config_to_json(r.config)},
                    {"objective", r.objective},
                    {"evaluations", r.evaluations},
                    {"wall_seconds", r.wall_seconds}});
  return {{"config", config_to_json(f.config)},
          {"objective", f.objective},
          {"tte_rms_pct", f.terms.tte_rms_pct},
          {"recovery_rms_pp", f.terms.recovery_rms_pp},
          {"best_run", f.best_run},
          {"seed", f.seed},
          {"evaluations", f.evaluations},
          {"wall_seconds", f.wall_seconds},
          {"runs", runs}};
}

} // namespace permod

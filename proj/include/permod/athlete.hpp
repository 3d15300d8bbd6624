#pragma once

#include "permod/error.hpp"

#include <cmath>

namespace permod {

/**
 * @brief Critical power (W) and anaerobic work capacity W' (J) of an athlete.
 */
struct AthleteCapacity {
  double cp = 0.0;
  double w_prime = 0.0;

  void validate() const {
    if (!(cp > 0.0) || !std::isfinite(cp))
      throw DataError("athlete: cp must be > 0");
    if (!(w_prime > 0.0) || !std::isfinite(w_prime))
      throw DataError("athlete: w_prime must be > 0");
  }

  /// Power predicted to exhaust the athlete after `seconds` (inverse of cp_tte).
  double power_for_tte(double seconds) const { return cp + w_prime / seconds; }

  friend bool operator==(const AthleteCapacity &, const AthleteCapacity &) = default;
};

/// Time to exhaustion at constant power under the critical power model.
inline double cp_tte(const AthleteCapacity &athlete, double power) {
  if (!(power > athlete.cp))
    throw SustainableIntensity(power, INFINITY);
  return athlete.w_prime / (power - athlete.cp);
}

} // namespace permod

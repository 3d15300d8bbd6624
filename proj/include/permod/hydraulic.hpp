#pragma once

/**
 * @file hydraulic.hpp
 * @brief Generalized three-tank hydraulic model of energy expenditure.
 *
 * Geometry (all heights normalized to a unit-high system, depths measured
 * down from the top):
 *
 *   Ae   infinite source, pipe exit at height phi above the floor.
 *   AnF  middle tank, full unit height, cross-section an_f (so capacity an_f J).
 *        The tap draws the power demand from its bottom.
 *   AnS  right tank, spans depths [theta, 1 - gamma], cross-section an_s
 *        (capacity an_s · (1 - theta - gamma) J).
 *
 * State: h is the depth of the AnF surface below the top (0 full, 1 empty),
 * g the depth of the AnS surface below the AnS top (0 full, 1 - theta - gamma
 * empty).
 *
 * Per step, the demand first lowers AnF. Ae then flows at
 * m_ae · h / (1 - phi), capped at m_ae once the AnF surface drops below the
 * pipe exit. AnS and AnF exchange liquid through the bidirectional pipe:
 *
 *   AnS -> AnF  m_ans · (h - g - theta) / (1 - theta - gamma)   surface above AnS bottom
 *   AnS -> AnF  m_ans · (height_ans - g) / height_ans           AnF below AnS bottom
 *   AnF -> AnS  m_anf · (g + theta - h) / (1 - gamma)           AnF above AnS surface
 *
 * Exhaustion is reported when AnF runs dry (h reaches 1).
 *
 * Configurations are exchanged as 8-element arrays ordered
 * [an_f, an_s, m_ae, m_ans, m_anf, theta, gamma, phi]. This is the layout of
 * the published study configurations.
 */

#include "permod/error.hpp"
#include "permod/step_outcome.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace permod {

struct HydraulicConfig {
  double an_f = 0.0;
  double an_s = 0.0;
  double m_ae = 0.0;
  double m_ans = 0.0;
  double m_anf = 0.0;
  double theta = 0.0;
  double gamma = 0.0;
  double phi = 0.0;

  static constexpr std::size_t size = 8;

  static HydraulicConfig from_array(const std::array<double, size> &v) {
    HydraulicConfig c{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
    c.validate();
    return c;
  }

  std::array<double, size> to_array() const {
    return {an_f, an_s, m_ae, m_ans, m_anf, theta, gamma, phi};
  }

  bool valid() const noexcept {
    const auto pos = [](double x) { return x > 0.0 && std::isfinite(x); };
    const auto unit = [](double x) { return x >= 0.0 && x < 1.0; };
    return pos(an_f) && pos(an_s) && pos(m_ae) && pos(m_ans) && pos(m_anf) &&
           unit(theta) && unit(gamma) && unit(phi) && theta + gamma < 1.0;
  }

  void validate() const {
    if (!(an_f > 0.0) || !(an_s > 0.0))
      throw DataError("hydraulic config: tank capacities must be > 0");
    if (!(m_ae > 0.0) || !(m_ans > 0.0) || !(m_anf > 0.0))
      throw DataError("hydraulic config: flow capacities must be > 0");
    if (!(phi >= 0.0 && phi < 1.0))
      throw DataError("hydraulic config: phi must lie in [0, 1)");
    if (!(theta >= 0.0 && gamma >= 0.0 && theta + gamma < 1.0))
      throw DataError("hydraulic config: theta + gamma must be < 1");
    if (!valid())
      throw DataError("hydraulic config: non-finite parameter");
  }

  double ans_height() const noexcept { return 1.0 - theta - gamma; }

  /// Stored liquid (J) for a given fill state.
  double stored(double h, double g) const noexcept {
    return an_f * (1.0 - h) + an_s * (ans_height() - g);
  }

  friend bool operator==(const HydraulicConfig &, const HydraulicConfig &) = default;
};

struct HydraulicState {
  double h = 0.0;
  double g = 0.0;
  double time = 0.0;
  bool exhausted = false;
};

/// Flows (W) realized during one step. Positive ans_flow is AnS -> AnF.
struct HydraulicFlows {
  double ae_flow = 0.0;
  double ans_flow = 0.0;
};

struct HydraulicStepResult {
  HydraulicState state;
  HydraulicFlows flows;
  /// Fraction of dt elapsed when AnF ran dry; 1 when not exhausted.
  double fraction = 1.0;
};

inline HydraulicStepResult hydraulic_step_detail(const HydraulicState &state,
                                                 const HydraulicConfig &c,
                                                 double power, double dt) {
  const double height_ans = c.ans_height();
  const double h_prev = state.h;
  double h = state.h + power * dt / c.an_f;
  double g = state.g;

  const double ae_flow = h < 1.0 - c.phi ? c.m_ae * h / (1.0 - c.phi) : c.m_ae;

  double an_flow = 0.0;
  const double ans_surface = g + c.theta;
  if (h <= c.theta && g <= 0.0) {
    an_flow = 0.0; // AnS full, AnF surface above the AnS top
  } else if (h >= 1.0 - c.gamma && g >= height_ans) {
    an_flow = 0.0; // AnS empty
  } else if (h < ans_surface && g > 0.0) {
    an_flow = -c.m_anf * (ans_surface - h) / (1.0 - c.gamma);
  } else if (h > ans_surface && h < 1.0 - c.gamma) {
    an_flow = c.m_ans * (h - ans_surface) / height_ans;
  } else if (h >= 1.0 - c.gamma && g < height_ans) {
    an_flow = c.m_ans * (height_ans - g) / height_ans;
  }

  // AnS cannot be drained below its bottom or filled above its top.
  if (g + an_flow * dt / c.an_s > height_ans)
    an_flow = (height_ans - g) * c.an_s / dt;
  else if (g + an_flow * dt / c.an_s < 0.0)
    an_flow = -g * c.an_s / dt;

  g = std::clamp(g + an_flow * dt / c.an_s, 0.0, height_ans);
  h -= (ae_flow + an_flow) * dt / c.an_f;
  h = std::max(h, 0.0);

  HydraulicStepResult out;
  out.flows = {ae_flow, an_flow};
  out.state.g = g;
  out.state.time = state.time + dt;
  if (h >= 1.0) {
    out.state.h = 1.0;
    out.state.exhausted = true;
    out.fraction = h > h_prev ? std::clamp((1.0 - h_prev) / (h - h_prev), 0.0, 1.0)
                              : 0.0;
  } else {
    out.state.h = h;
  }
  return out;
}

/// One explicit-Euler update of the tank levels under a power demand.
inline HydraulicState hydraulic_step(const HydraulicState &state,
                                     const HydraulicConfig &config,
                                     double power, double dt) {
  return hydraulic_step_detail(state, config, power, dt).state;
}

/// Stateful wrapper used by the protocol drivers.
class HydraulicModel {
public:
  explicit HydraulicModel(HydraulicConfig config) : config_(config) {
    config_.validate();
  }

  const HydraulicConfig &config() const noexcept { return config_; }
  const HydraulicState &state() const noexcept { return state_; }
  bool exhausted() const noexcept { return state_.exhausted; }

  void reset() { state_ = {}; }
  void set_state(const HydraulicState &s) { state_ = s; }

  StepOutcome step(double power, double dt) {
    const auto r = hydraulic_step_detail(state_, config_, power, dt);
    state_ = r.state;
    return {r.state.exhausted, r.fraction};
  }

private:
  HydraulicConfig config_;
  HydraulicState state_{};
};

/**
 * @brief Time to exhaustion at constant power from full tanks.
 *
 * The final partial step is truncated to the moment AnF runs dry.
 * @throws SustainableIntensity when t_max passes without exhaustion.
 */
inline double simulate_tte(const HydraulicConfig &config, double power,
                           double dt = 0.1, double t_max = 7200.0) {
  if (!(power > 0.0))
    throw SustainableIntensity(power, t_max);
  HydraulicState s{};
  const auto steps = static_cast<long long>(std::ceil(t_max / dt));
  for (long long i = 0; i < steps; ++i) {
    const auto r = hydraulic_step_detail(s, config, power, dt);
    if (r.state.exhausted)
      return (static_cast<double>(i) + r.fraction) * dt;
    s = r.state;
  }
  throw SustainableIntensity(power, t_max);
}

} // namespace permod

#pragma once

/**
 * @file wbal.hpp
 * @brief Differential W' balance model with interchangeable recovery τ rules.
 *
 * Above or at CP the balance depletes linearly by (P - CP) per second. Below
 * CP it recovers exponentially towards W' with a time constant τ that depends
 * on D_CP = CP - P:
 *
 *   skib:        τ = W' / D_CP
 *   bart:        τ = 2287.2 · D_CP^-0.688
 *   weig:        τ = 1274.45 · exp(-0.0308 · D_CP) + 266.65
 *   constant:    τ = value
 *   exponential: τ = a · exp(b · D_CP) + c
 *
 * For piecewise-constant power the model is solved exactly; WbalModel exposes
 * both a stepping interface and the closed forms used by the protocols.
 */

#include "permod/athlete.hpp"
#include "permod/error.hpp"
#include "permod/step_outcome.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace permod {

class TauFunction {
public:
  enum class Kind { skib, bart, weig, constant, exponential };

  static TauFunction skib() { return TauFunction(Kind::skib, 0, 0, 0); }
  static TauFunction bart() { return TauFunction(Kind::bart, 0, 0, 0); }
  static TauFunction weig() {
    return TauFunction(Kind::weig, 1274.45, -0.0308, 266.65);
  }
  static TauFunction constant(double seconds) {
    if (!(seconds > 0.0) || !std::isfinite(seconds))
      throw DataError("constant tau must be > 0");
    return TauFunction(Kind::constant, seconds, 0, 0);
  }
  static TauFunction exponential(double a, double b, double c) {
    if (!(a >= 0.0) || !(c > 0.0) || !std::isfinite(b))
      throw DataError("exponential tau requires a >= 0 and c > 0");
    return TauFunction(Kind::exponential, a, b, c);
  }

  Kind kind() const noexcept { return kind_; }
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double c() const noexcept { return c_; }

  /// Constant value in seconds for Kind::constant.
  double value() const noexcept { return a_; }

  std::string name() const {
    switch (kind_) {
    case Kind::skib: return "skib";
    case Kind::bart: return "bart";
    case Kind::weig: return "weig";
    case Kind::constant: return "constant";
    case Kind::exponential: return "exponential";
    }
    return "unknown";
  }

  /// True when the rule is defined at this D_CP.
  bool defined_at(double d_cp) const noexcept {
    if (kind_ == Kind::skib || kind_ == Kind::bart)
      return d_cp > 0.0;
    return d_cp >= 0.0;
  }

  /**
   * @brief Recovery time constant in seconds at D_CP watts below CP.
   *
   * skib needs W', which is taken from the athlete.
   */
  double at(const AthleteCapacity &athlete, double d_cp) const {
    if (!defined_at(d_cp))
      throw DomainError(name() + " tau undefined at D_CP=" + std::to_string(d_cp));
    switch (kind_) {
    case Kind::skib: return athlete.w_prime / d_cp;
    case Kind::bart: return 2287.2 * std::pow(d_cp, -0.688);
    case Kind::constant: return a_;
    case Kind::weig:
    case Kind::exponential: return a_ * std::exp(b_ * d_cp) + c_;
    }
    return a_;
  }

  friend bool operator==(const TauFunction &, const TauFunction &) = default;

private:
  TauFunction(Kind kind, double a, double b, double c)
      : kind_(kind), a_(a), b_(b), c_(c) {}

  Kind kind_;
  double a_;
  double b_;
  double c_;
};

inline double tau_at(const TauFunction &tau, const AthleteCapacity &athlete,
                     double d_cp) {
  return tau.at(athlete, d_cp);
}

struct WbalState {
  double balance = 0.0;
  double time = 0.0;
  bool exhausted = false;
};

/// Full-balance state for an athlete.
inline WbalState wbal_full(const AthleteCapacity &athlete) {
  return {athlete.w_prime, 0.0, false};
}

/**
 * @brief Balance after holding `power` for `duration` seconds from `balance`.
 *
 * Exact for constant power. Depletion clamps at 0. Recovery with a τ rule that
 * is undefined at the given D_CP leaves the balance unchanged.
 */
inline double wbal_advance(double balance, const AthleteCapacity &athlete,
                           const TauFunction &tau, double power,
                           double duration) {
  if (power >= athlete.cp)
    return std::max(0.0, balance - (power - athlete.cp) * duration);
  const double d_cp = athlete.cp - power;
  if (!tau.defined_at(d_cp))
    return balance;
  const double t = tau.at(athlete, d_cp);
  const double deficit = athlete.w_prime - balance;
  return std::min(athlete.w_prime,
                  athlete.w_prime - deficit * std::exp(-duration / t));
}

/// One discrete update of the W' balance.
inline WbalState wbal_step(const WbalState &state, const AthleteCapacity &athlete,
                           double power, double dt, const TauFunction &tau) {
  WbalState next = state;
  next.time = state.time + dt;
  if (power >= athlete.cp) {
    const double raw = state.balance - (power - athlete.cp) * dt;
    next.exhausted = raw <= 0.0;
    next.balance = std::max(0.0, raw);
  } else {
    next.balance = wbal_advance(state.balance, athlete, tau, power, dt);
    next.exhausted = false;
  }
  return next;
}

/**
 * @brief Stateful W'bal model usable by the protocol drivers.
 *
 * step() integrates one dt; the exact_* members give closed-form answers for
 * constant power and are what the protocols use.
 */
class WbalModel {
public:
  WbalModel(AthleteCapacity athlete, TauFunction tau)
      : athlete_(athlete), tau_(tau), state_(wbal_full(athlete)) {
    athlete_.validate();
  }

  const AthleteCapacity &athlete() const noexcept { return athlete_; }
  const TauFunction &tau() const noexcept { return tau_; }
  const WbalState &state() const noexcept { return state_; }
  double balance() const noexcept { return state_.balance; }
  bool exhausted() const noexcept { return state_.exhausted; }

  void reset() { state_ = wbal_full(athlete_); }
  void set_balance(double balance) {
    state_.balance = std::clamp(balance, 0.0, athlete_.w_prime);
    state_.exhausted = state_.balance <= 0.0;
  }

  StepOutcome step(double power, double dt) {
    const double before = state_.balance;
    state_ = wbal_step(state_, athlete_, power, dt, tau_);
    if (!state_.exhausted)
      return {};
    const double drain = (power - athlete_.cp) * dt;
    return {true, drain > 0.0 ? std::clamp(before / drain, 0.0, 1.0) : 0.0};
  }

  /// Seconds at constant power until the balance hits 0; +inf below/at CP.
  double exact_time_to_exhaustion(double balance, double power) const {
    if (power <= athlete_.cp)
      return INFINITY;
    return balance / (power - athlete_.cp);
  }

  double exact_advance(double balance, double power, double duration) const {
    return wbal_advance(balance, athlete_, tau_, power, duration);
  }

private:
  AthleteCapacity athlete_;
  TauFunction tau_;
  WbalState state_;
};

} // namespace permod

#pragma once

/**
 * @file protocol.hpp
 * @brief Exercise protocols evaluated uniformly over W'bal and hydraulic models.
 *
 * recovery_ratio runs WB1 -> RB -> WB2: exhaust at p_work from full, recover
 * for t_rec at p_rec, exhaust again at p_work, and report
 * TTE(WB2) / TTE(WB1) · 100.
 *
 * W'bal models are solved in closed form (linear depletion, exact exponential
 * recovery). Simulated models are stepped at dt with the last partial step of
 * each work bout truncated to the exhaustion point.
 */

#include "permod/error.hpp"
#include "permod/hydraulic.hpp"
#include "permod/step_outcome.hpp"
#include "permod/wbal.hpp"

#include <algorithm>
#include <cmath>
#include <concepts>
#include <numeric>
#include <span>
#include <type_traits>
#include <variant>
#include <vector>

namespace permod {

template <class M>
concept SimulatedModel = requires(M m, double p, double dt) {
  m.reset();
  { m.step(p, dt) } -> std::same_as<StepOutcome>;
  { m.exhausted() } -> std::convertible_to<bool>;
};

/// Runtime-selected model, as used by the CLI.
using ModelHandle = std::variant<WbalModel, HydraulicModel>;

inline constexpr double default_dt = 0.1;
inline constexpr double default_t_max = 7200.0;

namespace detail {

inline long long step_count(double duration, double dt) {
  return std::llround(duration / dt);
}

inline void check_recovery_args(double p_work, double p_rec, double t_rec,
                                double dt) {
  if (!(dt > 0.0))
    throw DataError("dt must be > 0");
  if (!(p_rec < p_work))
    throw DataError("p_rec must be below p_work");
  if (!(t_rec >= 0.0))
    throw DataError("t_rec must be >= 0");
}

/// Steps at constant power until exhaustion; returns elapsed seconds.
template <SimulatedModel M>
double run_to_exhaustion(M &model, double power, double dt, double t_max) {
  const long long limit = step_count(t_max, dt);
  for (long long i = 0; i < limit; ++i) {
    const StepOutcome out = model.step(power, dt);
    if (out.exhausted)
      return (static_cast<double>(i) + out.fraction) * dt;
  }
  throw SustainableIntensity(power, t_max);
}

template <SimulatedModel M>
void run_for(M &model, double power, long long steps, double dt) {
  for (long long i = 0; i < steps; ++i)
    model.step(power, dt);
}

inline double wbal_wb1(const WbalModel &m, double p_work) {
  if (!(p_work > m.athlete().cp))
    throw SustainableIntensity(p_work, INFINITY);
  return m.exact_time_to_exhaustion(m.athlete().w_prime, p_work);
}

} // namespace detail

/**
 * @brief Recovery ratio (percent) of the WB1 -> RB -> WB2 protocol.
 * @throws SustainableIntensity if p_work does not exhaust the model.
 */
template <class M>
double recovery_ratio(M model, double p_work, double p_rec, double t_rec,
                      double dt = default_dt, double t_max = default_t_max) {
  detail::check_recovery_args(p_work, p_rec, t_rec, dt);
  if constexpr (std::is_same_v<M, WbalModel>) {
    const double tte1 = detail::wbal_wb1(model, p_work);
    const double balance = model.exact_advance(0.0, p_rec, t_rec);
    return model.exact_time_to_exhaustion(balance, p_work) / tte1 * 100.0;
  } else if constexpr (std::is_same_v<M, ModelHandle>) {
    return std::visit(
        [&](auto &m) { return recovery_ratio(m, p_work, p_rec, t_rec, dt, t_max); },
        model);
  } else {
    static_assert(SimulatedModel<M>);
    model.reset();
    const double tte1 = detail::run_to_exhaustion(model, p_work, dt, t_max);
    detail::run_for(model, p_rec, detail::step_count(t_rec, dt), dt);
    const double tte2 = detail::run_to_exhaustion(model, p_work, dt, t_max);
    return tte2 / tte1 * 100.0;
  }
}

/**
 * @brief recovery_ratio over a grid of recovery durations.
 *
 * WB1 runs once. For simulated models the recovery bout is extended
 * incrementally along the sorted grid; results are returned in grid order.
 */
template <class M>
std::vector<double> recovery_curve(M model, double p_work, double p_rec,
                                   std::span<const double> t_rec_grid,
                                   double dt = default_dt,
                                   double t_max = default_t_max) {
  std::vector<double> out(t_rec_grid.size());
  if (t_rec_grid.empty())
    return out;
  for (double t : t_rec_grid)
    detail::check_recovery_args(p_work, p_rec, t, dt);

  if constexpr (std::is_same_v<M, WbalModel>) {
    const double tte1 = detail::wbal_wb1(model, p_work);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double balance = model.exact_advance(0.0, p_rec, t_rec_grid[i]);
      out[i] = model.exact_time_to_exhaustion(balance, p_work) / tte1 * 100.0;
    }
  } else if constexpr (std::is_same_v<M, ModelHandle>) {
    return std::visit(
        [&](auto &m) { return recovery_curve(m, p_work, p_rec, t_rec_grid, dt, t_max); },
        model);
  } else {
    static_assert(SimulatedModel<M>);
    std::vector<std::size_t> order(out.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return t_rec_grid[a] < t_rec_grid[b];
    });
    model.reset();
    const double tte1 = detail::run_to_exhaustion(model, p_work, dt, t_max);
    long long done = 0;
    for (std::size_t idx : order) {
      const long long target = detail::step_count(t_rec_grid[idx], dt);
      detail::run_for(model, p_rec, target - done, dt);
      done = target;
      M wb2 = model;
      out[idx] = detail::run_to_exhaustion(wb2, p_work, dt, t_max) / tte1 * 100.0;
    }
  }
  return out;
}

/**
 * @brief Elapsed time to first exhaustion while alternating work_dur at
 * p_work with rec_dur at p_rec.
 * @throws SustainableIntensity when t_max passes without exhaustion.
 */
template <class M>
double intermittent_tte(M model, double p_work, double p_rec, double work_dur,
                        double rec_dur, double dt = default_dt,
                        double t_max = default_t_max) {
  if (!(work_dur > 0.0) || !(rec_dur >= 0.0))
    throw DataError("work_dur must be > 0 and rec_dur >= 0");
  if (!(dt > 0.0))
    throw DataError("dt must be > 0");

  if constexpr (std::is_same_v<M, WbalModel>) {
    const double cp = model.athlete().cp;
    double balance = model.athlete().w_prime;
    double t = 0.0;
    const auto bout = [&](double power, double duration) -> bool {
      if (power > cp && balance <= (power - cp) * duration) {
        t += balance / (power - cp);
        return true;
      }
      balance = model.exact_advance(balance, power, duration);
      t += duration;
      return false;
    };
    while (t < t_max) {
      if (bout(p_work, work_dur) || (rec_dur > 0.0 && bout(p_rec, rec_dur)))
        return t;
    }
    throw SustainableIntensity(p_work, t_max);
  } else if constexpr (std::is_same_v<M, ModelHandle>) {
    return std::visit(
        [&](auto &m) {
          return intermittent_tte(m, p_work, p_rec, work_dur, rec_dur, dt, t_max);
        },
        model);
  } else {
    static_assert(SimulatedModel<M>);
    model.reset();
    const long long work_steps = detail::step_count(work_dur, dt);
    const long long rec_steps = detail::step_count(rec_dur, dt);
    const long long limit = detail::step_count(t_max, dt);
    long long i = 0;
    while (i < limit) {
      for (long long k = 0; k < work_steps + rec_steps && i < limit; ++k, ++i) {
        const double p = k < work_steps ? p_work : p_rec;
        const StepOutcome out = model.step(p, dt);
        if (out.exhausted)
          return (static_cast<double>(i) + out.fraction) * dt;
      }
    }
    throw SustainableIntensity(p_work, t_max);
  }
}

} // namespace permod

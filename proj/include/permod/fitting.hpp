#pragma once

/**
 * @file fitting.hpp
 * @brief Recovery time-constant fits and evolutionary hydraulic fitting.
 *
 *   fit_constant_tau     one trial -> constant τ (BFGS from 200 s)
 *   fit_exponential_tau  (D_CP, τ) pairs -> τ = a·exp(b·D_CP) + c (LM)
 *   fit_chidnok_tau      intermittent TTE -> constant τ (Brent on [100, 1000])
 *   fit_hydraulic        (CP, W') -> HydraulicConfig (best of seeded ES runs)
 */

#include "permod/athlete.hpp"
#include "permod/datasets.hpp"
#include "permod/error.hpp"
#include "permod/hydraulic.hpp"
#include "permod/optim/bfgs.hpp"
#include "permod/optim/brent.hpp"
#include "permod/optim/evolution.hpp"
#include "permod/optim/levenberg_marquardt.hpp"
#include "permod/protocol.hpp"
#include "permod/wbal.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <utility>
#include <vector>

namespace permod {

// ---------------------------------------------------------------------------
// Constant τ per observation

inline constexpr double tau_cap = 1e6;

struct ConstantTauFit {
  double tau = 0.0;
  double objective = 0.0; ///< squared ratio error, pp^2
  int iterations = 0;
  int evaluations = 0;
  bool saturated = false; ///< τ hit tau_cap (observation implies no recovery)
};

/**
 * @brief Constant τ whose W'bal recovery ratio best matches trial.observed_ratio.
 *
 * Squared error is minimized by BFGS over ln τ from 200 s, with steps capped
 * at one unit of ln τ. The W'bal protocol is exact, so no time step is involved.
 * @throws DomainError if p_rec >= cp; FitError if BFGS does not converge.
 */
inline ConstantTauFit fit_constant_tau(const AthleteCapacity &athlete,
                                       const RecoveryTrial &trial,
                                       double initial = 200.0) {
  athlete.validate();
  if (!(trial.p_rec < athlete.cp))
    throw DomainError("constant tau fit needs p_rec below cp");
  if (!(trial.p_work > athlete.cp))
    throw SustainableIntensity(trial.p_work, INFINITY);
  if (!(initial > 0.0))
    throw DataError("initial tau must be > 0");
  if (trial.observed_ratio <= 0.0 || trial.t_rec <= 0.0)
    return {tau_cap, 0.0, 0, 0, true};

  const double log_cap = std::log(tau_cap);
  const auto objective = [&](const std::vector<double> &x) {
    const double tau = std::exp(std::min(x[0], log_cap));
    const double e = recovery_ratio(WbalModel(athlete, TauFunction::constant(tau)),
                                    trial.p_work, trial.p_rec, trial.t_rec) -
                     trial.observed_ratio;
    return e * e;
  };
  optim::BfgsOptions bo;
  bo.max_step = 1.0;
  const auto res = optim::bfgs(objective, {std::log(initial)}, bo);
  ConstantTauFit out{std::exp(std::min(res.x[0], log_cap)), res.fx, res.iterations,
                     res.evaluations, false};
  if (res.x[0] >= log_cap) {
    out.tau = tau_cap;
    out.saturated = true;
    return out;
  }
  if (!res.converged)
    throw FitError("constant tau fit did not converge", {out.tau});
  return out;
}

// ---------------------------------------------------------------------------
// Exponential τ regression

struct TauPair {
  double d_cp = 0.0;
  double tau = 0.0;
  double weight = 1.0;
};

struct ExponentialTauFit {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double r_squared = 0.0;
  double cost = 0.0; ///< weighted sum of squared residuals
  int evaluations = 0;
  bool converged = false;
  /// Fewer distinct D_CP values than parameters: (a, b, c) is not
  /// identifiable and the returned point depends on the start.
  bool rank_deficient = false;
  std::size_t distinct_d_cp = 0;

  TauFunction tau_function() const { return TauFunction::exponential(a, b, c); }
};

/**
 * @brief Least-squares fit of τ = a·exp(b·D_CP) + c.
 *
 * R² is 1 - SS_res / SS_tot with weighted sums. A rank-deficient design is
 * reported through the result, not thrown.
 * @throws DataError for fewer than 3 pairs; FitError on non-convergence.
 */
inline ExponentialTauFit fit_exponential_tau(std::span<const TauPair> pairs,
                                             std::array<double, 3> initial = {546.0, -0.01, 316.0}) {
  if (pairs.size() < 3)
    throw DataError("exponential tau fit needs at least 3 pairs");
  for (const auto &p : pairs)
    if (!(p.weight > 0.0) || !std::isfinite(p.tau) || !std::isfinite(p.d_cp))
      throw DataError("exponential tau fit: invalid pair");

  const auto residuals = [&](const std::vector<double> &x) {
    std::vector<double> r(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i)
      r[i] = std::sqrt(pairs[i].weight) *
             (x[0] * std::exp(x[1] * pairs[i].d_cp) + x[2] - pairs[i].tau);
    return r;
  };
  const auto res = optim::levenberg_marquardt(
      residuals, std::vector<double>(initial.begin(), initial.end()));

  ExponentialTauFit out;
  out.a = res.x[0];
  out.b = res.x[1];
  out.c = res.x[2];
  out.cost = res.cost;
  out.evaluations = res.evaluations;
  out.converged = res.converged;
  std::set<double> distinct;
  double wsum = 0.0, wmean = 0.0;
  for (const auto &p : pairs) {
    distinct.insert(p.d_cp);
    wsum += p.weight;
    wmean += p.weight * p.tau;
  }
  wmean /= wsum;
  double ss_tot = 0.0;
  for (const auto &p : pairs)
    ss_tot += p.weight * (p.tau - wmean) * (p.tau - wmean);
  out.r_squared = ss_tot > 0.0 ? 1.0 - res.cost / ss_tot : 1.0;
  out.distinct_d_cp = distinct.size();
  out.rank_deficient = distinct.size() < 3;
  if (!res.converged || !std::isfinite(res.cost))
    throw FitError("exponential tau fit did not converge", res.x);
  return out;
}

inline ExponentialTauFit fit_exponential_tau(const std::vector<TauPair> &pairs,
                                             std::array<double, 3> initial = {546.0, -0.01, 316.0}) {
  return fit_exponential_tau(std::span<const TauPair>(pairs), initial);
}

/// Constant-τ fit per trial, paired with D_CP = cp - p_rec.
inline std::vector<TauPair> tau_pairs(const StudyDataset &ds) {
  std::vector<TauPair> out;
  for (const auto &t : ds.trials) {
    const auto fit = fit_constant_tau(ds.athlete, t);
    out.push_back({ds.athlete.cp - t.p_rec, fit.tau, 1.0});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Intermittent-protocol τ

struct ChidnokTauFit {
  double tau = 0.0;
  double tte = 0.0;       ///< intermittent TTE at the fitted τ
  double objective = 0.0; ///< |tte - observed|
  int evaluations = 0;
  bool at_bracket_edge = false;
};

struct IntermittentProtocol {
  double work_dur = 60.0;
  double rec_dur = 30.0;
  double tau_lo = 100.0;
  double tau_hi = 1000.0;
};

/**
 * @brief Constant τ minimizing |intermittent_tte(τ) - observed_tte|.
 * @throws DomainError when p_rec >= cp (no recovery can occur).
 */
inline ChidnokTauFit fit_chidnok_tau(const AthleteCapacity &athlete, double p_work,
                                     double p_rec, double observed_tte,
                                     const IntermittentProtocol &protocol = {}) {
  athlete.validate();
  if (!(observed_tte > 0.0))
    throw DataError("observed TTE must be > 0");
  if (!(p_rec < athlete.cp))
    throw DomainError("recovery power " + std::to_string(p_rec) +
                      " W is not below cp: no recovery occurs");
  if (!(p_work > athlete.cp))
    throw SustainableIntensity(p_work, INFINITY);

  // Short τ can recover enough per rest bout that the athlete never exhausts.
  constexpr double t_limit = 1e6;
  const auto tte = [&](double tau) {
    try {
      return intermittent_tte(WbalModel(athlete, TauFunction::constant(tau)), p_work,
                              p_rec, protocol.work_dur, protocol.rec_dur, default_dt,
                              t_limit);
    } catch (const SustainableIntensity &) {
      return t_limit; // finite, keeps the parabolic steps well defined
    }
  };
  const auto res = optim::brent_bounded(
      [&](double tau) { return std::abs(tte(tau) - observed_tte); }, protocol.tau_lo,
      protocol.tau_hi);
  ChidnokTauFit out;
  out.tau = res.x;
  out.tte = tte(res.x);
  out.objective = res.fx;
  out.evaluations = res.evaluations;
  const double edge_tol = 1e-3 * (protocol.tau_hi - protocol.tau_lo);
  out.at_bracket_edge =
      res.x - protocol.tau_lo < edge_tol || protocol.tau_hi - res.x < edge_tol;
  return out;
}

// ---------------------------------------------------------------------------
// Hydraulic configuration fitting

/// Target TTEs (s) whose critical-power-curve powers form the expenditure part of the objective.
inline constexpr std::array<double, 4> tte_grid{100.0, 240.0, 480.0, 720.0};

/**
 * @brief Re-expresses trials recorded for `from` in terms of athlete `to`.
 *
 * p_work keeps its predicted TTE; p_rec keeps its fraction of CP.
 */
inline std::vector<RecoveryTrial> rescale_trials(const std::vector<RecoveryTrial> &trials,
                                                 const AthleteCapacity &from,
                                                 const AthleteCapacity &to) {
  std::vector<RecoveryTrial> out;
  for (const auto &t : trials) {
    RecoveryTrial r = t;
    r.p_work = to.power_for_tte(cp_tte(from, t.p_work));
    r.p_rec = t.p_rec / from.cp * to.cp;
    out.push_back(r);
  }
  return out;
}

/// The shared recovery targets, expressed for `athlete`.
inline std::vector<RecoveryTrial> default_recovery_targets(const AthleteCapacity &athlete) {
  const auto ref = builtin_dataset("weigend");
  return rescale_trials(ref.trials, ref.athlete, athlete);
}

/// Unit-box parameterization of HydraulicConfig relative to (CP, W').
class HydraulicSearchSpace {
public:
  static constexpr std::size_t dim = HydraulicConfig::size;

  explicit HydraulicSearchSpace(const AthleteCapacity &athlete) : athlete_(athlete) {}

  /// Lower/upper bounds per parameter in array order.
  std::array<std::pair<double, double>, dim> bounds() const {
    const double w = athlete_.w_prime, cp = athlete_.cp;
    return {{{0.5 * w, 2.0 * w},
             {0.5 * w, 10.0 * w},
             {0.8 * cp, 1.2 * cp},
             {0.01 * cp, 1.5 * cp},
             {0.001 * cp, 0.5 * cp},
             {0.0, 0.99},
             {0.0, 0.99},
             {0.0, 0.99}}};
  }

  /// May be infeasible (theta + gamma >= 1); check valid().
  HydraulicConfig decode(const std::vector<double> &u) const {
    const auto b = bounds();
    std::array<double, dim> v{};
    for (std::size_t i = 0; i < dim; ++i)
      v[i] = b[i].first + std::clamp(u[i], 0.0, 1.0) * (b[i].second - b[i].first);
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
  }

  std::vector<double> encode(const HydraulicConfig &c) const {
    const auto b = bounds();
    const auto v = c.to_array();
    std::vector<double> u(dim);
    for (std::size_t i = 0; i < dim; ++i)
      u[i] = std::clamp((v[i] - b[i].first) / (b[i].second - b[i].first), 0.0, 1.0);
    return u;
  }

private:
  AthleteCapacity athlete_;
};

struct HydraulicObjectiveTerms {
  double tte_rms_pct = 0.0;      ///< RMS relative TTE error on the grid, percent
  double recovery_rms_pp = 0.0;  ///< RMS recovery-ratio error, percentage points
  double total() const { return tte_rms_pct + recovery_rms_pp; }
};

/**
 * @brief Fit objective: RMS % TTE error against the critical-power curve on tte_grid plus RMS
 * percentage-point error against the recovery targets.
 *
 * Configurations that never exhaust at a grid power score 200% for that
 * point; targets whose WB1 does not exhaust score 100 pp.
 */
class HydraulicObjective {
public:
  static constexpr double infeasible_penalty = 1e3;

  HydraulicObjective(AthleteCapacity athlete, std::vector<RecoveryTrial> targets,
                     double dt = default_dt)
      : athlete_(athlete), targets_(std::move(targets)), dt_(dt) {
    athlete_.validate();
    if (targets_.empty())
      throw DataError("hydraulic fit needs at least one recovery target");
    for (std::size_t i = 0; i < targets_.size(); ++i)
      groups_[{targets_[i].p_work, targets_[i].p_rec}].push_back(i);
  }

  const AthleteCapacity &athlete() const noexcept { return athlete_; }
  const std::vector<RecoveryTrial> &targets() const noexcept { return targets_; }
  double dt() const noexcept { return dt_; }

  HydraulicObjectiveTerms terms(const HydraulicConfig &c) const {
    HydraulicObjectiveTerms t;
    double sq = 0.0;
    for (double target : tte_grid) {
      double e = 200.0;
      try {
        const double sim =
            simulate_tte(c, athlete_.power_for_tte(target), dt_, 3.0 * target);
        e = 100.0 * (sim - target) / target;
      } catch (const SustainableIntensity &) {
      }
      sq += e * e;
    }
    t.tte_rms_pct = std::sqrt(sq / tte_grid.size());

    sq = 0.0;
    for (const auto &[key, idx] : groups_) {
      std::vector<double> grid;
      for (std::size_t i : idx)
        grid.push_back(targets_[i].t_rec);
      std::vector<double> pred;
      try {
        pred = recovery_curve(HydraulicModel(c), key.first, key.second, grid, dt_,
                              3.0 * tte_grid.back());
      } catch (const SustainableIntensity &) {
        pred.assign(grid.size(), INFINITY);
      }
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const double e = std::isfinite(pred[k])
                             ? pred[k] - targets_[idx[k]].observed_ratio
                             : 100.0;
        sq += e * e;
      }
    }
    t.recovery_rms_pp = std::sqrt(sq / targets_.size());
    return t;
  }

  double operator()(const HydraulicConfig &c) const {
    if (!c.valid()) {
      const double excess = std::max(0.0, c.theta + c.gamma - 1.0);
      return infeasible_penalty * (1.0 + excess);
    }
    return terms(c).total();
  }

private:
  AthleteCapacity athlete_;
  std::vector<RecoveryTrial> targets_;
  double dt_;
  std::map<std::pair<double, double>, std::vector<std::size_t>> groups_;
};

struct HydraulicFitOptions {
  std::size_t runs = 10;
  std::uint64_t seed = 0;
  std::size_t evaluations_per_run = 10'000;
  std::size_t mu = 16;
  std::size_t lambda = 32;
  double dt = default_dt;
  unsigned workers = 0;
};

struct HydraulicFitRun {
  std::uint64_t seed = 0;
  HydraulicConfig config;
  double objective = 0.0;
  std::size_t evaluations = 0;
  double wall_seconds = 0.0;
};

struct HydraulicFitResult {
  HydraulicConfig config;
  double objective = 0.0;
  HydraulicObjectiveTerms terms;
  std::size_t best_run = 0;
  std::uint64_t seed = 0;
  std::size_t evaluations = 0;
  double wall_seconds = 0.0;
  std::vector<HydraulicFitRun> runs;
};

/**
 * @brief Best of `runs` independent ES fits. Run i uses seed + i; ties go to
 * the lowest run index.
 * @throws FitError if every run ends infeasible.
 */
inline HydraulicFitResult fit_hydraulic(const AthleteCapacity &athlete,
                                        std::vector<RecoveryTrial> targets,
                                        const HydraulicFitOptions &options = {}) {
  athlete.validate();
  if (options.runs < 1)
    throw DataError("hydraulic fit needs runs >= 1");
  if (targets.empty())
    targets = default_recovery_targets(athlete);
  const HydraulicObjective objective(athlete, std::move(targets), options.dt);
  const HydraulicSearchSpace space(athlete);

  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  HydraulicFitResult out;
  out.seed = options.seed;
  for (std::size_t r = 0; r < options.runs; ++r) {
    const auto r0 = clock::now();
    optim::EsOptions es;
    es.mu = options.mu;
    es.lambda = options.lambda;
    es.max_evaluations = options.evaluations_per_run;
    es.seed = options.seed + r;
    es.workers = options.workers;
    const auto res = optim::evolve(
        [&](const std::vector<double> &u) { return objective(space.decode(u)); },
        HydraulicSearchSpace::dim, es);
    HydraulicFitRun run;
    run.seed = es.seed;
    run.config = space.decode(res.x);
    run.objective = res.fx;
    run.evaluations = res.evaluations;
    run.wall_seconds = std::chrono::duration<double>(clock::now() - r0).count();
    out.evaluations += run.evaluations;
    out.runs.push_back(run);
  }
  std::size_t best = 0;
  for (std::size_t r = 1; r < out.runs.size(); ++r)
    if (out.runs[r].objective < out.runs[best].objective)
      best = r;
  if (!out.runs[best].config.valid() ||
      out.runs[best].objective >= HydraulicObjective::infeasible_penalty) {
    const auto a = out.runs[best].config.to_array();
    throw FitError("all hydraulic fit runs ended infeasible",
                   std::vector<double>(a.begin(), a.end()));
  }
  out.best_run = best;
  out.config = out.runs[best].config;
  out.objective = out.runs[best].objective;
  out.terms = objective.terms(out.config);
  out.wall_seconds = std::chrono::duration<double>(clock::now() - t0).count();
  return out;
}

} // namespace permod

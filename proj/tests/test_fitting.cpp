#include "permod/fitting.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace permod;

namespace {
const AthleteCapacity weigend{248, 18200};
const AthleteCapacity chidnok{241, 21100};
} // namespace

TEST(Brent, FindsInteriorMinimum) {
  const auto r = optim::brent_bounded([](double x) { return (x - 2) * (x - 2) + 1; }, 0, 5);
  EXPECT_NEAR(r.x, 2.0, 1e-5);
  EXPECT_TRUE(r.converged);
}

TEST(Brent, ReportsEdgeMinimum) {
  const auto r = optim::brent_bounded([](double x) { return x; }, 1, 3);
  EXPECT_NEAR(r.x, 1.0, 1e-4);
}

TEST(Bfgs, Rosenbrock) {
  const auto r = optim::bfgs(
      [](const std::vector<double> &x) {
        return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2);
      },
      {-1.2, 1.0}, {1e-6, 500, 1e-6});
  EXPECT_NEAR(r.x[0], 1.0, 1e-3);
  EXPECT_NEAR(r.x[1], 1.0, 2e-3);
}

TEST(LevenbergMarquardt, LinearProblemExact) {
  const auto r = optim::levenberg_marquardt(
      [](const std::vector<double> &x) {
        std::vector<double> res;
        for (double t : {0.0, 1.0, 2.0, 3.0})
          res.push_back(x[0] + x[1] * t - (1 + 2 * t));
        return res;
      },
      {0.0, 0.0});
  EXPECT_NEAR(r.x[0], 1.0, 1e-6);
  EXPECT_NEAR(r.x[1], 2.0, 1e-6);
  EXPECT_TRUE(r.converged);
}

TEST(Evolution, SeededAndThreadIndependent) {
  const auto sphere = [](const std::vector<double> &x) {
    double s = 0;
    for (double v : x)
      s += (v - 0.3) * (v - 0.3);
    return s;
  };
  optim::EsOptions o;
  o.max_evaluations = 3000;
  o.seed = 11;
  o.workers = 1;
  const auto a = optim::evolve(sphere, 4, o);
  o.workers = 3;
  const auto b = optim::evolve(sphere, 4, o);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.fx, b.fx);
  EXPECT_EQ(a.evaluations, 3000u);
  EXPECT_LT(a.fx, 1e-6);
  o.seed = 12;
  EXPECT_NE(optim::evolve(sphere, 4, o).x, a.x);
}

TEST(FitConstantTau, SelfConsistent) {
  const RecoveryTrial probe{323, 100, 240, 0, std::nullopt};
  const double r = recovery_ratio(WbalModel(weigend, TauFunction::constant(300)), probe.p_work,
                                  probe.p_rec, probe.t_rec);
  RecoveryTrial t = probe;
  t.observed_ratio = r;
  const auto fit = fit_constant_tau(weigend, t);
  EXPECT_NEAR(fit.tau, 300, 0.5);
  EXPECT_FALSE(fit.saturated);
}

TEST(FitConstantTau, ZeroObservationSaturates) {
  const auto fit = fit_constant_tau(weigend, {323, 100, 240, 0.0, std::nullopt});
  EXPECT_TRUE(fit.saturated);
  EXPECT_EQ(fit.tau, tau_cap);
}

TEST(FitConstantTau, MonotoneInObservation) {
  double prev = INFINITY;
  for (double obs : {5.0, 10.0, 30.0, 50.0, 70.0, 90.0, 99.0}) {
    const double tau = fit_constant_tau(weigend, {323, 100, 240, obs, std::nullopt}).tau;
    EXPECT_LT(tau, prev);
    prev = tau;
  }
}

TEST(FitConstantTau, RejectsRecoveryAtOrAboveCp) {
  EXPECT_THROW(fit_constant_tau(weigend, {323, 248, 240, 20, std::nullopt}), DomainError);
}

// W'bal ratios are exact, so the fit must match -t / ln(1 - r).
TEST(FitConstantTau, WeigendPairs) {
  const auto pairs = tau_pairs(builtin_dataset("weigend"));
  const double d[] = {167, 167, 167, 85, 85, 85, 167, 167, 167, 85, 85, 85};
  const double tau[] = {150.2803, 254.8830, 294.8934, 178.2149, 300.5607, 414.9853,
                        220.2938, 326.9892, 398.2882, 251.0272, 510.6344, 519.3702};
  ASSERT_EQ(pairs.size(), 12u);
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_EQ(pairs[i].d_cp, d[i]);
    const auto &t = builtin_dataset("weigend").trials[i];
    const double closed = -t.t_rec / std::log(1.0 - t.observed_ratio / 100.0);
    EXPECT_NEAR(pairs[i].tau, closed, 1e-6 * closed) << i;
    EXPECT_NEAR(pairs[i].tau, tau[i], 1e-2) << i;
  }
}

TEST(FitExponentialTau, NoiselessRecovery) {
  std::vector<TauPair> pairs;
  for (double d = 0; d <= 200; d += 20)
    pairs.push_back({d, 1000 * std::exp(-0.02 * d) + 300, 1.0});
  const auto f = fit_exponential_tau(pairs);
  EXPECT_NEAR(f.a, 1000, 1.0);
  EXPECT_NEAR(f.b, -0.02, 2e-5);
  EXPECT_NEAR(f.c, 300, 0.3);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-9);
  EXPECT_FALSE(f.rank_deficient);
}

TEST(FitExponentialTau, DuplicateEqualsWeight) {
  std::vector<TauPair> base{{10, 900, 1}, {50, 600, 1}, {90, 480, 1}, {150, 390, 1}, {200, 370, 1}};
  auto dup = base;
  dup.push_back(base[1]);
  auto weighted = base;
  weighted[1].weight = 2;
  const auto a = fit_exponential_tau(dup);
  const auto b = fit_exponential_tau(weighted);
  EXPECT_NEAR(a.a, b.a, 1e-6 * std::abs(b.a));
  EXPECT_NEAR(a.b, b.b, 1e-6 * std::abs(b.b));
  EXPECT_NEAR(a.c, b.c, 1e-6 * std::abs(b.c));
  EXPECT_NEAR(a.cost, b.cost, 1e-6);
}

TEST(FitExponentialTau, WeigendPairsAreRankDeficient) {
  const auto f = fit_exponential_tau(tau_pairs(builtin_dataset("weigend")));
  EXPECT_TRUE(f.rank_deficient);
  EXPECT_EQ(f.distinct_d_cp, 2u);
  // Any curve through both group means is optimal.
  EXPECT_NEAR(f.r_squared, 0.1457, 1e-3);
  EXPECT_NEAR(f.a * std::exp(f.b * 85) + f.c, 362.4621, 1e-2);
  EXPECT_NEAR(f.a * std::exp(f.b * 167) + f.c, 274.2713, 1e-2);
}

TEST(FitExponentialTau, NeedsThreePairs) {
  EXPECT_THROW(fit_exponential_tau(std::vector<TauPair>{{1, 2, 1}, {2, 3, 1}}), DataError);
}

TEST(FitChidnokTau, ObservedTimes) {
  EXPECT_NEAR(fit_chidnok_tau(chidnok, 329, 20, 1224).tau, 107.457, 0.01);
  EXPECT_NEAR(fit_chidnok_tau(chidnok, 329, 95, 759).tau, 124.812, 0.01);
  EXPECT_NEAR(fit_chidnok_tau(chidnok, 329, 173, 557).tau, 165.186, 0.01);
}

TEST(FitChidnokTau, SevereConditionRejected) {
  EXPECT_THROW(fit_chidnok_tau(chidnok, 329, 270, 329), DomainError);
}

TEST(FitChidnokTau, BracketEdgeFlagged) {
  EXPECT_TRUE(fit_chidnok_tau(chidnok, 329, 20, 200).at_bracket_edge);
  EXPECT_FALSE(fit_chidnok_tau(chidnok, 329, 20, 1224).at_bracket_edge);
}

TEST(RecoveryTargets, RescaledByTteAndCpFraction) {
  const auto same = default_recovery_targets(weigend);
  const auto ref = builtin_dataset("weigend").trials;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    EXPECT_NEAR(same[i].p_work, ref[i].p_work, 1e-9);
    EXPECT_NEAR(same[i].p_rec, ref[i].p_rec, 1e-9);
  }
  const AthleteCapacity other{300, 24000};
  const auto t = default_recovery_targets(other);
  EXPECT_NEAR(cp_tte(other, t[0].p_work), cp_tte(weigend, 323), 1e-9);
  EXPECT_NEAR(t[0].p_rec / other.cp, 81.0 / 248.0, 1e-12);
}

TEST(HydraulicObjective, PublishedCaenTerms) {
  const auto ds = builtin_dataset("caen");
  const HydraulicObjective obj(ds.athlete, default_recovery_targets(ds.athlete));
  const auto t = obj.terms(*ds.fitted_hydraulic);
  EXPECT_NEAR(t.tte_rms_pct, 10.2851, 1e-3);
  EXPECT_NEAR(t.recovery_rms_pp, 3.0658, 1e-3);
  EXPECT_GE(obj(HydraulicConfig{1, 1, 1, 1, 1, 0.7, 0.5, 0.1}),
            HydraulicObjective::infeasible_penalty);
}

TEST(HydraulicSearchSpace, EncodeDecode) {
  const AthleteCapacity a{269, 19200};
  const HydraulicSearchSpace s(a);
  const auto c = *builtin_dataset("caen").fitted_hydraulic;
  const auto back = s.decode(s.encode(c));
  const auto x = c.to_array(), y = back.to_array();
  for (std::size_t i = 0; i < x.size(); ++i)
    EXPECT_NEAR(x[i], y[i], 1e-9 * std::max(1.0, std::abs(x[i])));
}

TEST(FitHydraulic, SeededRunsAreReproducible) {
  HydraulicFitOptions o;
  o.runs = 2;
  o.evaluations_per_run = 160;
  o.seed = 5;
  o.workers = 1;
  const AthleteCapacity a{269, 19200};
  const auto r1 = fit_hydraulic(a, {}, o);
  o.workers = 2;
  const auto r2 = fit_hydraulic(a, {}, o);
  EXPECT_EQ(r1.config, r2.config);
  EXPECT_EQ(r1.objective, r2.objective);
  EXPECT_TRUE(r1.config.valid());
  ASSERT_EQ(r1.runs.size(), 2u);
  EXPECT_EQ(r1.runs[0].seed, 5u);
  EXPECT_EQ(r1.runs[1].seed, 6u);
  EXPECT_LE(r1.objective, std::min(r1.runs[0].objective, r1.runs[1].objective));
  EXPECT_EQ(r1.evaluations, 320u);
}

TEST(FitHydraulic, RejectsZeroRuns) {
  HydraulicFitOptions o;
  o.runs = 0;
  EXPECT_THROW(fit_hydraulic({269, 19200}, {}, o), DataError);
}

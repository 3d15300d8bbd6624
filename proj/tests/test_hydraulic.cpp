#include "permod/hydraulic.hpp"
#include "permod/protocol.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace permod;

namespace {
const auto bartram_cfg = HydraulicConfig::from_array(
    {23111.91, 65845.28, 391.57, 148.88, 24.15, 0.73, 0.01, 0.24});
const auto caen_cfg = HydraulicConfig::from_array(
    {17631.06, 46246.13, 267.28, 117.50, 20.09, 0.68, 0.01, 0.29});

HydraulicState exhaust(const HydraulicConfig &c, double p) {
  HydraulicState s{};
  while (!s.exhausted)
    s = hydraulic_step(s, c, p, 0.1);
  return s;
}
} // namespace

TEST(HydraulicConfig, ArrayOrderRoundTrip) {
  const auto a = bartram_cfg.to_array();
  EXPECT_DOUBLE_EQ(bartram_cfg.theta, 0.73);
  EXPECT_DOUBLE_EQ(bartram_cfg.gamma, 0.01);
  EXPECT_DOUBLE_EQ(bartram_cfg.phi, 0.24);
  EXPECT_EQ(HydraulicConfig::from_array(a), bartram_cfg);
}

TEST(HydraulicConfig, RejectsDegenerateGeometry) {
  EXPECT_THROW(HydraulicConfig::from_array({1, 1, 1, 1, 1, 0.6, 0.4, 0.2}), DataError);
  EXPECT_THROW(HydraulicConfig::from_array({1, 1, 1, 1, 1, 0.2, 0.2, 1.0}), DataError);
  EXPECT_THROW(HydraulicConfig::from_array({0, 1, 1, 1, 1, 0.2, 0.2, 0.2}), DataError);
  EXPECT_THROW(HydraulicConfig::from_array({1, 1, 1, -1, 1, 0.2, 0.2, 0.2}), DataError);
  EXPECT_THROW(HydraulicModel(HydraulicConfig{1, 1, 1, 1, 1, 0.5, 0.5, 0}), DataError);
}

TEST(HydraulicStep, FullTanksAtRestAreEquilibrium) {
  const auto s = hydraulic_step({}, bartram_cfg, 0.0, 0.1);
  EXPECT_DOUBLE_EQ(s.h, 0.0);
  EXPECT_DOUBLE_EQ(s.g, 0.0);
  EXPECT_FALSE(s.exhausted);
}

// Values from an independent float reimplementation of the same dynamics.
TEST(SimulateTte, MatchesOracle) {
  EXPECT_NEAR(simulate_tte(bartram_cfg, 626), 81.225587, 1e-4);
  EXPECT_NEAR(simulate_tte(bartram_cfg, 500), 200.028177, 1e-4);
  EXPECT_NEAR(simulate_tte(bartram_cfg, 400.5), 2635.238621, 1e-3);
  EXPECT_NEAR(simulate_tte(caen_cfg, 349), 224.607534, 1e-4);
}

TEST(SimulateTte, StrictlyDecreasingInPower) {
  EXPECT_GT(simulate_tte(bartram_cfg, 400.5), simulate_tte(bartram_cfg, 500));
  EXPECT_GT(simulate_tte(bartram_cfg, 500), simulate_tte(bartram_cfg, 626));
}

TEST(SimulateTte, SustainableIntensity) {
  EXPECT_THROW(simulate_tte(bartram_cfg, 0.95 * bartram_cfg.m_ae), SustainableIntensity);
  EXPECT_THROW(simulate_tte(bartram_cfg, 0.0), SustainableIntensity);
}

TEST(HydraulicStep, LongRestRefillsBothTanks) {
  auto s = exhaust(bartram_cfg, 626);
  EXPECT_TRUE(s.exhausted);
  for (int i = 0; i < 600000; ++i)
    s = hydraulic_step(s, bartram_cfg, 0.0, 0.1);
  EXPECT_LT(s.h, 1e-6);
  EXPECT_LT(s.g, 1e-6);
}

TEST(HydraulicStep, StoredLiquidNeverDecreasesAtRest) {
  auto s = exhaust(caen_cfg, 349);
  double prev = caen_cfg.stored(s.h, s.g);
  for (int i = 0; i < 50000; ++i) {
    s = hydraulic_step(s, caen_cfg, 0.0, 0.1);
    const double now = caen_cfg.stored(s.h, s.g);
    ASSERT_GE(now, prev - 1e-9) << i;
    prev = now;
  }
}

TEST(HydraulicStep, ConservationAgainstAeInflow) {
  // Tap closed: stored liquid gains exactly the Ae inflow each step while AnF
  // is not overfilled.
  auto s = exhaust(bartram_cfg, 626);
  double inflow = 0.0;
  const double start = bartram_cfg.stored(s.h, s.g);
  for (int i = 0; i < 3000; ++i) {
    const auto r = hydraulic_step_detail(s, bartram_cfg, 0.0, 0.1);
    inflow += r.flows.ae_flow * 0.1;
    s = r.state;
  }
  const double gained = bartram_cfg.stored(s.h, s.g) - start;
  EXPECT_NEAR(gained, inflow, bartram_cfg.m_ae * 0.1);
}

TEST(HydraulicStep, ConservationWithOpenTap) {
  HydraulicState s{};
  double net = 0.0;
  for (int i = 0; i < 400; ++i) {
    const auto r = hydraulic_step_detail(s, caen_cfg, 300, 0.1);
    net += (r.flows.ae_flow - 300) * 0.1;
    s = r.state;
  }
  EXPECT_NEAR(caen_cfg.stored(s.h, s.g) - caen_cfg.stored(0, 0), net, 1e-6);
}

TEST(HydraulicStep, FlowCapsAndStateRanges) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> power(0, 900);
  for (const auto &cfg : {bartram_cfg, caen_cfg}) {
    HydraulicState s{};
    for (int i = 0; i < 20000; ++i) {
      const double p = (i / 300) % 2 ? power(rng) : 0.0;
      const auto r = hydraulic_step_detail(s, cfg, p, 0.1);
      EXPECT_LE(r.flows.ae_flow, cfg.m_ae + 1e-12);
      EXPECT_GE(r.flows.ae_flow, 0.0);
      EXPECT_LE(r.flows.ans_flow, cfg.m_ans + 1e-12);
      EXPECT_GE(r.flows.ans_flow, -cfg.m_anf - 1e-12);
      EXPECT_GE(r.state.h, 0.0);
      EXPECT_LE(r.state.h, 1.0);
      EXPECT_GE(r.state.g, 0.0);
      EXPECT_LE(r.state.g, cfg.ans_height() + 1e-15);
      s = r.state;
    }
  }
}

TEST(HydraulicStep, AeInflowIncreasesWithDepletion) {
  double prev = -1.0;
  for (double h = 0.0; h < 1.0 - bartram_cfg.phi; h += 0.01) {
    const auto r = hydraulic_step_detail({h, 0.0, 0.0, false}, bartram_cfg, 0.0, 0.1);
    EXPECT_GT(r.flows.ae_flow, prev);
    prev = r.flows.ae_flow;
  }
  const auto capped = hydraulic_step_detail({0.9, 0.0, 0.0, false}, bartram_cfg, 0.0, 0.1);
  EXPECT_DOUBLE_EQ(capped.flows.ae_flow, bartram_cfg.m_ae);
}

TEST(HydraulicStep, PartialFinalStepFraction) {
  HydraulicState s{};
  HydraulicStepResult r;
  int steps = 0;
  do {
    r = hydraulic_step_detail(s, bartram_cfg, 626, 0.1);
    s = r.state;
    ++steps;
  } while (!r.state.exhausted);
  EXPECT_GT(r.fraction, 0.0);
  EXPECT_LE(r.fraction, 1.0);
  EXPECT_NEAR((steps - 1 + r.fraction) * 0.1, simulate_tte(bartram_cfg, 626), 1e-12);
}

TEST(HydraulicModel, ResetRestoresFullState) {
  HydraulicModel m(caen_cfg);
  for (int i = 0; i < 100; ++i)
    m.step(500, 0.1);
  EXPECT_GT(m.state().h, 0.0);
  m.reset();
  EXPECT_DOUBLE_EQ(m.state().h, 0.0);
  EXPECT_DOUBLE_EQ(m.state().g, 0.0);
  EXPECT_FALSE(m.exhausted());
}

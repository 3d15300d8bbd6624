#include "permod/stats.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <vector>

using namespace permod;

namespace {

// Residuals (predicted - observed, pp) from the printed prediction columns,
// ordered bartram, caen, chidnok, ferguson, weigend.
const std::vector<double> bart{-0.6, 13.4, 29.0, 35.6, 37.7, 39.5, 26.2,
                               28.7, 25.0, 11.9, -3.1, 48.8, 34.7, 14.0};
const std::vector<double> hyd_a{-1.7, 6.4, 5.6, 2.3, -0.4, -0.5, -8.8,
                                2.5, 24.0, 9.5, -3.9, 17.2, 4.4, 12.4};
const std::vector<double> skib{0.0,  -20.9, -24.2, -24.9, -23.7, -13.1, -6.1,
                               4.9,  13.2,  19.0,  24.7,  22.9,  28.1,  10.4,
                               -2.6, -15.2, 28.6,  30.9,  14.0};
const std::vector<double> weig{0.0,   -22.4, -30.1, -37.6, -44.0, -19.4, -17.3,
                               -12.3, -6.7,  -1.5,  5.0,   11.7,  23.1,  -6.0,
                               -11.3, -17.6, -1.1,  8.6,   10.4};
const std::vector<double> weig_extra{-19.5, -2.7, 2.6, -20.6, -6.3, 5.3,
                                     -6.5,  6.3,  13.6, -9.6, 11.2, 13.3};
const std::vector<double> hyd_extra{3.3, 4.0, -0.4, -2.5, -3.5, -3.8,
                                    4.8, 2.0, 0.9,  0.5,  6.1,  -2.6};

std::vector<double> join(std::vector<double> a, const std::vector<double> &b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

const std::vector<double> hyd_b = join({22.7, 0.9, -2.2, -4.3, -4.7}, hyd_a);

double p_value(const std::vector<double> &a, const std::vector<double> &b,
               BootstrapStatistic s, std::size_t n = 200'000, std::uint64_t seed = 1) {
  BootstrapOptions o;
  o.samples = n;
  o.seed = seed;
  return bootstrap_test(a, b, s, o);
}

} // namespace

TEST(ErrorMetrics, SummaryTableValues) {
  struct Row {
    const std::vector<double> *e;
    double mae, sd, rmse;
  };
  const Row rows[] = {{&bart, 24.871, 14.351, 28.458},
                      {&hyd_a, 7.114, 6.830, 9.692},
                      {&skib, 17.232, 9.338, 19.482},
                      {&weig, 15.058, 12.192, 19.172},
                      {&hyd_b, 7.074, 7.172, 9.938}};
  for (const auto &r : rows) {
    EXPECT_NEAR(mae(*r.e), r.mae, 5e-4);
    EXPECT_NEAR(sd_abs(*r.e), r.sd, 5e-4);
    EXPECT_NEAR(rmse(*r.e), r.rmse, 5e-4);
  }
}

TEST(ErrorMetrics, AiccOverAllRows) {
  const std::vector<double> weig_all = join(weig, weig_extra);
  const std::vector<double> hyd_all = join(hyd_b, hyd_extra);
  EXPECT_EQ(weig_all.size(), 31u);
  EXPECT_NEAR(aicc(weig_all, 3), 181.033, 5e-3);
  EXPECT_NEAR(aicc(hyd_all, 8), 151.853, 5e-3);
}

TEST(ErrorMetrics, SmallCases) {
  const std::vector<double> ones(10, 1.0);
  EXPECT_DOUBLE_EQ(aicc(ones, 0), 0.0);
  EXPECT_DOUBLE_EQ(mse(std::vector<double>{3, -4}), 12.5);
  EXPECT_DOUBLE_EQ(mae(std::vector<double>{3, -4}), 3.5);
  EXPECT_DOUBLE_EQ(sd_abs(std::vector<double>{5}), 0.0);
  EXPECT_THROW(mae(std::vector<double>{}), DataError);
  EXPECT_THROW(aicc(std::vector<double>(9, 1.0), 8), DataError);
  EXPECT_NO_THROW(aicc(std::vector<double>(10, 1.0), 8));
}

TEST(ErrorMetrics, Properties) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0, 10);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> e(3 + trial % 20);
    for (auto &x : e)
      x = n(rng);
    EXPECT_GE(rmse(e) + 1e-12, mae(e));
    EXPECT_LT(aicc(e, 0), aicc(e, 1));
  }
}

TEST(ErrorVector, TracksOrigin) {
  ErrorVector e;
  e.add(1.5, "caen", 3);
  ErrorVector f;
  f.add(-2.0, "weigend", 0);
  e.append(f);
  ASSERT_EQ(e.size(), 2u);
  EXPECT_EQ(e.values(), (std::vector<double>{1.5, -2.0}));
  EXPECT_DOUBLE_EQ(mae(e), 1.75);
}

TEST(Bootstrap, SummaryPValues) {
  EXPECT_NEAR(p_value(bart, hyd_a, BootstrapStatistic::delta_mae), 0.00064, 3e-4);
  EXPECT_NEAR(p_value(bart, hyd_a, BootstrapStatistic::delta_rmse), 0.00066, 3e-4);
  EXPECT_NEAR(p_value(skib, hyd_b, BootstrapStatistic::delta_mae), 0.00094, 3e-4);
  EXPECT_NEAR(p_value(skib, hyd_b, BootstrapStatistic::delta_rmse), 0.00135, 3e-4);
  EXPECT_NEAR(p_value(weig, hyd_b, BootstrapStatistic::delta_mae), 0.0198, 1.5e-3);
  EXPECT_NEAR(p_value(weig, hyd_b, BootstrapStatistic::delta_rmse), 0.0301, 1.5e-3);
}

TEST(Bootstrap, IdenticalGroupsGiveOne) {
  EXPECT_DOUBLE_EQ(p_value(skib, skib, BootstrapStatistic::delta_mae, 5000), 1.0);
}

TEST(Bootstrap, SymmetricInGroups) {
  // Swapping groups changes which draws land where, not the null distribution.
  EXPECT_NEAR(p_value(weig, hyd_b, BootstrapStatistic::delta_rmse, 50'000),
              p_value(hyd_b, weig, BootstrapStatistic::delta_rmse, 50'000), 3e-3);
}

TEST(Bootstrap, DeterministicPerSeed) {
  const double a = p_value(weig, hyd_b, BootstrapStatistic::delta_mae, 50'000, 9);
  EXPECT_DOUBLE_EQ(a, p_value(weig, hyd_b, BootstrapStatistic::delta_mae, 50'000, 9));
  EXPECT_NE(a, p_value(weig, hyd_b, BootstrapStatistic::delta_mae, 50'000, 10));
}

TEST(Bootstrap, IndependentOfThreadCount) {
  ::setenv("PERMOD_THREADS", "1", 1);
  const double a = p_value(weig, hyd_b, BootstrapStatistic::delta_mae, 70'000, 4);
  ::setenv("PERMOD_THREADS", "4", 1);
  const double b = p_value(weig, hyd_b, BootstrapStatistic::delta_mae, 70'000, 4);
  ::unsetenv("PERMOD_THREADS");
  EXPECT_DOUBLE_EQ(a, b);
}

TEST(Bootstrap, RejectsEmpty) {
  EXPECT_THROW(p_value({}, bart, BootstrapStatistic::delta_mae), DataError);
  BootstrapOptions o;
  o.samples = 0;
  EXPECT_THROW(bootstrap_test(bart, hyd_a, BootstrapStatistic::delta_mae, o), DataError);
}

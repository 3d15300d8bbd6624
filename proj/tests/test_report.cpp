#include "permod/permod.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace permod;

namespace {

const std::vector<PredictionTable> &tables() {
  static const auto t = [] {
    std::vector<PredictionTable> out;
    for (const auto &ds : builtin_datasets())
      out.push_back(prediction_table(ds));
    return out;
  }();
  return t;
}

const ModelMetrics &metric(const ComparisonSet &s, ModelKind m) {
  for (const auto &x : s.metrics)
    if (x.model == m)
      return x;
  throw std::logic_error("missing metric");
}

} // namespace

TEST(PredictionTable, MatchesPrintedColumns) {
  const auto ds = builtin_datasets();
  for (std::size_t d = 0; d < ds.size(); ++d) {
    const auto &t = tables()[d];
    ASSERT_EQ(t.rows.size(), ds[d].trials.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i)
      for (ModelKind m : all_models) {
        const auto printed = ds[d].published[i][m];
        if (!printed || !t.rows[i][m])
          continue;
        const double tol = m == ModelKind::hydraulic ? 0.7 : 0.1;
        EXPECT_NEAR(*t.rows[i][m], *printed, tol) << ds[d].name << " row " << i << ' '
                                                  << model_name(m);
      }
  }
}

TEST(PredictionTable, EveryModelPredictsEveryRow) {
  for (const auto &t : tables())
    for (const auto &r : t.rows)
      for (ModelKind m : all_models)
        EXPECT_TRUE(r[m].has_value()) << t.dataset;
}

TEST(ErrorSummary, PublishedColumnsReproduceSummary) {
  SummaryOptions o;
  o.use_published = true;
  o.bootstrap_samples = 20'000;
  const auto s = error_summary(builtin_datasets(), tables(), o);
  ASSERT_EQ(s.sets.size(), 2u);
  EXPECT_EQ(s.sets[0].datasets, (std::vector<std::string>{"caen", "chidnok", "ferguson"}));
  EXPECT_EQ(s.sets[1].datasets,
            (std::vector<std::string>{"bartram", "caen", "chidnok", "ferguson"}));
  EXPECT_NEAR(metric(s.sets[0], ModelKind::bart).mae, 24.871, 5e-4);
  EXPECT_NEAR(metric(s.sets[0], ModelKind::hydraulic).mae, 7.114, 5e-4);
  EXPECT_NEAR(metric(s.sets[1], ModelKind::skib).mae, 17.232, 5e-4);
  EXPECT_NEAR(metric(s.sets[1], ModelKind::weig).mae, 15.058, 5e-4);
  EXPECT_NEAR(metric(s.sets[1], ModelKind::hydraulic).rmse, 9.938, 5e-4);
  ASSERT_EQ(s.fit.size(), 2u);
  EXPECT_EQ(s.fit[0].n, 31u);
  EXPECT_NEAR(s.fit[0].aicc, 181.033, 5e-3);
  EXPECT_NEAR(s.fit[1].aicc, 151.853, 5e-3);
  ASSERT_EQ(s.sets[1].tests.size(), 2u);
  EXPECT_EQ(s.sets[1].tests[0].a, ModelKind::skib);
  EXPECT_EQ(s.sets[1].tests[1].b, ModelKind::hydraulic);
}

TEST(ErrorSummary, SimulatedSummary) {
  SummaryOptions o;
  o.bootstrap_samples = 20'000;
  const auto s = error_summary(builtin_datasets(), tables(), o);
  EXPECT_NEAR(metric(s.sets[0], ModelKind::bart).mae, 24.861, 5e-3);
  EXPECT_NEAR(metric(s.sets[0], ModelKind::hydraulic).mae, 7.198, 5e-3);
  EXPECT_NEAR(metric(s.sets[1], ModelKind::skib).mae, 17.237, 5e-3);
  EXPECT_NEAR(metric(s.sets[1], ModelKind::weig).mae, 15.067, 5e-3);
  EXPECT_NEAR(metric(s.sets[1], ModelKind::hydraulic).mae, 7.142, 5e-3);
  EXPECT_NEAR(s.fit[0].aicc, 181.094, 5e-2);
  EXPECT_NEAR(s.fit[1].aicc, 152.574, 5e-2);
  for (const auto &set : s.sets)
    for (const auto &t : set.tests) {
      EXPECT_LT(t.p_mae, 0.05);
      EXPECT_LT(t.p_rmse, 0.05);
    }
}

TEST(ErrorSummary, SummaryCsvLayout) {
  SummaryOptions o;
  o.use_published = true;
  o.bootstrap_samples = 1000;
  std::ostringstream os;
  write_summary_csv(os, error_summary(builtin_datasets(), tables(), o));
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "section,datasets,model,n,mae_pct,sd_pct,rmse_pct,p_mae,p_rmse,k,aicc");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 10) << line;
  }
  EXPECT_EQ(rows, 2 + 3 + 2);
}

TEST(PredictionCsv, HeaderAndRows) {
  std::ostringstream os;
  write_prediction_csv(os, tables()[1]);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, std::string(csv_header) + ",bart_pct,skib_pct,weig_pct,hydraulic_pct");
  std::getline(is, line);
  EXPECT_EQ(line.rfind("caen,269,19200,", 0), 0u);
}

TEST(Report, ParameterCounts) {
  EXPECT_EQ(parameter_count(ModelKind::bart), 0);
  EXPECT_EQ(parameter_count(ModelKind::skib), 0);
  EXPECT_EQ(parameter_count(ModelKind::weig), 3);
  EXPECT_EQ(parameter_count(ModelKind::hydraulic), 8);
  StudyDataset ds = builtin_dataset("caen");
  ds.fitted_hydraulic.reset();
  EXPECT_FALSE(model_for(ds, ModelKind::hydraulic).has_value());
  EXPECT_THROW(tau_for(ModelKind::hydraulic), DataError);
}

TEST(Report, UmbrellaHeaderUsage) {
  const auto ds = builtin_dataset("caen");
  const WbalModel skib(ds.athlete, TauFunction::skib());
  const double tau = tau_at(TauFunction::skib(), ds.athlete, 269 - 80);
  EXPECT_NEAR(recovery_ratio(skib, 420, 80, 240), 100 * (1 - std::exp(-240 / tau)), 1e-9);
  const HydraulicModel hyd(*ds.fitted_hydraulic);
  const double r = recovery_ratio(hyd, 420, 80, 240, 0.1);
  EXPECT_GT(r, 0.0);
  EXPECT_LT(r, 100.0);
}

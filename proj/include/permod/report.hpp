#pragma once

/**
 * @file report.hpp
 * @brief Study tables: per-model predictions for each dataset and the
 * cross-study error summary (MAE, SD, RMSE, AICc, bootstrap p-values).
 */

#include "permod/datasets.hpp"
#include "permod/parallel.hpp"
#include "permod/protocol.hpp"
#include "permod/stats.hpp"
#include "permod/wbal.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace permod {

inline TauFunction tau_for(ModelKind m) {
  switch (m) {
  case ModelKind::bart: return TauFunction::bart();
  case ModelKind::skib: return TauFunction::skib();
  case ModelKind::weig: return TauFunction::weig();
  case ModelKind::hydraulic: break;
  }
  throw DataError("hydraulic model has no tau function");
}

/// Model instance for a dataset; nullopt for hydraulic without a config.
inline std::optional<ModelHandle> model_for(const StudyDataset &ds, ModelKind m) {
  if (m == ModelKind::hydraulic) {
    if (!ds.fitted_hydraulic)
      return std::nullopt;
    return ModelHandle{HydraulicModel(*ds.fitted_hydraulic)};
  }
  return ModelHandle{WbalModel(ds.athlete, tau_for(m))};
}

/// Free parameters per model for AICc.
inline int parameter_count(ModelKind m) {
  return m == ModelKind::hydraulic ? 8 : m == ModelKind::weig ? 3 : 0;
}

struct PredictionRow {
  RecoveryTrial trial;
  std::array<std::optional<double>, 4> predicted{};

  std::optional<double> operator[](ModelKind m) const {
    return predicted[static_cast<std::size_t>(m)];
  }
};

struct PredictionTable {
  std::string dataset;
  AthleteCapacity athlete;
  std::vector<PredictionRow> rows;
};

/// Recovery ratios of every model on every trial of a dataset.
inline PredictionTable prediction_table(const StudyDataset &ds, double dt = default_dt) {
  PredictionTable t{ds.name, ds.athlete, {}};
  t.rows.resize(ds.trials.size());
  for (std::size_t i = 0; i < ds.trials.size(); ++i)
    t.rows[i].trial = ds.trials[i];
  const std::size_t n = ds.trials.size() * all_models.size();
  parallel_for(n, [&](std::size_t k) {
    const std::size_t row = k / all_models.size();
    const ModelKind m = all_models[k % all_models.size()];
    auto model = model_for(ds, m);
    if (!model)
      return;
    const auto &tr = ds.trials[row];
    t.rows[row].predicted[static_cast<std::size_t>(m)] =
        recovery_ratio(*model, tr.p_work, tr.p_rec, tr.t_rec, dt);
  });
  return t;
}

/// Residuals (predicted - observed) of one model.
inline ErrorVector residuals(const PredictionTable &t, ModelKind m) {
  ErrorVector e;
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    if (auto p = t.rows[i][m])
      e.add(*p - t.rows[i].trial.observed_ratio, t.dataset, i);
  return e;
}

/// Residuals from the printed prediction columns instead of simulation.
inline ErrorVector published_residuals(const StudyDataset &ds, ModelKind m) {
  ErrorVector e;
  for (std::size_t i = 0; i < ds.published.size(); ++i)
    if (auto p = ds.published[i][m])
      e.add(*p - ds.trials[i].observed_ratio, ds.name, i);
  return e;
}

struct ModelMetrics {
  ModelKind model;
  std::size_t n = 0;
  double mae = 0.0;
  double sd = 0.0;
  double rmse = 0.0;
};

struct PairTest {
  ModelKind a;
  ModelKind b;
  double p_mae = 0.0;
  double p_rmse = 0.0;
};

/// Models compared on the datasets where none of them was fitted or used
/// to create the observations.
struct ComparisonSet {
  std::vector<ModelKind> models;
  std::vector<std::string> datasets;
  std::vector<ErrorVector> errors; ///< parallel to models
  std::vector<ModelMetrics> metrics;
  std::vector<PairTest> tests; ///< every other model against the hydraulic one
};

struct GoodnessOfFit {
  ModelKind model;
  std::size_t n = 0;
  int k = 0;
  double aicc = 0.0;
};

struct ErrorSummary {
  std::vector<ComparisonSet> sets;
  std::vector<GoodnessOfFit> fit; ///< over all rows of all datasets
};

struct SummaryOptions {
  std::size_t bootstrap_samples = 1'000'000;
  std::uint64_t seed = 0;
  bool use_published = false; ///< residuals from printed columns
};

inline ErrorSummary error_summary(const std::vector<StudyDataset> &datasets,
                                  const std::vector<PredictionTable> &tables,
                                  const SummaryOptions &opt = {}) {
  const auto errors_of = [&](std::size_t d, ModelKind m) {
    return opt.use_published ? published_residuals(datasets[d], m)
                             : residuals(tables[d], m);
  };
  const std::vector<std::vector<ModelKind>> groups{
      {ModelKind::bart, ModelKind::hydraulic},
      {ModelKind::skib, ModelKind::weig, ModelKind::hydraulic}};

  ErrorSummary out;
  for (const auto &models : groups) {
    ComparisonSet set;
    set.models = models;
    set.errors.resize(models.size());
    for (std::size_t d = 0; d < datasets.size(); ++d) {
      bool eligible = true;
      for (ModelKind m : models)
        eligible = eligible && datasets[d].usage_of(m) == ModelUsage::predicted;
      if (!eligible)
        continue;
      set.datasets.push_back(datasets[d].name);
      for (std::size_t i = 0; i < models.size(); ++i)
        set.errors[i].append(errors_of(d, models[i]));
    }
    for (std::size_t i = 0; i < models.size(); ++i) {
      const auto &e = set.errors[i];
      if (e.empty())
        continue;
      set.metrics.push_back({models[i], e.size(), mae(e), sd_abs(e), rmse(e)});
    }
    const std::size_t hyd = models.size() - 1;
    for (std::size_t i = 0; i + 1 < models.size(); ++i) {
      if (set.errors[i].empty() || set.errors[hyd].empty())
        continue;
      BootstrapOptions bo;
      bo.samples = opt.bootstrap_samples;
      bo.seed = opt.seed;
      PairTest t{models[i], models[hyd], 0.0, 0.0};
      t.p_mae = bootstrap_test(set.errors[i], set.errors[hyd],
                               BootstrapStatistic::delta_mae, bo);
      t.p_rmse = bootstrap_test(set.errors[i], set.errors[hyd],
                                BootstrapStatistic::delta_rmse, bo);
      set.tests.push_back(t);
    }
    out.sets.push_back(std::move(set));
  }
  for (ModelKind m : {ModelKind::weig, ModelKind::hydraulic}) {
    ErrorVector e;
    for (std::size_t d = 0; d < datasets.size(); ++d)
      e.append(errors_of(d, m));
    if (e.size() > static_cast<std::size_t>(parameter_count(m)) + 1)
      out.fit.push_back({m, e.size(), parameter_count(m), aicc(e, parameter_count(m))});
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV output

inline std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

/// Dataset columns followed by one predicted-ratio column per model.
inline void write_prediction_csv(std::ostream &os, const PredictionTable &t) {
  os << csv_header;
  for (ModelKind m : all_models)
    os << ',' << model_name(m) << "_pct";
  os << '\n';
  for (const auto &r : t.rows) {
    os << t.dataset << ',' << format_number(t.athlete.cp) << ','
       << format_number(t.athlete.w_prime) << ',' << format_number(r.trial.p_work)
       << ',' << format_number(r.trial.p_rec) << ',' << format_number(r.trial.t_rec)
       << ',' << format_number(r.trial.observed_ratio);
    for (ModelKind m : all_models) {
      os << ',';
      if (auto p = r[m])
        os << format_fixed(*p, 3);
    }
    os << '\n';
  }
}

/// One row per (comparison set, model) with MAE/SD/RMSE and the p-values of
/// its test against the hydraulic model; AICc rows follow.
inline void write_summary_csv(std::ostream &os, const ErrorSummary &s) {
  os << "section,datasets,model,n,mae_pct,sd_pct,rmse_pct,p_mae,p_rmse,k,aicc\n";
  for (std::size_t i = 0; i < s.sets.size(); ++i) {
    const auto &set = s.sets[i];
    std::string names;
    for (const auto &d : set.datasets)
      names += (names.empty() ? "" : ";") + d;
    for (const auto &m : set.metrics) {
      os << "prediction_" << (i + 1) << ',' << names << ',' << model_name(m.model)
         << ',' << m.n << ',' << format_fixed(m.mae, 3) << ','
         << format_fixed(m.sd, 3) << ',' << format_fixed(m.rmse, 3) << ',';
      for (const auto &t : set.tests)
        if (t.a == m.model)
          os << format_fixed(t.p_mae, 3) << ',' << format_fixed(t.p_rmse, 3);
      if (std::none_of(set.tests.begin(), set.tests.end(),
                       [&](const PairTest &t) { return t.a == m.model; }))
        os << ',';
      os << ",,\n";
    }
  }
  for (const auto &g : s.fit)
    os << "goodness_of_fit,all," << model_name(g.model) << ',' << g.n << ",,,,,,"
       << g.k << ',' << format_fixed(g.aicc, 3) << '\n';
}

} // namespace permod

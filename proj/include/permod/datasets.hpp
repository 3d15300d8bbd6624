#pragma once

/**
 * @file datasets.hpp
 * @brief Embedded recovery-ratio study datasets and the CSV trial format.
 *
 * Each builtin dataset carries the group-mean athlete parameters, the
 * recovery trials in their published order with observed ratios exactly as
 * printed, the published hydraulic configuration fitted to that athlete and
 * the published per-model predictions (used for comparison only).
 *
 * CSV layout, one trial per row, header required:
 *
 *   dataset,cp_w,w_prime_j,p_work_w,p_rec_w,t_rec_s,observed_ratio_pct
 */

#include "permod/athlete.hpp"
#include "permod/error.hpp"
#include "permod/hydraulic.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace permod {

struct RecoveryTrial {
  double p_work = 0.0;
  double p_rec = 0.0;
  double t_rec = 0.0;
  double observed_ratio = 0.0;
  /// Reported standard deviation of the observation, where published.
  std::optional<double> observed_sd;

  /// Equality ignores the optional metadata.
  friend bool operator==(const RecoveryTrial &a, const RecoveryTrial &b) {
    return a.p_work == b.p_work && a.p_rec == b.p_rec && a.t_rec == b.t_rec &&
           a.observed_ratio == b.observed_ratio;
  }
};

enum class ModelKind { bart, skib, weig, hydraulic };
inline constexpr std::array<ModelKind, 4> all_models{
    ModelKind::bart, ModelKind::skib, ModelKind::weig, ModelKind::hydraulic};

inline const char *model_name(ModelKind m) {
  switch (m) {
  case ModelKind::bart: return "bart";
  case ModelKind::skib: return "skib";
  case ModelKind::weig: return "weig";
  case ModelKind::hydraulic: return "hydraulic";
  }
  return "unknown";
}

/// How a model relates to a dataset in the comparison.
enum class ModelUsage {
  predicted, ///< model is evaluated on data it was not fitted to
  fitted,    ///< model was fitted to this dataset
  source     ///< model produced the dataset's observations
};

/// Published predicted ratios for one trial; empty where not printed.
struct PublishedPredictions {
  std::array<std::optional<double>, 4> by_model{};

  std::optional<double> operator[](ModelKind m) const {
    return by_model[static_cast<std::size_t>(m)];
  }
};

struct StudyDataset {
  std::string name;
  AthleteCapacity athlete;
  std::vector<RecoveryTrial> trials;
  std::optional<HydraulicConfig> fitted_hydraulic;
  std::array<ModelUsage, 4> usage{ModelUsage::predicted, ModelUsage::predicted,
                                  ModelUsage::predicted, ModelUsage::predicted};
  /// Parallel to trials; empty for datasets loaded from CSV.
  std::vector<PublishedPredictions> published;

  ModelUsage usage_of(ModelKind m) const {
    return usage[static_cast<std::size_t>(m)];
  }

  void validate() const {
    athlete.validate();
    if (trials.empty())
      throw DataError("dataset '" + name + "': trial list is empty");
    for (std::size_t i = 0; i < trials.size(); ++i) {
      const auto &t = trials[i];
      const std::string where = "dataset '" + name + "' trial " + std::to_string(i);
      if (!(t.p_work > athlete.cp))
        throw DataError(where + ": p_work must exceed cp");
      if (!(t.p_rec < t.p_work))
        throw DataError(where + ": p_rec must be below p_work");
      if (!(t.p_rec >= 0.0))
        throw DataError(where + ": p_rec must be >= 0");
      if (!(t.t_rec >= 0.0))
        throw DataError(where + ": t_rec must be >= 0");
      if (!(t.observed_ratio >= 0.0 && t.observed_ratio <= 100.0))
        throw DataError(where + ": observed ratio must lie in [0, 100]");
    }
    if (!published.empty() && published.size() != trials.size())
      throw DataError("dataset '" + name + "': published predictions misaligned");
  }
};

/// Name, athlete and trials match; metadata is not compared.
inline bool structurally_equal(const StudyDataset &a, const StudyDataset &b) {
  return a.name == b.name && a.athlete == b.athlete && a.trials == b.trials;
}

inline constexpr std::array<std::string_view, 5> builtin_dataset_names{
    "bartram", "caen", "chidnok", "ferguson", "weigend"};

namespace detail {

struct Row {
  double p_work, p_rec, t_rec, observed;
  std::optional<double> bart, skib, weig, hyd;
  std::optional<double> sd = std::nullopt;
};

inline StudyDataset make_dataset(std::string name, AthleteCapacity athlete,
                                 std::array<double, 8> config,
                                 std::initializer_list<Row> rows) {
  StudyDataset ds;
  ds.name = std::move(name);
  ds.athlete = athlete;
  ds.fitted_hydraulic = HydraulicConfig::from_array(config);
  for (const Row &r : rows) {
    ds.trials.push_back({r.p_work, r.p_rec, r.t_rec, r.observed, r.sd});
    ds.published.push_back({{r.bart, r.skib, r.weig, r.hyd}});
  }
  return ds;
}

} // namespace detail

/// One of the five embedded study datasets.
inline StudyDataset builtin_dataset(std::string_view name) {
  using detail::Row;
  constexpr auto none = std::nullopt;
  StudyDataset ds;
  if (name == "bartram") {
    // Observations are bart-model predictions, so bart is the source.
    ds = detail::make_dataset(
        "bartram", {393, 23300},
        {23111.91, 65845.28, 391.57, 148.88, 24.15, 0.73, 0.01, 0.24},
        {Row{626, 393, 60, 0.0, none, 0.0, 0.0, 22.7},
         Row{626, 343, 60, 33.0, none, 12.1, 10.6, 33.9},
         Row{626, 293, 60, 47.0, none, 22.8, 16.9, 44.8},
         Row{626, 243, 60, 57.0, none, 32.1, 19.4, 52.7},
         Row{626, 193, 60, 64.0, none, 40.3, 20.0, 59.3}});
    ds.usage[static_cast<std::size_t>(ModelKind::bart)] = ModelUsage::source;
  } else if (name == "caen") {
    ds = detail::make_dataset(
        "caen", {269, 19200},
        {17631.06, 46246.13, 267.28, 117.50, 20.09, 0.68, 0.01, 0.29},
        {Row{349, 161, 30, 28.6, 28.0, 15.5, 9.2, 26.9, 8.2},
         Row{349, 161, 60, 34.8, 48.2, 28.7, 17.5, 41.2, 11.1},
         Row{349, 161, 120, 44.2, 73.2, 49.1, 31.9, 49.8, 9.7},
         Row{349, 161, 180, 50.5, 86.1, 63.7, 43.8, 52.8, 12.1},
         Row{349, 161, 240, 55.1, 92.8, 74.1, 53.6, 54.7, 13.3},
         Row{349, 161, 300, 56.8, 96.3, 81.5, 61.8, 56.3, 16.4},
         Row{349, 161, 600, 73.7, 99.9, 96.6, 85.4, 64.9, 19.3},
         Row{349, 161, 900, 71.3, 100.0, 99.4, 94.4, 73.8, 20.8}});
  } else if (name == "chidnok") {
    // Observations are constant-tau W'bal ratios fitted to intermittent TTEs.
    ds = detail::make_dataset(
        "chidnok", {241, 21100},
        {18919.76, 48051.77, 239.55, 115.05, 19.48, 0.68, 0.05, 0.31},
        {Row{329, 20, 30, 16.6, 41.6, 27.0, 10.6, 40.6},
         Row{329, 95, 30, 21.4, 33.3, 18.8, 10.1, 30.9},
         Row{329, 173, 30, 24.4, 21.3, 9.2, 6.8, 20.5}});
  } else if (name == "ferguson") {
    ds = detail::make_dataset(
        "ferguson", {212, 21600},
        {18730.05, 81030.54, 211.56, 94.31, 18.76, 0.63, 0.21, 0.34},
        {Row{269, 20, 120, 37.0, 85.8, 65.6, 35.9, 54.2, 5.0},
         Row{269, 20, 360, 65.0, 99.7, 95.9, 73.6, 69.4, 6.0},
         Row{269, 20, 900, 86.0, 100.0, 100.0, 96.4, 98.4, 4.0}});
  } else if (name == "weigend") {
    // Rows keyed by wattage as printed (323 W and 285 W work bouts).
    ds = detail::make_dataset(
        "weigend", {248, 18200},
        {18042.06, 46718.18, 247.4, 106.77, 16.96, 0.72, 0.02, 0.25},
        {Row{323, 81, 120, 55.0, 83.1, 66.7, 35.5, 58.3},
         Row{323, 81, 240, 61.0, 97.1, 89.0, 58.3, 65.0},
         Row{323, 81, 360, 70.5, 99.5, 96.3, 73.1, 70.1},
         Row{323, 163, 120, 49.0, 67.2, 42.9, 28.4, 46.5},
         Row{323, 163, 240, 55.0, 89.2, 67.4, 48.7, 51.5},
         Row{323, 163, 360, 58.0, 96.5, 81.4, 63.3, 54.2},
         Row{285, 81, 120, 42.0, 83.0, 66.8, 35.5, 46.8},
         Row{285, 81, 240, 52.0, 97.1, 89.0, 58.3, 54.0},
         Row{285, 81, 360, 59.5, 99.5, 96.3, 73.1, 60.4},
         Row{285, 163, 120, 38.0, 67.2, 42.9, 28.4, 38.5},
         Row{285, 163, 240, 37.5, 89.3, 67.4, 48.7, 43.6},
         Row{285, 163, 360, 50.0, 96.5, 81.4, 63.3, 47.4}});
    ds.usage[static_cast<std::size_t>(ModelKind::weig)] = ModelUsage::fitted;
    ds.usage[static_cast<std::size_t>(ModelKind::hydraulic)] = ModelUsage::fitted;
  } else {
    throw DataError("unknown dataset '" + std::string(name) +
                    "' (expected bartram, caen, chidnok, ferguson or weigend)");
  }
  ds.validate();
  return ds;
}

inline std::vector<StudyDataset> builtin_datasets() {
  std::vector<StudyDataset> out;
  for (auto n : builtin_dataset_names)
    out.push_back(builtin_dataset(n));
  return out;
}

/// One condition of the intermittent 60 s work / 30 s recovery protocol.
struct IntermittentCondition {
  std::string label;
  double p_rec;
  double observed_tte;
  double observed_sd;
};

/// The intermittent-protocol source data behind the chidnok observations:
/// p_work 329 W, CP 241 W, W' 21100 J.
inline std::vector<IntermittentCondition> chidnok_intermittent_conditions() {
  return {{"low", 20, 1224, 497},
          {"medium", 95, 759, 243},
          {"high", 173, 557, 90},
          {"severe", 270, 329, 29}};
}

inline constexpr std::string_view csv_header =
    "dataset,cp_w,w_prime_j,p_work_w,p_rec_w,t_rec_s,observed_ratio_pct";

/// Shortest decimal text that parses back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline void write_csv(std::ostream &os, const StudyDataset &ds) {
  os << csv_header << '\n';
  for (const auto &t : ds.trials) {
    os << ds.name << ',' << format_number(ds.athlete.cp) << ','
       << format_number(ds.athlete.w_prime) << ',' << format_number(t.p_work)
       << ',' << format_number(t.p_rec) << ',' << format_number(t.t_rec) << ','
       << format_number(t.observed_ratio) << '\n';
  }
}

inline std::string to_csv(const StudyDataset &ds) {
  std::ostringstream os;
  write_csv(os, ds);
  return os.str();
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos)
      break;
    start = pos + 1;
  }
  return out;
}

inline double parse_number(std::string_view field, std::size_t row,
                           std::size_t col) {
  double v = 0.0;
  const auto *first = field.data();
  const auto *last = field.data() + field.size();
  auto res = std::from_chars(first, last, v);
  if (field.empty() || res.ec != std::errc{} || res.ptr != last ||
      !std::isfinite(v))
    throw ParseError(row, col, "expected a number, got '" + std::string(field) + "'");
  return v;
}

} // namespace detail

/**
 * @brief Parse a dataset from CSV text.
 *
 * All rows must name the same dataset and share its athlete parameters.
 * Blank lines and lines starting with '#' are skipped.
 */
inline StudyDataset parse_csv(std::istream &is) {
  StudyDataset ds;
  std::string line;
  std::size_t row = 0;
  bool header_seen = false;
  std::size_t columns = 0;
  while (std::getline(is, line)) {
    ++row;
    const auto view = detail::trim(line);
    if (view.empty() || view.front() == '#')
      continue;
    if (!header_seen) {
      // Extra trailing columns (e.g. model predictions) are allowed and ignored.
      const auto names = detail::split_commas(view);
      const auto expected = detail::split_commas(csv_header);
      if (names.size() < expected.size() ||
          !std::equal(expected.begin(), expected.end(), names.begin()))
        throw ParseError(row, 1, "expected header '" + std::string(csv_header) + "'");
      columns = names.size();
      header_seen = true;
      continue;
    }
    const auto fields = detail::split_commas(view);
    if (fields.size() != columns)
      throw ParseError(row, std::min(fields.size(), columns) + 1,
                       "expected " + std::to_string(columns) + " fields, got " +
                           std::to_string(fields.size()));
    if (fields[0].empty())
      throw ParseError(row, 1, "empty dataset name");
    std::array<double, 6> v{};
    for (std::size_t c = 1; c < 7; ++c)
      v[c - 1] = detail::parse_number(fields[c], row, c + 1);
    const AthleteCapacity athlete{v[0], v[1]};
    if (ds.trials.empty()) {
      ds.name = std::string(fields[0]);
      ds.athlete = athlete;
    } else if (fields[0] != ds.name) {
      throw ParseError(row, 1, "mixed dataset names ('" + ds.name + "' and '" +
                                   std::string(fields[0]) + "')");
    } else if (!(athlete == ds.athlete)) {
      throw ParseError(row, 2, "athlete parameters differ from earlier rows");
    }
    ds.trials.push_back({v[2], v[3], v[4], v[5], std::nullopt});
  }
  if (!header_seen)
    throw ParseError(row + 1, 1, "missing header");
  ds.validate();
  return ds;
}

inline StudyDataset parse_csv(std::string_view text) {
  std::istringstream is{std::string(text)};
  return parse_csv(is);
}

inline StudyDataset load_csv(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw std::system_error(errno, std::generic_category(), "cannot open " + path);
  return parse_csv(in);
}

} // namespace permod

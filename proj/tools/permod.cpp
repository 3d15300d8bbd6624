// permod command-line tool: reproduce the study tables, emit recovery
// curves, run the fitting procedures.
//
// Exit codes: 0 success, 1 usage error, 2 model/data error, 3 IO error.

#include "permod/datasets.hpp"
#include "permod/fitting.hpp"
#include "permod/json_io.hpp"
#include "permod/protocol.hpp"
#include "permod/report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace permod;

namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  double dt = default_dt;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string format = "csv";
};

std::string timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

/// Run provenance. The one-line form embedded in CSVs deliberately carries no
/// timestamps so that repeated runs produce identical files; timestamps go to
/// the manifest.json sidecar.
class Manifest {
public:
  Manifest(std::string command, const Globals &g)
      : command_(std::move(command)), globals_(g), started_(timestamp_utc()) {}

  void set(const std::string &key, const std::string &value) { params_[key] = value; }
  void set(const std::string &key, double value) { params_[key] = format_number(value); }
  void output(const fs::path &p) { outputs_.push_back(p.filename().string()); }

  std::string comment_line() const {
    std::ostringstream os;
    os << "# permod " << PERMOD_VERSION << " command=" << command_;
    for (const auto &[k, v] : params_)
      os << ' ' << k << '=' << v;
    os << " seed=" << globals_.seed << " dt=" << format_number(globals_.dt);
    return os.str();
  }

  json to_json() const {
    return {{"tool", "permod"},
            {"version", PERMOD_VERSION},
            {"command", command_},
            {"parameters", params_},
            {"seed", globals_.seed},
            {"dt", globals_.dt},
            {"started_at", started_},
            {"finished_at", timestamp_utc()},
            {"outputs", outputs_}};
  }

private:
  std::string command_;
  Globals globals_;
  std::string started_;
  std::map<std::string, std::string> params_;
  std::vector<std::string> outputs_;
};

fs::path prepare_out_dir(const Globals &g) {
  std::error_code ec;
  fs::create_directories(g.out_dir, ec);
  if (ec)
    throw IoError("cannot create output directory '" + g.out_dir + "': " + ec.message());
  return fs::path(g.out_dir);
}

void write_file(const fs::path &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  out.close();
  if (!out)
    throw IoError("failed writing '" + path.string() + "'");
}

void finish(Manifest &m, const fs::path &dir) {
  write_file(dir / "manifest.json", m.to_json().dump(2) + "\n");
}

/// Writes a CSV artifact with the manifest comment as first line.
void emit_csv(Manifest &m, const fs::path &path, const std::string &body) {
  write_file(path, m.comment_line() + "\n" + body);
  m.output(path);
  std::cout << "wrote " << path.string() << "\n";
}

void emit_json(Manifest &m, const fs::path &path, json body, bool embed_manifest) {
  if (embed_manifest)
    body["manifest"] = m.to_json();
  else
    body["manifest"] = m.comment_line().substr(2);
  write_file(path, body.dump(2) + "\n");
  m.output(path);
  std::cout << "wrote " << path.string() << "\n";
}

std::string table_dataset(int table) {
  static const char *names[] = {"bartram", "caen", "chidnok", "ferguson", "weigend"};
  return names[table - 1];
}

json prediction_json(const PredictionTable &t) {
  json rows = json::array();
  for (const auto &r : t.rows) {
    json row{{"p_work_w", r.trial.p_work},
             {"p_rec_w", r.trial.p_rec},
             {"t_rec_s", r.trial.t_rec},
             {"observed_ratio_pct", r.trial.observed_ratio}};
    for (ModelKind m : all_models)
      row[std::string(model_name(m)) + "_pct"] = r[m] ? json(*r[m]) : json(nullptr);
    rows.push_back(row);
  }
  return {{"dataset", t.dataset},
          {"cp_w", t.athlete.cp},
          {"w_prime_j", t.athlete.w_prime},
          {"rows", rows}};
}

json summary_json(const ErrorSummary &s) {
  json sets = json::array();
  for (const auto &set : s.sets) {
    json metrics = json::array();
    for (const auto &m : set.metrics)
      metrics.push_back({{"model", model_name(m.model)},
                         {"n", m.n},
                         {"mae_pct", m.mae},
                         {"sd_pct", m.sd},
                         {"rmse_pct", m.rmse}});
    json tests = json::array();
    for (const auto &t : set.tests)
      tests.push_back({{"model", model_name(t.a)},
                       {"against", model_name(t.b)},
                       {"p_mae", t.p_mae},
                       {"p_rmse", t.p_rmse}});
    sets.push_back({{"datasets", set.datasets}, {"metrics", metrics}, {"tests", tests}});
  }
  json fit = json::array();
  for (const auto &g : s.fit)
    fit.push_back({{"model", model_name(g.model)}, {"n", g.n}, {"k", g.k}, {"aicc", g.aicc}});
  return {{"prediction_sets", sets}, {"goodness_of_fit", fit}};
}

std::string residuals_csv(const std::vector<StudyDataset> &ds,
                          const std::vector<PredictionTable> &tables) {
  std::ostringstream os;
  os << "dataset,row,model,residual_pp\n";
  for (std::size_t d = 0; d < ds.size(); ++d)
    for (ModelKind m : all_models)
      for (const auto &r : residuals(tables[d], m).residuals())
        os << r.dataset << ',' << r.row << ',' << model_name(m) << ','
           << format_fixed(r.value, 3) << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Shared option parsing

/// "a:b:step" (inclusive) or a comma-separated list.
std::vector<double> parse_grid(const std::string &spec) {
  std::vector<double> out;
  if (spec.empty())
    return out;
  const auto number = [](const std::string &s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used != s.size() || s.empty())
      throw CLI::ValidationError("--grid", "not a number: '" + s + "'");
    return v;
  };
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ':');)
      parts.push_back(p);
    if (parts.size() != 3)
      throw CLI::ValidationError("--grid", "range form is start:stop:step");
    const double a = number(parts[0]), b = number(parts[1]), step = number(parts[2]);
    if (!(step > 0.0) || b < a)
      throw CLI::ValidationError("--grid", "need step > 0 and stop >= start");
    const auto n = static_cast<long long>(std::floor((b - a) / step + 1e-9));
    for (long long i = 0; i <= n; ++i)
      out.push_back(a + static_cast<double>(i) * step);
    return out;
  }
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ',');)
    out.push_back(number(p));
  return out;
}

struct AthleteOptions {
  std::string dataset;
  std::optional<double> cp;
  std::optional<double> w_prime;
  std::string config; ///< JSON text or @path

  void add_to(CLI::App *app, bool with_config = true) {
    app->add_option("--dataset", dataset, "Builtin dataset supplying athlete and config")
        ->check(CLI::IsMember({"bartram", "caen", "chidnok", "ferguson", "weigend"}));
    app->add_option("--cp", cp, "Critical power (W)");
    app->add_option("--wprime", w_prime, "W' (J)");
    if (with_config)
      app->add_option("--config", config,
                      "Hydraulic config: JSON array of 8 numbers "
                      "[an_f, an_s, m_ae, m_ans, m_anf, theta, gamma, phi] or @file");
  }

  AthleteCapacity athlete() const {
    AthleteCapacity a{};
    if (!dataset.empty())
      a = builtin_dataset(dataset).athlete;
    if (cp)
      a.cp = *cp;
    if (w_prime)
      a.w_prime = *w_prime;
    if (a.cp == 0.0 || a.w_prime == 0.0)
      throw CLI::ValidationError("athlete", "give --dataset or both --cp and --wprime");
    a.validate();
    return a;
  }

  std::optional<HydraulicConfig> hydraulic() const {
    if (!config.empty()) {
      std::string text = config;
      if (text.front() == '@') {
        std::ifstream in(text.substr(1));
        if (!in)
          throw IoError("cannot read config file '" + text.substr(1) + "'");
        text.assign(std::istreambuf_iterator<char>(in), {});
      }
      return parse_config(text);
    }
    if (!dataset.empty())
      return builtin_dataset(dataset).fitted_hydraulic;
    return std::nullopt;
  }
};

/// skib | bart | weig | hydraulic | constant:<tau> | exp:<a>,<b>,<c>
ModelHandle make_model(const std::string &spec, const AthleteOptions &ao) {
  if (spec == "hydraulic") {
    const auto c = ao.hydraulic();
    if (!c)
      throw CLI::ValidationError("--model", "hydraulic needs --config or --dataset");
    return HydraulicModel(*c);
  }
  const AthleteCapacity a = ao.athlete();
  if (spec == "skib")
    return WbalModel(a, TauFunction::skib());
  if (spec == "bart")
    return WbalModel(a, TauFunction::bart());
  if (spec == "weig")
    return WbalModel(a, TauFunction::weig());
  if (spec.rfind("constant:", 0) == 0)
    return WbalModel(a, TauFunction::constant(std::stod(spec.substr(9))));
  if (spec.rfind("exp:", 0) == 0) {
    const auto v = parse_grid(spec.substr(4));
    if (v.size() != 3)
      throw CLI::ValidationError("--model", "exp needs three numbers a,b,c");
    return WbalModel(a, TauFunction::exponential(v[0], v[1], v[2]));
  }
  throw CLI::ValidationError("--model", "unknown model '" + spec + "'");
}

std::string curve_body(const std::vector<double> &grid, const std::vector<double> &ratios,
                       char sep) {
  std::ostringstream os;
  if (sep == ',')
    os << "t_rec_s,ratio_pct\n";
  else
    os << "# t_rec_s ratio_pct\n";
  for (std::size_t i = 0; i < grid.size(); ++i)
    os << format_number(grid[i]) << sep << format_fixed(ratios[i], 3) << '\n';
  return os.str();
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Energy expenditure and recovery models for intermittent exercise"};
  app.set_version_flag("--version", std::string("permod ") + PERMOD_VERSION);
  app.require_subcommand(1);
  Globals g;
  app.add_option("--dt", g.dt, "Simulation step (s)")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "RNG seed for stochastic operations");
  app.add_option("--out-dir", g.out_dir, "Directory for output files");
  app.add_option("--format", g.format, "Table/curve output format")
      ->check(CLI::IsMember({"csv", "json"}));

  // reproduce
  auto *reproduce = app.add_subcommand("reproduce", "Reproduce a study table (1-6)");
  int table = 0;
  std::size_t samples = 1'000'000;
  reproduce->add_option("--table", table, "Table number")->required()->check(CLI::Range(1, 6));
  reproduce->add_option("--samples", samples, "Bootstrap resamples (table 6)")
      ->check(CLI::PositiveNumber);

  // predict
  auto *predict = app.add_subcommand("predict", "Predictions for a dataset CSV");
  std::string csv_path;
  AthleteOptions predict_opts;
  predict->add_option("--csv", csv_path, "Dataset CSV")->required();
  predict->add_option("--config", predict_opts.config, "Hydraulic config (JSON array or @file)");

  // curve
  auto *curve = app.add_subcommand("curve", "Recovery ratio over a grid of recovery times");
  AthleteOptions curve_opts;
  curve_opts.add_to(curve);
  std::string curve_model, curve_grid = "0:900:10", curve_name = "curve";
  double curve_pwork = 0.0, curve_prec = 0.0;
  curve->add_option("--model", curve_model,
                    "skib | bart | weig | hydraulic | constant:<tau> | exp:<a>,<b>,<c>")
      ->required();
  curve->add_option("--pwork", curve_pwork, "Work-bout power (W)")->required();
  curve->add_option("--prec", curve_prec, "Recovery power (W)")->required();
  curve->add_option("--grid", curve_grid, "start:stop:step or comma list (s)");
  curve->add_option("--name", curve_name, "Output file stem");

  // sensitivity
  auto *sens = app.add_subcommand("sensitivity", "Recovery curves for several work intensities");
  AthleteOptions sens_opts;
  sens_opts.add_to(sens);
  std::vector<std::string> sens_pworks{"P100", "P240", "P360", "P480"};
  std::vector<std::string> sens_models{"skib", "bart", "weig", "hydraulic"};
  std::string sens_grid = "0:900:10";
  std::optional<double> sens_prec;
  sens->add_option("--pworks", sens_pworks, "Work powers: watts or P<seconds>")->delimiter(',');
  sens->add_option("--models", sens_models, "Models to simulate")->delimiter(',');
  sens->add_option("--prec", sens_prec, "Recovery power (W); default CP - 200");
  sens->add_option("--grid", sens_grid, "start:stop:step or comma list (s)");

  // fit
  auto *fit = app.add_subcommand("fit", "Fitting procedures");
  fit->require_subcommand(1);
  auto *fit_const = fit->add_subcommand("tau-constant", "Constant tau per recovery trial");
  AthleteOptions fc_opts;
  fc_opts.add_to(fit_const, false);
  std::optional<double> fc_pwork, fc_prec, fc_trec, fc_obs;
  fit_const->add_option("--pwork", fc_pwork, "Single trial: work power (W)");
  fit_const->add_option("--prec", fc_prec, "Single trial: recovery power (W)");
  fit_const->add_option("--trec", fc_trec, "Single trial: recovery time (s)");
  fit_const->add_option("--observed", fc_obs, "Single trial: observed ratio (%)");

  auto *fit_exp = fit->add_subcommand("tau-exp", "Exponential tau regression over constant-tau fits");
  std::string fe_dataset = "weigend", fe_pairs;
  fit_exp->add_option("--dataset", fe_dataset, "Dataset whose trials give the pairs")
      ->check(CLI::IsMember({"bartram", "caen", "chidnok", "ferguson", "weigend"}));
  fit_exp->add_option("--pairs", fe_pairs, "CSV with columns d_cp_w,tau_s instead of a dataset");

  auto *fit_chid = fit->add_subcommand("tau-chidnok", "Constant tau from an intermittent TTE");
  double ch_cp = 241, ch_w = 21100, ch_pwork = 329, ch_work = 60, ch_rest = 30;
  std::optional<double> ch_prec, ch_tte;
  fit_chid->add_option("--cp", ch_cp, "Critical power (W)");
  fit_chid->add_option("--wprime", ch_w, "W' (J)");
  fit_chid->add_option("--pwork", ch_pwork, "Work power (W)");
  fit_chid->add_option("--prec", ch_prec, "Recovery power (W); omit with --tte to fit all builtin conditions");
  fit_chid->add_option("--tte", ch_tte, "Observed intermittent TTE (s)");
  fit_chid->add_option("--work", ch_work, "Work bout duration (s)");
  fit_chid->add_option("--rest", ch_rest, "Recovery bout duration (s)");

  auto *fit_hyd = fit->add_subcommand("hydraulic", "Evolutionary hydraulic config fit");
  AthleteOptions fh_opts;
  fh_opts.add_to(fit_hyd, false);
  HydraulicFitOptions fh;
  fit_hyd->add_option("--runs", fh.runs, "Independent runs")->check(CLI::PositiveNumber);
  fit_hyd->add_option("--evals", fh.evaluations_per_run, "Evaluations per run")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const fs::path dir = prepare_out_dir(g);
    const bool as_json = g.format == "json";

    if (*reproduce) {
      Manifest m("reproduce", g);
      m.set("table", std::to_string(table));
      if (table <= 5) {
        const auto ds = builtin_dataset(table_dataset(table));
        const auto t = prediction_table(ds, g.dt);
        const fs::path out = dir / ("table_" + std::to_string(table) + (as_json ? ".json" : ".csv"));
        if (as_json) {
          emit_json(m, out, prediction_json(t), false);
        } else {
          std::ostringstream os;
          write_prediction_csv(os, t);
          emit_csv(m, out, os.str());
        }
      } else {
        m.set("samples", std::to_string(samples));
        const auto ds = builtin_datasets();
        std::vector<PredictionTable> tables;
        for (const auto &d : ds)
          tables.push_back(prediction_table(d, g.dt));
        SummaryOptions so;
        so.bootstrap_samples = samples;
        so.seed = g.seed;
        const auto s = error_summary(ds, tables, so);
        if (as_json) {
          emit_json(m, dir / "table_6.json", summary_json(s), false);
        } else {
          std::ostringstream os;
          write_summary_csv(os, s);
          emit_csv(m, dir / "table_6.csv", os.str());
          emit_csv(m, dir / "table_6_residuals.csv", residuals_csv(ds, tables));
        }
      }
      finish(m, dir);
    } else if (*predict) {
      Manifest m("predict", g);
      m.set("csv", csv_path);
      StudyDataset ds = load_csv(csv_path);
      ds.fitted_hydraulic = predict_opts.hydraulic();
      const auto t = prediction_table(ds, g.dt);
      if (as_json) {
        emit_json(m, dir / "predictions.json", prediction_json(t), false);
      } else {
        std::ostringstream os;
        write_prediction_csv(os, t);
        emit_csv(m, dir / "predictions.csv", os.str());
      }
      finish(m, dir);
    } else if (*curve) {
      Manifest m("curve", g);
      m.set("model", curve_model);
      m.set("p_work", curve_pwork);
      m.set("p_rec", curve_prec);
      m.set("grid", curve_grid);
      if (!curve_opts.dataset.empty())
        m.set("dataset", curve_opts.dataset);
      const auto grid = parse_grid(curve_grid);
      const auto model = make_model(curve_model, curve_opts);
      const auto ratios = recovery_curve(model, curve_pwork, curve_prec, grid, g.dt);
      if (as_json) {
        json pts = json::array();
        for (std::size_t i = 0; i < grid.size(); ++i)
          pts.push_back({{"t_rec_s", grid[i]}, {"ratio_pct", ratios[i]}});
        emit_json(m, dir / (curve_name + ".json"), {{"points", pts}}, false);
      } else {
        emit_csv(m, dir / (curve_name + ".csv"), curve_body(grid, ratios, ','));
      }
      write_file(dir / (curve_name + ".dat"),
                 m.comment_line() + "\n" + curve_body(grid, ratios, ' '));
      m.output(dir / (curve_name + ".dat"));
      finish(m, dir);
    } else if (*sens) {
      Manifest m("sensitivity", g);
      const AthleteCapacity a = sens_opts.athlete();
      const double p_rec = sens_prec ? *sens_prec : a.cp - 200.0;
      const auto grid = parse_grid(sens_grid);
      m.set("p_rec", p_rec);
      m.set("grid", sens_grid);
      std::string joined;
      for (const auto &p : sens_pworks)
        joined += (joined.empty() ? "" : ";") + p;
      m.set("p_works", joined);
      std::ostringstream csv, dat, errors;
      csv << "model,p_work_label,p_work_w,t_rec_s,ratio_pct\n";
      errors << "model,p_work_label,error\n";
      std::size_t failures = 0, successes = 0;
      for (const auto &model_name_s : sens_models) {
        for (const auto &label : sens_pworks) {
          try {
            double p_work = 0.0;
            if (!label.empty() && (label[0] == 'P' || label[0] == 'p'))
              p_work = a.power_for_tte(std::stod(label.substr(1)));
            else
              p_work = std::stod(label);
            if (!(p_work > a.cp))
              throw SustainableIntensity(p_work, INFINITY);
            const auto model = make_model(model_name_s, sens_opts);
            const auto r = recovery_curve(model, p_work, p_rec, grid, g.dt);
            dat << "# model=" << model_name_s << " p_work=" << label << "\n";
            for (std::size_t i = 0; i < grid.size(); ++i) {
              csv << model_name_s << ',' << label << ',' << format_fixed(p_work, 3) << ','
                  << format_number(grid[i]) << ',' << format_fixed(r[i], 3) << '\n';
              dat << format_number(grid[i]) << ' ' << format_fixed(r[i], 3) << '\n';
            }
            dat << "\n\n";
            ++successes;
          } catch (const Error &e) {
            errors << model_name_s << ',' << label << ",\"" << e.what() << "\"\n";
            std::cerr << "sensitivity: " << model_name_s << " at " << label << ": "
                      << e.what() << "\n";
            ++failures;
          } catch (const std::invalid_argument &) {
            errors << model_name_s << ',' << label << ",\"not a power\"\n";
            ++failures;
          }
        }
      }
      emit_csv(m, dir / "sensitivity.csv", csv.str());
      write_file(dir / "sensitivity.dat", m.comment_line() + "\n" + dat.str());
      m.output(dir / "sensitivity.dat");
      if (failures > 0)
        emit_csv(m, dir / "sensitivity_errors.csv", errors.str());
      finish(m, dir);
      if (successes == 0)
        return 2;
    } else if (*fit) {
      if (*fit_const) {
        Manifest m("fit tau-constant", g);
        json out;
        if (fc_pwork || fc_prec || fc_trec || fc_obs) {
          if (!(fc_pwork && fc_prec && fc_trec && fc_obs))
            throw CLI::ValidationError("fit tau-constant",
                                       "single-trial mode needs --pwork --prec --trec --observed");
          const AthleteCapacity a = fc_opts.athlete();
          const RecoveryTrial t{*fc_pwork, *fc_prec, *fc_trec, *fc_obs, std::nullopt};
          out = to_json(fit_constant_tau(a, t));
          out["d_cp_w"] = a.cp - t.p_rec;
        } else {
          const auto ds = builtin_dataset(fc_opts.dataset.empty() ? "weigend" : fc_opts.dataset);
          m.set("dataset", ds.name);
          json fits = json::array();
          for (const auto &t : ds.trials) {
            json f = to_json(fit_constant_tau(ds.athlete, t));
            f["p_work_w"] = t.p_work;
            f["p_rec_w"] = t.p_rec;
            f["t_rec_s"] = t.t_rec;
            f["observed_ratio_pct"] = t.observed_ratio;
            f["d_cp_w"] = ds.athlete.cp - t.p_rec;
            fits.push_back(f);
          }
          out = {{"dataset", ds.name}, {"fits", fits}};
        }
        emit_json(m, dir / "fit_tau_constant.json", out, true);
        finish(m, dir);
      } else if (*fit_exp) {
        Manifest m("fit tau-exp", g);
        std::vector<TauPair> pairs;
        if (!fe_pairs.empty()) {
          m.set("pairs", fe_pairs);
          std::ifstream in(fe_pairs);
          if (!in)
            throw IoError("cannot read '" + fe_pairs + "'");
          std::string line;
          std::size_t row = 0;
          while (std::getline(in, line)) {
            ++row;
            if (line.empty() || line[0] == '#' || line.rfind("d_cp", 0) == 0)
              continue;
            const auto v = parse_grid(line);
            if (v.size() != 2)
              throw ParseError(row, 1, "expected d_cp_w,tau_s");
            pairs.push_back({v[0], v[1], 1.0});
          }
        } else {
          m.set("dataset", fe_dataset);
          pairs = tau_pairs(builtin_dataset(fe_dataset));
        }
        const auto f = fit_exponential_tau(pairs);
        json out = to_json(f);
        json pj = json::array();
        for (const auto &p : pairs)
          pj.push_back({{"d_cp_w", p.d_cp}, {"tau_s", p.tau}});
        out["pairs"] = pj;
        if (f.rank_deficient)
          std::cerr << "fit tau-exp: only " << f.distinct_d_cp
                    << " distinct D_CP values; (a, b, c) is not identifiable\n";
        emit_json(m, dir / "fit_tau_exp.json", out, true);
        finish(m, dir);
      } else if (*fit_chid) {
        Manifest m("fit tau-chidnok", g);
        const AthleteCapacity a{ch_cp, ch_w};
        IntermittentProtocol proto;
        proto.work_dur = ch_work;
        proto.rec_dur = ch_rest;
        json out;
        if (ch_prec || ch_tte) {
          if (!(ch_prec && ch_tte))
            throw CLI::ValidationError("fit tau-chidnok", "give both --prec and --tte");
          out = to_json(fit_chidnok_tau(a, ch_pwork, *ch_prec, *ch_tte, proto));
          out["p_rec_w"] = *ch_prec;
          out["observed_tte_s"] = *ch_tte;
        } else {
          json fits = json::array();
          for (const auto &c : chidnok_intermittent_conditions()) {
            json f{{"condition", c.label}, {"p_rec_w", c.p_rec}, {"observed_tte_s", c.observed_tte}};
            try {
              f.update(to_json(fit_chidnok_tau(a, ch_pwork, c.p_rec, c.observed_tte, proto)));
            } catch (const DomainError &e) {
              f["rejected"] = e.what();
            }
            fits.push_back(f);
          }
          out = {{"fits", fits}};
        }
        emit_json(m, dir / "fit_tau_chidnok.json", out, true);
        finish(m, dir);
      } else if (*fit_hyd) {
        Manifest m("fit hydraulic", g);
        const AthleteCapacity a = fh_opts.athlete();
        fh.seed = g.seed;
        fh.dt = g.dt;
        m.set("cp", a.cp);
        m.set("w_prime", a.w_prime);
        m.set("runs", std::to_string(fh.runs));
        m.set("evals", std::to_string(fh.evaluations_per_run));
        const auto r = fit_hydraulic(a, {}, fh);
        json out = to_json(r);
        if (!fh_opts.dataset.empty()) {
          StudyDataset ds = builtin_dataset(fh_opts.dataset);
          json rows = json::array();
          for (const auto &t : ds.trials)
            rows.push_back({{"p_rec_w", t.p_rec},
                            {"t_rec_s", t.t_rec},
                            {"predicted_pct",
                             recovery_ratio(HydraulicModel(r.config), t.p_work, t.p_rec,
                                            t.t_rec, g.dt)}});
          out["dataset_predictions"] = rows;
        }
        std::cout << "best objective " << r.objective << " (run " << r.best_run << ")\n";
        emit_json(m, dir / "fit_hydraulic.json", out, true);
        finish(m, dir);
      }
    }
  } catch (const CLI::Error &e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const IoError &e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const std::system_error &e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

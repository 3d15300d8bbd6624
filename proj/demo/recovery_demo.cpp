// Compares the recovery predictions of the W'bal variants and the hydraulic
// model for one study setup (default: caen).
//
//   recovery_demo [dataset]

#include "permod/datasets.hpp"
#include "permod/report.hpp"

#include <cstdio>
#include <iostream>

int main(int argc, char **argv) {
  try {
    const auto ds = permod::builtin_dataset(argc > 1 ? argv[1] : "caen");
    const auto table = permod::prediction_table(ds);

    std::printf("%s: CP %.0f W, W' %.0f J\n", ds.name.c_str(), ds.athlete.cp,
                ds.athlete.w_prime);
    std::printf("%7s %7s %7s %8s", "p_work", "p_rec", "t_rec", "observed");
    for (auto m : permod::all_models)
      std::printf(" %9s", permod::model_name(m));
    std::printf("\n");
    for (const auto &row : table.rows) {
      std::printf("%7.0f %7.0f %7.0f %8.1f", row.trial.p_work, row.trial.p_rec,
                  row.trial.t_rec, row.trial.observed_ratio);
      for (auto m : permod::all_models) {
        if (auto p = row[m])
          std::printf(" %9.1f", *p);
        else
          std::printf(" %9s", "-");
      }
      std::printf("\n");
    }
    for (auto m : permod::all_models) {
      const auto e = permod::residuals(table, m);
      if (!e.empty())
        std::printf("%-9s MAE %5.2f  RMSE %5.2f\n", permod::model_name(m), permod::mae(e),
                    permod::rmse(e));
    }
  } catch (const permod::Error &e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 0;
}

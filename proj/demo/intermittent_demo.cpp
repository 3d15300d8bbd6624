// 60 s work / 30 s recovery intervals until exhaustion, W'bal with a constant
// tau versus the hydraulic model, then the tau that reproduces each observed
// time to exhaustion.

#include "permod/datasets.hpp"
#include "permod/fitting.hpp"
#include "permod/protocol.hpp"

#include <cstdio>

int main() {
  const auto ds = permod::builtin_dataset("chidnok");
  const double p_work = 329.0;
  const permod::HydraulicModel hydraulic(*ds.fitted_hydraulic);

  std::printf("%-8s %6s %9s %10s %10s\n", "cond", "p_rec", "observed", "tau_fit", "hydraulic");
  for (const auto &c : permod::chidnok_intermittent_conditions()) {
    try {
      const auto fit = permod::fit_chidnok_tau(ds.athlete, p_work, c.p_rec, c.observed_tte);
      const double hyd = permod::intermittent_tte(hydraulic, p_work, c.p_rec, 60.0, 30.0);
      std::printf("%-8s %6.0f %9.0f %10.2f %10.1f\n", c.label.c_str(), c.p_rec,
                  c.observed_tte, fit.tau, hyd);
    } catch (const permod::DomainError &e) {
      std::printf("%-8s %6.0f %9.0f  rejected: %s\n", c.label.c_str(), c.p_rec,
                  c.observed_tte, e.what());
    }
  }
  return 0;
}

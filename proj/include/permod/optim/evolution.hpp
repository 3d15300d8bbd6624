#pragma once

// (mu + lambda) evolution strategy with log-normal self-adaptive step sizes,
// searching the unit box [0, 1]^n. Offspring are generated serially from one
// seeded RNG and evaluated in parallel, so results do not depend on the
// number of worker threads.

#include "permod/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace permod::optim {

struct EsOptions {
  std::size_t mu = 16;
  std::size_t lambda = 32;
  std::size_t max_evaluations = 10'000;
  double initial_sigma = 0.2;
  double min_sigma = 1e-6;
  double max_sigma = 0.5;
  std::uint64_t seed = 0;
  unsigned workers = 0; ///< 0 selects worker_count()
};

struct EsResult {
  std::vector<double> x; ///< best point in the unit box
  double fx = 0.0;
  std::size_t evaluations = 0;
  std::size_t generations = 0;
};

namespace detail {

struct Individual {
  std::vector<double> x;
  std::vector<double> sigma;
  double fx = 0.0;
  std::size_t birth = 0; ///< creation index, breaks fitness ties
};

/// Mirror into [0, 1].
inline double reflect_unit(double v) {
  v = std::fmod(std::abs(v), 2.0);
  return v > 1.0 ? 2.0 - v : v;
}

} // namespace detail

/// Minimizes f over [0, 1]^dim. f must be thread-safe.
template <class F>
EsResult evolve(F &&f, std::size_t dim, const EsOptions &opt) {
  using detail::Individual;
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const unsigned workers = opt.workers ? opt.workers : worker_count();
  const double tau_global = 1.0 / std::sqrt(2.0 * static_cast<double>(dim));
  const double tau_local = 1.0 / std::sqrt(2.0 * std::sqrt(static_cast<double>(dim)));

  std::size_t evaluations = 0;
  std::size_t births = 0;
  const auto evaluate = [&](std::vector<Individual> &batch) {
    parallel_for(batch.size(), [&](std::size_t i) { batch[i].fx = f(batch[i].x); },
                 workers);
    for (auto &ind : batch)
      if (!std::isfinite(ind.fx))
        ind.fx = std::numeric_limits<double>::max();
    evaluations += batch.size();
  };
  const auto by_fitness = [](const Individual &a, const Individual &b) {
    return a.fx < b.fx || (a.fx == b.fx && a.birth < b.birth);
  };

  std::vector<Individual> parents(std::max<std::size_t>(opt.mu, 1));
  for (auto &p : parents) {
    p.x.resize(dim);
    for (auto &v : p.x)
      v = unit(rng);
    p.sigma.assign(dim, opt.initial_sigma);
    p.birth = births++;
  }
  evaluate(parents);
  std::sort(parents.begin(), parents.end(), by_fitness);

  std::size_t generation = 0;
  const std::size_t lambda = std::max<std::size_t>(opt.lambda, 1);
  while (evaluations < opt.max_evaluations) {
    const std::size_t count = std::min(lambda, opt.max_evaluations - evaluations);
    std::uniform_int_distribution<std::size_t> pick(0, parents.size() - 1);
    std::vector<Individual> offspring(count);
    for (auto &child : offspring) {
      const Individual &a = parents[pick(rng)];
      const Individual &b = parents[pick(rng)];
      child.x.resize(dim);
      child.sigma.resize(dim);
      const double global = tau_global * normal(rng);
      for (std::size_t d = 0; d < dim; ++d) {
        const double base = unit(rng) < 0.5 ? a.x[d] : b.x[d];
        const double s = std::sqrt(a.sigma[d] * b.sigma[d]) *
                         std::exp(global + tau_local * normal(rng));
        child.sigma[d] = std::clamp(s, opt.min_sigma, opt.max_sigma);
        child.x[d] = detail::reflect_unit(base + child.sigma[d] * normal(rng));
      }
      child.birth = births++;
    }
    evaluate(offspring);
    parents.insert(parents.end(), std::make_move_iterator(offspring.begin()),
                   std::make_move_iterator(offspring.end()));
    std::sort(parents.begin(), parents.end(), by_fitness);
    parents.resize(std::min(parents.size(), std::max<std::size_t>(opt.mu, 1)));
    ++generation;
  }
  return {parents.front().x, parents.front().fx, evaluations, generation};
}

} // namespace permod::optim

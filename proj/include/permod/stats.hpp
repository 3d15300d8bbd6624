#pragma once

/**
 * @file stats.hpp
 * @brief Prediction-error metrics, AICc and the pooled bootstrap test.
 *
 * Residuals are predicted - observed, in percentage points.
 */

#include "permod/error.hpp"
#include "permod/parallel.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace permod {

struct Residual {
  double value = 0.0;
  std::string dataset;
  std::size_t row = 0;
};

/// Residuals tagged with their origin.
class ErrorVector {
public:
  ErrorVector() = default;
  explicit ErrorVector(std::vector<Residual> r) : residuals_(std::move(r)) {}

  void add(double value, std::string dataset, std::size_t row) {
    residuals_.push_back({value, std::move(dataset), row});
  }
  void append(const ErrorVector &other) {
    residuals_.insert(residuals_.end(), other.residuals_.begin(),
                      other.residuals_.end());
  }

  std::size_t size() const noexcept { return residuals_.size(); }
  bool empty() const noexcept { return residuals_.empty(); }
  const std::vector<Residual> &residuals() const noexcept { return residuals_; }

  std::vector<double> values() const {
    std::vector<double> v;
    v.reserve(residuals_.size());
    for (const auto &r : residuals_)
      v.push_back(r.value);
    return v;
  }

private:
  std::vector<Residual> residuals_;
};

namespace detail {
inline void require_nonempty(std::span<const double> e) {
  if (e.empty())
    throw DataError("metric of an empty error vector");
}
} // namespace detail

inline double mae(std::span<const double> e) {
  detail::require_nonempty(e);
  double s = 0.0;
  for (double x : e)
    s += std::abs(x);
  return s / static_cast<double>(e.size());
}

inline double mse(std::span<const double> e) {
  detail::require_nonempty(e);
  double s = 0.0;
  for (double x : e)
    s += x * x;
  return s / static_cast<double>(e.size());
}

inline double rmse(std::span<const double> e) { return std::sqrt(mse(e)); }

/// Sample standard deviation (n - 1 divisor) of |e|; 0 for a single value.
inline double sd_abs(std::span<const double> e) {
  const double m = mae(e);
  if (e.size() < 2)
    return 0.0;
  double s = 0.0;
  for (double x : e)
    s += (std::abs(x) - m) * (std::abs(x) - m);
  return std::sqrt(s / static_cast<double>(e.size() - 1));
}

/// n·ln(MSE) + 2k + 2k(k+1)/(n-k-1).
inline double aicc(std::span<const double> e, int k) {
  const auto n = static_cast<double>(e.size());
  if (k < 0 || !(n > k + 1.0))
    throw DataError("aicc requires n > k + 1 (n=" + std::to_string(e.size()) +
                    ", k=" + std::to_string(k) + ")");
  return n * std::log(mse(e)) + 2.0 * k + 2.0 * k * (k + 1.0) / (n - k - 1.0);
}

inline double mae(const ErrorVector &e) { return mae(e.values()); }
inline double rmse(const ErrorVector &e) { return rmse(e.values()); }
inline double sd_abs(const ErrorVector &e) { return sd_abs(e.values()); }
inline double aicc(const ErrorVector &e, int k) { return aicc(e.values(), k); }

enum class BootstrapStatistic { delta_mae, delta_rmse };

struct BootstrapOptions {
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 0;
  /// Resamples per RNG stream. Fixed so results do not depend on threads.
  std::size_t block = 1u << 14;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline double group_stat(BootstrapStatistic s, std::span<const double> g) {
  return s == BootstrapStatistic::delta_mae ? mae(g) : rmse(g);
}

} // namespace detail

/**
 * @brief Two-sided pooled bootstrap test of equal error distributions.
 *
 * Both groups are pooled; each resample draws groups of the original sizes
 * with replacement and records |stat(a*) - stat(b*)|. Returns the fraction
 * of resamples at or above the observed |stat(a) - stat(b)|.
 */
inline double bootstrap_test(std::span<const double> a, std::span<const double> b,
                             BootstrapStatistic statistic,
                             const BootstrapOptions &opt = {}) {
  detail::require_nonempty(a);
  detail::require_nonempty(b);
  if (opt.samples == 0 || opt.block == 0)
    throw DataError("bootstrap needs at least one sample");

  const double observed = std::abs(detail::group_stat(statistic, a) -
                                   detail::group_stat(statistic, b));
  std::vector<double> pool(a.begin(), a.end());
  pool.insert(pool.end(), b.begin(), b.end());

  const std::size_t blocks = (opt.samples + opt.block - 1) / opt.block;
  std::vector<std::size_t> hits(blocks, 0);
  parallel_for(blocks, [&](std::size_t blk) {
    std::mt19937_64 rng(detail::splitmix64(opt.seed ^ detail::splitmix64(blk)));
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::vector<double> ga(a.size()), gb(b.size());
    const std::size_t begin = blk * opt.block;
    const std::size_t end = std::min(opt.samples, begin + opt.block);
    std::size_t count = 0;
    for (std::size_t s = begin; s < end; ++s) {
      for (auto &x : ga)
        x = pool[pick(rng)];
      for (auto &x : gb)
        x = pool[pick(rng)];
      const double d = std::abs(detail::group_stat(statistic, ga) -
                                detail::group_stat(statistic, gb));
      if (d >= observed)
        ++count;
    }
    hits[blk] = count;
  });
  const std::size_t total = std::accumulate(hits.begin(), hits.end(), std::size_t{0});
  return static_cast<double>(total) / static_cast<double>(opt.samples);
}

inline double bootstrap_test(const ErrorVector &a, const ErrorVector &b,
                             BootstrapStatistic statistic,
                             const BootstrapOptions &opt = {}) {
  return bootstrap_test(a.values(), b.values(), statistic, opt);
}

} // namespace permod

#include "tps/uq/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tps/error.hpp"
#include "tps/rng.hpp"

namespace tps::uq {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double z_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidInput("probability must lie in (0, 1)");
  constexpr double kInvSqrt2Pi = 0.39894228040143267794;
  double lo = -40.0;
  double hi = 40.0;
  double z = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double f = normal_cdf(z) - p;
    if (std::abs(f) < 1e-15) break;
    if (f > 0.0) hi = z; else lo = z;
    const double pdf = kInvSqrt2Pi * std::exp(-0.5 * z * z);
    double next = z - f / pdf;
    // Newton step leaving the bracket falls back to bisection
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - z) < 1e-15 * std::max(1.0, std::abs(z))) {
      z = next;
      break;
    }
    z = next;
  }
  return z;
}

double effective_sample_size(std::span<const double> weights) {
  if (weights.empty()) throw InvalidInput("effective sample size of an empty weight set");
  double s2 = 0.0;
  for (double w : weights) s2 += w * w;
  if (!(s2 > 0.0)) throw InvalidInput("weights are all zero");
  return 1.0 / s2;
}

std::vector<std::size_t> systematic_resample(std::span<const double> weights, double u) {
  const std::size_t n = weights.size();
  std::vector<std::size_t> out;
  out.reserve(n);
  if (n == 0) return out;
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double cumulative = 0.0;
  std::size_t i = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double position = (u + static_cast<double>(j)) / static_cast<double>(n) * total;
    while (i + 1 < n && cumulative + weights[i] <= position) {
      cumulative += weights[i];
      ++i;
    }
    out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> systematic_resample(std::span<const double> weights, std::uint64_t seed) {
  Rng rng(seed);
  return systematic_resample(weights, rng.uniform());
}

double normalize_log_weights(std::span<const double> log_weights, std::span<double> weights) {
  double top = -std::numeric_limits<double>::infinity();
  for (double lw : log_weights) top = std::max(top, lw);
  if (!std::isfinite(top)) throw NumericalError("all particle weights vanished");
  double sum = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    weights[i] = std::exp(log_weights[i] - top);
    sum += weights[i];
  }
  for (double& w : weights) w /= sum;
  return top + std::log(sum);
}

}  // namespace tps::uq

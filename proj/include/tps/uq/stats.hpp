#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tps::uq {

/// Standard normal CDF.
double normal_cdf(double z);

/// z with normal_cdf(z) = p to 1e-12; InvalidInput unless 0 < p < 1.
double z_quantile(double p);

/// 1 / sum w_i^2 for normalized weights; InvalidInput when empty.
double effective_sample_size(std::span<const double> weights);

/// Systematic resampling with offset u in [0, 1): positions (u + j) / N.
std::vector<std::size_t> systematic_resample(std::span<const double> weights, double u);
std::vector<std::size_t> systematic_resample(std::span<const double> weights, std::uint64_t seed);

/// In-place exp-normalization of log-weights; returns log of the sum.
double normalize_log_weights(std::span<const double> log_weights, std::span<double> weights);

}  // namespace tps::uq

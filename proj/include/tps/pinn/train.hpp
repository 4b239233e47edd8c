#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "tps/pinn/loss.hpp"
#include "tps/pinn/network.hpp"

namespace tps::pinn {

struct AdamSettings {
  double beta1{0.9};
  double beta2{0.999};
  double epsilon{1e-8};

  friend bool operator==(const AdamSettings&, const AdamSettings&) = default;
};

/// Quasi-Newton refinement after the Adam phase. The collocation set is held
/// fixed for `resample_every` iterations (0: the whole phase), then redrawn
/// and the curvature memory reset.
struct LbfgsSettings {
  std::size_t iterations{0};
  std::size_t resample_every{0};
  std::size_t memory{20};
  std::size_t max_line_search{20};

  friend bool operator==(const LbfgsSettings&, const LbfgsSettings&) = default;
};

struct TrainingConfig {
  AdamSettings adam{};
  LbfgsSettings lbfgs{};
  double learning_rate{1e-3};
  double lr_decay{0.5};            ///< multiplier applied every `lr_decay_every` steps
  std::size_t lr_decay_every{5000};
  std::size_t iterations{30000};
  CollocationCounts collocation{};
  std::size_t resample_every{1000};
  std::size_t log_every{100};
  std::uint64_t seed{1234};
  LossOptions loss_options{};

  void validate() const;

  friend bool operator==(const TrainingConfig& a, const TrainingConfig& b) {
    return a.adam == b.adam && a.lbfgs == b.lbfgs && a.learning_rate == b.learning_rate && a.lr_decay == b.lr_decay &&
           a.lr_decay_every == b.lr_decay_every && a.iterations == b.iterations && a.collocation == b.collocation &&
           a.resample_every == b.resample_every && a.log_every == b.log_every && a.seed == b.seed &&
           a.loss_options.chunk_size == b.loss_options.chunk_size && a.loss_options.threads == b.loss_options.threads;
  }
};

/// Loss averaged over one logging window of `log_every` steps.
struct HistoryEntry {
  std::size_t step{};  ///< last step of the window (1-based)
  LossBreakdown mean;
};

struct TrainingReport {
  std::vector<HistoryEntry> history;  ///< one window per log_every steps, Adam then L-BFGS
  LossBreakdown final_loss;           ///< loss at the last step
  double wall_seconds{};
  std::uint64_t seed{};
};

/// Called after each logging window; for progress output only.
using TrainingObserver = std::function<void(const HistoryEntry&)>;

struct TrainingResult {
  NetworkParameters params;
  TrainingReport report;
};

/// Full-batch Adam over the current collocation set, redrawn every
/// `resample_every` steps. Deterministic in config.seed. Throws
/// NonFiniteError with the step index and loss breakdown if the loss blows up.
TrainingResult train(const NetworkArchitecture& arch, const NormalizationSpec& norm, const LossWeights& weights,
                     const TrainingConfig& config, const ThermalScenario& scenario,
                     const TrainingObserver& observer = {});

}  // namespace tps::pinn

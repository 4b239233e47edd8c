#include "tps/pinn/train.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include <fmt/format.h>

#include "lbfgs.hpp"
#include "tps/error.hpp"
#include "tps/rng.hpp"

namespace tps::pinn {

void TrainingConfig::validate() const {
  if (iterations == 0) throw InvalidInput("iterations must be > 0");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw InvalidInput("learning_rate must be > 0");
  if (!(lr_decay > 0.0) || lr_decay > 1.0) throw InvalidInput("lr_decay must be in (0, 1]");
  if (lr_decay_every == 0) throw InvalidInput("lr_decay_every must be > 0");
  if (resample_every == 0) throw InvalidInput("resample_every must be > 0");
  if (log_every == 0) throw InvalidInput("log_every must be > 0");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw InvalidInput("adam.beta1 and adam.beta2 must lie in [0, 1)");
  }
  if (!(adam.epsilon > 0.0)) throw InvalidInput("adam.epsilon must be > 0");
  if (loss_options.chunk_size == 0) throw InvalidInput("chunk_size must be > 0");
  if (lbfgs.iterations > 0 && (lbfgs.memory == 0 || lbfgs.max_line_search == 0)) {
    throw InvalidInput("lbfgs.memory and lbfgs.max_line_search must be > 0");
  }
}

namespace {

void add_into(LossBreakdown& acc, const LossBreakdown& x) {
  acc.pde += x.pde;
  acc.ic += x.ic;
  acc.bc_interface += x.bc_interface;
  acc.bc_surface += x.bc_surface;
  acc.total += x.total;
}

LossBreakdown scaled(LossBreakdown x, double f) {
  x.pde *= f;
  x.ic *= f;
  x.bc_interface *= f;
  x.bc_surface *= f;
  x.total *= f;
  return x;
}

}  // namespace

TrainingResult train(const NetworkArchitecture& arch, const NormalizationSpec& norm, const LossWeights& weights,
                     const TrainingConfig& config, const ThermalScenario& scenario, const TrainingObserver& observer) {
  arch.validate();
  norm.validate();
  weights.validate();
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  TrainingResult result{init_params(arch, derive_seed(config.seed, 0)), {}};
  NetworkParameters& params = result.params;
  TrainingReport& report = result.report;
  report.seed = config.seed;

  const Eigen::Index n = params.flat().size();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  double beta1_power = 1.0;
  double beta2_power = 1.0;

  CollocationSet colloc;
  LossBreakdown window{};
  std::size_t window_steps = 0;

  const auto flush = [&](std::size_t step) {
    if (window_steps == 0) return;
    report.history.push_back({step, scaled(window, 1.0 / static_cast<double>(window_steps))});
    if (observer) observer(report.history.back());
    window = {};
    window_steps = 0;
  };
  const auto record = [&](std::size_t step, const LossBreakdown& loss) {
    add_into(window, loss);
    ++window_steps;
    report.final_loss = loss;
    if (step % config.log_every == 0) flush(step);
  };

  for (std::size_t step = 1; step <= config.iterations; ++step) {
    if ((step - 1) % config.resample_every == 0) {
      const std::uint64_t draw = (step - 1) / config.resample_every;
      colloc = sample_collocation(norm, config.collocation, derive_seed(config.seed, draw + 1));
    }
    LossResult lr;
    try {
      lr = loss_and_grad(params, norm, weights, colloc, scenario, config.loss_options);
    } catch (const NonFiniteError& e) {
      throw NonFiniteError(e.term(), fmt::format("training diverged at step {}: {}", step, e.what()));
    }
    if (!std::isfinite(lr.loss.total) || !lr.gradient.allFinite()) {
      throw NonFiniteError("loss", fmt::format("training diverged at step {}: pde={} ic={} bc_interface={} "
                                               "bc_surface={}",
                                               step, lr.loss.pde, lr.loss.ic, lr.loss.bc_interface,
                                               lr.loss.bc_surface));
    }

    const double rate = config.learning_rate *
                        std::pow(config.lr_decay, static_cast<double>((step - 1) / config.lr_decay_every));
    const AdamSettings& a = config.adam;
    beta1_power *= a.beta1;
    beta2_power *= a.beta2;
    m = a.beta1 * m + (1.0 - a.beta1) * lr.gradient;
    v = a.beta2 * v + (1.0 - a.beta2) * lr.gradient.cwiseAbs2();
    const double step_size = rate / (1.0 - beta1_power);
    const double v_correction = 1.0 / (1.0 - beta2_power);
    params.flat().array() -= step_size * m.array() / ((v.array() * v_correction).sqrt() + a.epsilon);

    record(step, lr.loss);
  }
  flush(config.iterations);

  if (config.lbfgs.iterations > 0) {
    std::uint64_t draw = (config.iterations - 1) / config.resample_every + 1;
    const std::size_t block = config.lbfgs.resample_every == 0 ? config.lbfgs.iterations : config.lbfgs.resample_every;
    LossBreakdown last{};
    const detail::Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
      NetworkParameters trial(arch, x);
      if (!trial.all_finite()) return std::numeric_limits<double>::infinity();
      LossResult lr;
      try {
        lr = loss_and_grad(trial, norm, weights, colloc, scenario, config.loss_options);
      } catch (const NonFiniteError&) {
        return std::numeric_limits<double>::infinity();
      }
      if (!lr.gradient.allFinite()) return std::numeric_limits<double>::infinity();
      grad = std::move(lr.gradient);
      last = lr.loss;
      return lr.loss.total;
    };
    Eigen::VectorXd x = params.flat();
    std::size_t done = 0;
    while (done < config.lbfgs.iterations) {
      colloc = sample_collocation(norm, config.collocation, derive_seed(config.seed, draw + 1));
      ++draw;
      const std::size_t budget = std::min(block, config.lbfgs.iterations - done);
      const std::size_t offset = config.iterations + done;
      const auto outcome = detail::lbfgs_minimize(
          objective, x, budget, config.lbfgs.memory, config.lbfgs.max_line_search,
          [&](std::size_t it, double) { record(offset + it + 1, last); });
      if (!std::isfinite(outcome.value)) throw NonFiniteError("loss", "L-BFGS refinement produced a non-finite loss");
      done += outcome.iterations;
      if (outcome.stalled || outcome.iterations < budget) break;
    }
    flush(config.iterations + done);
    params.flat() = x;
  }
  params.require_finite();
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace tps::pinn

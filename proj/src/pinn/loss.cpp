#include "tps/pinn/loss.hpp"

#include <array>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include "tps/ad/tape.hpp"
#include "tps/error.hpp"

namespace tps::pinn {

void LossWeights::validate() const {
  for (double w : {pde, ic, bc_interface, bc_surface}) {
    if (!std::isfinite(w) || w < 0.0) throw InvalidInput("loss weights must be finite and >= 0");
  }
  if (pde + ic + bc_interface + bc_surface <= 0.0) throw InvalidInput("at least one loss weight must be > 0");
}

namespace {

enum class Category { pde, ic, bc_interface, bc_surface };

Eigen::MatrixXd uniform_points(const NormalizationSpec& norm, std::size_t n, std::mt19937_64& engine) {
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(kInputDim), static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < pts.cols(); ++j) {
    for (std::size_t i = 0; i < kInputDim; ++i) {
      std::uniform_real_distribution<double> dist(norm.inputs[i].lo, norm.inputs[i].hi);
      pts(static_cast<Eigen::Index>(i), j) = dist(engine);
    }
  }
  return pts;
}

}  // namespace

CollocationSet sample_collocation(const NormalizationSpec& norm, const CollocationCounts& counts, std::uint64_t seed) {
  norm.validate();
  std::mt19937_64 engine(seed);
  CollocationSet set;
  set.interior = uniform_points(norm, counts.interior, engine);
  set.initial = uniform_points(norm, counts.initial, engine);
  set.initial.row(1).setConstant(norm.inputs[1].lo);
  set.interface = uniform_points(norm, counts.interface, engine);
  set.interface.row(0).setConstant(norm.inputs[0].lo);
  set.surface = uniform_points(norm, counts.surface, engine);
  set.surface.row(0).setConstant(norm.inputs[0].hi);
  return set;
}

double pde_residual(const ad::ScalarField& field, std::span<const double> point, double alpha) {
  const ad::InputDerivs d = ad::eval_with_input_derivs(field, point);
  return d.dt - alpha * d.dxx;
}

double pde_residual(const NetworkParameters& params, const NormalizationSpec& norm, double x, double t,
                    const MaterialProperties& q) {
  const std::array<double, kInputDim> point{x, t, q.rho, q.k, q.cp};
  return pde_residual(network_field(params, norm), point, q.alpha());
}

namespace {

void check_setup(const NormalizationSpec& norm, const LossWeights& weights, const CollocationSet& colloc,
                 const ThermalScenario& scenario) {
  norm.validate();
  weights.validate();
  scenario.validate();
  if (weights.bc_surface > 0.0 && scenario.heat_flux == 0.0) {
    throw ConfigError("surface flux residual is normalized by q_s; set w_bcL = 0 when heat_flux = 0");
  }
  auto require = [](double w, const Eigen::MatrixXd& pts, const char* name) {
    if (w > 0.0 && pts.cols() == 0) throw InvalidInput(std::string("no collocation points for weighted term ") + name);
    if (pts.cols() > 0 && pts.rows() != static_cast<Eigen::Index>(kInputDim)) {
      throw InvalidInput(std::string("collocation points for ") + name + " must have 5 rows");
    }
  };
  require(weights.pde, colloc.interior, "pde");
  require(weights.ic, colloc.initial, "ic");
  require(weights.bc_interface, colloc.interface, "bc_interface");
  require(weights.bc_surface, colloc.surface, "bc_surface");
}

// Factors turning normalized-coordinate derivatives into the residuals above.
struct Scales {
  double dx;        // d x_n / dx
  double dt;        // d t_n / dt
  double t_end;
  double length;
  double temp_scale;
  double heat_flux;

  Scales(const NormalizationSpec& norm, const ThermalScenario& scenario)
      : dx(2.0 / norm.inputs[0].width()),
        dt(2.0 / norm.inputs[1].width()),
        t_end(scenario.duration),
        length(scenario.thickness),
        temp_scale(norm.temp_scale),
        heat_flux(scenario.heat_flux) {}
};

}  // namespace

LossBreakdown field_loss(const ad::ScalarField& field, const NormalizationSpec& norm, const LossWeights& weights,
                         const CollocationSet& colloc, const ThermalScenario& scenario) {
  check_setup(norm, weights, colloc, scenario);
  LossBreakdown out;
  auto mean_square = [&](const Eigen::MatrixXd& pts, auto&& residual) {
    if (pts.cols() == 0) return 0.0;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < pts.cols(); ++j) {
      const Eigen::VectorXd p = pts.col(j);
      const ad::InputDerivs d = ad::eval_with_input_derivs(field, std::span<const double>(p.data(), kInputDim));
      const double r = residual(d, p);
      acc += r * r;
    }
    return acc / static_cast<double>(pts.cols());
  };
  const double t0 = norm.initial_temp;
  const double ts = norm.temp_scale;
  const double t_end = scenario.duration;
  const double length = scenario.thickness;
  const double flux = scenario.heat_flux;

  if (weights.pde > 0.0) {
    out.pde = mean_square(colloc.interior, [&](const ad::InputDerivs& d, const Eigen::VectorXd& p) {
      const double alpha = p(3) / (p(2) * p(4));
      return (d.dt - alpha * d.dxx) * t_end / ts;
    });
  }
  if (weights.ic > 0.0) {
    out.ic = mean_square(colloc.initial, [&](const ad::InputDerivs& d, const Eigen::VectorXd&) {
      return (d.value - t0) / ts;
    });
  }
  if (weights.bc_interface > 0.0) {
    out.bc_interface = mean_square(colloc.interface, [&](const ad::InputDerivs& d, const Eigen::VectorXd&) {
      return length * d.dx / ts;
    });
  }
  if (weights.bc_surface > 0.0) {
    out.bc_surface = mean_square(colloc.surface, [&](const ad::InputDerivs& d, const Eigen::VectorXd& p) {
      return (p(3) * d.dx - flux) / flux;
    });
  }
  out.total = weights.pde * out.pde + weights.ic * out.ic + weights.bc_interface * out.bc_interface +
              weights.bc_surface * out.bc_surface;
  return out;
}

namespace {

struct ChunkTask {
  Category category;
  const Eigen::MatrixXd* points;
  Eigen::Index start;
  Eigen::Index count;
  double factor;  // weight / category size
};

struct ChunkResult {
  double sum_squares{};  // unweighted
  Eigen::VectorXd gradient;
};

ad::Channels channels_for(Category c) {
  switch (c) {
    case Category::pde:
      return ad::Channels::full();
    case Category::ic:
      return ad::Channels::value_only();
    default:
      return ad::Channels::first_x();
  }
}

ChunkResult run_chunk(const NetworkParameters& params, const NormalizationSpec& norm, const Scales& sc,
                      const ChunkTask& task) {
  const ad::Channels ch = channels_for(task.category);
  const Eigen::Index batch = task.count;
  const Eigen::Index nch = ch.count();
  ad::Tape tape;

  std::vector<ad::NodeId> w_nodes;
  std::vector<ad::NodeId> b_nodes;
  for (std::size_t l = 0; l < params.layer_count(); ++l) {
    w_nodes.push_back(tape.variable(ad::Matrix(params.weight(l))));
    b_nodes.push_back(tape.variable(ad::Matrix(params.bias(l))));
  }

  // Inputs and their seeds in normalized coordinates.
  const auto pts = task.points->middleCols(task.start, batch);
  ad::Matrix input = ad::Matrix::Zero(static_cast<Eigen::Index>(kInputDim), nch * batch);
  for (std::size_t i = 0; i < kInputDim; ++i) {
    const Range& r = norm.inputs[i];
    input.row(static_cast<Eigen::Index>(i)).head(batch) =
        ((pts.row(static_cast<Eigen::Index>(i)).array() - r.lo) * (2.0 / r.width()) - 1.0).matrix();
  }
  if (ch.dx) input.row(0).segment(ch.block_dx() * batch, batch).setOnes();
  if (ch.dt) input.row(1).segment(ch.block_dt() * batch, batch).setOnes();

  ad::NodeId h = tape.constant(std::move(input));
  const std::size_t last = params.layer_count() - 1;
  for (std::size_t l = 0; l < last; ++l) {
    const ad::NodeId z = tape.affine(w_nodes[l], b_nodes[l], h, batch);
    h = tape.dual_tanh(z, ch, batch);
  }
  const ad::NodeId out = tape.affine(w_nodes[last], b_nodes[last], h, batch);

  ad::NodeId residual{};
  switch (task.category) {
    case Category::pde: {
      // r t_end / T_scale = t_end dt_n/dt u_t - alpha t_end (dx_n/dx)^2 u_xx
      const ad::NodeId u_t = tape.cols(out, ch.block_dt() * batch, batch);
      const ad::NodeId u_xx = tape.cols(out, ch.block_dxx() * batch, batch);
      const ad::Matrix alpha = (pts.row(3).array() / (pts.row(2).array() * pts.row(4).array())).matrix();
      const ad::NodeId rate = tape.scale(u_t, sc.t_end * sc.dt);
      const ad::NodeId diffusion = tape.mul_const(u_xx, alpha * (sc.t_end * sc.dx * sc.dx));
      residual = tape.sub(rate, diffusion);
      tape.label(residual, "pde");
      break;
    }
    case Category::ic:
      residual = tape.cols(out, 0, batch);
      tape.label(residual, "ic");
      break;
    case Category::bc_interface: {
      const ad::NodeId u_x = tape.cols(out, ch.block_dx() * batch, batch);
      residual = tape.scale(u_x, sc.length * sc.dx);
      tape.label(residual, "bc_interface");
      break;
    }
    case Category::bc_surface: {
      const ad::NodeId u_x = tape.cols(out, ch.block_dx() * batch, batch);
      const ad::Matrix k_row = pts.row(3) * (sc.temp_scale * sc.dx / sc.heat_flux);
      residual = tape.shift(tape.mul_const(u_x, k_row), -1.0);
      tape.label(residual, "bc_surface");
      break;
    }
  }
  const ad::NodeId term = tape.sum_squares(residual, task.factor);
  tape.backward(term);

  ChunkResult result;
  result.sum_squares = tape.value(residual).squaredNorm();
  result.gradient.resize(params.flat().size());
  for (std::size_t l = 0; l < params.layer_count(); ++l) {
    const LayerShape& s = params.layer(l);
    const ad::Matrix gw = tape.gradient(w_nodes[l]);
    Eigen::Map<NetworkParameters::RowMajor>(result.gradient.data() + s.weight_offset, s.rows, s.cols) = gw;
    result.gradient.segment(s.bias_offset, s.rows) = tape.gradient(b_nodes[l]).col(0);
  }
  return result;
}

}  // namespace

LossResult loss_and_grad(const NetworkParameters& params, const NormalizationSpec& norm, const LossWeights& weights,
                         const CollocationSet& colloc, const ThermalScenario& scenario, const LossOptions& options) {
  check_setup(norm, weights, colloc, scenario);
  params.require_finite();
  const Scales sc(norm, scenario);
  const auto chunk = static_cast<Eigen::Index>(std::max<std::size_t>(1, options.chunk_size));

  std::vector<ChunkTask> tasks;
  auto enqueue = [&](Category c, const Eigen::MatrixXd& pts, double w) {
    if (w <= 0.0) return;
    const double factor = w / static_cast<double>(pts.cols());
    for (Eigen::Index s = 0; s < pts.cols(); s += chunk) {
      tasks.push_back({c, &pts, s, std::min(chunk, pts.cols() - s), factor});
    }
  };
  enqueue(Category::pde, colloc.interior, weights.pde);
  enqueue(Category::ic, colloc.initial, weights.ic);
  enqueue(Category::bc_interface, colloc.interface, weights.bc_interface);
  enqueue(Category::bc_surface, colloc.surface, weights.bc_surface);

  std::vector<ChunkResult> results(tasks.size());
  const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(tasks.size())));
  if (threads == 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) results[i] = run_chunk(params, norm, sc, tasks[i]);
  } else {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = static_cast<std::size_t>(w); i < tasks.size(); i += static_cast<std::size_t>(threads)) {
            results[i] = run_chunk(params, norm, sc, tasks[i]);
          }
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  // Fixed-order reduction keeps the result independent of the thread count.
  LossResult out;
  out.gradient = Eigen::VectorXd::Zero(params.flat().size());
  std::array<double, 4> sums{};
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    sums[static_cast<std::size_t>(tasks[i].category)] += results[i].sum_squares;
    out.gradient += results[i].gradient;
  }
  auto mean = [](double s, const Eigen::MatrixXd& pts) { return pts.cols() > 0 ? s / static_cast<double>(pts.cols()) : 0.0; };
  out.loss.pde = mean(sums[0], colloc.interior);
  out.loss.ic = mean(sums[1], colloc.initial);
  out.loss.bc_interface = mean(sums[2], colloc.interface);
  out.loss.bc_surface = mean(sums[3], colloc.surface);
  out.loss.total = weights.pde * out.loss.pde + weights.ic * out.loss.ic +
                   weights.bc_interface * out.loss.bc_interface + weights.bc_surface * out.loss.bc_surface;
  return out;
}

}  // namespace tps::pinn

#include "tps/pinn/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "tps/ad/kernels.hpp"
#include "tps/error.hpp"

namespace tps::pinn {

void NetworkArchitecture::validate() const {
  if (hidden.empty()) throw InvalidInput("network needs at least one hidden layer");
  for (int w : hidden) {
    if (w < 1) throw InvalidInput("hidden layer widths must be >= 1");
  }
}

std::vector<int> NetworkArchitecture::layer_sizes() const {
  std::vector<int> sizes;
  sizes.push_back(static_cast<int>(kInputDim));
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  return sizes;
}

std::size_t NetworkArchitecture::parameter_count() const {
  const auto sizes = layer_sizes();
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    n += static_cast<std::size_t>(sizes[l + 1]) * static_cast<std::size_t>(sizes[l] + 1);
  }
  return n;
}

Range three_sigma_range(double mean, double std) {
  return {std::max(mean - 3.0 * std, 1e-6 * std::abs(mean)), mean + 3.0 * std};
}

NormalizationSpec NormalizationSpec::for_scenario(const ThermalScenario& scenario, Range rho, Range k, Range cp,
                                                  double temp_scale) {
  NormalizationSpec spec;
  spec.inputs = {Range{0.0, scenario.thickness}, Range{0.0, scenario.duration}, rho, k, cp};
  spec.initial_temp = scenario.initial_temp;
  spec.temp_scale = temp_scale;
  spec.validate();
  return spec;
}

void NormalizationSpec::validate() const {
  static constexpr std::array<const char*, kInputDim> names{"x", "t", "rho", "k", "cp"};
  for (std::size_t i = 0; i < kInputDim; ++i) {
    const Range& r = inputs[i];
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || !(r.hi > r.lo)) {
      throw InvalidInput(std::string("normalization range for ") + names[i] + " must have positive width");
    }
  }
  if (!std::isfinite(temp_scale) || temp_scale <= 0.0) throw InvalidInput("temp_scale must be > 0");
  if (!std::isfinite(initial_temp)) throw InvalidInput("initial_temp must be finite");
}

std::array<double, kInputDim> NormalizationSpec::normalize(const std::array<double, kInputDim>& physical) const {
  std::array<double, kInputDim> out{};
  for (std::size_t i = 0; i < kInputDim; ++i) out[i] = inputs[i].normalize(physical[i]);
  return out;
}

std::array<double, kInputDim> NormalizationSpec::denormalize(const std::array<double, kInputDim>& normalized) const {
  std::array<double, kInputDim> out{};
  for (std::size_t i = 0; i < kInputDim; ++i) out[i] = inputs[i].denormalize(normalized[i]);
  return out;
}

bool NormalizationSpec::clamp(std::array<double, kInputDim>& physical) const {
  bool moved = false;
  for (std::size_t i = 0; i < kInputDim; ++i) {
    const double c = std::clamp(physical[i], inputs[i].lo, inputs[i].hi);
    moved = moved || c != physical[i];
    physical[i] = c;
  }
  return moved;
}

NetworkParameters::NetworkParameters(NetworkArchitecture arch) : arch_(std::move(arch)) {
  arch_.validate();
  const auto sizes = arch_.layer_sizes();
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    LayerShape shape;
    shape.rows = sizes[l + 1];
    shape.cols = sizes[l];
    shape.weight_offset = offset;
    offset += shape.rows * shape.cols;
    shape.bias_offset = offset;
    offset += shape.rows;
    layers_.push_back(shape);
  }
  flat_ = Eigen::VectorXd::Zero(offset);
}

NetworkParameters::NetworkParameters(NetworkArchitecture arch, Eigen::VectorXd flat)
    : NetworkParameters(std::move(arch)) {
  if (flat.size() != flat_.size()) {
    throw InvalidInput("parameter vector has " + std::to_string(flat.size()) + " entries, architecture needs " +
                       std::to_string(flat_.size()));
  }
  flat_ = std::move(flat);
}

Eigen::Map<const NetworkParameters::RowMajor> NetworkParameters::weight(std::size_t i) const {
  const LayerShape& s = layers_.at(i);
  return {flat_.data() + s.weight_offset, s.rows, s.cols};
}

Eigen::Map<NetworkParameters::RowMajor> NetworkParameters::weight(std::size_t i) {
  const LayerShape& s = layers_.at(i);
  return {flat_.data() + s.weight_offset, s.rows, s.cols};
}

Eigen::Map<const Eigen::VectorXd> NetworkParameters::bias(std::size_t i) const {
  const LayerShape& s = layers_.at(i);
  return {flat_.data() + s.bias_offset, s.rows};
}

Eigen::Map<Eigen::VectorXd> NetworkParameters::bias(std::size_t i) {
  const LayerShape& s = layers_.at(i);
  return {flat_.data() + s.bias_offset, s.rows};
}

void NetworkParameters::require_finite() const {
  for (Eigen::Index i = 0; i < flat_.size(); ++i) {
    if (!std::isfinite(flat_[i])) {
      throw NumericalError("network parameter " + std::to_string(i) + " is not finite");
    }
  }
}

NetworkParameters init_params(const NetworkArchitecture& arch, std::uint64_t seed) {
  NetworkParameters params(arch);
  std::mt19937_64 engine(seed);
  for (std::size_t l = 0; l < params.layer_count(); ++l) {
    const LayerShape& s = params.layer(l);
    const double limit = std::sqrt(6.0 / static_cast<double>(s.rows + s.cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    auto w = params.weight(l);
    for (Eigen::Index r = 0; r < s.rows; ++r) {
      for (Eigen::Index c = 0; c < s.cols; ++c) w(r, c) = dist(engine);
    }
  }
  return params;
}

namespace {

std::array<double, kInputDim> physical_point(double x, double t, const MaterialProperties& q) {
  return {x, t, q.rho, q.k, q.cp};
}

}  // namespace

double forward(const NetworkParameters& params, const NormalizationSpec& norm, double x, double t,
               const MaterialProperties& q, bool* clamped) {
  params.require_finite();
  auto p = physical_point(x, t, q);
  const bool moved = norm.clamp(p);
  if (clamped != nullptr) *clamped = moved;
  const auto u = norm.normalize(p);

  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(u.data(), kInputDim);
  const std::size_t last = params.layer_count() - 1;
  for (std::size_t l = 0; l < last; ++l) {
    Eigen::VectorXd z = params.weight(l) * a + params.bias(l);
    a = ad::fast_tanh(z.array()).matrix();
  }
  const double out = params.weight(last).row(0).dot(a) + params.bias(last)(0);
  return norm.initial_temp + norm.temp_scale * out;
}

std::vector<double> predict_batch(const NetworkParameters& params, const NormalizationSpec& norm,
                                  std::span<const QueryPoint> points, std::size_t* clamped_count) {
  params.require_finite();
  std::vector<double> out(points.size());
  std::size_t clamped = 0;
  constexpr std::size_t kChunk = 4096;
  const std::size_t last = params.layer_count() - 1;

  Eigen::MatrixXd a;
  Eigen::MatrixXd z;
  for (std::size_t start = 0; start < points.size(); start += kChunk) {
    const std::size_t n = std::min(kChunk, points.size() - start);
    a.resize(static_cast<Eigen::Index>(kInputDim), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
      const QueryPoint& qp = points[start + j];
      auto p = physical_point(qp.x, qp.t, qp.q);
      if (norm.clamp(p)) ++clamped;
      const auto u = norm.normalize(p);
      for (std::size_t i = 0; i < kInputDim; ++i) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = u[i];
    }
    for (std::size_t l = 0; l < last; ++l) {
      z.noalias() = params.weight(l) * a;
      z.colwise() += params.bias(l);
      a = ad::fast_tanh(z.array()).matrix();
    }
    const Eigen::RowVectorXd result = (params.weight(last).row(0) * a).array() + params.bias(last)(0);
    for (std::size_t j = 0; j < n; ++j) {
      out[start + j] = norm.initial_temp + norm.temp_scale * result(static_cast<Eigen::Index>(j));
    }
  }
  if (clamped_count != nullptr) *clamped_count = clamped;
  return out;
}

ad::ScalarField network_field(const NetworkParameters& params, const NormalizationSpec& norm) {
  params.require_finite();
  return [params, norm](std::span<const ad::Dual2> in) {
    if (in.size() != kInputDim) throw InvalidInput("network field expects (x, t, rho, k, cp)");
    std::vector<ad::Dual2> a(kInputDim);
    for (std::size_t i = 0; i < kInputDim; ++i) {
      const Range& r = norm.inputs[i];
      a[i] = (in[i] - r.lo) * (2.0 / r.width()) - 1.0;
    }
    for (std::size_t l = 0; l < params.layer_count(); ++l) {
      const auto w = params.weight(l);
      const auto b = params.bias(l);
      const bool hidden = l + 1 < params.layer_count();
      std::vector<ad::Dual2> next(static_cast<std::size_t>(w.rows()));
      for (Eigen::Index r = 0; r < w.rows(); ++r) {
        ad::Dual2 acc = b(r);
        for (Eigen::Index c = 0; c < w.cols(); ++c) acc += w(r, c) * a[static_cast<std::size_t>(c)];
        next[static_cast<std::size_t>(r)] = hidden ? ad::tanh(acc) : acc;
      }
      a = std::move(next);
    }
    return norm.initial_temp + norm.temp_scale * a[0];
  };
}

}  // namespace tps::pinn

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "tps/ad/dual.hpp"
#include "tps/ad/input_derivs.hpp"
#include "tps/ad/tape.hpp"
#include "tps/error.hpp"

using namespace tps::ad;

namespace {

struct TinyNet {
  Eigen::MatrixXd w1, w2;
  Eigen::VectorXd b1, b2;
};

TinyNet random_net(std::uint64_t seed, int inputs, int width) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.8);
  TinyNet net{Eigen::MatrixXd(width, inputs), Eigen::MatrixXd(1, width), Eigen::VectorXd(width), Eigen::VectorXd(1)};
  for (Eigen::Index i = 0; i < net.w1.size(); ++i) net.w1.data()[i] = n(rng);
  for (Eigen::Index i = 0; i < net.w2.size(); ++i) net.w2.data()[i] = n(rng);
  for (Eigen::Index i = 0; i < net.b1.size(); ++i) net.b1[i] = n(rng);
  net.b2[0] = n(rng);
  return net;
}

ScalarField as_field(const TinyNet& net) {
  return [net](std::span<const Dual2> in) {
    Dual2 out = net.b2[0];
    for (Eigen::Index r = 0; r < net.w1.rows(); ++r) {
      Dual2 z = net.b1[r];
      for (Eigen::Index c = 0; c < net.w1.cols(); ++c) z += net.w1(r, c) * in[static_cast<std::size_t>(c)];
      out += net.w2(0, r) * tanh(z);
    }
    return out;
  };
}

double rel_gap(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace

TEST_CASE("polynomial field derivatives") {
  const ScalarField f = [](std::span<const Dual2> p) { return p[0] * p[0]; };
  const std::vector<double> pt{0.3, 2.0};
  const InputDerivs d = eval_with_input_derivs(f, pt);
  CHECK(d.value == doctest::Approx(0.09).epsilon(1e-15));
  CHECK(d.dt == 0.0);
  CHECK(d.dx == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(d.dxx == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(fd_check(f, pt, 1e-4) < 1e-8);
}

TEST_CASE("t sin x") {
  const ScalarField f = [](std::span<const Dual2> p) { return p[1] * sin(p[0]); };
  const std::vector<double> pt{0.7, 1.5};
  const InputDerivs d = eval_with_input_derivs(f, pt);
  CHECK(d.dt == doctest::Approx(std::sin(0.7)).epsilon(1e-14));
  CHECK(d.dxx == doctest::Approx(-1.5 * std::sin(0.7)).epsilon(1e-14));
  CHECK(d.dx == doctest::Approx(1.5 * std::cos(0.7)).epsilon(1e-14));
}

TEST_CASE("composition of polynomials follows the symbolic chain rule") {
  // f(g(x)) with g = x^3 + 2x, f = g^2 + 3g
  const ScalarField f = [](std::span<const Dual2> p) {
    const Dual2 g = p[0] * p[0] * p[0] + 2.0 * p[0];
    return g * g + 3.0 * g;
  };
  for (double x : {-1.3, 0.2, 0.9, 2.5}) {
    const double g = x * x * x + 2 * x, g1 = 3 * x * x + 2, g2 = 6 * x;
    const double d1 = (2 * g + 3) * g1;
    const double d2 = 2 * g1 * g1 + (2 * g + 3) * g2;
    const std::vector<double> pt{x, 0.0};
    const InputDerivs d = eval_with_input_derivs(f, pt);
    CHECK(rel_gap(d.dx, d1) < 1e-12);
    CHECK(rel_gap(d.dxx, d2) < 1e-12);
  }
}

TEST_CASE("constant field has zero derivatives in both modes") {
  const ScalarField f = [](std::span<const Dual2>) { return Dual2(4.2); };
  const std::vector<double> pt{0.1, 0.2};
  CHECK(fd_check(f, pt, 1e-4) == 0.0);
  CHECK_THROWS_AS(fd_check(f, pt, 0.0), tps::InvalidInput);
  const std::vector<double> short_pt{0.1};
  CHECK_THROWS_AS(eval_with_input_derivs(f, short_pt), tps::InvalidInput);
}

TEST_CASE("tanh network derivatives agree with central differences") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const ScalarField f = as_field(random_net(seed, 4, 8));
    std::mt19937_64 rng(seed + 100);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 20; ++k) {
      const std::vector<double> pt{u(rng), u(rng), u(rng), u(rng)};
      CHECK(fd_check(f, pt, 1e-4) < 1e-5);
    }
  }
}

TEST_CASE("reverse mode: quadratic and affine least squares") {
  const ScalarProgram square = [](Tape& tape, NodeId theta) { return tape.sum_squares(theta); };
  Vector theta(1);
  theta << 1.7;
  CHECK(grad_params(square, theta)[0] == doctest::Approx(3.4).epsilon(1e-15));

  // theta = (w0, w1, b); loss = (w.x + b - y)^2
  const Eigen::Vector2d x(0.4, -1.2);
  const double y = 0.9;
  const ScalarProgram lsq = [&](Tape& tape, NodeId th) {
    const NodeId w = tape.reshape(tape.rows(th, 0, 2), 1, 2);
    const NodeId b = tape.rows(th, 2, 1);
    const NodeId in = tape.constant(x);
    const NodeId pred = tape.affine(w, b, in);
    return tape.sum_squares(tape.shift(pred, -y));
  };
  Vector p(3);
  p << 0.3, -0.5, 0.2;
  const double r = p[0] * x[0] + p[1] * x[1] + p[2] - y;
  const Vector g = grad_params(lsq, p);
  CHECK(g[0] == doctest::Approx(2 * r * x[0]).epsilon(1e-14));
  CHECK(g[1] == doctest::Approx(2 * r * x[1]).epsilon(1e-14));
  CHECK(g[2] == doctest::Approx(2 * r).epsilon(1e-14));
}

TEST_CASE("reverse derivative equals the forward first derivative") {
  // f(theta) = exp(tanh(0.7 theta + 0.1)) / (1 + theta^2)
  const ScalarProgram prog = [](Tape& tape, NodeId th) {
    const NodeId inner = tape.exp(tape.tanh(tape.shift(tape.scale(th, 0.7), 0.1)));
    const NodeId denom = tape.shift(tape.mul(th, th), 1.0);
    return tape.sum(tape.div(inner, denom));
  };
  for (double v : {-2.0, -0.3, 0.5, 1.9}) {
    Vector theta(1);
    theta << v;
    const Dual2 x = Dual2::variable(v);
    const Dual2 fwd = exp(tanh(0.7 * x + 0.1)) / (1.0 + x * x);
    CHECK(rel_gap(grad_params(prog, theta)[0], fwd.d1) < 1e-12);
  }
}

TEST_CASE("dual tanh on the tape matches scalar dual numbers") {
  // one unit: z = w . u + b over a batch of 3 points with x-derivative channels
  const Eigen::Index batch = 3;
  const Channels ch = Channels::full();
  Eigen::MatrixXd stacked(1, batch * ch.count());
  const double xs[3] = {-0.4, 0.1, 0.8};
  const double w = 1.3, b = -0.2, wt = 0.6, t = 0.35;
  for (Eigen::Index j = 0; j < batch; ++j) {
    stacked(0, j) = w * xs[j] + wt * t + b;  // value
    stacked(0, batch + j) = w;               // dz/dx
    stacked(0, 2 * batch + j) = 0.0;         // d2z/dx2
    stacked(0, 3 * batch + j) = wt;          // dz/dt
  }
  Tape tape;
  const NodeId z = tape.variable(stacked);
  const NodeId h = tape.dual_tanh(z, ch, batch);
  for (Eigen::Index j = 0; j < batch; ++j) {
    const Dual2 zx{stacked(0, j), w, 0.0};
    const Dual2 hx = tanh(zx);
    CHECK(tape.value(h)(0, j) == doctest::Approx(hx.v).epsilon(1e-14));
    CHECK(tape.value(h)(0, batch + j) == doctest::Approx(hx.d1).epsilon(1e-14));
    CHECK(tape.value(h)(0, 2 * batch + j) == doctest::Approx(hx.d2).epsilon(1e-14));
    const Dual2 zt{stacked(0, j), wt, 0.0};
    CHECK(tape.value(h)(0, 3 * batch + j) == doctest::Approx(tanh(zt).d1).epsilon(1e-14));
  }
}

TEST_CASE("non-finite loss names the labelled term") {
  const ScalarProgram prog = [](Tape& tape, NodeId th) {
    const NodeId bad = tape.div(th, tape.constant(Eigen::MatrixXd::Zero(1, 1)));
    tape.label(bad, "pde");
    return tape.sum(bad);
  };
  Vector theta(1);
  theta << 1.0;
  try {
    grad_params(prog, theta);
    FAIL("expected an exception");
  } catch (const tps::NonFiniteError& e) {
    CHECK(e.term() == "pde");
  }
}

TEST_CASE("gradients are bit-identical across evaluations") {
  const TinyNet net = random_net(9, 3, 6);
  const ScalarProgram prog = [&](Tape& tape, NodeId th) {
    const NodeId w = tape.reshape(tape.rows(th, 0, 18), 6, 3);
    const NodeId b = tape.rows(th, 18, 6);
    Eigen::MatrixXd in = Eigen::MatrixXd::Random(3, 5);
    const NodeId h = tape.tanh(tape.affine(w, b, tape.constant(in)));
    return tape.sum_squares(h, 0.5);
  };
  Vector theta = Vector::LinSpaced(24, -1.0, 1.0);
  std::srand(3);
  const Vector g1 = grad_params(prog, theta);
  std::srand(3);
  const Vector g2 = grad_params(prog, theta);
  CHECK((g1.array() == g2.array()).all());
}

#include "tps/ad/tape.hpp"

#include <cmath>
#include <utility>

#include "tps/ad/kernels.hpp"
#include "tps/error.hpp"

namespace tps::ad {

namespace {

std::string shape_of(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

}  // namespace

NodeId Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return {nodes_.size() - 1};
}

const Tape::Node& Tape::node(NodeId id) const {
  if (id.index >= nodes_.size()) throw InvalidInput("tape record " + std::to_string(id.index) + " does not exist");
  return nodes_[id.index];
}

void Tape::require_same_shape(NodeId a, NodeId b, const char* op) const {
  const Matrix& va = node(a).value;
  const Matrix& vb = node(b).value;
  if (va.rows() != vb.rows() || va.cols() != vb.cols()) {
    throw InvalidInput(std::string(op) + ": shape mismatch " + shape_of(va) + " vs " + shape_of(vb));
  }
}

NodeId Tape::variable(Matrix value, std::string label) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = true;
  n.label = std::move(label);
  return push(std::move(n));
}

NodeId Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Tape::affine(NodeId weight, NodeId bias, NodeId input, Index bias_cols) {
  const Matrix& w = node(weight).value;
  const Matrix& b = node(bias).value;
  const Matrix& x = node(input).value;
  if (w.cols() != x.rows()) throw InvalidInput("affine: weight " + shape_of(w) + " vs input " + shape_of(x));
  if (b.rows() != w.rows() || b.cols() != 1) throw InvalidInput("affine: bias must be " + std::to_string(w.rows()) + "x1");
  if (bias_cols < 0) bias_cols = x.cols();
  if (bias_cols > x.cols()) throw InvalidInput("affine: bias columns exceed input columns");

  Node n;
  n.op = Op::affine;
  n.a = weight.index;
  n.b = bias.index;
  n.c = input.index;
  n.i0 = bias_cols;
  n.value.noalias() = w * x;
  n.value.leftCols(bias_cols).colwise() += b.col(0);
  n.needs_grad = node(weight).needs_grad || node(bias).needs_grad || node(input).needs_grad;
  return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
  require_same_shape(a, b, "add");
  Node n;
  n.op = Op::add;
  n.a = a.index;
  n.b = b.index;
  n.value = node(a).value + node(b).value;
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  return push(std::move(n));
}

NodeId Tape::sub(NodeId a, NodeId b) {
  require_same_shape(a, b, "sub");
  Node n;
  n.op = Op::sub;
  n.a = a.index;
  n.b = b.index;
  n.value = node(a).value - node(b).value;
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  return push(std::move(n));
}

NodeId Tape::mul(NodeId a, NodeId b) {
  require_same_shape(a, b, "mul");
  Node n;
  n.op = Op::mul;
  n.a = a.index;
  n.b = b.index;
  n.value = node(a).value.cwiseProduct(node(b).value);
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  return push(std::move(n));
}

NodeId Tape::div(NodeId a, NodeId b) {
  require_same_shape(a, b, "div");
  Node n;
  n.op = Op::div;
  n.a = a.index;
  n.b = b.index;
  n.value = node(a).value.cwiseQuotient(node(b).value);
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  return push(std::move(n));
}

NodeId Tape::tanh(NodeId a) {
  Node n;
  n.op = Op::tanh;
  n.a = a.index;
  n.value = fast_tanh(node(a).value.array()).matrix();
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

NodeId Tape::exp(NodeId a) {
  Node n;
  n.op = Op::exp;
  n.a = a.index;
  n.value = node(a).value.array().exp().matrix();
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

NodeId Tape::scale(NodeId a, double factor) {
  Node n;
  n.op = Op::scale;
  n.a = a.index;
  n.s = factor;
  n.value = factor * node(a).value;
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

NodeId Tape::shift(NodeId a, double offset) {
  Node n;
  n.op = Op::shift;
  n.a = a.index;
  n.value = node(a).value.array() + offset;
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

NodeId Tape::mul_const(NodeId a, const Matrix& factor) {
  const Matrix& va = node(a).value;
  if (va.rows() != factor.rows() || va.cols() != factor.cols()) {
    throw InvalidInput("mul_const: shape mismatch " + shape_of(va) + " vs " + shape_of(factor));
  }
  Node n;
  n.op = Op::mul_const;
  n.a = a.index;
  n.aux = factor;
  n.value = va.cwiseProduct(factor);
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

NodeId Tape::cols(NodeId a, Index start, Index count) {
  const Matrix& va = node(a).value;
  if (start < 0 || count < 0 || start + count > va.cols()) throw InvalidInput("cols: range outside " + shape_of(va));
  Node n;
  n.op = Op::cols;
  n.a = a.index;
  n.i0 = start;
  n.value = va.middleCols(start, count);
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

NodeId Tape::rows(NodeId a, Index start, Index count) {
  const Matrix& va = node(a).value;
  if (start < 0 || count < 0 || start + count > va.rows()) throw InvalidInput("rows: range outside " + shape_of(va));
  Node n;
  n.op = Op::rows;
  n.a = a.index;
  n.i0 = start;
  n.value = va.middleRows(start, count);
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

NodeId Tape::reshape(NodeId a, Index rows, Index cols) {
  const Matrix& va = node(a).value;
  if (rows * cols != va.size()) throw InvalidInput("reshape: cannot view " + shape_of(va) + " as " +
                                                   std::to_string(rows) + "x" + std::to_string(cols));
  Node n;
  n.op = Op::reshape;
  n.a = a.index;
  n.value = Eigen::Map<const Matrix>(va.data(), rows, cols);
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

NodeId Tape::dual_tanh(NodeId a, Channels channels, Index batch) {
  if (channels.dxx && !channels.dx) throw InvalidInput("dual_tanh: the d2/dx2 channel requires d/dx");
  const Matrix& z = node(a).value;
  if (batch <= 0 || z.cols() != batch * channels.count()) {
    throw InvalidInput("dual_tanh: input " + shape_of(z) + " does not hold " + std::to_string(channels.count()) +
                       " blocks of width " + std::to_string(batch));
  }
  Node n;
  n.op = Op::dual_tanh;
  n.a = a.index;
  n.i0 = batch;
  n.channels = channels;
  n.value.resize(z.rows(), z.cols());

  // Column blocks are contiguous in column-major storage.
  const Index len = z.rows() * batch;
  n.value.leftCols(batch).array() = fast_tanh(z.leftCols(batch).array());
  const double* h = n.value.data();
  const double* zv = z.data();
  double* out = n.value.data();
  if (channels.dx) {
    const double* zx = zv + len;
    double* ox = out + len;
    if (channels.dxx) {
      const double* zxx = zv + 2 * len;
      double* oxx = out + 2 * len;
      for (Index i = 0; i < len; ++i) {
        const double s = 1.0 - h[i] * h[i];
        ox[i] = s * zx[i];
        oxx[i] = s * (zxx[i] - 2.0 * h[i] * zx[i] * zx[i]);
      }
    } else {
      for (Index i = 0; i < len; ++i) ox[i] = (1.0 - h[i] * h[i]) * zx[i];
    }
  }
  if (channels.dt) {
    const Index off = channels.block_dt() * len;
    for (Index i = 0; i < len; ++i) out[off + i] = (1.0 - h[i] * h[i]) * zv[off + i];
  }
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

NodeId Tape::sum(NodeId a) {
  Node n;
  n.op = Op::sum;
  n.a = a.index;
  n.value = Matrix::Constant(1, 1, node(a).value.sum());
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

NodeId Tape::sum_squares(NodeId a, double factor) {
  Node n;
  n.op = Op::sum_squares;
  n.a = a.index;
  n.s = factor;
  n.value = Matrix::Constant(1, 1, factor * node(a).value.squaredNorm());
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

void Tape::label(NodeId id, std::string name) {
  node(id);
  nodes_[id.index].label = std::move(name);
}

double Tape::scalar(NodeId id) const {
  const Matrix& v = node(id).value;
  if (v.size() != 1) throw InvalidInput("record is " + shape_of(v) + ", not a scalar");
  return v(0, 0);
}

Matrix Tape::gradient(NodeId id) const {
  const Node& n = node(id);
  if (n.grad.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::accumulate(std::size_t target, Matrix g) {
  Node& t = nodes_[target];
  if (!t.needs_grad) return;
  if (t.grad.size() == 0) {
    t.grad = std::move(g);
  } else {
    t.grad += g;
  }
}

void Tape::accumulate_block(std::size_t target, Index row, Index col, const Matrix& g) {
  Node& t = nodes_[target];
  if (!t.needs_grad) return;
  if (t.grad.size() == 0) t.grad = Matrix::Zero(t.value.rows(), t.value.cols());
  t.grad.block(row, col, g.rows(), g.cols()) += g;
}

// Channel outputs of tanh with s = tanh'(z), s2 = tanh'', s3 = tanh''':
//   h = tanh z, hx = s zx, hxx = s2 zx^2 + s zxx, ht = s zt
// so the adjoints are
//   dz   = gh s + gx s2 zx + gxx (s3 zx^2 + s2 zxx) + gt s2 zt
//   dzx  = gx s + 2 gxx s2 zx
//   dzxx = gxx s
//   dzt  = gt s
void Tape::backprop_dual_tanh(Node& n) {
  if (!nodes_[n.a].needs_grad) return;
  const Channels ch = n.channels;
  const Matrix& z = nodes_[n.a].value;
  const Matrix& g = n.grad;
  const Index len = z.rows() * n.i0;

  Matrix dz(z.rows(), z.cols());
  const double* h = n.value.data();
  const double* zv = z.data();
  const double* gv = g.data();
  double* d = dz.data();
  const Index xo = len;
  const Index xxo = 2 * len;
  const Index to = ch.block_dt() * len;
  for (Index i = 0; i < len; ++i) {
    const double hi = h[i];
    const double s = 1.0 - hi * hi;
    const double s2 = -2.0 * hi * s;
    double dv = gv[i] * s;
    if (ch.dx) {
      const double zx = zv[xo + i];
      const double gx = gv[xo + i];
      dv += gx * s2 * zx;
      double dzx = gx * s;
      if (ch.dxx) {
        const double gxx = gv[xxo + i];
        const double s3 = (6.0 * hi * hi - 2.0) * s;
        dv += gxx * (s3 * zx * zx + s2 * zv[xxo + i]);
        dzx += 2.0 * gxx * s2 * zx;
        d[xxo + i] = gxx * s;
      }
      d[xo + i] = dzx;
    }
    if (ch.dt) {
      const double gt = gv[to + i];
      dv += gt * s2 * zv[to + i];
      d[to + i] = gt * s;
    }
    d[i] = dv;
  }
  accumulate(n.a, std::move(dz));
}

void Tape::backward(NodeId root) {
  const Node& r = node(root);
  if (r.value.size() != 1) throw InvalidInput("backward needs a 1x1 root, got " + shape_of(r.value));
  if (!std::isfinite(r.value(0, 0))) {
    for (const Node& n : nodes_) {
      if (!n.label.empty() && !n.value.allFinite()) {
        throw NonFiniteError(n.label, "non-finite value in term '" + n.label + "'");
      }
    }
    throw NonFiniteError("loss", "non-finite loss");
  }
  for (Node& n : nodes_) n.grad.resize(0, 0);
  if (!r.needs_grad) return;
  nodes_[root.index].grad = Matrix::Ones(1, 1);

  for (std::size_t i = root.index + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.op == Op::leaf || !n.needs_grad || n.grad.size() == 0) continue;
    const Matrix& g = n.grad;
    switch (n.op) {
      case Op::affine: {
        const Matrix& w = nodes_[n.a].value;
        const Matrix& x = nodes_[n.c].value;
        if (nodes_[n.a].needs_grad) {
          Matrix gw;
          gw.noalias() = g * x.transpose();
          accumulate(n.a, std::move(gw));
        }
        if (nodes_[n.b].needs_grad) accumulate(n.b, g.leftCols(n.i0).rowwise().sum());
        if (nodes_[n.c].needs_grad) {
          Matrix gx;
          gx.noalias() = w.transpose() * g;
          accumulate(n.c, std::move(gx));
        }
        break;
      }
      case Op::add:
        accumulate(n.a, g);
        accumulate(n.b, g);
        break;
      case Op::sub:
        accumulate(n.a, g);
        accumulate(n.b, -g);
        break;
      case Op::mul:
        if (nodes_[n.a].needs_grad) accumulate(n.a, g.cwiseProduct(nodes_[n.b].value));
        if (nodes_[n.b].needs_grad) accumulate(n.b, g.cwiseProduct(nodes_[n.a].value));
        break;
      case Op::div: {
        const Matrix& b = nodes_[n.b].value;
        if (nodes_[n.a].needs_grad) accumulate(n.a, g.cwiseQuotient(b));
        if (nodes_[n.b].needs_grad) accumulate(n.b, -g.cwiseProduct(n.value).cwiseQuotient(b));
        break;
      }
      case Op::tanh:
        accumulate(n.a, (g.array() * (1.0 - n.value.array().square())).matrix());
        break;
      case Op::exp:
        accumulate(n.a, g.cwiseProduct(n.value));
        break;
      case Op::scale:
        accumulate(n.a, n.s * g);
        break;
      case Op::shift:
        accumulate(n.a, g);
        break;
      case Op::mul_const:
        accumulate(n.a, g.cwiseProduct(n.aux));
        break;
      case Op::cols:
        accumulate_block(n.a, 0, n.i0, g);
        break;
      case Op::rows:
        accumulate_block(n.a, n.i0, 0, g);
        break;
      case Op::reshape: {
        const Matrix& va = nodes_[n.a].value;
        accumulate(n.a, Eigen::Map<const Matrix>(g.data(), va.rows(), va.cols()));
        break;
      }
      case Op::dual_tanh:
        backprop_dual_tanh(n);
        break;
      case Op::sum: {
        const Matrix& va = nodes_[n.a].value;
        accumulate(n.a, Matrix::Constant(va.rows(), va.cols(), g(0, 0)));
        break;
      }
      case Op::sum_squares:
        accumulate(n.a, (2.0 * n.s * g(0, 0)) * nodes_[n.a].value);
        break;
      case Op::leaf:
        break;
    }
  }
}

Vector grad_params(const ScalarProgram& loss, const Vector& theta) {
  Tape tape;
  const NodeId t = tape.variable(theta, "theta");
  const NodeId root = loss(tape, t);
  tape.backward(root);
  return tape.gradient(t).col(0);
}

}  // namespace tps::ad

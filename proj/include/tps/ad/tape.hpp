#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace tps::ad {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Handle to a record on a Tape.
struct NodeId {
  std::size_t index{};
};

/// Derivative channels carried next to the value by `Tape::dual_tanh`.
/// Channels are stacked as column blocks of equal width in the order
/// value | d/dx | d2/dx2 | d/dt; absent channels are skipped.
struct Channels {
  bool dx{false};
  bool dxx{false};  ///< requires dx
  bool dt{false};

  static constexpr Channels value_only() { return {}; }
  static constexpr Channels first_x() { return {true, false, false}; }
  static constexpr Channels full() { return {true, true, true}; }

  int count() const { return 1 + int(dx) + int(dxx) + int(dt); }
  int block_dx() const { return 1; }
  int block_dxx() const { return 2; }
  int block_dt() const { return 1 + int(dx) + int(dxx); }
};

/// Reverse-mode tape over dense matrices. Records are appended in evaluation
/// order, so each one only references earlier records; `backward` walks them
/// in reverse. A scalar is a 1x1 matrix. One tape per evaluation: a Tape is
/// not meant to be shared between threads.
class Tape {
 public:
  Tape() = default;

  /// Leaf that receives a gradient.
  NodeId variable(Matrix value, std::string label = {});
  /// Leaf without gradient.
  NodeId constant(Matrix value);

  /// W X + b, the bias added to the first `bias_cols` columns only (all when < 0).
  NodeId affine(NodeId weight, NodeId bias, NodeId input, Index bias_cols = -1);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);  ///< element-wise
  NodeId div(NodeId a, NodeId b);  ///< element-wise
  NodeId tanh(NodeId a);
  NodeId exp(NodeId a);
  NodeId scale(NodeId a, double factor);
  NodeId shift(NodeId a, double offset);
  /// Element-wise product with a constant matrix of the same shape.
  NodeId mul_const(NodeId a, const Matrix& factor);
  NodeId cols(NodeId a, Index start, Index count);
  NodeId rows(NodeId a, Index start, Index count);
  NodeId reshape(NodeId a, Index rows, Index cols);  ///< column-major
  /// tanh propagated through stacked derivative channels with exact first and
  /// second order chain rule; `batch` is the column width of one channel block.
  NodeId dual_tanh(NodeId a, Channels channels, Index batch);
  NodeId sum(NodeId a);
  /// factor * sum(a^2), a 1x1 record.
  NodeId sum_squares(NodeId a, double factor = 1.0);

  /// Names a record; used to report which term went non-finite.
  void label(NodeId id, std::string name);

  const Matrix& value(NodeId id) const { return nodes_[id.index].value; }
  double scalar(NodeId id) const;
  std::size_t size() const { return nodes_.size(); }

  /// Seeds d(root)/d(root) = 1 and accumulates gradients for every record that
  /// depends on a variable. Throws NonFiniteError (naming the first non-finite
  /// labelled record, else "loss") if the root is not finite, InvalidInput if
  /// the root is not 1x1.
  void backward(NodeId root);

  /// Gradient of the last backward root with respect to this record (zeros if
  /// it received none).
  Matrix gradient(NodeId id) const;

 private:
  enum class Op {
    leaf, affine, add, sub, mul, div, tanh, exp, scale, shift, mul_const,
    cols, rows, reshape, dual_tanh, sum, sum_squares
  };

  struct Node {
    Op op{Op::leaf};
    std::size_t a{}, b{}, c{};
    Matrix value;
    Matrix grad;
    Matrix aux;
    double s{};
    Index i0{}, i1{};
    Channels channels{};
    bool needs_grad{false};
    std::string label;
  };

  NodeId push(Node node);
  const Node& node(NodeId id) const;
  void require_same_shape(NodeId a, NodeId b, const char* op) const;
  void accumulate(std::size_t target, Matrix g);
  void accumulate_block(std::size_t target, Index row, Index col, const Matrix& g);
  void backprop_dual_tanh(Node& n);

  std::vector<Node> nodes_;
};

/// Scalar loss expressed as a tape program of one column-vector variable.
using ScalarProgram = std::function<NodeId(Tape&, NodeId theta)>;

/// Reverse-mode gradient of `loss` at `theta`, same length as theta.
/// Throws NonFiniteError naming the offending labelled term when the loss is
/// not finite.
Vector grad_params(const ScalarProgram& loss, const Vector& theta);

}  // namespace tps::ad

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sadq/nn/param_set.hpp"

namespace sadq::nn {

/// Handle to a value recorded on a Tape.
struct Var {
  std::size_t id = 0;
};

/// Reverse-mode automatic differentiation over batch matrices.
///
/// Every operation appends a node holding its forward value; gradients() walks
/// the nodes in reverse creation order. Parameter leaves reference the
/// ParamSet storage directly, so the ParamSet must outlive the tape and must
/// not be modified while the tape is in use.
class Tape {
 public:
  Var constant(Matrix value);
  Var parameter(const ParamSet& params, std::size_t index);

  /// x (B x I) times w (I x O).
  Var matmul(Var x, Var w);
  /// Adds a 1 x O row to every row of x.
  Var add_row(Var x, Var row);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double factor);
  Var relu(Var a);
  Var tanh(Var a);
  Var exp(Var a);
  Var square(Var a);
  /// Elementwise clamp; the gradient is zero outside [lo, hi].
  Var clamp(Var a, double lo, double hi);
  /// Mean of all entries (1 x 1).
  Var mean(Var a);
  /// Per-row mean (B x 1).
  Var row_mean(Var a);
  /// x - c * 1^T for a B x 1 column c.
  Var sub_col(Var x, Var col);
  /// x + c * 1^T for a B x 1 column c.
  Var add_col(Var x, Var col);
  Var concat_cols(Var a, Var b);
  /// out(b) = x(b, cols[b]), B x 1.
  Var gather(Var x, std::span<const std::size_t> cols);
  /// out(b, j) = x(b, blocks[b] * width + j), B x width.
  Var gather_block(Var x, std::span<const std::size_t> blocks, std::size_t width);
  /// Elementwise Huber function with threshold kappa.
  Var huber(Var a, double kappa);
  /// Quantile-regression Huber loss of predicted atoms (B x N) against fixed
  /// target atoms (B x N'), averaged over the batch (1 x 1).
  Var quantile_huber(Var pred, const Matrix& target, std::span<const double> taus, double kappa);
  /// Row-wise maximum (B x 1). Forward only: differentiating through it
  /// raises UnsupportedPrimitive.
  Var row_max(Var a);

  const Matrix& value(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  /// Gradient of a 1 x 1 loss with respect to every entry of params; arrays
  /// the loss does not depend on are exactly zero.
  Gradients gradients(Var loss, const ParamSet& params);

 private:
  enum class Op {
    kConstant, kParameter, kMatmul, kAddRow, kAdd, kSub, kMul, kScale, kRelu, kTanh, kExp,
    kSquare, kClamp, kMean, kRowMean, kSubCol, kAddCol, kConcat, kGather, kGatherBlock,
    kHuber, kQuantileHuber, kRowMax,
  };

  struct Node {
    Op op = Op::kConstant;
    std::size_t a = 0;
    std::size_t b = 0;
    Matrix owned;
    const Matrix* ref = nullptr;
    const ParamSet* params = nullptr;
    std::size_t param_index = 0;
    bool requires_grad = false;
    double s0 = 0.0;
    double s1 = 0.0;
    std::vector<std::size_t> index;
    Matrix aux;
    std::vector<double> taus;
    Matrix grad;
    bool has_grad = false;

    const Matrix& value() const { return ref != nullptr ? *ref : owned; }
  };

  Var push(Node node);
  const Node& node(Var v) const;
  void accumulate(std::size_t id, Matrix g);
  void backprop(std::size_t id);

  std::vector<Node> nodes_;
};

}  // namespace sadq::nn

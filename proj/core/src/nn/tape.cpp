#include "sadq/nn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sadq/common/error.hpp"

namespace sadq::nn {
namespace {

std::string shape(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

void require_same(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorKind::kShapeMismatch, std::string(op) + ": " + shape(a) + " vs " + shape(b));
  }
}

}  // namespace

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

const Tape::Node& Tape::node(Var v) const {
  if (v.id >= nodes_.size()) fail(ErrorKind::kShapeMismatch, "variable does not belong to this tape");
  return nodes_[v.id];
}

const Matrix& Tape::value(Var v) const { return node(v).value(); }

Var Tape::constant(Matrix value) {
  Node n;
  n.op = Op::kConstant;
  n.owned = std::move(value);
  return push(std::move(n));
}

Var Tape::parameter(const ParamSet& params, std::size_t index) {
  Node n;
  n.op = Op::kParameter;
  n.ref = &params.value(index);
  n.params = &params;
  n.param_index = index;
  n.requires_grad = true;
  return push(std::move(n));
}

Var Tape::matmul(Var x, Var w) {
  const Matrix& xv = value(x);
  const Matrix& wv = value(w);
  if (xv.cols() != wv.rows()) fail(ErrorKind::kShapeMismatch, "matmul: " + shape(xv) + " * " + shape(wv));
  Node n;
  n.op = Op::kMatmul;
  n.a = x.id;
  n.b = w.id;
  n.owned.noalias() = xv * wv;
  n.requires_grad = node(x).requires_grad || node(w).requires_grad;
  return push(std::move(n));
}

Var Tape::add_row(Var x, Var row) {
  const Matrix& xv = value(x);
  const Matrix& rv = value(row);
  if (rv.rows() != 1 || rv.cols() != xv.cols()) {
    fail(ErrorKind::kShapeMismatch, "add_row: " + shape(xv) + " + " + shape(rv));
  }
  Node n;
  n.op = Op::kAddRow;
  n.a = x.id;
  n.b = row.id;
  n.owned = xv.rowwise() + rv.row(0);
  n.requires_grad = node(x).requires_grad || node(row).requires_grad;
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  require_same(value(a), value(b), "add");
  Node n;
  n.op = Op::kAdd;
  n.a = a.id;
  n.b = b.id;
  n.owned = value(a) + value(b);
  n.requires_grad = node(a).requires_grad || node(b).requires_grad;
  return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  require_same(value(a), value(b), "sub");
  Node n;
  n.op = Op::kSub;
  n.a = a.id;
  n.b = b.id;
  n.owned = value(a) - value(b);
  n.requires_grad = node(a).requires_grad || node(b).requires_grad;
  return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
  require_same(value(a), value(b), "mul");
  Node n;
  n.op = Op::kMul;
  n.a = a.id;
  n.b = b.id;
  n.owned = value(a).cwiseProduct(value(b));
  n.requires_grad = node(a).requires_grad || node(b).requires_grad;
  return push(std::move(n));
}

Var Tape::scale(Var a, double factor) {
  Node n;
  n.op = Op::kScale;
  n.a = a.id;
  n.s0 = factor;
  n.owned = value(a) * factor;
  n.requires_grad = node(a).requires_grad;
  return push(std::move(n));
}

Var Tape::relu(Var a) {
  Node n;
  n.op = Op::kRelu;
  n.a = a.id;
  n.owned = value(a).cwiseMax(0.0);
  n.requires_grad = node(a).requires_grad;
  return push(std::move(n));
}

Var Tape::tanh(Var a) {
  Node n;
  n.op = Op::kTanh;
  n.a = a.id;
  n.owned = value(a).array().tanh().matrix();
  n.requires_grad = node(a).requires_grad;
  return push(std::move(n));
}

Var Tape::exp(Var a) {
  Node n;
  n.op = Op::kExp;
  n.a = a.id;
  n.owned = value(a).array().exp().matrix();
  n.requires_grad = node(a).requires_grad;
  return push(std::move(n));
}

Var Tape::square(Var a) {
  Node n;
  n.op = Op::kSquare;
  n.a = a.id;
  n.owned = value(a).array().square().matrix();
  n.requires_grad = node(a).requires_grad;
  return push(std::move(n));
}

Var Tape::clamp(Var a, double lo, double hi) {
  Node n;
  n.op = Op::kClamp;
  n.a = a.id;
  n.s0 = lo;
  n.s1 = hi;
  n.owned = value(a).cwiseMax(lo).cwiseMin(hi);
  n.requires_grad = node(a).requires_grad;
  return push(std::move(n));
}

Var Tape::mean(Var a) {
  const Matrix& av = value(a);
  if (av.size() == 0) fail(ErrorKind::kEmptyBatch, "mean of an empty matrix");
  Node n;
  n.op = Op::kMean;
  n.a = a.id;
  n.owned = Matrix::Constant(1, 1, av.mean());
  n.requires_grad = node(a).requires_grad;
  return push(std::move(n));
}

Var Tape::row_mean(Var a) {
  Node n;
  n.op = Op::kRowMean;
  n.a = a.id;
  n.owned = value(a).rowwise().mean();
  n.requires_grad = node(a).requires_grad;
  return push(std::move(n));
}

Var Tape::sub_col(Var x, Var col) {
  const Matrix& xv = value(x);
  const Matrix& cv = value(col);
  if (cv.cols() != 1 || cv.rows() != xv.rows()) fail(ErrorKind::kShapeMismatch, "sub_col: " + shape(xv) + " - " + shape(cv));
  Node n;
  n.op = Op::kSubCol;
  n.a = x.id;
  n.b = col.id;
  n.owned = xv.colwise() - cv.col(0);
  n.requires_grad = node(x).requires_grad || node(col).requires_grad;
  return push(std::move(n));
}

Var Tape::add_col(Var x, Var col) {
  const Matrix& xv = value(x);
  const Matrix& cv = value(col);
  if (cv.cols() != 1 || cv.rows() != xv.rows()) fail(ErrorKind::kShapeMismatch, "add_col: " + shape(xv) + " + " + shape(cv));
  Node n;
  n.op = Op::kAddCol;
  n.a = x.id;
  n.b = col.id;
  n.owned = xv.colwise() + cv.col(0);
  n.requires_grad = node(x).requires_grad || node(col).requires_grad;
  return push(std::move(n));
}

Var Tape::concat_cols(Var a, Var b) {
  const Matrix& av = value(a);
  const Matrix& bv = value(b);
  if (av.rows() != bv.rows()) fail(ErrorKind::kShapeMismatch, "concat_cols: " + shape(av) + " | " + shape(bv));
  Node n;
  n.op = Op::kConcat;
  n.a = a.id;
  n.b = b.id;
  n.owned.resize(av.rows(), av.cols() + bv.cols());
  n.owned << av, bv;
  n.requires_grad = node(a).requires_grad || node(b).requires_grad;
  return push(std::move(n));
}

Var Tape::gather(Var x, std::span<const std::size_t> cols) {
  const Matrix& xv = value(x);
  if (cols.size() != static_cast<std::size_t>(xv.rows())) fail(ErrorKind::kShapeMismatch, "gather: index count");
  Node n;
  n.op = Op::kGather;
  n.a = x.id;
  n.index.assign(cols.begin(), cols.end());
  n.owned.resize(xv.rows(), 1);
  for (Eigen::Index r = 0; r < xv.rows(); ++r) {
    const auto c = static_cast<Eigen::Index>(cols[r]);
    if (c >= xv.cols()) fail(ErrorKind::kShapeMismatch, "gather: column out of range");
    n.owned(r, 0) = xv(r, c);
  }
  n.requires_grad = node(x).requires_grad;
  return push(std::move(n));
}

Var Tape::gather_block(Var x, std::span<const std::size_t> blocks, std::size_t width) {
  const Matrix& xv = value(x);
  if (blocks.size() != static_cast<std::size_t>(xv.rows())) fail(ErrorKind::kShapeMismatch, "gather_block: index count");
  const auto w = static_cast<Eigen::Index>(width);
  Node n;
  n.op = Op::kGatherBlock;
  n.a = x.id;
  n.index.assign(blocks.begin(), blocks.end());
  n.s0 = static_cast<double>(width);
  n.owned.resize(xv.rows(), w);
  for (Eigen::Index r = 0; r < xv.rows(); ++r) {
    const auto start = static_cast<Eigen::Index>(blocks[r]) * w;
    if (start + w > xv.cols()) fail(ErrorKind::kShapeMismatch, "gather_block: block out of range");
    n.owned.row(r) = xv.row(r).segment(start, w);
  }
  n.requires_grad = node(x).requires_grad;
  return push(std::move(n));
}

Var Tape::huber(Var a, double kappa) {
  Node n;
  n.op = Op::kHuber;
  n.a = a.id;
  n.s0 = kappa;
  n.owned = value(a).unaryExpr([kappa](double x) {
    const double ax = std::abs(x);
    return ax <= kappa ? 0.5 * x * x : kappa * (ax - 0.5 * kappa);
  });
  n.requires_grad = node(a).requires_grad;
  return push(std::move(n));
}

Var Tape::quantile_huber(Var pred, const Matrix& target, std::span<const double> taus, double kappa) {
  const Matrix& pv = value(pred);
  if (target.rows() != pv.rows()) fail(ErrorKind::kShapeMismatch, "quantile_huber: batch size");
  if (taus.size() != static_cast<std::size_t>(pv.cols())) fail(ErrorKind::kShapeMismatch, "quantile_huber: fraction count");
  if (pv.rows() == 0) fail(ErrorKind::kEmptyBatch, "quantile_huber: empty batch");
  double total = 0.0;
  for (Eigen::Index b = 0; b < pv.rows(); ++b) {
    for (Eigen::Index i = 0; i < pv.cols(); ++i) {
      double row = 0.0;
      for (Eigen::Index j = 0; j < target.cols(); ++j) {
        const double u = target(b, j) - pv(b, i);
        const double au = std::abs(u);
        const double h = au <= kappa ? 0.5 * u * u : kappa * (au - 0.5 * kappa);
        row += std::abs(taus[i] - (u < 0.0 ? 1.0 : 0.0)) * h / kappa;
      }
      total += row / static_cast<double>(target.cols());
    }
  }
  Node n;
  n.op = Op::kQuantileHuber;
  n.a = pred.id;
  n.aux = target;
  n.taus.assign(taus.begin(), taus.end());
  n.s0 = kappa;
  n.owned = Matrix::Constant(1, 1, total / static_cast<double>(pv.rows()));
  n.requires_grad = node(pred).requires_grad;
  return push(std::move(n));
}

Var Tape::row_max(Var a) {
  Node n;
  n.op = Op::kRowMax;
  n.a = a.id;
  n.owned = value(a).rowwise().maxCoeff();
  n.requires_grad = node(a).requires_grad;
  return push(std::move(n));
}

void Tape::accumulate(std::size_t id, Matrix g) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  if (n.has_grad) {
    n.grad += g;
  } else {
    n.grad = std::move(g);
    n.has_grad = true;
  }
}

void Tape::backprop(std::size_t id) {
  Node& n = nodes_[id];
  const Matrix g = n.grad;
  switch (n.op) {
    case Op::kConstant:
    case Op::kParameter:
      break;
    case Op::kMatmul: {
      const Matrix& x = nodes_[n.a].value();
      const Matrix& w = nodes_[n.b].value();
      if (nodes_[n.a].requires_grad) accumulate(n.a, g * w.transpose());
      if (nodes_[n.b].requires_grad) accumulate(n.b, x.transpose() * g);
      break;
    }
    case Op::kAddRow:
      accumulate(n.a, g);
      if (nodes_[n.b].requires_grad) accumulate(n.b, g.colwise().sum());
      break;
    case Op::kAdd:
      accumulate(n.a, g);
      accumulate(n.b, g);
      break;
    case Op::kSub:
      accumulate(n.a, g);
      accumulate(n.b, -g);
      break;
    case Op::kMul:
      if (nodes_[n.a].requires_grad) accumulate(n.a, g.cwiseProduct(nodes_[n.b].value()));
      if (nodes_[n.b].requires_grad) accumulate(n.b, g.cwiseProduct(nodes_[n.a].value()));
      break;
    case Op::kScale:
      accumulate(n.a, g * n.s0);
      break;
    case Op::kRelu:
      accumulate(n.a, (n.owned.array() > 0.0).select(g, 0.0));
      break;
    case Op::kTanh:
      accumulate(n.a, (g.array() * (1.0 - n.owned.array().square())).matrix());
      break;
    case Op::kExp:
      accumulate(n.a, g.cwiseProduct(n.owned));
      break;
    case Op::kSquare:
      accumulate(n.a, 2.0 * g.cwiseProduct(nodes_[n.a].value()));
      break;
    case Op::kClamp: {
      const Matrix& x = nodes_[n.a].value();
      accumulate(n.a, ((x.array() >= n.s0) && (x.array() <= n.s1)).select(g, 0.0));
      break;
    }
    case Op::kMean: {
      const Matrix& x = nodes_[n.a].value();
      accumulate(n.a, Matrix::Constant(x.rows(), x.cols(), g(0, 0) / static_cast<double>(x.size())));
      break;
    }
    case Op::kRowMean: {
      const Matrix& x = nodes_[n.a].value();
      Matrix d = (g / static_cast<double>(x.cols())).replicate(1, x.cols());
      accumulate(n.a, std::move(d));
      break;
    }
    case Op::kSubCol:
      accumulate(n.a, g);
      if (nodes_[n.b].requires_grad) accumulate(n.b, -g.rowwise().sum());
      break;
    case Op::kAddCol:
      accumulate(n.a, g);
      if (nodes_[n.b].requires_grad) accumulate(n.b, g.rowwise().sum());
      break;
    case Op::kConcat: {
      const auto left = nodes_[n.a].value().cols();
      if (nodes_[n.a].requires_grad) accumulate(n.a, g.leftCols(left));
      if (nodes_[n.b].requires_grad) accumulate(n.b, g.rightCols(g.cols() - left));
      break;
    }
    case Op::kGather: {
      const Matrix& x = nodes_[n.a].value();
      Matrix d = Matrix::Zero(x.rows(), x.cols());
      for (Eigen::Index r = 0; r < x.rows(); ++r) d(r, static_cast<Eigen::Index>(n.index[r])) = g(r, 0);
      accumulate(n.a, std::move(d));
      break;
    }
    case Op::kGatherBlock: {
      const Matrix& x = nodes_[n.a].value();
      const auto w = static_cast<Eigen::Index>(n.s0);
      Matrix d = Matrix::Zero(x.rows(), x.cols());
      for (Eigen::Index r = 0; r < x.rows(); ++r) {
        d.row(r).segment(static_cast<Eigen::Index>(n.index[r]) * w, w) = g.row(r);
      }
      accumulate(n.a, std::move(d));
      break;
    }
    case Op::kHuber: {
      const double kappa = n.s0;
      const Matrix& x = nodes_[n.a].value();
      Matrix d = x.unaryExpr([kappa](double v) { return std::abs(v) <= kappa ? v : (v > 0 ? kappa : -kappa); });
      accumulate(n.a, d.cwiseProduct(g));
      break;
    }
    case Op::kQuantileHuber: {
      const Matrix& p = nodes_[n.a].value();
      const Matrix& t = n.aux;
      const double kappa = n.s0;
      const double scale = g(0, 0) / static_cast<double>(p.rows()) / static_cast<double>(t.cols());
      Matrix d = Matrix::Zero(p.rows(), p.cols());
      for (Eigen::Index b = 0; b < p.rows(); ++b) {
        for (Eigen::Index i = 0; i < p.cols(); ++i) {
          double acc = 0.0;
          for (Eigen::Index j = 0; j < t.cols(); ++j) {
            const double u = t(b, j) - p(b, i);
            const double dh = std::abs(u) <= kappa ? u : (u > 0 ? kappa : -kappa);
            acc -= std::abs(n.taus[i] - (u < 0.0 ? 1.0 : 0.0)) * dh / kappa;
          }
          d(b, i) = acc * scale;
        }
      }
      accumulate(n.a, std::move(d));
      break;
    }
    case Op::kRowMax:
      fail(ErrorKind::kUnsupportedPrimitive, "row_max has no gradient; compute targets outside the loss graph");
  }
}

Gradients Tape::gradients(Var loss, const ParamSet& params) {
  const Matrix& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) fail(ErrorKind::kShapeMismatch, "loss must be 1x1, got " + shape(lv));
  for (auto& n : nodes_) {
    n.has_grad = false;
    n.grad.resize(0, 0);
  }
  Gradients out = zero_gradients(params);
  if (!nodes_[loss.id].requires_grad) return out;
  nodes_[loss.id].grad = Matrix::Ones(1, 1);
  nodes_[loss.id].has_grad = true;
  for (std::size_t id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.has_grad) continue;
    if (n.op == Op::kParameter) {
      if (n.params == &params) out[n.param_index] += n.grad;
      continue;
    }
    backprop(id);
  }
  return out;
}

}  // namespace sadq::nn

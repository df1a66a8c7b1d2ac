#include "ggl/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "ggl/errors.hpp"

namespace ggl {

std::string shape_str(const Mat& m) {
  return "(" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ")";
}

Parameter::Parameter(std::string n, Mat val) : Parameter(std::move(n), val, Mat::Ones(val.rows(), val.cols())) {}

Parameter::Parameter(std::string n, Mat val, Mat msk)
    : name(std::move(n)), value(std::move(val)), mask(std::move(msk)) {
  if (mask.rows() != value.rows() || mask.cols() != value.cols())
    throw ShapeError("parameter '" + name + "': mask " + shape_str(mask) + " vs value " + shape_str(value));
  for (Eigen::Index k = 0; k < mask.size(); ++k)
    if (mask.data()[k] != 0.0 && mask.data()[k] != 1.0)
      throw ParameterError("parameter '" + name + "': mask entries must be 0 or 1");
  apply_mask();
  grad = Mat::Zero(value.rows(), value.cols());
  m = Mat::Zero(value.rows(), value.cols());
  v = Mat::Zero(value.rows(), value.cols());
}

Eigen::Index Parameter::trainable_count() const {
  return static_cast<Eigen::Index>(std::count(mask.data(), mask.data() + mask.size(), 1.0));
}

const Mat& Var::value() const { return tape->value(*this); }

double Var::scalar() const {
  const Mat& v = value();
  if (v.size() != 1) throw ShapeError("scalar(): value has shape " + shape_str(v));
  return v(0, 0);
}

Var Tape::record(Mat value, bool requires_grad, BackwardFn fn) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

Var Tape::constant(Mat value) { return record(std::move(value), false, nullptr); }

Var Tape::constant(double value) {
  Mat m(1, 1);
  m(0, 0) = value;
  return constant(std::move(m));
}

Var Tape::input(Mat value) { return record(std::move(value), true, nullptr); }

Var Tape::param(Parameter& p) {
  Var v = record(p.value, true, nullptr);
  nodes_[v.id].param = &p;
  return v;
}

Mat Tape::grad(Var v) const {
  const Node& n = nodes_[v.id];
  if (n.grad.size() == 0) return Mat::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw ParameterError("backward: loss is not on this tape");
  const Mat& lv = nodes_[loss.id].value;
  if (lv.size() != 1) throw ShapeError("backward: loss must be scalar, got " + shape_str(lv));
  for (auto& n : nodes_) n.grad.resize(0, 0);
  if (!nodes_[loss.id].requires_grad) return;
  nodes_[loss.id].grad = Mat::Ones(1, 1);
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.size() == 0) continue;
    if (n.backward) n.backward(*this, id);
    if (n.param) {
      Parameter& p = *n.param;
      if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols()) p.zero_grad();
      // Frozen entries never receive gradient.
      p.grad.array() += n.grad.array() * p.mask.array();
    }
  }
}

namespace {

Eigen::Index bdim(Eigen::Index a, Eigen::Index b, const char* op, const Mat& x, const Mat& y) {
  if (a == b) return a;
  if (a == 1) return b;
  if (b == 1) return a;
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(x) + " and " + shape_str(y));
}

Mat expand(const Mat& x, Eigen::Index r, Eigen::Index c) {
  if (x.rows() == r && x.cols() == c) return x;
  return x.replicate(r / x.rows(), c / x.cols());
}

// Sums g over the broadcast dimensions so it matches shape (r, c).
Mat reduce_to(const Mat& g, Eigen::Index r, Eigen::Index c) {
  if (g.rows() == r && g.cols() == c) return g;
  Mat out = g;
  if (r == 1 && out.rows() != 1) out = out.colwise().sum().eval();
  if (c == 1 && out.cols() != 1) out = out.rowwise().sum().eval();
  return out;
}

Var unary(Var a, Mat value, std::function<Mat(const Mat& x, const Mat& y, const Mat& g)> dfn) {
  Tape& t = *a.tape;
  bool rg = t.needs(a.id);
  int ia = a.id;
  return t.record(std::move(value), rg, [ia, dfn](Tape& tp, int self) {
    tp.accumulate(ia, dfn(tp.value(Var{&tp, ia}), tp.value(Var{&tp, self}), tp.grad_ref(self)));
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = *a.tape;
  const Mat& x = a.value();
  const Mat& y = b.value();
  if (x.cols() != y.rows())
    throw ShapeError("matmul: incompatible shapes " + shape_str(x) + " and " + shape_str(y));
  Mat out = x * y;
  int ia = a.id, ib = b.id;
  bool rg = t.needs(ia) || t.needs(ib);
  return t.record(std::move(out), rg, [ia, ib](Tape& tp, int self) {
    const Mat& g = tp.grad_ref(self);
    if (tp.needs(ia)) tp.accumulate(ia, g * tp.value(Var{&tp, ib}).transpose());
    if (tp.needs(ib)) tp.accumulate(ib, tp.value(Var{&tp, ia}).transpose() * g);
  });
}

Var add(Var a, Var b) {
  Tape& t = *a.tape;
  const Mat& x = a.value();
  const Mat& y = b.value();
  Eigen::Index r = bdim(x.rows(), y.rows(), "add", x, y);
  Eigen::Index c = bdim(x.cols(), y.cols(), "add", x, y);
  Mat out;
  if (x.rows() == y.rows() && x.cols() == y.cols()) {
    out = x + y;
  } else if (x.rows() == r && x.cols() == c && y.rows() == 1 && y.cols() == c) {
    out = x;
    out.rowwise() += y.row(0);
  } else {
    out = expand(x, r, c) + expand(y, r, c);
  }
  int ia = a.id, ib = b.id;
  Eigen::Index ar = x.rows(), ac = x.cols(), br = y.rows(), bc = y.cols();
  bool rg = t.needs(ia) || t.needs(ib);
  return t.record(std::move(out), rg, [=](Tape& tp, int self) {
    const Mat& g = tp.grad_ref(self);
    if (tp.needs(ia)) tp.accumulate(ia, reduce_to(g, ar, ac));
    if (tp.needs(ib)) tp.accumulate(ib, reduce_to(g, br, bc));
  });
}

Var sub(Var a, Var b) {
  Tape& t = *a.tape;
  const Mat& x = a.value();
  const Mat& y = b.value();
  Eigen::Index r = bdim(x.rows(), y.rows(), "sub", x, y);
  Eigen::Index c = bdim(x.cols(), y.cols(), "sub", x, y);
  Mat out = (x.rows() == y.rows() && x.cols() == y.cols()) ? Mat(x - y) : Mat(expand(x, r, c) - expand(y, r, c));
  int ia = a.id, ib = b.id;
  Eigen::Index ar = x.rows(), ac = x.cols(), br = y.rows(), bc = y.cols();
  bool rg = t.needs(ia) || t.needs(ib);
  return t.record(std::move(out), rg, [=](Tape& tp, int self) {
    const Mat& g = tp.grad_ref(self);
    if (tp.needs(ia)) tp.accumulate(ia, reduce_to(g, ar, ac));
    if (tp.needs(ib)) tp.accumulate(ib, Mat(-reduce_to(g, br, bc)));
  });
}

Var hadamard(Var a, Var b) {
  Tape& t = *a.tape;
  const Mat& x = a.value();
  const Mat& y = b.value();
  Eigen::Index r = bdim(x.rows(), y.rows(), "hadamard", x, y);
  Eigen::Index c = bdim(x.cols(), y.cols(), "hadamard", x, y);
  bool same = x.rows() == y.rows() && x.cols() == y.cols();
  Mat out = same ? Mat(x.cwiseProduct(y)) : Mat(expand(x, r, c).cwiseProduct(expand(y, r, c)));
  int ia = a.id, ib = b.id;
  Eigen::Index ar = x.rows(), ac = x.cols(), br = y.rows(), bc = y.cols();
  bool rg = t.needs(ia) || t.needs(ib);
  return t.record(std::move(out), rg, [=](Tape& tp, int self) {
    const Mat& g = tp.grad_ref(self);
    const Mat& xv = tp.value(Var{&tp, ia});
    const Mat& yv = tp.value(Var{&tp, ib});
    if (tp.needs(ia)) tp.accumulate(ia, reduce_to(g.cwiseProduct(expand(yv, r, c)), ar, ac));
    if (tp.needs(ib)) tp.accumulate(ib, reduce_to(g.cwiseProduct(expand(xv, r, c)), br, bc));
  });
}

Var scale(Var a, double s) {
  return unary(a, a.value() * s, [s](const Mat&, const Mat&, const Mat& g) { return Mat(g * s); });
}

Var add_scalar(Var a, double s) {
  return unary(a, (a.value().array() + s).matrix(), [](const Mat&, const Mat&, const Mat& g) { return g; });
}

Var relu(Var a) {
  return unary(a, a.value().cwiseMax(0.0), [](const Mat& x, const Mat&, const Mat& g) {
    return Mat((x.array() > 0.0).select(g.array(), 0.0));
  });
}

Var tanh(Var a) {
  return unary(a, a.value().array().tanh().matrix(), [](const Mat&, const Mat& y, const Mat& g) {
    return Mat(g.array() * (1.0 - y.array().square()));
  });
}

Var sin(Var a) {
  return unary(a, a.value().array().sin().matrix(), [](const Mat& x, const Mat&, const Mat& g) {
    return Mat(g.array() * x.array().cos());
  });
}

Var power(Var a, double p) {
  return unary(a, a.value().array().pow(p).matrix(), [p](const Mat& x, const Mat&, const Mat& g) {
    return Mat(g.array() * p * x.array().pow(p - 1.0));
  });
}

Var exp(Var a) {
  return unary(a, a.value().array().exp().matrix(), [](const Mat&, const Mat& y, const Mat& g) {
    return Mat(g.array() * y.array());
  });
}

Var square(Var a) {
  return unary(a, a.value().array().square().matrix(), [](const Mat& x, const Mat&, const Mat& g) {
    return Mat(2.0 * g.array() * x.array());
  });
}

Var sum(Var a) {
  Mat out(1, 1);
  out(0, 0) = a.value().sum();
  return unary(a, std::move(out), [](const Mat& x, const Mat&, const Mat& g) {
    return Mat(Mat::Constant(x.rows(), x.cols(), g(0, 0)));
  });
}

Var mean(Var a) {
  Mat out(1, 1);
  double n = static_cast<double>(a.value().size());
  out(0, 0) = a.value().sum() / n;
  return unary(a, std::move(out), [n](const Mat& x, const Mat&, const Mat& g) {
    return Mat(Mat::Constant(x.rows(), x.cols(), g(0, 0) / n));
  });
}

Var row_sum(Var a) {
  Mat out = a.value().rowwise().sum();
  return unary(a, std::move(out), [](const Mat& x, const Mat&, const Mat& g) {
    return Mat(g.replicate(1, x.cols()));
  });
}

Var concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  Tape& t = *parts[0].tape;
  Eigen::Index r = parts[0].rows(), c = 0;
  bool rg = false;
  for (const Var& p : parts) {
    if (p.rows() != r)
      throw ShapeError("concat: row mismatch " + shape_str(parts[0].value()) + " and " + shape_str(p.value()));
    c += p.cols();
    rg = rg || t.needs(p.id);
  }
  Mat out(r, c);
  std::vector<int> ids;
  std::vector<Eigen::Index> offs;
  Eigen::Index off = 0;
  for (const Var& p : parts) {
    out.middleCols(off, p.cols()) = p.value();
    ids.push_back(p.id);
    offs.push_back(off);
    off += p.cols();
  }
  return t.record(std::move(out), rg, [ids, offs](Tape& tp, int self) {
    const Mat& g = tp.grad_ref(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (!tp.needs(ids[k])) continue;
      Eigen::Index w = tp.value(Var{&tp, ids[k]}).cols();
      tp.accumulate(ids[k], Mat(g.middleCols(offs[k], w)));
    }
  });
}

Var slice(Var a, Eigen::Index col0, Eigen::Index ncols) {
  const Mat& x = a.value();
  if (col0 < 0 || ncols < 0 || col0 + ncols > x.cols())
    throw ShapeError("slice: columns [" + std::to_string(col0) + "," + std::to_string(col0 + ncols) +
                     ") out of range for " + shape_str(x));
  Mat out = x.middleCols(col0, ncols);
  return unary(a, std::move(out), [col0, ncols](const Mat& xv, const Mat&, const Mat& g) {
    Mat full = Mat::Zero(xv.rows(), xv.cols());
    full.middleCols(col0, ncols) = g;
    return full;
  });
}

Var reshape(Var a, Eigen::Index rows, Eigen::Index cols) {
  const Mat& x = a.value();
  if (rows * cols != x.size())
    throw ShapeError("reshape: cannot view " + shape_str(x) + " as (" + std::to_string(rows) + "x" +
                     std::to_string(cols) + ")");
  Mat out = Eigen::Map<const Mat>(x.data(), rows, cols);
  return unary(a, std::move(out), [](const Mat& xv, const Mat&, const Mat& g) {
    return Mat(Eigen::Map<const Mat>(g.data(), xv.rows(), xv.cols()));
  });
}

Var block_apply(Var z, const Mat& op) {
  const Mat& x = z.value();
  const Eigen::Index n = op.rows();
  if (op.cols() != n || n == 0 || x.rows() % n != 0)
    throw ShapeError("block_apply: operator " + shape_str(op) + " incompatible with " + shape_str(x));
  const Eigen::Index blocks = x.rows() / n;
  Mat out(x.rows(), x.cols());
  for (Eigen::Index b = 0; b < blocks; ++b) out.middleRows(b * n, n).noalias() = op * x.middleRows(b * n, n);
  Mat opt = op.transpose();
  return unary(z, std::move(out), [opt, n, blocks](const Mat& xv, const Mat&, const Mat& g) {
    Mat gi(xv.rows(), xv.cols());
    for (Eigen::Index b = 0; b < blocks; ++b) gi.middleRows(b * n, n).noalias() = opt * g.middleRows(b * n, n);
    return gi;
  });
}

double gradient_check(const std::function<Var(Tape&, const std::vector<Var>&)>& f,
                      const std::vector<Mat>& inputs, double h) {
  std::vector<Mat> ad;
  {
    Tape t;
    std::vector<Var> vs;
    for (const Mat& m : inputs) vs.push_back(t.input(m));
    Var loss = f(t, vs);
    t.backward(loss);
    for (const Var& v : vs) ad.push_back(t.grad(v));
  }
  auto eval = [&](const std::vector<Mat>& xs) {
    Tape t;
    std::vector<Var> vs;
    for (const Mat& m : xs) vs.push_back(t.constant(m));
    return f(t, vs).scalar();
  };
  double max_diff = 0.0, max_fd = 0.0, max_ad = 0.0;
  std::vector<Mat> xs = inputs;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    for (Eigen::Index e = 0; e < xs[k].size(); ++e) {
      double orig = xs[k].data()[e];
      xs[k].data()[e] = orig + h;
      double fp = eval(xs);
      xs[k].data()[e] = orig - h;
      double fm = eval(xs);
      xs[k].data()[e] = orig;
      double fd = (fp - fm) / (2.0 * h);
      double g = ad[k].data()[e];
      max_diff = std::max(max_diff, std::abs(g - fd));
      max_fd = std::max(max_fd, std::abs(fd));
      max_ad = std::max(max_ad, std::abs(g));
    }
  }
  return max_diff / std::max({max_fd, max_ad, 1e-8});
}

}  // namespace ggl

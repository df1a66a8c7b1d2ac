#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ggl {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::string shape_str(const Mat& m);

// A trainable array with a per-entry mask (1 = trainable, 0 = frozen at zero)
// and its Adam moment estimates.
struct Parameter {
  std::string name;
  Mat value;
  Mat mask;
  Mat grad;
  Mat m;
  Mat v;
  long step = 0;

  Parameter() = default;
  Parameter(std::string name, Mat value);
  Parameter(std::string name, Mat value, Mat mask);

  Eigen::Index trainable_count() const;
  Eigen::Index frozen_count() const { return value.size() - trainable_count(); }
  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
  void apply_mask() { value.array() *= mask.array(); }
};

class Tape;

// Handle to a node on a tape.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Mat& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const;
};

class Tape {
 public:
  Tape() { nodes_.reserve(256); }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Mat value);
  Var constant(double value);
  // Leaf whose gradient is kept (inputs in gradient checks, receptive-field probes).
  Var input(Mat value);
  // Trainable leaf. After backward() the masked gradient is added to p.grad.
  Var param(Parameter& p);

  const Mat& value(Var v) const { return nodes_[v.id].value; }
  // Gradient of the last backward() loss w.r.t. a leaf or intermediate node.
  Mat grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Reverse sweep from a 1x1 loss. Visits recorded nodes once, newest first.
  void backward(Var loss);

  using BackwardFn = std::function<void(Tape&, int self)>;
  Var record(Mat value, bool requires_grad, BackwardFn fn);
  template <class Expr>
  void accumulate(int id, const Expr& g) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0)
      n.grad = g;
    else
      n.grad += g;
  }
  const Mat& grad_ref(int id) const { return nodes_[id].grad; }
  bool needs(int id) const { return nodes_[id].requires_grad; }

 private:
  struct Node {
    Mat value;
    Mat grad;
    bool requires_grad = false;
    Parameter* param = nullptr;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

// Primitives. Binary elementwise ops broadcast operands whose row or column
// count is 1 (row vectors, column vectors, scalars).
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var relu(Var a);
Var tanh(Var a);
Var sin(Var a);
Var power(Var a, double p);
Var exp(Var a);
Var square(Var a);
Var sum(Var a);
Var mean(Var a);
Var row_sum(Var a);  // r x c -> r x 1
Var concat(const std::vector<Var>& parts);  // along columns
Var slice(Var a, Eigen::Index col0, Eigen::Index ncols);
Var reshape(Var a, Eigen::Index rows, Eigen::Index cols);  // row-major reinterpretation
// Multiplies each consecutive block of `block` rows by the fixed matrix op:
// (I_B kron op) z for z of shape (B*block) x F.
Var block_apply(Var z, const Mat& op);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(double s, Var a) { return scale(a, s); }
inline Var operator*(Var a, double s) { return scale(a, s); }
inline Var operator-(Var a) { return scale(a, -1.0); }

// Central finite-difference check of d f / d inputs. f must build its graph on
// the tape it is handed and return a 1x1 Var. Returns
// max|g_ad - g_fd| / max(max|g_fd|, max|g_ad|, 1e-8) over all input entries.
double gradient_check(const std::function<Var(Tape&, const std::vector<Var>&)>& f,
                      const std::vector<Mat>& inputs, double h = 1e-6);

}  // namespace ggl

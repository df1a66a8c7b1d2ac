#include "ggl/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ggl/errors.hpp"

namespace ggl {

namespace {

double off_diagonal_norm(const Eigen::MatrixXd& a) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

SymEigen jacobi_eigen(const Eigen::MatrixXd& input, double tol, int max_sweeps) {
  if (input.rows() != input.cols()) throw ShapeError("jacobi_eigen: matrix is not square");
  const Eigen::Index n = input.rows();
  Eigen::MatrixXd a = 0.5 * (input + input.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  int sweep = 0;
  for (; sweep < max_sweeps && off_diagonal_norm(a) >= tol; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (apq == 0.0) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return a(x, x) < a(y, y); });
  SymEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  out.sweeps = sweep;
  return out;
}

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& a) { return jacobi_eigen(a).values; }

double largest_eigenvalue(const Eigen::MatrixXd& a, double tol, int max_iter) {
  const Eigen::Index n = a.rows();
  if (n == 0) throw ParameterError("largest_eigenvalue: empty matrix");
  // Deterministic start vector with components in every direction.
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = 1.0 + 0.1 * std::sin(1.0 + 3.0 * static_cast<double>(i));
  x.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd y = a * x;
    double next = x.dot(y);
    double ny = y.norm();
    if (ny == 0.0) return 0.0;
    y /= ny;
    double resid = (a * y - y.dot(a * y) * y).norm();
    x = y;
    // The residual bounds the distance from the Rayleigh quotient to the spectrum.
    if (std::abs(next - lambda) < tol * std::max(1.0, std::abs(next)) && resid < tol * std::max(1.0, std::abs(next))) {
      return x.dot(a * x);
    }
    lambda = next;
  }
  // Power iteration stalls when the top two eigenvalues (nearly) coincide in
  // modulus, e.g. bipartite graphs where 0 and 2 are both present.
  return jacobi_eigen(a).values.maxCoeff();
}

Eigen::MatrixXd symmetric_function(const Eigen::MatrixXd& a, const std::function<double(double)>& f) {
  SymEigen e = jacobi_eigen(a);
  Eigen::VectorXd fv = e.values.unaryExpr(f);
  return e.vectors * fv.asDiagonal() * e.vectors.transpose();
}

Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& a, int p) {
  if (p < 0) throw ParameterError("matrix_power: negative exponent");
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  for (int k = 0; k < p; ++k) out = out * a;
  return out;
}

double spectral_norm(const Eigen::MatrixXd& a) {
  Eigen::MatrixXd ata = a.transpose() * a;
  return std::sqrt(std::max(0.0, jacobi_eigen(ata).values.maxCoeff()));
}

}  // namespace ggl

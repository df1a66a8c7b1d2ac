#pragma once

#include <functional>

#include <Eigen/Dense>

namespace ggl {

struct SymEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns are eigenvectors
  int sweeps = 0;
};

// Cyclic Jacobi rotations; stops when the off-diagonal Frobenius norm drops
// below tol or after max_sweeps sweeps.
SymEigen jacobi_eigen(const Eigen::MatrixXd& a, double tol = 1e-12, int max_sweeps = 100);

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& a);

// Power iteration on a symmetric PSD matrix; falls back to Jacobi when the
// iteration stalls.
double largest_eigenvalue(const Eigen::MatrixXd& a, double tol = 1e-10, int max_iter = 20000);

// f(A) = V diag(f(lambda)) V^T for symmetric A.
Eigen::MatrixXd symmetric_function(const Eigen::MatrixXd& a, const std::function<double(double)>& f);

Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& a, int p);

// Spectral norm via the largest eigenvalue of A^T A.
double spectral_norm(const Eigen::MatrixXd& a);

}  // namespace ggl

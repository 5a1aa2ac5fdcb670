#pragma once

#include "phc/common.hpp"

#include <functional>

namespace phc {

// Largest eigenvalue of a symmetric matrix. Cyclic Jacobi sweeps for n <= 64,
// power iteration with a Rayleigh-quotient convergence test above that.
// Inputs are symmetrized as (A + A^T)/2 before factorization.
double max_eig_sym(const MatrixXd& A);

// All eigenvalues (ascending) of a small symmetric matrix, same Jacobi path.
VectorXd eig_sym(const MatrixXd& A);

struct NewtonOptions {
  double tol = 1e-10;       // on ||F(x)||_inf
  int max_iter = 50;
  double fd_step = 1e-7;    // forward-difference Jacobian step scale
  int max_backtrack = 12;
};

using ResidualFn = std::function<VectorXd(const VectorXd&)>;

// Damped Newton with forward-difference Jacobian; falls back to a damped
// fixed-point iteration when the Newton direction stalls. Throws
// SolverDiverged (carrying the best residual seen) on failure.
VectorXd solve_newton(const ResidualFn& F, const VectorXd& x0,
                      const NewtonOptions& opts = {});

// Forward-difference Jacobian of F at x, step 1e-7 * (1 + |x_j|).
MatrixXd fd_jacobian(const ResidualFn& F, const VectorXd& x, double step = 1e-7);

}  // namespace phc

#include "phc/numerics.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>

namespace phc {

const char* const kLibraryVersion = "0.1.0";

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw ConfigError("cannot parse number: '" + s + "'");
  return v;
}

namespace {

// Cyclic Jacobi with threshold sweeps; small matrices only.
VectorXd jacobi_eigenvalues(MatrixXd A) {
  const int n = int(A.rows());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += A(i, j) * A(i, j);
    if (off < 1e-30 * std::max(1.0, A.squaredNorm())) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (A(p, q) == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  VectorXd ev = A.diagonal();
  std::sort(ev.data(), ev.data() + n);
  return ev;
}

double power_iteration_max_eig(const MatrixXd& A) {
  const int n = int(A.rows());
  // Shift so the dominant eigenvalue of A + sI is the largest by magnitude.
  const double shift = A.cwiseAbs().rowwise().sum().maxCoeff();  // >= rho(A)
  const MatrixXd B = A + shift * MatrixXd::Identity(n, n);
  VectorXd v = VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));
  v[0] += 1e-3;  // break symmetry for structured matrices
  v.normalize();
  double lambda = v.dot(B * v);
  for (int it = 0; it < 10000; ++it) {
    VectorXd w = B * v;
    const double nw = w.norm();
    if (nw == 0.0) return -shift;  // A = -shift*I edge case
    w /= nw;
    const double next = w.dot(B * w);
    const bool converged = std::abs(next - lambda) <=
                           1e-12 * std::max(1.0, std::abs(next));
    lambda = next;
    v = w;
    if (converged) break;
  }
  return lambda - shift;
}

}  // namespace

VectorXd eig_sym(const MatrixXd& A) {
  if (A.rows() != A.cols()) throw ShapeError("eig_sym: matrix not square");
  if (!all_finite(A)) throw InvalidMatrix("eig_sym: non-finite entries");
  const MatrixXd S = 0.5 * (A + A.transpose());
  return jacobi_eigenvalues(S);
}

double max_eig_sym(const MatrixXd& A) {
  if (A.rows() != A.cols()) throw ShapeError("max_eig_sym: matrix not square");
  if (A.rows() == 0) throw ShapeError("max_eig_sym: empty matrix");
  if (!all_finite(A)) throw InvalidMatrix("max_eig_sym: non-finite entries");
  const MatrixXd S = 0.5 * (A + A.transpose());
  if (S.rows() <= 64) return jacobi_eigenvalues(S).maxCoeff();
  return power_iteration_max_eig(S);
}

MatrixXd fd_jacobian(const ResidualFn& F, const VectorXd& x, double step) {
  const VectorXd f0 = F(x);
  MatrixXd J(f0.size(), x.size());
  VectorXd xp = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = step * (1.0 + std::abs(x[j]));
    xp[j] = x[j] + h;
    J.col(j) = (F(xp) - f0) / h;
    xp[j] = x[j];
  }
  return J;
}

VectorXd solve_newton(const ResidualFn& F, const VectorXd& x0,
                      const NewtonOptions& opts) {
  VectorXd x = x0;
  VectorXd f = F(x);
  if (!all_finite(f))
    throw SolverDiverged("solve_newton: residual not finite at x0",
                         std::numeric_limits<double>::infinity());
  double res = f.lpNorm<Eigen::Infinity>();
  VectorXd best_x = x;
  double best_res = res;
  if (res <= opts.tol) return x;  // already at a root, zero iterations

  for (int it = 0; it < opts.max_iter; ++it) {
    const MatrixXd J = fd_jacobian(F, x, opts.fd_step);
    VectorXd dx = J.fullPivLu().solve(-f);
    if (!all_finite(dx)) break;
    // Backtracking line search on ||F||_inf.
    double lambda = 1.0;
    bool accepted = false;
    for (int bt = 0; bt <= opts.max_backtrack; ++bt) {
      const VectorXd xn = x + lambda * dx;
      const VectorXd fn = F(xn);
      if (all_finite(fn) && fn.lpNorm<Eigen::Infinity>() < res) {
        x = xn;
        f = fn;
        res = f.lpNorm<Eigen::Infinity>();
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (res < best_res) {
      best_res = res;
      best_x = x;
    }
    if (res <= opts.tol) return x;
    if (!accepted) break;  // Newton stalled, go to fixed-point fallback
  }

  // Damped fixed-point fallback: x <- x - beta F(x), shrinking beta on
  // failure to decrease the residual.
  x = best_x;
  f = F(x);
  res = f.lpNorm<Eigen::Infinity>();
  double beta = 0.5;
  for (int it = 0; it < opts.max_iter; ++it) {
    const VectorXd xn = x - beta * f;
    const VectorXd fn = F(xn);
    const double rn =
        all_finite(fn) ? fn.lpNorm<Eigen::Infinity>()
                       : std::numeric_limits<double>::infinity();
    if (rn < res) {
      x = xn;
      f = fn;
      res = rn;
      if (res < best_res) {
        best_res = res;
        best_x = x;
      }
      if (res <= opts.tol) return x;
    } else {
      beta *= 0.5;
      if (beta < 1e-12) break;
    }
  }
  throw SolverDiverged(
      "solve_newton: no convergence after both strategies (best residual " +
          format_g17(best_res) + ")",
      best_res);
}

}  // namespace phc

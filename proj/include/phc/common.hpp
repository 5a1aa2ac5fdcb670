#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace phc {

using Eigen::MatrixXd;
using Eigen::MatrixXi;
using Eigen::VectorXd;
using Eigen::VectorXi;

// ---------------------------------------------------------------------------
// Error types
// ---------------------------------------------------------------------------

struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidMatrix : std::runtime_error {
  explicit InvalidMatrix(const std::string& what) : std::runtime_error(what) {}
};

struct SolverDiverged : std::runtime_error {
  double best_residual;
  SolverDiverged(const std::string& what, double residual)
      : std::runtime_error(what), best_residual(residual) {}
};

struct NotConvexFamily : std::runtime_error {
  explicit NotConvexFamily(const std::string& what) : std::runtime_error(what) {}
};

struct NaNGradient : std::runtime_error {
  long step_index;
  NaNGradient(const std::string& what, long step)
      : std::runtime_error(what), step_index(step) {}
};

struct BlowupDetected : std::runtime_error {
  long step_index;
  BlowupDetected(const std::string& what, long step)
      : std::runtime_error(what), step_index(step) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Stable scalar kernels shared by the Hamiltonian families and the AD tape.
// ---------------------------------------------------------------------------

// softplus(x) = log(1 + e^x), computed as max(x,0) + log1p(e^-|x|).
inline double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

inline double sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log cosh(x) = |x| + log1p(e^{-2|x|}) - log 2; derivative tanh(x).
inline double logcosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - M_LN2;
}

namespace detail {

// Power series of Li2 on |z| <= 1/2 (also fine on [-1, 0]).
inline double dilog_series(double z) {
  double term = z, sum = z;
  for (int k = 2; k < 300; ++k) {
    term *= z;
    const double add = term / double(k * k);
    sum += add;
    if (std::abs(add) < 1e-18 * (1.0 + std::abs(sum))) break;
  }
  return sum;
}

// Li2(w) for w in (0, 1), reflecting the upper half onto the series range.
inline double dilog_01(double w) {
  if (w > 0.5) {
    return M_PI * M_PI / 6.0 - std::log(w) * std::log1p(-w) -
           dilog_01(1.0 - w);
  }
  return dilog_series(w);
}

}  // namespace detail

// Real dilogarithm Li2(z) for z <= 0: series on [-1, 0], Landen transform
// Li2(z) = -Li2(z/(z-1)) - ln^2(1-z)/2 for z < -1.
inline double dilog_nonpos(double z) {
  if (z > 0.0) throw std::invalid_argument("dilog_nonpos: z must be <= 0");
  if (z == 0.0) return 0.0;
  if (z < -1.0) {
    const double l = std::log1p(-z);
    return -detail::dilog_01(z / (z - 1.0)) - 0.5 * l * l;
  }
  return detail::dilog_series(z);
}

// Antiderivative of softplus with F(-inf) = 0; F(x) = -Li2(-e^x).
// Inversion formula avoids overflow of e^x for large x.
inline double softplus_antiderivative(double x) {
  if (x > 30.0) {
    return 0.5 * x * x + M_PI * M_PI / 6.0 + dilog_nonpos(-std::exp(-x));
  }
  return -dilog_nonpos(-std::exp(x));
}

// ---------------------------------------------------------------------------
// Deterministic RNG wrapper: all stochastic code paths draw from one of
// these, seeded explicitly, so identical (config, seed) reproduce runs.
// ---------------------------------------------------------------------------

class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(gen_);
  }
  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  uint64_t integer(uint64_t bound) {  // in [0, bound)
    return std::uniform_int_distribution<uint64_t>(0, bound - 1)(gen_);
  }

  VectorXd normal_vector(Eigen::Index n, double stddev = 1.0) {
    VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(0.0, stddev);
    return v;
  }
  MatrixXd normal_matrix(Eigen::Index r, Eigen::Index c, double stddev = 1.0) {
    MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = normal(0.0, stddev);
    return m;
  }
  // Uniform point in the ball of given radius around zero.
  VectorXd ball_vector(Eigen::Index n, double radius) {
    VectorXd v = normal_vector(n);
    const double r = std::pow(uniform(), 1.0 / double(n)) * radius;
    const double nv = v.norm();
    return nv > 0 ? VectorXd(v * (r / nv)) : v;
  }

  std::mt19937_64& raw() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

// ---------------------------------------------------------------------------
// Formatting: 17 significant digits round-trips IEEE doubles exactly.
// ---------------------------------------------------------------------------

std::string format_g17(double v);
double parse_double(const std::string& s);

inline bool all_finite(const VectorXd& v) { return v.allFinite(); }
inline bool all_finite(const MatrixXd& m) { return m.allFinite(); }

extern const char* const kLibraryVersion;

}  // namespace phc

#pragma once

#include "phc/common.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace phc {

// Parametrized Hamiltonian families. Every family evaluates to a nonnegative,
// radially unbounded energy; the convex ones additionally expose uniform
// Hessian bounds for the incremental-gain machinery.
enum class Family { Quadratic, Mlp, Icnn, Resnet, MonotoneGradient };

enum class Activation { SmoothRelu, TanhLogcosh, Sigmoid, Softplus };

std::string to_string(Family f);
std::string to_string(Activation a);
Family family_from_string(const std::string& s);
Activation activation_from_string(const std::string& s);

// Derivative bound S of the monotone activation sigma_m (Remark on monotone
// networks): tanh -> 1, sigmoid -> 1/4, softplus -> 1.
double activation_derivative_bound(Activation a);

struct HessianBounds {
  double c1 = 0.0;
  double c2 = 0.0;
  bool empirical = false;   // true when sampled (ICNN), exact otherwise
  double box_radius = 0.0;  // operating box used for sampled bounds
};

// One node's Hamiltonian H(xi; params). Layer conventions:
//   quadratic          H = xi^T (X^T X + eps I) xi
//   mlp                z_1 = act(W_0 xi + b_0), z_l = act(W_l z_{l-1} + b_l),
//                      H = 1^T z_L + eps xi^T xi          (eps >= 0)
//   icnn               z_1 = act(W_0 xi + b_0),
//                      z_l = act(exp(U_l) z_{l-1} + W_l xi + b_l),
//                      H = act(z_L - z_L(0)) + eps xi^T xi, last width 1
//   resnet             mlp-style layers, H = exp(Wo) . z_L + eps xi^T xi
//   monotone-gradient  grad H = W_0^T sigma_m(W_0 xi + b_0) + eps xi,
//                      H = 1^T Phi(W_0 xi + b_0) + eps/2 xi^T xi
// Nonnegative weights (icnn U, resnet Wo) are stored as free parameters and
// exponentiated on use, so the trainable space stays unconstrained.
struct HamiltonianModel {
  Family family = Family::Quadratic;
  Activation activation = Activation::TanhLogcosh;
  std::vector<int> dims;  // dims[0] = state dim, then layer widths
  std::vector<MatrixXd> W;
  std::vector<VectorXd> b;
  std::vector<MatrixXd> U_free;  // icnn only, layers 1..L-1
  VectorXd Wo_free;              // resnet only
  MatrixXd X;                    // quadratic only
  double epsilon = 0.0;

  int input_dim() const { return dims.empty() ? 0 : dims.front(); }
  int layer_count() const { return int(dims.size()) - 1; }
  void validate() const;

  // Flat free-parameter view (order: X, W0,b0, W1,b1, ..., U*, Wo).
  int param_count() const;
  VectorXd get_params() const;
  void set_params(const VectorXd& v);
};

// Family evaluation.
double h_value(const HamiltonianModel& model, const VectorXd& xi);
VectorXd h_gradient(const HamiltonianModel& model, const VectorXd& xi);

// Hessian at a point: exact for quadratic and monotone-gradient, central
// finite differences of h_gradient (step 1e-5) for the other families.
MatrixXd hessian_at(const HamiltonianModel& model, const VectorXd& xi);

// Uniform Hessian bounds 0 < c1 I <= Hess <= c2 I for the strictly convex
// families; throws NotConvexFamily for mlp/resnet. ICNN bounds are sampled
// over a box of the given radius and flagged empirical.
HessianBounds hessian_bounds(const HamiltonianModel& model,
                             double icnn_box_radius = 3.0,
                             int icnn_samples = 1000, uint64_t seed = 0);

// Factories with Kaiming-uniform weights (bound 1/sqrt(fan_in)), zero
// biases, exp-parametrized weights started near 0.1.
HamiltonianModel make_quadratic(int n, double epsilon, Rng& rng,
                                double scale = 1.0);
HamiltonianModel make_mlp(const std::vector<int>& dims, Activation act,
                          double epsilon, Rng& rng, double scale = 1.0);
HamiltonianModel make_icnn(const std::vector<int>& dims, double epsilon,
                           Rng& rng, double scale = 1.0);
HamiltonianModel make_resnet(const std::vector<int>& dims, Activation act,
                             double epsilon, Rng& rng, double scale = 1.0);
HamiltonianModel make_monotone_gradient(int n, int width, Activation act,
                                        double epsilon, Rng& rng,
                                        double scale = 1.0);

// Structured-text serialization; round-trip is bit-exact for finite doubles.
void write_model(std::ostream& os, const HamiltonianModel& model);
HamiltonianModel read_model(std::istream& is);

}  // namespace phc

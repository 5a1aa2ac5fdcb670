#include "phc/hamiltonian.hpp"

#include "phc/numerics.hpp"

#include <istream>
#include <ostream>
#include <sstream>

namespace phc {

std::string to_string(Family f) {
  switch (f) {
    case Family::Quadratic: return "quadratic";
    case Family::Mlp: return "mlp";
    case Family::Icnn: return "icnn";
    case Family::Resnet: return "resnet";
    case Family::MonotoneGradient: return "monotone-gradient";
  }
  return "?";
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::SmoothRelu: return "smooth-relu";
    case Activation::TanhLogcosh: return "tanh-logcosh";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Softplus: return "softplus";
  }
  return "?";
}

Family family_from_string(const std::string& s) {
  if (s == "quadratic") return Family::Quadratic;
  if (s == "mlp") return Family::Mlp;
  if (s == "icnn") return Family::Icnn;
  if (s == "resnet") return Family::Resnet;
  if (s == "monotone-gradient") return Family::MonotoneGradient;
  throw ConfigError("unknown Hamiltonian family: '" + s + "'");
}

Activation activation_from_string(const std::string& s) {
  if (s == "smooth-relu") return Activation::SmoothRelu;
  if (s == "tanh-logcosh") return Activation::TanhLogcosh;
  if (s == "sigmoid") return Activation::Sigmoid;
  if (s == "softplus") return Activation::Softplus;
  throw ConfigError("unknown activation: '" + s + "'");
}

double activation_derivative_bound(Activation a) {
  switch (a) {
    case Activation::TanhLogcosh: return 1.0;
    case Activation::Sigmoid: return 0.25;
    case Activation::SmoothRelu:
    case Activation::Softplus: return 1.0;
  }
  return 1.0;
}

namespace {

// Layer nonlinearity used by mlp/icnn/resnet (nonnegative by construction,
// SmoothReLU is softplus).
double act_value(Activation a, double x) {
  switch (a) {
    case Activation::SmoothRelu:
    case Activation::Softplus: return softplus(x);
    case Activation::TanhLogcosh: return logcosh(x);
    case Activation::Sigmoid: return sigmoid(x);
  }
  return 0.0;
}

double act_deriv(Activation a, double x) {
  switch (a) {
    case Activation::SmoothRelu:
    case Activation::Softplus: return sigmoid(x);
    case Activation::TanhLogcosh: return std::tanh(x);
    case Activation::Sigmoid: {
      const double s = sigmoid(x);
      return s * (1.0 - s);
    }
  }
  return 0.0;
}

// Monotone activation sigma_m and its antiderivative Phi >= 0.
double mono_value(Activation a, double x) {
  switch (a) {
    case Activation::TanhLogcosh: return std::tanh(x);
    case Activation::Sigmoid: return sigmoid(x);
    case Activation::SmoothRelu:
    case Activation::Softplus: return softplus(x);
  }
  return 0.0;
}

double mono_deriv(Activation a, double x) {
  switch (a) {
    case Activation::TanhLogcosh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::Sigmoid: {
      const double s = sigmoid(x);
      return s * (1.0 - s);
    }
    case Activation::SmoothRelu:
    case Activation::Softplus: return sigmoid(x);
  }
  return 0.0;
}

double mono_antiderivative(Activation a, double x) {
  switch (a) {
    case Activation::TanhLogcosh: return logcosh(x);
    case Activation::Sigmoid: return softplus(x);
    case Activation::SmoothRelu:
    case Activation::Softplus: return softplus_antiderivative(x);
  }
  return 0.0;
}

VectorXd cw(Activation a, double (*f)(Activation, double), const VectorXd& v) {
  VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = f(a, v[i]);
  return out;
}

void check_xi(const HamiltonianModel& m, const VectorXd& xi) {
  if (xi.size() != m.input_dim())
    throw ShapeError("Hamiltonian: xi has dim " + std::to_string(xi.size()) +
                     ", model expects " + std::to_string(m.input_dim()));
}

// Pre-activation stack for mlp/resnet layers.
std::vector<VectorXd> mlp_forward(const HamiltonianModel& m,
                                  const VectorXd& xi) {
  std::vector<VectorXd> a;
  VectorXd z = xi;
  for (int l = 0; l < m.layer_count(); ++l) {
    a.push_back(m.W[l] * z + m.b[l]);
    z = cw(m.activation, act_value, a.back());
  }
  return a;
}

// ICNN pre-activations; U weights enter as exp(U_free).
std::vector<VectorXd> icnn_forward(const HamiltonianModel& m,
                                   const VectorXd& xi) {
  std::vector<VectorXd> a;
  VectorXd z;
  for (int l = 0; l < m.layer_count(); ++l) {
    VectorXd pre = m.W[l] * xi + m.b[l];
    if (l > 0) pre += m.U_free[l - 1].array().exp().matrix() * z;
    a.push_back(pre);
    z = cw(m.activation, act_value, pre);
  }
  return a;
}

double icnn_phi(const HamiltonianModel& m, const VectorXd& xi) {
  const auto a = icnn_forward(m, xi);
  return act_value(m.activation, a.back()[0]);
}

}  // namespace

void HamiltonianModel::validate() const {
  if (dims.empty() || dims.front() <= 0)
    throw ShapeError("HamiltonianModel: missing input dimension");
  const int L = layer_count();
  switch (family) {
    case Family::Quadratic:
      if (X.rows() != dims[0] || X.cols() != dims[0])
        throw ShapeError("quadratic: X must be n x n");
      if (epsilon <= 0) throw ConfigError("quadratic: epsilon must be > 0");
      break;
    case Family::Mlp:
      if (L < 1) throw ShapeError("mlp: needs at least one layer");
      if (epsilon < 0) throw ConfigError("mlp: epsilon must be >= 0");
      break;
    case Family::Icnn:
      if (L < 2) throw ShapeError("icnn: needs at least two layers");
      if (dims.back() != 1) throw ShapeError("icnn: last layer width must be 1");
      if (int(U_free.size()) != L - 1)
        throw ShapeError("icnn: needs L-1 inner weight matrices");
      if (activation != Activation::SmoothRelu &&
          activation != Activation::Softplus)
        throw ConfigError(
            "icnn: activation must be convex and nondecreasing (softplus)");
      if (epsilon <= 0) throw ConfigError("icnn: epsilon must be > 0");
      break;
    case Family::Resnet:
      if (L < 1) throw ShapeError("resnet: needs at least one layer");
      if (Wo_free.size() != dims.back())
        throw ShapeError("resnet: output weight size mismatch");
      if (epsilon <= 0) throw ConfigError("resnet: epsilon must be > 0");
      break;
    case Family::MonotoneGradient:
      if (L != 1) throw ShapeError("monotone-gradient: exactly one layer");
      if (epsilon <= 0)
        throw ConfigError("monotone-gradient: epsilon must be > 0");
      break;
  }
  if (family != Family::Quadratic) {
    if (int(W.size()) != L || int(b.size()) != L)
      throw ShapeError("HamiltonianModel: layer count mismatch");
    for (int l = 0; l < L; ++l) {
      const int in = (family == Family::Icnn || l == 0) ? dims[0] : dims[l];
      const int in_eff = (family == Family::Icnn) ? dims[0] : in;
      if (W[l].rows() != dims[l + 1] || W[l].cols() != in_eff)
        throw ShapeError("HamiltonianModel: W" + std::to_string(l) +
                         " shape mismatch");
      if (b[l].size() != dims[l + 1])
        throw ShapeError("HamiltonianModel: b" + std::to_string(l) +
                         " shape mismatch");
    }
    if (family == Family::Icnn)
      for (int l = 0; l + 1 < L; ++l)
        if (U_free[l].rows() != dims[l + 2] || U_free[l].cols() != dims[l + 1])
          throw ShapeError("icnn: U" + std::to_string(l + 2) +
                           " shape mismatch");
  }
}

double h_value(const HamiltonianModel& m, const VectorXd& xi) {
  check_xi(m, xi);
  switch (m.family) {
    case Family::Quadratic: {
      const VectorXd y = m.X * xi;
      return y.squaredNorm() + m.epsilon * xi.squaredNorm();
    }
    case Family::Mlp: {
      const auto a = mlp_forward(m, xi);
      return cw(m.activation, act_value, a.back()).sum() +
             m.epsilon * xi.squaredNorm();
    }
    case Family::Icnn: {
      const double phi = icnn_phi(m, xi);
      const double phi0 = icnn_phi(m, VectorXd::Zero(xi.size()));
      return act_value(m.activation, phi - phi0) +
             m.epsilon * xi.squaredNorm();
    }
    case Family::Resnet: {
      const auto a = mlp_forward(m, xi);
      const VectorXd zL = cw(m.activation, act_value, a.back());
      return m.Wo_free.array().exp().matrix().dot(zL) +
             m.epsilon * xi.squaredNorm();
    }
    case Family::MonotoneGradient: {
      const VectorXd a = m.W[0] * xi + m.b[0];
      double sum = 0.0;
      for (Eigen::Index i = 0; i < a.size(); ++i)
        sum += mono_antiderivative(m.activation, a[i]);
      return sum + 0.5 * m.epsilon * xi.squaredNorm();
    }
  }
  return 0.0;
}

VectorXd h_gradient(const HamiltonianModel& m, const VectorXd& xi) {
  check_xi(m, xi);
  switch (m.family) {
    case Family::Quadratic: {
      return 2.0 * (m.X.transpose() * (m.X * xi) + m.epsilon * xi);
    }
    case Family::Mlp: {
      const auto a = mlp_forward(m, xi);
      const int L = m.layer_count();
      VectorXd delta = VectorXd::Ones(m.dims[L]);
      for (int l = L - 1; l >= 1; --l) {
        const VectorXd s =
            cw(m.activation, act_deriv, a[l]).cwiseProduct(delta);
        delta = m.W[l].transpose() * s;
      }
      const VectorXd s0 =
          cw(m.activation, act_deriv, a[0]).cwiseProduct(delta);
      return m.W[0].transpose() * s0 + 2.0 * m.epsilon * xi;
    }
    case Family::Icnn: {
      const auto a = icnn_forward(m, xi);
      const double phi = act_value(m.activation, a.back()[0]);
      const double phi0 = icnn_phi(m, VectorXd::Zero(xi.size()));
      const double outer = act_deriv(m.activation, phi - phi0);
      const int L = m.layer_count();
      VectorXd grad = VectorXd::Zero(xi.size());
      VectorXd delta = VectorXd::Constant(1, outer);
      for (int l = L - 1; l >= 0; --l) {
        const VectorXd s =
            cw(m.activation, act_deriv, a[l]).cwiseProduct(delta);
        grad += m.W[l].transpose() * s;
        if (l > 0)
          delta = m.U_free[l - 1].array().exp().matrix().transpose() * s;
      }
      return grad + 2.0 * m.epsilon * xi;
    }
    case Family::Resnet: {
      const auto a = mlp_forward(m, xi);
      const int L = m.layer_count();
      VectorXd delta = m.Wo_free.array().exp().matrix();
      for (int l = L - 1; l >= 1; --l) {
        const VectorXd s =
            cw(m.activation, act_deriv, a[l]).cwiseProduct(delta);
        delta = m.W[l].transpose() * s;
      }
      const VectorXd s0 =
          cw(m.activation, act_deriv, a[0]).cwiseProduct(delta);
      return m.W[0].transpose() * s0 + 2.0 * m.epsilon * xi;
    }
    case Family::MonotoneGradient: {
      const VectorXd a = m.W[0] * xi + m.b[0];
      return m.W[0].transpose() * cw(m.activation, mono_value, a) +
             m.epsilon * xi;
    }
  }
  return VectorXd();
}

MatrixXd hessian_at(const HamiltonianModel& m, const VectorXd& xi) {
  check_xi(m, xi);
  if (m.family == Family::Quadratic)
    return 2.0 * (m.X.transpose() * m.X +
                  m.epsilon * MatrixXd::Identity(xi.size(), xi.size()));
  if (m.family == Family::MonotoneGradient) {
    const VectorXd a = m.W[0] * xi + m.b[0];
    const VectorXd d = cw(m.activation, mono_deriv, a);
    return m.W[0].transpose() * d.asDiagonal() * m.W[0] +
           m.epsilon * MatrixXd::Identity(xi.size(), xi.size());
  }
  // Central differences of the analytic gradient.
  const Eigen::Index n = xi.size();
  MatrixXd H(n, n);
  VectorXd xp = xi;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = 1e-5 * (1.0 + std::abs(xi[j]));
    xp[j] = xi[j] + h;
    const VectorXd gp = h_gradient(m, xp);
    xp[j] = xi[j] - h;
    const VectorXd gm = h_gradient(m, xp);
    xp[j] = xi[j];
    H.col(j) = (gp - gm) / (2.0 * h);
  }
  return 0.5 * (H + H.transpose());
}

HessianBounds hessian_bounds(const HamiltonianModel& m, double icnn_box_radius,
                             int icnn_samples, uint64_t seed) {
  HessianBounds out;
  switch (m.family) {
    case Family::Quadratic: {
      const VectorXd ev = eig_sym(
          2.0 * (m.X.transpose() * m.X +
                 m.epsilon * MatrixXd::Identity(m.input_dim(), m.input_dim())));
      out.c1 = ev.minCoeff();
      out.c2 = ev.maxCoeff();
      return out;
    }
    case Family::MonotoneGradient: {
      out.c1 = m.epsilon;
      out.c2 = activation_derivative_bound(m.activation) *
                   max_eig_sym(m.W[0].transpose() * m.W[0]) +
               m.epsilon;
      return out;
    }
    case Family::Icnn: {
      Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (int s = 0; s < icnn_samples; ++s) {
        VectorXd xi(m.input_dim());
        for (int i = 0; i < m.input_dim(); ++i)
          xi[i] = rng.uniform(-icnn_box_radius, icnn_box_radius);
        const VectorXd ev = eig_sym(hessian_at(m, xi));
        lo = std::min(lo, ev.minCoeff());
        hi = std::max(hi, ev.maxCoeff());
      }
      out.c1 = lo / 1.2;
      out.c2 = hi * 1.2;
      out.empirical = true;
      out.box_radius = icnn_box_radius;
      return out;
    }
    case Family::Mlp:
    case Family::Resnet:
      throw NotConvexFamily("hessian_bounds: " + to_string(m.family) +
                            " has no uniform convexity bounds");
  }
  return out;
}

namespace {

MatrixXd kaiming(Rng& rng, int rows, int cols, double scale) {
  const double bound = scale / std::sqrt(double(cols));
  MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-bound, bound);
  return m;
}

}  // namespace

HamiltonianModel make_quadratic(int n, double epsilon, Rng& rng, double scale) {
  HamiltonianModel m;
  m.family = Family::Quadratic;
  m.dims = {n};
  m.X = kaiming(rng, n, n, scale);
  m.epsilon = epsilon;
  m.validate();
  return m;
}

HamiltonianModel make_mlp(const std::vector<int>& dims, Activation act,
                          double epsilon, Rng& rng, double scale) {
  HamiltonianModel m;
  m.family = Family::Mlp;
  m.activation = act;
  m.dims = dims;
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    m.W.push_back(kaiming(rng, dims[l + 1], dims[l], scale));
    m.b.push_back(VectorXd::Zero(dims[l + 1]));
  }
  m.epsilon = epsilon;
  m.validate();
  return m;
}

HamiltonianModel make_icnn(const std::vector<int>& dims, double epsilon,
                           Rng& rng, double scale) {
  HamiltonianModel m;
  m.family = Family::Icnn;
  m.activation = Activation::SmoothRelu;
  m.dims = dims;
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    m.W.push_back(kaiming(rng, dims[l + 1], dims[0], scale));
    m.b.push_back(VectorXd::Zero(dims[l + 1]));
    if (l > 0)
      m.U_free.push_back(
          MatrixXd::Constant(dims[l + 1], dims[l], std::log(0.1)));
  }
  m.epsilon = epsilon;
  m.validate();
  return m;
}

HamiltonianModel make_resnet(const std::vector<int>& dims, Activation act,
                             double epsilon, Rng& rng, double scale) {
  HamiltonianModel m;
  m.family = Family::Resnet;
  m.activation = act;
  m.dims = dims;
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    m.W.push_back(kaiming(rng, dims[l + 1], dims[l], scale));
    m.b.push_back(VectorXd::Zero(dims[l + 1]));
  }
  m.Wo_free = VectorXd::Constant(dims.back(), std::log(0.1));
  m.epsilon = epsilon;
  m.validate();
  return m;
}

HamiltonianModel make_monotone_gradient(int n, int width, Activation act,
                                        double epsilon, Rng& rng, double scale) {
  HamiltonianModel m;
  m.family = Family::MonotoneGradient;
  m.activation = act;
  m.dims = {n, width};
  m.W.push_back(kaiming(rng, width, n, scale));
  m.b.push_back(VectorXd::Zero(width));
  m.epsilon = epsilon;
  m.validate();
  return m;
}

int HamiltonianModel::param_count() const {
  int n = 0;
  if (family == Family::Quadratic) n += int(X.size());
  for (const auto& w : W) n += int(w.size());
  for (const auto& bb : b) n += int(bb.size());
  for (const auto& u : U_free) n += int(u.size());
  n += int(Wo_free.size());
  return n;
}

VectorXd HamiltonianModel::get_params() const {
  VectorXd v(param_count());
  int at = 0;
  auto put_mat = [&](const MatrixXd& M) {
    for (Eigen::Index i = 0; i < M.rows(); ++i)
      for (Eigen::Index j = 0; j < M.cols(); ++j) v[at++] = M(i, j);
  };
  if (family == Family::Quadratic) put_mat(X);
  for (size_t l = 0; l < W.size(); ++l) {
    put_mat(W[l]);
    for (Eigen::Index i = 0; i < b[l].size(); ++i) v[at++] = b[l][i];
  }
  for (const auto& u : U_free) put_mat(u);
  for (Eigen::Index i = 0; i < Wo_free.size(); ++i) v[at++] = Wo_free[i];
  return v;
}

void HamiltonianModel::set_params(const VectorXd& v) {
  if (v.size() != param_count())
    throw ShapeError("HamiltonianModel::set_params: size mismatch");
  int at = 0;
  auto get_mat = [&](MatrixXd& M) {
    for (Eigen::Index i = 0; i < M.rows(); ++i)
      for (Eigen::Index j = 0; j < M.cols(); ++j) M(i, j) = v[at++];
  };
  if (family == Family::Quadratic) get_mat(X);
  for (size_t l = 0; l < W.size(); ++l) {
    get_mat(W[l]);
    for (Eigen::Index i = 0; i < b[l].size(); ++i) b[l][i] = v[at++];
  }
  for (auto& u : U_free) get_mat(u);
  for (Eigen::Index i = 0; i < Wo_free.size(); ++i) Wo_free[i] = v[at++];
}

namespace {

void write_matrix(std::ostream& os, const std::string& tag, const MatrixXd& M) {
  os << tag << " " << M.rows() << " " << M.cols() << "\n";
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      os << (j ? " " : "") << format_g17(M(i, j));
    os << "\n";
  }
}

MatrixXd read_matrix(std::istream& is, Eigen::Index rows, Eigen::Index cols) {
  MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      std::string tok;
      if (!(is >> tok)) throw ConfigError("model file: truncated matrix");
      M(i, j) = parse_double(tok);
    }
  return M;
}

}  // namespace

void write_model(std::ostream& os, const HamiltonianModel& m) {
  os << "phc-hamiltonian 1\n";
  os << "family " << to_string(m.family) << "\n";
  os << "activation " << to_string(m.activation) << "\n";
  os << "epsilon " << format_g17(m.epsilon) << "\n";
  os << "dims " << m.dims.size();
  for (int d : m.dims) os << " " << d;
  os << "\n";
  if (m.family == Family::Quadratic) write_matrix(os, "X", m.X);
  for (size_t l = 0; l < m.W.size(); ++l) {
    write_matrix(os, "W" + std::to_string(l), m.W[l]);
    write_matrix(os, "b" + std::to_string(l), m.b[l]);
  }
  for (size_t l = 0; l < m.U_free.size(); ++l)
    write_matrix(os, "U" + std::to_string(l + 1), m.U_free[l]);
  if (m.Wo_free.size() > 0) write_matrix(os, "Wo", m.Wo_free);
  os << "end\n";
}

HamiltonianModel read_model(std::istream& is) {
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != "phc-hamiltonian" || version != 1)
    throw ConfigError("model file: bad header");
  HamiltonianModel m;
  std::string key;
  while (is >> key && key != "end") {
    if (key == "family") {
      std::string v;
      is >> v;
      m.family = family_from_string(v);
    } else if (key == "activation") {
      std::string v;
      is >> v;
      m.activation = activation_from_string(v);
    } else if (key == "epsilon") {
      std::string v;
      is >> v;
      m.epsilon = parse_double(v);
    } else if (key == "dims") {
      size_t k;
      is >> k;
      m.dims.resize(k);
      for (auto& d : m.dims) is >> d;
    } else if (key == "X" || key == "Wo" || key[0] == 'W' || key[0] == 'b' ||
               key[0] == 'U') {
      Eigen::Index rows, cols;
      is >> rows >> cols;
      MatrixXd M = read_matrix(is, rows, cols);
      if (key == "X") {
        m.X = M;
      } else if (key == "Wo") {
        m.Wo_free = M.col(0);
      } else if (key[0] == 'W') {
        m.W.push_back(M);
      } else if (key[0] == 'b') {
        m.b.push_back(M.col(0));
      } else {
        m.U_free.push_back(M);
      }
    } else {
      throw ConfigError("model file: unknown key '" + key + "'");
    }
  }
  m.validate();
  return m;
}

}  // namespace phc

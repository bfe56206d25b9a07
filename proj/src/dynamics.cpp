#include "mppi/dynamics.hpp"

#include <fstream>
#include <sstream>

namespace mppi {

Vec clamp_controls(const Vec& v, const ControlBounds& bounds) {
  if (v.size() != bounds.lower.size()) {
    throw std::invalid_argument("clamp_controls: dimension mismatch");
  }
  Vec out(v.size());
  for (int i = 0; i < v.size(); ++i) {
    out[i] = std::clamp(v[i], bounds.lower[i], bounds.upper[i]);
  }
  return out;
}

ControlInput clamp_controls(const ControlInput& v, const ControlBounds& bounds) {
  return ControlInput::from_vec(clamp_controls(Vec(v.vec()), bounds));
}

double brush_tire_force(double alpha, double u_F, const BicycleParams& p) {
  const double limit = p.mu * p.load;
  if (std::abs(u_F) > limit) {
    throw std::domain_error("brush_tire_force: |u_F| exceeds the friction circle mu*F_z");
  }
  const double xi = std::sqrt(limit * limit - u_F * u_F) / limit;
  if (xi == 0.0) {
    // fully saturated longitudinally, no lateral capacity left
    return 0.0;
  }
  const double sign = (alpha >= 0.0) ? 1.0 : -1.0;
  // crossover where the cubic meets the friction limit -mu*xi*F_z
  const double crossover = std::atan(3.0 * xi * p.mu * p.load / p.stiffness);
  if (std::abs(alpha) >= crossover) {
    return -p.mu * xi * p.load * sign;
  }
  const double ta = std::tan(alpha);
  const double c = p.stiffness;
  return -c * ta + c * c / (3.0 * xi * p.mu * p.load) * ta * std::abs(ta) -
         c * c * c / (27.0 * p.mu * p.mu * xi * xi * p.load * p.load) * ta * ta * ta;
}

namespace {

constexpr double kSlipGuardSpeed = 0.1;  // below this v_x the slip angles degenerate

}  // namespace

VehicleState step_bicycle_truth(const VehicleState& x, const ControlInput& v,
                                double dt, const BicycleParams& p) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_bicycle_truth: dt must be > 0");

  const double u_delta = p.steer_scale * v.steer;
  const double u_F = p.force_scale * v.throttle;
  const double r = x.theta_dot;

  double alpha_f, alpha_r;
  if (x.v_x > kSlipGuardSpeed) {
    const double beta = x.v_y / x.v_x;
    alpha_f = std::atan(beta + p.a * r / x.v_x) - u_delta;
    alpha_r = std::atan(beta - p.b * r / x.v_x);
  } else {
    alpha_f = -u_delta;
    alpha_r = 0.0;
  }

  const double f_yf = brush_tire_force(alpha_f, u_F, p);
  const double f_yr = brush_tire_force(alpha_r, u_F, p);

  VehicleState n = x;
  n.p_x += (std::cos(x.theta) * x.v_x - std::sin(x.theta) * x.v_y) * dt;
  n.p_y += (std::sin(x.theta) * x.v_x + std::cos(x.theta) * x.v_y) * dt;
  n.theta += r * dt;
  // r*v_x*beta with beta = v_y/v_x reduces to r*v_y
  n.v_x += ((u_F - f_yf * std::sin(u_delta)) / p.mass + r * x.v_y) * dt;
  n.v_y += ((f_yf + f_yr) / p.mass - r * x.v_x) * dt;
  n.theta_dot += ((p.a * f_yf - p.b * f_yr) / p.yaw_inertia) * dt;
  return n;
}

BasisVec eval_basis(const Eigen::Vector4d& x_d, const ControlInput& v) {
  const double roll = x_d[0];
  const double v_x = x_d[1];
  const double v_y = x_d[2];
  const double r = x_d[3];
  const double u_delta = v.steer;
  const double u_F = v.throttle;

  double alpha_f, alpha_r, ratio;
  if (v_x > kSlipGuardSpeed) {
    ratio = v_y / v_x;
    alpha_f = std::atan(ratio + 0.45 * r / v_x - u_delta);
    alpha_r = std::atan(ratio - 0.35 * r / v_x);
  } else {
    ratio = 0.0;
    alpha_f = -u_delta;
    alpha_r = 0.0;
  }

  const double tf = std::tan(alpha_f);
  const double tr = std::tan(alpha_r);
  const double sd = std::sin(u_delta);

  BasisVec phi;
  phi[0] = u_F;
  phi[1] = v_x / 10.0;
  phi[2] = sd * tf / 1200.0;
  phi[3] = sd * tf * std::abs(tf) / (1200.0 * 1200.0);
  phi[4] = sd * tf * tf * tf / (1200.0 * 1200.0 * 1200.0);
  phi[5] = r * v_y / 25.0;
  phi[6] = r / 10.0;
  phi[7] = v_y / 10.0;
  phi[8] = sd;
  phi[9] = ratio / 40.0;
  phi[10] = tf / 1400.0;
  phi[11] = tf * std::abs(tf) / (1400.0 * 1400.0);
  phi[12] = tf * tf * tf / (1400.0 * 1400.0 * 1400.0);
  phi[13] = tr / 40.0;
  phi[14] = tr * std::abs(tr) / (40.0 * 40.0);
  phi[15] = tr * tr * tr / (40.0 * 40.0 * 40.0);
  phi[16] = r * v_x / 50.0;
  phi[17] = roll;
  phi[18] = roll * r;
  phi[19] = roll * v_x / 3.0;
  phi[20] = roll * v_x * r / 5.0;
  phi[21] = v_x * v_x / 100.0;
  phi[22] = v_x * v_x * v_x / 1000.0;
  phi[23] = u_F * u_F;
  phi[24] = u_F * u_F * u_F;
  return phi;
}

namespace {

VehicleState advance_split(const VehicleState& x, const Eigen::Vector4d& xd_dot,
                           double dt) {
  VehicleState n = x;
  n.p_x += (std::cos(x.theta) * x.v_x - std::sin(x.theta) * x.v_y) * dt;
  n.p_y += (std::sin(x.theta) * x.v_x + std::cos(x.theta) * x.v_y) * dt;
  n.theta += x.theta_dot * dt;
  n.roll += xd_dot[0] * dt;
  n.v_x += xd_dot[1] * dt;
  n.v_y += xd_dot[2] * dt;
  n.theta_dot += xd_dot[3] * dt;
  return n;
}

}  // namespace

VehicleState step_basis_model(const VehicleState& x, const ControlInput& v,
                              double dt, const ThetaMatrix& theta) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_basis_model: dt must be > 0");
  const Eigen::Vector4d xd_dot = theta.coeffs.transpose() * eval_basis(x.dynamic_block(), v);
  return advance_split(x, xd_dot, dt);
}

ThetaMatrix fit_theta(const std::vector<SysidSample>& dataset, double reg) {
  const int n = static_cast<int>(dataset.size());
  if (n < 1) throw std::invalid_argument("fit_theta: empty dataset");
  if (!(reg >= 0.0)) throw std::invalid_argument("fit_theta: reg must be >= 0");

  Mat phi(n, ThetaMatrix::kBasis);
  Mat y(n, ThetaMatrix::kOutputs);
  for (int i = 0; i < n; ++i) {
    phi.row(i) = eval_basis(dataset[i].x_d, dataset[i].v).transpose();
    y.row(i) = dataset[i].target.transpose();
  }

  ThetaMatrix theta;
  if (reg > 0.0) {
    // ridge solution via the augmented least-squares system [Phi; sqrt(reg) I],
    // which equals (Phi^T Phi + reg I)^{-1} Phi^T Y without squaring the
    // condition number
    Mat aug(n + ThetaMatrix::kBasis, ThetaMatrix::kBasis);
    aug.topRows(n) = phi;
    aug.bottomRows(ThetaMatrix::kBasis) =
        std::sqrt(reg) * Mat::Identity(ThetaMatrix::kBasis, ThetaMatrix::kBasis);
    Mat rhs = Mat::Zero(n + ThetaMatrix::kBasis, ThetaMatrix::kOutputs);
    rhs.topRows(n) = y;
    theta.coeffs = aug.colPivHouseholderQr().solve(rhs);
  } else {
    Eigen::ColPivHouseholderQR<Mat> qr(phi);
    if (qr.rank() < ThetaMatrix::kBasis) {
      throw std::runtime_error(
          "fit_theta: normal equations are singular with reg = 0; use reg > 0");
    }
    theta.coeffs = qr.solve(y);
  }
  if (!theta.coeffs.allFinite()) {
    throw std::runtime_error("fit_theta: solve produced non-finite coefficients");
  }
  return theta;
}

Eigen::Vector4d mlp_forward(const Eigen::Vector4d& x_d, const ControlInput& v,
                            const MlpWeights& w) {
  Eigen::Matrix<double, 6, 1> in;
  in << x_d[0], x_d[1], x_d[2], x_d[3], v.steer, v.throttle;
  const Eigen::Matrix<double, 32, 1> h1 = (w.w1 * in + w.b1).array().tanh();
  const Eigen::Matrix<double, 32, 1> h2 = (w.w2 * h1 + w.b2).array().tanh();
  return w.w3 * h2 + w.b3;
}

VehicleState step_mlp_model(const VehicleState& x, const ControlInput& v,
                            double dt, const MlpWeights& w) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_mlp_model: dt must be > 0");
  return advance_split(x, mlp_forward(x.dynamic_block(), v, w), dt);
}

// --- file io ---------------------------------------------------------------

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  return out;
}

}  // namespace

ThetaMatrix load_theta(const std::string& path) {
  auto in = open_input(path);
  ThetaMatrix theta;
  for (int i = 0; i < ThetaMatrix::kBasis; ++i) {
    for (int j = 0; j < ThetaMatrix::kOutputs; ++j) {
      if (!(in >> theta.coeffs(i, j))) {
        throw std::runtime_error("load_theta: expected 25x4 values in " + path);
      }
    }
  }
  if (!theta.coeffs.allFinite()) {
    throw std::runtime_error("load_theta: non-finite entry in " + path);
  }
  return theta;
}

void save_theta(const ThetaMatrix& theta, const std::string& path) {
  auto out = open_output(path);
  out.precision(17);
  for (int i = 0; i < ThetaMatrix::kBasis; ++i) {
    for (int j = 0; j < ThetaMatrix::kOutputs; ++j) {
      out << theta.coeffs(i, j) << (j + 1 < ThetaMatrix::kOutputs ? ' ' : '\n');
    }
  }
}

namespace {

void read_matrix(std::istream& in, Mat& m, const std::string& what) {
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (!(in >> m(i, j))) throw std::runtime_error("load_mlp: truncated " + what);
    }
  }
}

void write_matrix(std::ostream& out, const Mat& m) {
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      out << m(i, j) << (j + 1 < m.cols() ? ' ' : '\n');
    }
  }
}

}  // namespace

MlpWeights load_mlp(const std::string& path) {
  auto in = open_input(path);
  int sizes[4];
  for (int& s : sizes) {
    if (!(in >> s)) throw std::runtime_error("load_mlp: missing layer-size header");
  }
  if (sizes[0] != 6 || sizes[1] != 32 || sizes[2] != 32 || sizes[3] != 4) {
    throw std::runtime_error("load_mlp: layer sizes must be 6 32 32 4");
  }
  MlpWeights w;
  Mat m1(32, 6), v1(32, 1), m2(32, 32), v2(32, 1), m3(4, 32), v3(4, 1);
  read_matrix(in, m1, "w1");
  read_matrix(in, v1, "b1");
  read_matrix(in, m2, "w2");
  read_matrix(in, v2, "b2");
  read_matrix(in, m3, "w3");
  read_matrix(in, v3, "b3");
  w.w1 = m1; w.b1 = v1; w.w2 = m2; w.b2 = v2; w.w3 = m3; w.b3 = v3;
  return w;
}

void save_mlp(const MlpWeights& w, const std::string& path) {
  auto out = open_output(path);
  out.precision(17);
  out << "6 32 32 4\n";
  write_matrix(out, w.w1);
  write_matrix(out, w.b1);
  write_matrix(out, w.w2);
  write_matrix(out, w.b2);
  write_matrix(out, w.w3);
  write_matrix(out, w.b3);
}

std::vector<SysidSample> load_sysid_dataset(const std::string& path) {
  auto in = open_input(path);
  std::vector<SysidSample> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    for (char& c : line) {
      if (c == ',') c = ' ';
    }
    std::istringstream ls(line);
    double vals[10];
    int got = 0;
    while (got < 10 && (ls >> vals[got])) ++got;
    if (got == 0) continue;  // blank or comment-only line
    double extra;
    if (got < 10 || (ls >> extra)) {
      throw std::runtime_error("sysid dataset: line " + std::to_string(line_no) +
                               " of " + path + " must have exactly 10 columns");
    }
    SysidSample s;
    s.x_d << vals[0], vals[1], vals[2], vals[3];
    s.v = ControlInput{vals[4], vals[5]};
    s.target << vals[6], vals[7], vals[8], vals[9];
    rows.push_back(s);
  }
  return rows;
}

void save_sysid_dataset(const std::vector<SysidSample>& rows, const std::string& path) {
  auto out = open_output(path);
  out.precision(17);
  for (const auto& s : rows) {
    out << s.x_d[0] << ' ' << s.x_d[1] << ' ' << s.x_d[2] << ' ' << s.x_d[3] << ' '
        << s.v.steer << ' ' << s.v.throttle << ' ' << s.target[0] << ' '
        << s.target[1] << ' ' << s.target[2] << ' ' << s.target[3] << '\n';
  }
}

}  // namespace mppi

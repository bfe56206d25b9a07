#include "mppi/costs.hpp"

#include <fstream>

namespace mppi {

double costmap_lookup(const CostMap& map, double p_x, double p_y) {
  const double gx = std::clamp((p_x - map.x0) / map.resolution, 0.0,
                               static_cast<double>(map.width - 1));
  const double gy = std::clamp((p_y - map.y0) / map.resolution, 0.0,
                               static_cast<double>(map.height - 1));
  const int ix = std::min(static_cast<int>(gx), map.width - 2);
  const int iy = std::min(static_cast<int>(gy), map.height - 2);
  const double fx = gx - ix;
  const double fy = gy - iy;
  const double v00 = map.at(ix, iy);
  const double v10 = map.at(ix + 1, iy);
  const double v01 = map.at(ix, iy + 1);
  const double v11 = map.at(ix + 1, iy + 1);
  return (1.0 - fx) * (1.0 - fy) * v00 + fx * (1.0 - fy) * v10 +
         (1.0 - fx) * fy * v01 + fx * fy * v11;
}

double side_slip(double v_x, double v_y) {
  if (std::abs(v_x) < 0.01) return 0.0;  // undefined at rest
  return -std::atan(v_y / std::abs(v_x));
}

double state_cost(const VehicleState& x, int t, const CostMap& map, const CostParams& cp) {
  const double h = costmap_lookup(map, x.p_x, x.p_y);
  double track = h;
  if (h > cp.boundary_threshold) {
    track += std::pow(cp.decay, t) * cp.impulse;
  }
  const double dv = x.v_x - cp.v_des;
  const double speed = dv * dv;
  const double zeta = side_slip(x.v_x, x.v_y);
  double stab = zeta * zeta;
  if (std::abs(zeta) > cp.slip_limit) {
    stab += cp.impulse;
  }
  return cp.alpha_track * track + cp.alpha_speed * speed + cp.alpha_stab * stab;
}

double control_cost_increment(const Vec& u, const Vec& v, double gamma,
                              const Vec& sigma_diag) {
  if (u.size() != v.size() || u.size() != sigma_diag.size()) {
    throw std::invalid_argument("control_cost_increment: dimension mismatch");
  }
  double acc = 0.0;
  for (int i = 0; i < u.size(); ++i) acc += u[i] * v[i] / sigma_diag[i];
  return gamma * acc;
}

double control_cost_increment(const ControlInput& u, const ControlInput& v, double gamma,
                              const Vec& sigma_diag) {
  return control_cost_increment(Vec(u.vec()), Vec(v.vec()), gamma, sigma_diag);
}

double trajectory_cost(const VehicleState& x0, const ControlPlan& plan, const Mat& eps,
                       const VehicleModel& model, const ControlBounds& bounds,
                       const CostMap& map, const CostParams& cp, const SamplingParams& sp,
                       bool terminal_cost) {
  const int T = plan.horizon();
  if (eps.rows() != T || eps.cols() != plan.dim()) {
    throw std::invalid_argument("trajectory_cost: eps must match the plan shape");
  }
  VehicleState x = x0;
  double cost = 0.0;
  for (int t = 0; t < T; ++t) {
    const Vec u = plan.values.row(t).transpose();
    const Vec v = u + eps.row(t).transpose();
    const ControlInput g = clamp_controls(ControlInput{v[0], v[1]}, bounds);
    x = model.step(x, g, sp.dt);
    cost += state_cost(x, t, map, cp) + control_cost_increment(u, v, sp.gamma, sp.sigma_diag);
  }
  if (terminal_cost) cost += state_cost(x, T, map, cp);
  return cost;
}

double oval_spine_distance(const OvalSpec& spec, double p_x, double p_y) {
  const double half = spec.straight_length / 2.0;
  const double cx = std::clamp(p_x, -half, half);
  return std::hypot(p_x - cx, p_y);
}

CostMap generate_oval_costmap(const OvalSpec& spec) {
  const double half_width = spec.track_width / 2.0;
  if (!(spec.radius > half_width) || !(spec.track_width > 0.0) ||
      !(spec.resolution > 0.0) || !(spec.straight_length >= 0.0)) {
    throw std::invalid_argument(
        "generate_oval_costmap: need radius > width/2 and positive width/resolution");
  }

  const double extent_x = spec.straight_length / 2.0 + spec.radius + half_width + spec.border;
  const double extent_y = spec.radius + half_width + spec.border;

  CostMap map;
  map.resolution = spec.resolution;
  map.width = static_cast<int>(std::ceil(2.0 * extent_x / spec.resolution)) + 1;
  map.height = static_cast<int>(std::ceil(2.0 * extent_y / spec.resolution)) + 1;
  map.x0 = -extent_x;
  map.y0 = -extent_y;
  map.values.resize(static_cast<size_t>(map.width) * map.height);

  for (int iy = 0; iy < map.height; ++iy) {
    for (int ix = 0; ix < map.width; ++ix) {
      const double px = map.x0 + ix * spec.resolution;
      const double py = map.y0 + iy * spec.resolution;
      const double signed_norm = (oval_spine_distance(spec, px, py) - spec.radius) / half_width;
      map.at(ix, iy) = std::min(std::abs(signed_norm), CostMap::kCap);
    }
  }
  map.validate();
  return map;
}

CostMap load_costmap(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open map file: " + path);
  CostMap map;
  if (!(in >> map.width >> map.height >> map.x0 >> map.y0 >> map.resolution)) {
    throw std::runtime_error("map file: bad header in " + path);
  }
  if (map.width < 2 || map.height < 2) {
    throw std::runtime_error("map file: grid must be at least 2x2 in " + path);
  }
  map.values.resize(static_cast<size_t>(map.width) * map.height);
  for (int iy = 0; iy < map.height; ++iy) {
    for (int ix = 0; ix < map.width; ++ix) {
      if (!(in >> map.at(ix, iy))) {
        throw std::runtime_error("map file: truncated grid in " + path);
      }
    }
  }
  map.validate();
  return map;
}

void save_costmap(const CostMap& map, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write map file: " + path);
  out.precision(17);
  out << map.width << ' ' << map.height << ' ' << map.x0 << ' ' << map.y0 << ' '
      << map.resolution << '\n';
  for (int iy = 0; iy < map.height; ++iy) {
    for (int ix = 0; ix < map.width; ++ix) {
      out << map.at(ix, iy) << (ix + 1 < map.width ? ' ' : '\n');
    }
  }
}

}  // namespace mppi

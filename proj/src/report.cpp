#include "mppi/report.hpp"

#include <cstdio>
#include <fstream>

namespace mppi {

namespace {

struct Seg {
  double x1, y1, x2, y2;
};

double lerp_cross(double a, double b, double level) { return (level - a) / (b - a); }

// Marching-squares edge segments of the level set, in world coordinates.
std::vector<Seg> iso_segments(const CostMap& map, double level) {
  std::vector<Seg> segs;
  const double res = map.resolution;
  for (int iy = 0; iy + 1 < map.height; ++iy) {
    for (int ix = 0; ix + 1 < map.width; ++ix) {
      const double v00 = map.at(ix, iy);
      const double v10 = map.at(ix + 1, iy);
      const double v01 = map.at(ix, iy + 1);
      const double v11 = map.at(ix + 1, iy + 1);
      const double x = map.x0 + ix * res;
      const double y = map.y0 + iy * res;

      std::vector<std::pair<double, double>> pts;
      if ((v00 < level) != (v10 < level)) {
        pts.emplace_back(x + res * lerp_cross(v00, v10, level), y);
      }
      if ((v10 < level) != (v11 < level)) {
        pts.emplace_back(x + res, y + res * lerp_cross(v10, v11, level));
      }
      if ((v01 < level) != (v11 < level)) {
        pts.emplace_back(x + res * lerp_cross(v01, v11, level), y + res);
      }
      if ((v00 < level) != (v01 < level)) {
        pts.emplace_back(x, y + res * lerp_cross(v00, v01, level));
      }
      if (pts.size() >= 2) {
        segs.push_back(Seg{pts[0].first, pts[0].second, pts[1].first, pts[1].second});
        if (pts.size() == 4) {
          segs.push_back(Seg{pts[2].first, pts[2].second, pts[3].first, pts[3].second});
        }
      }
    }
  }
  return segs;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

}  // namespace

void write_overlay_svg(const std::string& path, const CostMap& map,
                       const EpisodeTrace& trace, double boundary_level) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write svg file: " + path);

  const double w_m = (map.width - 1) * map.resolution;
  const double h_m = (map.height - 1) * map.resolution;
  const double scale = 1000.0 / std::max(w_m, h_m);
  const double w_px = w_m * scale;
  const double h_px = h_m * scale;
  auto px = [&](double x) { return (x - map.x0) * scale; };
  auto py = [&](double y) { return h_px - (y - map.y0) * scale; };  // y up

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w_px)
      << "\" height=\"" << num(h_px) << "\" viewBox=\"0 0 " << num(w_px) << ' '
      << num(h_px) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"#f8f6f0\"/>\n";

  out << "<g stroke=\"#555555\" stroke-width=\"1.5\">\n";
  for (const Seg& s : iso_segments(map, boundary_level)) {
    out << "<line x1=\"" << num(px(s.x1)) << "\" y1=\"" << num(py(s.y1)) << "\" x2=\""
        << num(px(s.x2)) << "\" y2=\"" << num(py(s.y2)) << "\"/>\n";
  }
  out << "</g>\n";

  if (!trace.steps.empty()) {
    out << "<polyline fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.2\" points=\"";
    for (const StepRecord& r : trace.steps) {
      out << num(px(r.state.p_x)) << ',' << num(py(r.state.p_y)) << ' ';
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace mppi

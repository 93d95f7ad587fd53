#include "trajopt/envs/track.hpp"

#include <fstream>
#include <sstream>

#include "trajopt/errors.hpp"

#ifndef TRAJOPT_DATA_DIR
#define TRAJOPT_DATA_DIR "data"
#endif

namespace trajopt {

Track::Track(std::vector<Eigen::Vector2d> waypoints, double width)
    : pts_(std::move(waypoints)), width_(width) {
  if (pts_.size() < 2) throw ParameterError("track: need at least 2 waypoints");
  if (!(width_ > 0.0) || !std::isfinite(width_)) throw ParameterError("track: width must be positive");
  for (std::size_t i = 0; i < pts_.size(); ++i) {
    if (!pts_[i].allFinite()) throw ParameterError("track: waypoint " + std::to_string(i) + " is not finite");
    if (i > 0 && pts_[i] == pts_[i - 1]) {
      throw ParameterError("track: duplicate consecutive waypoints at index " + std::to_string(i));
    }
  }
  std::vector<double> xs(pts_.size());
  std::vector<double> ys(pts_.size());
  for (std::size_t i = 0; i < pts_.size(); ++i) {
    xs[i] = pts_[i].x();
    ys[i] = pts_[i].y();
  }
  seg_x_ = natural_spline(xs);
  seg_y_ = natural_spline(ys);
}

std::vector<Track::Segment> Track::natural_spline(const std::vector<double>& v) {
  // Unit knot spacing; second derivatives from the tridiagonal system with zero end curvature.
  const int n = static_cast<int>(v.size());
  std::vector<double> M(n, 0.0);
  if (n > 2) {
    const int k = n - 2;
    std::vector<double> diag(k, 4.0);
    std::vector<double> rhs(k);
    for (int i = 0; i < k; ++i) rhs[i] = 6.0 * (v[i + 2] - 2.0 * v[i + 1] + v[i]);
    for (int i = 1; i < k; ++i) {
      const double w = 1.0 / diag[i - 1];
      diag[i] -= w;
      rhs[i] -= w * rhs[i - 1];
    }
    M[k] = rhs[k - 1] / diag[k - 1];
    for (int i = k - 2; i >= 0; --i) M[i + 1] = (rhs[i] - M[i + 2]) / diag[i];
  }
  std::vector<Segment> seg(n - 1);
  for (int i = 0; i + 1 < n; ++i) {
    seg[i].a = v[i];
    seg[i].b = v[i + 1] - v[i] - (2.0 * M[i] + M[i + 1]) / 6.0;
    seg[i].c = M[i] / 2.0;
    seg[i].d = (M[i + 1] - M[i]) / 6.0;
  }
  return seg;
}

Track Track::parse(std::istream& in) {
  std::string line;
  double width = 0.0;
  bool have_width = false;
  std::vector<Eigen::Vector2d> pts;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!have_width) {
      if (line.rfind("width=", 0) != 0) throw ParameterError("track file: first line must be width=<float>");
      width = std::stod(line.substr(6));
      have_width = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ParameterError("track file: line " + std::to_string(lineno) + " is not an x,y pair");
    }
    double x = 0.0;
    double y = 0.0;
    try {
      x = std::stod(line.substr(0, comma));
      y = std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw ParameterError("track file: line " + std::to_string(lineno) + " is not numeric");
    }
    if (!std::isfinite(x) || !std::isfinite(y)) {
      throw ParameterError("track file: line " + std::to_string(lineno) + " is not finite");
    }
    pts.emplace_back(x, y);
  }
  if (!have_width) throw ParameterError("track file: missing width header");
  if (!std::isfinite(width)) throw ParameterError("track file: width is not finite");
  return Track(std::move(pts), width);
}

Track Track::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open track file '" + path + "'");
  return parse(in);
}

Track Track::builtin(const std::string& name) {
  if (name != "simple" && name != "complex") throw ConfigError("unknown track '" + name + "'");
  return load(std::string(TRAJOPT_DATA_DIR) + "/tracks/" + name + ".txt");
}

}  // namespace trajopt

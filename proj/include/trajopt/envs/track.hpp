#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <string>
#include <vector>

#include "trajopt/autodiff.hpp"

namespace trajopt {

/// Centerline point at parameter s with its heading and border geometry.
template <class T>
struct TrackPoint {
  T x, y;
  T theta;
  /// Unit normal pointing to the right of the direction of travel; used for both borders.
  T nx, ny;
  T inner_x, inner_y;  ///< left border
  T outer_x, outer_y;  ///< right border
};

/// Natural cubic splines x(s), y(s) through waypoints, s measured in knot index.
class Track {
 public:
  /// Throws ParameterError on fewer than 2 waypoints, consecutive duplicates or width <= 0.
  Track(std::vector<Eigen::Vector2d> waypoints, double width);

  /// Parses "width=<float>" followed by one "x,y" pair per line.
  static Track parse(std::istream& in);
  static Track load(const std::string& path);
  /// Loads one of the bundled fixtures ("simple", "complex").
  static Track builtin(const std::string& name);

  double width() const { return width_; }
  int num_knots() const { return static_cast<int>(pts_.size()); }
  double s_max() const { return static_cast<double>(pts_.size() - 1); }
  const std::vector<Eigen::Vector2d>& waypoints() const { return pts_; }

  /// Evaluates the splines; outside [0, s_max] the end segments are extended.
  template <class T>
  TrackPoint<T> eval(const T& s) const {
    using std::atan2;
    using std::cos;
    using std::sin;
    const int nseg = static_cast<int>(pts_.size()) - 1;
    const int i = std::clamp(static_cast<int>(std::floor(value_of(s))), 0, nseg - 1);
    const T d = s - double(i);
    const Segment& sx = seg_x_[i];
    const Segment& sy = seg_y_[i];
    TrackPoint<T> p;
    p.x = sx.a + d * (sx.b + d * (sx.c + d * sx.d));
    p.y = sy.a + d * (sy.b + d * (sy.c + d * sy.d));
    const T dx = sx.b + d * (2.0 * sx.c + d * (3.0 * sx.d));
    const T dy = sy.b + d * (2.0 * sy.c + d * (3.0 * sy.d));
    p.theta = atan2(dy, dx);
    p.nx = sin(p.theta);
    p.ny = -cos(p.theta);
    const double half = 0.5 * width_;
    p.inner_x = p.x - half * p.nx;
    p.inner_y = p.y - half * p.ny;
    p.outer_x = p.x + half * p.nx;
    p.outer_y = p.y + half * p.ny;
    return p;
  }

 private:
  struct Segment {
    double a, b, c, d;
  };
  static std::vector<Segment> natural_spline(const std::vector<double>& v);

  std::vector<Eigen::Vector2d> pts_;
  double width_;
  std::vector<Segment> seg_x_;
  std::vector<Segment> seg_y_;
};

struct ContouringErrors {
  double contouring;
  double lagging;
};

/// e_c = sin(theta)(x - x_s) - cos(theta)(y - y_s), e_l = -cos(theta)(x - x_s) - sin(theta)(y - y_s).
template <class T>
std::pair<T, T> contouring_errors(const Track& track, const T& x, const T& y, const T& s) {
  using std::cos;
  using std::sin;
  const TrackPoint<T> p = track.eval(s);
  const T ex = x - p.x;
  const T ey = y - p.y;
  const T st = sin(p.theta);
  const T ct = cos(p.theta);
  return {st * ex - ct * ey, -ct * ex - st * ey};
}

/// smooth_max(w + d_in)^2 + smooth_max(w + d_out)^2 with signed distances past each border.
template <class T>
T border_cost(const Track& track, const T& x, const T& y, const T& s, double w_car) {
  const TrackPoint<T> p = track.eval(s);
  const T d_in = -((x - p.inner_x) * p.nx + (y - p.inner_y) * p.ny);
  const T d_out = (x - p.outer_x) * p.nx + (y - p.outer_y) * p.ny;
  const T h_in = smooth_max(T(w_car + d_in));
  const T h_out = smooth_max(T(w_car + d_out));
  return h_in * h_in + h_out * h_out;
}

}  // namespace trajopt

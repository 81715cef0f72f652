// Reference route: straight / clothoid / arc segment chains sampled on a
// uniform grid, arc-length projection of the vehicle position, and the
// reference speed profile.
#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "driftnmpc/types.hpp"

namespace driftnmpc {

struct PathPoint {
  double s = 0.0;
  double X = 0.0;
  double Y = 0.0;
  double theta = 0.0;  // tangent heading, unwrapped
  double kappa = 0.0;
};

struct Projection {
  double s = 0.0;
  double e_y = 0.0;    // > 0 left of the path
  double e_psi = 0.0;  // wrapped to (-pi, pi]
  double kappa = 0.0;
  double distance = 0.0;
};

class Path {
 public:
  struct Segment {
    double length = 0.0;
    double kappa0 = 0.0;
    double kappa1 = 0.0;
  };

  // Chain of segments starting at the origin heading +X. Heading within a
  // segment is analytic; positions are accumulated with Simpson's rule per
  // grid cell.
  Path(const std::vector<Segment>& segments, double grid = 0.1) : ds_(grid) {
    if (!(grid > 0.0)) throw ConfigError("path: grid > 0");
    double total = 0.0;
    for (const Segment& seg : segments) {
      if (!(seg.length > 0.0)) throw ConfigError("path: segment length > 0");
      total += seg.length;
    }
    const int n = static_cast<int>(std::ceil(total / ds_)) + 1;
    pts_.reserve(n + 1);

    double s_seg0 = 0.0;
    double theta0 = 0.0;
    std::size_t i_seg = 0;
    auto heading = [&](double s) {
      while (i_seg + 1 < segments.size() && s > s_seg0 + segments[i_seg].length + 1e-12) {
        const Segment& sg = segments[i_seg];
        theta0 += 0.5 * (sg.kappa0 + sg.kappa1) * sg.length;
        s_seg0 += sg.length;
        ++i_seg;
      }
      const Segment& sg = segments[i_seg];
      const double u = clamp(s - s_seg0, 0.0, sg.length);
      const double dk = (sg.kappa1 - sg.kappa0) / sg.length;
      struct {
        double theta, kappa;
      } out{theta0 + sg.kappa0 * u + 0.5 * dk * u * u, sg.kappa0 + dk * u};
      return out;
    };

    PathPoint p;
    pts_.push_back(p);
    double s = 0.0;
    while (s < total - 1e-9) {
      const double h = std::min(ds_, total - s);
      const auto a = heading(s);
      const auto m = heading(s + 0.5 * h);
      const auto b = heading(s + h);
      p.s = s + h;
      p.X += h / 6.0 * (std::cos(a.theta) + 4.0 * std::cos(m.theta) + std::cos(b.theta));
      p.Y += h / 6.0 * (std::sin(a.theta) + 4.0 * std::sin(m.theta) + std::sin(b.theta));
      p.theta = b.theta;
      p.kappa = b.kappa;
      pts_.push_back(p);
      s += h;
    }
    pts_.front().kappa = segments.front().kappa0;
  }

  double length() const { return pts_.back().s; }

  PathPoint at(double s) const {
    s = clamp(s, 0.0, length());
    const std::size_t i =
        std::min(static_cast<std::size_t>(s / ds_), pts_.size() - 2);
    const PathPoint& a = pts_[i];
    const PathPoint& b = pts_[i + 1];
    const double t = (b.s > a.s) ? (s - a.s) / (b.s - a.s) : 0.0;
    PathPoint p;
    p.s = s;
    p.X = a.X + t * (b.X - a.X);
    p.Y = a.Y + t * (b.Y - a.Y);
    p.theta = a.theta + t * (b.theta - a.theta);
    p.kappa = a.kappa + t * (b.kappa - a.kappa);
    return p;
  }

  double curvature(double s) const { return at(s).kappa; }

  // Nearest point on the sampled polyline. With a hint the search is limited
  // to a window around it; the foot point is refined on the adjacent chords.
  std::optional<Projection> project(double X, double Y, double psi,
                                    std::optional<double> s_hint = {},
                                    double corridor = 1e9) const {
    std::size_t lo = 0, hi = pts_.size() - 1;
    if (s_hint) {
      const double s0 = clamp(*s_hint, 0.0, length());
      lo = static_cast<std::size_t>(std::max(0.0, (s0 - 8.0) / ds_));
      hi = std::min(pts_.size() - 1, static_cast<std::size_t>((s0 + 20.0) / ds_) + 1);
    }
    std::size_t best = lo;
    double best_d2 = 1e300;
    for (std::size_t i = lo; i <= hi; ++i) {
      const double dx = X - pts_[i].X;
      const double dy = Y - pts_[i].Y;
      const double d2 = dx * dx + dy * dy;
      if (d2 < best_d2) {
        best_d2 = d2;
        best = i;
      }
    }

    double s_best = pts_[best].s;
    double d2_best = best_d2;
    for (std::size_t i : {best > 0 ? best - 1 : best, best}) {
      if (i + 1 >= pts_.size()) continue;
      const PathPoint& a = pts_[i];
      const PathPoint& b = pts_[i + 1];
      const double ex = b.X - a.X, ey = b.Y - a.Y;
      const double len2 = ex * ex + ey * ey;
      if (len2 <= 0.0) continue;
      const double t = clamp(((X - a.X) * ex + (Y - a.Y) * ey) / len2, 0.0, 1.0);
      const double px = a.X + t * ex, py = a.Y + t * ey;
      const double d2 = (X - px) * (X - px) + (Y - py) * (Y - py);
      if (d2 < d2_best) {
        d2_best = d2;
        s_best = a.s + t * (b.s - a.s);
      }
    }

    // Newton refinement: drive the tangential residual to zero so the foot
    // point sits on the true normal rather than a chord.
    for (int it = 0; it < 3; ++it) {
      const PathPoint q = at(s_best);
      const double tx = std::cos(q.theta), ty = std::sin(q.theta);
      const double ts = (X - q.X) * tx + (Y - q.Y) * ty;
      const double ey = -(X - q.X) * ty + (Y - q.Y) * tx;
      const double denom = 1.0 - q.kappa * ey;
      if (std::abs(denom) < 0.2) break;  // near the curvature center, keep the chord foot
      s_best = clamp(s_best + ts / denom, 0.0, length());
    }

    const PathPoint ref = at(s_best);
    d2_best = (X - ref.X) * (X - ref.X) + (Y - ref.Y) * (Y - ref.Y);
    Projection out;
    out.s = s_best;
    out.distance = std::sqrt(d2_best);
    out.e_y = -(X - ref.X) * std::sin(ref.theta) + (Y - ref.Y) * std::cos(ref.theta);
    out.e_psi = wrap_angle(psi - ref.theta);
    out.kappa = ref.kappa;
    if (out.distance > corridor) return std::nullopt;
    return out;
  }

 private:
  std::vector<PathPoint> pts_;
  double ds_;
};

// Entry straight, clothoid in, constant arc, clothoid out, exit straight.
// Positive turn angle bends left.
struct RouteGeometry {
  double entry_m = 40.0;
  double clothoid_m = 12.0;
  double radius_m = 20.0;
  double turn_deg = 135.0;
  double exit_m = 40.0;

  void validate() const {
    if (!(entry_m > 0.0 && exit_m > 0.0 && clothoid_m > 0.0))
      throw ConfigError("route: segment lengths > 0");
    if (!(radius_m > 1.0)) throw ConfigError("route: radius_m > 1");
    const double turn = std::abs(deg2rad(turn_deg));
    if (!(turn > 0.0)) throw ConfigError("route: turn_deg != 0");
    if (std::abs(deg2rad(turn_deg)) <= clothoid_m / radius_m)
      throw ConfigError("route: turn angle too small for the clothoids");
  }

  // the held corner speed spans the constant-curvature arc, so braking runs
  // through the entry clothoid and the exit clothoid is driven accelerating
  double corner_start() const { return entry_m + clothoid_m; }
  double corner_end() const { return entry_m + clothoid_m + arc_length(); }
  double arc_length() const {
    const double kappa = 1.0 / radius_m;
    return (std::abs(deg2rad(turn_deg)) - kappa * clothoid_m) / kappa;
  }

  Path build(double grid = 0.1) const {
    validate();
    const double kappa = std::copysign(1.0 / radius_m, deg2rad(turn_deg));
    return Path({{entry_m, 0.0, 0.0},
                 {clothoid_m, 0.0, kappa},
                 {arc_length(), kappa, kappa},
                 {clothoid_m, kappa, 0.0},
                 {exit_m, 0.0, 0.0}},
                grid);
  }
};

// Reference speed over arc length: constant entry speed, constant-deceleration
// ramp ending at the corner entry, constant corner speed, constant
// acceleration back out after the corner.
class SpeedProfile {
 public:
  SpeedProfile(double v_entry, double v_corner, double v_exit, double a_brake, double a_accel,
               double s_corner_start, double s_corner_end)
      : v_entry_(v_entry),
        v_corner_(v_corner),
        v_exit_(v_exit),
        a_brake_(a_brake),
        a_accel_(a_accel),
        s0_(s_corner_start),
        s1_(s_corner_end) {
    if (!(v_entry > 0.0 && v_corner > 0.0 && v_exit > 0.0))
      throw ConfigError("speed profile: speeds > 0");
    if (!(a_brake > 0.0 && a_accel >= 0.0)) throw ConfigError("speed profile: decel > 0");
    if (!(v_corner <= v_entry)) throw ConfigError("speed profile: v_corner <= v_entry");
    s_brake_ = s0_ - (v_entry_ * v_entry_ - v_corner_ * v_corner_) / (2.0 * a_brake_);
    if (s_brake_ < 0.0) throw ConfigError("speed profile: no room to brake before the corner");
  }

  double operator()(double s) const {
    if (s <= s_brake_) return v_entry_;
    if (s < s0_) {
      const double v2 = v_entry_ * v_entry_ - 2.0 * a_brake_ * (s - s_brake_);
      return std::sqrt(std::max(v2, v_corner_ * v_corner_));
    }
    if (s <= s1_) return v_corner_;
    const double v2 = v_corner_ * v_corner_ + 2.0 * a_accel_ * (s - s1_);
    return std::min(std::sqrt(v2), v_exit_);
  }

  double brake_point() const { return s_brake_; }

 private:
  double v_entry_, v_corner_, v_exit_, a_brake_, a_accel_, s0_, s1_, s_brake_;
};

}  // namespace driftnmpc

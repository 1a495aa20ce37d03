#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace dgap {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kPi = 3.14159265358979323846;

/// Cost value treated as "never selectable" (collision course, degenerate input).
inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

inline bool is_infinite_cost(double c) { return std::isinf(c) && c > 0.0; }

/// Four-quadrant bearing of a planar vector, normalized to (-pi, pi].
inline double bearing(const Vec2& p) {
  if (p.x() == 0.0 && p.y() == 0.0) {
    throw std::domain_error("bearing: zero vector has no direction");
  }
  double b = std::atan2(p.y(), p.x());
  if (b <= -kPi) b = kPi;  // atan2(-0.0, x<0) returns -pi
  return b;
}

/// Wrap an angle into (-pi, pi].
inline double normalize_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a <= 0.0) a += 2.0 * kPi;
  return a - kPi;
}

/// Counterclockwise angular travel from beta_right to beta_left, in (0, 2*pi].
/// Equal bearings map to a full circle by convention.
inline double ccw_span(double beta_right, double beta_left) {
  double d = std::fmod(beta_left - beta_right, 2.0 * kPi);
  if (d <= 0.0) d += 2.0 * kPi;
  return d;
}

/// 2D scalar cross product (z component of the 3D cross).
inline double cross2(const Vec2& a, const Vec2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

inline Mat2 rotation(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat2 r;
  r << c, -s, s, c;
  return r;
}

/// Rotate v by +90 degrees (counterclockwise).
inline Vec2 perp_ccw(const Vec2& v) { return Vec2(-v.y(), v.x()); }

// ---------------------------------------------------------------------------
// Sensor input

/// Ordered polar range measurements over the full 360 degree field of view.
/// Beam i looks along angle_min + i * angle_increment; the sweep is half-open,
/// so the last bearing is +pi - angle_increment. Ranges are clipped to
/// range_max when there is no return.
struct Scan {
  double angle_min = -kPi;
  double angle_increment = 0.0;
  std::vector<double> ranges;
  double range_max = 0.0;
  double stamp = 0.0;

  static Scan uniform(int n_beams, double range, double range_max, double stamp = 0.0) {
    Scan s;
    s.angle_min = -kPi;
    s.angle_increment = 2.0 * kPi / n_beams;
    s.ranges.assign(static_cast<size_t>(n_beams), range);
    s.range_max = range_max;
    s.stamp = stamp;
    return s;
  }

  int size() const { return static_cast<int>(ranges.size()); }
  double bearing_of(int i) const { return angle_min + i * angle_increment; }
  Vec2 point_of(int i) const {
    const double b = bearing_of(i);
    return Vec2(ranges[static_cast<size_t>(i)] * std::cos(b),
                ranges[static_cast<size_t>(i)] * std::sin(b));
  }
  /// Index of the beam whose bearing is closest to b (wrap-aware).
  int index_of(double b) const {
    const int n = size();
    int i = static_cast<int>(std::lround((normalize_angle(b) - angle_min) / angle_increment));
    i %= n;
    if (i < 0) i += n;
    return i;
  }
  bool is_max_range(int i) const { return ranges[static_cast<size_t>(i)] >= range_max; }
};

// ---------------------------------------------------------------------------
// Gap primitives

enum class Side : uint8_t { Left, Right };

inline constexpr int kNoUngap = -1;
inline constexpr int kNoModel = -1;

/// One side of a gap: position and velocity relative to the ego, plus the
/// identifiers linking it back to its prediction model and (optionally) an
/// ungap it participates in.
struct GapPointState {
  Vec2 p_rel = Vec2::Zero();
  Vec2 v_rel = Vec2::Zero();
  Side side = Side::Left;
  int ungap_id = kNoUngap;
  int model_id = kNoModel;
  Mat4 covariance = Mat4::Zero();

  double range() const { return p_rel.norm(); }
  double bearing() const { return dgap::bearing(p_rel); }
};

enum class GapKind : uint8_t { Radial, Swept };

struct Gap {
  GapPointState left;
  GapPointState right;
  GapKind kind = GapKind::Swept;
  bool available = true;

  /// Counterclockwise span from the right endpoint bearing to the left.
  double span() const { return ccw_span(right.bearing(), left.bearing()); }
  double chord() const { return (left.p_rel - right.p_rel).norm(); }
};

/// Occupied polar region between two adjacent gaps, bounded by the left point
/// of the previous gap and the right point of the next one. Only formed when
/// both points are dynamic and co-moving; planned through only when receding.
struct Ungap {
  GapPointState left_of_prev;   // p^i_{l/e}
  GapPointState right_of_next;  // p^{i+1}_{r/e}
  bool receding = false;
  int id = kNoUngap;
};

/// Time-indexed evolution of one gap across the planning horizon: contiguous
/// segments, each holding the gap geometry at the segment start time.
struct GapTube {
  struct Segment {
    Gap gap;
    double start = 0.0;
    double duration = 0.0;
  };
  std::vector<Segment> segments;
  double horizon = 0.0;
  int id = 0;

  double total_idle() const {
    double idle = 0.0;
    for (const auto& s : segments)
      if (!s.gap.available) idle += s.duration;
    return idle;
  }
};

// ---------------------------------------------------------------------------
// Motion

enum class TrajectorySource : uint8_t { GapTube, Ungap, Idle };

struct Trajectory {
  struct Pose {
    double t = 0.0;
    Vec2 p = Vec2::Zero();
    Vec2 v = Vec2::Zero();
  };
  std::vector<Pose> poses;
  TrajectorySource source = TrajectorySource::Idle;
  int source_id = -1;
  double gamma_e = 0.0;  // intercept heading of the first active segment

  bool empty() const { return poses.empty(); }
  double duration() const { return poses.empty() ? 0.0 : poses.back().t; }

  /// Linear interpolation at time t, clamped to the trajectory span.
  Pose sample(double t) const;
};

/// Ego state. The world-frame pose (p, theta) is meaningful only inside the
/// simulator; the planner consumes the body-frame velocity v, the angular
/// rate omega, the body-frame acceleration a, and the geometry/limits.
struct EgoState {
  Vec2 p = Vec2::Zero();
  double theta = 0.0;
  Vec2 v = Vec2::Zero();
  double omega = 0.0;
  Vec2 a = Vec2::Zero();
  double r_inscr = 0.2;
  double v_max = 1.0;
};

/// Velocity command: body-frame linear velocity + angular rate.
struct Command {
  Vec2 linear = Vec2::Zero();
  double angular = 0.0;
};

struct GoalState {
  Vec2 p = Vec2::Zero();
  Vec2 v = Vec2::Zero();
};

// ---------------------------------------------------------------------------
// Configuration

struct PlannerConfig {
  // geometry
  double r_inscr = 0.2;       // inscribed robot radius [m]
  double tau_infl = 1.2;      // inflation ratio, >= 1
  double tau_radial = 0.8;    // radial discontinuity threshold [m] (4 * r_inscr)
  int min_swept_beams = 3;    // minimum run length for a swept gap

  // tracking
  double tau_assoc = 0.8;     // association gate [m]
  double v_min = 0.1;         // dynamic-obstacle speed threshold [m/s]

  // horizon
  double horizon = 3.0;       // T [s]
  double dt = 0.1;            // propagation / rollout step [s]

  // scoring
  double w_terminal = 1.0;        // w, terminal waypoint weight
  double c_obs = 3.0;             // obstacle cost scale
  double w_2 = 5.0;               // obstacle cost decay rate
  double r_max_penalty = 1.0;     // distance beyond which poses are free [m]
  double idle_penalty = 10.0;     // deprioritization for tubes idling > T/2
  double social_weight = 0.0;     // relative-velocity social term weight

  // control & safety
  double k_p = 2.0;           // tracking feedback gain [1/s]
  double eps_goal = 0.15;     // completion radius [m]
  double r_min_po = 0.24;     // projection operator hard radius (= r_infl)
  double r_nom_po = 0.48;     // projection operator nominal radius (= 2 r_infl)

  // rates
  double scan_rate = 25.0;    // Hz
  double plan_rate = 5.0;     // Hz

  // limits
  double v_max = 1.0;         // componentwise command limit [m/s]

  // goal placement
  double kappa_margin = 0.1;  // keeps gap goals off the gap edges

  double r_infl() const { return tau_infl * r_inscr; }
};

inline Trajectory::Pose Trajectory::sample(double t) const {
  Pose out;
  if (poses.empty()) return out;
  if (t <= poses.front().t) return poses.front();
  if (t >= poses.back().t) {
    out = poses.back();
    out.v = Vec2::Zero();  // holding at the end
    out.t = t;
    return out;
  }
  size_t hi = 1;
  while (poses[hi].t < t) ++hi;
  const Pose& a = poses[hi - 1];
  const Pose& b = poses[hi];
  const double u = (t - a.t) / (b.t - a.t);
  out.t = t;
  out.p = a.p + u * (b.p - a.p);
  out.v = a.v + u * (b.v - a.v);
  return out;
}

}  // namespace dgap

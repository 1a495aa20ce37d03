#pragma once

#include <utility>
#include <vector>

#include "dgap/core.hpp"

namespace dgap {

/// Constant-velocity point model in the rotating, translating ego frame.
/// State is [p_rel, v_rel]; the frame motion enters through the ego angular
/// rate and acceleration at prediction time.
struct PointModel {
  Vec4 state = Vec4::Zero();  // [px, py, vx, vy]
  Mat4 P = Mat4::Identity();
  double last_update = 0.0;
  int model_id = kNoModel;

  Vec2 position() const { return state.head<2>(); }
  Vec2 velocity() const { return state.tail<2>(); }
};

struct TrackingNoise {
  Vec4 q_diag = Vec4(1e-4, 1e-4, 5e-2, 5e-2);  // process noise per second
  Vec2 r_diag = Vec2(1e-3, 1e-3);              // position measurement noise
};

/// Minimum-cost rectangular assignment (Kuhn-Munkres with potentials).
/// Returns exactly min(n, m) row/column pairs achieving the global minimum
/// total cost. Costs must be finite and non-negative.
std::vector<std::pair<int, int>> solve_assignment(
    const std::vector<std::vector<double>>& cost);

struct Association {
  // matches[i] = (prev index, curr index)
  std::vector<std::pair<int, int>> matches;
  // indices into curr that need a fresh model (unmatched or severed)
  std::vector<int> new_points;
};

/// Match previous gap points to current ones by Euclidean distance, severing
/// matches beyond tau_assoc. The tracker instantiates fresh models for the
/// returned new_points, primed with the static-world velocity prior
/// (-ego velocity).
Association associate_points(const std::vector<GapPointState>& prev,
                             const std::vector<GapPointState>& curr,
                             const PlannerConfig& cfg);

/// Propagate a point model through the rotating-frame constant-velocity flow
///   p_rel' = v_rel - omega x p_rel
///   v_rel' = -a_e  - omega x v_rel
/// over dt (exact discretization for the piecewise-constant ego inputs),
/// inflating the covariance with the flow Jacobian and process noise.
PointModel model_predict(const PointModel& m, const EgoState& ego, double dt,
                         const TrackingNoise& noise = {});

/// Kalman position correction with the measured gap point location.
PointModel model_correct(const PointModel& m, const Vec2& z,
                         const TrackingNoise& noise = {});

/// World-frame velocity of the tracked point expressed in the ego-aligned
/// frame: the ego's own motion is added back onto the relative estimate.
inline Vec2 gap_only_velocity(const PointModel& m, const EgoState& ego) {
  return m.velocity() + ego.v;
}

inline Vec2 gap_only_velocity(const GapPointState& s, const EgoState& ego) {
  return s.v_rel + ego.v;
}

/// Per-scan tracker: owns the model store, runs predict/associate/correct on
/// each incoming frame and writes model ids + velocity estimates back onto
/// the gap points.
class GapPointTracker {
 public:
  explicit GapPointTracker(const PlannerConfig& cfg) : cfg_(cfg) {}

  /// Advance all models to the scan stamp and fuse the new gap points.
  /// `points` are updated in place with model ids, velocities, covariances.
  void update(std::vector<GapPointState>& points, const EgoState& ego, double stamp);

  void reset() { models_.clear(); next_id_ = 0; }
  const std::vector<PointModel>& models() const { return models_; }

 private:
  PlannerConfig cfg_;
  TrackingNoise noise_;
  std::vector<PointModel> models_;
  int next_id_ = 0;
  bool has_frame_ = false;
  double last_stamp_ = 0.0;
};

}  // namespace dgap

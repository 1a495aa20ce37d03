#pragma once

#include <vector>

#include "dgap/core.hpp"

namespace dgap {

// Everything in this header works in the plan-frozen frame: the ego-aligned
// frame captured at plan time with the ego's own motion removed. Point
// positions are relative to the plan origin and point velocities are
// gap-only (relative estimate plus ego velocity), so the ego is stationary
// at t = 0 and gap points fly along straight constant-velocity lines.

/// Snapshot of the propagated point set at one horizon timestep.
struct PropagatedFrame {
  double t_k = 0.0;
  std::vector<GapPointState> points;  // CCW-sorted
  std::vector<Gap> gaps;              // extracted, with availability flags
};

/// Walk the CCW-sorted point set starting at the first Right point and pair
/// consecutive unassigned points of opposite sides: Right-to-Left pairs are
/// available gaps, Left-to-Right pairs are gaps that exist but are currently
/// crossed shut. Points sharing an ungap id are never paired with each other.
std::vector<Gap> extract_propagated_gaps(const std::vector<GapPointState>& points);

/// Endpoint-wise squared-distance matching between two propagated gap sets.
/// Returns (prev index, curr index) pairs.
std::vector<std::pair<int, int>> associate_propagated_gaps(
    const std::vector<Gap>& prev, const std::vector<Gap>& curr);

/// Algorithm: advance all manipulated gap points along their gap-only
/// velocities over the horizon, re-extract gaps at every step, associate
/// across steps and merge the history of each t=0 gap into a gap tube whose
/// segments partition [0, T]. Gaps appearing mid-horizon become tubes with a
/// leading unavailable segment.
std::vector<GapTube> propagate_gap_points(const std::vector<Gap>& manip,
                                          const EgoState& ego,
                                          const PlannerConfig& cfg,
                                          std::vector<PropagatedFrame>* frames_out = nullptr);

enum class FeasReason : uint8_t { Ok, SpeedLimited, ClosesBeforeIntercept };

struct FeasibilityResult {
  bool feasible = false;
  double theta_e = 0.0;       // ego lead angle off the line of sight
  double gamma_e = 0.0;       // intercept heading (theta_e + beta_g)
  double t_intercept = std::numeric_limits<double>::infinity();
  FeasReason reason = FeasReason::Ok;
};

/// Parallel-navigation feasibility for one goal: hold the line-of-sight
/// bearing fixed while closing range. Solvable when |sin theta_g| <= K with
/// a heading satisfying the strict closing condition; the intercept must
/// land inside the availability window t_f (pass +infinity for a goal that
/// is not going anywhere).
FeasibilityResult pn_feasibility(const GoalState& goal, const EgoState& ego,
                                 double t_f);

struct TubeFeasibility {
  bool feasible = false;
  int intercept_segment = -1;
  double t_intercept = std::numeric_limits<double>::infinity();  // absolute
  std::vector<FeasibilityResult> per_segment;
};

/// Evaluate a tube segment by segment, carrying the rolled-out ego position
/// forward: PN toward each available segment's goal, idling through
/// unavailable ones. The tube is feasible iff the ego intercepts a goal
/// inside some segment's availability window. `goals` must align with
/// tube.segments (entries for unavailable segments are ignored).
TubeFeasibility tube_feasible(const GapTube& tube,
                              const std::vector<GoalState>& goals,
                              const EgoState& ego, const PlannerConfig& cfg);

}  // namespace dgap

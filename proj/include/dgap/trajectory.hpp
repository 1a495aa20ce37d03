#pragma once

#include <optional>
#include <vector>

#include "dgap/core.hpp"
#include "dgap/feasibility.hpp"

namespace dgap {

/// Scans predicted over the horizon plus the per-beam polar rates used to
/// build them. scans[0] is the input scan; an all-static scene leaves every
/// later scan identical to it.
struct PropagatedScanSet {
  std::vector<Scan> scans;              // t = 0, dt, ..., T
  std::vector<double> bearing_rates;    // per beam [rad/s]
  std::vector<double> range_rates;      // per beam [m/s]
  double dt = 0.1;

  const Scan& at_time(double t) const {
    if (scans.empty()) throw std::runtime_error("empty propagated scan set");
    int k = static_cast<int>(std::lround(t / dt));
    k = std::clamp(k, 0, static_cast<int>(scans.size()) - 1);
    return scans[static_cast<size_t>(k)];
  }
};

struct ScoredTrajectory {
  Trajectory traj;
  double cost = kInfiniteCost;        // J
  double terminal_cost = 0.0;
  double mean_pose_cost = 0.0;
  double t_intercept = std::numeric_limits<double>::infinity();
  int tube_index = -1;
};

/// Gap goal as the convex combination of the endpoint states closest to the
/// waypoint, with kappa clamped off the edges. Spans wider than pi are first
/// reduced to a convex sub-span. Ungap goals are additionally pulled radially
/// inward by r_infl. Returns nullopt for degenerate (coincident-endpoint)
/// gaps.
std::optional<GoalState> place_gap_goal(const Gap& g, const Vec2& waypoint,
                                        bool is_ungap, const PlannerConfig& cfg);

/// Piecewise PN rollout through a feasible tube: constant-speed legs along
/// each segment's intercept heading, zero-velocity plateaus across
/// unavailable segments, terminated at the goal intercept (exact intercept
/// pose appended) or the horizon.
Trajectory rollout_pn_trajectory(const GapTube& tube, const TubeFeasibility& feas,
                                 const std::vector<GoalState>& goals,
                                 const EgoState& ego, const PlannerConfig& cfg);

/// Single-goal PN rollout used for ungap trajectories and oracle tests.
Trajectory rollout_pn_single(const GoalState& goal, const FeasibilityResult& feas,
                             const EgoState& ego, const PlannerConfig& cfg);

/// Estimate per-beam scan dynamics from the bracketing raw gap point models
/// and integrate the scan over the horizon, re-binning moved points to the
/// nearest bearing with nearest-range-wins on conflicts. `raw_points` carry
/// gap-only velocities in the frozen frame.
PropagatedScanSet propagate_scan(const Scan& scan,
                                 const std::vector<GapPointState>& raw_points,
                                 const PlannerConfig& cfg);

/// Obstacle proximity cost of a single pose against one scan:
/// infinite inside r_infl, exponential up to r_max, zero beyond.
double cost_at_pose(const Vec2& p, const Scan& scan_k, const PlannerConfig& cfg);

/// Trajectory cost: terminal waypoint distance plus the average pose cost
/// against the time-matched propagated scans (pose 0 excluded; averaging
/// avoids biasing selection toward shorter trajectories).
ScoredTrajectory score_trajectory(const Trajectory& traj,
                                  const PropagatedScanSet& scans,
                                  const Vec2& waypoint, const PlannerConfig& cfg);

/// Relative-velocity discomfort term: approaching an agent and moving fast
/// near it are both penalized, scaled by inverse distance. Agents advance at
/// constant velocity to each pose time. Returns the per-pose average.
double social_cost(const Trajectory& traj,
                   const std::vector<GoalState>& agents);

struct CurrentStatus {
  bool exists = false;
  bool completed = false;       // reached its end by proximity or time
  bool tube_feasible = false;   // the gap it runs through still checks out
  double rescored_cost = kInfiniteCost;
};

/// Event-based trajectory switching: keep the current trajectory unless it
/// completed, re-scored infinite, or its tube went infeasible; then take the
/// cheapest candidate (ties: earlier intercept, then lower tube index).
/// Falls back to an idle trajectory when nothing is viable.
ScoredTrajectory select_trajectory(const std::optional<ScoredTrajectory>& current,
                                   const CurrentStatus& status,
                                   const std::vector<ScoredTrajectory>& candidates);

/// State-feedback tracking command, clamped componentwise to v_max.
Command track_trajectory(const Trajectory& traj, const Vec2& ego_pos_in_frame,
                         double t, const PlannerConfig& cfg);

/// Last-resort safety filter: attenuate the velocity component pointing at
/// the nearest scan point by the blending potential, removing it entirely at
/// the hard radius.
Command projection_operator_filter(const Command& u, const Scan& scan,
                                   const EgoState& ego, const PlannerConfig& cfg);

}  // namespace dgap

#include "dgap/trajectory.hpp"

#include <algorithm>
#include <cmath>

namespace dgap {

namespace {

// Reduce a wider-than-pi gap to a convex sub-span centered on the waypoint
// bearing when the waypoint lies inside the gap (otherwise the gap center),
// with both points pulled to the nearer endpoint range so they stay inside
// free space.
Gap reduce_span(const Gap& g, const Vec2& waypoint) {
  const double span = g.span();
  if (span <= kPi) return g;
  const double beta_r = g.right.bearing();
  const double half = 0.45 * kPi;
  double center_off = 0.5 * span;  // offset from beta_r, in [0, span]
  if (waypoint.norm() > 1e-9) {
    const double wp_off = ccw_span(beta_r, bearing(waypoint));
    if (wp_off <= span) center_off = wp_off;
  }
  center_off = std::clamp(center_off, half, span - half);
  const double beta_c = beta_r + center_off;
  const double r = std::min(g.left.range(), g.right.range());
  Gap out = g;
  out.right.p_rel = r * Vec2(std::cos(beta_c - half), std::sin(beta_c - half));
  out.left.p_rel = r * Vec2(std::cos(beta_c + half), std::sin(beta_c + half));
  return out;
}

}  // namespace

std::optional<GoalState> place_gap_goal(const Gap& g_in, const Vec2& waypoint,
                                        bool is_ungap, const PlannerConfig& cfg) {
  const Gap g = reduce_span(g_in);
  const Vec2 pl = g.left.p_rel, pr = g.right.p_rel;
  const Vec2 chord = pl - pr;
  const double len2 = chord.squaredNorm();
  if (len2 < 1e-12) return std::nullopt;

  double kappa = (waypoint - pr).dot(chord) / len2;
  kappa = std::clamp(kappa, cfg.kappa_margin, 1.0 - cfg.kappa_margin);

  GoalState goal;
  goal.p = kappa * pl + (1.0 - kappa) * pr;
  goal.v = kappa * g.left.v_rel + (1.0 - kappa) * g.right.v_rel;
  if (is_ungap) {
    const double r = goal.p.norm();
    if (r > 1e-9) {
      const double pulled = std::max(0.0, r - cfg.r_infl());
      goal.p *= pulled / r;
    }
  }
  return goal;
}

namespace {

void append_pose(Trajectory& traj, double t, const Vec2& p, const Vec2& v) {
  if (!traj.poses.empty() && t <= traj.poses.back().t + 1e-12) return;
  traj.poses.push_back({t, p, v});
}

}  // namespace

Trajectory rollout_pn_trajectory(const GapTube& tube, const TubeFeasibility& feas,
                                 const std::vector<GoalState>& goals,
                                 const EgoState& ego, const PlannerConfig& cfg) {
  Trajectory traj;
  traj.source = TrajectorySource::GapTube;
  traj.source_id = tube.id;
  if (!feas.feasible || goals.size() != tube.segments.size()) return traj;

  Vec2 x = Vec2::Zero();
  append_pose(traj, 0.0, x, Vec2::Zero());
  double t = 0.0;
  bool heading_set = false;

  for (size_t k = 0; k < tube.segments.size(); ++k) {
    const auto& seg = tube.segments[k];
    const double seg_end = std::min(seg.start + seg.duration, tube.horizon);
    const FeasibilityResult& fr = feas.per_segment[k];

    if (!seg.gap.available) {
      // Hold in place while the gap is shut.
      for (double tn = t + cfg.dt; tn < seg_end + 1e-9 && tn <= tube.horizon + 1e-9;
           tn += cfg.dt)
        append_pose(traj, std::min(tn, seg_end), x, Vec2::Zero());
      append_pose(traj, seg_end, x, Vec2::Zero());
      t = seg_end;
      continue;
    }

    const double leg_end = std::min(
        (static_cast<int>(k) == feas.intercept_segment) ? feas.t_intercept : seg_end,
        tube.horizon);
    const Vec2 vel = ego.v_max * Vec2(std::cos(fr.gamma_e), std::sin(fr.gamma_e));
    if (!heading_set) {
      traj.gamma_e = fr.gamma_e;
      heading_set = true;
    }
    double tn = t;
    while (tn + cfg.dt < leg_end - 1e-9) {
      tn += cfg.dt;
      x += vel * cfg.dt;
      append_pose(traj, tn, x, vel);
    }
    x += vel * (leg_end - tn);
    append_pose(traj, leg_end, x, vel);
    t = leg_end;

    if (static_cast<int>(k) == feas.intercept_segment) break;
  }
  return traj;
}

Trajectory rollout_pn_single(const GoalState& goal, const FeasibilityResult& feas,
                             const EgoState& ego, const PlannerConfig& cfg) {
  Trajectory traj;
  traj.source = TrajectorySource::Ungap;
  if (!feas.feasible) return traj;
  traj.gamma_e = feas.gamma_e;
  const Vec2 vel = ego.v_max * Vec2(std::cos(feas.gamma_e), std::sin(feas.gamma_e));
  const double t_end = std::min(feas.t_intercept, cfg.horizon);
  Vec2 x = Vec2::Zero();
  append_pose(traj, 0.0, x, Vec2::Zero());
  double t = 0.0;
  while (t + cfg.dt < t_end - 1e-9) {
    t += cfg.dt;
    x += vel * cfg.dt;
    append_pose(traj, t, x, vel);
  }
  x += vel * (t_end - t);
  append_pose(traj, t_end, x, vel);
  (void)goal;
  return traj;
}

PropagatedScanSet propagate_scan(const Scan& scan,
                                 const std::vector<GapPointState>& raw_points,
                                 const PlannerConfig& cfg) {
  PropagatedScanSet out;
  out.dt = cfg.dt;
  const int n = scan.size();
  out.bearing_rates.assign(static_cast<size_t>(n), 0.0);
  out.range_rates.assign(static_cast<size_t>(n), 0.0);

  if (!raw_points.empty()) {
    // Sort points by bearing once; bracket each beam wrap-aware.
    std::vector<GapPointState> pts = raw_points;
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
      return a.bearing() < b.bearing();
    });
    auto polar_rates = [](const GapPointState& p) {
      const double r = p.range();
      const double r_dot = p.p_rel.dot(p.v_rel) / r;
      const double b_dot = cross2(p.p_rel, p.v_rel) / (r * r);
      return std::pair<double, double>(b_dot, r_dot);
    };
    for (int i = 0; i < n; ++i) {
      const double beta_i = scan.bearing_of(i);
      // rhs: greatest bearing <= beta_i (wraps to the last point),
      // lhs: smallest bearing > beta_i (wraps to the first point).
      int lo = 0, hi = static_cast<int>(pts.size());
      while (lo < hi) {
        const int mid = (lo + hi) / 2;
        if (pts[static_cast<size_t>(mid)].bearing() <= beta_i)
          lo = mid + 1;
        else
          hi = mid;
      }
      const int lhs_idx = lo % static_cast<int>(pts.size());
      const int rhs_idx = (lo - 1 + static_cast<int>(pts.size())) % static_cast<int>(pts.size());
      const GapPointState& lhs = pts[static_cast<size_t>(lhs_idx)];
      const GapPointState& rhs = pts[static_cast<size_t>(rhs_idx)];
      const bool similar = lhs.v_rel.norm() >= cfg.v_min &&
                           rhs.v_rel.norm() >= cfg.v_min &&
                           lhs.v_rel.dot(rhs.v_rel) > 0.0;
      if (similar) {
        auto [bl, rl] = polar_rates(lhs);
        auto [br, rr] = polar_rates(rhs);
        out.bearing_rates[static_cast<size_t>(i)] = 0.5 * (bl + br);
        out.range_rates[static_cast<size_t>(i)] = 0.5 * (rl + rr);
      }
    }
  }

  const int n_steps = std::max(1, static_cast<int>(std::lround(cfg.horizon / cfg.dt)));
  out.scans.reserve(static_cast<size_t>(n_steps) + 1);
  out.scans.push_back(scan);

  bool any_motion = false;
  for (int i = 0; i < n; ++i)
    if (out.bearing_rates[static_cast<size_t>(i)] != 0.0 ||
        out.range_rates[static_cast<size_t>(i)] != 0.0)
      any_motion = true;

  for (int k = 1; k <= n_steps; ++k) {
    if (!any_motion) {
      out.scans.push_back(scan);  // bit-identical static scene
      continue;
    }
    const double t_k = k * cfg.dt;
    Scan sk = scan;
    sk.stamp = scan.stamp + t_k;
    // Vacate moving beams, then scatter their propagated returns.
    for (int i = 0; i < n; ++i) {
      if (out.bearing_rates[static_cast<size_t>(i)] == 0.0 &&
          out.range_rates[static_cast<size_t>(i)] == 0.0)
        continue;
      sk.ranges[static_cast<size_t>(i)] = scan.range_max;
    }
    for (int i = 0; i < n; ++i) {
      const double bdot = out.bearing_rates[static_cast<size_t>(i)];
      const double rdot = out.range_rates[static_cast<size_t>(i)];
      if (bdot == 0.0 && rdot == 0.0) continue;
      if (scan.is_max_range(i)) continue;  // no return to move
      const double beta = scan.bearing_of(i) + bdot * t_k;
      const double r = std::clamp(scan.ranges[static_cast<size_t>(i)] + rdot * t_k,
                                  1e-3, scan.range_max);
      const int bin = scan.index_of(beta);
      double& cell = sk.ranges[static_cast<size_t>(bin)];
      cell = std::min(cell, r);  // nearest return wins
    }
    out.scans.push_back(std::move(sk));
  }
  return out;
}

double cost_at_pose(const Vec2& p, const Scan& scan_k, const PlannerConfig& cfg) {
  double d = std::numeric_limits<double>::infinity();
  const int n = scan_k.size();
  for (int i = 0; i < n; ++i) {
    if (scan_k.is_max_range(i)) continue;  // no obstacle on this beam
    d = std::min(d, (p - scan_k.point_of(i)).norm());
  }
  const double r_infl = cfg.r_infl();
  if (d <= r_infl) return kInfiniteCost;
  if (d >= cfg.r_max_penalty) return 0.0;
  return cfg.c_obs * std::exp(-cfg.w_2 * (d - r_infl));
}

ScoredTrajectory score_trajectory(const Trajectory& traj,
                                  const PropagatedScanSet& scans,
                                  const Vec2& waypoint, const PlannerConfig& cfg) {
  ScoredTrajectory out;
  out.traj = traj;
  if (traj.poses.empty()) return out;  // infinite

  out.terminal_cost = cfg.w_terminal * (traj.poses.back().p - waypoint).norm();
  double sum = 0.0;
  int count = 0;
  for (size_t k = 1; k < traj.poses.size(); ++k) {
    const auto& pose = traj.poses[k];
    const double c = cost_at_pose(pose.p, scans.at_time(pose.t), cfg);
    if (is_infinite_cost(c)) {
      out.mean_pose_cost = kInfiniteCost;
      out.cost = kInfiniteCost;
      return out;
    }
    sum += c;
    ++count;
  }
  out.mean_pose_cost = count > 0 ? sum / count : 0.0;
  out.cost = out.terminal_cost + out.mean_pose_cost;
  return out;
}

double social_cost(const Trajectory& traj, const std::vector<GoalState>& agents) {
  if (traj.poses.empty() || agents.empty()) return 0.0;
  double sum = 0.0;
  int count = 0;
  for (const auto& pose : traj.poses) {
    for (const auto& agent : agents) {
      const Vec2 p_h = agent.p + agent.v * pose.t;
      const Vec2 to_agent = p_h - pose.p;
      const double dist = to_agent.norm();
      if (dist < 1e-9) return kInfiniteCost;  // already in contact
      const Vec2 v_rel = pose.v - agent.v;
      const double approach = std::max(v_rel.dot(to_agent), 0.0);
      sum += (approach + pose.v.norm()) / dist;
    }
    ++count;
  }
  return sum / count;
}

ScoredTrajectory select_trajectory(const std::optional<ScoredTrajectory>& current,
                                   const CurrentStatus& status,
                                   const std::vector<ScoredTrajectory>& candidates) {
  const bool keep = current && status.exists && !status.completed &&
                    !is_infinite_cost(status.rescored_cost) && status.tube_feasible;
  if (keep) return *current;

  const ScoredTrajectory* best = nullptr;
  for (const auto& c : candidates) {
    if (is_infinite_cost(c.cost)) continue;
    if (!best || c.cost < best->cost ||
        (c.cost == best->cost && c.t_intercept < best->t_intercept) ||
        (c.cost == best->cost && c.t_intercept == best->t_intercept &&
         c.tube_index < best->tube_index)) {
      best = &c;
    }
  }
  if (best) return *best;
  if (current && status.exists && !status.completed &&
      !is_infinite_cost(status.rescored_cost))
    return *current;  // nothing better and the current one is not doomed

  ScoredTrajectory idle;
  idle.traj.source = TrajectorySource::Idle;
  idle.traj.poses.push_back({0.0, Vec2::Zero(), Vec2::Zero()});
  idle.cost = kInfiniteCost;
  return idle;
}

Command track_trajectory(const Trajectory& traj, const Vec2& ego_pos_in_frame,
                         double t, const PlannerConfig& cfg) {
  Command u;
  if (traj.poses.empty()) return u;
  const Trajectory::Pose des = traj.sample(t);
  Vec2 cmd = cfg.k_p * (des.p - ego_pos_in_frame) + des.v;
  cmd.x() = std::clamp(cmd.x(), -cfg.v_max, cfg.v_max);
  cmd.y() = std::clamp(cmd.y(), -cfg.v_max, cfg.v_max);
  u.linear = cmd;
  return u;
}

Command projection_operator_filter(const Command& u, const Scan& scan,
                                   const EgoState& ego, const PlannerConfig& cfg) {
  (void)ego;
  double d = std::numeric_limits<double>::infinity();
  int nearest = -1;
  for (int i = 0; i < scan.size(); ++i) {
    if (scan.is_max_range(i)) continue;
    if (scan.ranges[static_cast<size_t>(i)] < d) {
      d = scan.ranges[static_cast<size_t>(i)];
      nearest = i;
    }
  }
  if (nearest < 0 || d >= cfg.r_nom_po) return u;

  double psi = (cfg.r_min_po / d - cfg.r_min_po / cfg.r_nom_po) /
               (1.0 - cfg.r_min_po / cfg.r_nom_po);
  psi = std::clamp(psi, 0.0, 1.0);

  const double b = scan.bearing_of(nearest);
  const Vec2 n_hat(std::cos(b), std::sin(b));
  const double inward = u.linear.dot(n_hat);
  if (inward <= 0.0) return u;

  Command out = u;
  out.linear = u.linear - psi * inward * n_hat;
  return out;
}

}  // namespace dgap

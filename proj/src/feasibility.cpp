#include "dgap/feasibility.hpp"

#include <algorithm>
#include <cmath>

#include "dgap/tracking.hpp"

namespace dgap {

namespace {

bool shares_ungap(const GapPointState& a, const GapPointState& b) {
  return a.ungap_id != kNoUngap && a.ungap_id == b.ungap_id;
}

void sort_ccw(std::vector<GapPointState>& points) {
  std::sort(points.begin(), points.end(),
            [](const GapPointState& a, const GapPointState& b) {
              const double ba = a.bearing(), bb = b.bearing();
              if (ba != bb) return ba < bb;
              if (a.side != b.side) return a.side == Side::Right;
              return a.model_id < b.model_id;
            });
}

}  // namespace

std::vector<Gap> extract_propagated_gaps(const std::vector<GapPointState>& points) {
  const int n = static_cast<int>(points.size());
  std::vector<Gap> gaps;
  if (n < 2) return gaps;

  int i0 = -1;
  for (int i = 0; i < n; ++i) {
    if (points[static_cast<size_t>(i)].side == Side::Right) {
      i0 = i;
      break;
    }
  }
  if (i0 < 0) return gaps;

  std::vector<char> assigned(static_cast<size_t>(n), 0);
  for (int ii = 0; ii < n; ++ii) {
    const int i = (i0 + ii) % n;
    if (assigned[static_cast<size_t>(i)]) continue;
    const GapPointState& pi = points[static_cast<size_t>(i)];
    for (int dd = 1; dd < n; ++dd) {
      const int j = (i0 + ii + dd) % n;
      if (assigned[static_cast<size_t>(j)]) continue;
      const GapPointState& pj = points[static_cast<size_t>(j)];
      if (pi.side == pj.side) continue;
      if (shares_ungap(pi, pj)) continue;
      Gap g;
      g.kind = GapKind::Swept;
      if (pi.side == Side::Right) {
        g.right = pi;
        g.left = pj;
        g.available = true;
      } else {
        g.left = pi;
        g.right = pj;
        g.available = false;  // crossed: left encountered before right
      }
      assigned[static_cast<size_t>(i)] = 1;
      assigned[static_cast<size_t>(j)] = 1;
      gaps.push_back(g);
      break;
    }
  }
  return gaps;
}

std::vector<std::pair<int, int>> associate_propagated_gaps(
    const std::vector<Gap>& prev, const std::vector<Gap>& curr) {
  if (prev.empty() || curr.empty()) return {};
  std::vector<std::vector<double>> cost(prev.size(), std::vector<double>(curr.size()));
  for (size_t i = 0; i < prev.size(); ++i) {
    for (size_t j = 0; j < curr.size(); ++j) {
      cost[i][j] = (prev[i].left.p_rel - curr[j].left.p_rel).squaredNorm() +
                   (prev[i].right.p_rel - curr[j].right.p_rel).squaredNorm();
    }
  }
  return solve_assignment(cost);
}

namespace {

bool same_gap_model(const Gap& a, const Gap& b) {
  return a.left.model_id == b.left.model_id &&
         a.right.model_id == b.right.model_id && a.available == b.available;
}

struct TubeBuild {
  std::vector<GapTube::Segment> segments;
  double open_start = 0.0;
  Gap open_gap;
  bool vanished = false;
};

void close_segment(TubeBuild& tb, double t_now) {
  GapTube::Segment seg;
  seg.gap = tb.open_gap;
  seg.start = tb.open_start;
  seg.duration = t_now - tb.open_start;
  if (seg.duration > 1e-12) tb.segments.push_back(seg);
}

}  // namespace

std::vector<GapTube> propagate_gap_points(const std::vector<Gap>& manip,
                                          const EgoState& ego,
                                          const PlannerConfig& cfg,
                                          std::vector<PropagatedFrame>* frames_out) {
  std::vector<GapTube> tubes;
  if (manip.empty()) return tubes;
  const double T = cfg.horizon;
  const int n_steps = std::max(1, static_cast<int>(std::lround(T / cfg.dt)));

  // Collect the t=0 point set with gap-only velocities in the frozen frame.
  std::vector<GapPointState> base;
  base.reserve(manip.size() * 2);
  for (const auto& g : manip) {
    GapPointState r = g.right;
    r.v_rel = gap_only_velocity(g.right, ego);
    GapPointState l = g.left;
    l.v_rel = gap_only_velocity(g.left, ego);
    base.push_back(r);
    base.push_back(l);
  }

  // Frame 0: the manipulated gaps themselves, in frozen-frame velocities.
  std::vector<Gap> prev_gaps;
  prev_gaps.reserve(manip.size());
  std::vector<TubeBuild> builds;
  std::vector<int> tube_of_prev;  // prev gap index -> build index
  for (size_t gi = 0; gi < manip.size(); ++gi) {
    Gap g = manip[gi];
    g.right = base[2 * gi];
    g.left = base[2 * gi + 1];
    g.available = true;
    prev_gaps.push_back(g);
    TubeBuild tb;
    tb.open_start = 0.0;
    tb.open_gap = g;
    builds.push_back(tb);
    tube_of_prev.push_back(static_cast<int>(gi));
  }
  if (frames_out) {
    PropagatedFrame f;
    f.t_k = 0.0;
    f.points = base;
    sort_ccw(f.points);
    f.gaps = prev_gaps;
    frames_out->push_back(f);
  }

  for (int k = 1; k <= n_steps; ++k) {
    const double t_k = std::min(T, k * cfg.dt);

    std::vector<GapPointState> points = base;
    for (auto& p : points) p.p_rel += p.v_rel * t_k;
    sort_ccw(points);
    std::vector<Gap> curr_gaps = extract_propagated_gaps(points);

    const auto matches = associate_propagated_gaps(prev_gaps, curr_gaps);
    std::vector<int> tube_of_curr(curr_gaps.size(), -1);
    std::vector<char> prev_matched(prev_gaps.size(), 0);

    for (auto [i, j] : matches) {
      prev_matched[static_cast<size_t>(i)] = 1;
      const int bi = tube_of_prev[static_cast<size_t>(i)];
      tube_of_curr[static_cast<size_t>(j)] = bi;
      TubeBuild& tb = builds[static_cast<size_t>(bi)];
      if (tb.vanished || !same_gap_model(tb.open_gap, curr_gaps[static_cast<size_t>(j)])) {
        close_segment(tb, t_k);
        tb.open_start = t_k;
        tb.open_gap = curr_gaps[static_cast<size_t>(j)];
        tb.vanished = false;
      }
    }

    // Tube whose gap found no successor: it dissolved into the surroundings;
    // record the rest of the horizon as unavailable.
    for (size_t i = 0; i < prev_gaps.size(); ++i) {
      if (prev_matched[i]) continue;
      TubeBuild& tb = builds[static_cast<size_t>(tube_of_prev[i])];
      if (tb.vanished) continue;
      close_segment(tb, t_k);
      tb.open_start = t_k;
      tb.open_gap.available = false;
      tb.vanished = true;
    }

    // Brand-new gap mid-horizon: new tube, unavailable until now.
    for (size_t j = 0; j < curr_gaps.size(); ++j) {
      if (tube_of_curr[j] >= 0) continue;
      TubeBuild tb;
      Gap shut = curr_gaps[j];
      shut.available = false;
      tb.open_gap = shut;
      tb.open_start = 0.0;
      close_segment(tb, t_k);
      tb.open_start = t_k;
      tb.open_gap = curr_gaps[j];
      builds.push_back(tb);
      tube_of_curr[j] = static_cast<int>(builds.size()) - 1;
    }

    if (frames_out) {
      PropagatedFrame f;
      f.t_k = t_k;
      f.points = points;
      f.gaps = curr_gaps;
      frames_out->push_back(f);
    }

    // Vanished tubes stay alive in the build list but drop out of matching.
    prev_gaps = std::move(curr_gaps);
    tube_of_prev.assign(prev_gaps.size(), -1);
    for (size_t j = 0; j < prev_gaps.size(); ++j)
      tube_of_prev[j] = tube_of_curr[j];
  }

  for (size_t bi = 0; bi < builds.size(); ++bi) {
    close_segment(builds[bi], T);
    GapTube tube;
    tube.id = static_cast<int>(bi);
    tube.horizon = T;
    tube.segments = std::move(builds[bi].segments);
    if (!tube.segments.empty()) tubes.push_back(std::move(tube));
  }
  return tubes;
}

FeasibilityResult pn_feasibility(const GoalState& goal, const EgoState& ego,
                                 double t_f) {
  FeasibilityResult res;
  const double r0 = goal.p.norm();
  const double v_e = ego.v_max;
  if (r0 < 1e-9) {  // already on the goal
    res.feasible = true;
    res.t_intercept = 0.0;
    res.reason = FeasReason::Ok;
    return res;
  }
  const double beta_g = bearing(goal.p);
  const double v_g = goal.v.norm();

  if (v_g < 1e-9) {
    // Stationary goal: drive straight down the line of sight.
    res.theta_e = 0.0;
    res.gamma_e = beta_g;
    res.t_intercept = r0 / v_e;
    if (res.t_intercept <= t_f) {
      res.feasible = true;
      res.reason = FeasReason::Ok;
    } else {
      res.reason = FeasReason::ClosesBeforeIntercept;
    }
    return res;
  }

  const double gamma_g = bearing(goal.v);
  const double theta_g = normalize_angle(gamma_g - beta_g);
  const double K = v_e / v_g;
  const double s = std::sin(theta_g) / K;
  if (std::abs(s) > 1.0) {
    res.reason = FeasReason::SpeedLimited;
    return res;
  }

  // Two headings satisfy sin(theta_e) = sin(theta_g)/K; keep those that
  // strictly close range, then prefer the smaller turn.
  const double th1 = std::asin(s);
  const double th2 = normalize_angle(kPi - th1);
  const double cos_bound = std::cos(theta_g) / K;
  double theta_e = 0.0;
  bool found = false;
  for (double cand : {th1, th2}) {
    if (std::cos(cand) > cos_bound) {
      if (!found || std::abs(cand) < std::abs(theta_e)) theta_e = cand;
      found = true;
    }
  }
  if (!found) {
    res.reason = FeasReason::SpeedLimited;
    return res;
  }

  res.theta_e = theta_e;
  res.gamma_e = normalize_angle(theta_e + beta_g);
  res.t_intercept = (r0 / v_g) / (K * std::cos(theta_e) - std::cos(theta_g));
  if (res.t_intercept <= t_f) {
    res.feasible = true;
    res.reason = FeasReason::Ok;
  } else {
    res.reason = FeasReason::ClosesBeforeIntercept;
  }
  return res;
}

TubeFeasibility tube_feasible(const GapTube& tube,
                              const std::vector<GoalState>& goals,
                              const EgoState& ego, const PlannerConfig& cfg) {
  TubeFeasibility out;
  out.per_segment.resize(tube.segments.size());
  if (goals.size() != tube.segments.size()) return out;
  Vec2 x = Vec2::Zero();
  double t = 0.0;
  const double T = tube.horizon;

  for (size_t k = 0; k < tube.segments.size(); ++k) {
    const auto& seg = tube.segments[k];
    const double seg_end = seg.start + seg.duration;
    const bool persists = (k + 1 == tube.segments.size()) && seg_end >= T - 1e-9;

    if (!seg.gap.available) {
      // Idle interval: hold position, not a verdict on the tube.
      out.per_segment[k].feasible = true;
      out.per_segment[k].reason = FeasReason::Ok;
      out.per_segment[k].t_intercept = seg_end;
      t = seg_end;
      continue;
    }

    // A gap that survives to the end of the horizon does not "cease to
    // exist"; its intercept deadline is open.
    const double window = persists ? std::numeric_limits<double>::infinity()
                                   : seg_end - t;
    const GoalState& g0 = goals[k];
    GoalState rel;
    rel.v = g0.v;
    rel.p = (g0.p + g0.v * (t - seg.start)) - x;

    FeasibilityResult r = pn_feasibility(rel, ego, window);
    if (r.reason == FeasReason::SpeedLimited) {
      out.per_segment[k] = r;
      return out;  // infeasible
    }
    if (r.feasible) {
      r.t_intercept += t;  // absolute time
      out.per_segment[k] = r;
      out.feasible = true;
      out.intercept_segment = static_cast<int>(k);
      out.t_intercept = r.t_intercept;
      return out;
    }
    // Conditions hold but the gap dies first. With nothing after, the tube
    // fails; otherwise march up to the closure and keep going.
    if (k + 1 == tube.segments.size()) {
      out.per_segment[k] = r;
      return out;
    }
    const double dt_roll = seg_end - t;
    x += ego.v_max * Vec2(std::cos(r.gamma_e), std::sin(r.gamma_e)) * dt_roll;
    t = seg_end;
    r.feasible = true;
    r.reason = FeasReason::Ok;
    r.t_intercept = seg_end;
    out.per_segment[k] = r;
  }
  return out;
}

}  // namespace dgap

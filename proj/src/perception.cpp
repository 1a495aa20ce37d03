#include "dgap/perception.hpp"

#include <algorithm>
#include <cmath>

namespace dgap {

namespace {

GapPointState scan_point(const Scan& scan, int i, Side side) {
  GapPointState s;
  s.p_rel = scan.point_of(i);
  s.v_rel = Vec2::Zero();
  s.side = side;
  return s;
}

}  // namespace

RawGapSet detect_gaps(const Scan& scan, const PlannerConfig& cfg) {
  RawGapSet out;
  out.stamp = scan.stamp;
  const int n = scan.size();
  if (n < 3) return out;

  int n_max = 0;
  for (int i = 0; i < n; ++i)
    if (scan.is_max_range(i)) ++n_max;

  if (n_max == n) {
    // Fully open scan: one swept gap covering the whole circle. Coincident
    // endpoint bearings make the span degenerate to 2*pi by convention.
    Gap g;
    g.kind = GapKind::Swept;
    g.right = scan_point(scan, 0, Side::Right);
    g.left = scan_point(scan, 0, Side::Left);
    out.gaps.push_back(g);
    return out;
  }

  // Swept gaps: maximal circular runs of max-range beams, bounded by the
  // finite beams on either side. Runs shorter than min_swept_beams are
  // treated as dropout noise and produce nothing.
  std::vector<char> in_swept(static_cast<size_t>(n), 0);
  if (n_max > 0) {
    int i = 0;
    while (i < n && scan.is_max_range(i)) ++i;  // i = first finite beam
    const int first_finite = i;
    int run_start = -1;
    for (int k = 0; k <= n; ++k) {
      const int idx = (first_finite + k) % n;
      const bool at_max = k < n && scan.is_max_range(idx);
      if (at_max && run_start < 0) run_start = k;
      if (!at_max && run_start >= 0) {
        const int run_len = k - run_start;
        if (run_len >= cfg.min_swept_beams) {
          Gap g;
          g.kind = GapKind::Swept;
          g.right = scan_point(scan, (first_finite + run_start - 1 + n) % n, Side::Right);
          g.left = scan_point(scan, idx, Side::Left);
          out.gaps.push_back(g);
          for (int r = run_start; r < k; ++r)
            in_swept[static_cast<size_t>((first_finite + r) % n)] = 1;
        }
        run_start = -1;
      }
    }
  }

  // Radial gaps: big range jump between consecutive finite beams.
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    if (scan.is_max_range(i) || scan.is_max_range(j)) continue;
    const double dr = scan.ranges[static_cast<size_t>(j)] - scan.ranges[static_cast<size_t>(i)];
    if (std::abs(dr) <= cfg.tau_radial) continue;
    Gap g;
    g.kind = GapKind::Radial;
    g.right = scan_point(scan, i, Side::Right);
    g.left = scan_point(scan, j, Side::Left);
    out.gaps.push_back(g);
  }

  std::sort(out.gaps.begin(), out.gaps.end(), [](const Gap& a, const Gap& b) {
    return a.right.bearing() < b.right.bearing();
  });
  return out;
}

std::vector<Gap> simplify_gaps(const RawGapSet& raw, const PlannerConfig& cfg) {
  std::vector<Gap> gaps = raw.gaps;
  const double min_chord = 2.0 * cfg.r_infl();

  // Merge neighbors whose separating obstacle is a sliver narrower than the
  // inflated robot; circular, repeated until stable.
  bool merged = true;
  while (merged && gaps.size() >= 2) {
    merged = false;
    for (size_t k = 0; k < gaps.size(); ++k) {
      const size_t next = (k + 1) % gaps.size();
      if (next == k) break;
      const double sliver = (gaps[k].left.p_rel - gaps[next].right.p_rel).norm();
      if (sliver < min_chord) {
        Gap g;
        g.kind = GapKind::Swept;
        g.right = gaps[k].right;
        g.left = gaps[next].left;
        if (next > k) {
          gaps[k] = g;
          gaps.erase(gaps.begin() + static_cast<long>(next));
        } else {  // wrap merge: last absorbs first
          gaps[k] = g;
          gaps.erase(gaps.begin());
        }
        merged = true;
        break;
      }
    }
  }

  // Passage filter: the inflated robot must fit through the endpoint chord.
  std::vector<Gap> out;
  for (const auto& g : gaps) {
    const bool full_circle = (g.left.p_rel - g.right.p_rel).norm() < 1e-12;
    if (full_circle || g.chord() >= min_chord) out.push_back(g);
  }
  return out;
}

UngapChecks ungap_checks(const Vec2& p_i, const Vec2& v_i, const Vec2& p_j,
                         const Vec2& v_j, double v_min) {
  UngapChecks c;
  const bool dynamic = v_i.norm() >= v_min && v_j.norm() >= v_min;
  const bool co_moving = v_i.dot(v_j) > 0.0;
  c.is_ungap = dynamic && co_moving;
  c.receding = c.is_ungap && p_i.dot(v_i) > 0.0 && p_j.dot(v_j) > 0.0;
  return c;
}

std::vector<Ungap> detect_ungaps(std::vector<Gap>& simplified,
                                 const EgoState& ego, const PlannerConfig& cfg) {
  std::vector<Ungap> out;
  const size_t n = simplified.size();
  if (n < 2) return out;

  int next_id = 0;
  for (size_t k = 0; k < n; ++k) {
    const size_t next = (k + 1) % n;
    GapPointState& pl = simplified[k].left;
    GapPointState& pr = simplified[next].right;
    const Vec2 vl = pl.v_rel + ego.v;  // gap-only velocity
    const Vec2 vr = pr.v_rel + ego.v;
    const UngapChecks c = ungap_checks(pl.p_rel, vl, pr.p_rel, vr, cfg.v_min);
    if (!c.is_ungap) continue;
    Ungap u;
    u.id = next_id++;
    u.left_of_prev = pl;
    u.right_of_next = pr;
    u.receding = c.receding;
    pl.ungap_id = u.id;
    pr.ungap_id = u.id;
    u.left_of_prev.ungap_id = u.id;
    u.right_of_next.ungap_id = u.id;
    out.push_back(u);
  }
  return out;
}

}  // namespace dgap

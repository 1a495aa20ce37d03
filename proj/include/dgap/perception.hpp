#pragma once

#include <vector>

#include "dgap/core.hpp"

namespace dgap {

/// Gaps read straight off a scan: positions from scan endpoints, velocities
/// zeroed. Sorted counterclockwise by right-endpoint bearing, angular
/// intervals pairwise disjoint.
struct RawGapSet {
  std::vector<Gap> gaps;
  double stamp = 0.0;
};

/// Parse the scan into raw gaps. Radial gaps arise from a range jump larger
/// than tau_radial between consecutive finite beams; swept gaps cover maximal
/// runs of at-max-range beams (at least min_swept_beams long) and are bounded
/// by the neighboring finite beams.
RawGapSet detect_gaps(const Scan& scan, const PlannerConfig& cfg);

/// Drop gaps too narrow for the inflated robot and merge neighbors separated
/// by an untraversable sliver of obstacle (chord < 2 * r_infl).
std::vector<Gap> simplify_gaps(const RawGapSet& raw, const PlannerConfig& cfg);

struct UngapChecks {
  bool is_ungap = false;   // both dynamic and co-moving
  bool receding = false;   // both moving away from the ego
};

/// The three dot-product tests deciding whether an adjacent point pair forms
/// an ungap and whether that ungap recedes.
UngapChecks ungap_checks(const Vec2& p_i, const Vec2& v_i, const Vec2& p_j,
                         const Vec2& v_j, double v_min);

/// Form ungaps between each gap's left point and the next gap's right point
/// (wrap-aware). The checks run on gap-only velocities (relative estimate
/// plus ego velocity), so a static wall seen from a moving ego stays
/// non-dynamic. Qualifying pairs get an ungap id written back onto the two
/// gap points. First-frame zero estimates mean no ungaps.
std::vector<Ungap> detect_ungaps(std::vector<Gap>& simplified,
                                 const EgoState& ego, const PlannerConfig& cfg);

}  // namespace dgap

#pragma once

#include <optional>
#include <vector>

#include "dgap/core.hpp"

namespace dgap {

/// Convert a residual radial gap into a swept one by pivoting the farther
/// endpoint about the nearer one until both endpoints sit at the same range.
/// Gaps attached to ungaps, and swept gaps, pass through unchanged.
Gap convert_radial_gap(const Gap& g);

/// Rotate each endpoint inward about the ego by alpha_s = asin(r_infl/|p_s|),
/// placing it at distance h_infl = r_infl/cos(alpha_s) from the original
/// point (perpendicular to the radial ray). Returns nullopt when an endpoint
/// sits inside the inflated radius or the inflated gap degenerates.
std::optional<Gap> inflate_gap(const Gap& g, const EgoState& ego,
                               const PlannerConfig& cfg);

/// Full manipulation pass: radial conversion followed by inflation, dropping
/// gaps that do not survive.
std::vector<Gap> manipulate_gaps(const std::vector<Gap>& simplified,
                                 const EgoState& ego, const PlannerConfig& cfg);

}  // namespace dgap

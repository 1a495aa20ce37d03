#include "dgap/manipulation.hpp"

#include <algorithm>
#include <cmath>

namespace dgap {

Gap convert_radial_gap(const Gap& g) {
  if (g.kind != GapKind::Radial) return g;
  if (g.left.ungap_id != kNoUngap || g.right.ungap_id != kNoUngap) return g;

  const double r_left = g.left.range();
  const double r_right = g.right.range();
  const bool left_near = r_left <= r_right;
  const GapPointState& near = left_near ? g.left : g.right;
  const GapPointState& far = left_near ? g.right : g.left;

  const double r_n = near.range();
  const double rho = (far.p_rel - near.p_rel).norm();
  if (r_n < 1e-12 || rho < 1e-12) return g;

  // Swing the far point around the near one onto the circle of radius r_n.
  // Two points on that circle separated by bearing delta are chord
  // 2*r_n*sin(delta/2) apart; clamp covers rho > 2*r_n, where the far point
  // lands diametrically opposite.
  const double delta = 2.0 * std::asin(std::min(1.0, rho / (2.0 * r_n)));
  const double beta_n = near.bearing();
  // The left endpoint must stay counterclockwise of the right one.
  const double beta_far = left_near ? beta_n - delta : beta_n + delta;

  GapPointState moved = far;
  moved.p_rel = r_n * Vec2(std::cos(beta_far), std::sin(beta_far));

  Gap out = g;
  out.kind = GapKind::Swept;
  if (left_near)
    out.right = moved;
  else
    out.left = moved;
  return out;
}

namespace {

std::optional<GapPointState> inflate_point(const GapPointState& s, double r_infl) {
  const double r = s.range();
  if (r <= r_infl) return std::nullopt;
  const double alpha = std::asin(r_infl / r);
  const double h = r_infl / std::cos(alpha);
  const Vec2 radial = s.p_rel / r;
  // Inward is toward the gap interior: counterclockwise of the right
  // endpoint, clockwise of the left.
  const Vec2 n_hat = (s.side == Side::Right) ? perp_ccw(radial) : Vec2(-perp_ccw(radial));
  GapPointState out = s;
  out.p_rel = s.p_rel + h * n_hat;
  return out;
}

}  // namespace

std::optional<Gap> inflate_gap(const Gap& g, const EgoState& ego,
                               const PlannerConfig& cfg) {
  const double r_infl = cfg.tau_infl * ego.r_inscr;
  if (r_infl <= 0.0) return g;
  // Degenerate full-circle gap (fully open scan): no obstacle endpoints to
  // inflate against.
  if (g.chord() < 1e-12 && g.span() > kPi) return g;

  auto left = inflate_point(g.left, r_infl);
  auto right = inflate_point(g.right, r_infl);
  if (!left || !right) return std::nullopt;

  Gap out = g;
  out.left = *left;
  out.right = *right;

  if (out.chord() < 1e-3) return std::nullopt;
  // Span inversion: the inward rotations ate the whole gap.
  const double alpha_l = std::asin(r_infl / g.left.range());
  const double alpha_r = std::asin(r_infl / g.right.range());
  if (g.span() <= alpha_l + alpha_r) return std::nullopt;
  return out;
}

std::vector<Gap> manipulate_gaps(const std::vector<Gap>& simplified,
                                 const EgoState& ego, const PlannerConfig& cfg) {
  std::vector<Gap> out;
  out.reserve(simplified.size());
  for (const auto& g : simplified) {
    const Gap converted = convert_radial_gap(g);
    if (auto inflated = inflate_gap(converted, ego, cfg)) out.push_back(*inflated);
  }
  return out;
}

}  // namespace dgap

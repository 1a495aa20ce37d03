#include "dgap/tracking.hpp"

#include <algorithm>
#include <cmath>

namespace dgap {

std::vector<std::pair<int, int>> solve_assignment(
    const std::vector<std::vector<double>>& cost) {
  const int n_rows = static_cast<int>(cost.size());
  const int n_cols = n_rows > 0 ? static_cast<int>(cost[0].size()) : 0;
  if (n_rows == 0 || n_cols == 0) return {};

  // Pad to square with zero-cost dummy rows/columns: every perfect matching
  // uses exactly |n - m| dummies, so the offset is constant and the optimum
  // over real entries is preserved.
  const int n = std::max(n_rows, n_cols);
  auto at = [&](int r, int c) -> double {
    return (r < n_rows && c < n_cols) ? cost[static_cast<size_t>(r)][static_cast<size_t>(c)]
                                      : 0.0;
  };

  // Kuhn-Munkres with row/column potentials, O(n^3).
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<size_t>(n) + 1, 0.0), v(static_cast<size_t>(n) + 1, 0.0);
  std::vector<int> p(static_cast<size_t>(n) + 1, 0), way(static_cast<size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<size_t>(n) + 1, inf);
    std::vector<char> used(static_cast<size_t>(n) + 1, 0);
    do {
      used[static_cast<size_t>(j0)] = 1;
      const int i0 = p[static_cast<size_t>(j0)];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) continue;
        const double cur = at(i0 - 1, j - 1) - u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
        if (cur < minv[static_cast<size_t>(j)]) {
          minv[static_cast<size_t>(j)] = cur;
          way[static_cast<size_t>(j)] = j0;
        }
        if (minv[static_cast<size_t>(j)] < delta) {
          delta = minv[static_cast<size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) {
          u[static_cast<size_t>(p[static_cast<size_t>(j)])] += delta;
          v[static_cast<size_t>(j)] -= delta;
        } else {
          minv[static_cast<size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<size_t>(j0)];
      p[static_cast<size_t>(j0)] = p[static_cast<size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<size_t>(std::min(n_rows, n_cols)));
  for (int j = 1; j <= n; ++j) {
    const int i = p[static_cast<size_t>(j)];
    if (i >= 1 && i <= n_rows && j <= n_cols) pairs.emplace_back(i - 1, j - 1);
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

Association associate_points(const std::vector<GapPointState>& prev,
                             const std::vector<GapPointState>& curr,
                             const PlannerConfig& cfg) {
  Association out;
  if (curr.empty()) return out;
  std::vector<char> matched(curr.size(), 0);
  if (!prev.empty()) {
    std::vector<std::vector<double>> cost(prev.size(), std::vector<double>(curr.size()));
    for (size_t i = 0; i < prev.size(); ++i)
      for (size_t j = 0; j < curr.size(); ++j)
        cost[i][j] = (prev[i].p_rel - curr[j].p_rel).norm();
    for (auto [i, j] : solve_assignment(cost)) {
      if (cost[static_cast<size_t>(i)][static_cast<size_t>(j)] > cfg.tau_assoc) continue;
      out.matches.emplace_back(i, j);
      matched[static_cast<size_t>(j)] = 1;
    }
  }
  for (size_t j = 0; j < curr.size(); ++j)
    if (!matched[j]) out.new_points.push_back(static_cast<int>(j));
  return out;
}

namespace {

// Integral of the rotation R(-w*u) over [0, t].
Mat2 rotation_integral(double omega, double t) {
  Mat2 g;
  if (std::abs(omega) < 1e-12) {
    g << t, 0.0, 0.0, t;
    return g;
  }
  const double s = std::sin(omega * t), c = std::cos(omega * t);
  g << s / omega, (1.0 - c) / omega, -(1.0 - c) / omega, s / omega;
  return g;
}

}  // namespace

PointModel model_predict(const PointModel& m, const EgoState& ego, double dt,
                         const TrackingNoise& noise) {
  PointModel out = m;
  if (dt <= 0.0) return out;

  const double w = ego.omega;
  const Vec2 p0 = m.position();
  const Vec2 v0 = m.velocity();
  Vec2 p1, v1;
  Mat4 F = Mat4::Identity();

  if (std::abs(w) < 1e-12) {
    v1 = v0 - ego.a * dt;
    p1 = p0 + v0 * dt - 0.5 * ego.a * dt * dt;
    F.topRightCorner<2, 2>() = dt * Mat2::Identity();
  } else {
    // Closed form for constant omega and a over the step: the homogeneous
    // flow is a rotation by -w*dt, the acceleration enters through the
    // steady-state velocity v_p = S a / w with S the +90deg rotation.
    const Mat2 R = rotation(-w * dt);
    const Vec2 v_p = perp_ccw(ego.a) / w;
    v1 = R * (v0 - v_p) + v_p;
    p1 = R * p0 + dt * (R * (v0 - v_p)) + rotation_integral(w, dt) * v_p;
    F.topLeftCorner<2, 2>() = R;
    F.bottomRightCorner<2, 2>() = R;
    F.topRightCorner<2, 2>() = dt * R;
  }

  out.state << p1.x(), p1.y(), v1.x(), v1.y();
  out.P = F * m.P * F.transpose();
  out.P += (noise.q_diag * dt).asDiagonal().toDenseMatrix();
  out.P = 0.5 * (out.P + out.P.transpose()).eval();
  out.last_update = m.last_update + dt;
  return out;
}

PointModel model_correct(const PointModel& m, const Vec2& z,
                         const TrackingNoise& noise) {
  PointModel out = m;
  Eigen::Matrix<double, 2, 4> H = Eigen::Matrix<double, 2, 4>::Zero();
  H(0, 0) = 1.0;
  H(1, 1) = 1.0;
  const Mat2 R = noise.r_diag.asDiagonal();
  const Vec2 innov = z - H * m.state;
  const Mat2 S = H * m.P * H.transpose() + R;
  const Eigen::Matrix<double, 4, 2> K = m.P * H.transpose() * S.inverse();
  out.state = m.state + K * innov;
  const Mat4 IKH = Mat4::Identity() - K * H;
  out.P = IKH * m.P * IKH.transpose() + K * R * K.transpose();  // Joseph form
  out.P = 0.5 * (out.P + out.P.transpose()).eval();
  return out;
}

void GapPointTracker::update(std::vector<GapPointState>& points,
                             const EgoState& ego, double stamp) {
  const double dt = has_frame_ ? stamp - last_stamp_ : 0.0;
  if (dt > 0.0) {
    for (auto& m : models_) m = model_predict(m, ego, dt, noise_);
  }

  std::vector<GapPointState> prev;
  prev.reserve(models_.size());
  for (const auto& m : models_) {
    GapPointState s;
    s.p_rel = m.position();
    s.v_rel = m.velocity();
    s.model_id = m.model_id;
    prev.push_back(s);
  }

  const Association assoc = associate_points(prev, points, cfg_);

  std::vector<PointModel> next;
  next.reserve(points.size());
  for (auto [i, j] : assoc.matches) {
    PointModel m = model_correct(models_[static_cast<size_t>(i)],
                                 points[static_cast<size_t>(j)].p_rel, noise_);
    m.last_update = stamp;
    points[static_cast<size_t>(j)].model_id = m.model_id;
    points[static_cast<size_t>(j)].v_rel = m.velocity();
    points[static_cast<size_t>(j)].covariance = m.P;
    next.push_back(std::move(m));
  }
  for (int j : assoc.new_points) {
    PointModel m;
    m.model_id = next_id_++;
    m.state << points[static_cast<size_t>(j)].p_rel.x(),
        points[static_cast<size_t>(j)].p_rel.y(), -ego.v.x(), -ego.v.y();
    m.P = Mat4::Identity();
    m.P(2, 2) = m.P(3, 3) = 0.5;  // loose velocity prior
    m.last_update = stamp;
    points[static_cast<size_t>(j)].model_id = m.model_id;
    points[static_cast<size_t>(j)].v_rel = m.velocity();
    points[static_cast<size_t>(j)].covariance = m.P;
    next.push_back(std::move(m));
  }
  models_ = std::move(next);
  has_frame_ = true;
  last_stamp_ = stamp;
}

}  // namespace dgap

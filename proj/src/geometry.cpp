#include "waypoint_ar/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "waypoint_ar/errors.hpp"

namespace wpar {
namespace {

bool IsFinite(double a, double b) { return std::isfinite(a) && std::isfinite(b); }

}  // namespace

Trajectory::Trajectory(std::vector<Waypoint> waypoints, double dt)
    : waypoints_(std::move(waypoints)), dt_(dt) {
  if (waypoints_.empty()) {
    throw DomainError("trajectory must hold at least one waypoint");
  }
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) {
    throw DomainError("trajectory dt must be positive and finite");
  }
  for (std::size_t i = 0; i < waypoints_.size(); ++i) {
    if (!IsFinite(waypoints_[i].x, waypoints_[i].y)) {
      throw DomainError("non-finite waypoint at index " + std::to_string(i));
    }
  }
}

Trajectory Trajectory::Zeros(std::size_t horizon, double dt) {
  return Trajectory(std::vector<Waypoint>(horizon), dt);
}

double Trajectory::PathLength() const noexcept {
  double length = 0.0;
  Waypoint prev{};
  for (const Waypoint& w : waypoints_) {
    length += std::hypot(w.x - prev.x, w.y - prev.y);
    prev = w;
  }
  return length;
}

double NormalizeAngle(double radians) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double a = std::remainder(radians, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  return a;
}

Pose2D::Pose2D(double easting, double northing, double heading)
    : easting_(easting), northing_(northing) {
  if (!IsFinite(easting, northing) || !std::isfinite(heading)) {
    throw DomainError("non-finite pose");
  }
  heading_ = NormalizeAngle(heading);
}

Trajectory utm_to_ego(const Pose2D& ego,
                      std::span<const GlobalPoint> future_positions,
                      double dt) {
  const double c = std::cos(ego.heading());
  const double s = std::sin(ego.heading());
  std::vector<Waypoint> out;
  out.reserve(future_positions.size());
  for (const GlobalPoint& p : future_positions) {
    if (!IsFinite(p.easting, p.northing)) {
      throw DomainError("non-finite global position");
    }
    const double de = p.easting - ego.easting();
    const double dn = p.northing - ego.northing();
    // Rot(-heading) * (p - ego): forward along heading, left 90 deg CCW.
    out.push_back({c * de + s * dn, -s * de + c * dn});
  }
  return Trajectory(std::move(out), dt);
}

std::vector<GlobalPoint> ego_to_utm(const Pose2D& ego, const Trajectory& traj) {
  const double c = std::cos(ego.heading());
  const double s = std::sin(ego.heading());
  std::vector<GlobalPoint> out;
  out.reserve(traj.size());
  for (const Waypoint& w : traj.waypoints()) {
    out.push_back({ego.easting() + c * w.x - s * w.y,
                   ego.northing() + s * w.x + c * w.y});
  }
  return out;
}

std::string_view ToString(ManeuverCategory category) noexcept {
  switch (category) {
    case ManeuverCategory::kStraight:
      return "straight";
    case ManeuverCategory::kTurnLeft:
      return "turn_left";
    case ManeuverCategory::kTurnRight:
      return "turn_right";
    case ManeuverCategory::kWaiting:
      return "waiting";
  }
  return "unknown";
}

ManeuverCategory ParseManeuverCategory(std::string_view name) {
  for (auto c : {ManeuverCategory::kStraight, ManeuverCategory::kTurnLeft,
                 ManeuverCategory::kTurnRight, ManeuverCategory::kWaiting}) {
    if (ToString(c) == name) return c;
  }
  throw DomainError("unknown maneuver category '" + std::string(name) + "'");
}

ManeuverCategory classify_maneuver(const Trajectory& traj,
                                   const ManeuverThresholds& thresholds) {
  if (!(thresholds.waiting_path_len_m > 0.0) ||
      !(thresholds.lateral_thresh_m > 0.0)) {
    throw DomainError("maneuver thresholds must be positive");
  }
  if (traj.PathLength() < thresholds.waiting_path_len_m) {
    return ManeuverCategory::kWaiting;
  }
  const double final_y = traj[traj.size() - 1].y;
  if (final_y > thresholds.lateral_thresh_m) return ManeuverCategory::kTurnLeft;
  if (final_y < -thresholds.lateral_thresh_m) {
    return ManeuverCategory::kTurnRight;
  }
  return ManeuverCategory::kStraight;
}

}  // namespace wpar

#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace wpar {

inline constexpr double kStepSeconds = 0.5;
inline constexpr std::size_t kDefaultHorizon = 10;

// Ego-frame position: x forward, y to the left, meters.
struct Waypoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Waypoint&, const Waypoint&) = default;
};

// Future waypoints of the ego vehicle. The origin w_0 = (0, 0) is implicit;
// element i is the position at time (i + 1) * dt.
class Trajectory {
 public:
  // Throws DomainError on an empty list, non-finite coordinates or dt <= 0.
  explicit Trajectory(std::vector<Waypoint> waypoints,
                      double dt = kStepSeconds);

  // T copies of (0, 0).
  static Trajectory Zeros(std::size_t horizon, double dt = kStepSeconds);

  std::size_t size() const noexcept { return waypoints_.size(); }
  double dt() const noexcept { return dt_; }

  const Waypoint& operator[](std::size_t i) const noexcept {
    return waypoints_[i];
  }
  std::span<const Waypoint> waypoints() const noexcept { return waypoints_; }

  // Length of the polyline w_0 -> w_1 -> ... -> w_T.
  double PathLength() const noexcept;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  std::vector<Waypoint> waypoints_;
  double dt_;
};

struct GlobalPoint {
  double easting = 0.0;
  double northing = 0.0;
};

// Planar global pose. Heading is counterclockwise from the easting axis and
// is normalized to (-pi, pi] on construction.
class Pose2D {
 public:
  Pose2D(double easting, double northing, double heading);

  double easting() const noexcept { return easting_; }
  double northing() const noexcept { return northing_; }
  double heading() const noexcept { return heading_; }
  GlobalPoint position() const noexcept { return {easting_, northing_}; }

 private:
  double easting_;
  double northing_;
  double heading_;
};

double NormalizeAngle(double radians);

// Maps global positions into the ego frame of `ego`. Earth curvature is
// ignored. Throws DomainError on non-finite input or an empty list.
Trajectory utm_to_ego(const Pose2D& ego,
                      std::span<const GlobalPoint> future_positions,
                      double dt = kStepSeconds);

std::vector<GlobalPoint> ego_to_utm(const Pose2D& ego, const Trajectory& traj);

enum class ManeuverCategory { kStraight, kTurnLeft, kTurnRight, kWaiting };

inline constexpr std::size_t kNumManeuverCategories = 4;

std::string_view ToString(ManeuverCategory category) noexcept;
// Throws DomainError for an unknown name.
ManeuverCategory ParseManeuverCategory(std::string_view name);

struct ManeuverThresholds {
  double waiting_path_len_m = 2.0;
  double lateral_thresh_m = 2.0;
};

// Waiting if the path (including the leg from the origin) is shorter than
// waiting_path_len_m; otherwise decided by the final lateral offset.
ManeuverCategory classify_maneuver(const Trajectory& traj,
                                   const ManeuverThresholds& thresholds = {});

}  // namespace wpar

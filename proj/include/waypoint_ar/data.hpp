#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "waypoint_ar/geometry.hpp"
#include "waypoint_ar/record.hpp"

namespace wpar {

enum class ManeuverKind { kStraight, kArc, kStop };

// Kinematic parameters of one synthetic scene.
struct ManeuverSpec {
  ManeuverKind kind = ManeuverKind::kStraight;
  double v0 = 0.0;          // m/s, [0, 20]
  double curvature = 0.0;   // 1/m, positive = left, |k| <= 0.2 (Arc only)
  double decel = 0.0;       // m/s^2 >= 0 (Stop only)
  double noise_sigma = 0.0; // std-dev of the context feature noise

  void Validate() const;
};

// Ground-truth waypoints at dt, 2 dt, ..., T dt:
//   Straight  x = v0 t
//   Arc       x = sin(k v0 t) / k, y = (1 - cos(k v0 t)) / k
//   Stop      speed max(v0 - a t, 0) integrated along x
Trajectory KinematicTrajectory(const ManeuverSpec& spec, double dt, std::size_t horizon);

// One component of a synthetic mix. Each scene draws v0, curvature and decel
// uniformly from the closed ranges.
struct MixComponent {
  double weight = 1.0;
  ManeuverKind kind = ManeuverKind::kStraight;
  double v0_min = 0.0, v0_max = 0.0;
  double curvature_min = 0.0, curvature_max = 0.0;
  double decel_min = 0.0, decel_max = 0.0;
  double noise_sigma = 0.0;
};

// Straight/arc/stop mix used by the CLI defaults and the learning checks.
std::vector<MixComponent> DefaultMix();

// Context = [v0, curvature, decel] + N(0, noise_sigma^2) per feature.
// Throws DomainError if n_scenes == 0, weights do not sum to 1 (1e-9) or a
// range violates the ManeuverSpec limits.
Dataset generate_synthetic(std::size_t n_scenes, std::span<const MixComponent> mix,
                           double dt, std::size_t horizon, std::uint64_t seed,
                           const ManeuverThresholds& thresholds = {});

// One JSON object per line: scene_id, sample_id, context, gt ([[x, y], ...]),
// dt, category, source. Numbers use the shortest round-trip decimal form.
void save_dataset(std::span<const SceneRecord> dataset, const std::string& path);
// Throws DataError naming the line on malformed input.
Dataset load_dataset(const std::string& path);
std::string FormatRecordLine(const SceneRecord& record);
SceneRecord ParseRecordLine(const std::string& line, const std::string& origin,
                            std::size_t lineno);

struct TimedPose {
  double timestamp = 0.0;  // seconds
  Pose2D pose{0.0, 0.0, 0.0};
};

struct TrackImport {
  Dataset records;
  std::size_t skipped = 0;  // anchors without a full horizon of future poses
};

// Every pose is an anchor; its next T positions at anchor_time + k dt are
// linearly interpolated from the track and mapped into the anchor's frame.
// Throws DomainError if timestamps are not strictly increasing.
TrackImport import_global_track(std::span<const TimedPose> poses,
                                std::span<const double> context_stub,
                                const std::string& scene_id,
                                std::size_t horizon = kDefaultHorizon,
                                double dt = kStepSeconds,
                                const ManeuverThresholds& thresholds = {});

// "timestamp easting northing heading" per line.
std::vector<TimedPose> ReadGlobalTrack(const std::string& path);

}  // namespace wpar

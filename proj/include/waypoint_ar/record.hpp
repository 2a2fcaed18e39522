#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "waypoint_ar/geometry.hpp"

namespace wpar {

enum class RecordSource { kSynthetic, kImportedGlobalTrack };

std::string_view ToString(RecordSource source) noexcept;
RecordSource ParseRecordSource(std::string_view name);

// One training / evaluation sample.
struct SceneRecord {
  std::string scene_id;
  std::string sample_id;
  std::vector<double> context;
  Trajectory gt = Trajectory::Zeros(kDefaultHorizon);
  ManeuverCategory category = ManeuverCategory::kWaiting;
  RecordSource source = RecordSource::kSynthetic;
};

using Dataset = std::vector<SceneRecord>;

}  // namespace wpar

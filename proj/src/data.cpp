#include "waypoint_ar/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "waypoint_ar/errors.hpp"

namespace wpar {
namespace {

// Below this |k s| the arc formulas lose precision; use the Taylor series.
constexpr double kArcSeriesThreshold = 1e-4;

void CheckRange(double lo, double hi, double min_allowed, double max_allowed,
                const char* what) {
  if (!(lo <= hi) || lo < min_allowed || hi > max_allowed) {
    throw DomainError(std::string("mix range for ") + what + " is invalid");
  }
}

std::string ZeroPadded(std::size_t n, std::size_t width) {
  std::string digits = std::to_string(n);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return digits;
}

}  // namespace

std::string_view ToString(RecordSource source) noexcept {
  return source == RecordSource::kSynthetic ? "synthetic" : "imported_global_track";
}

RecordSource ParseRecordSource(std::string_view name) {
  if (name == "synthetic") return RecordSource::kSynthetic;
  if (name == "imported_global_track") return RecordSource::kImportedGlobalTrack;
  throw DomainError("unknown record source '" + std::string(name) + "'");
}

void ManeuverSpec::Validate() const {
  if (!(v0 >= 0.0 && v0 <= 20.0)) throw DomainError("v0 must lie in [0, 20]");
  if (!(std::abs(curvature) <= 0.2)) throw DomainError("|curvature| must be <= 0.2");
  if (!(decel >= 0.0) || !std::isfinite(decel)) throw DomainError("decel must be >= 0");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw DomainError("noise_sigma must be >= 0");
  }
}

Trajectory KinematicTrajectory(const ManeuverSpec& spec, double dt,
                               std::size_t horizon) {
  spec.Validate();
  if (horizon == 0) throw DomainError("horizon must be >= 1");
  std::vector<Waypoint> out(horizon);
  for (std::size_t i = 0; i < horizon; ++i) {
    const double t = static_cast<double>(i + 1) * dt;
    switch (spec.kind) {
      case ManeuverKind::kStraight:
        out[i] = {spec.v0 * t, 0.0};
        break;
      case ManeuverKind::kArc: {
        const double k = spec.curvature;
        const double s = spec.v0 * t;
        const double theta = k * s;
        if (std::abs(theta) < kArcSeriesThreshold) {
          out[i] = {s * (1.0 - theta * theta / 6.0 + theta * theta * theta * theta / 120.0),
                    k * s * s / 2.0 * (1.0 - theta * theta / 12.0)};
        } else {
          // 1 - cos(theta) = 2 sin^2(theta / 2), without the cancellation.
          const double half = std::sin(0.5 * theta);
          out[i] = {std::sin(theta) / k, 2.0 * half * half / k};
        }
        break;
      }
      case ManeuverKind::kStop: {
        const double a = spec.decel;
        const double t_stop = a > 0.0 ? spec.v0 / a : t;
        const double tm = std::min(t, t_stop);
        out[i] = {spec.v0 * tm - 0.5 * a * tm * tm, 0.0};
        break;
      }
    }
  }
  return Trajectory(std::move(out), dt);
}

std::vector<MixComponent> DefaultMix() {
  std::vector<MixComponent> mix(3);
  mix[0] = {0.3, ManeuverKind::kStraight, 1.0, 8.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  mix[1] = {0.5, ManeuverKind::kArc, 2.0, 8.0, -0.2, 0.2, 0.0, 0.0, 0.0};
  mix[2] = {0.2, ManeuverKind::kStop, 0.0, 6.0, 0.0, 0.0, 0.5, 3.0, 0.0};
  return mix;
}

Dataset generate_synthetic(std::size_t n_scenes, std::span<const MixComponent> mix,
                           double dt, std::size_t horizon, std::uint64_t seed,
                           const ManeuverThresholds& thresholds) {
  if (n_scenes == 0) throw DomainError("n_scenes must be >= 1");
  if (mix.empty()) throw DomainError("mix must have at least one component");
  double weight_sum = 0.0;
  std::vector<double> weights;
  for (const MixComponent& c : mix) {
    if (!(c.weight >= 0.0)) throw DomainError("mix weights must be >= 0");
    CheckRange(c.v0_min, c.v0_max, 0.0, 20.0, "v0");
    CheckRange(c.curvature_min, c.curvature_max, -0.2, 0.2, "curvature");
    CheckRange(c.decel_min, c.decel_max, 0.0, 1e6, "decel");
    if (!(c.noise_sigma >= 0.0)) throw DomainError("noise_sigma must be >= 0");
    weight_sum += c.weight;
    weights.push_back(c.weight);
  }
  if (std::abs(weight_sum - 1.0) > 1e-9) {
    throw DomainError("mix weights must sum to 1");
  }

  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::normal_distribution<double> noise(0.0, 1.0);
  auto uniform = [&rng](double lo, double hi) {
    return lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  const std::size_t width = std::max<std::size_t>(6, std::to_string(n_scenes).size());
  Dataset out;
  out.reserve(n_scenes);
  for (std::size_t i = 0; i < n_scenes; ++i) {
    const MixComponent& c = mix[pick(rng)];
    ManeuverSpec spec;
    spec.kind = c.kind;
    spec.v0 = uniform(c.v0_min, c.v0_max);
    spec.curvature = c.kind == ManeuverKind::kArc ? uniform(c.curvature_min, c.curvature_max) : 0.0;
    spec.decel = c.kind == ManeuverKind::kStop ? uniform(c.decel_min, c.decel_max) : 0.0;
    spec.noise_sigma = c.noise_sigma;

    SceneRecord r;
    r.scene_id = "syn-" + ZeroPadded(i, width);
    r.sample_id = "0";
    r.context = {spec.v0, spec.curvature, spec.decel};
    for (double& f : r.context) f += spec.noise_sigma * noise(rng);
    r.gt = KinematicTrajectory(spec, dt, horizon);
    r.category = classify_maneuver(r.gt, thresholds);
    r.source = RecordSource::kSynthetic;
    out.push_back(std::move(r));
  }
  return out;
}

std::string FormatRecordLine(const SceneRecord& r) {
  nlohmann::ordered_json j;
  j["scene_id"] = r.scene_id;
  j["sample_id"] = r.sample_id;
  j["context"] = r.context;
  nlohmann::json gt = nlohmann::json::array();
  for (const Waypoint& w : r.gt.waypoints()) gt.push_back({w.x, w.y});
  j["gt"] = std::move(gt);
  j["dt"] = r.gt.dt();
  j["category"] = ToString(r.category);
  j["source"] = ToString(r.source);
  return j.dump();
}

SceneRecord ParseRecordLine(const std::string& line, const std::string& origin,
                            std::size_t lineno) {
  try {
    const nlohmann::json j = nlohmann::json::parse(line);
    SceneRecord r;
    r.scene_id = j.at("scene_id").get<std::string>();
    r.sample_id = j.at("sample_id").get<std::string>();
    r.context = j.at("context").get<std::vector<double>>();
    std::vector<Waypoint> gt;
    for (const auto& w : j.at("gt")) {
      if (!w.is_array() || w.size() != 2) {
        throw DomainError("gt waypoints must be [x, y] pairs");
      }
      gt.push_back({w[0].get<double>(), w[1].get<double>()});
    }
    r.gt = Trajectory(std::move(gt), j.at("dt").get<double>());
    r.category = ParseManeuverCategory(j.at("category").get<std::string>());
    r.source = ParseRecordSource(j.at("source").get<std::string>());
    for (double f : r.context) {
      if (!std::isfinite(f)) throw DomainError("context must be finite");
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(origin, lineno, std::string("malformed record: ") + e.what());
  } catch (const DomainError& e) {
    throw DataError(origin, lineno, std::string("invalid record: ") + e.what());
  }
}

void save_dataset(std::span<const SceneRecord> dataset, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(path, 0, "cannot open for writing");
  for (const SceneRecord& r : dataset) out << FormatRecordLine(r) << '\n';
  if (!out) throw DataError(path, 0, "write failed");
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path, 0, "cannot open for reading");
  Dataset out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(ParseRecordLine(line, path, lineno));
  }
  return out;
}

TrackImport import_global_track(std::span<const TimedPose> poses,
                                std::span<const double> context_stub,
                                const std::string& scene_id, std::size_t horizon,
                                double dt, const ManeuverThresholds& thresholds) {
  if (horizon == 0 || !(dt > 0.0)) throw DomainError("invalid horizon or dt");
  for (std::size_t i = 1; i < poses.size(); ++i) {
    if (!(poses[i].timestamp > poses[i - 1].timestamp)) {
      throw DomainError("track timestamps must be strictly increasing");
    }
  }
  TrackImport result;
  std::vector<GlobalPoint> future(horizon);
  for (std::size_t anchor = 0; anchor < poses.size(); ++anchor) {
    const double t0 = poses[anchor].timestamp;
    bool complete = true;
    std::size_t seg = anchor;
    for (std::size_t k = 1; k <= horizon; ++k) {
      const double t = t0 + static_cast<double>(k) * dt;
      while (seg + 1 < poses.size() && poses[seg + 1].timestamp <= t) ++seg;
      if (poses[seg].timestamp == t) {
        future[k - 1] = poses[seg].pose.position();
        continue;
      }
      if (seg + 1 >= poses.size()) {
        complete = false;
        break;
      }
      const TimedPose& a = poses[seg];
      const TimedPose& b = poses[seg + 1];
      const double w = (t - a.timestamp) / (b.timestamp - a.timestamp);
      future[k - 1] = {a.pose.easting() + w * (b.pose.easting() - a.pose.easting()),
                       a.pose.northing() + w * (b.pose.northing() - a.pose.northing())};
    }
    if (!complete) {
      ++result.skipped;
      continue;
    }
    SceneRecord r;
    r.scene_id = scene_id;
    r.sample_id = std::to_string(anchor);
    r.context.assign(context_stub.begin(), context_stub.end());
    r.gt = utm_to_ego(poses[anchor].pose, future, dt);
    r.category = classify_maneuver(r.gt, thresholds);
    r.source = RecordSource::kImportedGlobalTrack;
    result.records.push_back(std::move(r));
  }
  return result;
}

std::vector<TimedPose> ReadGlobalTrack(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path, 0, "cannot open for reading");
  std::vector<TimedPose> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    double t, e, n, h;
    std::string rest;
    if (!(fields >> t >> e >> n >> h) || (fields >> rest) || !std::isfinite(t)) {
      throw DataError(path, lineno, "expected 'timestamp easting northing heading'");
    }
    try {
      out.push_back({t, Pose2D(e, n, h)});
    } catch (const DomainError& err) {
      throw DataError(path, lineno, err.what());
    }
  }
  return out;
}

}  // namespace wpar

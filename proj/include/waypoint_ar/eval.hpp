#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "waypoint_ar/geometry.hpp"
#include "waypoint_ar/policy.hpp"
#include "waypoint_ar/record.hpp"

namespace wpar {

inline constexpr std::array<double, 4> kEvalHorizons = {1.0, 2.0, 3.0, 5.0};

// Metric values at 1 s, 2 s, 3 s and 5 s plus the mean of the first three.
struct HorizonMetrics {
  std::array<double, 4> by_horizon{};
  double avg_1to3 = 0.0;

  static HorizonMetrics FromHorizons(const std::array<double, 4>& values);
  // Throws DomainError for a horizon outside kEvalHorizons.
  double at(double horizon_s) const;
};

// Displacement at exactly horizon_s (UniAD-style L2 at a time step).
// Throws DomainError unless horizon_s / dt is an integer in [1, T].
double l2_at(const Trajectory& pred, const Trajectory& gt, double horizon_s);

// Mean displacement over all waypoints up to horizon_s (ST-P3-style).
double l2_avg_to(const Trajectory& pred, const Trajectory& gt, double horizon_s);

enum class SpeedScaleNorm {
  kSquared,    // sum_i |l w_hat_i - w_i|^2, closed form
  kUnsquared,  // sum_i |l w_hat_i - w_i|, bracketed golden-section search
};

double speed_scale_objective(const Trajectory& pred, const Trajectory& gt,
                             double lambda, SpeedScaleNorm norm);

// argmin over lambda of speed_scale_objective. Throws DomainError when pred
// is identically zero.
double optimal_speed_scale(const Trajectory& pred, const Trajectory& gt,
                           SpeedScaleNorm norm = SpeedScaleNorm::kSquared);

Trajectory Scaled(const Trajectory& traj, double factor);

struct SpeedScaleResult {
  double lambda_star = 1.0;
  HorizonMetrics rescaled_l2_max;
  HorizonMetrics rescaled_l2_avg;
  double adaptation_gap = 0.0;  // |lambda_star - 1|
};

struct RecordMetrics {
  HorizonMetrics l2_max;
  HorizonMetrics l2_avg;
  std::optional<SpeedScaleResult> speed;
};

RecordMetrics evaluate_record(const Trajectory& pred, const Trajectory& gt,
                              bool with_speed_scale,
                              SpeedScaleNorm norm = SpeedScaleNorm::kSquared);

struct SpeedScaleSummary {
  double mean_lambda = 0.0;
  double min_lambda = 0.0;
  double max_lambda = 0.0;
  double mean_adaptation_gap = 0.0;
  HorizonMetrics rescaled_l2_max;
  HorizonMetrics rescaled_l2_avg;
};

struct EvalReport {
  std::size_t record_count = 0;
  HorizonMetrics l2_max;
  HorizonMetrics l2_avg;
  SpeedScaleNorm norm = SpeedScaleNorm::kSquared;
  std::optional<SpeedScaleSummary> speed;
};

struct EvalOptions {
  bool with_speed_scale = false;
  SpeedScaleNorm norm = SpeedScaleNorm::kSquared;
  // Worker threads for per-record evaluation; the reduction order is fixed,
  // so the report does not depend on this.
  std::size_t jobs = 1;
};

// Must be safe to call concurrently when jobs > 1.
using Predictor = std::function<Trajectory(const SceneRecord&)>;

// Unweighted mean over records. Throws DomainError on an empty dataset.
EvalReport evaluate_predictions(std::span<const SceneRecord> dataset,
                                const Predictor& predictor,
                                const EvalOptions& options = {});

// Free-running rollout of `params` on every record.
EvalReport evaluate(std::span<const SceneRecord> dataset, const PolicyParams& params,
                    const EvalOptions& options = {});

// Nested key-value text (JSON).
std::string FormatEvalReport(const EvalReport& report);
// "metric,horizon_s,value,rescaled_flag" rows.
std::string FormatEvalCsv(const EvalReport& report);

}  // namespace wpar

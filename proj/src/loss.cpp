#include "waypoint_ar/loss.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "waypoint_ar/errors.hpp"

namespace wpar {
namespace {

void CheckSameLength(const Trajectory& pred, const Trajectory& gt) {
  if (pred.size() != gt.size()) {
    throw DomainError("trajectory length mismatch: " +
                      std::to_string(pred.size()) + " vs " +
                      std::to_string(gt.size()));
  }
}

double SquaredDistance(const Waypoint& a, const Waypoint& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

}  // namespace

GaussianNoiseModel::GaussianNoiseModel(double sigma) : sigma_(sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw DomainError("sigma must be positive and finite");
  }
}

double gaussian_nll(const Trajectory& pred, const Trajectory& gt,
                    const GaussianNoiseModel& model) {
  CheckSameLength(pred, gt);
  const double var = model.sigma() * model.sigma();
  const double log_norm = 0.5 * std::log(2.0 * std::numbers::pi * var);
  double total = 0.0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    total += log_norm + SquaredDistance(gt[t], pred[t]) / (2.0 * var);
  }
  return total;
}

double l2_loss(const Trajectory& pred, const Trajectory& gt) {
  CheckSameLength(pred, gt);
  double total = 0.0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    total += SquaredDistance(gt[t], pred[t]);
  }
  return total;
}

double l2_loss(const Trajectory& pred, const Trajectory& gt,
               std::span<const double> step_weights) {
  CheckSameLength(pred, gt);
  if (step_weights.size() != pred.size()) {
    throw DomainError("step weight count does not match horizon");
  }
  double total = 0.0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    total += step_weights[t] * SquaredDistance(gt[t], pred[t]);
  }
  return total;
}

double distance_loss(std::span<const std::pair<Trajectory, Trajectory>> pairs) {
  double total = 0.0;
  for (const auto& [pred, gt] : pairs) total += l2_loss(pred, gt);
  return total;
}

std::vector<Waypoint> l2_loss_grad(const Trajectory& pred, const Trajectory& gt) {
  CheckSameLength(pred, gt);
  std::vector<Waypoint> grad(pred.size());
  for (std::size_t t = 0; t < pred.size(); ++t) {
    grad[t] = {2.0 * (pred[t].x - gt[t].x), 2.0 * (pred[t].y - gt[t].y)};
  }
  return grad;
}

}  // namespace wpar

#pragma once

#include <span>
#include <utility>
#include <vector>

#include "waypoint_ar/geometry.hpp"

namespace wpar {

// Isotropic per-waypoint noise shared by prediction and ground truth.
class GaussianNoiseModel {
 public:
  explicit GaussianNoiseModel(double sigma = 1.0);
  double sigma() const noexcept { return sigma_; }

 private:
  double sigma_;
};

// Empirical cross-entropy between the plug-in Gaussians centred on `gt` and
// `pred`:  sum_t 1/2 log(2 pi sigma^2) + |w_t - w'_t|^2 / (2 sigma^2).
// The per-step normalizer is the 1/2 log(2 pi sigma^2) form, not the 2-D
// log(2 pi sigma^2); it only shifts the loss by a constant.
double gaussian_nll(const Trajectory& pred, const Trajectory& gt,
                    const GaussianNoiseModel& model = GaussianNoiseModel{});

// sum_t |w_t - w'_t|^2
double l2_loss(const Trajectory& pred, const Trajectory& gt);

// sum_t weight_t |w_t - w'_t|^2. Weights must match the horizon.
double l2_loss(const Trajectory& pred, const Trajectory& gt,
               std::span<const double> step_weights);

// Batch distance loss: sum over samples of l2_loss.
double distance_loss(std::span<const std::pair<Trajectory, Trajectory>> pairs);

// d l2_loss / d pred_t = 2 (pred_t - gt_t).
std::vector<Waypoint> l2_loss_grad(const Trajectory& pred, const Trajectory& gt);

}  // namespace wpar

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "waypoint_ar/geometry.hpp"
#include "waypoint_ar/record.hpp"

namespace wpar {

using Rng = std::mt19937_64;

inline constexpr std::size_t kDefaultHiddenDim = 64;

// Two-layer step network
//   mu_t = W2 tanh(W1 [context; prev.x; prev.y; t / T] + b1) + b2.
// The same struct carries gradients (same shapes).
struct PolicyParams {
  std::size_t context_dim = 0;
  std::size_t hidden_dim = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd w1;  // hidden_dim x (context_dim + 3)
  Eigen::VectorXd b1;  // hidden_dim
  Eigen::MatrixXd w2;  // 2 x hidden_dim
  Eigen::VectorXd b2;  // 2

  static PolicyParams Zeros(std::size_t context_dim, std::size_t hidden_dim);

  std::size_t input_dim() const noexcept { return context_dim + 3; }
  std::size_t ParameterCount() const noexcept;

  // Flat view in declaration order (w1, b1, w2, b2), each matrix row-major.
  std::vector<double> Flatten() const;
  void Assign(std::span<const double> flat);

  // Throws DomainError on inconsistent shapes or non-finite weights.
  void Validate() const;
  bool SameShape(const PolicyParams& other) const noexcept;

  friend bool operator==(const PolicyParams& a, const PolicyParams& b);
};

// Xavier-uniform weights, zero biases. Throws DomainError on zero dims.
PolicyParams init_params(std::size_t context_dim, std::size_t hidden_dim,
                         std::uint64_t seed);

double XavierBound(std::size_t fan_in, std::size_t fan_out);

// Conditional mean of waypoint t_index given the previous waypoint.
Waypoint step(const PolicyParams& params, std::span<const double> context,
              const Waypoint& prev_waypoint, std::size_t t_index,
              std::size_t horizon);

enum class InputChoice { kUsedGroundTruth, kUsedPrediction };

class RolloutMode {
 public:
  enum class Kind { kTeacherForced, kScheduled, kFreeRunning };

  static RolloutMode TeacherForced() { return RolloutMode(Kind::kTeacherForced, 0.0); }
  static RolloutMode FreeRunning() { return RolloutMode(Kind::kFreeRunning, 1.0); }
  // Throws DomainError unless 0 <= p <= 1.
  static RolloutMode Scheduled(double p);

  Kind kind() const noexcept { return kind_; }
  // Probability of feeding back the model's own previous prediction.
  double prediction_probability() const noexcept { return p_; }
  bool needs_ground_truth() const noexcept { return kind_ != Kind::kFreeRunning; }

 private:
  RolloutMode(Kind kind, double p) : kind_(kind), p_(p) {}
  Kind kind_;
  double p_;
};

struct RolloutResult {
  Trajectory pred;
  // One draw per step k >= 1; step 0 always starts from the origin.
  std::vector<InputChoice> input_choices;
  // Previous waypoint actually fed at each step (size T, element 0 = origin).
  std::vector<Waypoint> step_inputs;
};

// `gt` may be null only in FreeRunning mode; its length, when present, must
// equal `horizon`. Randomness is consumed only for 0 < p < 1.
RolloutResult rollout(const PolicyParams& params, std::span<const double> context,
                      std::size_t horizon, const Trajectory* gt,
                      const RolloutMode& mode, Rng& rng);

struct BackpropResult {
  double loss = 0.0;  // mean over the batch of l2_loss(pred, gt)
  PolicyParams grads;
  std::vector<RolloutResult> rollouts;
};

// Rolls every record out under `mode`, then differentiates the mean l2 loss.
// Fed-back predictions are treated as constants (no gradient through the
// sampling decision or the fed value). Throws DomainError on an empty batch.
BackpropResult backprop(const PolicyParams& params,
                        std::span<const SceneRecord* const> batch,
                        const RolloutMode& mode, Rng& rng);

// Loss and gradient with the per-step inputs held fixed; `step_inputs[i]`
// belongs to batch[i]. backprop() is this applied to freshly drawn inputs.
BackpropResult backprop_frozen(
    const PolicyParams& params, std::span<const SceneRecord* const> batch,
    std::span<const std::vector<Waypoint>> step_inputs);

double frozen_input_loss(const PolicyParams& params,
                         std::span<const SceneRecord* const> batch,
                         std::span<const std::vector<Waypoint>> step_inputs);

// --- checkpoint -------------------------------------------------------------
// "WPOL", u32 version, u32 context_dim, u32 hidden_dim, u64 seed, then w1, b1,
// w2, b2 as row-major little-endian f64.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void SaveCheckpoint(const PolicyParams& params, const std::string& path);
PolicyParams LoadCheckpoint(const std::string& path);

}  // namespace wpar

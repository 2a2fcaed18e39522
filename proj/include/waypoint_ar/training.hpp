#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "waypoint_ar/policy.hpp"
#include "waypoint_ar/record.hpp"

namespace wpar {

// Probability of feeding back the model's own prediction, per epoch:
// min(p_start + epoch * p_step, p_cap).
struct SamplingSchedule {
  double p_start = 0.4;
  double p_step = 0.1;
  double p_cap = 0.6;

  static SamplingSchedule TeacherForcing() { return {0.0, 0.0, 0.0}; }
  void Validate() const;
};

double sampling_prob(const SamplingSchedule& schedule, std::size_t epoch);

// Buckets a dataset by maneuver category so that every nonempty category is
// drawn equally often (record weight 1 / n_i). Holds a view of the dataset,
// which must outlive the sampler.
class BalancedSampler {
 public:
  explicit BalancedSampler(std::span<const SceneRecord> dataset);

  std::span<const SceneRecord> dataset() const noexcept { return dataset_; }
  std::size_t count(ManeuverCategory category) const noexcept;
  const std::vector<std::size_t>& bucket(ManeuverCategory category) const noexcept;
  // Categories with at least one record, in enum order.
  const std::vector<ManeuverCategory>& nonempty() const noexcept {
    return nonempty_;
  }

 private:
  std::span<const SceneRecord> dataset_;
  std::array<std::vector<std::size_t>, kNumManeuverCategories> buckets_;
  std::vector<ManeuverCategory> nonempty_;
};

// 1 / n_i for the record's category. Throws DomainError if that bucket is
// empty.
double record_weight(const BalancedSampler& sampler, const SceneRecord& record);

// With replacement: uniform category among the nonempty ones, then uniform
// record within it. Throws DomainError on an empty dataset.
std::vector<const SceneRecord*> draw_batch(const BalancedSampler& sampler,
                                           Rng& rng, std::size_t batch_size);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;
};

// An empty state is initialized to zero moments on first use.
std::pair<PolicyParams, AdamState> adam_update(const PolicyParams& params,
                                               const PolicyParams& grads,
                                               const AdamState& state,
                                               const AdamConfig& config);

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  AdamConfig adam;
  std::uint64_t seed = 7;
  std::size_t hidden_dim = kDefaultHiddenDim;
  // Training is single-threaded with a fixed reduction order, so results are
  // always bitwise reproducible; the flag is recorded for provenance.
  bool deterministic = true;
  // Records used for the per-epoch teacher-forced probe loss.
  std::size_t probe_size = 256;

  void Validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;         // 0-based
  double scheduled_p = 0.0;
  double mean_loss = 0.0;        // mean training batch loss under scheduled_p
  double probe_tf_loss = 0.0;    // teacher-forced loss on the probe records
};

struct TrainResult {
  PolicyParams params;
  std::vector<EpochStats> curve;
  TrainConfig config;
  SamplingSchedule schedule;
  std::size_t dataset_size = 0;
  std::size_t steps_per_epoch = 0;
};

// Epoch e: steps_per_epoch = max(1, N / batch_size) draws of draw_batch ->
// backprop(Scheduled(sampling_prob(e))) -> adam_update. Throws
// DivergenceError on a non-finite loss.
TrainResult train(std::span<const SceneRecord> dataset, const TrainConfig& config,
                  const SamplingSchedule& schedule);

// Teacher-forced mean l2 loss over `records`.
double teacher_forced_loss(const PolicyParams& params,
                           std::span<const SceneRecord* const> records);

// --- config / curve files ---------------------------------------------------

struct TrainSetup {
  TrainConfig config;
  SamplingSchedule schedule;
};

// "key = value" lines, '#' comments. Keys: epochs, batch_size, learning_rate,
// beta1, beta2, epsilon, seed, hidden_dim, deterministic, probe_size,
// p_start, p_step, p_cap.
TrainSetup ParseTrainSetup(const std::string& text, const std::string& origin);
TrainSetup ReadTrainSetup(const std::string& path);
std::string FormatTrainSetup(const TrainSetup& setup);

// "epoch,scheduled_p,mean_loss" header plus one row per epoch.
void WriteLossCurve(const std::vector<EpochStats>& curve, const std::string& path);

}  // namespace wpar

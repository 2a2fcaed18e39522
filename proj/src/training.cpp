#include "waypoint_ar/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include "waypoint_ar/errors.hpp"

namespace wpar {
namespace {

// Separates the sampling/rollout stream from the weight-initialization one.
constexpr std::uint64_t kTrainStreamSalt = 0x9E3779B97F4A7C15ull;

std::size_t Index(ManeuverCategory c) { return static_cast<std::size_t>(c); }

std::string Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

void SamplingSchedule::Validate() const {
  if (!(p_start >= 0.0 && p_start <= p_cap && p_cap <= 1.0 && p_step >= 0.0)) {
    throw DomainError("sampling schedule requires 0 <= p_start <= p_cap <= 1 "
                      "and p_step >= 0");
  }
}

double sampling_prob(const SamplingSchedule& schedule, std::size_t epoch) {
  schedule.Validate();
  return std::min(schedule.p_start + static_cast<double>(epoch) * schedule.p_step,
                  schedule.p_cap);
}

BalancedSampler::BalancedSampler(std::span<const SceneRecord> dataset)
    : dataset_(dataset) {
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    buckets_[Index(dataset[i].category)].push_back(i);
  }
  for (std::size_t c = 0; c < kNumManeuverCategories; ++c) {
    if (!buckets_[c].empty()) nonempty_.push_back(static_cast<ManeuverCategory>(c));
  }
}

std::size_t BalancedSampler::count(ManeuverCategory category) const noexcept {
  return buckets_[Index(category)].size();
}

const std::vector<std::size_t>& BalancedSampler::bucket(
    ManeuverCategory category) const noexcept {
  return buckets_[Index(category)];
}

double record_weight(const BalancedSampler& sampler, const SceneRecord& record) {
  const std::size_t n = sampler.count(record.category);
  if (n == 0) {
    throw DomainError("record category '" + std::string(ToString(record.category)) +
                      "' has no records in the sampler");
  }
  return 1.0 / static_cast<double>(n);
}

std::vector<const SceneRecord*> draw_batch(const BalancedSampler& sampler,
                                           Rng& rng, std::size_t batch_size) {
  if (sampler.dataset().empty()) {
    throw DomainError("cannot draw from an empty dataset");
  }
  std::vector<const SceneRecord*> batch;
  batch.reserve(batch_size);
  const auto& categories = sampler.nonempty();
  std::uniform_int_distribution<std::size_t> pick_category(0, categories.size() - 1);
  for (std::size_t i = 0; i < batch_size; ++i) {
    const auto& bucket = sampler.bucket(categories[pick_category(rng)]);
    std::uniform_int_distribution<std::size_t> pick_record(0, bucket.size() - 1);
    batch.push_back(&sampler.dataset()[bucket[pick_record(rng)]]);
  }
  return batch;
}

std::pair<PolicyParams, AdamState> adam_update(const PolicyParams& params,
                                               const PolicyParams& grads,
                                               const AdamState& state,
                                               const AdamConfig& config) {
  if (!params.SameShape(grads)) {
    throw DomainError("gradient shape does not match parameters");
  }
  std::vector<double> theta = params.Flatten();
  const std::vector<double> g = grads.Flatten();
  AdamState next = state;
  if (next.m.empty() && next.v.empty() && next.t == 0) {
    next.m.assign(theta.size(), 0.0);
    next.v.assign(theta.size(), 0.0);
  }
  if (next.m.size() != theta.size() || next.v.size() != theta.size()) {
    throw DomainError("optimizer state shape does not match parameters");
  }
  ++next.t;
  const double correction1 = 1.0 - std::pow(config.beta1, static_cast<double>(next.t));
  const double correction2 = 1.0 - std::pow(config.beta2, static_cast<double>(next.t));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    next.m[i] = config.beta1 * next.m[i] + (1.0 - config.beta1) * g[i];
    next.v[i] = config.beta2 * next.v[i] + (1.0 - config.beta2) * g[i] * g[i];
    const double m_hat = next.m[i] / correction1;
    const double v_hat = next.v[i] / correction2;
    theta[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
  PolicyParams updated = params;
  updated.Assign(theta);
  return {std::move(updated), std::move(next)};
}

void TrainConfig::Validate() const {
  if (epochs == 0 || batch_size == 0 || hidden_dim == 0) {
    throw DomainError("epochs, batch_size and hidden_dim must be >= 1");
  }
  if (!(adam.learning_rate > 0.0) || !std::isfinite(adam.learning_rate)) {
    throw DomainError("learning_rate must be positive");
  }
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 &&
        adam.beta2 < 1.0 && adam.epsilon > 0.0)) {
    throw DomainError("invalid Adam hyperparameters");
  }
}

double teacher_forced_loss(const PolicyParams& params,
                           std::span<const SceneRecord* const> records) {
  if (records.empty()) throw DomainError("teacher-forced loss needs records");
  Rng unused(0);
  double total = 0.0;
  for (const SceneRecord* r : records) {
    const RolloutResult out = rollout(params, r->context, r->gt.size(), &r->gt,
                                      RolloutMode::TeacherForced(), unused);
    for (std::size_t t = 0; t < r->gt.size(); ++t) {
      const double dx = out.pred[t].x - r->gt[t].x;
      const double dy = out.pred[t].y - r->gt[t].y;
      total += dx * dx + dy * dy;
    }
  }
  return total / static_cast<double>(records.size());
}

TrainResult train(std::span<const SceneRecord> dataset, const TrainConfig& config,
                  const SamplingSchedule& schedule) {
  config.Validate();
  schedule.Validate();
  if (dataset.empty()) throw DomainError("training dataset is empty");
  const std::size_t context_dim = dataset.front().context.size();
  const std::size_t horizon = dataset.front().gt.size();
  for (const SceneRecord& r : dataset) {
    if (r.context.size() != context_dim || r.gt.size() != horizon) {
      throw DomainError("record '" + r.scene_id +
                        "' has a context or horizon inconsistent with the dataset");
    }
  }

  TrainResult result;
  result.config = config;
  result.schedule = schedule;
  result.dataset_size = dataset.size();
  result.steps_per_epoch = std::max<std::size_t>(1, dataset.size() / config.batch_size);
  result.params = init_params(context_dim, config.hidden_dim, config.seed);

  std::vector<const SceneRecord*> probe;
  const std::size_t probe_n = std::min(config.probe_size, dataset.size());
  for (std::size_t i = 0; i < probe_n; ++i) {
    probe.push_back(&dataset[i * dataset.size() / std::max<std::size_t>(probe_n, 1)]);
  }

  const BalancedSampler sampler(dataset);
  Rng rng(config.seed ^ kTrainStreamSalt);
  AdamState adam;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double p = sampling_prob(schedule, epoch);
    const RolloutMode mode =
        p == 0.0 ? RolloutMode::TeacherForced() : RolloutMode::Scheduled(p);
    double loss_sum = 0.0;
    for (std::size_t s = 0; s < result.steps_per_epoch; ++s) {
      const auto batch = draw_batch(sampler, rng, config.batch_size);
      const BackpropResult bp = backprop(result.params, batch, mode, rng);
      if (!std::isfinite(bp.loss)) {
        throw DivergenceError("non-finite training loss at epoch " +
                              std::to_string(epoch) + ", step " + std::to_string(s));
      }
      loss_sum += bp.loss;
      std::tie(result.params, adam) =
          adam_update(result.params, bp.grads, adam, config.adam);
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.scheduled_p = p;
    stats.mean_loss = loss_sum / static_cast<double>(result.steps_per_epoch);
    stats.probe_tf_loss = probe.empty() ? 0.0 : teacher_forced_loss(result.params, probe);
    if (!std::isfinite(stats.probe_tf_loss)) {
      throw DivergenceError("non-finite teacher-forced probe loss after epoch " +
                            std::to_string(epoch));
    }
    result.curve.push_back(stats);
  }
  return result;
}

TrainSetup ParseTrainSetup(const std::string& text, const std::string& origin) {
  TrainSetup setup;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string trimmed = Trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw DataError(origin, lineno, "expected 'key = value'");
    }
    const std::string key = Trim(std::string_view(trimmed).substr(0, eq));
    const std::string value = Trim(std::string_view(trimmed).substr(eq + 1));
    auto as_double = [&]() {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != value.size() || value.empty() || !std::isfinite(v)) {
        throw DataError(origin, lineno, "value for '" + key + "' is not a number");
      }
      return v;
    };
    auto as_count = [&]() {
      if (value.empty() || value.find_first_not_of("0123456789") != std::string::npos) {
        throw DataError(origin, lineno,
                        "value for '" + key + "' is not a non-negative integer");
      }
      try {
        return static_cast<std::uint64_t>(std::stoull(value));
      } catch (const std::exception&) {
        throw DataError(origin, lineno, "value for '" + key + "' is out of range");
      }
    };
    if (key == "epochs") setup.config.epochs = as_count();
    else if (key == "batch_size") setup.config.batch_size = as_count();
    else if (key == "learning_rate") setup.config.adam.learning_rate = as_double();
    else if (key == "beta1") setup.config.adam.beta1 = as_double();
    else if (key == "beta2") setup.config.adam.beta2 = as_double();
    else if (key == "epsilon") setup.config.adam.epsilon = as_double();
    else if (key == "seed") setup.config.seed = as_count();
    else if (key == "hidden_dim") setup.config.hidden_dim = as_count();
    else if (key == "probe_size") setup.config.probe_size = as_count();
    else if (key == "p_start") setup.schedule.p_start = as_double();
    else if (key == "p_step") setup.schedule.p_step = as_double();
    else if (key == "p_cap") setup.schedule.p_cap = as_double();
    else if (key == "deterministic") {
      if (value == "true" || value == "1") setup.config.deterministic = true;
      else if (value == "false" || value == "0") setup.config.deterministic = false;
      else throw DataError(origin, lineno, "deterministic must be true or false");
    } else {
      throw DataError(origin, lineno, "unknown key '" + key + "'");
    }
  }
  try {
    setup.config.Validate();
    setup.schedule.Validate();
  } catch (const DomainError& e) {
    throw DataError(origin, 0, e.what());
  }
  return setup;
}

TrainSetup ReadTrainSetup(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path, 0, "cannot open for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseTrainSetup(buffer.str(), path);
}

std::string FormatTrainSetup(const TrainSetup& setup) {
  std::ostringstream out;
  out.precision(17);
  const TrainConfig& c = setup.config;
  out << "epochs = " << c.epochs << '\n'
      << "batch_size = " << c.batch_size << '\n'
      << "learning_rate = " << c.adam.learning_rate << '\n'
      << "beta1 = " << c.adam.beta1 << '\n'
      << "beta2 = " << c.adam.beta2 << '\n'
      << "epsilon = " << c.adam.epsilon << '\n'
      << "seed = " << c.seed << '\n'
      << "hidden_dim = " << c.hidden_dim << '\n'
      << "probe_size = " << c.probe_size << '\n'
      << "deterministic = " << (c.deterministic ? "true" : "false") << '\n'
      << "p_start = " << setup.schedule.p_start << '\n'
      << "p_step = " << setup.schedule.p_step << '\n'
      << "p_cap = " << setup.schedule.p_cap << '\n';
  return out.str();
}

void WriteLossCurve(const std::vector<EpochStats>& curve, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(path, 0, "cannot open for writing");
  out.precision(17);
  out << "epoch,scheduled_p,mean_loss\n";
  for (const EpochStats& s : curve) {
    out << s.epoch << ',' << s.scheduled_p << ',' << s.mean_loss << '\n';
  }
}

}  // namespace wpar

#include "waypoint_ar/policy.hpp"

#include <cmath>
#include <fstream>

#include "binary_io.hpp"
#include "waypoint_ar/errors.hpp"

namespace wpar {
namespace {

constexpr char kCheckpointMagic[4] = {'W', 'P', 'O', 'L'};

Eigen::VectorXd StepInput(std::span<const double> context, const Waypoint& prev,
                          std::size_t t_index, std::size_t horizon) {
  Eigen::VectorXd x(context.size() + 3);
  for (std::size_t i = 0; i < context.size(); ++i) x[i] = context[i];
  x[context.size()] = prev.x;
  x[context.size() + 1] = prev.y;
  x[context.size() + 2] =
      static_cast<double>(t_index) / static_cast<double>(horizon);
  return x;
}

void CheckStepArgs(const PolicyParams& params, std::span<const double> context,
                   std::size_t t_index, std::size_t horizon) {
  if (context.size() != params.context_dim) {
    throw DomainError("context length " + std::to_string(context.size()) +
                      " does not match policy context_dim " +
                      std::to_string(params.context_dim));
  }
  if (horizon == 0 || t_index >= horizon) {
    throw DomainError("step index out of range");
  }
}

template <typename Fn>
void ForEachRowMajor(const Eigen::MatrixXd& m, Fn&& fn) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) fn(m(r, c));
  }
}

template <typename Fn>
void ForEachRowMajor(Eigen::MatrixXd& m, Fn&& fn) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) fn(m(r, c));
  }
}

void CheckBatch(std::span<const SceneRecord* const> batch) {
  if (batch.empty()) throw DomainError("backprop needs a nonempty batch");
}

}  // namespace

PolicyParams PolicyParams::Zeros(std::size_t context_dim, std::size_t hidden_dim) {
  PolicyParams p;
  p.context_dim = context_dim;
  p.hidden_dim = hidden_dim;
  const auto h = static_cast<Eigen::Index>(hidden_dim);
  p.w1 = Eigen::MatrixXd::Zero(h, static_cast<Eigen::Index>(context_dim + 3));
  p.b1 = Eigen::VectorXd::Zero(h);
  p.w2 = Eigen::MatrixXd::Zero(2, h);
  p.b2 = Eigen::VectorXd::Zero(2);
  return p;
}

std::size_t PolicyParams::ParameterCount() const noexcept {
  return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + b2.size());
}

std::vector<double> PolicyParams::Flatten() const {
  std::vector<double> flat;
  flat.reserve(ParameterCount());
  auto push = [&flat](double v) { flat.push_back(v); };
  ForEachRowMajor(w1, push);
  for (Eigen::Index i = 0; i < b1.size(); ++i) flat.push_back(b1[i]);
  ForEachRowMajor(w2, push);
  for (Eigen::Index i = 0; i < b2.size(); ++i) flat.push_back(b2[i]);
  return flat;
}

void PolicyParams::Assign(std::span<const double> flat) {
  if (flat.size() != ParameterCount()) {
    throw DomainError("flat parameter vector has the wrong length");
  }
  std::size_t k = 0;
  auto pull = [&](double& v) { v = flat[k++]; };
  ForEachRowMajor(w1, pull);
  for (Eigen::Index i = 0; i < b1.size(); ++i) b1[i] = flat[k++];
  ForEachRowMajor(w2, pull);
  for (Eigen::Index i = 0; i < b2.size(); ++i) b2[i] = flat[k++];
}

void PolicyParams::Validate() const {
  const auto h = static_cast<Eigen::Index>(hidden_dim);
  if (context_dim == 0 || hidden_dim == 0 || w1.rows() != h ||
      w1.cols() != static_cast<Eigen::Index>(input_dim()) || b1.size() != h ||
      w2.rows() != 2 || w2.cols() != h || b2.size() != 2) {
    throw DomainError("policy parameter shapes are inconsistent");
  }
  if (!w1.allFinite() || !b1.allFinite() || !w2.allFinite() || !b2.allFinite()) {
    throw DomainError("policy parameters contain non-finite values");
  }
}

bool PolicyParams::SameShape(const PolicyParams& other) const noexcept {
  return context_dim == other.context_dim && hidden_dim == other.hidden_dim &&
         w1.rows() == other.w1.rows() && w1.cols() == other.w1.cols() &&
         b1.size() == other.b1.size() && w2.rows() == other.w2.rows() &&
         w2.cols() == other.w2.cols() && b2.size() == other.b2.size();
}

bool operator==(const PolicyParams& a, const PolicyParams& b) {
  return a.SameShape(b) && a.seed == b.seed && a.w1 == b.w1 && a.b1 == b.b1 &&
         a.w2 == b.w2 && a.b2 == b.b2;
}

double XavierBound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

PolicyParams init_params(std::size_t context_dim, std::size_t hidden_dim,
                         std::uint64_t seed) {
  if (context_dim == 0 || hidden_dim == 0) {
    throw DomainError("policy dimensions must be >= 1");
  }
  PolicyParams p = PolicyParams::Zeros(context_dim, hidden_dim);
  p.seed = seed;
  Rng rng(seed);
  auto fill = [&rng](Eigen::MatrixXd& m, double bound) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    ForEachRowMajor(m, [&](double& v) { v = dist(rng); });
  };
  fill(p.w1, XavierBound(p.input_dim(), hidden_dim));
  fill(p.w2, XavierBound(hidden_dim, 2));
  return p;
}

Waypoint step(const PolicyParams& params, std::span<const double> context,
              const Waypoint& prev_waypoint, std::size_t t_index,
              std::size_t horizon) {
  CheckStepArgs(params, context, t_index, horizon);
  const Eigen::VectorXd x = StepInput(context, prev_waypoint, t_index, horizon);
  const Eigen::VectorXd h = (params.w1 * x + params.b1).array().tanh().matrix();
  const Eigen::Vector2d mu = params.w2 * h + params.b2;
  return {mu.x(), mu.y()};
}

RolloutMode RolloutMode::Scheduled(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError("scheduled sampling probability must lie in [0, 1]");
  }
  return RolloutMode(Kind::kScheduled, p);
}

RolloutResult rollout(const PolicyParams& params, std::span<const double> context,
                      std::size_t horizon, const Trajectory* gt,
                      const RolloutMode& mode, Rng& rng) {
  if (horizon == 0) throw DomainError("rollout horizon must be >= 1");
  if (mode.needs_ground_truth()) {
    if (gt == nullptr) {
      throw DomainError("ground truth required outside free-running mode");
    }
    if (gt->size() != horizon) {
      throw DomainError("ground-truth length does not match horizon");
    }
  }
  const double p = mode.prediction_probability();
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Waypoint> pred(horizon);
  std::vector<Waypoint> inputs(horizon);
  std::vector<InputChoice> choices;
  choices.reserve(horizon > 0 ? horizon - 1 : 0);
  for (std::size_t k = 0; k < horizon; ++k) {
    if (k > 0) {
      bool use_prediction;
      if (!mode.needs_ground_truth() || p >= 1.0) {
        use_prediction = true;
      } else if (p <= 0.0) {
        use_prediction = false;
      } else {
        use_prediction = unit(rng) < p;
      }
      choices.push_back(use_prediction ? InputChoice::kUsedPrediction
                                       : InputChoice::kUsedGroundTruth);
      inputs[k] = use_prediction ? pred[k - 1] : (*gt)[k - 1];
    }
    pred[k] = step(params, context, inputs[k], k, horizon);
  }
  return {Trajectory(std::move(pred)), std::move(choices), std::move(inputs)};
}

double frozen_input_loss(const PolicyParams& params,
                         std::span<const SceneRecord* const> batch,
                         std::span<const std::vector<Waypoint>> step_inputs) {
  CheckBatch(batch);
  if (step_inputs.size() != batch.size()) {
    throw DomainError("one step-input list per batch element required");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Trajectory& gt = batch[i]->gt;
    if (step_inputs[i].size() != gt.size()) {
      throw DomainError("step-input list length does not match horizon");
    }
    for (std::size_t t = 0; t < gt.size(); ++t) {
      const Waypoint mu =
          step(params, batch[i]->context, step_inputs[i][t], t, gt.size());
      const double dx = mu.x - gt[t].x;
      const double dy = mu.y - gt[t].y;
      total += dx * dx + dy * dy;
    }
  }
  return total / static_cast<double>(batch.size());
}

BackpropResult backprop_frozen(
    const PolicyParams& params, std::span<const SceneRecord* const> batch,
    std::span<const std::vector<Waypoint>> step_inputs) {
  CheckBatch(batch);
  if (step_inputs.size() != batch.size()) {
    throw DomainError("one step-input list per batch element required");
  }
  BackpropResult result;
  result.grads = PolicyParams::Zeros(params.context_dim, params.hidden_dim);
  result.grads.seed = params.seed;
  const double scale = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;

  for (std::size_t i = 0; i < batch.size(); ++i) {
    const SceneRecord& record = *batch[i];
    const std::size_t horizon = record.gt.size();
    if (step_inputs[i].size() != horizon) {
      throw DomainError("step-input list length does not match horizon");
    }
    for (std::size_t t = 0; t < horizon; ++t) {
      CheckStepArgs(params, record.context, t, horizon);
      const Eigen::VectorXd x =
          StepInput(record.context, step_inputs[i][t], t, horizon);
      const Eigen::VectorXd h =
          (params.w1 * x + params.b1).array().tanh().matrix();
      const Eigen::Vector2d mu = params.w2 * h + params.b2;
      const Eigen::Vector2d err(mu.x() - record.gt[t].x, mu.y() - record.gt[t].y);
      total += err.squaredNorm();

      const Eigen::Vector2d g_mu = 2.0 * scale * err;
      result.grads.w2.noalias() += g_mu * h.transpose();
      result.grads.b2 += g_mu;
      const Eigen::VectorXd g_pre =
          ((params.w2.transpose() * g_mu).array() * (1.0 - h.array().square()))
              .matrix();
      result.grads.w1.noalias() += g_pre * x.transpose();
      result.grads.b1 += g_pre;
    }
  }
  result.loss = total * scale;
  return result;
}

BackpropResult backprop(const PolicyParams& params,
                        std::span<const SceneRecord* const> batch,
                        const RolloutMode& mode, Rng& rng) {
  CheckBatch(batch);
  std::vector<RolloutResult> rollouts;
  rollouts.reserve(batch.size());
  std::vector<std::vector<Waypoint>> inputs;
  inputs.reserve(batch.size());
  for (const SceneRecord* record : batch) {
    rollouts.push_back(rollout(params, record->context, record->gt.size(),
                               &record->gt, mode, rng));
    inputs.push_back(rollouts.back().step_inputs);
  }
  BackpropResult result = backprop_frozen(params, batch, inputs);
  result.rollouts = std::move(rollouts);
  return result;
}

void SaveCheckpoint(const PolicyParams& params, const std::string& path) {
  params.Validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path, 0, "cannot open for writing");
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  detail::WriteLE<std::uint32_t>(out, kCheckpointVersion);
  detail::WriteLE<std::uint32_t>(out, static_cast<std::uint32_t>(params.context_dim));
  detail::WriteLE<std::uint32_t>(out, static_cast<std::uint32_t>(params.hidden_dim));
  detail::WriteLE<std::uint64_t>(out, params.seed);
  for (double v : params.Flatten()) detail::WriteLE<double>(out, v);
  if (!out) throw DataError(path, 0, "write failed");
}

PolicyParams LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path, 0, "cannot open for reading");
  char magic[4] = {};
  if (!in.read(magic, sizeof(magic)) ||
      !std::equal(std::begin(magic), std::end(magic),
                  std::begin(kCheckpointMagic))) {
    throw DataError(path, 0, "bad magic (expected WPOL)");
  }
  std::uint32_t version = 0;
  std::uint32_t context_dim = 0;
  std::uint32_t hidden_dim = 0;
  std::uint64_t seed = 0;
  if (!detail::ReadLE(in, version) || !detail::ReadLE(in, context_dim) ||
      !detail::ReadLE(in, hidden_dim) || !detail::ReadLE(in, seed)) {
    throw DataError(path, 0, "truncated header");
  }
  if (version != kCheckpointVersion) {
    throw DataError(path, 0, "unsupported checkpoint version " +
                                 std::to_string(version));
  }
  if (context_dim == 0 || hidden_dim == 0 || context_dim > (1u << 20) ||
      hidden_dim > (1u << 20)) {
    throw DataError(path, 0, "implausible checkpoint dimensions");
  }
  PolicyParams params = PolicyParams::Zeros(context_dim, hidden_dim);
  params.seed = seed;
  std::vector<double> flat(params.ParameterCount());
  for (std::size_t i = 0; i < flat.size(); ++i) {
    if (!detail::ReadLE(in, flat[i])) {
      throw DataError(path, 0, "truncated weights at value " + std::to_string(i));
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DataError(path, 0, "trailing bytes after weights");
  }
  params.Assign(flat);
  try {
    params.Validate();
  } catch (const DomainError& e) {
    throw DataError(path, 0, e.what());
  }
  return params;
}

}  // namespace wpar

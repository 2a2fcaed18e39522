#include "waypoint_ar/training.hpp"

#include <array>
#include <cmath>
#include <tuple>

#include <gtest/gtest.h>

#include "waypoint_ar/data.hpp"
#include "waypoint_ar/errors.hpp"

namespace wpar {
namespace {

SceneRecord RecordOf(ManeuverCategory category, double scale = 1.0) {
  SceneRecord r;
  r.scene_id = "r";
  r.sample_id = "0";
  r.context = {scale, 0.0, 0.0};
  std::vector<Waypoint> w;
  for (int i = 1; i <= 10; ++i) w.push_back({scale * i, 0.0});
  r.gt = Trajectory(w);
  r.category = category;
  return r;
}

TEST(SamplingProb, DefaultScheduleRampsAndCaps) {
  const SamplingSchedule s;
  EXPECT_DOUBLE_EQ(sampling_prob(s, 0), 0.4);
  EXPECT_DOUBLE_EQ(sampling_prob(s, 1), 0.5);
  EXPECT_DOUBLE_EQ(sampling_prob(s, 2), 0.6);
  EXPECT_DOUBLE_EQ(sampling_prob(s, 29), 0.6);
  EXPECT_EQ(sampling_prob(SamplingSchedule::TeacherForcing(), 10), 0.0);
}

TEST(SamplingProb, MonotoneAndBounded) {
  const SamplingSchedule s{0.05, 0.07, 0.9};
  double prev = -1.0;
  for (std::size_t e = 0; e < 50; ++e) {
    const double p = sampling_prob(s, e);
    EXPECT_GE(p, prev);
    EXPECT_LE(p, 0.9);
    prev = p;
  }
  EXPECT_THROW(sampling_prob(SamplingSchedule{0.7, 0.1, 0.6}, 0), DomainError);
  EXPECT_THROW(sampling_prob(SamplingSchedule{0.1, -0.1, 0.6}, 0), DomainError);
  EXPECT_THROW(sampling_prob(SamplingSchedule{0.1, 0.1, 1.5}, 0), DomainError);
}

TEST(BalancedSampler, WeightsAreInverseBucketSizes) {
  std::vector<SceneRecord> data;
  for (int i = 0; i < 6; ++i) data.push_back(RecordOf(ManeuverCategory::kStraight));
  for (int i = 0; i < 2; ++i) data.push_back(RecordOf(ManeuverCategory::kTurnLeft));
  data.push_back(RecordOf(ManeuverCategory::kWaiting));
  const BalancedSampler sampler(data);
  EXPECT_DOUBLE_EQ(record_weight(sampler, data[0]), 1.0 / 6.0);
  EXPECT_DOUBLE_EQ(record_weight(sampler, data[6]), 0.5);
  EXPECT_DOUBLE_EQ(record_weight(sampler, data[8]), 1.0);
  EXPECT_EQ(sampler.nonempty().size(), 3u);
  EXPECT_THROW(record_weight(sampler, RecordOf(ManeuverCategory::kTurnRight)),
               DomainError);
  // Every nonempty category carries total weight 1.
  std::array<double, kNumManeuverCategories> mass{};
  for (const auto& r : data) mass[static_cast<std::size_t>(r.category)] += record_weight(sampler, r);
  for (auto c : sampler.nonempty()) EXPECT_NEAR(mass[static_cast<std::size_t>(c)], 1.0, 1e-12);
}

TEST(BalancedSampler, ZeroSizeRequestIsEmpty) {
  const std::vector<SceneRecord> data = {RecordOf(ManeuverCategory::kStraight)};
  const BalancedSampler sampler(data);
  Rng rng(1);
  EXPECT_TRUE(draw_batch(sampler, rng, 0).empty());
}

TEST(BalancedSampler, EmptyDatasetRejected) {
  const std::vector<SceneRecord> empty;
  const BalancedSampler sampler(empty);
  Rng rng(1);
  EXPECT_THROW(draw_batch(sampler, rng, 4), DomainError);
}

TEST(BalancedSampler, DrawsAreUniformOverCategories) {
  // Heavily imbalanced: 500 / 40 / 8 / 2.
  std::vector<SceneRecord> data;
  const std::array<std::pair<ManeuverCategory, int>, 4> sizes = {{
      {ManeuverCategory::kStraight, 500},
      {ManeuverCategory::kTurnLeft, 40},
      {ManeuverCategory::kTurnRight, 8},
      {ManeuverCategory::kWaiting, 2},
  }};
  for (auto [c, n] : sizes) {
    for (int i = 0; i < n; ++i) data.push_back(RecordOf(c));
  }
  const BalancedSampler sampler(data);
  Rng rng(2024);
  const std::size_t draws = 40000;
  std::array<double, 4> observed{};
  for (std::size_t b = 0; b < draws / 40; ++b) {
    for (const SceneRecord* r : draw_batch(sampler, rng, 40)) {
      observed[static_cast<std::size_t>(r->category)] += 1.0;
    }
  }
  const double expected = static_cast<double>(draws) / 4.0;
  double chi2 = 0.0;
  for (double o : observed) chi2 += (o - expected) * (o - expected) / expected;
  // Upper 0.1% point of chi-square with 3 degrees of freedom.
  EXPECT_LT(chi2, 16.27);
}

TEST(BalancedSampler, WithinCategoryDrawsAreUniform) {
  std::vector<SceneRecord> data;
  for (int i = 0; i < 5; ++i) data.push_back(RecordOf(ManeuverCategory::kTurnLeft));
  const BalancedSampler sampler(data);
  Rng rng(8);
  std::array<double, 5> observed{};
  const std::size_t draws = 25000;
  for (const SceneRecord* r : draw_batch(sampler, rng, draws)) {
    observed[static_cast<std::size_t>(r - data.data())] += 1.0;
  }
  double chi2 = 0.0;
  for (double o : observed) chi2 += (o - 5000.0) * (o - 5000.0) / 5000.0;
  // Upper 0.1% point with 4 degrees of freedom.
  EXPECT_LT(chi2, 18.47);
}

TEST(AdamUpdate, FirstStepMovesByLearningRateTimesSign) {
  PolicyParams params = PolicyParams::Zeros(1, 2);
  PolicyParams grads = PolicyParams::Zeros(1, 2);
  std::vector<double> g(grads.ParameterCount());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = (i % 2 == 0 ? 1.0 : -1.0) * (0.01 + 0.5 * static_cast<double>(i));
  }
  grads.Assign(g);
  const AdamConfig cfg{0.01, 0.9, 0.999, 1e-8};
  const auto [next, state] = adam_update(params, grads, AdamState{}, cfg);
  EXPECT_EQ(state.t, 1u);
  const auto flat = next.Flatten();
  for (std::size_t i = 0; i < g.size(); ++i) {
    // m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps).
    const double expected = -0.01 * g[i] / (std::abs(g[i]) + 1e-8);
    EXPECT_NEAR(flat[i], expected, 1e-15);
    EXPECT_NEAR(state.m[i], 0.1 * g[i], 1e-15);
    EXPECT_NEAR(state.v[i], 0.001 * g[i] * g[i], 1e-15);
  }
}

TEST(AdamUpdate, SecondStepUsesBiasCorrection) {
  PolicyParams params = PolicyParams::Zeros(1, 1);
  PolicyParams grads = PolicyParams::Zeros(1, 1);
  std::vector<double> g(grads.ParameterCount(), 0.0);
  g[0] = 2.0;
  grads.Assign(g);
  const AdamConfig cfg{0.1, 0.9, 0.999, 0.0};
  auto [p1, s1] = adam_update(params, grads, AdamState{}, cfg);
  g[0] = 1.0;
  grads.Assign(g);
  auto [p2, s2] = adam_update(p1, grads, s1, cfg);
  const double m = 0.9 * 0.2 + 0.1 * 1.0;
  const double v = 0.999 * 0.004 + 0.001 * 1.0;
  const double m_hat = m / (1 - 0.81);
  const double v_hat = v / (1 - 0.999 * 0.999);
  EXPECT_NEAR(p2.Flatten()[0], -0.1 - 0.1 * m_hat / std::sqrt(v_hat), 1e-12);
}

TEST(AdamUpdate, ConstantGradientStepApproachesLearningRate) {
  PolicyParams params = PolicyParams::Zeros(1, 1);
  PolicyParams grads = PolicyParams::Zeros(1, 1);
  std::vector<double> g(grads.ParameterCount(), 0.0);
  g[0] = 0.37;
  g[1] = -4.0;
  grads.Assign(g);
  const AdamConfig cfg{0.01, 0.9, 0.999, 1e-8};
  AdamState state;
  std::vector<double> before;
  for (int i = 0; i < 500; ++i) {
    before = params.Flatten();
    std::tie(params, state) = adam_update(params, grads, state, cfg);
  }
  const auto after = params.Flatten();
  EXPECT_NEAR(after[0] - before[0], -0.01, 1e-6);
  EXPECT_NEAR(after[1] - before[1], 0.01, 1e-6);
  EXPECT_EQ(after[2], 0.0);
}

TEST(AdamUpdate, ShapeMismatchRejected) {
  EXPECT_THROW(adam_update(PolicyParams::Zeros(1, 2), PolicyParams::Zeros(1, 3),
                           AdamState{}, AdamConfig{}),
               DomainError);
}

class SmallTraining : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { data_ = new Dataset(generate_synthetic(120, DefaultMix(), kStepSeconds, kDefaultHorizon, 3)); }
  static void TearDownTestSuite() { delete data_; }
  static TrainConfig Config() {
    TrainConfig c;
    c.epochs = 4;
    c.batch_size = 16;
    c.hidden_dim = 8;
    c.probe_size = 32;
    c.adam.learning_rate = 3e-3;
    return c;
  }
  static Dataset* data_;
};
Dataset* SmallTraining::data_ = nullptr;

TEST_F(SmallTraining, CurveShapeAndSchedule) {
  const TrainResult r = train(*data_, Config(), SamplingSchedule{});
  ASSERT_EQ(r.curve.size(), 4u);
  EXPECT_EQ(r.steps_per_epoch, 120u / 16u);
  for (std::size_t e = 0; e < 4; ++e) {
    EXPECT_EQ(r.curve[e].epoch, e);
    EXPECT_DOUBLE_EQ(r.curve[e].scheduled_p, std::min(0.4 + 0.1 * e, 0.6));
    EXPECT_TRUE(std::isfinite(r.curve[e].mean_loss));
  }
  EXPECT_LT(r.curve.back().probe_tf_loss, r.curve.front().probe_tf_loss);
}

TEST_F(SmallTraining, BitwiseReproducible) {
  const TrainResult a = train(*data_, Config(), SamplingSchedule{});
  const TrainResult b = train(*data_, Config(), SamplingSchedule{});
  EXPECT_EQ(a.params, b.params);
  for (std::size_t e = 0; e < a.curve.size(); ++e) {
    EXPECT_EQ(a.curve[e].mean_loss, b.curve[e].mean_loss);
  }
  TrainConfig other = Config();
  other.seed = 8;
  EXPECT_FALSE(train(*data_, other, SamplingSchedule{}).params == a.params);
}

TEST(Train, DivergenceIsReported) {
  Dataset data = {RecordOf(ManeuverCategory::kStraight, 1e200)};
  TrainConfig c;
  c.epochs = 1;
  c.batch_size = 1;
  c.hidden_dim = 2;
  EXPECT_THROW(train(data, c, SamplingSchedule{}), DivergenceError);
}

TEST(Train, RejectsEmptyOrInconsistentData) {
  TrainConfig c;
  c.epochs = 1;
  EXPECT_THROW(train({}, c, SamplingSchedule{}), DomainError);
  Dataset data = {RecordOf(ManeuverCategory::kStraight), RecordOf(ManeuverCategory::kStraight)};
  data[1].context.push_back(1.0);
  EXPECT_THROW(train(data, c, SamplingSchedule{}), DomainError);
}

TEST(TrainSetup, ParseFormatRoundTrip) {
  TrainSetup s;
  s.config.epochs = 12;
  s.config.batch_size = 4;
  s.config.adam.learning_rate = 0.003;
  s.schedule = {0.2, 0.05, 0.5};
  const TrainSetup back = ParseTrainSetup(FormatTrainSetup(s), "mem");
  EXPECT_EQ(back.config.epochs, 12u);
  EXPECT_EQ(back.config.batch_size, 4u);
  EXPECT_EQ(back.config.adam.learning_rate, 0.003);
  EXPECT_EQ(back.schedule.p_step, 0.05);
}

TEST(TrainSetup, ErrorsCarryLineNumbers) {
  try {
    ParseTrainSetup("# header\nepochs = 3\nbogus = 1\n", "cfg");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(ParseTrainSetup("epochs = many\n", "cfg"), DataError);
  EXPECT_THROW(ParseTrainSetup("epochs\n", "cfg"), DataError);
  EXPECT_THROW(ParseTrainSetup("p_start = 0.9\n", "cfg"), DataError);
}

}  // namespace
}  // namespace wpar

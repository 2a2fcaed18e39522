#include "waypoint_ar/eval.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "waypoint_ar/errors.hpp"

namespace wpar {
namespace {

Trajectory Line(double step_x, std::size_t n = 10) {
  std::vector<Waypoint> w;
  for (std::size_t i = 1; i <= n; ++i) w.push_back({step_x * static_cast<double>(i), 0.0});
  return Trajectory(w);
}

Trajectory Offset(const Trajectory& t, double dx, double dy) {
  std::vector<Waypoint> w(t.waypoints().begin(), t.waypoints().end());
  for (auto& p : w) p = {p.x + dx, p.y + dy};
  return Trajectory(w);
}

Trajectory RandomTrajectory(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 4.0);
  std::vector<Waypoint> w(10);
  for (auto& p : w) p = {n(rng), n(rng)};
  return Trajectory(w);
}

// Plain golden-section search over a wide fixed bracket; independent of the
// library's bracket choice.
double GoldenMinimize(const std::function<double(double)>& f, double lo, double hi) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < 300 && b - a > 1e-13; ++i) {
    if (fc < fd) {
      b = d, d = c, fd = fc;
      c = b - r * (b - a), fc = f(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + r * (b - a), fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

TEST(L2Metrics, ConstantOffsetEqualsOffsetEverywhere) {
  const Trajectory gt = Line(1.3);
  const Trajectory pred = Offset(gt, 0.1, 0.0);
  for (double h : kEvalHorizons) {
    EXPECT_NEAR(l2_at(pred, gt, h), 0.1, 1e-12);
    EXPECT_NEAR(l2_avg_to(pred, gt, h), 0.1, 1e-12);
  }
  EXPECT_EQ(l2_at(gt, gt, 5.0), 0.0);
}

TEST(L2Metrics, SingleErrorAtThreeSeconds) {
  const Trajectory gt = Line(1.0);
  std::vector<Waypoint> w(gt.waypoints().begin(), gt.waypoints().end());
  w[5].y += 0.6;  // sixth waypoint, t = 3 s
  const Trajectory pred(w);
  EXPECT_DOUBLE_EQ(l2_at(pred, gt, 3.0), 0.6);
  EXPECT_NEAR(l2_avg_to(pred, gt, 3.0), 0.1, 1e-15);
  EXPECT_EQ(l2_at(pred, gt, 2.5), 0.0);
}

TEST(L2Metrics, RejectsMisalignedHorizons) {
  const Trajectory gt = Line(1.0);
  EXPECT_THROW(l2_at(gt, gt, 1.25), DomainError);
  EXPECT_THROW(l2_at(gt, gt, 5.5), DomainError);
  EXPECT_THROW(l2_avg_to(gt, gt, 0.0), DomainError);
  EXPECT_THROW(l2_at(gt, Line(1.0, 9), 1.0), DomainError);
}

TEST(L2Metrics, AverageBoundedByMaxStepError) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const Trajectory a = RandomTrajectory(rng), b = RandomTrajectory(rng);
    for (double h : kEvalHorizons) {
      double worst = 0.0;
      for (std::size_t k = 1; k <= static_cast<std::size_t>(h / 0.5); ++k) {
        worst = std::max(worst, l2_at(a, b, 0.5 * static_cast<double>(k)));
      }
      EXPECT_LE(l2_avg_to(a, b, h), worst + 1e-12);
    }
  }
}

TEST(HorizonMetrics, AverageOfFirstThree) {
  const auto m = HorizonMetrics::FromHorizons({0.1, 0.2, 0.4, 0.9});
  EXPECT_EQ(m.avg_1to3, (0.1 + 0.2 + 0.4) / 3.0);
  EXPECT_EQ(m.at(3.0), 0.4);
  EXPECT_THROW(m.at(4.0), DomainError);
}

TEST(SpeedScale, ExactSpecialCases) {
  const Trajectory gt = Line(1.7);
  EXPECT_EQ(optimal_speed_scale(gt, gt), 1.0);
  EXPECT_EQ(optimal_speed_scale(Scaled(gt, 2.0), gt), 0.5);
  EXPECT_THROW(optimal_speed_scale(Trajectory::Zeros(10), gt), DomainError);
  EXPECT_THROW(optimal_speed_scale(Trajectory::Zeros(10), gt, SpeedScaleNorm::kUnsquared),
               DomainError);
}

TEST(SpeedScale, ClosedFormMatchesScalarSearch) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 300; ++i) {
    const Trajectory pred = RandomTrajectory(rng), gt = RandomTrajectory(rng);
    const double lambda = optimal_speed_scale(pred, gt);
    const double searched = GoldenMinimize(
        [&](double l) { return speed_scale_objective(pred, gt, l, SpeedScaleNorm::kSquared); },
        -100.0, 100.0);
    EXPECT_NEAR(lambda, searched, 1e-6);
  }
}

TEST(SpeedScale, UnsquaredMinimizesItsObjective) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const Trajectory gt = RandomTrajectory(rng);
    const Trajectory pred = Offset(Scaled(gt, 0.8), 0.3, -0.2);
    const double lambda = optimal_speed_scale(pred, gt, SpeedScaleNorm::kUnsquared);
    const double best = speed_scale_objective(pred, gt, lambda, SpeedScaleNorm::kUnsquared);
    for (double d : {-1e-3, 1e-3, -0.1, 0.1, -1.0, 1.0}) {
      EXPECT_LE(best, speed_scale_objective(pred, gt, lambda + d, SpeedScaleNorm::kUnsquared) +
                          1e-9);
    }
  }
}

TEST(SpeedScale, ScaleEquivariant) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Trajectory pred = RandomTrajectory(rng), gt = RandomTrajectory(rng);
    const double lambda = optimal_speed_scale(pred, gt);
    for (double c : {0.25, 3.0, 10.0}) {
      EXPECT_NEAR(optimal_speed_scale(Scaled(pred, c), gt), lambda / c,
                  1e-12 * std::max(1.0, std::abs(lambda / c)));
    }
  }
}

TEST(SpeedScale, RescaledObjectiveNeverWorse) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 200; ++i) {
    const Trajectory pred = RandomTrajectory(rng), gt = RandomTrajectory(rng);
    const double lambda = optimal_speed_scale(pred, gt);
    const double best = speed_scale_objective(pred, gt, lambda, SpeedScaleNorm::kSquared);
    for (double l : {0.5 * lambda, 2.0 * lambda, 1.0}) {
      EXPECT_LE(best, speed_scale_objective(pred, gt, l, SpeedScaleNorm::kSquared) + 1e-9);
    }
  }
}

TEST(EvaluatePredictions, OracleIsPerfect) {
  Dataset data;
  for (int i = 0; i < 5; ++i) {
    SceneRecord r;
    r.scene_id = "s" + std::to_string(i);
    r.context = {1.0};
    r.gt = Line(0.5 + i);
    data.push_back(r);
  }
  const auto report = evaluate_predictions(
      data, [](const SceneRecord& r) { return r.gt; }, {true, SpeedScaleNorm::kSquared, 1});
  EXPECT_EQ(report.record_count, 5u);
  for (double v : report.l2_max.by_horizon) EXPECT_EQ(v, 0.0);
  for (double v : report.l2_avg.by_horizon) EXPECT_EQ(v, 0.0);
  ASSERT_TRUE(report.speed);
  EXPECT_EQ(report.speed->mean_lambda, 1.0);
  EXPECT_EQ(report.speed->mean_adaptation_gap, 0.0);
}

TEST(EvaluatePredictions, SingleRecordEqualsItsMetrics) {
  SceneRecord r;
  r.context = {1.0};
  r.gt = Line(1.0);
  const Trajectory pred = Offset(Scaled(r.gt, 1.2), 0.0, 0.3);
  const Dataset data = {r};
  const auto report = evaluate_predictions(
      data, [&](const SceneRecord&) { return pred; }, {true, SpeedScaleNorm::kSquared, 1});
  const RecordMetrics m = evaluate_record(pred, r.gt, true);
  EXPECT_EQ(report.l2_max.by_horizon, m.l2_max.by_horizon);
  EXPECT_EQ(report.l2_avg.avg_1to3, m.l2_avg.avg_1to3);
  EXPECT_EQ(report.speed->mean_lambda, m.speed->lambda_star);
  EXPECT_NEAR(m.speed->adaptation_gap, std::abs(m.speed->lambda_star - 1.0), 0.0);
}

TEST(EvaluatePredictions, JobsDoNotChangeResult) {
  std::mt19937_64 rng(12);
  Dataset data;
  for (int i = 0; i < 37; ++i) {
    SceneRecord r;
    r.context = {static_cast<double>(i)};
    r.gt = RandomTrajectory(rng);
    data.push_back(r);
  }
  const Predictor pred = [](const SceneRecord& r) { return Offset(Scaled(r.gt, 0.9), 0.1, 0.0); };
  const auto one = evaluate_predictions(data, pred, {true, SpeedScaleNorm::kSquared, 1});
  const auto four = evaluate_predictions(data, pred, {true, SpeedScaleNorm::kSquared, 4});
  EXPECT_EQ(FormatEvalReport(one), FormatEvalReport(four));
  EXPECT_THROW(evaluate_predictions({}, pred), DomainError);
}

TEST(EvalReportFormat, SpeedScaleSectionOnlyWhenFlagged) {
  SceneRecord r;
  r.context = {1.0};
  r.gt = Line(1.0);
  const Dataset data = {r};
  const Predictor pred = [](const SceneRecord& x) { return Scaled(x.gt, 1.1); };
  const auto plain = evaluate_predictions(data, pred, {false, SpeedScaleNorm::kSquared, 1});
  const auto flagged = evaluate_predictions(data, pred, {true, SpeedScaleNorm::kSquared, 1});

  const auto j_plain = nlohmann::json::parse(FormatEvalReport(plain));
  const auto j_flag = nlohmann::json::parse(FormatEvalReport(flagged));
  EXPECT_FALSE(j_plain.contains("speed_scale"));
  EXPECT_TRUE(j_flag.contains("speed_scale"));
  EXPECT_EQ(FormatEvalCsv(plain).find("lambda_star"), std::string::npos);
  EXPECT_NE(FormatEvalCsv(flagged).find("lambda_star"), std::string::npos);
  EXPECT_EQ(FormatEvalCsv(plain).rfind("metric,horizon_s,value,rescaled_flag", 0), 0u);
}

}  // namespace
}  // namespace wpar

#include "waypoint_ar/loss.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "waypoint_ar/errors.hpp"

namespace wpar {
namespace {

Trajectory RandomTrajectory(std::mt19937_64& rng, std::size_t horizon) {
  std::normal_distribution<double> n(0.0, 5.0);
  std::vector<Waypoint> w(horizon);
  for (auto& p : w) p = {n(rng), n(rng)};
  return Trajectory(w);
}

TEST(L2Loss, ZeroForIdenticalTrajectories) {
  const Trajectory t({{1.0, 2.0}, {3.0, 4.0}});
  EXPECT_EQ(l2_loss(t, t), 0.0);
}

TEST(L2Loss, HandComputed) {
  const Trajectory pred({{1.0, 0.0}, {2.0, 0.0}});
  const Trajectory gt({{1.0, 1.0}, {2.0, 3.0}});
  EXPECT_DOUBLE_EQ(l2_loss(pred, gt), 10.0);
  const std::vector<double> w = {2.0, 0.5};
  EXPECT_DOUBLE_EQ(l2_loss(pred, gt, w), 6.5);
}

TEST(L2Loss, RejectsShapeMismatch) {
  const Trajectory a({{1.0, 0.0}});
  const Trajectory b({{1.0, 0.0}, {2.0, 0.0}});
  EXPECT_THROW(l2_loss(a, b), DomainError);
  const std::vector<double> w = {1.0, 1.0};
  EXPECT_THROW(l2_loss(a, a, w), DomainError);
}

TEST(GaussianNll, UnitVarianceHandValue) {
  const Trajectory pred({{0.0, 0.0}});
  const Trajectory gt({{3.0, 4.0}});
  const double expected = 0.5 * std::log(2.0 * std::numbers::pi) + 25.0 / 2.0;
  EXPECT_NEAR(gaussian_nll(pred, gt), expected, 1e-12);
}

TEST(GaussianNll, RejectsNonPositiveSigma) {
  EXPECT_THROW(GaussianNoiseModel(0.0), DomainError);
  EXPECT_THROW(GaussianNoiseModel(-1.0), DomainError);
  EXPECT_THROW(GaussianNoiseModel(NAN), DomainError);
}

TEST(GaussianNll, AffineInL2Loss) {
  std::mt19937_64 rng(5);
  for (double sigma : {0.1, 0.7, 1.0, 3.0}) {
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t horizon = 1 + trial % 12;
      const Trajectory a = RandomTrajectory(rng, horizon);
      const Trajectory b = RandomTrajectory(rng, horizon);
      const double s2 = sigma * sigma;
      const double expected = horizon * 0.5 * std::log(2.0 * std::numbers::pi * s2) +
                              l2_loss(a, b) / (2.0 * s2);
      EXPECT_NEAR(gaussian_nll(a, b, GaussianNoiseModel(sigma)), expected,
                  1e-9 * std::max(1.0, std::abs(expected)));
    }
  }
}

TEST(GaussianNll, SameMinimizerAsL2) {
  // Moving pred toward gt lowers both losses by the same ordering.
  std::mt19937_64 rng(9);
  const Trajectory gt = RandomTrajectory(rng, 10);
  for (int trial = 0; trial < 50; ++trial) {
    const Trajectory a = RandomTrajectory(rng, 10);
    const Trajectory b = RandomTrajectory(rng, 10);
    EXPECT_EQ(l2_loss(a, gt) < l2_loss(b, gt),
              gaussian_nll(a, gt, GaussianNoiseModel(0.5)) <
                  gaussian_nll(b, gt, GaussianNoiseModel(0.5)));
  }
}

TEST(DistanceLoss, SumsOverPairs) {
  const Trajectory a({{1.0, 0.0}});
  const Trajectory b({{0.0, 0.0}});
  const std::vector<std::pair<Trajectory, Trajectory>> pairs = {{a, b}, {a, a}, {b, a}};
  EXPECT_DOUBLE_EQ(distance_loss(pairs), 2.0);
}

TEST(L2LossGrad, MatchesCentralDifferences) {
  std::mt19937_64 rng(3);
  const Trajectory pred = RandomTrajectory(rng, 10);
  const Trajectory gt = RandomTrajectory(rng, 10);
  const auto grad = l2_loss_grad(pred, gt);
  const double h = 1e-5;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    for (int axis = 0; axis < 2; ++axis) {
      auto plus = std::vector<Waypoint>(pred.waypoints().begin(), pred.waypoints().end());
      auto minus = plus;
      (axis == 0 ? plus[t].x : plus[t].y) += h;
      (axis == 0 ? minus[t].x : minus[t].y) -= h;
      const double fd = (l2_loss(Trajectory(plus), gt) - l2_loss(Trajectory(minus), gt)) /
                        (2.0 * h);
      const double analytic = axis == 0 ? grad[t].x : grad[t].y;
      EXPECT_NEAR(analytic, fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

}  // namespace
}  // namespace wpar

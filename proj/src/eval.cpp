#include "waypoint_ar/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "waypoint_ar/errors.hpp"

namespace wpar {
namespace {

double Distance(const Waypoint& a, const Waypoint& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

void CheckSameLength(const Trajectory& pred, const Trajectory& gt) {
  if (pred.size() != gt.size()) {
    throw DomainError("trajectory length mismatch in evaluation");
  }
}

// Number of waypoints covering horizon_s.
std::size_t HorizonSteps(const Trajectory& gt, double horizon_s) {
  const double ratio = horizon_s / gt.dt();
  const double k = std::round(ratio);
  if (!std::isfinite(ratio) || std::abs(ratio - k) > 1e-9 || k < 1.0 ||
      k > static_cast<double>(gt.size())) {
    throw DomainError("horizon " + std::to_string(horizon_s) +
                      " s is not a whole number of steps within the trajectory");
  }
  return static_cast<std::size_t>(k);
}

HorizonMetrics Metrics(const Trajectory& pred, const Trajectory& gt, bool average) {
  std::array<double, 4> values{};
  for (std::size_t h = 0; h < kEvalHorizons.size(); ++h) {
    values[h] = average ? l2_avg_to(pred, gt, kEvalHorizons[h])
                        : l2_at(pred, gt, kEvalHorizons[h]);
  }
  return HorizonMetrics::FromHorizons(values);
}

struct HorizonAccumulator {
  std::array<double, 4> sum{};
  void Add(const HorizonMetrics& m) {
    for (std::size_t h = 0; h < sum.size(); ++h) sum[h] += m.by_horizon[h];
  }
  HorizonMetrics Mean(std::size_t n) const {
    std::array<double, 4> mean{};
    for (std::size_t h = 0; h < sum.size(); ++h) mean[h] = sum[h] / static_cast<double>(n);
    return HorizonMetrics::FromHorizons(mean);
  }
};

nlohmann::ordered_json HorizonJson(const HorizonMetrics& m) {
  nlohmann::ordered_json j;
  for (std::size_t h = 0; h < kEvalHorizons.size(); ++h) {
    j[std::to_string(static_cast<int>(kEvalHorizons[h])) + "s"] = m.by_horizon[h];
  }
  j["avg_1to3"] = m.avg_1to3;
  return j;
}

void CsvRows(std::ostringstream& out, const std::string& metric,
             const HorizonMetrics& m, int rescaled) {
  for (std::size_t h = 0; h < kEvalHorizons.size(); ++h) {
    out << metric << ',' << kEvalHorizons[h] << ',' << m.by_horizon[h] << ','
        << rescaled << '\n';
  }
  out << metric << ",avg_1to3," << m.avg_1to3 << ',' << rescaled << '\n';
}

}  // namespace

HorizonMetrics HorizonMetrics::FromHorizons(const std::array<double, 4>& values) {
  HorizonMetrics m;
  m.by_horizon = values;
  m.avg_1to3 = (values[0] + values[1] + values[2]) / 3.0;
  return m;
}

double HorizonMetrics::at(double horizon_s) const {
  for (std::size_t h = 0; h < kEvalHorizons.size(); ++h) {
    if (kEvalHorizons[h] == horizon_s) return by_horizon[h];
  }
  throw DomainError("horizon not tracked by HorizonMetrics");
}

double l2_at(const Trajectory& pred, const Trajectory& gt, double horizon_s) {
  CheckSameLength(pred, gt);
  const std::size_t k = HorizonSteps(gt, horizon_s);
  return Distance(pred[k - 1], gt[k - 1]);
}

double l2_avg_to(const Trajectory& pred, const Trajectory& gt, double horizon_s) {
  CheckSameLength(pred, gt);
  const std::size_t k = HorizonSteps(gt, horizon_s);
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += Distance(pred[i], gt[i]);
  return sum / static_cast<double>(k);
}

double speed_scale_objective(const Trajectory& pred, const Trajectory& gt,
                             double lambda, SpeedScaleNorm norm) {
  CheckSameLength(pred, gt);
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double dx = lambda * pred[i].x - gt[i].x;
    const double dy = lambda * pred[i].y - gt[i].y;
    total += norm == SpeedScaleNorm::kSquared ? dx * dx + dy * dy : std::hypot(dx, dy);
  }
  return total;
}

double optimal_speed_scale(const Trajectory& pred, const Trajectory& gt,
                           SpeedScaleNorm norm) {
  CheckSameLength(pred, gt);
  double dot = 0.0;
  double pred_sq = 0.0;
  // Unsquared terms are convex in lambda with minimizers lambda_i, so the
  // minimizer of their sum lies in [min lambda_i, max lambda_i].
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i].x * gt[i].x + pred[i].y * gt[i].y;
    const double s = pred[i].x * pred[i].x + pred[i].y * pred[i].y;
    dot += d;
    pred_sq += s;
    if (s > 0.0) {
      lo = std::min(lo, d / s);
      hi = std::max(hi, d / s);
    }
  }
  if (!(pred_sq > 0.0)) {
    throw DomainError("speed scale undefined for an all-zero prediction");
  }
  if (norm == SpeedScaleNorm::kSquared) return dot / pred_sq;

  constexpr double kInvPhi = 0.6180339887498949;
  auto f = [&](double l) { return speed_scale_objective(pred, gt, l, norm); };
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double e = a + kInvPhi * (b - a);
  double fc = f(c);
  double fe = f(e);
  for (int iter = 0; iter < 200 && (b - a) > 1e-13 * (1.0 + std::abs(a) + std::abs(b));
       ++iter) {
    if (fc < fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + kInvPhi * (b - a);
      fe = f(e);
    }
  }
  return 0.5 * (a + b);
}

Trajectory Scaled(const Trajectory& traj, double factor) {
  std::vector<Waypoint> out(traj.waypoints().begin(), traj.waypoints().end());
  for (Waypoint& w : out) {
    w.x *= factor;
    w.y *= factor;
  }
  return Trajectory(std::move(out), traj.dt());
}

RecordMetrics evaluate_record(const Trajectory& pred, const Trajectory& gt,
                              bool with_speed_scale, SpeedScaleNorm norm) {
  RecordMetrics m;
  m.l2_max = Metrics(pred, gt, false);
  m.l2_avg = Metrics(pred, gt, true);
  if (with_speed_scale) {
    SpeedScaleResult s;
    s.lambda_star = optimal_speed_scale(pred, gt, norm);
    const Trajectory rescaled = Scaled(pred, s.lambda_star);
    s.rescaled_l2_max = Metrics(rescaled, gt, false);
    s.rescaled_l2_avg = Metrics(rescaled, gt, true);
    s.adaptation_gap = std::abs(s.lambda_star - 1.0);
    m.speed = s;
  }
  return m;
}

EvalReport evaluate_predictions(std::span<const SceneRecord> dataset,
                                const Predictor& predictor,
                                const EvalOptions& options) {
  if (dataset.empty()) throw DomainError("evaluation dataset is empty");
  std::vector<std::optional<RecordMetrics>> per_record(dataset.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      per_record[i] = evaluate_record(predictor(dataset[i]), dataset[i].gt,
                                      options.with_speed_scale, options.norm);
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, dataset.size());
  if (jobs == 1) {
    work(0, dataset.size());
  } else {
    std::vector<std::exception_ptr> errors(jobs);
    {
      std::vector<std::jthread> workers;
      for (std::size_t j = 0; j < jobs; ++j) {
        const std::size_t begin = j * dataset.size() / jobs;
        const std::size_t end = (j + 1) * dataset.size() / jobs;
        workers.emplace_back([&, j, begin, end] {
          try {
            work(begin, end);
          } catch (...) {
            errors[j] = std::current_exception();
          }
        });
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  EvalReport report;
  report.record_count = dataset.size();
  report.norm = options.norm;
  HorizonAccumulator max_acc, avg_acc, rmax_acc, ravg_acc;
  SpeedScaleSummary speed;
  speed.min_lambda = std::numeric_limits<double>::infinity();
  speed.max_lambda = -std::numeric_limits<double>::infinity();
  for (const auto& m : per_record) {
    max_acc.Add(m->l2_max);
    avg_acc.Add(m->l2_avg);
    if (m->speed) {
      rmax_acc.Add(m->speed->rescaled_l2_max);
      ravg_acc.Add(m->speed->rescaled_l2_avg);
      speed.mean_lambda += m->speed->lambda_star;
      speed.mean_adaptation_gap += m->speed->adaptation_gap;
      speed.min_lambda = std::min(speed.min_lambda, m->speed->lambda_star);
      speed.max_lambda = std::max(speed.max_lambda, m->speed->lambda_star);
    }
  }
  const std::size_t n = dataset.size();
  report.l2_max = max_acc.Mean(n);
  report.l2_avg = avg_acc.Mean(n);
  if (options.with_speed_scale) {
    speed.mean_lambda /= static_cast<double>(n);
    speed.mean_adaptation_gap /= static_cast<double>(n);
    speed.rescaled_l2_max = rmax_acc.Mean(n);
    speed.rescaled_l2_avg = ravg_acc.Mean(n);
    report.speed = speed;
  }
  return report;
}

EvalReport evaluate(std::span<const SceneRecord> dataset, const PolicyParams& params,
                    const EvalOptions& options) {
  params.Validate();
  const Predictor predictor = [&params](const SceneRecord& r) {
    Rng unused(0);
    return rollout(params, r.context, r.gt.size(), nullptr,
                   RolloutMode::FreeRunning(), unused)
        .pred;
  };
  return evaluate_predictions(dataset, predictor, options);
}

std::string FormatEvalReport(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["record_count"] = report.record_count;
  j["l2_max"] = HorizonJson(report.l2_max);
  j["l2_avg"] = HorizonJson(report.l2_avg);
  if (report.speed) {
    const SpeedScaleSummary& s = *report.speed;
    nlohmann::ordered_json sj;
    sj["norm"] = report.norm == SpeedScaleNorm::kSquared ? "squared" : "unsquared";
    sj["mean_lambda_star"] = s.mean_lambda;
    sj["min_lambda_star"] = s.min_lambda;
    sj["max_lambda_star"] = s.max_lambda;
    sj["mean_adaptation_gap"] = s.mean_adaptation_gap;
    sj["rescaled_l2_max"] = HorizonJson(s.rescaled_l2_max);
    sj["rescaled_l2_avg"] = HorizonJson(s.rescaled_l2_avg);
    j["speed_scale"] = sj;
  }
  return j.dump(2) + "\n";
}

std::string FormatEvalCsv(const EvalReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "metric,horizon_s,value,rescaled_flag\n";
  CsvRows(out, "l2_max", report.l2_max, 0);
  CsvRows(out, "l2_avg", report.l2_avg, 0);
  if (report.speed) {
    CsvRows(out, "l2_max", report.speed->rescaled_l2_max, 1);
    CsvRows(out, "l2_avg", report.speed->rescaled_l2_avg, 1);
    out << "lambda_star,all," << report.speed->mean_lambda << ",1\n";
    out << "adaptation_gap,all," << report.speed->mean_adaptation_gap << ",1\n";
  }
  return out.str();
}

}  // namespace wpar

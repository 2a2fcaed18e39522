#include "waypoint_ar/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "waypoint_ar/data.hpp"
#include "waypoint_ar/errors.hpp"
#include "waypoint_ar/eval.hpp"
#include "waypoint_ar/plot.hpp"
#include "waypoint_ar/policy.hpp"
#include "waypoint_ar/projection.hpp"
#include "waypoint_ar/trajectory_text.hpp"
#include "waypoint_ar/training.hpp"

namespace wpar::cli {
namespace {

constexpr std::uint64_t kDefaultSeed = 7;
constexpr const char* kSeedEnv = "WAYPOINT_AR_SEED";

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw DataError(path, 0, "cannot open for writing");
  out << text;
  if (!out) throw DataError(path, 0, "write failed");
}

std::uint64_t ResolveSeed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv(kSeedEnv); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == nullptr || *end != '\0') {
      throw DataError(kSeedEnv, 0, "environment seed is not an unsigned integer");
    }
    return v;
  }
  return kDefaultSeed;
}

std::vector<double> ParseDoubleList(const std::string& text, const std::string& what) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != cell.size()) {
      throw DataError(what, 0, "'" + cell + "' is not a number");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> ReadLines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path, 0, "cannot open for reading");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

struct GenDataOptions {
  std::size_t scenes = 2000;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t horizon = kDefaultHorizon;
  std::string track;
  std::string scene_id = "track";
  std::string context = "0,0,0";
};

struct TrainOptions {
  std::string data;
  std::string config;
  std::string ckpt_out;
  std::string curve_out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  bool teacher_forcing = false;
};

struct EvalCliOptions {
  std::string data;
  std::string ckpt;
  bool speed_scale = false;
  bool unsquared = false;
  std::string out;
  std::string csv;
  std::size_t jobs = 1;
};

struct DepthOptions {
  std::string cloud;
  std::string camera;
  double dmax = kDefaultMaxDepth;
  std::string out;
  std::string preview;
};

struct AuditOptions {
  std::string corpus;
  std::size_t horizon = kDefaultHorizon;
  std::string out;
};

struct PlotOptions {
  std::string records;
  std::string ckpt;
  std::string curve;
  std::string report;
  std::size_t limit = 8;
  std::string out;
};

int RunGenData(const GenDataOptions& o, std::ostream& out) {
  Dataset dataset;
  if (!o.track.empty()) {
    const auto poses = ReadGlobalTrack(o.track);
    const auto stub = ParseDoubleList(o.context, "--context");
    TrackImport imported;
    try {
      imported = import_global_track(poses, stub, o.scene_id, o.horizon);
    } catch (const DomainError& e) {
      throw DataError(o.track, 0, e.what());
    }
    dataset = std::move(imported.records);
    out << "imported " << dataset.size() << " records, skipped " << imported.skipped
        << " anchors\n";
  } else {
    const auto mix = DefaultMix();
    dataset = generate_synthetic(o.scenes, mix, kStepSeconds, o.horizon, ResolveSeed(o.seed));
    out << "generated " << dataset.size() << " synthetic records\n";
  }
  save_dataset(dataset, o.out);
  return kOk;
}

int RunTrain(const TrainOptions& o, std::ostream& out) {
  const Dataset dataset = load_dataset(o.data);
  if (dataset.empty()) throw DataError(o.data, 0, "dataset is empty");
  TrainSetup setup;
  if (!o.config.empty()) setup = ReadTrainSetup(o.config);
  if (o.seed) {
    setup.config.seed = *o.seed;
  } else if (o.config.empty() || std::getenv(kSeedEnv) != nullptr) {
    setup.config.seed = ResolveSeed(std::nullopt);
  }
  if (o.epochs) setup.config.epochs = *o.epochs;
  if (o.teacher_forcing) setup.schedule = SamplingSchedule::TeacherForcing();
  try {
    setup.config.Validate();
  } catch (const DomainError& e) {
    throw DataError("--epochs", 0, e.what());
  }

  const TrainResult result = train(dataset, setup.config, setup.schedule);
  SaveCheckpoint(result.params, o.ckpt_out);
  if (!o.curve_out.empty()) WriteLossCurve(result.curve, o.curve_out);
  const EpochStats& last = result.curve.back();
  out << "trained " << result.curve.size() << " epochs x " << result.steps_per_epoch
      << " steps, seed " << setup.config.seed << ", final mean_loss " << last.mean_loss
      << ", teacher-forced probe loss " << last.probe_tf_loss << '\n';
  return kOk;
}

int RunEval(const EvalCliOptions& o, std::ostream& out) {
  const Dataset dataset = load_dataset(o.data);
  if (dataset.empty()) throw DataError(o.data, 0, "dataset is empty");
  const PolicyParams params = LoadCheckpoint(o.ckpt);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset[i].context.size() != params.context_dim) {
      throw DataError(o.data, i + 1, "record context length does not match checkpoint");
    }
  }
  EvalOptions options;
  options.with_speed_scale = o.speed_scale;
  options.norm = o.unsquared ? SpeedScaleNorm::kUnsquared : SpeedScaleNorm::kSquared;
  options.jobs = o.jobs;
  const EvalReport report = evaluate(dataset, params, options);
  const std::string text = FormatEvalReport(report);
  if (o.out.empty()) {
    out << text;
  } else {
    WriteText(o.out, text);
  }
  if (!o.csv.empty()) WriteText(o.csv, FormatEvalCsv(report));
  return kOk;
}

int RunProjectDepth(const DepthOptions& o, std::ostream& out) {
  const PointCloud cloud = ReadPointCloud(o.cloud);
  const CameraModel camera = ReadCameraModel(o.camera);
  if (!(o.dmax > 0.0)) throw DataError("--dmax", 0, "must be positive");
  const DepthMap map = build_depth_map(camera, cloud, o.dmax);
  WriteDepthMap(map, o.out);
  if (!o.preview.empty()) WriteDepthPreview(map, o.preview);
  std::size_t filled = 0;
  for (double d : map.values()) filled += d > 0.0;
  out << "depth map " << map.width() << "x" << map.height() << ", " << filled
      << " filled pixels from " << cloud.points.size() << " points\n";
  return kOk;
}

int RunParseAudit(const AuditOptions& o, std::ostream& out) {
  if (o.horizon == 0) throw DataError("--horizon", 0, "must be >= 1");
  const auto corpus = ReadLines(o.corpus);
  const std::string text = FormatAuditSummary(parse_audit(corpus, o.horizon));
  if (o.out.empty()) {
    out << text;
  } else {
    WriteText(o.out, text);
  }
  return kOk;
}

int RunPlot(const PlotOptions& o, std::ostream& out) {
  std::string svg;
  if (!o.records.empty()) {
    Dataset dataset = load_dataset(o.records);
    if (dataset.size() > o.limit) dataset.resize(o.limit);
    std::vector<Trajectory> preds;
    if (!o.ckpt.empty()) {
      const PolicyParams params = LoadCheckpoint(o.ckpt);
      for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (dataset[i].context.size() != params.context_dim) {
          throw DataError(o.records, i + 1, "record context length does not match checkpoint");
        }
        Rng unused(0);
        preds.push_back(rollout(params, dataset[i].context, dataset[i].gt.size(), nullptr,
                                RolloutMode::FreeRunning(), unused)
                            .pred);
      }
    }
    svg = RenderTrajectoriesSvg(dataset, preds);
  } else if (!o.curve.empty()) {
    svg = RenderLossCurveSvg(ReadCsv(o.curve), o.curve);
  } else {
    svg = RenderEvalCsvSvg(ReadCsv(o.report), o.report);
  }
  WriteText(o.out, svg);
  out << "wrote " << o.out << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"waypoint-ar: next-waypoint prediction toolkit", "waypoint-ar"};
  app.require_subcommand(1, 1);

  GenDataOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic dataset or import a global track");
  gen_cmd->add_option("--scenes", gen.scenes, "Number of synthetic scenes")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed, "Random seed (falls back to $WAYPOINT_AR_SEED)");
  gen_cmd->add_option("--out", gen.out, "Output dataset file")->required();
  gen_cmd->add_option("--horizon", gen.horizon, "Waypoints per trajectory")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--track", gen.track, "Import 'timestamp easting northing heading' lines instead");
  gen_cmd->add_option("--scene-id", gen.scene_id, "Scene id for imported records");
  gen_cmd->add_option("--context", gen.context, "Comma-separated context stub for imported records");

  TrainOptions tr;
  auto* train_cmd = app.add_subcommand("train", "Train the waypoint policy");
  train_cmd->add_option("--data", tr.data, "Dataset file")->required();
  train_cmd->add_option("--config", tr.config, "key = value training config");
  train_cmd->add_option("--ckpt-out", tr.ckpt_out, "Checkpoint output")->required();
  train_cmd->add_option("--curve-out", tr.curve_out, "Loss curve CSV output");
  train_cmd->add_option("--seed", tr.seed, "Overrides the config seed");
  train_cmd->add_option("--epochs", tr.epochs, "Overrides the config epochs");
  train_cmd->add_flag("--teacher-forcing", tr.teacher_forcing, "Use p = 0 for every epoch");

  EvalCliOptions ev;
  auto* eval_cmd = app.add_subcommand("eval", "Free-running evaluation of a checkpoint");
  eval_cmd->add_option("--data", ev.data, "Dataset file")->required();
  eval_cmd->add_option("--ckpt", ev.ckpt, "Checkpoint file")->required();
  eval_cmd->add_flag("--speed-scale", ev.speed_scale, "Add optimal speed-scale columns");
  eval_cmd->add_flag("--unsquared", ev.unsquared, "Solve lambda* with unsquared norms");
  eval_cmd->add_option("--out", ev.out, "Report output (default stdout)");
  eval_cmd->add_option("--csv", ev.csv, "CSV output for plotting");
  eval_cmd->add_option("--jobs", ev.jobs, "Worker threads")->check(CLI::PositiveNumber);

  DepthOptions dp;
  auto* depth_cmd = app.add_subcommand("project-depth", "Project a point cloud into a depth map");
  depth_cmd->add_option("--cloud", dp.cloud, "Point cloud text file")->required();
  depth_cmd->add_option("--camera", dp.camera, "Camera parameter file")->required();
  depth_cmd->add_option("--dmax", dp.dmax, "Maximum depth in meters");
  depth_cmd->add_option("--out", dp.out, "Depth map output (DPM1)")->required();
  depth_cmd->add_option("--preview", dp.preview, "Optional grayscale PGM preview");

  AuditOptions au;
  auto* audit_cmd = app.add_subcommand("parse-audit", "Classify trajectory text outputs");
  audit_cmd->add_option("--corpus", au.corpus, "One trajectory string per line")->required();
  audit_cmd->add_option("--horizon", au.horizon, "Expected waypoint count");
  audit_cmd->add_option("--out", au.out, "Summary output (default stdout)");

  PlotOptions pl;
  auto* plot_cmd = app.add_subcommand("plot", "Render SVG plots");
  auto* rec_opt = plot_cmd->add_option("--records", pl.records, "Dataset to overlay");
  plot_cmd->add_option("--ckpt", pl.ckpt, "Checkpoint for predicted overlays")->needs(rec_opt);
  auto* curve_opt = plot_cmd->add_option("--curve", pl.curve, "Loss curve CSV");
  auto* report_opt = plot_cmd->add_option("--report", pl.report, "Eval CSV");
  plot_cmd->add_option("--limit", pl.limit, "Maximum records to overlay");
  plot_cmd->add_option("--out", pl.out, "SVG output")->required();
  rec_opt->excludes(curve_opt)->excludes(report_opt);
  curve_opt->excludes(report_opt);
  plot_cmd->require_option(1, 0);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  }
  if (plot_cmd->parsed() && pl.records.empty() && pl.curve.empty() && pl.report.empty()) {
    err << "usage error: plot needs one of --records, --curve, --report\n";
    return kUsageError;
  }

  try {
    if (gen_cmd->parsed()) return RunGenData(gen, out);
    if (train_cmd->parsed()) return RunTrain(tr, out);
    if (eval_cmd->parsed()) return RunEval(ev, out);
    if (depth_cmd->parsed()) return RunProjectDepth(dp, out);
    if (audit_cmd->parsed()) return RunParseAudit(au, out);
    if (plot_cmd->parsed()) return RunPlot(pl, out);
  } catch (const DivergenceError& e) {
    err << "training diverged: " << e.what() << '\n';
    return kDivergence;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const DomainError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  }
  err << "usage error: no command\n";
  return kUsageError;
}

}  // namespace wpar::cli

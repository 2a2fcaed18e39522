#include "waypoint_ar/projection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/LU>

#include "binary_io.hpp"
#include "waypoint_ar/errors.hpp"

namespace wpar {
namespace {

constexpr char kDepthMagic[4] = {'D', 'P', 'M', '1'};

void CheckMaxDepth(double d_max) {
  if (!(d_max > 0.0) || !std::isfinite(d_max)) {
    throw DomainError("d_max must be positive and finite");
  }
}

// Strips comments and surrounding blanks; returns false for an empty line.
bool CleanLine(std::string& line) {
  if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
  auto first = line.find_first_not_of(" \t\r");
  if (first == std::string::npos) return false;
  line = line.substr(first);
  return true;
}

template <std::size_t N>
std::array<double, N> ParseNumbers(const std::string& line,
                                   const std::string& path, std::size_t lineno) {
  std::istringstream in(line);
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!(in >> out[i]) || !std::isfinite(out[i])) {
      throw DataError(path, lineno,
                      "expected " + std::to_string(N) + " finite numbers");
    }
  }
  std::string rest;
  if (in >> rest) {
    throw DataError(path, lineno, "unexpected trailing text '" + rest + "'");
  }
  return out;
}

}  // namespace

void CameraModel::Validate() const {
  if (width == 0 || height == 0) {
    throw DomainError("camera image must be at least 1x1");
  }
  if (!extrinsic.allFinite() || !intrinsic.allFinite()) {
    throw DomainError("camera matrices must be finite");
  }
  const Eigen::RowVector4d bottom = extrinsic.row(3);
  if ((bottom - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-9) {
    throw DomainError("extrinsic bottom row must be (0, 0, 0, 1)");
  }
  const Eigen::Matrix3d rot = extrinsic.topLeftCorner<3, 3>();
  if ((rot.transpose() * rot - Eigen::Matrix3d::Identity())
              .cwiseAbs()
              .maxCoeff() > 1e-9 ||
      std::abs(rot.determinant() - 1.0) > 1e-9) {
    throw DomainError("extrinsic rotation must be orthonormal with det +1");
  }
}

IntrinsicMatrix PinholeIntrinsics(double fx, double fy, double cx, double cy) {
  IntrinsicMatrix k = IntrinsicMatrix::Zero();
  k(0, 0) = fx;
  k(0, 2) = cx;
  k(1, 1) = fy;
  k(1, 2) = cy;
  k(2, 2) = 1.0;
  return k;
}

std::optional<PixelDepth> project_point(const CameraModel& camera,
                                        const Eigen::Vector3d& point) {
  const Eigen::Vector4d homogeneous(point.x(), point.y(), point.z(), 1.0);
  const Eigen::Vector3d projected =
      camera.intrinsic * (camera.extrinsic * homogeneous);
  if (!(projected.z() > kNearPlane)) return std::nullopt;
  const double u = std::round(projected.x() / projected.z());
  const double v = std::round(projected.y() / projected.z());
  if (!(u >= 0.0 && u < static_cast<double>(camera.width) && v >= 0.0 &&
        v < static_cast<double>(camera.height))) {
    return std::nullopt;
  }
  return PixelDepth{static_cast<std::uint32_t>(u),
                    static_cast<std::uint32_t>(v), point.norm()};
}

DepthMap::DepthMap(std::uint32_t width, std::uint32_t height, double d_max)
    : width_(width),
      height_(height),
      d_max_(d_max),
      values_(static_cast<std::size_t>(width) * height, 0.0) {
  CheckMaxDepth(d_max);
}

DepthMap::DepthMap(std::uint32_t width, std::uint32_t height, double d_max,
                   std::vector<double> values)
    : width_(width), height_(height), d_max_(d_max), values_(std::move(values)) {
  CheckMaxDepth(d_max);
  if (values_.size() != static_cast<std::size_t>(width) * height) {
    throw DomainError("depth map value count does not match width*height");
  }
  for (double d : values_) {
    if (!(d == 0.0 || (d > 0.0 && d <= d_max))) {
      throw DomainError("depth value outside {0} U (0, d_max]");
    }
  }
}

DepthMap build_depth_map(const CameraModel& camera, const PointCloud& cloud,
                         double d_max) {
  camera.Validate();
  DepthMap map(camera.width, camera.height, d_max);
  for (const Eigen::Vector3d& p : cloud.points) {
    const auto hit = project_point(camera, p);
    if (!hit || !(hit->depth > 0.0)) continue;
    double& cell = map.at(hit->u, hit->v);
    if (cell == 0.0) {
      cell = std::min(hit->depth, d_max);
    } else {
      cell = std::min({cell, hit->depth, d_max});
    }
  }
  return map;
}

DepthMap depth_map_oracle(const CameraModel& camera, const PointCloud& cloud,
                          double d_max) {
  camera.Validate();
  CheckMaxDepth(d_max);
  // Projections are computed once; the per-pixel scan still visits every
  // point for every pixel.
  const std::size_t n = cloud.points.size();
  std::vector<std::int64_t> us(n, -1);
  std::vector<std::int64_t> vs(n, -1);
  std::vector<double> ds(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (const auto hit = project_point(camera, cloud.points[i])) {
      us[i] = hit->u;
      vs[i] = hit->v;
      ds[i] = hit->depth;
    }
  }
  std::vector<double> values(static_cast<std::size_t>(camera.width) *
                             camera.height);
  for (std::uint32_t v = 0; v < camera.height; ++v) {
    for (std::uint32_t u = 0; u < camera.width; ++u) {
      double nearest = std::numeric_limits<double>::infinity();
      bool any = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (us[i] == u && vs[i] == v && ds[i] > 0.0) {
          any = true;
          nearest = std::min(nearest, ds[i]);
        }
      }
      values[static_cast<std::size_t>(v) * camera.width + u] =
          any ? std::min(nearest, d_max) : 0.0;
    }
  }
  return DepthMap(camera.width, camera.height, d_max, std::move(values));
}

std::vector<double> normalize_depth(const DepthMap& map) {
  std::vector<double> out(map.values().begin(), map.values().end());
  for (double& d : out) d /= map.d_max();
  return out;
}

void WriteDepthMap(const DepthMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path, 0, "cannot open for writing");
  out.write(kDepthMagic, sizeof(kDepthMagic));
  detail::WriteLE<std::uint32_t>(out, map.width());
  detail::WriteLE<std::uint32_t>(out, map.height());
  detail::WriteLE<float>(out, static_cast<float>(map.d_max()));
  for (double d : map.values()) detail::WriteLE<float>(out, static_cast<float>(d));
  if (!out) throw DataError(path, 0, "write failed");
}

DepthMap ReadDepthMap(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path, 0, "cannot open for reading");
  char magic[4] = {};
  if (!in.read(magic, sizeof(magic)) ||
      !std::equal(std::begin(magic), std::end(magic), std::begin(kDepthMagic))) {
    throw DataError(path, 0, "bad magic (expected DPM1)");
  }
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  float d_max = 0.0f;
  if (!detail::ReadLE(in, width) || !detail::ReadLE(in, height) ||
      !detail::ReadLE(in, d_max)) {
    throw DataError(path, 0, "truncated header");
  }
  std::vector<double> values(static_cast<std::size_t>(width) * height);
  for (std::size_t i = 0; i < values.size(); ++i) {
    float d = 0.0f;
    if (!detail::ReadLE(in, d)) {
      throw DataError(path, 0, "truncated body at value " + std::to_string(i));
    }
    values[i] = d;
  }
  try {
    return DepthMap(width, height, d_max, std::move(values));
  } catch (const DomainError& e) {
    throw DataError(path, 0, e.what());
  }
}

PointCloud ReadPointCloud(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path, 0, "cannot open for reading");
  PointCloud cloud;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!CleanLine(line)) continue;
    const auto xyz = ParseNumbers<3>(line, path, lineno);
    cloud.points.emplace_back(xyz[0], xyz[1], xyz[2]);
  }
  return cloud;
}

void WritePointCloud(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(path, 0, "cannot open for writing");
  out.precision(17);
  for (const auto& p : cloud.points) {
    out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  }
}

CameraModel ReadCameraModel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path, 0, "cannot open for reading");
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (CleanLine(line)) lines.emplace_back(lineno, line);
  }
  if (lines.size() != 6) {
    throw DataError(path, lineno,
                    "expected 6 non-empty lines (size, intrinsics, 4x4 "
                    "extrinsic), found " + std::to_string(lines.size()));
  }
  CameraModel camera;
  const auto size = ParseNumbers<2>(lines[0].second, path, lines[0].first);
  if (size[0] < 1 || size[1] < 1 || size[0] != std::floor(size[0]) ||
      size[1] != std::floor(size[1]) || size[0] > 1e6 || size[1] > 1e6) {
    throw DataError(path, lines[0].first, "width/height must be integers >= 1");
  }
  camera.width = static_cast<std::uint32_t>(size[0]);
  camera.height = static_cast<std::uint32_t>(size[1]);
  const auto k = ParseNumbers<4>(lines[1].second, path, lines[1].first);
  camera.intrinsic = PinholeIntrinsics(k[0], k[1], k[2], k[3]);
  for (int r = 0; r < 4; ++r) {
    const auto row = ParseNumbers<4>(lines[2 + r].second, path, lines[2 + r].first);
    for (int c = 0; c < 4; ++c) camera.extrinsic(r, c) = row[c];
  }
  try {
    camera.Validate();
  } catch (const DomainError& e) {
    throw DataError(path, 0, e.what());
  }
  return camera;
}

void WriteCameraModel(const CameraModel& camera, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(path, 0, "cannot open for writing");
  out.precision(17);
  out << camera.width << ' ' << camera.height << '\n';
  out << camera.intrinsic(0, 0) << ' ' << camera.intrinsic(1, 1) << ' '
      << camera.intrinsic(0, 2) << ' ' << camera.intrinsic(1, 2) << '\n';
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      out << camera.extrinsic(r, c) << (c == 3 ? '\n' : ' ');
    }
  }
}

void WriteDepthPreview(const DepthMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path, 0, "cannot open for writing");
  out << "P5\n" << map.width() << ' ' << map.height() << "\n255\n";
  for (double n : normalize_depth(map)) {
    // Near points bright, empty pixels black.
    const int level = n == 0.0 ? 0 : static_cast<int>(std::lround(255.0 * (1.0 - n) * 0.9 + 25.0));
    out.put(static_cast<char>(std::clamp(level, 0, 255)));
  }
}

}  // namespace wpar

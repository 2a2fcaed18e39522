#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace wpar {

inline constexpr double kDefaultMaxDepth = 80.0;
// Projected points with camera-frame z at or below this are discarded before
// the perspective division.
inline constexpr double kNearPlane = 1e-3;

struct PointCloud {
  std::vector<Eigen::Vector3d> points;
};

using IntrinsicMatrix = Eigen::Matrix<double, 3, 4>;

// Pinhole camera: `extrinsic` maps sensor-frame homogeneous points into the
// camera frame, `intrinsic` projects camera-frame points to the image plane.
struct CameraModel {
  Eigen::Matrix4d extrinsic = Eigen::Matrix4d::Identity();
  IntrinsicMatrix intrinsic = IntrinsicMatrix::Zero();
  std::uint32_t width = 1;
  std::uint32_t height = 1;

  // Throws DomainError unless the extrinsic is a proper rigid transform and
  // the image is non-empty.
  void Validate() const;
};

// [fx 0 cx 0; 0 fy cy 0; 0 0 1 0]
IntrinsicMatrix PinholeIntrinsics(double fx, double fy, double cx, double cy);

struct PixelDepth {
  std::uint32_t u = 0;
  std::uint32_t v = 0;
  double depth = 0.0;  // distance from the sensor origin, meters

  friend bool operator==(const PixelDepth&, const PixelDepth&) = default;
};

// Projects one sensor-frame point. Absent when the point is behind the near
// plane or lands outside the image after rounding to the nearest pixel.
std::optional<PixelDepth> project_point(const CameraModel& camera,
                                        const Eigen::Vector3d& point);

// Row-major grid of metric depths; 0 marks an empty pixel.
class DepthMap {
 public:
  DepthMap(std::uint32_t width, std::uint32_t height, double d_max);
  // Throws DomainError if a value falls outside {0} U (0, d_max].
  DepthMap(std::uint32_t width, std::uint32_t height, double d_max,
           std::vector<double> values);

  std::uint32_t width() const noexcept { return width_; }
  std::uint32_t height() const noexcept { return height_; }
  double d_max() const noexcept { return d_max_; }

  double at(std::uint32_t u, std::uint32_t v) const {
    return values_[static_cast<std::size_t>(v) * width_ + u];
  }
  double& at(std::uint32_t u, std::uint32_t v) {
    return values_[static_cast<std::size_t>(v) * width_ + u];
  }
  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const DepthMap&, const DepthMap&) = default;

 private:
  std::uint32_t width_;
  std::uint32_t height_;
  double d_max_;
  std::vector<double> values_;
};

// Single pass over the cloud keeping the nearest clamped depth per pixel.
// Points at the sensor origin (depth 0) are indistinguishable from "empty"
// and are skipped.
DepthMap build_depth_map(const CameraModel& camera, const PointCloud& cloud,
                         double d_max = kDefaultMaxDepth);

// Reference implementation: for every pixel, scans the whole cloud.
DepthMap depth_map_oracle(const CameraModel& camera, const PointCloud& cloud,
                          double d_max = kDefaultMaxDepth);

// Values divided by d_max, row-major, same shape as the map.
std::vector<double> normalize_depth(const DepthMap& map);

// A depth map paired with the image it belongs to; pixels are never fused.
struct RgbdSample {
  std::string image_id;
  DepthMap depth;
};

// --- file formats ---------------------------------------------------------

// "DPM1", u32 width, u32 height, f32 d_max, height*width f32 (row 0 = top),
// all little-endian.
void WriteDepthMap(const DepthMap& map, const std::string& path);
DepthMap ReadDepthMap(const std::string& path);

// One "x y z" triple per line; blank lines and '#' comments are ignored.
PointCloud ReadPointCloud(const std::string& path);
void WritePointCloud(const PointCloud& cloud, const std::string& path);

// Line 1 "width height", line 2 "fx fy cx cy", lines 3-6 the 4x4 extrinsic.
CameraModel ReadCameraModel(const std::string& path);
void WriteCameraModel(const CameraModel& camera, const std::string& path);

// Binary PGM (P5), 8-bit, normalized depth mapped to 0..255.
void WriteDepthPreview(const DepthMap& map, const std::string& path);

}  // namespace wpar

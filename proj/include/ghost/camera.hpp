#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ghost/error.hpp"

namespace ghost {

// COLMAP camera model ids. Values are the on-disk ids of the binary format.
enum class CameraModel : int {
  kUnknown = -1,
  kSimplePinhole = 0,
  kPinhole = 1,
  kSimpleRadial = 2,
  kRadial = 3,
  kOpenCV = 4,
  kOpenCVFisheye = 5,
  kFullOpenCV = 6,
  kFOV = 7,
  kSimpleRadialFisheye = 8,
  kRadialFisheye = 9,
  kThinPrismFisheye = 10,
  kRadTanThinPrismFisheye = 11,
};

namespace detail {

struct CameraModelInfo {
  CameraModel model;
  std::string_view name;
  std::size_t num_params;
};

inline constexpr std::array<CameraModelInfo, 12> kCameraModels{{
    {CameraModel::kSimplePinhole, "SIMPLE_PINHOLE", 3},
    {CameraModel::kPinhole, "PINHOLE", 4},
    {CameraModel::kSimpleRadial, "SIMPLE_RADIAL", 4},
    {CameraModel::kRadial, "RADIAL", 5},
    {CameraModel::kOpenCV, "OPENCV", 8},
    {CameraModel::kOpenCVFisheye, "OPENCV_FISHEYE", 8},
    {CameraModel::kFullOpenCV, "FULL_OPENCV", 12},
    {CameraModel::kFOV, "FOV", 5},
    {CameraModel::kSimpleRadialFisheye, "SIMPLE_RADIAL_FISHEYE", 4},
    {CameraModel::kRadialFisheye, "RADIAL_FISHEYE", 5},
    {CameraModel::kThinPrismFisheye, "THIN_PRISM_FISHEYE", 12},
    {CameraModel::kRadTanThinPrismFisheye, "RAD_TAN_THIN_PRISM_FISHEYE", 16},
}};

}  // namespace detail

inline std::optional<CameraModel> camera_model_from_id(int id) {
  for (const auto& info : detail::kCameraModels) {
    if (static_cast<int>(info.model) == id) return info.model;
  }
  return std::nullopt;
}

inline CameraModel camera_model_from_name(std::string_view name) {
  for (const auto& info : detail::kCameraModels) {
    if (info.name == name) return info.model;
  }
  return CameraModel::kUnknown;
}

inline std::string_view camera_model_name(CameraModel model) {
  for (const auto& info : detail::kCameraModels) {
    if (info.model == model) return info.name;
  }
  return "UNKNOWN";
}

// Number of parameters of a known model, nullopt for kUnknown.
inline std::optional<std::size_t> camera_model_num_params(CameraModel model) {
  for (const auto& info : detail::kCameraModels) {
    if (info.model == model) return info.num_params;
  }
  return std::nullopt;
}

struct CameraIntrinsics {
  std::uint32_t camera_id = 0;
  CameraModel model = CameraModel::kSimpleRadialFisheye;
  // Original model name; only differs from camera_model_name(model) for
  // models this library does not know (text files only).
  std::string model_name;
  std::uint64_t width = 0;
  std::uint64_t height = 0;
  std::vector<double> params;

  std::string name() const {
    return model == CameraModel::kUnknown ? model_name
                                          : std::string(camera_model_name(model));
  }

  bool operator==(const CameraIntrinsics& other) const {
    return camera_id == other.camera_id && model == other.model &&
           name() == other.name() && width == other.width &&
           height == other.height && params == other.params;
  }

  // SimpleRadialFisheye accessors: f, cx, cy, k.
  double focal() const { return params.at(0); }
  double cx() const { return params.at(1); }
  double cy() const { return params.at(2); }
  double k() const { return params.at(3); }
};

inline CameraIntrinsics make_simple_radial_fisheye(std::uint32_t camera_id,
                                                   std::uint64_t width,
                                                   std::uint64_t height,
                                                   double f, double cx,
                                                   double cy, double k) {
  CameraIntrinsics cam;
  cam.camera_id = camera_id;
  cam.model = CameraModel::kSimpleRadialFisheye;
  cam.model_name = std::string(camera_model_name(cam.model));
  cam.width = width;
  cam.height = height;
  cam.params = {f, cx, cy, k};
  return cam;
}

// Throws InvariantError unless the camera has positive size, the documented
// parameter count for its model and (for models with a leading focal
// parameter) f > 0.
inline void validate_camera(const CameraIntrinsics& cam) {
  const std::string who = "camera " + std::to_string(cam.camera_id) + ": ";
  if (cam.width == 0 || cam.height == 0) {
    throw InvariantError(who + "width and height must be positive");
  }
  if (const auto arity = camera_model_num_params(cam.model)) {
    if (cam.params.size() != *arity) {
      throw InvariantError(who + cam.name() + " expects " +
                           std::to_string(*arity) + " params, got " +
                           std::to_string(cam.params.size()));
    }
    if (!(cam.params[0] > 0.0)) {
      throw InvariantError(who + "focal length must be positive");
    }
  }
}

}  // namespace ghost

#pragma once

// Ego-trajectory ribbon masks and null-frame quality control.

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "ghost/colmap_model.hpp"
#include "ghost/geometry.hpp"
#include "ghost/grid.hpp"
#include "ghost/image_io.hpp"
#include "ghost/parallel.hpp"
#include "ghost/raster.hpp"

namespace ghost {

enum class DownAxisMode {
  kPerFrame,     // each future frame's own +y axis
  kAnchorFrame,  // the labeling frame's +y axis for every vertex
};

struct GroundPolyline {
  std::vector<Vec3> vertices;  // world frame
  std::vector<std::uint32_t> source_frames;

  std::size_t size() const { return vertices.size(); }
};

// Ground footprint of the camera path over the frames following `frame_id`:
// every registered frame j whose timeline index lies in (i, i + horizon]
// contributes c_j + h_cam * d_j, d_j being the world-frame down axis.
inline GroundPolyline ground_trajectory(const SparseReconstruction& recon,
                                        const Timeline& timeline,
                                        std::uint32_t frame_id, double h_cam,
                                        int horizon_frames = 50,
                                        DownAxisMode mode = DownAxisMode::kPerFrame) {
  if (!(h_cam > 0.0)) throw InvariantError("ground_trajectory: h_cam must be > 0");
  const auto pos = timeline.position(frame_id);
  const auto anchor_index = timeline.index_at(pos);
  const Vec3 anchor_down =
      CameraTransform(recon.frame(frame_id).pose).down_axis();
  GroundPolyline poly;
  for (auto p = pos + 1; p < timeline.size(); ++p) {
    if (timeline.index_at(p) - anchor_index > horizon_frames) break;
    const auto id = timeline.order()[p];
    const CameraTransform xf(recon.frame(id).pose);
    const Vec3 down = mode == DownAxisMode::kPerFrame ? xf.down_axis() : anchor_down;
    poly.vertices.push_back(xf.center() + h_cam * down);
    poly.source_frames.push_back(id);
  }
  return poly;
}

inline GroundPolyline ground_trajectory(const SparseReconstruction& recon,
                                        std::uint32_t frame_id, double h_cam,
                                        int horizon_frames = 50,
                                        DownAxisMode mode = DownAxisMode::kPerFrame) {
  return ground_trajectory(recon, Timeline(recon), frame_id, h_cam,
                           horizon_frames, mode);
}

struct RibbonOptions {
  double max_field_angle_deg = kDefaultMaxFieldAngleDeg;
  // Segments with an unprojectable corner are halved up to this depth.
  int max_subdivision = 4;
  // Fisheye projection bends ground lines, so each visible quad is cut into
  // a grid whose cells span at most this many pixels along either side.
  double max_cell_px = 8.0;
  int max_cells = 64;  // per side, per quad
};

using ImageQuad = std::array<PixelPoint, 4>;

namespace detail {

// Visible pieces of one ribbon segment as (a, b) sub-segments; a piece with
// an unprojectable corner is halved until max_subdivision.
inline void visible_pieces(const Vec3& a, const Vec3& b, const Vec3& offset,
                           const CameraTransform& xf, const CameraIntrinsics& cam,
                           const RibbonOptions& opts, int level,
                           std::vector<std::pair<Vec3, Vec3>>& out) {
  bool visible = true;
  for (const Vec3& c : {Vec3(a + offset), Vec3(b + offset), Vec3(b - offset), Vec3(a - offset)}) {
    if (!project_fisheye(cam, xf.to_camera(c), opts.max_field_angle_deg)) {
      visible = false;
      break;
    }
  }
  if (visible) {
    out.emplace_back(a, b);
    return;
  }
  if (level >= opts.max_subdivision) return;
  const Vec3 mid = 0.5 * (a + b);
  visible_pieces(a, mid, offset, xf, cam, opts, level + 1, out);
  visible_pieces(mid, b, offset, xf, cam, opts, level + 1, out);
}

inline double pixel_distance(const PixelPoint& p, const PixelPoint& q) {
  return std::hypot(p.u - q.u, p.v - q.v);
}

// Cell counts needed along the segment and across it for `piece`.
inline std::pair<int, int> grid_size(const std::pair<Vec3, Vec3>& piece,
                                     const Vec3& offset, const CameraTransform& xf,
                                     const CameraIntrinsics& cam,
                                     const RibbonOptions& opts) {
  const auto& [a, b] = piece;
  auto px = [&](const Vec3& p) {
    return *project_fisheye(cam, xf.to_camera(p), opts.max_field_angle_deg);
  };
  const PixelPoint al = px(a + offset), bl = px(b + offset), br = px(b - offset),
                   ar = px(a - offset);
  auto cells = [&](double len) {
    if (!(opts.max_cell_px > 0.0)) return 1;
    return std::clamp(static_cast<int>(std::ceil(len / opts.max_cell_px)), 1,
                      std::max(opts.max_cells, 1));
  };
  return {cells(std::max(pixel_distance(al, bl), pixel_distance(ar, br))),
          cells(std::max(pixel_distance(al, ar), pixel_distance(bl, br)))};
}

}  // namespace detail

// Image-space quads of the ribbon of half-width width_ground / 2 around the
// polyline, as seen from `pose`. The lateral direction of each segment is
// segment x up, with up the labeling camera's -y axis in world coordinates.
inline std::vector<ImageQuad> ribbon_quads(const GroundPolyline& poly,
                                           double width_ground,
                                           const RigidPose& pose,
                                           const CameraIntrinsics& cam,
                                           const RibbonOptions& opts = {}) {
  std::vector<ImageQuad> quads;
  if (poly.size() < 2) return quads;
  if (!(width_ground > 0.0)) throw InvariantError("ribbon width must be > 0");
  const CameraTransform xf(pose);
  const Vec3 up = xf.up_axis();
  struct Piece {
    Vec3 a, b, offset;
    int n_along;
  };
  std::vector<Piece> pieces;
  int n_across = 1;
  for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
    const Vec3& a = poly.vertices[i];
    const Vec3& b = poly.vertices[i + 1];
    const Vec3 lateral = (b - a).cross(up);
    const double len = lateral.norm();
    if (!(len > 0.0) || !std::isfinite(len)) continue;  // degenerate segment
    const Vec3 offset = lateral * (0.5 * width_ground / len);
    std::vector<std::pair<Vec3, Vec3>> visible;
    detail::visible_pieces(a, b, offset, xf, cam, opts, 0, visible);
    for (const auto& piece : visible) {
      const auto [along, across] = detail::grid_size(piece, offset, xf, cam, opts);
      pieces.push_back({piece.first, piece.second, offset, along});
      n_across = std::max(n_across, across);
    }
  }
  // One lateral cell count for the whole ribbon keeps the cut lines of
  // neighbouring segments aligned.
  for (const auto& p : pieces) {
    std::vector<std::vector<PixelPoint>> grid(static_cast<std::size_t>(p.n_along) + 1);
    for (int i = 0; i <= p.n_along; ++i) {
      const Vec3 c = p.a + (static_cast<double>(i) / p.n_along) * (p.b - p.a);
      auto& row = grid[static_cast<std::size_t>(i)];
      for (int j = 0; j <= n_across; ++j) {
        const double t = 2.0 * static_cast<double>(j) / n_across - 1.0;
        const auto px =
            project_fisheye(cam, xf.to_camera(c + t * p.offset), opts.max_field_angle_deg);
        row.push_back(px.value_or(PixelPoint{}));
      }
    }
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      for (std::size_t j = 0; j + 1 < grid[i].size(); ++j) {
        quads.push_back({grid[i][j], grid[i + 1][j], grid[i + 1][j + 1], grid[i][j + 1]});
      }
    }
  }
  return quads;
}

inline void rasterize_ribbon_into(TrajectoryMask& mask,
                                  const GroundPolyline& poly,
                                  double width_ground, const RigidPose& pose,
                                  const CameraIntrinsics& cam,
                                  const RibbonOptions& opts = {}) {
  for (const auto& quad : ribbon_quads(poly, width_ground, pose, cam, opts)) {
    fill_polygon<float>(quad, mask, 1.0f);
  }
}

inline TrajectoryMask rasterize_ribbon(const GroundPolyline& poly,
                                       double width_ground,
                                       const RigidPose& pose,
                                       const CameraIntrinsics& cam,
                                       const RibbonOptions& opts = {}) {
  TrajectoryMask mask(static_cast<int>(cam.width), static_cast<int>(cam.height));
  rasterize_ribbon_into(mask, poly, width_ground, pose, cam, opts);
  return mask;
}

enum class FrameStatus { kValid, kStationary, kNull };

inline const char* to_string(FrameStatus s) {
  switch (s) {
    case FrameStatus::kValid: return "valid";
    case FrameStatus::kStationary: return "stationary";
    case FrameStatus::kNull: return "null";
  }
  return "?";
}

enum class StatusReason {
  kMasked,            // valid: nonempty mask
  kNoSuccessor,       // last registered frame
  kBelowThreshold,    // displacement <= threshold
  kTruncatedHorizon,  // the sequence ends inside the horizon window
  kTooFewVertices,    // null: fewer than two ground vertices
  kEmptyMask,         // null: ribbon projects to no pixel
};

inline const char* to_string(StatusReason r) {
  switch (r) {
    case StatusReason::kMasked: return "masked";
    case StatusReason::kNoSuccessor: return "no_successor";
    case StatusReason::kBelowThreshold: return "below_threshold";
    case StatusReason::kTruncatedHorizon: return "truncated_horizon";
    case StatusReason::kTooFewVertices: return "too_few_vertices";
    case StatusReason::kEmptyMask: return "empty_mask";
  }
  return "?";
}

struct LabelOptions {
  int horizon_frames = 50;
  double width_factor = 1.5;
  double null_displacement_threshold = 1e-4;
  DownAxisMode down_axis = DownAxisMode::kPerFrame;
  RibbonOptions ribbon;
};

struct FrameLabel {
  std::uint32_t frame_id = 0;
  FrameStatus status = FrameStatus::kStationary;
  StatusReason reason = StatusReason::kNoSuccessor;
  double displacement = 0.0;
  std::size_t n_vertices = 0;
  std::optional<TrajectoryMask> mask;  // present iff status == kValid
};

// Displacement is measured to the next registered frame. A frame is
// Stationary when it has no successor, moves at most the threshold, or sits
// so close to the end of the sequence that its horizon window runs past the
// last frame. A moving frame is Null when its polyline has fewer than two
// vertices or its mask is empty, otherwise Valid.
inline FrameLabel classify_frame(const SparseReconstruction& recon,
                                 const Timeline& timeline,
                                 std::uint32_t frame_id, std::size_t n_vertices,
                                 std::optional<TrajectoryMask> mask,
                                 const LabelOptions& opts = {}) {
  FrameLabel label;
  label.frame_id = frame_id;
  label.n_vertices = n_vertices;
  const auto pos = timeline.position(frame_id);
  if (pos + 1 >= timeline.size()) {
    label.status = FrameStatus::kStationary;
    label.reason = StatusReason::kNoSuccessor;
    return label;
  }
  const auto next = timeline.order()[pos + 1];
  label.displacement = (camera_center(recon.frame(next).pose) -
                        camera_center(recon.frame(frame_id).pose))
                           .norm();
  if (label.displacement <= opts.null_displacement_threshold) {
    label.status = FrameStatus::kStationary;
    label.reason = StatusReason::kBelowThreshold;
    return label;
  }
  if (timeline.index_at(pos) + opts.horizon_frames > timeline.last_index()) {
    label.status = FrameStatus::kStationary;
    label.reason = StatusReason::kTruncatedHorizon;
    return label;
  }
  if (n_vertices < 2) {
    label.status = FrameStatus::kNull;
    label.reason = StatusReason::kTooFewVertices;
    return label;
  }
  if (!mask || count_positive(*mask) == 0) {
    label.status = FrameStatus::kNull;
    label.reason = StatusReason::kEmptyMask;
    return label;
  }
  label.status = FrameStatus::kValid;
  label.reason = StatusReason::kMasked;
  label.mask = std::move(mask);
  return label;
}

// Full labeling of one frame: ground trajectory, ribbon raster, status.
inline FrameLabel label_frame(const SparseReconstruction& recon,
                              const Timeline& timeline, std::uint32_t frame_id,
                              double h_cam, const LabelOptions& opts = {}) {
  const auto poly = ground_trajectory(recon, timeline, frame_id, h_cam,
                                      opts.horizon_frames, opts.down_axis);
  std::optional<TrajectoryMask> mask;
  if (poly.size() >= 2) {
    const auto& frame = recon.frame(frame_id);
    mask = rasterize_ribbon(poly, opts.width_factor * h_cam, frame.pose,
                            recon.camera_of(frame), opts.ribbon);
  }
  return classify_frame(recon, timeline, frame_id, poly.size(), std::move(mask),
                        opts);
}

struct DatasetStats {
  std::size_t n_frames = 0;
  std::size_t n_valid = 0;
  std::size_t n_stationary = 0;
  std::size_t n_null = 0;
  std::vector<std::filesystem::path> masks_written;  // relative to out_dir
};

inline std::filesystem::path mask_relpath(const std::string& frame_name) {
  return std::filesystem::path("masks") /
         std::filesystem::path(frame_name).replace_extension(".png");
}

// Writes masks/<frame>.png for every Valid frame and manifest.csv listing
// every registered frame in temporal order. Output bytes depend only on the
// inputs, never on `jobs`.
inline DatasetStats generate_dataset(const SparseReconstruction& recon,
                                     double h_cam,
                                     const std::filesystem::path& out_dir,
                                     const LabelOptions& opts = {},
                                     unsigned jobs = 1) {
  if (!(h_cam > 0.0)) throw InvariantError("generate_dataset: h_cam must be > 0");
  const Timeline timeline(recon);
  std::filesystem::create_directories(out_dir / "masks");

  struct Row {
    FrameStatus status;
    StatusReason reason;
    double displacement;
    std::size_t n_vertices;
    std::size_t n_pixels;
  };
  std::vector<Row> rows(timeline.size());
  parallel_for(timeline.size(), jobs, [&](std::size_t i) {
    const auto id = timeline.order()[i];
    auto label = label_frame(recon, timeline, id, h_cam, opts);
    Row row{label.status, label.reason, label.displacement, label.n_vertices, 0};
    if (label.status == FrameStatus::kValid) {
      row.n_pixels = count_positive(*label.mask);
      const auto path = out_dir / mask_relpath(recon.frame(id).name);
      std::filesystem::create_directories(path.parent_path());
      write_png(path, *label.mask);
    }
    rows[i] = row;
  });

  DatasetStats stats;
  stats.n_frames = timeline.size();
  std::ofstream manifest(out_dir / "manifest.csv", std::ios::trunc);
  if (!manifest) throw Error("cannot write manifest in " + out_dir.string());
  manifest << "frame_id,frame_name,status,reason,displacement,n_vertices,"
              "n_pixels,mask_path\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto id = timeline.order()[i];
    const auto& row = rows[i];
    const auto& name = recon.frame(id).name;
    std::string disp;
    detail::append_double(disp, row.displacement);
    std::string mask_path;
    switch (row.status) {
      case FrameStatus::kValid:
        ++stats.n_valid;
        stats.masks_written.push_back(mask_relpath(name));
        mask_path = mask_relpath(name).generic_string();
        break;
      case FrameStatus::kStationary: ++stats.n_stationary; break;
      case FrameStatus::kNull: ++stats.n_null; break;
    }
    manifest << id << ',' << name << ',' << to_string(row.status) << ','
             << to_string(row.reason) << ',' << disp << ',' << row.n_vertices
             << ',' << row.n_pixels << ',' << mask_path << '\n';
  }
  if (!manifest) throw Error("manifest write failed in " + out_dir.string());
  return stats;
}

}  // namespace ghost

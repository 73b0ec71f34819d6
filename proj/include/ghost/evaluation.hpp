#pragma once

// Ground-truth masks from reachable lanes and Soft IoU scoring.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ghost/error.hpp"
#include "ghost/grid.hpp"
#include "ghost/lane_graph.hpp"
#include "ghost/parallel.hpp"
#include "ghost/trajectory_mask.hpp"

namespace ghost {

namespace detail {

inline void check_unit_interval(const TrajectoryMask& m, const char* which) {
  for (const float v : m.data()) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw Error(std::string("soft_iou: ") + which + " value outside [0, 1]");
    }
  }
}

inline void check_pair(const TrajectoryMask& gt, const TrajectoryMask& pred) {
  if (!gt.same_shape(pred)) {
    throw Error("soft_iou: mask dimensions differ (" + std::to_string(gt.width()) +
                "x" + std::to_string(gt.height()) + " vs " +
                std::to_string(pred.width()) + "x" + std::to_string(pred.height()) +
                ")");
  }
  check_unit_interval(gt, "ground-truth");
  check_unit_interval(pred, "prediction");
}

}  // namespace detail

struct SoftIouSums {
  double min_sum = 0.0;
  double max_sum = 0.0;

  double ratio() const { return max_sum == 0.0 ? 1.0 : min_sum / max_sum; }
};

// Per-pixel sums in row-major order, accumulated in double.
inline SoftIouSums soft_iou_sums(const TrajectoryMask& gt,
                                 const TrajectoryMask& pred) {
  detail::check_pair(gt, pred);
  SoftIouSums s;
  const auto g = gt.data();
  const auto p = pred.data();
  for (std::size_t i = 0; i < g.size(); ++i) {
    s.min_sum += static_cast<double>(std::min(g[i], p[i]));
    s.max_sum += static_cast<double>(std::max(g[i], p[i]));
  }
  return s;
}

// Ruzicka similarity sum(min) / sum(max); two all-zero masks score 1.
inline double soft_iou(const TrajectoryMask& gt, const TrajectoryMask& pred) {
  return soft_iou_sums(gt, pred).ratio();
}

inline TrajectoryMask rasterize_gt(const ReachableSet& reach, const RigidPose& pose,
                                   const CameraIntrinsics& cam, double ribbon_width,
                                   const RibbonOptions& opts = {}) {
  TrajectoryMask mask(static_cast<int>(cam.width), static_cast<int>(cam.height));
  for (const auto& e : reach.entries) {
    GroundPolyline poly;
    poly.vertices = e.polyline.points();
    rasterize_ribbon_into(mask, poly, ribbon_width, pose, cam, opts);
  }
  return mask;
}

struct EvalFrame {
  std::string frame_id;
  TrajectoryMask gt;
  TrajectoryMask pred;
  std::optional<std::size_t> lane_count;  // known when GT came from a lane graph
};

template <typename Frame>
std::vector<const Frame*> multi_lane_filter(const std::vector<Frame>& frames,
                                            std::size_t min_lanes = 4) {
  std::vector<const Frame*> out;
  for (const auto& f : frames) {
    if (f.lane_count && *f.lane_count >= min_lanes) out.push_back(&f);
  }
  return out;
}

inline bool is_multi_lane(const ReachableSet& reach, std::size_t min_lanes = 4) {
  return reach.lane_count() >= min_lanes;
}

struct EvalOptions {
  std::size_t min_lanes = 4;
  bool pooled = false;
  unsigned jobs = 1;
};

struct FrameScore {
  std::string frame_id;
  double soft_iou = 0.0;
  SoftIouSums sums;
  std::optional<std::size_t> lane_count;
  bool multi_lane = false;
};

struct EvalReport {
  std::vector<FrameScore> frames;  // input order
  double overall = 0.0;
  std::optional<double> multi_lane;  // absent when no frame qualifies
  std::size_t n_multi_lane = 0;
  bool pooled = false;
};

// Frames are scored independently and reduced in input order. The overall
// score is the per-frame mean, or sum(min) / sum(max) over every pixel when
// `pooled` is set.
inline EvalReport evaluate(const std::vector<EvalFrame>& frames,
                           const EvalOptions& opts = {}) {
  if (frames.empty()) throw Error("evaluate: no frames to score");
  EvalReport report;
  report.pooled = opts.pooled;
  report.frames.resize(frames.size());
  parallel_for(frames.size(), opts.jobs, [&](std::size_t i) {
    const auto& f = frames[i];
    FrameScore s;
    s.frame_id = f.frame_id;
    s.sums = soft_iou_sums(f.gt, f.pred);
    s.soft_iou = s.sums.ratio();
    s.lane_count = f.lane_count;
    s.multi_lane = f.lane_count && *f.lane_count >= opts.min_lanes;
    report.frames[i] = std::move(s);
  });

  auto reduce = [&](bool multi_only) -> std::optional<double> {
    SoftIouSums pooled;
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : report.frames) {
      if (multi_only && !s.multi_lane) continue;
      pooled.min_sum += s.sums.min_sum;
      pooled.max_sum += s.sums.max_sum;
      sum += s.soft_iou;
      ++n;
    }
    if (n == 0) return std::nullopt;
    return opts.pooled ? pooled.ratio() : sum / static_cast<double>(n);
  };
  report.overall = *reduce(false);
  report.multi_lane = reduce(true);
  for (const auto& s : report.frames) report.n_multi_lane += s.multi_lane ? 1 : 0;
  return report;
}

// frame_id,soft_iou,min_sum,max_sum,lane_count,multi_lane
inline void write_per_frame_csv(const std::filesystem::path& path,
                                const EvalReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "frame_id,soft_iou,min_sum,max_sum,lane_count,multi_lane\n";
  for (const auto& s : report.frames) {
    std::string line = s.frame_id + ',';
    detail::append_double(line, s.soft_iou);
    line += ',';
    detail::append_double(line, s.sums.min_sum);
    line += ',';
    detail::append_double(line, s.sums.max_sum);
    line += ',';
    if (s.lane_count) line += std::to_string(*s.lane_count);
    line += s.multi_lane ? ",1\n" : ",0\n";
    out << line;
  }
  if (!out) throw Error("write failed: " + path.string());
}

inline nlohmann::json report_json(const EvalReport& report) {
  nlohmann::json j;
  j["n_frames"] = report.frames.size();
  j["aggregation"] = report.pooled ? "pooled" : "per_frame_mean";
  j["overall_soft_iou"] = report.overall;
  j["n_multi_lane"] = report.n_multi_lane;
  j["multi_lane_soft_iou"] =
      report.multi_lane ? nlohmann::json(*report.multi_lane) : nlohmann::json();
  return j;
}

}  // namespace ghost

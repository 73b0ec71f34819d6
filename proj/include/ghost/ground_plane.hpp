#pragma once

// Camera-height estimation from an unscaled sparse reconstruction.
//
// Phase 1 collects every 3D point that some frame observes inside the
// lower-central image region into a global ground set. Phase 2 takes, for each
// frame, the ground points within d_max of its optical center, expresses them
// in that camera's frame and fits y_c against z_c with Theil-Sen; the fitted
// intercept is the camera height over the local ground. The sequence height is
// the median of all valid intercepts.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ghost/colmap_model.hpp"
#include "ghost/error.hpp"
#include "ghost/geometry.hpp"
#include "ghost/parallel.hpp"
#include "ghost/theil_sen.hpp"

namespace ghost {

struct RoiSpec {
  double u_min_frac = 0.20;
  double u_max_frac = 0.80;
  double v_min_frac = 0.75;

  void validate() const {
    if (!(0.0 <= u_min_frac && u_min_frac < u_max_frac && u_max_frac <= 1.0)) {
      throw InvariantError("roi: need 0 <= u_min_frac < u_max_frac <= 1");
    }
    if (!(0.0 <= v_min_frac && v_min_frac <= 1.0)) {
      throw InvariantError("roi: need 0 <= v_min_frac <= 1");
    }
  }

  // {(u, v) | u_min W < u < u_max W, v > v_min H}
  bool contains(const PixelPoint& p, double width, double height) const {
    return u_min_frac * width < p.u && p.u < u_max_frac * width &&
           p.v > v_min_frac * height;
  }
};

// Frozen set of world-frame ground points with radius queries. Points are
// kept in ascending point3d_id order; a secondary x-sorted index bounds each
// query to a slab before the exact distance test.
class GroundPointSet {
 public:
  GroundPointSet() = default;

  // `ids` must be strictly ascending and parallel to `points`.
  GroundPointSet(std::vector<std::uint64_t> ids, std::vector<Vec3> points)
      : ids_(std::move(ids)), points_(std::move(points)) {
    if (ids_.size() != points_.size()) {
      throw Error("GroundPointSet: ids and points differ in length");
    }
    by_x_.resize(points_.size());
    for (std::size_t i = 0; i < by_x_.size(); ++i) by_x_[i] = i;
    std::sort(by_x_.begin(), by_x_.end(), [&](std::size_t a, std::size_t b) {
      return points_[a].x() != points_[b].x() ? points_[a].x() < points_[b].x()
                                              : a < b;
    });
    xs_.reserve(by_x_.size());
    for (const auto i : by_x_) xs_.push_back(points_[i].x());
  }

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const std::vector<std::uint64_t>& ids() const { return ids_; }
  const std::vector<Vec3>& points() const { return points_; }

  // Indices of points with |p - center| <= radius, ascending.
  std::vector<std::size_t> query_radius(const Vec3& center,
                                        double radius) const {
    std::vector<std::size_t> hits;
    if (!(radius >= 0.0)) return hits;
    const double r2 = radius * radius;
    auto it = std::lower_bound(xs_.begin(), xs_.end(), center.x() - radius);
    for (; it != xs_.end() && *it <= center.x() + radius; ++it) {
      const auto i = by_x_[static_cast<std::size_t>(it - xs_.begin())];
      if ((points_[i] - center).squaredNorm() <= r2) hits.push_back(i);
    }
    std::sort(hits.begin(), hits.end());
    return hits;
  }

 private:
  std::vector<std::uint64_t> ids_;
  std::vector<Vec3> points_;
  std::vector<std::size_t> by_x_;
  std::vector<double> xs_;
};

struct HeightOptions {
  RoiSpec roi;
  double d_max = 1.0;  // SfM units
  std::size_t min_local_points = 10;
  double max_field_angle_deg = kDefaultMaxFieldAngleDeg;
  TheilSenOptions theil_sen;
  unsigned jobs = 1;
};

// Point ids observed by `frame` whose projection lands inside the ROI.
inline std::vector<std::uint64_t> frame_ground_candidates(
    const SparseReconstruction& recon, const FramePose& frame,
    const RoiSpec& roi, double max_field_angle_deg = kDefaultMaxFieldAngleDeg) {
  const auto& cam = recon.camera_of(frame);
  const CameraTransform xf(frame.pose);
  const auto w = static_cast<double>(cam.width);
  const auto h = static_cast<double>(cam.height);
  std::vector<std::uint64_t> out;
  for (const auto& obs : frame.observations) {
    if (!obs.tracked()) continue;
    const auto it = recon.points.find(obs.point3d_id);
    if (it == recon.points.end()) continue;
    const auto pix =
        project_fisheye(cam, xf.to_camera(it->second.xyz), max_field_angle_deg);
    if (pix && roi.contains(*pix, w, h)) out.push_back(obs.point3d_id);
  }
  return out;
}

inline GroundPointSet accumulate_ground_set(const SparseReconstruction& recon,
                                            const RoiSpec& roi,
                                            const HeightOptions& opts = {}) {
  roi.validate();
  std::vector<const FramePose*> frames;
  frames.reserve(recon.frames.size());
  for (const auto& [id, f] : recon.frames) frames.push_back(&f);

  std::vector<std::vector<std::uint64_t>> per_frame(frames.size());
  parallel_for(frames.size(), opts.jobs, [&](std::size_t i) {
    per_frame[i] = frame_ground_candidates(recon, *frames[i], roi,
                                           opts.max_field_angle_deg);
  });

  std::set<std::uint64_t> merged;
  for (const auto& ids : per_frame) merged.insert(ids.begin(), ids.end());
  std::vector<std::uint64_t> ids(merged.begin(), merged.end());
  std::vector<Vec3> pts;
  pts.reserve(ids.size());
  for (const auto id : ids) pts.push_back(recon.points.at(id).xyz);
  return GroundPointSet(std::move(ids), std::move(pts));
}

struct FrameHeight {
  std::size_t n_local = 0;
  std::optional<LineFit> fit;  // nullopt: insufficient local ground support

  bool valid() const { return fit.has_value(); }
};

inline FrameHeight frame_height(const SparseReconstruction& recon,
                                std::uint32_t frame_id,
                                const GroundPointSet& gset, double d_max,
                                std::size_t min_points = 10,
                                const TheilSenOptions& ts = {}) {
  const auto& frame = recon.frame(frame_id);
  const CameraTransform xf(frame.pose);
  const auto hits = gset.query_radius(xf.center(), d_max);
  FrameHeight out;
  out.n_local = hits.size();
  if (hits.size() < std::max<std::size_t>(min_points, 2)) return out;
  std::vector<ZY> samples;
  samples.reserve(hits.size());
  for (const auto i : hits) {
    const Vec3 pc = xf.to_camera(gset.points()[i]);
    samples.push_back({pc.z(), pc.y()});
  }
  try {
    out.fit = theil_sen(samples, ts);
  } catch (const Error&) {
    // Degenerate depth spread; the frame simply contributes no intercept.
  }
  return out;
}

struct HeightEstimate {
  double h_cam = 0.0;
  std::map<std::uint32_t, FrameHeight> per_frame;
  std::size_t n_valid = 0;
  std::size_t ground_set_size = 0;
  double mad = 0.0;  // median absolute deviation of the valid intercepts
};

inline HeightEstimate estimate_camera_height(const SparseReconstruction& recon,
                                             const HeightOptions& opts = {}) {
  if (recon.frames.empty()) throw Error("reconstruction has no frames");
  if (!(opts.d_max > 0.0)) throw InvariantError("d_max must be positive");
  const auto gset = accumulate_ground_set(recon, opts.roi, opts);

  std::vector<std::uint32_t> ids;
  ids.reserve(recon.frames.size());
  for (const auto& [id, f] : recon.frames) ids.push_back(id);
  std::vector<FrameHeight> results(ids.size());
  parallel_for(ids.size(), opts.jobs, [&](std::size_t i) {
    results[i] = frame_height(recon, ids[i], gset, opts.d_max,
                              opts.min_local_points, opts.theil_sen);
  });

  HeightEstimate est;
  est.ground_set_size = gset.size();
  std::vector<double> intercepts;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (results[i].fit) intercepts.push_back(results[i].fit->intercept);
    est.per_frame.emplace(ids[i], std::move(results[i]));
  }
  est.n_valid = intercepts.size();
  if (intercepts.empty()) throw NoValidFramesError();
  est.h_cam = median(intercepts);
  for (auto& v : intercepts) v = std::abs(v - est.h_cam);
  est.mad = median(std::move(intercepts));
  return est;
}

// frame_id,frame_name,n_local_points,slope,intercept,valid
inline void write_height_diagnostics(const std::filesystem::path& path,
                                     const SparseReconstruction& recon,
                                     const HeightEstimate& est) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "frame_id,frame_name,n_local_points,slope,intercept,valid\n";
  const Timeline timeline(recon);
  for (const auto id : timeline.order()) {
    const auto it = est.per_frame.find(id);
    if (it == est.per_frame.end()) continue;
    const auto& fh = it->second;
    out << id << ',' << recon.frame(id).name << ',' << fh.n_local << ',';
    if (fh.fit) {
      std::string s;
      detail::append_double(s, fh.fit->slope);
      s += ',';
      detail::append_double(s, fh.fit->intercept);
      out << s << ",1\n";
    } else {
      out << ",,0\n";
    }
  }
}

}  // namespace ghost

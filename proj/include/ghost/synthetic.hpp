#pragma once

// Deterministic synthetic scenes with known answers. Everything here is
// computed along its own straightforward code path (own projection, linear
// scans, exhaustive enumeration) so it can serve as an oracle for the
// modules it feeds.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ghost/colmap_model.hpp"
#include "ghost/error.hpp"
#include "ghost/geometry.hpp"
#include "ghost/lane_graph.hpp"
#include "ghost/trajectory_mask.hpp"

namespace ghost::synth {

enum class TrajectoryKind { kStraight, kArc, kLaneChange, kStationary };

inline const char* to_string(TrajectoryKind k) {
  switch (k) {
    case TrajectoryKind::kStraight: return "straight";
    case TrajectoryKind::kArc: return "arc";
    case TrajectoryKind::kLaneChange: return "lane_change";
    case TrajectoryKind::kStationary: return "stationary";
  }
  return "?";
}

inline TrajectoryKind trajectory_kind_from_string(const std::string& s) {
  if (s == "straight") return TrajectoryKind::kStraight;
  if (s == "arc") return TrajectoryKind::kArc;
  if (s == "lane_change") return TrajectoryKind::kLaneChange;
  if (s == "stationary") return TrajectoryKind::kStationary;
  throw Error("unknown trajectory kind '" + s + "'");
}

// Half-open run of frame indices [first, first + count).
struct FrameRange {
  int first = 0;
  int count = 0;

  bool contains(int i) const { return i >= first && i < first + count; }
};

struct SceneSpec {
  TrajectoryKind kind = TrajectoryKind::kStraight;
  int n_frames = 100;
  double true_height = 0.015;
  double plane_noise_sigma = 0.0;
  double outlier_fraction = 0.0;
  // Outliers are uniform in y_world within h +- band * h.
  double outlier_band = 0.5;
  int points_per_frame = 60;
  CameraIntrinsics camera = make_simple_radial_fisheye(1, 1280, 720, 400.0, 640.0, 360.0, 0.0);
  std::uint64_t rng_seed = 1;

  double step = 0.01;           // travel per frame
  double arc_curvature = 2.0;   // 1 / radius, for kArc
  double lane_offset = 0.05;    // lateral shift over the drive, for kLaneChange
  // Frames that are never registered.
  std::vector<FrameRange> gaps;
  // Frames that do not move relative to their predecessor.
  std::vector<FrameRange> stationary;

  // Labeling rule used for the expected statuses.
  int horizon_frames = 50;
  double null_displacement_threshold = 1e-4;

  void validate() const {
    if (n_frames < 1) throw InvariantError("scene: n_frames must be >= 1");
    if (!(true_height > 0.0)) throw InvariantError("scene: true_height must be > 0");
    if (!(outlier_fraction >= 0.0 && outlier_fraction < 0.5)) {
      throw InvariantError("scene: outlier_fraction must lie in [0, 0.5)");
    }
    if (!(plane_noise_sigma >= 0.0)) throw InvariantError("scene: noise sigma < 0");
    if (points_per_frame < 0) throw InvariantError("scene: points_per_frame < 0");
  }
};

struct GroundTruth {
  double true_height = 0.0;
  // image_id -> ids of the points it sees inside the ground ROI
  std::map<std::uint32_t, std::vector<std::uint64_t>> ground_members;
  std::map<std::uint32_t, FrameStatus> expected_status;
  std::vector<std::uint64_t> outlier_ids;

  std::size_t count(FrameStatus s) const {
    std::size_t n = 0;
    for (const auto& [id, st] : expected_status) n += st == s;
    return n;
  }
};

struct Scene {
  SparseReconstruction recon;
  GroundTruth truth;
};

namespace detail {

struct Pose2 {
  Vec3 center;
  double heading = 0.0;  // rotation about world +y
};

// The camera looks along (sin psi, 0, cos psi) with +y (down) shared with the
// world; the ground is the plane y = true_height.
inline Pose2 path_pose(const SceneSpec& spec, double s) {
  switch (spec.kind) {
    case TrajectoryKind::kStraight:
      return {Vec3(0.0, 0.0, s), 0.0};
    case TrajectoryKind::kArc: {
      const double k = spec.arc_curvature;
      const double psi = k * s;
      return {Vec3((1.0 - std::cos(psi)) / k, 0.0, std::sin(psi) / k), psi};
    }
    case TrajectoryKind::kLaneChange: {
      const double total = spec.step * std::max(1, spec.n_frames - 1);
      const double a = std::clamp(s / total, 0.0, 1.0);
      const double shift = spec.lane_offset * a * a * (3.0 - 2.0 * a);
      const double slope = spec.lane_offset * 6.0 * a * (1.0 - a) / total;
      return {Vec3(shift, 0.0, s), std::atan(slope)};
    }
    case TrajectoryKind::kStationary:
      return {Vec3::Zero(), 0.0};
  }
  return {};
}

// Camera-to-world is a rotation by psi about +y; the stored world-to-camera
// quaternion is its inverse.
inline RigidPose to_rigid_pose(const Pose2& p) {
  RigidPose out;
  out.q = {std::cos(0.5 * p.heading), 0.0, -std::sin(0.5 * p.heading), 0.0};
  const double c = std::cos(p.heading), s = std::sin(p.heading);
  // R_wc = [[c, 0, -s], [0, 1, 0], [s, 0, c]]
  const Vec3& x = p.center;
  out.t = -Vec3(c * x.x() - s * x.z(), x.y(), s * x.x() + c * x.z());
  return out;
}

inline Vec3 world_to_local(const Pose2& p, const Vec3& w) {
  const Vec3 d = w - p.center;
  const double c = std::cos(p.heading), s = std::sin(p.heading);
  return {c * d.x() - s * d.z(), d.y(), s * d.x() + c * d.z()};
}

inline Vec3 local_to_world(const Pose2& p, const Vec3& l) {
  const double c = std::cos(p.heading), s = std::sin(p.heading);
  return p.center + Vec3(c * l.x() + s * l.z(), l.y(), -s * l.x() + c * l.z());
}

struct Pixel {
  double u, v;
};

// Fisheye projection written out independently of the library's.
inline std::optional<Pixel> project(const CameraIntrinsics& cam, const Vec3& l) {
  if (l.z() <= 0.0) return std::nullopt;
  const double r = std::sqrt(l.x() * l.x() + l.y() * l.y());
  const double theta = std::atan(r / l.z());
  if (theta > 89.0 * std::numbers::pi / 180.0) return std::nullopt;
  const auto& prm = cam.params;
  if (r == 0.0) return Pixel{prm[1], prm[2]};
  const double rd = prm[0] * theta * (1.0 + prm[3] * theta * theta);
  return Pixel{prm[1] + rd * l.x() / r, prm[2] + rd * l.y() / r};
}

inline bool in_roi(const CameraIntrinsics& cam, const Pixel& p) {
  const double w = static_cast<double>(cam.width);
  const double h = static_cast<double>(cam.height);
  return p.u > 0.2 * w && p.u < 0.8 * w && p.v > 0.75 * h && p.v < h;
}

inline std::string frame_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06d.jpg", index);
  return buf;
}

}  // namespace detail

// Camera path over the plane, ground and outlier points, ROI-based tracks
// and the expected frame statuses.
inline Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  const double h = spec.true_height;
  std::mt19937_64 rng(spec.rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  auto in_any = [](const std::vector<FrameRange>& rs, int i) {
    return std::any_of(rs.begin(), rs.end(),
                       [&](const FrameRange& r) { return r.contains(i); });
  };

  // Arc length along the path; stationary frames repeat their predecessor.
  std::vector<detail::Pose2> poses;
  double s = 0.0;
  for (int i = 0; i < spec.n_frames; ++i) {
    if (i > 0 && !in_any(spec.stationary, i)) s += spec.step;
    poses.push_back(detail::path_pose(spec, s));
  }
  std::vector<int> registered;
  for (int i = 0; i < spec.n_frames; ++i) {
    if (!in_any(spec.gaps, i)) registered.push_back(i);
  }

  Scene scene;
  scene.truth.true_height = h;
  auto& recon = scene.recon;
  recon.cameras[spec.camera.camera_id] = spec.camera;

  // Points are scattered on the road just ahead of every registered frame.
  struct Candidate {
    Vec3 xyz;
    bool outlier;
  };
  std::vector<Candidate> candidates;
  const int n_out =
      static_cast<int>(std::lround(spec.outlier_fraction * spec.points_per_frame));
  for (const int i : registered) {
    for (int k = 0; k < spec.points_per_frame; ++k) {
      const bool outlier = k < n_out;
      const double x = (unit(rng) - 0.5) * h;
      const double z = (0.3 + 1.7 * unit(rng)) * h;
      Vec3 w = detail::local_to_world(poses[static_cast<std::size_t>(i)],
                                      Vec3(x, 0.0, z));
      if (outlier) {
        w.y() = h + (2.0 * unit(rng) - 1.0) * spec.outlier_band * h;
      } else {
        w.y() = h + spec.plane_noise_sigma * noise(rng);
      }
      candidates.push_back({w, outlier});
    }
  }

  for (std::size_t r = 0; r < registered.size(); ++r) {
    const int i = registered[r];
    FramePose f;
    f.image_id = static_cast<std::uint32_t>(r + 1);
    f.camera_id = spec.camera.camera_id;
    f.pose = detail::to_rigid_pose(poses[static_cast<std::size_t>(i)]);
    f.name = detail::frame_name(i);
    recon.frames[f.image_id] = f;
  }

  std::uint64_t next_point = 1;
  for (const auto& c : candidates) {
    Point3D pt;
    pt.point3d_id = next_point;
    pt.xyz = c.xyz;
    pt.color = {128, 128, 128};
    for (std::size_t r = 0; r < registered.size(); ++r) {
      const auto pose = poses[static_cast<std::size_t>(registered[r])];
      const auto pix = detail::project(spec.camera, detail::world_to_local(pose, c.xyz));
      if (!pix || !detail::in_roi(spec.camera, *pix)) continue;
      auto& frame = recon.frames.at(static_cast<std::uint32_t>(r + 1));
      pt.track.push_back({frame.image_id,
                          static_cast<std::uint32_t>(frame.observations.size())});
      frame.observations.push_back({pix->u, pix->v, pt.point3d_id});
      scene.truth.ground_members[frame.image_id].push_back(pt.point3d_id);
    }
    if (pt.track.empty()) continue;
    if (c.outlier) scene.truth.outlier_ids.push_back(pt.point3d_id);
    recon.points[pt.point3d_id] = std::move(pt);
    ++next_point;
  }

  // Expected statuses, by direct reading of the construction.
  for (std::size_t r = 0; r < registered.size(); ++r) {
    const auto id = static_cast<std::uint32_t>(r + 1);
    const int i = registered[r];
    auto& st = scene.truth.expected_status[id];
    if (r + 1 == registered.size()) {
      st = FrameStatus::kStationary;
      continue;
    }
    const Vec3 d = poses[static_cast<std::size_t>(registered[r + 1])].center -
                   poses[static_cast<std::size_t>(i)].center;
    if (d.norm() <= spec.null_displacement_threshold ||
        i + spec.horizon_frames > registered.back()) {
      st = FrameStatus::kStationary;
      continue;
    }
    // Distinct ground positions among the successors inside the horizon.
    std::vector<Vec3> seen;
    for (std::size_t q = r + 1; q < registered.size(); ++q) {
      if (registered[q] > i + spec.horizon_frames) break;
      const Vec3 c = poses[static_cast<std::size_t>(registered[q])].center;
      if (std::none_of(seen.begin(), seen.end(),
                       [&](const Vec3& v) { return v == c; })) {
        seen.push_back(c);
      }
    }
    st = seen.size() >= 2 ? FrameStatus::kValid : FrameStatus::kNull;
  }
  return scene;
}

// Copy of `recon` with every length multiplied by `s`.
inline SparseReconstruction scaled(SparseReconstruction recon, double s) {
  for (auto& [id, f] : recon.frames) f.pose.t *= s;
  for (auto& [id, p] : recon.points) p.xyz *= s;
  return recon;
}

inline nlohmann::json to_json(const SceneSpec& spec) {
  auto ranges = [](const std::vector<FrameRange>& rs) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& r : rs) a.push_back({r.first, r.count});
    return a;
  };
  return {{"kind", to_string(spec.kind)},
          {"n_frames", spec.n_frames},
          {"true_height", spec.true_height},
          {"plane_noise_sigma", spec.plane_noise_sigma},
          {"outlier_fraction", spec.outlier_fraction},
          {"outlier_band", spec.outlier_band},
          {"points_per_frame", spec.points_per_frame},
          {"rng_seed", spec.rng_seed},
          {"step", spec.step},
          {"arc_curvature", spec.arc_curvature},
          {"lane_offset", spec.lane_offset},
          {"gaps", ranges(spec.gaps)},
          {"stationary", ranges(spec.stationary)},
          {"horizon_frames", spec.horizon_frames},
          {"null_displacement_threshold", spec.null_displacement_threshold}};
}

inline nlohmann::json to_json(const Scene& scene, const SceneSpec& spec) {
  nlohmann::json j;
  j["spec"] = to_json(spec);
  j["true_height"] = scene.truth.true_height;
  j["expected_counts"] = {{"valid", scene.truth.count(FrameStatus::kValid)},
                          {"stationary", scene.truth.count(FrameStatus::kStationary)},
                          {"null", scene.truth.count(FrameStatus::kNull)}};
  nlohmann::json frames = nlohmann::json::array();
  for (const auto& [id, st] : scene.truth.expected_status) {
    const auto it = scene.truth.ground_members.find(id);
    frames.push_back({{"image_id", id},
                      {"name", scene.recon.frames.at(id).name},
                      {"expected_status", to_string(st)},
                      {"ground_points", it == scene.truth.ground_members.end()
                                            ? nlohmann::json::array()
                                            : nlohmann::json(it->second)}});
  }
  j["frames"] = std::move(frames);
  j["outlier_ids"] = scene.truth.outlier_ids;
  return j;
}

// ------------------------------------------------------------ lane scenes

enum class LaneSceneKind { kChain, kDiamond, kGrid };

inline LaneSceneKind lane_scene_kind_from_string(const std::string& s) {
  if (s == "chain") return LaneSceneKind::kChain;
  if (s == "diamond") return LaneSceneKind::kDiamond;
  if (s == "grid") return LaneSceneKind::kGrid;
  throw Error("unknown lane scene kind '" + s + "'");
}

struct ExpectedLane {
  LaneId lane_id = 0;
  double entry_budget = 0.0;
  double clipped_length = 0.0;
};

struct LaneScene {
  LaneGraph graph;
  EgoKinematics kinematics;  // starts at the ego position
  LaneId ego_lane = 0;
  double ego_offset = 0.0;
  double budget = 0.0;
  std::vector<ExpectedLane> expected;  // ascending lane id
};

namespace detail {

inline double polyline_length(const std::vector<Vec3>& pts) {
  double s = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const Vec3 d = pts[i] - pts[i - 1];
    s += std::sqrt(d.x() * d.x() + d.y() * d.y() + d.z() * d.z());
  }
  return s;
}

// Straight-ahead future positions covering `budget` over `steps` steps.
inline EgoKinematics straight_kinematics(const Vec3& start, double budget,
                                         int steps = 50, double horizon_s = 5.0) {
  EgoKinematics kin;
  kin.horizon_s = horizon_s;
  for (int i = 0; i <= steps; ++i) {
    kin.future_positions.push_back(start + Vec3(0.0, 0.0, budget * i / steps));
  }
  return kin;
}

}  // namespace detail

// Every simple path from the ego lane, tracking the largest budget with
// which each lane is entered. Exponential; meant for small graphs.
inline std::vector<ExpectedLane> enumerate_reachable(const LaneGraph& graph,
                                                     LaneId ego_lane,
                                                     double ego_offset,
                                                     double budget) {
  std::map<LaneId, double> best;
  std::vector<LaneId> path;
  auto visit = [&](auto&& self, LaneId lane, double entry) -> void {
    const auto it = best.find(lane);
    if (it == best.end() || entry > it->second) best[lane] = entry;
    const double start = lane == ego_lane ? ego_offset : 0.0;
    const double residual =
        detail::polyline_length(graph.lane(lane).centerline.points()) - start;
    const double left = entry - std::max(residual, 1e-9);
    if (!(left > 0.0)) return;
    path.push_back(lane);
    for (const auto next : graph.successors(lane)) {
      if (std::find(path.begin(), path.end(), next) != path.end()) continue;
      self(self, next, left);
    }
    path.pop_back();
  };
  if (budget > 0.0) visit(visit, ego_lane, budget);

  std::vector<ExpectedLane> out;
  for (const auto& [id, b] : best) {
    const double start = id == ego_lane ? ego_offset : 0.0;
    const double residual =
        detail::polyline_length(graph.lane(id).centerline.points()) - start;
    out.push_back({id, b, std::min(b, residual)});
  }
  return out;
}

struct LaneSceneSizes {
  int chain_lanes = 3;
  double lane_length = 10.0;
  double budget = 15.0;
  double ego_offset = 0.0;
  // Diamond branch lengths (left, right); the shorter branch reaches D
  // with more budget left.
  double branch_left = 6.0;
  double branch_right = 9.0;
  int grid_rows = 4;
  int grid_cols = 4;
  double ground_y = 1.5;  // lanes lie on y = ground_y below the ego camera
};

// Chain and diamond expectations are written out by hand from the budget
// recursion; the grid uses enumerate_reachable.
inline LaneScene generate_lane_scene(LaneSceneKind kind,
                                     const LaneSceneSizes& sz = {},
                                     std::uint64_t seed = 1) {
  LaneScene sc;
  const double y = sz.ground_y;
  const double L = sz.lane_length;
  sc.ego_offset = sz.ego_offset;
  sc.budget = sz.budget;
  if (kind == LaneSceneKind::kChain) {
    if (sz.chain_lanes < 1) throw Error("chain needs at least one lane");
    for (int k = 0; k < sz.chain_lanes; ++k) {
      sc.graph.add_lane(k + 1, {Vec3(0, y, k * L), Vec3(0, y, (k + 1) * L)});
      if (k > 0) sc.graph.add_edge(k, k + 1);
    }
    sc.ego_lane = 1;
    double entry = sz.budget;
    for (int k = 0; k < sz.chain_lanes && entry > 0.0; ++k) {
      const double residual = k == 0 ? L - sz.ego_offset : L;
      sc.expected.push_back({k + 1, entry, std::min(entry, residual)});
      entry -= residual;
    }
  } else if (kind == LaneSceneKind::kDiamond) {
    // A: straight; B and C: two-segment detours of the requested lengths;
    // D: straight continuation after the merge.
    const double gap = 4.0;  // straight-line distance between split and merge
    auto detour = [&](double length, double side) {
      const double half = 0.5 * std::max(length, gap);
      const double lateral = std::sqrt(std::max(half * half - 0.25 * gap * gap, 0.0));
      return std::vector<Vec3>{Vec3(0, y, L), Vec3(side * lateral, y, L + 0.5 * gap),
                               Vec3(0, y, L + gap)};
    };
    const auto b_pts = detour(sz.branch_left, -1.0);
    const auto c_pts = detour(sz.branch_right, 1.0);
    sc.graph.add_lane(1, {Vec3(0, y, 0), Vec3(0, y, L)});
    sc.graph.add_lane(2, b_pts);
    sc.graph.add_lane(3, c_pts);
    sc.graph.add_lane(4, {Vec3(0, y, L + gap), Vec3(0, y, L + gap + L)});
    sc.graph.add_edge(1, 2);
    sc.graph.add_edge(1, 3);
    sc.graph.add_edge(2, 4);
    sc.graph.add_edge(3, 4);
    sc.ego_lane = 1;
    const double len_b = detail::polyline_length(b_pts);
    const double len_c = detail::polyline_length(c_pts);
    const double a_res = L - sz.ego_offset;
    const double b0 = sz.budget;
    if (b0 > 0.0) sc.expected.push_back({1, b0, std::min(b0, a_res)});
    const double b1 = b0 - a_res;
    if (b1 > 0.0) {
      sc.expected.push_back({2, b1, std::min(b1, len_b)});
      sc.expected.push_back({3, b1, std::min(b1, len_c)});
      const double b2 = b1 - std::min(len_b, len_c);
      if (b2 > 0.0) sc.expected.push_back({4, b2, std::min(b2, L)});
    }
  } else {
    // Lattice streets: one lane per directed edge between neighbouring
    // nodes, in both directions; lanes meeting at a node are connected,
    // U-turns included, so the graph is full of cycles.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.2, 0.2);
    const int R = sz.grid_rows, C = sz.grid_cols;
    if (R < 1 || C < 1 || R * C < 2) throw Error("grid needs at least two nodes");
    std::vector<Vec3> node;
    for (int r = 0; r < R; ++r) {
      for (int c = 0; c < C; ++c) {
        node.emplace_back((c + jitter(rng)) * L * 0.5, y, (r + jitter(rng)) * L * 0.5);
      }
    }
    struct Edge {
      int from, to;
    };
    std::vector<Edge> lanes;
    for (int r = 0; r < R; ++r) {
      for (int c = 0; c < C; ++c) {
        const int n = r * C + c;
        if (c + 1 < C) {
          lanes.push_back({n, n + 1});
          lanes.push_back({n + 1, n});
        }
        if (r + 1 < R) {
          lanes.push_back({n, n + C});
          lanes.push_back({n + C, n});
        }
      }
    }
    for (std::size_t k = 0; k < lanes.size(); ++k) {
      sc.graph.add_lane(static_cast<LaneId>(k + 1),
                        {node[static_cast<std::size_t>(lanes[k].from)],
                         node[static_cast<std::size_t>(lanes[k].to)]});
    }
    for (std::size_t a = 0; a < lanes.size(); ++a) {
      for (std::size_t b = 0; b < lanes.size(); ++b) {
        if (lanes[a].to == lanes[b].from) {
          sc.graph.add_edge(static_cast<LaneId>(a + 1), static_cast<LaneId>(b + 1));
        }
      }
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    sc.ego_lane = static_cast<LaneId>(1 + rng() % lanes.size());
    const double ego_len =
        detail::polyline_length(sc.graph.lane(sc.ego_lane).centerline.points());
    sc.ego_offset = unit(rng) * ego_len;
    sc.budget = unit(rng) * 3.0 * L;
    sc.expected = enumerate_reachable(sc.graph, sc.ego_lane, sc.ego_offset, sc.budget);
  }
  const Vec3 ego =
      sc.graph.lane(sc.ego_lane).centerline.point_at(sc.ego_offset) - Vec3(0, y, 0);
  sc.kinematics = detail::straight_kinematics(ego, sc.budget);
  return sc;
}

// Random directed graph of up to `max_lanes` short polylines with arbitrary
// (possibly cyclic) connectivity, for oracle comparisons.
inline LaneGraph random_lane_graph(std::uint64_t seed, int max_lanes = 10,
                                   double edge_probability = 0.3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_lanes));
  LaneGraph g;
  for (int k = 0; k < n; ++k) {
    const int n_pts = 2 + static_cast<int>(rng() % 3);
    std::vector<Vec3> pts;
    Vec3 p(unit(rng) * 20.0, 0.0, unit(rng) * 20.0);
    pts.push_back(p);
    for (int i = 1; i < n_pts; ++i) {
      // Occasionally a zero-length lane.
      const double len = unit(rng) < 0.05 ? 0.0 : 0.5 + unit(rng) * 8.0;
      const double ang = unit(rng) * 2.0 * std::numbers::pi;
      p += Vec3(len * std::cos(ang), 0.0, len * std::sin(ang));
      pts.push_back(p);
    }
    g.add_lane(k + 1, std::move(pts));
  }
  for (int a = 1; a <= n; ++a) {
    for (int b = 1; b <= n; ++b) {
      if (unit(rng) < edge_probability) g.add_edge(a, b);
    }
  }
  return g;
}

// Lane-graph interchange frame for a lane scene, seen from a camera at the
// ego position looking along +z.
inline LaneFrame to_lane_frame(const LaneScene& sc, const std::string& frame_id,
                               const CameraIntrinsics& cam =
                                   make_simple_radial_fisheye(1, 640, 360, 200.0,
                                                              320.0, 180.0, 0.0)) {
  LaneFrame f;
  f.frame_id = frame_id;
  f.ego_position = sc.kinematics.future_positions.front();
  f.future_positions.assign(sc.kinematics.future_positions.begin() + 1,
                            sc.kinematics.future_positions.end());
  f.camera = cam;
  f.pose.q = {1.0, 0.0, 0.0, 0.0};
  f.pose.t = -f.ego_position;
  f.graph = sc.graph;
  return f;
}

inline nlohmann::json to_json(const LaneScene& sc) {
  nlohmann::json expected = nlohmann::json::array();
  for (const auto& e : sc.expected) {
    expected.push_back({{"lane_id", e.lane_id},
                        {"entry_budget", e.entry_budget},
                        {"clipped_length", e.clipped_length}});
  }
  return {{"ego_lane", sc.ego_lane},
          {"ego_offset", sc.ego_offset},
          {"budget", sc.budget},
          {"expected", expected}};
}

}  // namespace ghost::synth

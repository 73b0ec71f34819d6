#pragma once

// Directed lane graphs from HD-map centerlines, ego-lane assignment and
// budget-limited reachability.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ghost/camera.hpp"
#include "ghost/error.hpp"
#include "ghost/geometry.hpp"

namespace ghost {

using LaneId = std::int64_t;

// Arc length charged for traversing a lane of zero length, so that budgets
// strictly decrease around cycles.
inline constexpr double kMinLaneCost = 1e-9;

class Polyline {
 public:
  Polyline() = default;
  explicit Polyline(std::vector<Vec3> points) : points_(std::move(points)) {
    cumulative_.reserve(points_.size());
    double s = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (i > 0) s += (points_[i] - points_[i - 1]).norm();
      cumulative_.push_back(s);
    }
  }

  const std::vector<Vec3>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  double length() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
  // Arc length at vertex i.
  double arc_at(std::size_t i) const { return cumulative_[i]; }

  Vec3 point_at(double s) const {
    if (points_.empty()) throw Error("point_at on an empty polyline");
    if (s <= 0.0) return points_.front();
    for (std::size_t i = 1; i < points_.size(); ++i) {
      if (s <= cumulative_[i]) {
        const double seg = cumulative_[i] - cumulative_[i - 1];
        const double t = seg > 0.0 ? (s - cumulative_[i - 1]) / seg : 0.0;
        return points_[i - 1] + t * (points_[i] - points_[i - 1]);
      }
    }
    return points_.back();
  }

  // Portion between arc lengths [s0, s1], with interpolated end points.
  Polyline slice(double s0, double s1) const {
    s0 = std::clamp(s0, 0.0, length());
    s1 = std::clamp(s1, s0, length());
    std::vector<Vec3> out{point_at(s0)};
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (cumulative_[i] > s0 && cumulative_[i] < s1) out.push_back(points_[i]);
    }
    out.push_back(point_at(s1));
    return Polyline(std::move(out));
  }

  struct Projection {
    double distance = std::numeric_limits<double>::infinity();
    double arc = 0.0;
  };

  // Closest point on the polyline (Euclidean) and its arc length.
  Projection project(const Vec3& p) const {
    Projection best;
    if (points_.size() == 1) {
      best.distance = (p - points_[0]).norm();
      return best;
    }
    for (std::size_t i = 1; i < points_.size(); ++i) {
      const Vec3 a = points_[i - 1];
      const Vec3 d = points_[i] - a;
      const double len2 = d.squaredNorm();
      const double t = len2 > 0.0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
      const double dist = (p - (a + t * d)).norm();
      if (dist < best.distance) {
        best.distance = dist;
        best.arc = cumulative_[i - 1] + t * (cumulative_[i] - cumulative_[i - 1]);
      }
    }
    return best;
  }

 private:
  std::vector<Vec3> points_;
  std::vector<double> cumulative_;
};

struct Lane {
  LaneId id = 0;
  Polyline centerline;

  double length() const { return centerline.length(); }
};

class LaneGraph {
 public:
  LaneGraph() = default;

  void add_lane(LaneId id, std::vector<Vec3> centerline) {
    if (centerline.size() < 2) {
      throw InvariantError("lane " + std::to_string(id) + ": needs >= 2 points");
    }
    for (const auto& p : centerline) {
      if (!p.allFinite()) {
        throw InvariantError("lane " + std::to_string(id) + ": non-finite point");
      }
    }
    Lane lane{id, Polyline(std::move(centerline))};
    if (!lanes_.emplace(id, std::move(lane)).second) {
      throw InvariantError("duplicate lane id " + std::to_string(id));
    }
    successors_.try_emplace(id);
  }

  void add_edge(LaneId from, LaneId to) {
    std::vector<std::uint64_t> missing;
    if (!lanes_.count(from)) missing.push_back(static_cast<std::uint64_t>(from));
    if (!lanes_.count(to)) missing.push_back(static_cast<std::uint64_t>(to));
    if (!missing.empty()) {
      throw DanglingReferenceError("connectivity references missing lane id",
                                   std::move(missing));
    }
    auto& succ = successors_[from];
    if (std::find(succ.begin(), succ.end(), to) == succ.end()) {
      succ.push_back(to);
      std::sort(succ.begin(), succ.end());
    }
  }

  const std::map<LaneId, Lane>& lanes() const { return lanes_; }
  const Lane& lane(LaneId id) const {
    const auto it = lanes_.find(id);
    if (it == lanes_.end()) throw Error("unknown lane " + std::to_string(id));
    return it->second;
  }
  const std::vector<LaneId>& successors(LaneId id) const {
    return successors_.at(id);
  }
  bool contains(LaneId id) const { return lanes_.count(id) > 0; }
  bool empty() const { return lanes_.empty(); }
  std::size_t size() const { return lanes_.size(); }

  std::vector<std::pair<LaneId, LaneId>> edges() const {
    std::vector<std::pair<LaneId, LaneId>> out;
    for (const auto& [from, succ] : successors_) {
      for (const auto to : succ) out.emplace_back(from, to);
    }
    return out;
  }

  bool operator==(const LaneGraph& o) const {
    if (edges() != o.edges() || lanes_.size() != o.lanes_.size()) return false;
    for (const auto& [id, lane] : lanes_) {
      const auto it = o.lanes_.find(id);
      if (it == o.lanes_.end() ||
          it->second.centerline.points() != lane.centerline.points()) {
        return false;
      }
    }
    return true;
  }

 private:
  std::map<LaneId, Lane> lanes_;
  std::map<LaneId, std::vector<LaneId>> successors_;
};

struct EgoKinematics {
  std::vector<Vec3> future_positions;
  double horizon_s = 5.0;

  double path_length() const {
    double s = 0.0;
    for (std::size_t i = 1; i < future_positions.size(); ++i) {
      s += (future_positions[i] - future_positions[i - 1]).norm();
    }
    return s;
  }
  double avg_speed() const { return path_length() / horizon_s; }
};

// Distance coverable over the horizon at the average future speed.
inline double compute_budget(const EgoKinematics& kin) {
  if (kin.future_positions.size() < 2) {
    throw Error("compute_budget: need at least 2 future positions");
  }
  if (!(kin.horizon_s > 0.0)) throw Error("compute_budget: horizon must be > 0");
  return kin.avg_speed() * kin.horizon_s;
}

struct EgoLane {
  LaneId lane_id = 0;
  double distance = 0.0;
  double arc_offset = 0.0;
};

// Lane whose centerline is closest to the ego position; ties go to the
// smallest lane id.
inline EgoLane assign_ego_lane(const LaneGraph& graph, const Vec3& ego) {
  if (graph.empty()) throw Error("assign_ego_lane: empty lane graph");
  std::optional<EgoLane> best;
  for (const auto& [id, lane] : graph.lanes()) {
    const auto proj = lane.centerline.project(ego);
    if (!best || proj.distance < best->distance) {
      best = EgoLane{id, proj.distance, proj.arc};
    }
  }
  return *best;
}

struct ReachableEntry {
  LaneId lane_id = 0;
  double entry_offset = 0.0;  // arc length where the lane is entered
  double entry_budget = 0.0;
  double clipped_length = 0.0;
  Polyline polyline;  // reachable portion of the centerline
};

struct ReachableSet {
  std::vector<ReachableEntry> entries;  // ascending lane id

  std::size_t lane_count() const { return entries.size(); }
  const ReachableEntry* find(LaneId id) const {
    for (const auto& e : entries) {
      if (e.lane_id == id) return &e;
    }
    return nullptr;
  }
};

// Best-budget search from the ego lane. The ego lane is entered at
// `ego_arc_offset` with the full budget; any other lane is entered at its
// start with the largest budget left over any incoming path, and is kept
// when that budget is positive. Leaving a lane costs its remaining length
// (at least kMinLaneCost). The ego lane is never re-entered.
inline ReachableSet reachable_lanes(const LaneGraph& graph, LaneId ego_lane,
                                    double ego_arc_offset, double budget) {
  if (!graph.contains(ego_lane)) {
    throw Error("reachable_lanes: unknown ego lane " + std::to_string(ego_lane));
  }
  ReachableSet out;
  if (!(budget > 0.0)) return out;
  const double ego_len = graph.lane(ego_lane).length();
  ego_arc_offset = std::clamp(ego_arc_offset, 0.0, ego_len);

  std::map<LaneId, double> best;
  std::map<LaneId, bool> settled;
  using Item = std::pair<double, LaneId>;
  auto worse = [](const Item& a, const Item& b) {
    return a.first != b.first ? a.first < b.first : a.second > b.second;
  };
  std::priority_queue<Item, std::vector<Item>, decltype(worse)> open(worse);
  best[ego_lane] = budget;
  open.emplace(budget, ego_lane);
  while (!open.empty()) {
    const auto [b, id] = open.top();
    open.pop();
    if (settled[id] || b != best[id]) continue;
    settled[id] = true;
    const double start = id == ego_lane ? ego_arc_offset : 0.0;
    const double cost = std::max(graph.lane(id).length() - start, kMinLaneCost);
    const double left = b - cost;
    if (!(left > 0.0)) continue;
    for (const auto next : graph.successors(id)) {
      if (next == ego_lane) continue;
      const auto it = best.find(next);
      if (it == best.end() || left > it->second) {
        best[next] = left;
        open.emplace(left, next);
      }
    }
  }

  for (const auto& [id, b] : best) {
    const auto& lane = graph.lane(id);
    const double start = id == ego_lane ? ego_arc_offset : 0.0;
    const double residual = lane.length() - start;
    ReachableEntry e;
    e.lane_id = id;
    e.entry_offset = start;
    e.entry_budget = b;
    e.clipped_length = std::min(b, residual);
    e.polyline = lane.centerline.slice(start, start + e.clipped_length);
    out.entries.push_back(std::move(e));
  }
  return out;
}

// One evaluation frame of the lane-graph interchange format.
struct LaneFrame {
  std::string frame_id;
  Vec3 ego_position = Vec3::Zero();
  std::vector<Vec3> future_positions;
  CameraIntrinsics camera;
  RigidPose pose;
  LaneGraph graph;

  // Ego position followed by the future positions.
  EgoKinematics kinematics(double horizon_s = 5.0) const {
    EgoKinematics kin;
    kin.horizon_s = horizon_s;
    kin.future_positions.reserve(future_positions.size() + 1);
    kin.future_positions.push_back(ego_position);
    kin.future_positions.insert(kin.future_positions.end(),
                                future_positions.begin(), future_positions.end());
    return kin;
  }
};

class SchemaError : public Error {
 public:
  SchemaError(const std::string& where, const std::string& what)
      : Error(where + ": " + what), where_(where) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

namespace detail {

using nlohmann::json;

inline const json& require(const json& obj, const char* key,
                           const std::string& where) {
  if (!obj.is_object()) throw SchemaError(where, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(where + "." + key, "missing field");
  return *it;
}

inline double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw SchemaError(where, "expected a number");
  return v.get<double>();
}

inline Vec3 as_vec3(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) {
    throw SchemaError(where, "expected [x, y, z]");
  }
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    out[i] = as_number(v[static_cast<std::size_t>(i)],
                       where + "[" + std::to_string(i) + "]");
  }
  if (!out.allFinite()) throw SchemaError(where, "non-finite coordinate");
  return out;
}

inline std::vector<Vec3> as_points(const json& v, const std::string& where) {
  if (!v.is_array()) throw SchemaError(where, "expected an array of points");
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_vec3(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

inline json vec3_json(const Vec3& p) { return json::array({p.x(), p.y(), p.z()}); }

}  // namespace detail

inline LaneFrame lane_frame_from_json(const nlohmann::json& j,
                                      const std::string& where = "$") {
  using detail::as_number;
  using detail::require;
  LaneFrame f;
  const auto& fid = require(j, "frame_id", where);
  if (!fid.is_string()) throw SchemaError(where + ".frame_id", "expected a string");
  f.frame_id = fid.get<std::string>();
  f.ego_position = detail::as_vec3(require(j, "ego_position", where),
                                   where + ".ego_position");
  f.future_positions = detail::as_points(require(j, "future_positions", where),
                                         where + ".future_positions");

  const std::string cw = where + ".camera";
  const auto& cam = require(j, "camera", where);
  const auto& model = require(cam, "model", cw);
  if (!model.is_string()) throw SchemaError(cw + ".model", "expected a string");
  f.camera.camera_id = 1;
  f.camera.model_name = model.get<std::string>();
  f.camera.model = camera_model_from_name(f.camera.model_name);
  const auto& w = require(cam, "width", cw);
  const auto& h = require(cam, "height", cw);
  if (!w.is_number_integer() || w.get<std::int64_t>() <= 0) {
    throw SchemaError(cw + ".width", "expected a positive integer");
  }
  if (!h.is_number_integer() || h.get<std::int64_t>() <= 0) {
    throw SchemaError(cw + ".height", "expected a positive integer");
  }
  f.camera.width = w.get<std::uint64_t>();
  f.camera.height = h.get<std::uint64_t>();
  const auto& params = require(cam, "params", cw);
  if (!params.is_array()) throw SchemaError(cw + ".params", "expected an array");
  for (std::size_t i = 0; i < params.size(); ++i) {
    f.camera.params.push_back(
        as_number(params[i], cw + ".params[" + std::to_string(i) + "]"));
  }
  try {
    validate_camera(f.camera);
  } catch (const InvariantError& e) {
    throw SchemaError(cw, e.what());
  }

  const std::string pw = where + ".pose";
  const auto& pose = require(j, "pose", where);
  const auto& q = require(pose, "q", pw);
  if (!q.is_array() || q.size() != 4) throw SchemaError(pw + ".q", "expected [w, x, y, z]");
  f.pose.q = {as_number(q[0], pw + ".q[0]"), as_number(q[1], pw + ".q[1]"),
              as_number(q[2], pw + ".q[2]"), as_number(q[3], pw + ".q[3]")};
  if (std::abs(f.pose.q.norm() - 1.0) > 1e-6) {
    throw SchemaError(pw + ".q", "quaternion is not unit norm");
  }
  f.pose.t = detail::as_vec3(require(pose, "t", pw), pw + ".t");

  const auto& lanes = require(j, "lanes", where);
  if (!lanes.is_array()) throw SchemaError(where + ".lanes", "expected an array");
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    const std::string lw = where + ".lanes[" + std::to_string(i) + "]";
    const auto& id = require(lanes[i], "id", lw);
    if (!id.is_number_integer()) throw SchemaError(lw + ".id", "expected an integer");
    auto pts = detail::as_points(require(lanes[i], "centerline", lw), lw + ".centerline");
    try {
      f.graph.add_lane(id.get<LaneId>(), std::move(pts));
    } catch (const InvariantError& e) {
      throw SchemaError(lw, e.what());
    }
  }
  const auto& conn = require(j, "connectivity", where);
  if (!conn.is_array()) throw SchemaError(where + ".connectivity", "expected an array");
  for (std::size_t i = 0; i < conn.size(); ++i) {
    const std::string ew = where + ".connectivity[" + std::to_string(i) + "]";
    const auto& e = conn[i];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
        !e[1].is_number_integer()) {
      throw SchemaError(ew, "expected [from_id, to_id]");
    }
    f.graph.add_edge(e[0].get<LaneId>(), e[1].get<LaneId>());
  }
  return f;
}

inline nlohmann::json to_json(const LaneFrame& f) {
  using detail::vec3_json;
  nlohmann::json j;
  j["frame_id"] = f.frame_id;
  j["ego_position"] = vec3_json(f.ego_position);
  j["future_positions"] = nlohmann::json::array();
  for (const auto& p : f.future_positions) j["future_positions"].push_back(vec3_json(p));
  j["camera"] = {{"model", f.camera.name()},
                 {"width", f.camera.width},
                 {"height", f.camera.height},
                 {"params", f.camera.params}};
  j["pose"] = {{"q", {f.pose.q.w, f.pose.q.x, f.pose.q.y, f.pose.q.z}},
               {"t", vec3_json(f.pose.t)}};
  j["lanes"] = nlohmann::json::array();
  for (const auto& [id, lane] : f.graph.lanes()) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : lane.centerline.points()) pts.push_back(vec3_json(p));
    j["lanes"].push_back({{"id", id}, {"centerline", pts}});
  }
  j["connectivity"] = nlohmann::json::array();
  for (const auto& [a, b] : f.graph.edges()) j["connectivity"].push_back({a, b});
  return j;
}

// A .json file holds one frame; a .jsonl file one frame per line; a
// directory contributes every .json/.jsonl inside it in name order.
inline std::vector<LaneFrame> load_lane_frames(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  std::vector<LaneFrame> frames;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      const auto ext = entry.path().extension();
      if (entry.is_regular_file() && (ext == ".json" || ext == ".jsonl")) {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      auto part = load_lane_frames(f);
      std::move(part.begin(), part.end(), std::back_inserter(frames));
    }
    return frames;
  }
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  if (path.extension() == ".jsonl") {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const std::string where = path.filename().string() + ":" + std::to_string(lineno);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(where, e.what());
      }
      frames.push_back(lane_frame_from_json(j, where));
    }
    return frames;
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path.filename().string(), e.what());
  }
  frames.push_back(lane_frame_from_json(j, path.filename().string()));
  return frames;
}

// Lane graph of a single-frame file.
inline LaneGraph load_lane_graph(const std::filesystem::path& path) {
  auto frames = load_lane_frames(path);
  if (frames.size() != 1) {
    throw Error(path.string() + ": expected exactly one frame, found " +
                std::to_string(frames.size()));
  }
  return std::move(frames.front().graph);
}

}  // namespace ghost

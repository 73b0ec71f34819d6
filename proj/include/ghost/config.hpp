#pragma once

// Resolved pipeline settings. Defaults are the published constants.

#include <cstddef>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "ghost/error.hpp"
#include "ghost/evaluation.hpp"
#include "ghost/ground_plane.hpp"
#include "ghost/objective.hpp"
#include "ghost/trajectory_mask.hpp"

namespace ghost {

inline const char* to_string(DownAxisMode m) {
  return m == DownAxisMode::kPerFrame ? "per_frame" : "anchor_frame";
}

inline DownAxisMode down_axis_from_string(const std::string& s) {
  if (s == "per_frame") return DownAxisMode::kPerFrame;
  if (s == "anchor_frame") return DownAxisMode::kAnchorFrame;
  throw InvariantError("labels.down_axis must be per_frame or anchor_frame, got '" +
                       s + "'");
}

struct EvalConfig {
  std::size_t min_lanes = 4;
  double horizon_s = 5.0;
  bool pooled = false;
  // Camera height in map units; the GT ribbon is width_factor times this.
  double camera_height = 1.5;
};

struct PipelineConfig {
  RoiSpec roi;
  double d_max = 1.0;
  std::size_t min_local_points = 10;
  double max_field_angle_deg = kDefaultMaxFieldAngleDeg;
  TheilSenOptions theil_sen;
  int horizon_frames = 50;
  double width_factor = 1.5;
  double null_displacement_threshold = 1e-4;
  DownAxisMode down_axis = DownAxisMode::kPerFrame;
  int max_subdivision = 4;
  std::optional<double> h_cam;  // skips estimation in gen-masks when set
  LossConfig loss;
  EvalConfig eval;

  void validate() const {
    roi.validate();
    if (!(d_max > 0.0)) throw InvariantError("height.d_max must be > 0");
    if (min_local_points < 2) throw InvariantError("height.min_local_points must be >= 2");
    if (!(max_field_angle_deg > 0.0 && max_field_angle_deg < 90.0)) {
      throw InvariantError("height.max_field_angle_deg must lie in (0, 90)");
    }
    if (theil_sen.sampled_pairs == 0) {
      throw InvariantError("height.theil_sen_sampled_pairs must be > 0");
    }
    if (horizon_frames < 1) throw InvariantError("labels.horizon_frames must be >= 1");
    if (!(width_factor > 0.0)) throw InvariantError("labels.width_factor must be > 0");
    if (!(null_displacement_threshold > 0.0)) {
      throw InvariantError("labels.null_displacement_threshold must be > 0");
    }
    if (max_subdivision < 0) throw InvariantError("labels.max_subdivision must be >= 0");
    if (h_cam && !(*h_cam > 0.0)) throw InvariantError("labels.h_cam must be > 0");
    loss.validate();
    if (eval.min_lanes < 1) throw InvariantError("eval.min_lanes must be >= 1");
    if (!(eval.horizon_s > 0.0)) throw InvariantError("eval.horizon_s must be > 0");
    if (!(eval.camera_height > 0.0)) throw InvariantError("eval.camera_height must be > 0");
  }

  HeightOptions height_options(unsigned jobs) const {
    HeightOptions o;
    o.roi = roi;
    o.d_max = d_max;
    o.min_local_points = min_local_points;
    o.max_field_angle_deg = max_field_angle_deg;
    o.theil_sen = theil_sen;
    o.jobs = jobs;
    return o;
  }

  LabelOptions label_options() const {
    LabelOptions o;
    o.horizon_frames = horizon_frames;
    o.width_factor = width_factor;
    o.null_displacement_threshold = null_displacement_threshold;
    o.down_axis = down_axis;
    o.ribbon.max_field_angle_deg = max_field_angle_deg;
    o.ribbon.max_subdivision = max_subdivision;
    return o;
  }

  EvalOptions eval_options(unsigned jobs) const {
    return {eval.min_lanes, eval.pooled, jobs};
  }
};

// Echo of every setting that can influence results. Worker count is left
// out on purpose: it never changes outputs.
inline nlohmann::json to_json(const PipelineConfig& c) {
  nlohmann::json j;
  j["roi"] = {{"u_min_frac", c.roi.u_min_frac},
              {"u_max_frac", c.roi.u_max_frac},
              {"v_min_frac", c.roi.v_min_frac}};
  j["height"] = {{"d_max", c.d_max},
                 {"min_local_points", c.min_local_points},
                 {"max_field_angle_deg", c.max_field_angle_deg},
                 {"theil_sen_exact_limit", c.theil_sen.exact_limit},
                 {"theil_sen_sampled_pairs", c.theil_sen.sampled_pairs},
                 {"theil_sen_seed", c.theil_sen.seed}};
  j["labels"] = {{"horizon_frames", c.horizon_frames},
                 {"width_factor", c.width_factor},
                 {"null_displacement_threshold", c.null_displacement_threshold},
                 {"down_axis", to_string(c.down_axis)},
                 {"max_subdivision", c.max_subdivision},
                 {"h_cam", c.h_cam ? nlohmann::json(*c.h_cam) : nlohmann::json()}};
  j["loss"] = {{"epsilon", c.loss.epsilon},
               {"clip_floor", c.loss.clip_floor},
               {"offset_c", c.loss.offset_c}};
  j["eval"] = {{"min_lanes", c.eval.min_lanes},
               {"horizon_s", c.eval.horizon_s},
               {"pooled", c.eval.pooled},
               {"camera_height", c.eval.camera_height}};
  return j;
}

}  // namespace ghost

#pragma once

// TOML config files and their one-to-one command-line overrides. Each key
// `section.name` in the file is also accepted as `--section.name VALUE`;
// flags win over the file, the file wins over built-in defaults.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <toml.hpp>

#include "ghost/config.hpp"
#include "ghost/error.hpp"

namespace ghost::cli {

class ConfigBinder {
 public:
  ConfigBinder() { bind_all(); }

  // Registers --section.name for every key on `app`.
  void add_flags(CLI::App& app) {
    for (auto& k : keys_) {
      app.add_option("--" + k.name, k.flag, k.help)->group("Config overrides");
    }
  }

  // Defaults, then `file` if given, then any flags seen on the command line.
  PipelineConfig resolve(const std::optional<std::filesystem::path>& file) {
    PipelineConfig cfg;
    staging_ = {};
    for (auto& k : keys_) k.target = &cfg;
    if (file) load_toml(*file);
    for (auto& k : keys_) {
      if (!k.flag.empty()) k.from_string(cfg, k.flag, "--" + k.name);
    }
    cfg.down_axis = down_axis_from_string(staging_.down_axis.value_or(to_string(cfg.down_axis)));
    cfg.validate();
    return cfg;
  }

  std::vector<std::string> key_names() const {
    std::vector<std::string> out;
    for (const auto& k : keys_) out.push_back(k.name);
    return out;
  }

 private:
  struct Staging {
    std::optional<std::string> down_axis;
  };

  using FromToml = std::function<void(PipelineConfig&, const toml::node&, const std::string&)>;
  using FromString =
      std::function<void(PipelineConfig&, const std::string&, const std::string&)>;

  struct Key {
    std::string name;
    std::string help;
    FromToml from_toml;
    FromString from_string;
    std::string flag;
    PipelineConfig* target = nullptr;
  };

  struct KeySpec {
    std::string name;
    std::string help;
    FromToml from_toml;
    FromString from_string;
  };

  void add_key(KeySpec spec) {
    Key k;
    k.name = std::move(spec.name);
    k.help = std::move(spec.help);
    k.from_toml = std::move(spec.from_toml);
    k.from_string = std::move(spec.from_string);
    keys_.push_back(std::move(k));
  }

  static double parse_double(const std::string& s, const std::string& where) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw InvariantError(where + ": expected a number, got '" + s + "'");
  }

  static std::int64_t parse_int(const std::string& s, const std::string& where) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(s, &used, 0);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw InvariantError(where + ": expected an integer, got '" + s + "'");
  }

  static bool parse_bool(const std::string& s, const std::string& where) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw InvariantError(where + ": expected true or false, got '" + s + "'");
  }

  void real(const std::string& name, std::function<double&(PipelineConfig&)> ref,
            const std::string& help) {
    add_key({name, help,
                     [ref](PipelineConfig& c, const toml::node& n, const std::string& where) {
                       const auto v = n.value<double>();
                       if (!v) throw InvariantError(where + ": expected a number");
                       ref(c) = *v;
                     },
                     [ref](PipelineConfig& c, const std::string& s, const std::string& where) {
                       ref(c) = parse_double(s, where);
                     }});
  }

  template <typename Int>
  void integer(const std::string& name, std::function<Int&(PipelineConfig&)> ref,
               const std::string& help) {
    auto set = [ref](PipelineConfig& c, std::int64_t v, const std::string& where) {
      if (v < static_cast<std::int64_t>(std::numeric_limits<Int>::min()) ||
          (v > 0 && static_cast<std::uint64_t>(v) > std::numeric_limits<Int>::max())) {
        throw InvariantError(where + ": value out of range");
      }
      ref(c) = static_cast<Int>(v);
    };
    add_key({name, help,
                     [set](PipelineConfig& c, const toml::node& n, const std::string& where) {
                       if (!n.is_integer()) throw InvariantError(where + ": expected an integer");
                       set(c, *n.value<std::int64_t>(), where);
                     },
                     [set](PipelineConfig& c, const std::string& s, const std::string& where) {
                       set(c, parse_int(s, where), where);
                     }});
  }

  void bind_all() {
    using C = PipelineConfig;
    auto dbl = [this](const std::string& name, std::function<double&(C&)> ref,
                      const std::string& help) { real(name, std::move(ref), help); };
    dbl("roi.u_min_frac", [](C& c) -> double& { return c.roi.u_min_frac; },
        "left edge of the ground ROI as a fraction of width");
    dbl("roi.u_max_frac", [](C& c) -> double& { return c.roi.u_max_frac; },
        "right edge of the ground ROI as a fraction of width");
    dbl("roi.v_min_frac", [](C& c) -> double& { return c.roi.v_min_frac; },
        "top edge of the ground ROI as a fraction of height");
    dbl("height.d_max", [](C& c) -> double& { return c.d_max; },
        "ground-point search radius around each camera (SfM units)");
    integer<std::size_t>("height.min_local_points",
                         [](C& c) -> std::size_t& { return c.min_local_points; },
                         "fewest local ground points for a per-frame fit");
    dbl("height.max_field_angle_deg", [](C& c) -> double& { return c.max_field_angle_deg; },
        "projection cutoff angle from the optical axis");
    integer<std::size_t>("height.theil_sen_exact_limit",
                         [](C& c) -> std::size_t& { return c.theil_sen.exact_limit; },
                         "largest sample count fitted with all pairs");
    integer<std::size_t>("height.theil_sen_sampled_pairs",
                         [](C& c) -> std::size_t& { return c.theil_sen.sampled_pairs; },
                         "pairs drawn above the exact limit");
    integer<std::uint64_t>("height.theil_sen_seed",
                           [](C& c) -> std::uint64_t& { return c.theil_sen.seed; },
                           "pair-sampling seed");
    integer<int>("labels.horizon_frames", [](C& c) -> int& { return c.horizon_frames; },
                 "future frames per trajectory");
    dbl("labels.width_factor", [](C& c) -> double& { return c.width_factor; },
        "ribbon width in camera heights");
    dbl("labels.null_displacement_threshold",
        [](C& c) -> double& { return c.null_displacement_threshold; },
        "motion below this is stationary (SfM units)");
    add_key({"labels.down_axis", "per_frame or anchor_frame",
                     [this](C&, const toml::node& n, const std::string& where) {
                       const auto v = n.value<std::string>();
                       if (!v) throw InvariantError(where + ": expected a string");
                       staging_.down_axis = *v;
                     },
                     [this](C&, const std::string& s, const std::string&) {
                       staging_.down_axis = s;
                     }});
    integer<int>("labels.max_subdivision", [](C& c) -> int& { return c.max_subdivision; },
                 "halvings of a ribbon segment with an unprojectable corner");
    add_key({"labels.h_cam", "fixed camera height; skips estimation",
                     [](C& c, const toml::node& n, const std::string& where) {
                       const auto v = n.value<double>();
                       if (!v) throw InvariantError(where + ": expected a number");
                       c.h_cam = *v;
                     },
                     [](C& c, const std::string& s, const std::string& where) {
                       c.h_cam = parse_double(s, where);
                     }});
    dbl("loss.epsilon", [](C& c) -> double& { return c.loss.epsilon; }, "label smoothing");
    dbl("loss.clip_floor", [](C& c) -> double& { return c.loss.clip_floor; },
        "lower clip of log sigmoid");
    dbl("loss.offset_c", [](C& c) -> double& { return c.loss.offset_c; }, "constant offset");
    integer<std::size_t>("eval.min_lanes", [](C& c) -> std::size_t& { return c.eval.min_lanes; },
                         "lanes for a frame to count as multi-lane");
    dbl("eval.horizon_s", [](C& c) -> double& { return c.eval.horizon_s; },
        "future horizon in seconds");
    add_key({"eval.pooled", "pool pixels over all frames instead of averaging",
                     [](C& c, const toml::node& n, const std::string& where) {
                       const auto v = n.value<bool>();
                       if (!n.is_boolean() || !v) throw InvariantError(where + ": expected a boolean");
                       c.eval.pooled = *v;
                     },
                     [](C& c, const std::string& s, const std::string& where) {
                       c.eval.pooled = parse_bool(s, where);
                     }});
    dbl("eval.camera_height", [](C& c) -> double& { return c.eval.camera_height; },
        "camera height in map units for ground-truth ribbons");
  }

  void load_toml(const std::filesystem::path& file) {
    toml::table tbl;
    try {
      tbl = toml::parse_file(file.string());
    } catch (const toml::parse_error& e) {
      const auto& src = e.source();
      throw InvariantError(file.string() + ":" + std::to_string(src.begin.line) + ": " +
                           std::string(e.description()));
    }
    std::map<std::string, Key*> by_name;
    for (auto& k : keys_) by_name[k.name] = &k;
    for (const auto& [section, node] : tbl) {
      const auto* sub = node.as_table();
      if (!sub) {
        throw InvariantError(file.string() + ": top-level key '" +
                             std::string(section.str()) + "' must be a table");
      }
      for (const auto& [key, value] : *sub) {
        const std::string name = std::string(section.str()) + "." + std::string(key.str());
        const auto it = by_name.find(name);
        if (it == by_name.end()) {
          throw InvariantError(file.string() + ": unknown config key '" + name + "'");
        }
        it->second->from_toml(*it->second->target, value, file.string() + ": " + name);
      }
    }
  }

  std::vector<Key> keys_;
  Staging staging_;
};

}  // namespace ghost::cli

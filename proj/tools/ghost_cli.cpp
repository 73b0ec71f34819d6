// ghost: camera-height estimation, trajectory-mask generation and Soft IoU
// evaluation from the command line.
//
// Exit codes: 0 success, 1 other failure, 2 unreadable/invalid input (model,
// config, usage), 3 no frame with a valid height fit, 4 frame sets of ground
// truth and predictions differ.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "config_loader.hpp"
#include "ghost/ghost.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit : int {
  kOk = 0,
  kFailure = 1,
  kBadInput = 2,
  kNoValidFrames = 3,
  kFrameMismatch = 4,
};

class FrameMismatch : public ghost::Error {
 public:
  using ghost::Error::Error;
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ghost::Error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw ghost::Error("write failed: " + path.string());
}

unsigned resolve_jobs(std::optional<unsigned> flag) {
  if (flag) return *flag == 0 ? ghost::default_jobs() : *flag;
  if (const char* env = std::getenv("GHOST_JOBS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    spdlog::warn("ignoring GHOST_JOBS='{}'", env);
  }
  return ghost::default_jobs();
}

ghost::SparseReconstruction load_model(const fs::path& dir, ghost::ModelFormat format) {
  ghost::SparseReconstruction recon;
  try {
    recon = ghost::parse_model(dir, format, [](const std::string& w) { spdlog::warn("{}", w); });
  } catch (const ghost::ParseError&) {
    throw;
  } catch (const ghost::Error& e) {
    throw ghost::ParseError(dir.string(), 0, e.what());
  }
  if (recon.frames.empty()) throw ghost::ParseError(dir.string(), 0, "model has no registered frames");
  spdlog::info("{}: {} camera(s), {} frame(s), {} point(s)", dir.string(), recon.cameras.size(),
               recon.frames.size(), recon.points.size());
  return recon;
}

ghost::ModelFormat format_from_string(const std::string& s) {
  if (s == "auto") return ghost::ModelFormat::kAuto;
  if (s == "bin" || s == "binary") return ghost::ModelFormat::kBinary;
  if (s == "txt" || s == "text") return ghost::ModelFormat::kText;
  throw ghost::InvariantError("unknown model format '" + s + "'");
}

std::vector<ghost::synth::FrameRange> parse_ranges(const std::vector<std::string>& specs) {
  std::vector<ghost::synth::FrameRange> out;
  for (const auto& s : specs) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) {
      throw ghost::InvariantError("frame range '" + s + "' must be FIRST:COUNT");
    }
    out.push_back({std::stoi(s.substr(0, colon)), std::stoi(s.substr(colon + 1))});
  }
  return out;
}

// stem -> mask file, for every .png/.pfm directly inside `dir`.
std::map<std::string, fs::path> list_masks(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ghost::Error(dir.string() + " is not a directory");
  std::map<std::string, fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    auto ext = e.path().extension().string();
    for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (ext != ".png" && ext != ".pfm") continue;
    const auto stem = e.path().stem().string();
    if (!out.emplace(stem, e.path()).second) {
      throw ghost::Error(dir.string() + ": more than one mask for frame '" + stem + "'");
    }
  }
  return out;
}

void check_frame_sets(const std::vector<std::string>& gt_ids,
                      const std::map<std::string, fs::path>& preds) {
  std::set<std::string> gt(gt_ids.begin(), gt_ids.end());
  std::vector<std::string> missing, extra;
  for (const auto& id : gt) {
    if (!preds.count(id)) missing.push_back(id);
  }
  for (const auto& [id, p] : preds) {
    if (!gt.count(id)) extra.push_back(id);
  }
  if (missing.empty() && extra.empty()) return;
  std::string msg = "frame sets differ:";
  if (!missing.empty()) msg += " " + std::to_string(missing.size()) + " without prediction (first '" + missing.front() + "')";
  if (!extra.empty()) msg += " " + std::to_string(extra.size()) + " without ground truth (first '" + extra.front() + "')";
  throw FrameMismatch(msg);
}

// ------------------------------------------------------------------ commands

int cmd_parse_model(const fs::path& model, const std::string& format,
                    const std::optional<fs::path>& write_dir, const std::string& write_format) {
  const auto recon = load_model(model, format_from_string(format));
  std::size_t observations = 0;
  for (const auto& [id, f] : recon.frames) observations += f.observations.size();
  json j = {{"cameras", recon.cameras.size()},
            {"frames", recon.frames.size()},
            {"points", recon.points.size()},
            {"observations", observations}};
  if (write_dir) {
    fs::create_directories(*write_dir);
    ghost::write_model(recon, *write_dir, format_from_string(write_format));
    j["written_to"] = write_dir->string();
  }
  std::cout << j.dump(2) << '\n';
  return kOk;
}

ghost::HeightEstimate run_height(const ghost::SparseReconstruction& recon,
                                 const ghost::PipelineConfig& cfg, unsigned jobs) {
  const auto t0 = std::chrono::steady_clock::now();
  auto est = ghost::estimate_camera_height(recon, cfg.height_options(jobs));
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
  spdlog::info("h_cam {:.9g} from {} valid frame(s), ground set {} point(s), {:.2f}s", est.h_cam,
               est.n_valid, est.ground_set_size, dt.count());
  return est;
}

json height_json(const ghost::HeightEstimate& est, std::size_t n_frames) {
  return {{"h_cam", est.h_cam},
          {"n_valid", est.n_valid},
          {"n_frames", n_frames},
          {"mad", est.mad},
          {"ground_set_size", est.ground_set_size}};
}

int cmd_estimate_height(const fs::path& model, const std::optional<fs::path>& out_dir,
                        const ghost::PipelineConfig& cfg, unsigned jobs) {
  const auto recon = load_model(model, ghost::ModelFormat::kAuto);
  const auto est = run_height(recon, cfg, jobs);
  auto j = height_json(est, recon.frames.size());
  std::cout << "h_cam " << json(est.h_cam).dump() << "\nn_valid " << est.n_valid << "\nmad "
            << json(est.mad).dump() << '\n';
  if (out_dir) {
    fs::create_directories(*out_dir);
    ghost::write_height_diagnostics(*out_dir / "height_per_frame.csv", recon, est);
    j["config"] = ghost::to_json(cfg);
    write_json(*out_dir / "height.json", j);
  }
  return kOk;
}

int cmd_gen_masks(const fs::path& model, const fs::path& out_dir, const ghost::PipelineConfig& cfg,
                  unsigned jobs) {
  const auto recon = load_model(model, ghost::ModelFormat::kAuto);
  json height;
  double h_cam = 0.0;
  if (cfg.h_cam) {
    h_cam = *cfg.h_cam;
    height = {{"h_cam", h_cam}, {"source", "config"}};
  } else {
    const auto est = run_height(recon, cfg, jobs);
    h_cam = est.h_cam;
    height = height_json(est, recon.frames.size());
    height["source"] = "estimated";
  }
  fs::create_directories(out_dir);
  const auto stats = ghost::generate_dataset(recon, h_cam, out_dir, cfg.label_options(), jobs);
  std::cout << "frames " << stats.n_frames << "\nvalid " << stats.n_valid << "\nstationary "
            << stats.n_stationary << "\nnull " << stats.n_null << '\n';
  json j = {{"n_frames", stats.n_frames},
            {"valid", stats.n_valid},
            {"stationary", stats.n_stationary},
            {"null", stats.n_null},
            {"height", height},
            {"config", ghost::to_json(cfg)}};
  write_json(out_dir / "stats.json", j);
  if (stats.n_null > 0) {
    spdlog::warn("{} null frame(s): moving but without a usable trajectory mask", stats.n_null);
  }
  return kOk;
}

struct EvalArgs {
  std::optional<fs::path> gt_dir;
  std::optional<fs::path> lanes;
  fs::path pred_dir;
  fs::path out_dir;
  std::optional<fs::path> write_gt;
  bool pooled = false;
};

int cmd_eval(const EvalArgs& a, ghost::PipelineConfig cfg, unsigned jobs) {
  if (a.gt_dir.has_value() == a.lanes.has_value()) {
    throw ghost::InvariantError("eval needs exactly one of --gt or --lanes");
  }
  if (a.pooled) cfg.eval.pooled = true;
  const auto preds = list_masks(a.pred_dir);
  std::vector<ghost::EvalFrame> frames;

  if (a.gt_dir) {
    const auto gts = list_masks(*a.gt_dir);
    std::vector<std::string> ids;
    for (const auto& [id, p] : gts) ids.push_back(id);
    check_frame_sets(ids, preds);
    frames.resize(ids.size());
    ghost::parallel_for(ids.size(), jobs, [&](std::size_t i) {
      frames[i].frame_id = ids[i];
      frames[i].gt = ghost::read_mask(gts.at(ids[i]));
      frames[i].pred = ghost::read_mask(preds.at(ids[i]));
    });
  } else {
    auto lane_frames = ghost::load_lane_frames(*a.lanes);
    std::sort(lane_frames.begin(), lane_frames.end(),
              [](const auto& x, const auto& y) { return x.frame_id < y.frame_id; });
    std::vector<std::string> ids;
    for (const auto& f : lane_frames) ids.push_back(f.frame_id);
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
      throw ghost::InvariantError("duplicate frame_id in lane data");
    }
    check_frame_sets(ids, preds);
    if (a.write_gt) fs::create_directories(*a.write_gt);
    frames.resize(ids.size());
    const double width = cfg.width_factor * cfg.eval.camera_height;
    const auto ribbon = cfg.label_options().ribbon;
    ghost::parallel_for(ids.size(), jobs, [&](std::size_t i) {
      const auto& lf = lane_frames[i];
      const double budget = ghost::compute_budget(lf.kinematics(cfg.eval.horizon_s));
      const auto ego = ghost::assign_ego_lane(lf.graph, lf.ego_position);
      const auto reach = ghost::reachable_lanes(lf.graph, ego.lane_id, ego.arc_offset, budget);
      frames[i].frame_id = lf.frame_id;
      frames[i].gt = ghost::rasterize_gt(reach, lf.pose, lf.camera, width, ribbon);
      frames[i].lane_count = reach.lane_count();
      frames[i].pred = ghost::read_mask(preds.at(lf.frame_id));
      if (a.write_gt) ghost::write_png(*a.write_gt / (lf.frame_id + ".png"), frames[i].gt);
    });
  }

  const auto report = ghost::evaluate(frames, cfg.eval_options(jobs));
  fs::create_directories(a.out_dir);
  ghost::write_per_frame_csv(a.out_dir / "per_frame.csv", report);
  auto j = ghost::report_json(report);
  j["gt_source"] = a.gt_dir ? "masks" : "lane_graph";
  j["config"] = ghost::to_json(cfg);
  write_json(a.out_dir / "report.json", j);
  std::cout << "overall_soft_iou " << json(report.overall).dump() << "\nmulti_lane_soft_iou "
            << (report.multi_lane ? json(*report.multi_lane).dump() : "null") << "\nframes "
            << report.frames.size() << "\nmulti_lane_frames " << report.n_multi_lane << '\n';
  return kOk;
}

int cmd_soft_iou(const fs::path& gt, const fs::path& pred) {
  const double v = ghost::soft_iou(ghost::read_mask(gt), ghost::read_mask(pred));
  std::cout << json(v).dump() << '\n';
  return kOk;
}

struct SynthArgs {
  std::string kind = "straight";
  fs::path out_dir;
  std::string format = "bin";
  ghost::synth::SceneSpec spec;
  std::vector<std::string> gaps, stationary;
  ghost::synth::LaneSceneSizes lanes;
};

int cmd_synth(SynthArgs a) {
  namespace sy = ghost::synth;
  fs::create_directories(a.out_dir);
  if (a.kind == "chain" || a.kind == "diamond" || a.kind == "grid") {
    const auto scene = sy::generate_lane_scene(sy::lane_scene_kind_from_string(a.kind), a.lanes,
                                               a.spec.rng_seed);
    const auto frame = sy::to_lane_frame(scene, a.kind + "_" + std::to_string(a.spec.rng_seed));
    write_json(a.out_dir / "lanes.json", ghost::to_json(frame));
    write_json(a.out_dir / "expected.json", sy::to_json(scene));
    std::cout << "lanes " << scene.graph.size() << "\nexpected_reachable " << scene.expected.size()
              << '\n';
    return kOk;
  }
  a.spec.kind = sy::trajectory_kind_from_string(a.kind);
  a.spec.gaps = parse_ranges(a.gaps);
  a.spec.stationary = parse_ranges(a.stationary);
  const auto scene = sy::generate_scene(a.spec);
  ghost::write_model(scene.recon, a.out_dir, format_from_string(a.format));
  write_json(a.out_dir / "ground_truth.json", sy::to_json(scene, a.spec));
  std::cout << "frames " << scene.recon.frames.size() << "\npoints " << scene.recon.points.size()
            << "\nexpected_valid " << scene.truth.count(ghost::FrameStatus::kValid)
            << "\nexpected_stationary " << scene.truth.count(ghost::FrameStatus::kStationary)
            << "\nexpected_null " << scene.truth.count(ghost::FrameStatus::kNull) << '\n';
  return kOk;
}

// Randomized checks of the loss kernel under the resolved config.
int cmd_loss_check(const ghost::PipelineConfig& cfg, std::size_t samples, std::uint64_t seed) {
  const auto& lc = cfg.loss;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> wide(-60.0, 60.0);
  bool ok = true;
  auto report = [&](const char* name, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS " : "FAIL ") << name << "  " << detail << '\n';
    ok = ok && pass;
  };

  double min_loss = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples; ++i) {
    const double x = wide(rng);
    min_loss = std::min({min_loss, ghost::asym_loss(x, 0, lc), ghost::asym_loss(x, 1, lc)});
  }
  report("nonnegative", min_loss >= 0.0, "min " + json(min_loss).dump());

  // Central differences on the loss without its constant offset.
  ghost::LossConfig no_offset = lc;
  no_offset.offset_c = 0.0;
  const double h = 1e-6;
  double worst = 0.0;
  const std::size_t n_grad = std::max<std::size_t>(samples / 100, 1);
  for (std::size_t i = 0; i < n_grad; ++i) {
    const double x = wide(rng);
    const int y = static_cast<int>(rng() & 1u);
    if (std::abs(ghost::log_sigmoid(x) - lc.clip_floor) < 1e-3) continue;  // kink
    const double g = ghost::asym_loss_grad(x, y, lc);
    const double fd =
        (ghost::asym_loss(x + h, y, no_offset) - ghost::asym_loss(x - h, y, no_offset)) / (2 * h);
    const double scale = std::max(std::abs(g), std::abs(fd));
    if (scale > 0.0) worst = std::max(worst, std::abs(g - fd) / scale);
  }
  report("gradient", worst <= 1e-6, "max relative error " + json(worst).dump());

  double ratio_err = 0.0;
  for (std::size_t i = 0; i < n_grad; ++i) {
    const double x = wide(rng);
    if (ghost::is_clipped(x, lc)) continue;
    const double g1 = ghost::asym_loss_grad(x, 1, lc);
    const double g0 = ghost::asym_loss_grad(x, 0, lc);
    if (g0 == 0.0) continue;
    const double want = (1.0 - lc.epsilon) / lc.epsilon;
    ratio_err = std::max(ratio_err, std::abs(std::abs(g1 / g0) - want) / want);
  }
  report("weight_ratio", ratio_err <= 1e-14, "max relative deviation " + json(ratio_err).dump());

  const double x_clip = lc.clip_floor - 5.0;
  report("clipped_gradient_zero",
         ghost::asym_loss_grad(x_clip, 0, lc) == 0.0 && ghost::asym_loss_grad(x_clip, 1, lc) == 0.0,
         "x = " + json(x_clip).dump());
  return ok ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_st("ghost");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"Self-supervised trajectory masks from monocular SfM reconstructions"};
  app.require_subcommand(1);
  app.fallthrough();
  std::optional<unsigned> jobs_flag;
  std::optional<fs::path> config_path;
  std::string log_level = "info";
  app.add_option("-j,--jobs", jobs_flag, "worker threads (0 = all cores; env GHOST_JOBS)");
  app.add_option("-c,--config", config_path, "TOML config file")->check(CLI::ExistingFile);
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off");
  ghost::cli::ConfigBinder binder;
  binder.add_flags(app);

  fs::path model_dir, out_dir;
  std::optional<fs::path> opt_out;

  auto* parse_cmd = app.add_subcommand("parse-model", "parse and validate a COLMAP model");
  std::string parse_format = "auto", write_format = "bin";
  std::optional<fs::path> write_dir;
  parse_cmd->add_option("model", model_dir, "model directory")->required();
  parse_cmd->add_option("--format", parse_format, "auto, bin or txt");
  parse_cmd->add_option("--write", write_dir, "re-serialize the model into this directory");
  parse_cmd->add_option("--write-format", write_format, "bin or txt");

  auto* height_cmd = app.add_subcommand("estimate-height", "estimate the camera height");
  height_cmd->add_option("model", model_dir, "model directory")->required();
  height_cmd->add_option("-o,--out", opt_out, "directory for height.json and per-frame CSV");

  auto* masks_cmd = app.add_subcommand("gen-masks", "write trajectory masks and frame manifest");
  masks_cmd->add_option("model", model_dir, "model directory")->required();
  masks_cmd->add_option("-o,--out", out_dir, "output directory")->required();

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Soft IoU of predictions against ground truth");
  eval_cmd->add_option("--gt", eval_args.gt_dir, "directory of ground-truth masks");
  eval_cmd->add_option("--lanes", eval_args.lanes, "lane-graph JSON/JSONL file or directory");
  eval_cmd->add_option("--pred", eval_args.pred_dir, "directory of predicted masks")->required();
  eval_cmd->add_option("-o,--out", eval_args.out_dir, "output directory")->required();
  eval_cmd->add_option("--write-gt", eval_args.write_gt, "also save rasterized lane ground truth");
  eval_cmd->add_flag("--pooled", eval_args.pooled, "pool pixels over all frames");

  fs::path iou_gt, iou_pred;
  auto* iou_cmd = app.add_subcommand("soft-iou", "Soft IoU of two mask files");
  iou_cmd->add_option("gt", iou_gt)->required()->check(CLI::ExistingFile);
  iou_cmd->add_option("pred", iou_pred)->required()->check(CLI::ExistingFile);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic scene fixture");
  synth_cmd->add_option("kind", synth.kind, "straight, arc, lane_change, stationary, chain, diamond, grid")
      ->required();
  synth_cmd->add_option("-o,--out", synth.out_dir, "output directory")->required();
  synth_cmd->add_option("--format", synth.format, "bin or txt");
  synth_cmd->add_option("--seed", synth.spec.rng_seed);
  synth_cmd->add_option("--frames", synth.spec.n_frames);
  synth_cmd->add_option("--height", synth.spec.true_height);
  synth_cmd->add_option("--noise", synth.spec.plane_noise_sigma, "plane noise sigma");
  synth_cmd->add_option("--outliers", synth.spec.outlier_fraction, "outlier fraction");
  synth_cmd->add_option("--points-per-frame", synth.spec.points_per_frame);
  synth_cmd->add_option("--step", synth.spec.step, "travel per frame");
  synth_cmd->add_option("--gap", synth.gaps, "unregistered frames FIRST:COUNT")->take_all();
  synth_cmd->add_option("--stationary", synth.stationary, "motionless frames FIRST:COUNT")
      ->take_all();
  synth_cmd->add_option("--budget", synth.lanes.budget, "lane scenes: distance budget");
  synth_cmd->add_option("--lane-length", synth.lanes.lane_length);

  std::size_t loss_samples = 1000000;
  std::uint64_t loss_seed = 1;
  auto* loss_cmd = app.add_subcommand("loss-check", "randomized checks of the loss kernel");
  loss_cmd->add_option("--samples", loss_samples);
  loss_cmd->add_option("--seed", loss_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    const auto cfg = binder.resolve(config_path);
    const unsigned jobs = resolve_jobs(jobs_flag);
    spdlog::debug("jobs {}", jobs);
    if (*parse_cmd) return cmd_parse_model(model_dir, parse_format, write_dir, write_format);
    if (*height_cmd) return cmd_estimate_height(model_dir, opt_out, cfg, jobs);
    if (*masks_cmd) return cmd_gen_masks(model_dir, out_dir, cfg, jobs);
    if (*eval_cmd) return cmd_eval(eval_args, cfg, jobs);
    if (*iou_cmd) return cmd_soft_iou(iou_gt, iou_pred);
    if (*synth_cmd) return cmd_synth(synth);
    if (*loss_cmd) return cmd_loss_check(cfg, loss_samples, loss_seed);
  } catch (const ghost::NoValidFramesError& e) {
    spdlog::error("{}", e.what());
    return kNoValidFrames;
  } catch (const FrameMismatch& e) {
    spdlog::error("{}", e.what());
    return kFrameMismatch;
  } catch (const ghost::ParseError& e) {
    spdlog::error("{}", e.what());
    return kBadInput;
  } catch (const ghost::InvariantError& e) {
    spdlog::error("{}", e.what());
    return kBadInput;
  } catch (const ghost::SchemaError& e) {
    spdlog::error("{}", e.what());
    return kBadInput;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kFailure;
  }
  return kFailure;
}

// Acceptance checks for the whole toolkit. Prints one PASS/FAIL line per
// criterion and exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ghost/ghost.hpp"
#include "test_support.hpp"

using namespace ghost;
namespace fs = std::filesystem;
using nlohmann::json;
using testing::TempDir;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) { return json(v).dump(); }

// Runs the CLI with stdout and stderr captured to files in `dir`.
int run_cli(const std::string& args, const fs::path& dir, const std::string& tag = "cli") {
  const std::string cmd = std::string("\"") + GHOST_CLI_PATH + "\" " + args + " >\"" +
                          (dir / (tag + ".out")).string() + "\" 2>\"" +
                          (dir / (tag + ".err")).string() + "\"";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

// Relative paths and contents of every regular file under `root`.
std::vector<std::pair<std::string, std::string>> snapshot(const fs::path& root) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) {
      out.emplace_back(fs::relative(e.path(), root).generic_string(),
                       testing::read_bytes(e.path()));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ------------------------------------------------------------------ 1

Outcome height_recovery() {
  Outcome o;
  TempDir dir("acc1");
  const double h = 0.015;
  const std::string noisy = "synth straight --frames 100 --height 0.015 --noise " +
                            fmt(0.05 * h) + " --outliers 0.2 --seed 7 -o \"" +
                            (dir / "noisy").string() + "\"";
  o.require(run_cli(noisy, dir.path(), "synth") == 0, "synth failed");
  const auto t0 = std::chrono::steady_clock::now();
  const int rc = run_cli("-j 1 estimate-height \"" + (dir / "noisy").string() + "\" -o \"" +
                             (dir / "h").string() + "\"",
                         dir.path(), "height");
  const double dt = seconds_since(t0);
  o.require(rc == 0, "estimate-height exit " + std::to_string(rc));
  if (!o.pass) return o;
  const double got = read_json(dir / "h" / "height.json")["h_cam"].get<double>();
  const double err = testing::rel_err(got, h);
  o.require(err <= 0.02, "noisy relative error " + fmt(err));
  o.require(dt < 10.0, "estimate-height took " + fmt(dt) + " s");

  synth::SceneSpec clean;
  clean.true_height = h;
  const auto sc = synth::generate_scene(clean);
  const double clean_err = testing::rel_err(estimate_camera_height(sc.recon).h_cam, h);
  o.require(clean_err <= 1e-6, "noiseless relative error " + fmt(clean_err));
  if (o.pass) {
    o.detail = "noisy err " + fmt(err) + " in " + fmt(dt) + " s, noiseless err " + fmt(clean_err);
  }
  return o;
}

// ------------------------------------------------------------------ 2

Outcome theil_sen_robustness() {
  Outcome o;
  double worst_slope = 0.0, worst_icpt = 0.0;
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    std::mt19937_64 rng(1000 + trial);
    std::uniform_real_distribution<double> z(0.5, 10.0), unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 0.01);
    const double slope = 0.2 + 0.6 * unit(rng);
    const double icpt = 1.0 + unit(rng);
    std::vector<ZY> pts;
    for (int i = 0; i < 1000; ++i) {
      const double zi = z(rng);
      double yi = icpt + slope * zi + noise(rng);
      if (i % 4 == 0) yi += (unit(rng) < 0.5 ? -1.0 : 1.0) * (2.0 + 20.0 * unit(rng));
      pts.push_back({zi, yi});
    }
    std::shuffle(pts.begin(), pts.end(), rng);
    const auto fit = theil_sen(pts);
    worst_slope = std::max(worst_slope, testing::rel_err(fit.slope, slope));
    worst_icpt = std::max(worst_icpt, testing::rel_err(fit.intercept, icpt));
  }
  o.require(worst_slope <= 0.02, "slope error " + fmt(worst_slope));
  o.require(worst_icpt <= 0.02, "intercept error " + fmt(worst_icpt));

  // Exact mode: any permutation gives the identical fit.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 10 && o.pass; ++trial) {
    std::vector<ZY> pts(300);
    for (auto& p : pts) p = {u(rng), u(rng)};
    const auto base = theil_sen(pts);
    for (int k = 0; k < 5; ++k) {
      std::shuffle(pts.begin(), pts.end(), rng);
      const auto fit = theil_sen(pts);
      o.require(fit.slope == base.slope && fit.intercept == base.intercept,
                "exact mode depends on input order");
    }
  }
  if (o.pass) o.detail = "max slope err " + fmt(worst_slope) + ", intercept err " + fmt(worst_icpt);
  return o;
}

// ------------------------------------------------------------------ 3

Outcome scale_agnosticism() {
  Outcome o;
  synth::SceneSpec spec;
  spec.plane_noise_sigma = 0.05 * spec.true_height;
  spec.outlier_fraction = 0.2;
  spec.rng_seed = 3;
  const auto base = synth::generate_scene(spec);
  const auto h1 = estimate_camera_height(base.recon).h_cam;
  TempDir ref_dir("acc3");
  const auto ref = generate_dataset(base.recon, h1, ref_dir.path());
  const auto ref_files = snapshot(ref_dir / "masks");
  double worst = 0.0;
  for (const double s : {1e-2, 1.0, 1e3}) {
    const auto recon = synth::scaled(base.recon, s);
    HeightOptions hopts;
    hopts.d_max = s;
    const double hs = estimate_camera_height(recon, hopts).h_cam;
    const double err = testing::rel_err(hs, s * h1);
    worst = std::max(worst, err);
    o.require(err <= 1e-9, "s = " + fmt(s) + ": h_cam relative error " + fmt(err));
    LabelOptions lopts;
    lopts.null_displacement_threshold = 1e-4 * s;
    TempDir out("acc3");
    const auto stats = generate_dataset(recon, hs, out.path(), lopts);
    o.require(stats.n_valid == ref.n_valid && stats.n_null == ref.n_null,
              "s = " + fmt(s) + ": status counts differ");
    o.require(snapshot(out / "masks") == ref_files, "s = " + fmt(s) + ": masks differ");
  }
  if (o.pass) {
    o.detail = std::to_string(ref_files.size()) + " masks identical, max h err " + fmt(worst);
  }
  return o;
}

// ------------------------------------------------------------------ 4

Outcome loss_kernel() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const LossConfig cfg;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> near(-19.5, 19.5), wide(-100.0, 100.0);
  const double h = 1e-5;
  double worst_fd = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double x = near(rng);
    const int y = i & 1;
    const double g = asym_loss_grad(x, y, cfg);
    const double fd = (asym_loss(x + h, y, cfg) - asym_loss(x - h, y, cfg)) / (2 * h);
    worst_fd = std::max(worst_fd, std::abs(g - fd) / std::max(1.0, std::abs(g)));
  }
  o.require(worst_fd <= 1e-6, "finite-difference mismatch " + fmt(worst_fd));

  double min_loss = 1e300;
  for (int i = 0; i < 1000000; ++i) {
    const double x = wide(rng);
    min_loss = std::min({min_loss, asym_loss(x, 0, cfg), asym_loss(x, 1, cfg)});
  }
  o.require(min_loss >= 0.0, "negative loss " + fmt(min_loss));

  const double want = (1.0 - cfg.epsilon) / cfg.epsilon;
  o.require(want == 9.0, "(1 - eps) / eps = " + fmt(want));
  double worst_ratio = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double x = near(rng);
    const double r = -asym_loss_grad(x, 1, cfg) / asym_loss_grad(x, 0, cfg);
    worst_ratio = std::max(worst_ratio, std::abs(r - 9.0) / 9.0);
  }
  o.require(worst_ratio <= 4 * std::numeric_limits<double>::epsilon(),
            "gradient ratio deviates from 9 by " + fmt(worst_ratio));
  const double dt = seconds_since(t0);
  o.require(dt < 5.0, "took " + fmt(dt) + " s");
  if (o.pass) {
    o.detail = "fd err " + fmt(worst_fd) + ", min loss " + fmt(min_loss) + ", ratio dev " +
               fmt(worst_ratio) + ", " + fmt(dt) + " s";
  }
  return o;
}

// ------------------------------------------------------------------ 5

Outcome soft_iou_oracle() {
  Outcome o;
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (int trial = 0; trial < 100; ++trial) {
    TrajectoryMask a(64, 64), b(64, 64);
    const bool binary = trial % 2 == 1;
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        a(x, y) = binary ? static_cast<float>(u(rng) < 0.3f) : u(rng);
        b(x, y) = binary ? static_cast<float>(u(rng) < 0.3f) : u(rng);
      }
    }
    double mn = 0.0, mx = 0.0;
    std::size_t inter = 0, uni = 0;
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        mn += std::min<double>(a(x, y), b(x, y));
        mx += std::max<double>(a(x, y), b(x, y));
        inter += a(x, y) > 0 && b(x, y) > 0;
        uni += a(x, y) > 0 || b(x, y) > 0;
      }
    }
    const double got = soft_iou(a, b);
    o.require(got == mn / mx, "differs from per-pixel sums on trial " + std::to_string(trial));
    if (binary) {
      o.require(got == static_cast<double>(inter) / static_cast<double>(uni),
                "differs from set IoU on trial " + std::to_string(trial));
    }
    o.require(soft_iou(a, a) == 1.0, "identity is not 1");
  }
  TrajectoryMask left(64, 64), right(64, 64);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 32; ++x) {
      left(x, y) = std::max(u(rng), 0.01f);
      right(x + 32, y) = 1.0f;
    }
  }
  o.require(soft_iou(left, right) == 0.0, "disjoint is not 0");
  o.require(soft_iou(TrajectoryMask(64, 64), TrajectoryMask(64, 64)) == 1.0, "empty pair is not 1");
  if (o.pass) o.detail = "100 mask pairs";
  return o;
}

// ------------------------------------------------------------------ 6

bool same_reach(const ReachableSet& got, const std::vector<synth::ExpectedLane>& want) {
  if (got.lane_count() != want.size()) return false;
  for (std::size_t i = 0; i < want.size(); ++i) {
    const auto& g = got.entries[i];
    if (g.lane_id != want[i].lane_id ||
        std::abs(g.entry_budget - want[i].entry_budget) > 1e-9 ||
        std::abs(g.clipped_length - want[i].clipped_length) > 1e-9) {
      return false;
    }
  }
  return true;
}

Outcome reachability() {
  Outcome o;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t lanes_seen = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto g = synth::random_lane_graph(seed, 10);
    const LaneId ego = 1 + static_cast<LaneId>(rng() % g.size());
    const double offset = unit(rng) * g.lane(ego).length();
    const double b1 = unit(rng) * 40.0;
    const double b2 = b1 + unit(rng) * 20.0;
    const auto r1 = reachable_lanes(g, ego, offset, b1);
    const auto r2 = reachable_lanes(g, ego, offset, b2);
    lanes_seen += r2.lane_count();
    o.require(same_reach(r1, synth::enumerate_reachable(g, ego, offset, b1)) &&
                  same_reach(r2, synth::enumerate_reachable(g, ego, offset, b2)),
              "differs from enumeration on graph " + std::to_string(seed));
    for (const auto& e : r1.entries) {
      const auto* w = r2.find(e.lane_id);
      o.require(w && w->clipped_length >= e.clipped_length,
                "not monotone in budget on graph " + std::to_string(seed));
    }
  }

  const auto chain = synth::generate_lane_scene(synth::LaneSceneKind::kChain);
  const auto rc = reachable_lanes(chain.graph, 1, 0.0, compute_budget(chain.kinematics));
  o.require(rc.lane_count() == 2 && rc.find(1)->clipped_length == 10.0 &&
                rc.find(2)->entry_budget == 5.0 && rc.find(2)->clipped_length == 5.0,
            "chain fixture");
  synth::LaneSceneSizes sz;
  sz.budget = 20.0;
  const auto diamond = synth::generate_lane_scene(synth::LaneSceneKind::kDiamond, sz);
  const auto rd = reachable_lanes(diamond.graph, 1, 0.0, 20.0);
  o.require(same_reach(rd, diamond.expected) && rd.lane_count() == 4 &&
                std::abs(rd.find(4)->entry_budget - 4.0) < 1e-12,
            "diamond fixture");
  if (o.pass) o.detail = "200 graphs, " + std::to_string(lanes_seen) + " reachable lanes";
  return o;
}

// ------------------------------------------------------------------ 7

Outcome rasterizer() {
  Outcome o;
  const auto cam = make_simple_radial_fisheye(1, 128, 128, 40.0, 64.0, 64.0, 0.0);
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t covered = 0, nonempty = 0;
  for (int trial = 0; trial < 100; ++trial) {
    GroundPolyline poly;
    const int n_seg = 1 + static_cast<int>(rng() % 5);
    Vec3 p(-2.0 + 4.0 * unit(rng), 1.0, -1.0 + 6.0 * unit(rng));
    poly.vertices.push_back(p);
    for (int k = 0; k < n_seg; ++k) {
      p += Vec3(-2.0 + 4.0 * unit(rng), 0.0, -1.0 + 4.0 * unit(rng));
      poly.vertices.push_back(p);
    }
    const double width = 0.2 + 2.0 * unit(rng);
    const auto quads = ribbon_quads(poly, width, RigidPose{}, cam);
    std::vector<std::vector<PixelPoint>> polys;
    for (const auto& q : quads) polys.emplace_back(q.begin(), q.end());
    const auto want = testing::oracle_fill(polys, 128, 128);
    const auto got = rasterize_ribbon(poly, width, RigidPose{}, cam);
    o.require(std::equal(got.data().begin(), got.data().end(), want.data().begin()),
              "ribbon " + std::to_string(trial) + " differs from the oracle");
    covered += count_positive(got);
    nonempty += count_positive(got) > 0;
  }
  o.require(nonempty >= 80, "only " + std::to_string(nonempty) + " ribbons were visible");
  if (o.pass) {
    o.detail = std::to_string(nonempty) + " visible ribbons, " + std::to_string(covered) +
               " pixels";
  }
  return o;
}

// ------------------------------------------------------------------ 8

SparseReconstruction random_model(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  SparseReconstruction m;
  const int n_cams = 1 + static_cast<int>(rng() % 2);
  for (int c = 1; c <= n_cams; ++c) {
    const auto w = 64 + rng() % 2000, h = 64 + rng() % 2000;
    m.cameras[c] = make_simple_radial_fisheye(c, w, h, 100.0 + 900.0 * unit(rng),
                                              w * unit(rng), h * unit(rng), 0.1 * gauss(rng));
  }
  const int n_frames = static_cast<int>(rng() % 12);
  const int n_points = static_cast<int>(rng() % 40);
  std::vector<std::uint64_t> pids;
  for (int i = 0; i < n_points; ++i) pids.push_back(1 + rng() % 1000000);
  std::sort(pids.begin(), pids.end());
  pids.erase(std::unique(pids.begin(), pids.end()), pids.end());
  for (const auto id : pids) {
    Point3D p;
    p.point3d_id = id;
    p.xyz = Vec3(gauss(rng), gauss(rng), gauss(rng)) * std::pow(10.0, gauss(rng));
    p.color = {static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()),
               static_cast<std::uint8_t>(rng())};
    p.error = unit(rng);
    m.points[id] = p;
  }
  for (int i = 0; i < n_frames; ++i) {
    FramePose f;
    f.image_id = static_cast<std::uint32_t>(1 + 3 * i + rng() % 3);
    f.camera_id = static_cast<std::uint32_t>(1 + rng() % n_cams);
    Vec3 axis(gauss(rng), gauss(rng), gauss(rng));
    double w = gauss(rng);
    const double n = std::sqrt(w * w + axis.squaredNorm());
    f.pose.q = {w / n, axis.x() / n, axis.y() / n, axis.z() / n};
    f.pose.t = Vec3(gauss(rng), gauss(rng), gauss(rng));
    f.name = "seq_" + std::to_string(seed) + "/img " + std::to_string(i) + ".png";
    const int n_obs = static_cast<int>(rng() % 30);
    for (int k = 0; k < n_obs; ++k) {
      Observation ob{2000.0 * unit(rng), 2000.0 * unit(rng), kInvalidPoint3DId};
      if (!pids.empty() && unit(rng) < 0.7) {
        ob.point3d_id = pids[rng() % pids.size()];
        m.points[ob.point3d_id].track.push_back(
            {f.image_id, static_cast<std::uint32_t>(f.observations.size())});
      }
      f.observations.push_back(ob);
    }
    m.frames[f.image_id] = f;
  }
  return m;
}

Outcome parser_round_trip() {
  Outcome o;
  std::size_t truncations = 0, positioned = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto m = random_model(seed);
    for (const auto fmt_ : {ModelFormat::kBinary, ModelFormat::kText}) {
      TempDir dir("acc8");
      write_model(m, dir.path(), fmt_);
      o.require(parse_model(dir.path(), fmt_) == m,
                "model " + std::to_string(seed) + " changed in round trip");
    }
    TempDir a("acc8"), b("acc8");
    write_model(m, a.path(), ModelFormat::kBinary);
    write_model(parse_model(a.path()), b.path(), ModelFormat::kBinary);
    o.require(snapshot(a.path()) == snapshot(b.path()),
              "model " + std::to_string(seed) + ": binary bytes not stable");

    // Truncations of every file in both formats.
    for (const auto fmt_ : {ModelFormat::kBinary, ModelFormat::kText}) {
      TempDir src("acc8");
      write_model(m, src.path(), fmt_);
      const auto files = model_files(src.path(), fmt_);
      for (const auto& file : {files.cameras, files.images, files.points}) {
        const auto bytes = testing::read_bytes(file);
        std::mt19937_64 rng(seed * 7 + bytes.size());
        for (int k = 0; k < 8 && !bytes.empty(); ++k) {
          const std::size_t len = rng() % bytes.size();
          TempDir cut("acc8");
          for (const auto& f : {files.cameras, files.images, files.points}) {
            fs::copy_file(f, cut / f.filename().string());
          }
          {
            std::ofstream(cut / file.filename().string(), std::ios::binary | std::ios::trunc)
                << bytes.substr(0, len);
          }
          ++truncations;
          try {
            parse_model(cut.path(), fmt_);
          } catch (const ParseError& e) {
            ++positioned;
            const auto named = cut / fs::path(e.file()).filename().string();
            o.require(fs::exists(named) && e.offset() <= fs::file_size(named),
                      std::string("error not positioned within its file: ") + e.what());
          } catch (const std::exception& e) {
            o.require(false, std::string("unpositioned error: ") + e.what());
          }
        }
      }
    }
  }
  if (o.pass) {
    o.detail = "50 models, " + std::to_string(truncations) + " truncations (" +
               std::to_string(positioned) + " rejected with positions)";
  }
  return o;
}

// ------------------------------------------------------------------ 9

Outcome null_frame_qc() {
  Outcome o;
  TempDir dir("acc9");
  const auto scene = (dir / "scene").string();
  o.require(run_cli("synth straight --frames 240 --noise 0.0005 --outliers 0.1 --gap 50:10 "
                    "--gap 130:4 --stationary 80:15 --stationary 200:6 -o \"" + scene + "\"",
                    dir.path(), "synth") == 0,
            "synth failed");
  o.require(run_cli("gen-masks \"" + scene + "\" -o \"" + (dir / "out").string() + "\"",
                    dir.path(), "masks") == 0,
            "gen-masks failed");
  if (!o.pass) return o;
  const auto truth = read_json(dir / "scene" / "ground_truth.json")["expected_counts"];
  const auto stats = read_json(dir / "out" / "stats.json");
  for (const char* k : {"valid", "stationary", "null"}) {
    o.require(stats[k] == truth[k], std::string(k) + ": got " + stats[k].dump() + ", expected " +
                                        truth[k].dump());
  }
  o.require(stats["config"]["labels"]["null_displacement_threshold"] == 1e-4, "threshold");
  if (o.pass) {
    o.detail = "valid " + stats["valid"].dump() + ", stationary " + stats["stationary"].dump() +
               ", null " + stats["null"].dump();
  }
  return o;
}

// ------------------------------------------------------------------ 10

Outcome determinism() {
  Outcome o;
  TempDir dir("acc10");
  const auto scene = (dir / "scene").string();
  o.require(run_cli("synth arc --frames 120 --noise 0.0005 --outliers 0.2 -o \"" + scene + "\"",
                    dir.path(), "synth") == 0,
            "synth failed");
  const auto lanes = (dir / "lanes" / "lanes.json").string();
  o.require(run_cli("synth grid --seed 4 -o \"" + (dir / "lanes").string() + "\"", dir.path(),
                    "lanes") == 0,
            "synth grid failed");
  const unsigned n = std::max(4u, std::thread::hardware_concurrency());
  std::vector<std::vector<std::pair<std::string, std::string>>> masks, evals, lane_evals;
  int run = 0;
  for (const unsigned jobs : {1u, n, 1u, n}) {
    const auto tag = std::to_string(run++);
    const auto out = dir / ("masks" + tag);
    const auto narrow = dir / ("narrow" + tag);
    o.require(run_cli("-j " + std::to_string(jobs) + " gen-masks \"" + scene + "\" -o \"" +
                          out.string() + "\"",
                      dir.path(), "m" + tag) == 0,
              "gen-masks failed");
    o.require(run_cli("-j " + std::to_string(jobs) + " --labels.width_factor 1.0 gen-masks \"" +
                          scene + "\" -o \"" + narrow.string() + "\"",
                      dir.path(), "n" + tag) == 0,
              "gen-masks failed");
    const auto ev = dir / ("eval" + tag);
    o.require(run_cli("-j " + std::to_string(jobs) + " eval --gt \"" + (out / "masks").string() +
                          "\" --pred \"" + (narrow / "masks").string() + "\" -o \"" +
                          ev.string() + "\"",
                      dir.path(), "e" + tag) == 0,
              "eval failed");
    // Lane-graph ground truth scored against itself rendered by run 0.
    const auto gt_dir = dir / "lane_gt";
    const auto lev = dir / ("lane_eval" + tag);
    if (tag == "0") {
      fs::create_directories(dir / "blank");
      TrajectoryMask blank(640, 360);
      write_png(dir / "blank" / "grid_4.png", blank);
      o.require(run_cli("eval --lanes \"" + lanes + "\" --pred \"" + (dir / "blank").string() +
                            "\" --write-gt \"" + gt_dir.string() + "\" -o \"" +
                            (dir / "seed_eval").string() + "\"",
                        dir.path(), "seed") == 0,
                "eval --write-gt failed");
    }
    o.require(run_cli("-j " + std::to_string(jobs) + " eval --lanes \"" + lanes + "\" --pred \"" +
                          gt_dir.string() + "\" -o \"" + lev.string() + "\"",
                      dir.path(), "l" + tag) == 0,
              "lane eval failed");
    if (!o.pass) return o;
    masks.push_back(snapshot(out));
    evals.push_back(snapshot(ev));
    lane_evals.push_back(snapshot(lev));
  }
  for (std::size_t i = 1; i < masks.size(); ++i) {
    o.require(masks[i] == masks[0], "gen-masks output differs in run " + std::to_string(i));
    o.require(evals[i] == evals[0], "eval output differs in run " + std::to_string(i));
    o.require(lane_evals[i] == lane_evals[0], "lane eval output differs in run " + std::to_string(i));
  }
  const auto report = read_json(dir / "lane_eval0" / "report.json");
  o.require(report["overall_soft_iou"] == 1.0, "lane GT does not score 1 against itself");
  if (o.pass) {
    o.detail = std::to_string(masks[0].size()) + " files per gen-masks run, jobs 1 vs " +
               std::to_string(n) + ", two runs each";
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 height-recovery", height_recovery},
      {"2 theil-sen-robustness", theil_sen_robustness},
      {"3 scale-agnosticism", scale_agnosticism},
      {"4 loss-kernel", loss_kernel},
      {"5 soft-iou", soft_iou_oracle},
      {"6 reachability", reachability},
      {"7 rasterizer", rasterizer},
      {"8 parser-round-trip", parser_round_trip},
      {"9 null-frame-qc", null_frame_qc},
      {"10 end-to-end-determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << "  " << o.detail << std::endl;
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}

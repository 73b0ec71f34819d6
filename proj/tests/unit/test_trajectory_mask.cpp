#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "ghost/synthetic.hpp"
#include "ghost/trajectory_mask.hpp"
#include "test_support.hpp"

using namespace ghost;

namespace {

synth::Scene scene_of(synth::TrajectoryKind kind, int n = 100) {
  synth::SceneSpec spec;
  spec.kind = kind;
  spec.n_frames = n;
  spec.points_per_frame = 10;
  return synth::generate_scene(spec);
}

std::size_t lines_in(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string s; std::getline(in, s);) ++n;
  return n;
}

}  // namespace

TEST(GroundTrajectory, VerticesLieOnTheGroundPlane) {
  for (const auto kind : {synth::TrajectoryKind::kStraight, synth::TrajectoryKind::kArc,
                          synth::TrajectoryKind::kLaneChange}) {
    const auto sc = scene_of(kind);
    const Timeline tl(sc.recon);
    for (const auto id : tl.order()) {
      const auto poly = ground_trajectory(sc.recon, tl, id, sc.truth.true_height);
      for (const auto& v : poly.vertices) EXPECT_NEAR(v.y(), sc.truth.true_height, 1e-9);
    }
  }
}

TEST(GroundTrajectory, CoversTheHorizonWindow) {
  const auto sc = scene_of(synth::TrajectoryKind::kStraight);
  const Timeline tl(sc.recon);
  const auto first = tl.order().front();
  const auto poly = ground_trajectory(sc.recon, tl, first, 0.015, 50);
  ASSERT_EQ(poly.size(), 50u);
  EXPECT_EQ(tl.index(poly.source_frames.front()), 1);
  EXPECT_EQ(tl.index(poly.source_frames.back()), 50);
  EXPECT_TRUE(ground_trajectory(sc.recon, tl, tl.order().back(), 0.015).vertices.empty());
  EXPECT_THROW(ground_trajectory(sc.recon, tl, first, 0.0), InvariantError);
}

TEST(GroundTrajectory, StationarySequenceGivesCoincidentVertices) {
  const auto sc = scene_of(synth::TrajectoryKind::kStationary, 60);
  const Timeline tl(sc.recon);
  const auto poly = ground_trajectory(sc.recon, tl, tl.order().front(), 0.015);
  ASSERT_GE(poly.size(), 2u);
  for (const auto& v : poly.vertices) EXPECT_EQ(v, poly.vertices.front());
}

TEST(GroundTrajectory, AnchorModeMatchesPerFrameOnFlatStraightDrive) {
  const auto sc = scene_of(synth::TrajectoryKind::kStraight);
  const Timeline tl(sc.recon);
  const auto id = tl.order()[3];
  const auto a = ground_trajectory(sc.recon, tl, id, 0.015, 50, DownAxisMode::kPerFrame);
  const auto b = ground_trajectory(sc.recon, tl, id, 0.015, 50, DownAxisMode::kAnchorFrame);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_LT((a.vertices[i] - b.vertices[i]).norm(), 1e-12);
  }
}

TEST(Ribbon, StraightAheadMaskIsLeftRightSymmetric) {
  const auto cam = make_simple_radial_fisheye(1, 1280, 720, 400, 640, 360, 0);
  GroundPolyline poly;
  for (int i = 1; i <= 20; ++i) poly.vertices.emplace_back(0.0, 1.0, 0.5 * i);
  const auto mask = rasterize_ribbon(poly, 1.5, RigidPose{}, cam);
  ASSERT_GT(count_positive(mask), 0u);
  std::size_t asym = 0;
  for (int y = 0; y < 720; ++y) {
    for (int x = 0; x < 640; ++x) asym += mask(x, y) != mask(1279 - x, y);
  }
  EXPECT_EQ(asym, 0u);
  // Nothing above the horizon row.
  for (int x = 0; x < 1280; ++x) EXPECT_EQ(mask(x, 359), 0.0f);
}

TEST(Ribbon, BehindTheCameraOrTooShortIsEmpty) {
  const auto cam = make_simple_radial_fisheye(1, 320, 240, 100, 160, 120, 0);
  GroundPolyline behind;
  behind.vertices = {Vec3(0, 1, -1), Vec3(0, 1, -5)};
  EXPECT_EQ(count_positive(rasterize_ribbon(behind, 1.0, RigidPose{}, cam)), 0u);
  GroundPolyline single;
  single.vertices = {Vec3(0, 1, 3)};
  EXPECT_EQ(count_positive(rasterize_ribbon(single, 1.0, RigidPose{}, cam)), 0u);
  GroundPolyline still;
  still.vertices = {Vec3(0, 1, 3), Vec3(0, 1, 3)};
  EXPECT_EQ(count_positive(rasterize_ribbon(still, 1.0, RigidPose{}, cam)), 0u);
  EXPECT_THROW(rasterize_ribbon(behind, 0.0, RigidPose{}, cam), InvariantError);
}

TEST(Ribbon, WiderStraightRibbonCoversNarrowerOne) {
  const auto cam = make_simple_radial_fisheye(1, 1280, 720, 400, 640, 360, 0);
  GroundPolyline poly;
  for (int i = 1; i <= 20; ++i) poly.vertices.emplace_back(0.0, 1.0, 0.5 * i);
  TrajectoryMask prev;
  for (const double w : {0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0}) {
    const auto m = rasterize_ribbon(poly, w, RigidPose{}, cam);
    if (!prev.empty()) {
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (prev.data()[i] > 0) {
          ASSERT_GT(m.data()[i], 0) << w;
        }
      }
      EXPECT_GT(count_positive(m), count_positive(prev));
    }
    prev = m;
  }
}

// Along a curve the image-space cells only approximate the projected ground
// ribbon, so a narrower ribbon may poke out by less than a pixel.
TEST(Ribbon, WiderCurvedRibbonCoversNarrowerOneUpToBoundarySlivers) {
  const auto sc = scene_of(synth::TrajectoryKind::kArc);
  const Timeline tl(sc.recon);
  std::size_t outside = 0, total = 0;
  for (std::size_t k = 0; k < 50; k += 7) {
    const auto id = tl.order()[k];
    const auto& f = sc.recon.frame(id);
    const auto poly = ground_trajectory(sc.recon, tl, id, 0.015);
    TrajectoryMask prev;
    for (const double w : {0.005, 0.01, 0.0225, 0.05}) {
      const auto m = rasterize_ribbon(poly, w, f.pose, sc.recon.camera_of(f));
      if (!prev.empty()) {
        total += count_positive(prev);
        EXPECT_GT(count_positive(m), count_positive(prev));
        for (int y = 0; y < m.height(); ++y) {
          for (int x = 0; x < m.width(); ++x) {
            if (prev(x, y) == 0 || m(x, y) > 0) continue;
            ++outside;
            bool touches = false;
            for (const auto& [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
              const int nx = x + dx, ny = y + dy;
              touches |= nx >= 0 && ny >= 0 && nx < m.width() && ny < m.height() && m(nx, ny) > 0;
            }
            EXPECT_TRUE(touches) << x << "," << y << " w " << w;
          }
        }
      }
      prev = m;
    }
  }
  EXPECT_LE(static_cast<double>(outside), 1e-4 * static_cast<double>(total));
}

TEST(Ribbon, PartlyBehindSegmentIsSubdivided) {
  const auto cam = make_simple_radial_fisheye(1, 320, 240, 100, 160, 120, 0);
  GroundPolyline poly;
  poly.vertices = {Vec3(0, 1, -4), Vec3(0, 1, 6)};
  RibbonOptions none;
  none.max_subdivision = 0;
  EXPECT_EQ(count_positive(rasterize_ribbon(poly, 1.0, RigidPose{}, cam, none)), 0u);
  EXPECT_GT(count_positive(rasterize_ribbon(poly, 1.0, RigidPose{}, cam)), 0u);
}

TEST(Classify, StatusRules) {
  const auto sc = scene_of(synth::TrajectoryKind::kStraight);
  const Timeline tl(sc.recon);
  TrajectoryMask some(4, 4);
  some(1, 1) = 1.0f;
  const auto first = tl.order().front();
  EXPECT_EQ(classify_frame(sc.recon, tl, first, 50, some).status, FrameStatus::kValid);
  EXPECT_EQ(classify_frame(sc.recon, tl, first, 1, some).reason, StatusReason::kTooFewVertices);
  EXPECT_EQ(classify_frame(sc.recon, tl, first, 50, TrajectoryMask(4, 4)).status,
            FrameStatus::kNull);
  EXPECT_EQ(classify_frame(sc.recon, tl, first, 50, std::nullopt).reason,
            StatusReason::kEmptyMask);
  EXPECT_EQ(classify_frame(sc.recon, tl, tl.order().back(), 0, std::nullopt).reason,
            StatusReason::kNoSuccessor);
  EXPECT_EQ(classify_frame(sc.recon, tl, tl.order()[60], 39, some).reason,
            StatusReason::kTruncatedHorizon);
  LabelOptions coarse;
  coarse.null_displacement_threshold = 0.01;  // equals the step
  EXPECT_EQ(classify_frame(sc.recon, tl, first, 50, some, coarse).reason,
            StatusReason::kBelowThreshold);
}

TEST(Dataset, StraightDriveLabelsFirstHalfValid) {
  const auto sc = scene_of(synth::TrajectoryKind::kStraight);
  ghost::testing::TempDir dir("ds");
  const auto stats = generate_dataset(sc.recon, sc.truth.true_height, dir.path());
  EXPECT_EQ(stats.n_frames, 100u);
  EXPECT_EQ(stats.n_valid, 50u);
  EXPECT_EQ(stats.n_stationary, 50u);
  EXPECT_EQ(stats.n_null, 0u);
  EXPECT_EQ(stats.masks_written.size(), 50u);
  for (const auto& rel : stats.masks_written) EXPECT_TRUE(std::filesystem::exists(dir / rel.string()));
  EXPECT_EQ(lines_in(dir / "manifest.csv"), 101u);
  EXPECT_EQ(stats.n_valid, sc.truth.count(FrameStatus::kValid));
}

TEST(Dataset, StationarySequenceHasNoMasks) {
  const auto sc = scene_of(synth::TrajectoryKind::kStationary, 80);
  ghost::testing::TempDir dir("ds");
  const auto stats = generate_dataset(sc.recon, sc.truth.true_height, dir.path());
  EXPECT_EQ(stats.n_valid, 0u);
  EXPECT_EQ(stats.n_null, 0u);
  EXPECT_EQ(stats.n_stationary, 80u);
  EXPECT_TRUE(std::filesystem::is_empty(dir / "masks"));
}

TEST(Dataset, GapsAndStationaryRunsMatchGroundTruth) {
  synth::SceneSpec spec;
  spec.n_frames = 200;
  spec.points_per_frame = 10;
  spec.gaps = {{50, 10}, {120, 3}};
  spec.stationary = {{80, 15}};
  const auto sc = synth::generate_scene(spec);
  EXPECT_EQ(sc.recon.frames.size(), 187u);
  ghost::testing::TempDir dir("ds");
  const auto stats = generate_dataset(sc.recon, spec.true_height, dir.path());
  EXPECT_EQ(stats.n_valid, sc.truth.count(FrameStatus::kValid));
  EXPECT_EQ(stats.n_stationary, sc.truth.count(FrameStatus::kStationary));
  EXPECT_EQ(stats.n_null, sc.truth.count(FrameStatus::kNull));
  EXPECT_GT(sc.truth.count(FrameStatus::kStationary), 50u + 14u);
}

TEST(Dataset, OutputBytesIndependentOfJobs) {
  const auto sc = scene_of(synth::TrajectoryKind::kArc, 70);
  ghost::testing::TempDir a("ds"), b("ds");
  generate_dataset(sc.recon, 0.015, a.path(), {}, 1);
  generate_dataset(sc.recon, 0.015, b.path(), {}, 4);
  EXPECT_EQ(ghost::testing::read_bytes(a / "manifest.csv"), ghost::testing::read_bytes(b / "manifest.csv"));
  std::size_t n = 0;
  for (const auto& e : std::filesystem::directory_iterator(a / "masks")) {
    const auto name = e.path().filename().string();
    EXPECT_EQ(ghost::testing::read_bytes(e.path()), ghost::testing::read_bytes(b.path() / "masks" / name));
    ++n;
  }
  EXPECT_EQ(n, 20u);
}

#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "ghost/evaluation.hpp"
#include "ghost/synthetic.hpp"
#include "test_support.hpp"

using namespace ghost;

namespace {

TrajectoryMask random_mask(std::mt19937_64& rng, int w, int h, bool binary) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  TrajectoryMask m(w, h);
  for (auto& v : m.data()) v = binary ? (u(rng) < 0.4f ? 1.0f : 0.0f) : u(rng);
  return m;
}

TrajectoryMask filled(int w, int h, float v) { return TrajectoryMask(w, h, v); }

}  // namespace

TEST(SoftIou, WorkedExample) {
  TrajectoryMask gt(2, 1), pred(2, 1);
  gt(0, 0) = 1.0f;
  pred(0, 0) = 0.5f;
  pred(1, 0) = 0.5f;
  // min: 0.5 + 0; max: 1 + 0.5
  EXPECT_DOUBLE_EQ(soft_iou(gt, pred), 1.0 / 3.0);
}

TEST(SoftIou, IdentityDisjointAndEmpty) {
  std::mt19937_64 rng(1);
  const auto m = random_mask(rng, 16, 16, false);
  EXPECT_EQ(soft_iou(m, m), 1.0);
  TrajectoryMask a(4, 4), b(4, 4);
  a(0, 0) = 1.0f;
  b(3, 3) = 1.0f;
  EXPECT_EQ(soft_iou(a, b), 0.0);
  EXPECT_EQ(soft_iou(TrajectoryMask(4, 4), TrajectoryMask(4, 4)), 1.0);
  EXPECT_DOUBLE_EQ(soft_iou(filled(8, 8, 1.0f), filled(8, 8, 0.5f)), 0.5);
}

TEST(SoftIou, SymmetricAndBounded) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    const auto a = random_mask(rng, 32, 16, false);
    const auto b = random_mask(rng, 32, 16, false);
    const double ab = soft_iou(a, b);
    EXPECT_EQ(ab, soft_iou(b, a));
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
  }
}

TEST(SoftIou, EqualsSetIouOnBinaryMasks) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto a = random_mask(rng, 24, 24, true);
    const auto b = random_mask(rng, 24, 24, true);
    std::size_t inter = 0, uni = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const bool x = a.data()[k] > 0, y = b.data()[k] > 0;
      inter += x && y;
      uni += x || y;
    }
    const double want = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
    EXPECT_DOUBLE_EQ(soft_iou(a, b), want);
  }
}

TEST(SoftIou, RejectsShapeMismatchAndOutOfRangeValues) {
  EXPECT_THROW(soft_iou(TrajectoryMask(4, 4), TrajectoryMask(4, 5)), Error);
  EXPECT_THROW(soft_iou(filled(2, 2, 1.5f), filled(2, 2, 0.0f)), Error);
  EXPECT_THROW(soft_iou(filled(2, 2, 0.0f), filled(2, 2, -0.1f)), Error);
  EXPECT_THROW(soft_iou(filled(2, 2, 0.0f), filled(2, 2, NAN)), Error);
}

TEST(GroundTruthRaster, UnionOfReachableLaneRibbons) {
  const auto sc = synth::generate_lane_scene(synth::LaneSceneKind::kChain);
  const auto frame = synth::to_lane_frame(sc, "chain");
  const auto reach = reachable_lanes(sc.graph, sc.ego_lane, sc.ego_offset, sc.budget);
  const auto gt = rasterize_gt(reach, frame.pose, frame.camera, 2.25);
  TrajectoryMask manual(640, 360);
  for (const auto& e : reach.entries) {
    GroundPolyline poly;
    poly.vertices = e.polyline.points();
    const auto one = rasterize_ribbon(poly, 2.25, frame.pose, frame.camera);
    for (std::size_t i = 0; i < one.size(); ++i) {
      manual.data()[i] = std::max(manual.data()[i], one.data()[i]);
    }
  }
  ASSERT_GT(count_positive(gt), 0u);
  EXPECT_EQ(soft_iou(gt, manual), 1.0);
  EXPECT_EQ(count_positive(rasterize_gt(ReachableSet{}, frame.pose, frame.camera, 2.25)), 0u);
}

TEST(MultiLane, FilterKeepsFramesWithEnoughLanes) {
  std::vector<EvalFrame> frames(5);
  frames[0].lane_count = 4;
  frames[1].lane_count = 3;
  frames[2].lane_count = 7;
  frames[4].lane_count = 0;
  const auto kept = multi_lane_filter(frames);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0], &frames[0]);
  EXPECT_EQ(kept[1], &frames[2]);
  EXPECT_EQ(multi_lane_filter(frames, 3).size(), 3u);
  EXPECT_TRUE(multi_lane_filter(std::vector<EvalFrame>{}).empty());
}

TEST(Evaluate, MeanPooledAndMultiLaneScores) {
  std::vector<EvalFrame> frames;
  frames.push_back({"a", filled(4, 4, 1.0f), filled(4, 4, 0.5f), 5});
  frames.push_back({"b", filled(4, 4, 1.0f), filled(4, 4, 1.0f), 2});
  TrajectoryMask small(4, 4);
  small(0, 0) = 1.0f;
  frames.push_back({"c", small, small, std::nullopt});
  const auto r = evaluate(frames);
  EXPECT_DOUBLE_EQ(r.overall, (0.5 + 1.0 + 1.0) / 3.0);
  ASSERT_TRUE(r.multi_lane.has_value());
  EXPECT_DOUBLE_EQ(*r.multi_lane, 0.5);
  EXPECT_EQ(r.n_multi_lane, 1u);

  EvalOptions pooled;
  pooled.pooled = true;
  const auto p = evaluate(frames, pooled);
  EXPECT_DOUBLE_EQ(p.overall, (8.0 + 16.0 + 1.0) / (16.0 + 16.0 + 1.0));

  EvalOptions parallel;
  parallel.jobs = 3;
  EXPECT_EQ(evaluate(frames, parallel).overall, r.overall);

  EvalOptions strict;
  strict.min_lanes = 10;
  EXPECT_FALSE(evaluate(frames, strict).multi_lane.has_value());
  EXPECT_THROW(evaluate({}), Error);
}

TEST(Evaluate, ReportFiles) {
  std::vector<EvalFrame> frames;
  frames.push_back({"x", filled(2, 2, 1.0f), filled(2, 2, 0.5f), 4});
  const auto r = evaluate(frames);
  ghost::testing::TempDir dir("eval");
  write_per_frame_csv(dir / "per_frame.csv", r);
  std::ifstream in(dir / "per_frame.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "frame_id,soft_iou,min_sum,max_sum,lane_count,multi_lane");
  EXPECT_EQ(row, "x,0.5,2,4,4,1");
  const auto j = report_json(r);
  EXPECT_EQ(j["n_frames"], 1);
  EXPECT_EQ(j["aggregation"], "per_frame_mean");
  EXPECT_EQ(j["multi_lane_soft_iou"], 0.5);
}

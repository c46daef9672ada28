#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "flipper/error.hpp"
#include "flipper/follower.hpp"
#include "scenes.hpp"

using namespace flipper;
using namespace flipper::testing;

namespace {

const PlanPath& flat_path() {
  static const PlanPath path = plan_scene(flat_scene(), SearchSettings{});
  return path;
}

const PlanPath& step_path() {
  static const PlanPath path = plan_scene(obstacle_scene(ObstacleKind::Step, 15.0), sweep_settings());
  return path;
}

Disturbance yaw_drift(double rate) {
  Disturbance d;
  d.kind = Disturbance::Kind::YawDrift;
  d.yaw_drift = rate;
  return d;
}

}  // namespace

TEST(Follow, NoiselessReplayEndsExactlyOnTheLastTarget) {
  for (const PlanPath* path : {&flat_path(), &step_path()}) {
    const TrackingReport r = follow(*path, path->params, Disturbance{});
    ASSERT_TRUE(r.completed);
    const TrackingRecord& last = r.records.back();
    EXPECT_EQ(last.target_index, path->steps.size() - 1);
    EXPECT_LT(last.position_error().norm(), 1e-12);
    EXPECT_EQ(last.orientation_error(), Eigen::Vector3d::Zero());
    EXPECT_EQ(r.final_state.pose.flippers, path->steps.back().morphology.flippers);
  }
}

TEST(Follow, TickCountMatchesPathLengthAtConstantSpeed) {
  const PlanPath& path = flat_path();
  const TrackingReport r = follow(path, path.params, Disturbance{});
  const double length = path.steps.back().morphology.middle_ref().x() - path.start.middle_ref().x();
  const double per_tick = FollowerSettings{}.speed / FollowerSettings{}.tick_rate;
  EXPECT_NEAR(static_cast<double>(r.records.size()), length / per_tick, 2.0);
}

TEST(Follow, TargetsAdvanceMonotonicallyAndArePiecewiseConstant) {
  const PlanPath& path = step_path();
  const TrackingReport r = follow(path, path.params, Disturbance{});
  for (std::size_t i = 1; i < r.records.size(); ++i) {
    const auto& a = r.records[i - 1];
    const auto& b = r.records[i];
    ASSERT_GE(b.target_index, a.target_index);
    ASSERT_LE(b.target_index, a.target_index + 1);
    ASSERT_EQ(b.tick, a.tick + 1);
    if (a.target_index == b.target_index) {
      ASSERT_EQ(a.target_position, b.target_position);
      ASSERT_EQ(a.target_orientation, b.target_orientation);
    }
  }
}

TEST(Follow, YawHoldBoundsDriftAndNeverHurts) {
  const PlanPath& path = flat_path();
  const Disturbance d = yaw_drift(0.01);
  const TrackingReport r = follow(path, path.params, d);
  ASSERT_TRUE(r.completed);
  for (const auto& rec : r.records) {
    const double yaw = rec.actual_orientation.x();
    ASSERT_LT(std::abs(yaw), 0.05);
    ASSERT_LE(std::abs(yaw), d.yaw_drift * static_cast<double>(rec.tick + 1) + 1e-15);
  }
  FollowerSettings off;
  off.yaw_gain = 0.0;
  const TrackingReport u = follow(path, path.params, d, off);
  EXPECT_NEAR(u.records.back().actual_orientation.x(),
              d.yaw_drift * static_cast<double>(u.records.size()), 1e-9);
}

TEST(Follow, GaussianNoiseIsSeededAndStillCompletes) {
  const PlanPath& path = step_path();
  Disturbance d;
  d.kind = Disturbance::Kind::GaussianPosition;
  EXPECT_THROW(follow(path, path.params, d), InvalidArgument);
  d.seed = 7;
  const TrackingReport a = follow(path, path.params, d);
  const TrackingReport b = follow(path, path.params, d);
  EXPECT_TRUE(a.completed);
  EXPECT_EQ(a.records, b.records);
  d.seed = 8;
  const TrackingReport c = follow(path, path.params, d);
  EXPECT_NE(a.records, c.records);
  EXPECT_LT(a.records.back().position_error().norm(), 1e-12);
}

TEST(Follow, PitchShiftIsCancelledByCompensation) {
  const PlanPath& path = step_path();
  Disturbance d;
  d.pitch_shift = true;
  const TrackingReport shifted = follow(path, path.params, d);
  ASSERT_TRUE(shifted.completed);
  const double pitch = shifted.records.back().actual_orientation.y();
  EXPECT_NEAR(shifted.records.back().position_error().x(),
              -pitch_compensation(pitch, path.params), 1e-12);
  FollowerSettings s;
  s.pitch_compensation = true;
  const TrackingReport fixed = follow(path, path.params, d, s);
  ASSERT_TRUE(fixed.completed);
  EXPECT_LT(fixed.records.back().position_error().norm(), 1e-12);
  EXPECT_DOUBLE_EQ(pitch_compensation(0.2, path.params), 0.2 * path.params.wheel_radius);
}

TEST(Follow, RunsOutOfTicksWithoutCompleting) {
  const PlanPath& path = flat_path();
  FollowerSettings s;
  s.ticks_max = 50;
  const TrackingReport r = follow(path, path.params, Disturbance{}, s);
  EXPECT_FALSE(r.completed);
  EXPECT_EQ(r.records.size(), 50u);
}

TEST(Follow, RejectsEmptyPathAndBadSettings) {
  PlanPath empty;
  EXPECT_THROW(follow(empty, empty.params, Disturbance{}), InvalidArgument);
  FollowerSettings s;
  s.speed = 0.0;
  EXPECT_THROW(follow(flat_path(), flat_path().params, Disturbance{}, s), InvalidArgument);
}

TEST(Report, CsvRoundTrip) {
  const PlanPath& path = step_path();
  Disturbance d = yaw_drift(0.01);
  const TrackingReport r = follow(path, path.params, d);
  const auto dir = std::filesystem::temp_directory_path() / "flipper_report_roundtrip";
  std::filesystem::remove_all(dir);
  write_report(r, dir);
  for (const char* f : {"position_bias.csv", "orientation_error.csv"}) {
    std::ifstream in(dir / f);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(std::count(header.begin(), header.end(), ','), 10) << f;
  }
  const TrackingReport back = read_report(dir);
  EXPECT_EQ(back.records, r.records);
  EXPECT_EQ(back.completed, r.completed);
  const TrackingSummary sum = r.summary();
  EXPECT_GE(sum.max_abs_orientation_error.x(), sum.mean_abs_orientation_error.x());
}

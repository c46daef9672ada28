#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "flipper/config_gen.hpp"
#include "flipper/error.hpp"
#include "oracles.hpp"
#include "scenes.hpp"

using namespace flipper;
using flipper::testing::flat_scene;
using flipper::testing::obstacle_scene;

namespace {

constexpr double kEps = 0.001;

Eigen::Vector3d grounded_left(const RobotParams& p, double x = 0.0) {
  return {x, 0.5 * p.robot_width, p.wheel_radius};
}

void expect_safe_and_supported(const Morphology& m, const InflatedMap& d, const RobotParams& p) {
  const auto c = oracle::skeleton_clearance(m, d, p, 0.001, kEps);
  EXPECT_GE(c.min, -kEps);
  EXPECT_TRUE(c.touching_left);
  EXPECT_TRUE(c.touching_right);
}

}  // namespace

TEST(Clearance, ReportsMinimumAndTouching) {
  const auto scene = flat_scene();
  const double r = scene.params.wheel_radius;
  std::vector<Eigen::Vector3d> pts{{0.1, 0, r + 0.01}, {0.2, 0, r + 0.0005}};
  ContactResult c = clearance(pts, scene.inflated, kEps);
  EXPECT_TRUE(c.touching);
  EXPECT_NEAR(c.min_clearance, 0.0005, 1e-15);
  EXPECT_EQ(c.witness, pts[1]);
  EXPECT_FALSE(c.punctures(kEps));
  pts.push_back({0.3, 0, r - 0.002});
  EXPECT_TRUE(clearance(pts, scene.inflated, kEps).punctures(kEps));
  EXPECT_EQ(clearance({}, scene.inflated, kEps).min_clearance,
            std::numeric_limits<double>::infinity());
  EXPECT_THROW(clearance(std::vector<Eigen::Vector3d>{{5, 0, 0}}, scene.inflated, kEps),
               OutOfMapError);
}

TEST(RotateToContact, LinkDropsOntoFlatGroundAtAnalyticAngle) {
  const auto scene = flat_scene();
  const ContactSettings s;
  const double r = scene.params.wheel_radius;
  const double z = r + 0.025;
  std::vector<Eigen::Vector3d> link;
  for (int i = 1; i <= 40; ++i) link.emplace_back(0.1 + 0.0025 * i, 0.0, z);
  const RotationAxis axis{{0.1, 0.0, z}, Eigen::Vector3d::UnitY()};
  const double angle = rotate_to_contact(axis, link, scene.inflated, 1.5, s);
  EXPECT_NEAR(angle, std::asin(0.025 / 0.1), 2 * s.angle_tolerance);
  // The returned angle leaves the link touching but not punctured.
  const double tip_gap = z - 0.1 * std::sin(angle) - r;
  EXPECT_LE(std::abs(tip_gap), kEps);
}

TEST(RotateToContact, ReportsPunctureAndMissingContact) {
  const auto scene = flat_scene();
  const ContactSettings s;
  const double r = scene.params.wheel_radius;
  std::vector<Eigen::Vector3d> buried{{0.2, 0, r - 0.01}};
  try {
    rotate_to_contact({{0.1, 0, r}, Eigen::Vector3d::UnitY()}, buried, scene.inflated, 1.0, s);
    FAIL();
  } catch (const ContactError& e) {
    EXPECT_EQ(e.reason(), ContactError::Reason::PunctureAtStart);
  }
  std::vector<Eigen::Vector3d> up{{0.2, 0, r + 0.01}};
  try {
    // Negative rotation about +y lifts a point ahead of the pivot.
    rotate_to_contact({{0.1, 0, r + 0.01}, Eigen::Vector3d::UnitY()}, up, scene.inflated, -1.0, s);
    FAIL();
  } catch (const ContactError& e) {
    EXPECT_EQ(e.reason(), ContactError::Reason::NoContact);
  }
}

TEST(PoseCandidates, FlatGroundGivesTheLevelPose) {
  const auto scene = flat_scene();
  const auto& p = scene.params;
  const auto cands = get_pose_candidates(grounded_left(p, 0.1), Side::Left, scene.inflated, p);
  ASSERT_FALSE(cands.empty());
  bool level = false;
  for (const auto& c : cands) {
    EXPECT_GE(c.pitch, p.pitch_search_bounds.lower);
    EXPECT_LE(c.pitch, p.pitch_search_bounds.upper);
    EXPECT_FALSE(c.touching_left.empty());
    EXPECT_FALSE(c.touching_right.empty());
    if (c.pitch == 0.0 && c.roll == 0.0) level = true;
  }
  EXPECT_TRUE(level);
}

TEST(PoseCandidates, RaisedReferencePitchesDownToContact) {
  const auto scene = flat_scene();
  const auto& p = scene.params;
  for (double dh : {0.01, 0.03, 0.05}) {
    Eigen::Vector3d ref = grounded_left(p, 0.1);
    ref.z() += dh;
    const auto cands = get_pose_candidates(ref, Side::Left, scene.inflated, p);
    ASSERT_EQ(cands.size(), 1u) << dh;
    const double analytic = std::asin(dh / p.base_length);
    EXPECT_NEAR(cands[0].pitch, analytic, 2e-3) << dh;
    const double dense = oracle::dense_pitch_contact(ref, Side::Left, scene.inflated, p, 0.001, 0.0);
    EXPECT_NEAR(cands[0].pitch, dense, 2e-3) << dh;
  }
}

TEST(PoseCandidates, ReferenceBelowSurfaceYieldsNothing) {
  const auto scene = flat_scene();
  Eigen::Vector3d ref = grounded_left(scene.params, 0.1);
  ref.z() -= 0.005;
  EXPECT_TRUE(get_pose_candidates(ref, Side::Left, scene.inflated, scene.params).empty());
}

TEST(PoseCandidates, EveryCandidateOnAnObstacleIsSafe) {
  const auto scene = obstacle_scene(ObstacleKind::Step, 15.0);
  const auto& p = scene.params;
  std::size_t checked = 0;
  for (double x : {0.2, 0.3, 0.35, 0.4}) {
    for (Side side : {Side::Left, Side::Right}) {
      for (int k = 0; k < 20; k += 3) {
        Eigen::Vector3d ref(x, side_sign(side) * 0.5 * p.robot_width, 0.0);
        ref.z() = scene.heights.height_at(ref.x(), ref.y()) + p.wheel_radius + 0.005 * k;
        for (const auto& c : get_pose_candidates(ref, side, scene.inflated, p)) {
          // Flippers are unresolved here, so only the base-line contact
          // certificate is checked, sample by sample.
          for (const auto& q : c.touching_left) {
            EXPECT_LE(std::abs(q.z() - scene.inflated.value_at(q.x(), q.y())), kEps + 1e-12);
          }
          for (const auto& q : c.touching_right) {
            EXPECT_LE(std::abs(q.z() - scene.inflated.value_at(q.x(), q.y())), kEps + 1e-12);
          }
          EXPECT_FALSE(c.touching_left.empty());
          EXPECT_FALSE(c.touching_right.empty());
          ++checked;
        }
      }
    }
  }
  EXPECT_GT(checked, 10u);
}

TEST(FlipperAngles, FlatGroundGivesZero) {
  const auto scene = flat_scene();
  const auto& p = scene.params;
  const auto cands = get_pose_candidates(grounded_left(p, 0.1), Side::Left, scene.inflated, p);
  for (const auto& c : cands) {
    if (c.pitch != 0.0 || c.roll != 0.0) continue;
    const FlipperResult f = get_flipper_angles(c, scene.inflated, p);
    EXPECT_EQ(f.angles, FlipperAngles{});
    for (bool h : f.hanging) EXPECT_FALSE(h);
  }
}

TEST(FlipperAngles, FrontFlipperRestsOnStepEdge) {
  const auto scene = obstacle_scene(ObstacleKind::Step, 0.0);
  const auto& p = scene.params;
  // Base level on the floor with the front axle just short of the step face.
  const Eigen::Vector3d ref(0.22, 0.5 * p.robot_width, p.wheel_radius);
  const auto cands = get_pose_candidates(ref, Side::Left, scene.inflated, p);
  const PoseCandidate* level = nullptr;
  for (const auto& c : cands) {
    if (c.pitch == 0.0 && c.roll == 0.0) level = &c;
  }
  ASSERT_NE(level, nullptr);
  const FlipperResult f = get_flipper_angles(*level, scene.inflated, p);
  EXPECT_GT(f.angles.front_left, 0.1);
  EXPECT_EQ(f.angles.front_left, f.angles.front_right);
  EXPECT_EQ(f.angles.rear_left, 0.0);
  Morphology m = level->morphology();
  m.flippers = f.angles;
  const auto o = oracle::skeleton_clearance(m, scene.inflated, p, 0.001, kEps);
  EXPECT_GE(o.min, -kEps);
  // The tip touches the inflated step surface.
  const Skeleton s = forward_kinematics(m, p);
  std::vector<Eigen::Vector3d> link = sample_segment(s.left[1], s.left[0], 0.001);
  EXPECT_TRUE(clearance(link, scene.inflated, kEps).touching);
}

TEST(FlipperAngles, IndependentOfBisectionTolerance) {
  const auto scene = obstacle_scene(ObstacleKind::Step, 15.0);
  const auto& p = scene.params;
  ContactSettings fine;
  fine.angle_tolerance = 1e-4;
  const ContactSettings coarse;
  const Eigen::Vector3d ref(0.25, -0.5 * p.robot_width, p.wheel_radius);
  const auto cands = get_pose_candidates(ref, Side::Right, scene.inflated, p, coarse);
  ASSERT_FALSE(cands.empty());
  for (const auto& c : cands) {
    const auto a = get_flipper_angles(c, scene.inflated, p, coarse).angles;
    const auto b = get_flipper_angles(c, scene.inflated, p, fine).angles;
    const double bound = 10 * coarse.angle_tolerance;
    EXPECT_NEAR(a.front_left, b.front_left, bound);
    EXPECT_NEAR(a.front_right, b.front_right, bound);
    EXPECT_NEAR(a.rear_left, b.rear_left, bound);
    EXPECT_NEAR(a.rear_right, b.rear_right, bound);
  }
}

TEST(FlipperAngles, MirroredMapGivesMirroredResult) {
  const auto scene = obstacle_scene(ObstacleKind::Step, 15.0);
  const auto mirrored = flipper::testing::make_scene(scene.heights.mirrored_y());
  const auto& p = scene.params;
  const Eigen::Vector3d ref(0.25, -0.5 * p.robot_width, p.wheel_radius);
  const Eigen::Vector3d mref(ref.x(), -ref.y(), ref.z());
  const auto a = get_pose_candidates(ref, Side::Right, scene.inflated, p);
  const auto b = get_pose_candidates(mref, Side::Left, mirrored.inflated, p);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i].pitch, b[i].pitch, 1e-9);
    EXPECT_NEAR(a[i].roll, -b[i].roll, 1e-9);
    const auto fa = get_flipper_angles(a[i], scene.inflated, p).angles;
    const auto fb = get_flipper_angles(b[i], mirrored.inflated, p).angles;
    EXPECT_NEAR(fa.front_left, fb.front_right, 1e-9);
    EXPECT_NEAR(fa.front_right, fb.front_left, 1e-9);
    EXPECT_NEAR(fa.rear_left, fb.rear_right, 1e-9);
    EXPECT_NEAR(fa.rear_right, fb.rear_left, 1e-9);
  }
}

TEST(CheckSkeleton, ClassifiesRestingLiftedAndSunkPoses) {
  const auto scene = flat_scene();
  const auto& p = scene.params;
  Morphology m;
  m.left_ref = grounded_left(p, 0.1);
  m.right_ref = m.left_ref - Eigen::Vector3d(0, p.robot_width, 0);
  EXPECT_TRUE(check_skeleton(m, scene.inflated, p).feasible(kEps));
  expect_safe_and_supported(m, scene.inflated, p);

  Morphology lifted = m;
  lifted.left_ref.z() += 0.01;
  lifted.right_ref.z() += 0.01;
  const SkeletonCheck l = check_skeleton(lifted, scene.inflated, p);
  EXPECT_FALSE(l.supported_left);
  EXPECT_FALSE(l.feasible(kEps));

  Morphology sunk = m;
  sunk.left_ref.z() -= 0.01;
  sunk.right_ref.z() -= 0.01;
  EXPECT_TRUE(check_skeleton(sunk, scene.inflated, p).contact.punctures(kEps));

  Morphology tilted = m;
  tilted.roll = 0.1;  // right side drops into the ground
  tilted.right_ref = tilted.left_ref - body_rotation(0, 0, 0.1) * Eigen::Vector3d(0, p.robot_width, 0);
  EXPECT_FALSE(check_skeleton(tilted, scene.inflated, p).feasible(kEps));
}

TEST(ContactSettings, ValidateRejectsNonsense) {
  ContactSettings s;
  s.epsilon = 0;
  EXPECT_THROW(s.validate(), InvalidArgument);
  s = {};
  s.angle_tolerance = -1;
  EXPECT_THROW(s.validate(), InvalidArgument);
  s = {};
  s.sample_step = 0;
  EXPECT_THROW(s.validate(), InvalidArgument);
}

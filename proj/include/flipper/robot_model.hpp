#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace flipper {

enum class Side { Left, Right };

/// +1 for the left side (+y), -1 for the right side.
constexpr double side_sign(Side side) { return side == Side::Left ? 1.0 : -1.0; }
constexpr Side opposite(Side side) { return side == Side::Left ? Side::Right : Side::Left; }
constexpr char side_code(Side side) { return side == Side::Left ? 'l' : 'r'; }

struct AngleInterval {
  double lower = 0.0;
  double upper = 0.0;

  bool contains(double angle) const { return angle >= lower && angle <= upper; }
  bool operator==(const AngleInterval&) const = default;
};

/// Geometry of the tracked robot. Lengths in meters, angles in radians.
struct RobotParams {
  double wheel_radius = 0.035;
  double track_width = 0.03;
  /// Lateral distance between the left and right skeleton lines.
  double robot_width = 0.15;
  /// S_2 to S_1 along the body x-axis.
  double base_length = 0.25;
  /// S_1 to S_0 and S_2 to S_3.
  double flipper_length = 0.10;
  AngleInterval flipper_angle_limits{-2.0 * std::numbers::pi / 3.0, 2.0 * std::numbers::pi / 3.0};
  AngleInterval pitch_search_bounds{-1.2, 1.2};

  /// Radius of the rear wheel the body rolls about when it pitches in place.
  double pitch_roll_radius() const { return wheel_radius; }

  /// Throws InvalidArgument when an invariant does not hold.
  void validate() const;

  bool operator==(const RobotParams&) const = default;
};

/// Reads flat `name = value` lines (SI units, '#' comments). Unknown keys are
/// rejected; missing keys keep their defaults.
RobotParams parse_robot_params(std::istream& in, const std::string& source,
                               RobotParams base = {});
RobotParams load_robot_params(const std::filesystem::path& path, RobotParams base = {});
void write_robot_params(std::ostream& out, const RobotParams& params);

/// Front flippers are alpha, rear flippers beta. Zero means colinear with the
/// base line; positive raises the link tip above it.
struct FlipperAngles {
  double front_left = 0.0;
  double front_right = 0.0;
  double rear_left = 0.0;
  double rear_right = 0.0;

  double front(Side s) const { return s == Side::Left ? front_left : front_right; }
  double rear(Side s) const { return s == Side::Left ? rear_left : rear_right; }

  bool operator==(const FlipperAngles&) const = default;
};

/// One full configuration: both rear reference joints, body Euler angles
/// (applied yaw, then pitch, then roll) and the four flipper angles.
struct Morphology {
  Eigen::Vector3d left_ref = Eigen::Vector3d::Zero();   // S_l2
  Eigen::Vector3d right_ref = Eigen::Vector3d::Zero();  // S_r2
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
  FlipperAngles flippers;

  const Eigen::Vector3d& reference(Side s) const { return s == Side::Left ? left_ref : right_ref; }

  /// S_middle,2, the robot origin and tracking point.
  Eigen::Vector3d middle_ref() const { return 0.5 * (left_ref + right_ref); }

  bool operator==(const Morphology&) const = default;
};

/// World-frame joints. Index k follows S_k: 0 front tip, 1 front axle,
/// 2 rear axle (reference), 3 rear tip.
struct Skeleton {
  std::array<Eigen::Vector3d, 4> left;
  std::array<Eigen::Vector3d, 4> right;

  const std::array<Eigen::Vector3d, 4>& side(Side s) const { return s == Side::Left ? left : right; }
  Eigen::Vector3d middle_rear() const { return 0.5 * (left[2] + right[2]); }
  Eigen::Vector3d middle_front() const { return 0.5 * (left[1] + right[1]); }
};

struct Segment {
  Eigen::Vector3d a;
  Eigen::Vector3d b;
};

/// Rz(yaw) * Ry(pitch) * Rx(roll), right-handed. Positive pitch lowers the
/// nose; positive roll lowers the right side.
Eigen::Matrix3d body_rotation(double yaw, double pitch, double roll);

/// Joint positions for `m`. Throws InvalidArgument when a flipper angle is
/// outside the limits or the reference points are not robot_width apart.
Skeleton forward_kinematics(const Morphology& m, const RobotParams& p);

/// Track lines of both sides (rear flipper, base, front flipper) followed by
/// the two axle lines S_l1-S_r1 and S_l2-S_r2.
std::vector<Segment> skeleton_segments(const Skeleton& s);

/// Points from a to b inclusive with spacing <= step. a == b yields {a}.
std::vector<Eigen::Vector3d> sample_segment(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                            double step);

/// Reflection across the x-z plane: swaps sides, negates y, roll and yaw.
Morphology mirror_y(const Morphology& m);
Skeleton mirror_y(const Skeleton& s);

}  // namespace flipper

#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "flipper/inflation.hpp"
#include "flipper/robot_model.hpp"

namespace flipper {

struct ContactSettings {
  /// |clearance| <= epsilon is touching, clearance < -epsilon is a puncture.
  double epsilon = 0.001;
  /// Spacing of skeleton samples; half a cell at the default resolution.
  double sample_step = 0.0025;
  /// Bisection tolerance of every rotate-to-contact search (radians).
  double angle_tolerance = 1e-3;
  /// Upper bound on the coarse scan step before bisection (radians).
  double max_scan_step = 0.02;
  /// Roll is searched in [-roll_limit, roll_limit].
  double roll_limit = std::numbers::pi / 3.0;
  /// Interior pitch samples between the lower and upper pitch bound.
  std::size_t n_interior = 3;

  void validate() const;
  bool operator==(const ContactSettings&) const = default;
};

struct ContactResult {
  bool touching = false;
  /// min over samples of z - D(x, y); +inf for an empty set.
  double min_clearance = 0.0;
  Eigen::Vector3d witness = Eigen::Vector3d::Zero();

  bool punctures(double epsilon) const { return min_clearance < -epsilon; }
};

/// Throws OutOfMapError when a point is outside the map.
ContactResult clearance(std::span<const Eigen::Vector3d> points, const InflatedMap& d,
                        double epsilon);

struct RotationAxis {
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  /// Need not be normalized. Positive angles follow the right-hand rule.
  Eigen::Vector3d direction = Eigen::Vector3d::UnitY();
};

/// Rotates `moving` about `axis` from angle 0 toward `limit` (either sign) and
/// returns the first angle at which the set touches D, refined by bisection.
/// The set is considered touching once its clearance drops to `level`; pass the
/// pivot's own clearance to let a link settle at the height its pivot rests at.
/// Throws ContactError(PunctureAtStart) when the set punctures at angle 0 and
/// ContactError(NoContact) when no contact occurs up to `limit`.
double rotate_to_contact(const RotationAxis& axis, std::span<const Eigen::Vector3d> moving,
                         const InflatedMap& d, double limit, const ContactSettings& s,
                         double level = 0.0);

/// A base orientation for one reference point, before flipper resolution.
struct PoseCandidate {
  Side reference_side = Side::Left;
  Eigen::Vector3d reference = Eigen::Vector3d::Zero();
  Eigen::Vector3d other_reference = Eigen::Vector3d::Zero();
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
  /// Base-line samples within epsilon of D, per side (the contact certificate).
  std::vector<Eigen::Vector3d> touching_left;
  std::vector<Eigen::Vector3d> touching_right;

  /// The candidate as a morphology with all flippers at 0.
  Morphology morphology() const;
};

/// Orientation candidates for a reference joint at `reference` on side `side`.
/// Pitch candidates are the upper bound (base line S_2-S_1 pitched from level to
/// contact), the lower bound when the reference rests on D (line S_2-S_0 with
/// the front flipper colinear) and n_interior samples between them. Roll is
/// resolved per pitch by rotating the opposite base line about the reference
/// base line. Candidates that puncture or lack a touching sample on either base
/// line are dropped. Throws OutOfMapError when a sample leaves the map.
std::vector<PoseCandidate> get_pose_candidates(const Eigen::Vector3d& reference, Side side,
                                               const InflatedMap& d, const RobotParams& p,
                                               const ContactSettings& s = {});

struct FlipperResult {
  FlipperAngles angles;
  /// front_left, front_right, rear_left, rear_right: true when the link found
  /// no ground and was clamped at the lower limit.
  std::array<bool, 4> hanging{};
};

/// Lowers each flipper link from its upper limit to first contact.
/// Throws ContactError(PunctureAtStart) when a link punctures at the upper limit.
FlipperResult get_flipper_angles(const PoseCandidate& c, const InflatedMap& d,
                                 const RobotParams& p, const ContactSettings& s = {});

struct SkeletonCheck {
  ContactResult contact;
  bool supported_left = false;
  bool supported_right = false;

  bool feasible(double epsilon) const {
    return !contact.punctures(epsilon) && supported_left && supported_right;
  }
};

/// Samples all skeleton segments: no sample may puncture, and each side's track
/// polyline S_3-S_2-S_1-S_0 needs a touching sample.
SkeletonCheck check_skeleton(const Morphology& m, const InflatedMap& d, const RobotParams& p,
                             const ContactSettings& s = {});

}  // namespace flipper

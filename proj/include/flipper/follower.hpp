#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "flipper/path_search.hpp"
#include "flipper/robot_model.hpp"

namespace flipper {

struct Disturbance {
  enum class Kind { None, YawDrift, GaussianPosition };

  Kind kind = Kind::None;
  /// Added to yaw every tick (YawDrift).
  double yaw_drift = 0.01;
  /// Standard deviation of the per-tick x/y position kick (GaussianPosition).
  double position_sigma = 0.0005;
  /// Required for GaussianPosition.
  std::optional<std::uint64_t> seed;
  /// When set, the measured S_middle,2 is shifted by pitch * wheel_radius along
  /// x, as a pitching body moves its rear axle without track motion.
  bool pitch_shift = false;

  void validate() const;
};

struct FollowerSettings {
  double tick_rate = 100.0;
  double speed = 0.05;
  double reach_radius = 0.005;
  /// Fraction of the yaw error removed per tick by the differential-speed term.
  double yaw_gain = 0.25;
  std::size_t ticks_max = 100000;
  /// Subtract pitch_compensation() from the measured x before the reach test.
  bool pitch_compensation = false;

  void validate() const;
};

struct FollowerState {
  Morphology pose;
  std::size_t target_index = 0;
  std::size_t ticks = 0;
  double tick_rate = 100.0;
};

struct TrackingRecord {
  std::size_t tick = 0;
  std::size_t target_index = 0;
  /// S_middle,2.
  Eigen::Vector3d actual_position = Eigen::Vector3d::Zero();
  Eigen::Vector3d target_position = Eigen::Vector3d::Zero();
  /// yaw, pitch, roll.
  Eigen::Vector3d actual_orientation = Eigen::Vector3d::Zero();
  Eigen::Vector3d target_orientation = Eigen::Vector3d::Zero();

  Eigen::Vector3d position_error() const { return actual_position - target_position; }
  Eigen::Vector3d orientation_error() const { return actual_orientation - target_orientation; }

  bool operator==(const TrackingRecord&) const = default;
};

struct TrackingSummary {
  Eigen::Vector3d max_abs_position_error = Eigen::Vector3d::Zero();
  Eigen::Vector3d mean_abs_position_error = Eigen::Vector3d::Zero();
  Eigen::Vector3d max_abs_orientation_error = Eigen::Vector3d::Zero();
  Eigen::Vector3d mean_abs_orientation_error = Eigen::Vector3d::Zero();
};

struct TrackingReport {
  std::vector<TrackingRecord> records;
  /// False when ticks_max ran out before the final target was reached.
  bool completed = false;
  FollowerState final_state;

  TrackingSummary summary() const;
};

/// The x shift of S_2 when the body pitches by `pitch` in place: pitch * r.
double pitch_compensation(double pitch, const RobotParams& p);

/// Kinematic replay of `path`: S_middle,2 drives straight at each target in
/// turn at constant speed, orientation and flippers blend toward the target
/// by progress, yaw is pulled back to 0 by a proportional term. Intermediate
/// targets advance within reach_radius; the final one is snapped onto.
TrackingReport follow(const PlanPath& path, const RobotParams& p, const Disturbance& disturbance,
                      const FollowerSettings& s = {});

/// Writes position_bias.csv, orientation_error.csv and summary.csv into `dir`.
void write_report(const TrackingReport& report, const std::filesystem::path& dir);
/// Reads back what write_report wrote (records and the completed flag).
TrackingReport read_report(const std::filesystem::path& dir);

}  // namespace flipper

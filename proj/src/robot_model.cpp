#include "flipper/robot_model.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "flipper/error.hpp"
#include "io_util.hpp"

namespace flipper {

void RobotParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidArgument(std::string(name) + " must be > 0");
    }
  };
  positive(wheel_radius, "wheel_radius");
  positive(track_width, "track_width");
  positive(robot_width, "robot_width");
  positive(base_length, "base_length");
  positive(flipper_length, "flipper_length");
  if (!(robot_width > track_width)) {
    throw InvalidArgument("robot_width must exceed track_width");
  }
  const auto& f = flipper_angle_limits;
  if (!(f.lower < f.upper) || !(f.lower > -std::numbers::pi) || !(f.upper < std::numbers::pi)) {
    throw InvalidArgument("flipper_angle_limits must be an interval inside (-pi, pi)");
  }
  const auto& b = pitch_search_bounds;
  if (!(b.lower < 0.0 && b.upper > 0.0) || !(b.lower > -std::numbers::pi / 2) ||
      !(b.upper < std::numbers::pi / 2)) {
    throw InvalidArgument("pitch_search_bounds must contain 0 and stay inside (-pi/2, pi/2)");
  }
}

namespace {

using ParamField = double RobotParams::*;

const std::map<std::string, ParamField, std::less<>>& scalar_fields() {
  static const std::map<std::string, ParamField, std::less<>> fields{
      {"wheel_radius", &RobotParams::wheel_radius},
      {"track_width", &RobotParams::track_width},
      {"robot_width", &RobotParams::robot_width},
      {"base_length", &RobotParams::base_length},
      {"flipper_length", &RobotParams::flipper_length},
  };
  return fields;
}

}  // namespace

RobotParams parse_robot_params(std::istream& in, const std::string& source, RobotParams base) {
  RobotParams p = base;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(source, line_no, "expected 'name = value'");
    }
    const std::string_view key = detail::trim(line.substr(0, eq));
    const double value = detail::parse_double(detail::trim(line.substr(eq + 1)), source, line_no);

    if (auto it = scalar_fields().find(key); it != scalar_fields().end()) {
      p.*(it->second) = value;
    } else if (key == "flipper_angle_min") {
      p.flipper_angle_limits.lower = value;
    } else if (key == "flipper_angle_max") {
      p.flipper_angle_limits.upper = value;
    } else if (key == "pitch_min") {
      p.pitch_search_bounds.lower = value;
    } else if (key == "pitch_max") {
      p.pitch_search_bounds.upper = value;
    } else {
      throw ParseError(source, line_no, "unknown parameter '" + std::string(key) + "'");
    }
  }
  try {
    p.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(source, line_no, e.what());
  }
  return p;
}

RobotParams load_robot_params(const std::filesystem::path& path, RobotParams base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return parse_robot_params(in, path.string(), base);
}

void write_robot_params(std::ostream& out, const RobotParams& p) {
  using detail::format_double;
  out << "# robot parameters, SI units (meters, radians)\n"
      << "wheel_radius = " << format_double(p.wheel_radius) << '\n'
      << "track_width = " << format_double(p.track_width) << '\n'
      << "robot_width = " << format_double(p.robot_width) << '\n'
      << "base_length = " << format_double(p.base_length) << '\n'
      << "flipper_length = " << format_double(p.flipper_length) << '\n'
      << "flipper_angle_min = " << format_double(p.flipper_angle_limits.lower) << '\n'
      << "flipper_angle_max = " << format_double(p.flipper_angle_limits.upper) << '\n'
      << "pitch_min = " << format_double(p.pitch_search_bounds.lower) << '\n'
      << "pitch_max = " << format_double(p.pitch_search_bounds.upper) << '\n';
}

Eigen::Matrix3d body_rotation(double yaw, double pitch, double roll) {
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  const double cr = std::cos(roll), sr = std::sin(roll);
  // Closed form of Rz * Ry * Rx; written out so that negating yaw and roll
  // reflects the matrix bit-exactly.
  Eigen::Matrix3d r;
  r << cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
       sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
       -sp,     cp * sr,                cp * cr;
  return r;
}

Skeleton forward_kinematics(const Morphology& m, const RobotParams& p) {
  const auto& lim = p.flipper_angle_limits;
  for (double a : {m.flippers.front_left, m.flippers.front_right, m.flippers.rear_left,
                   m.flippers.rear_right}) {
    if (!lim.contains(a)) throw InvalidArgument("flipper angle outside flipper_angle_limits");
  }
  if (std::abs((m.left_ref - m.right_ref).norm() - p.robot_width) > 1e-9) {
    throw InvalidArgument("reference points must be robot_width apart");
  }

  const Eigen::Matrix3d r = body_rotation(m.yaw, m.pitch, m.roll);
  const Eigen::Vector3d origin = m.middle_ref();
  const double half = 0.5 * p.robot_width;
  const double base = p.base_length;
  const double flip = p.flipper_length;

  auto place = [&](Side side, double front, double rear) {
    const double y = side_sign(side) * half;
    std::array<Eigen::Vector3d, 4> joints;
    joints[0] = origin + r * Eigen::Vector3d(base + flip * std::cos(front), y, flip * std::sin(front));
    joints[1] = origin + r * Eigen::Vector3d(base, y, 0.0);
    joints[2] = origin + r * Eigen::Vector3d(0.0, y, 0.0);
    joints[3] = origin + r * Eigen::Vector3d(-flip * std::cos(rear), y, flip * std::sin(rear));
    return joints;
  };

  Skeleton s;
  s.left = place(Side::Left, m.flippers.front_left, m.flippers.rear_left);
  s.right = place(Side::Right, m.flippers.front_right, m.flippers.rear_right);
  return s;
}

std::vector<Segment> skeleton_segments(const Skeleton& s) {
  std::vector<Segment> out;
  out.reserve(8);
  for (const auto* side : {&s.left, &s.right}) {
    out.push_back({(*side)[3], (*side)[2]});
    out.push_back({(*side)[2], (*side)[1]});
    out.push_back({(*side)[1], (*side)[0]});
  }
  out.push_back({s.left[1], s.right[1]});
  out.push_back({s.left[2], s.right[2]});
  return out;
}

std::vector<Eigen::Vector3d> sample_segment(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                            double step) {
  if (!(step > 0.0)) throw InvalidArgument("sample step must be > 0");
  const double length = (b - a).norm();
  if (length == 0.0) return {a};
  // The small slack keeps exact multiples (0.01 / 0.005) from gaining a point.
  const auto intervals =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(length / step - 1e-9)));
  std::vector<Eigen::Vector3d> out;
  out.reserve(intervals + 1);
  const Eigen::Vector3d delta = b - a;
  for (std::size_t k = 0; k < intervals; ++k) {
    out.push_back(a + delta * (static_cast<double>(k) / static_cast<double>(intervals)));
  }
  out.push_back(b);
  return out;
}

Morphology mirror_y(const Morphology& m) {
  Morphology out;
  out.left_ref = {m.right_ref.x(), -m.right_ref.y(), m.right_ref.z()};
  out.right_ref = {m.left_ref.x(), -m.left_ref.y(), m.left_ref.z()};
  out.yaw = -m.yaw;
  out.pitch = m.pitch;
  out.roll = -m.roll;
  out.flippers = {m.flippers.front_right, m.flippers.front_left, m.flippers.rear_right,
                  m.flippers.rear_left};
  return out;
}

Skeleton mirror_y(const Skeleton& s) {
  auto reflect = [](const std::array<Eigen::Vector3d, 4>& joints) {
    std::array<Eigen::Vector3d, 4> out;
    for (std::size_t k = 0; k < 4; ++k) out[k] = {joints[k].x(), -joints[k].y(), joints[k].z()};
    return out;
  };
  return Skeleton{reflect(s.right), reflect(s.left)};
}

}  // namespace flipper

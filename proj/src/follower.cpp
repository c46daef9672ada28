#include "flipper/follower.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "flipper/error.hpp"
#include "io_util.hpp"

namespace flipper {

void Disturbance::validate() const {
  if (kind == Kind::YawDrift && !std::isfinite(yaw_drift)) {
    throw InvalidArgument("yaw_drift must be finite");
  }
  if (kind == Kind::GaussianPosition) {
    if (!(position_sigma >= 0.0)) throw InvalidArgument("position_sigma must be >= 0");
    if (!seed) throw InvalidArgument("gaussian disturbance requires a seed");
  }
}

void FollowerSettings::validate() const {
  if (!(tick_rate > 0.0)) throw InvalidArgument("tick_rate must be > 0");
  if (!(speed > 0.0)) throw InvalidArgument("speed must be > 0");
  if (!(reach_radius > 0.0)) throw InvalidArgument("reach_radius must be > 0");
  if (!(yaw_gain >= 0.0 && yaw_gain <= 1.0)) throw InvalidArgument("yaw_gain must lie in [0, 1]");
  if (ticks_max < 1) throw InvalidArgument("ticks_max must be >= 1");
}

double pitch_compensation(double pitch, const RobotParams& p) {
  return pitch * p.pitch_roll_radius();
}

TrackingSummary TrackingReport::summary() const {
  TrackingSummary s;
  if (records.empty()) return s;
  for (const TrackingRecord& r : records) {
    const Eigen::Vector3d pe = r.position_error().cwiseAbs();
    const Eigen::Vector3d oe = r.orientation_error().cwiseAbs();
    s.max_abs_position_error = s.max_abs_position_error.cwiseMax(pe);
    s.max_abs_orientation_error = s.max_abs_orientation_error.cwiseMax(oe);
    s.mean_abs_position_error += pe;
    s.mean_abs_orientation_error += oe;
  }
  const auto n = static_cast<double>(records.size());
  s.mean_abs_position_error /= n;
  s.mean_abs_orientation_error /= n;
  return s;
}

namespace {

struct Attitude {
  double pitch = 0.0;
  double roll = 0.0;
  FlipperAngles flippers;
};

double blend(double from, double to, double t) { return t >= 1.0 ? to : from + (to - from) * t; }

Attitude blend(const Attitude& from, const Morphology& to, double t) {
  Attitude a;
  a.pitch = blend(from.pitch, to.pitch, t);
  a.roll = blend(from.roll, to.roll, t);
  a.flippers.front_left = blend(from.flippers.front_left, to.flippers.front_left, t);
  a.flippers.front_right = blend(from.flippers.front_right, to.flippers.front_right, t);
  a.flippers.rear_left = blend(from.flippers.rear_left, to.flippers.rear_left, t);
  a.flippers.rear_right = blend(from.flippers.rear_right, to.flippers.rear_right, t);
  return a;
}

}  // namespace

TrackingReport follow(const PlanPath& path, const RobotParams& p, const Disturbance& disturbance,
                      const FollowerSettings& s) {
  p.validate();
  disturbance.validate();
  s.validate();
  if (path.steps.empty()) throw InvalidArgument("cannot follow an empty path");

  std::mt19937_64 rng(disturbance.seed.value_or(0));
  std::normal_distribution<double> noise(0.0, disturbance.position_sigma);
  const double step = s.speed / s.tick_rate;

  Eigen::Vector3d pos = path.start.middle_ref();
  double yaw = path.start.yaw;
  Attitude att{path.start.pitch, path.start.roll, path.start.flippers};

  const auto measure = [&](const Eigen::Vector3d& q, double pitch) {
    Eigen::Vector3d m = q;
    if (disturbance.pitch_shift) m.x() += pitch_compensation(pitch, p);
    if (s.pitch_compensation) m.x() -= pitch_compensation(pitch, p);
    return m;
  };

  std::size_t idx = 0;
  Attitude from = att;
  double switch_distance = (path.steps[0].morphology.middle_ref() - measure(pos, att.pitch)).norm();

  TrackingReport report;
  report.records.reserve(std::min<std::size_t>(s.ticks_max, 1 << 16));
  std::size_t tick = 0;
  for (; tick < s.ticks_max; ++tick) {
    const Morphology& target = path.steps[idx].morphology;
    const Eigen::Vector3d goal = target.middle_ref();
    const bool last = idx + 1 == path.steps.size();

    if (disturbance.kind == Disturbance::Kind::YawDrift) yaw += disturbance.yaw_drift;
    if (disturbance.kind == Disturbance::Kind::GaussianPosition) {
      pos.x() += noise(rng);
      pos.y() += noise(rng);
    }
    // Differential track speed turns the body back toward yaw 0.
    yaw -= s.yaw_gain * yaw;

    const Eigen::Vector3d seen = measure(pos, att.pitch);
    const Eigen::Vector3d delta = goal - seen;
    const double dist = delta.norm();
    bool snapped = false;
    if (last && dist <= step) {
      // Snap with the final attitude so any pitch-dependent measurement offset
      // is the one the robot ends with.
      pos = goal - (measure(pos, target.pitch) - pos);
      snapped = true;
    } else if (dist > 0.0) {
      pos += delta * (std::min(step, dist) / dist);
    }

    const double remaining = (goal - measure(pos, att.pitch)).norm();
    const double progress =
        snapped || switch_distance <= 0.0
            ? 1.0
            : std::clamp(1.0 - remaining / switch_distance, 0.0, 1.0);
    att = blend(from, target, progress);

    TrackingRecord rec;
    rec.tick = tick;
    rec.target_index = idx;
    rec.actual_position = pos;
    rec.target_position = goal;
    rec.actual_orientation = {yaw, att.pitch, att.roll};
    rec.target_orientation = {target.yaw, target.pitch, target.roll};
    report.records.push_back(rec);

    if (snapped) {
      report.completed = true;
      ++tick;
      break;
    }
    if (!last && remaining < s.reach_radius) {
      ++idx;
      from = att;
      switch_distance = (path.steps[idx].morphology.middle_ref() - measure(pos, att.pitch)).norm();
    }
  }

  FollowerState& st = report.final_state;
  const Eigen::Matrix3d r = body_rotation(yaw, att.pitch, att.roll);
  const Eigen::Vector3d half = r * Eigen::Vector3d(0.0, 0.5 * p.robot_width, 0.0);
  st.pose.left_ref = pos + half;
  st.pose.right_ref = pos - half;
  st.pose.yaw = yaw;
  st.pose.pitch = att.pitch;
  st.pose.roll = att.roll;
  st.pose.flippers = att.flippers;
  st.target_index = idx;
  st.ticks = tick;
  st.tick_rate = s.tick_rate;
  return report;
}

namespace {

constexpr const char* kPositionHeader =
    "tick,target_index,actual_x,actual_y,actual_z,target_x,target_y,target_z,error_x,error_y,"
    "error_z";
constexpr const char* kOrientationHeader =
    "tick,target_index,actual_yaw,actual_pitch,actual_roll,target_yaw,target_pitch,target_roll,"
    "error_yaw,error_pitch,error_roll";

void write_row(std::ostream& out, const TrackingRecord& r, const Eigen::Vector3d& actual,
               const Eigen::Vector3d& target) {
  using detail::format_double;
  out << r.tick << ',' << r.target_index;
  const Eigen::Vector3d err = actual - target;
  for (const Eigen::Vector3d* v : {&actual, &target, &err}) {
    for (int i = 0; i < 3; ++i) out << ',' << format_double((*v)[i]);
  }
  out << '\n';
}

struct CsvRow {
  std::size_t tick;
  std::size_t target_index;
  Eigen::Vector3d actual;
  Eigen::Vector3d target;
};

std::vector<CsvRow> read_csv(const std::filesystem::path& file, const char* header) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open '" + file.string() + "' for reading");
  const std::string source = file.string();
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || detail::trim(line) != header) {
    throw ParseError(source, 1, "unexpected CSV header");
  }
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split(detail::trim(line), ",");
    if (f.size() != 11) throw ParseError(source, line_no, "expected 11 columns");
    CsvRow r;
    r.tick = detail::parse_count(f[0], source, line_no);
    r.target_index = detail::parse_count(f[1], source, line_no);
    for (int i = 0; i < 3; ++i) {
      r.actual[i] = detail::parse_double(f[2 + i], source, line_no);
      r.target[i] = detail::parse_double(f[5 + i], source, line_no);
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

void write_report(const TrackingReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());

  detail::write_file_atomically(dir / "position_bias.csv", [&](std::ostream& out) {
    out << kPositionHeader << '\n';
    for (const auto& r : report.records) write_row(out, r, r.actual_position, r.target_position);
  });
  detail::write_file_atomically(dir / "orientation_error.csv", [&](std::ostream& out) {
    out << kOrientationHeader << '\n';
    for (const auto& r : report.records) {
      write_row(out, r, r.actual_orientation, r.target_orientation);
    }
  });
  const TrackingSummary sum = report.summary();
  detail::write_file_atomically(dir / "summary.csv", [&](std::ostream& out) {
    using detail::format_double;
    out << "key,value\n"
        << "completed," << (report.completed ? 1 : 0) << '\n'
        << "ticks," << report.records.size() << '\n';
    const char* axes[] = {"x", "y", "z"};
    const char* angles[] = {"yaw", "pitch", "roll"};
    for (int i = 0; i < 3; ++i) {
      out << "max_abs_error_" << axes[i] << ',' << format_double(sum.max_abs_position_error[i])
          << '\n'
          << "mean_abs_error_" << axes[i] << ','
          << format_double(sum.mean_abs_position_error[i]) << '\n';
    }
    for (int i = 0; i < 3; ++i) {
      out << "max_abs_error_" << angles[i] << ','
          << format_double(sum.max_abs_orientation_error[i]) << '\n'
          << "mean_abs_error_" << angles[i] << ','
          << format_double(sum.mean_abs_orientation_error[i]) << '\n';
    }
  });
}

TrackingReport read_report(const std::filesystem::path& dir) {
  const auto pos = read_csv(dir / "position_bias.csv", kPositionHeader);
  const auto ori = read_csv(dir / "orientation_error.csv", kOrientationHeader);
  if (pos.size() != ori.size()) {
    throw ParseError((dir / "orientation_error.csv").string(), ori.size() + 1,
                     "row count differs from position_bias.csv");
  }
  TrackingReport rep;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    if (pos[i].tick != ori[i].tick || pos[i].target_index != ori[i].target_index) {
      throw ParseError((dir / "orientation_error.csv").string(), i + 2,
                       "tick does not match position_bias.csv");
    }
    rep.records.push_back({pos[i].tick, pos[i].target_index, pos[i].actual, pos[i].target,
                           ori[i].actual, ori[i].target});
  }

  const std::filesystem::path summary = dir / "summary.csv";
  std::ifstream in(summary);
  if (!in) throw IoError("cannot open '" + summary.string() + "' for reading");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto f = detail::split(detail::trim(line), ",");
    if (f.size() == 2 && f[0] == "completed") {
      rep.completed = detail::parse_count(f[1], summary.string(), line_no) != 0;
    }
  }
  return rep;
}

}  // namespace flipper

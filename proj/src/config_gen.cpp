#include "flipper/config_gen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Geometry>

#include "flipper/error.hpp"

namespace flipper {

void ContactSettings::validate() const {
  if (!(epsilon > 0.0)) throw InvalidArgument("contact epsilon must be > 0");
  if (!(sample_step > 0.0)) throw InvalidArgument("sample_step must be > 0");
  if (!(angle_tolerance > 0.0)) throw InvalidArgument("angle_tolerance must be > 0");
  if (!(max_scan_step > 0.0)) throw InvalidArgument("max_scan_step must be > 0");
  if (!(roll_limit > 0.0 && roll_limit < std::numbers::pi / 2)) {
    throw InvalidArgument("roll_limit must lie in (0, pi/2)");
  }
}

ContactResult clearance(std::span<const Eigen::Vector3d> points, const InflatedMap& d,
                        double epsilon) {
  ContactResult r;
  r.min_clearance = std::numeric_limits<double>::infinity();
  for (const Eigen::Vector3d& q : points) {
    const double c = q.z() - d.value_at(q.x(), q.y());
    if (c < r.min_clearance) {
      r.min_clearance = c;
      r.witness = q;
    }
  }
  r.touching = std::abs(r.min_clearance) <= epsilon;
  return r;
}

namespace {

enum class Approach {
  Lower,  // clearance starts above the contact level and falls to it
  Lift,   // clearance starts below the contact level and rises to it
};

using ClearanceFn = std::function<double(double)>;

/// First angle between `start` and `end` where f reaches `level`. The coarse
/// scan visits multiples of its step so that angle 0 is always sampled
/// exactly; the first bracket is then bisected until it is narrower than the
/// tolerance and the returned side is within epsilon of touching.
std::optional<double> search_angle(const ClearanceFn& f, double start, double end, double lever,
                                   double level, Approach approach, const ContactSettings& s) {
  const auto reached = [&](double c) {
    return approach == Approach::Lower ? c <= level : c >= level;
  };
  const double step = std::min(s.max_scan_step, s.sample_step / lever);
  const double dir = end > start ? 1.0 : -1.0;

  double prev = start;
  double c_prev = f(start);
  if (reached(c_prev)) return start;

  auto k = static_cast<long long>(dir > 0 ? std::floor(start / step) + 1 : std::ceil(start / step) - 1);
  bool done = false;
  while (!done) {
    double a = static_cast<double>(k) * step;
    if (dir * (a - end) >= 0.0) {
      a = end;
      done = true;
    }
    const double c = f(a);
    if (reached(c)) {
      if (c == level) return a;
      double lo = prev, hi = a;
      double c_lo = c_prev, c_hi = c;
      const double accept = std::min(s.epsilon, level + s.epsilon);
      for (int it = 0; it < 200; ++it) {
        const double c_result = approach == Approach::Lower ? c_lo : c_hi;
        if (std::abs(hi - lo) <= s.angle_tolerance && c_result <= accept) break;
        const double mid = 0.5 * (lo + hi);
        const double cm = f(mid);
        if (reached(cm)) {
          if (cm == level) return mid;
          hi = mid;
          c_hi = cm;
        } else {
          lo = mid;
          c_lo = cm;
        }
      }
      return approach == Approach::Lower ? lo : hi;
    }
    prev = a;
    c_prev = c;
    k += dir > 0 ? 1 : -1;
  }
  return std::nullopt;
}

/// Fractions k/n for k in [first, n], n chosen so spacing along `length` is <= step.
std::vector<double> fractions(double length, double step, std::size_t first) {
  const auto n = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(length / step - 1e-9)));
  std::vector<double> out;
  out.reserve(n + 1 - first);
  for (std::size_t k = first; k <= n; ++k) {
    out.push_back(static_cast<double>(k) / static_cast<double>(n));
  }
  return out;
}

double clearance_at(const InflatedMap& d, const Eigen::Vector3d& q) {
  return q.z() - d.value_at(q.x(), q.y());
}

/// The contact level for links hinged at a pivot: a touching pivot lets the
/// link settle at the pivot's own clearance, otherwise the surface itself.
double contact_level(double pivot_clearance, double epsilon) {
  return std::abs(pivot_clearance) <= epsilon ? pivot_clearance : 0.0;
}

/// Rotation search from `start` that lowers the set when it floats above the
/// level and lifts it when it sits below. `lower_end` / `lift_end` are the
/// limits in each direction.
std::optional<double> settle(const ClearanceFn& f, double start, double lower_end,
                             double lift_end, double lever, double level,
                             const ContactSettings& s) {
  const double c0 = f(start);
  if (c0 == level) return start;
  if (c0 > level) return search_angle(f, start, lower_end, lever, level, Approach::Lower, s);
  return search_angle(f, start, lift_end, lever, level, Approach::Lift, s);
}

std::optional<PoseCandidate> make_candidate(const Eigen::Vector3d& ref, Side side, double pitch,
                                            double roll, const InflatedMap& d,
                                            const RobotParams& p, const ContactSettings& s) {
  const double sgn = side_sign(side);
  const Eigen::Matrix3d r = body_rotation(0.0, pitch, roll);
  const Eigen::Vector3d other = ref + r * Eigen::Vector3d(0.0, -sgn * p.robot_width, 0.0);
  const Eigen::Vector3d ref_front = ref + r * Eigen::Vector3d(p.base_length, 0.0, 0.0);
  const Eigen::Vector3d other_front =
      ref + r * Eigen::Vector3d(p.base_length, -sgn * p.robot_width, 0.0);

  PoseCandidate c;
  c.reference_side = side;
  c.reference = ref;
  c.other_reference = other;
  c.pitch = pitch;
  c.roll = roll;

  auto& ref_touch = side == Side::Left ? c.touching_left : c.touching_right;
  auto& other_touch = side == Side::Left ? c.touching_right : c.touching_left;
  const auto scan_line = [&](const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                             std::vector<Eigen::Vector3d>* touching) {
    for (const Eigen::Vector3d& q : sample_segment(a, b, s.sample_step)) {
      const double cl = clearance_at(d, q);
      if (cl < -s.epsilon) return false;
      if (touching && std::abs(cl) <= s.epsilon) touching->push_back(q);
    }
    return true;
  };
  if (!scan_line(ref, ref_front, &ref_touch) || !scan_line(other, other_front, &other_touch) ||
      !scan_line(ref, other, nullptr) || !scan_line(ref_front, other_front, nullptr)) {
    return std::nullopt;
  }
  if (c.touching_left.empty() || c.touching_right.empty()) return std::nullopt;
  return c;
}

}  // namespace

double rotate_to_contact(const RotationAxis& axis, std::span<const Eigen::Vector3d> moving,
                         const InflatedMap& d, double limit, const ContactSettings& s,
                         double level) {
  s.validate();
  const double norm = axis.direction.norm();
  if (!(norm > 0.0)) throw InvalidArgument("rotation axis direction must be non-zero");
  const Eigen::Vector3d u = axis.direction / norm;

  double lever = 0.0;
  for (const Eigen::Vector3d& q : moving) lever = std::max(lever, (q - axis.point).cross(u).norm());
  if (!(lever > 0.0)) throw InvalidArgument("moving set lies on the rotation axis");

  std::vector<Eigen::Vector3d> buffer(moving.size());
  const ClearanceFn f = [&](double angle) {
    const Eigen::Matrix3d rot = Eigen::AngleAxisd(angle, u).toRotationMatrix();
    for (std::size_t k = 0; k < moving.size(); ++k) {
      buffer[k] = axis.point + rot * (moving[k] - axis.point);
    }
    return clearance(buffer, d, s.epsilon).min_clearance;
  };

  const double c0 = f(0.0);
  if (c0 < -s.epsilon) {
    throw ContactError(ContactError::Reason::PunctureAtStart, "moving set punctures D at angle 0");
  }
  if (c0 <= level) return 0.0;
  if (auto a = search_angle(f, 0.0, limit, lever, level, Approach::Lower, s)) return *a;
  throw ContactError(ContactError::Reason::NoContact, "no contact within the search interval");
}

Morphology PoseCandidate::morphology() const {
  Morphology m;
  m.left_ref = reference_side == Side::Left ? reference : other_reference;
  m.right_ref = reference_side == Side::Left ? other_reference : reference;
  m.yaw = yaw;
  m.pitch = pitch;
  m.roll = roll;
  return m;
}

std::vector<PoseCandidate> get_pose_candidates(const Eigen::Vector3d& reference, Side side,
                                               const InflatedMap& d, const RobotParams& p,
                                               const ContactSettings& s) {
  p.validate();
  s.validate();
  const double eps = s.epsilon;
  const double c_ref = clearance_at(d, reference);
  if (c_ref < -eps) return {};
  const bool grounded = c_ref <= eps;
  const double pivot_level = contact_level(c_ref, eps);
  const auto& bounds = p.pitch_search_bounds;

  const auto pitch_bound = [&](double length) {
    const auto ts = fractions(length, s.sample_step, 1);
    const ClearanceFn f = [&](double pitch) {
      const Eigen::Vector3d dir = body_rotation(0.0, pitch, 0.0).col(0) * length;
      double m = std::numeric_limits<double>::infinity();
      for (double t : ts) m = std::min(m, clearance_at(d, reference + dir * t));
      return m;
    };
    return settle(f, 0.0, bounds.upper, bounds.lower, length, pivot_level, s);
  };

  const auto upper = pitch_bound(p.base_length);
  if (!upper) return {};
  std::vector<double> pitches;
  if (grounded) {
    const auto lower = pitch_bound(p.base_length + p.flipper_length);
    if (lower && *upper - *lower >= s.angle_tolerance) {
      pitches.push_back(*lower);
      for (std::size_t k = 1; k <= s.n_interior; ++k) {
        pitches.push_back(*lower + (*upper - *lower) * (static_cast<double>(k) /
                                                         static_cast<double>(s.n_interior + 1)));
      }
    }
  }
  pitches.push_back(*upper);

  const double sgn = side_sign(side);
  const auto line_ts = fractions(p.base_length, s.sample_step, 0);
  std::vector<Eigen::Vector3d> far_body;
  far_body.reserve(line_ts.size());
  for (double t : line_ts) far_body.emplace_back(t * p.base_length, -sgn * p.robot_width, 0.0);

  std::vector<PoseCandidate> out;
  for (double pitch : pitches) {
    const Eigen::Vector3d dir = body_rotation(0.0, pitch, 0.0).col(0) * p.base_length;
    double line_min = std::numeric_limits<double>::infinity();
    for (double t : line_ts) line_min = std::min(line_min, clearance_at(d, reference + dir * t));
    const double level = contact_level(line_min, eps);

    const ClearanceFn g = [&](double roll) {
      const Eigen::Matrix3d r = body_rotation(0.0, pitch, roll);
      double m = std::numeric_limits<double>::infinity();
      for (const Eigen::Vector3d& v : far_body) m = std::min(m, clearance_at(d, reference + r * v));
      return m;
    };
    // Positive roll lowers the right side, so the far side drops with sign +sgn.
    const auto roll = settle(g, 0.0, sgn * s.roll_limit, -sgn * s.roll_limit, p.robot_width,
                             level, s);
    if (!roll) continue;
    if (auto c = make_candidate(reference, side, pitch, *roll, d, p, s)) {
      out.push_back(std::move(*c));
    }
  }
  return out;
}

FlipperResult get_flipper_angles(const PoseCandidate& c, const InflatedMap& d,
                                 const RobotParams& p, const ContactSettings& s) {
  s.validate();
  const Morphology m = c.morphology();
  const Eigen::Matrix3d r = body_rotation(m.yaw, m.pitch, m.roll);
  const Eigen::Vector3d origin = m.middle_ref();
  const auto us = fractions(p.flipper_length, s.sample_step, 1);
  const auto& lim = p.flipper_angle_limits;

  // front: the link leaves S_1 along +x; rear: it leaves S_2 along -x.
  const auto resolve = [&](double y, bool front, bool& hanging) {
    const double base_x = front ? p.base_length : 0.0;
    const double along = front ? 1.0 : -1.0;
    const double pivot_c = clearance_at(d, origin + r * Eigen::Vector3d(base_x, y, 0.0));
    const double level = contact_level(pivot_c, s.epsilon);
    const ClearanceFn f = [&](double angle) {
      const double cx = along * p.flipper_length * std::cos(angle);
      const double cz = p.flipper_length * std::sin(angle);
      double mn = std::numeric_limits<double>::infinity();
      for (double u : us) {
        mn = std::min(mn, clearance_at(d, origin + r * Eigen::Vector3d(base_x + cx * u, y, cz * u)));
      }
      return mn;
    };
    const double c0 = f(lim.upper);
    if (c0 < -s.epsilon) {
      throw ContactError(ContactError::Reason::PunctureAtStart,
                         front ? "front flipper punctures D at its upper limit"
                               : "rear flipper punctures D at its upper limit");
    }
    if (auto a = search_angle(f, lim.upper, lim.lower, p.flipper_length, level,
                              Approach::Lower, s)) {
      hanging = false;
      return *a;
    }
    hanging = true;
    return lim.lower;
  };

  FlipperResult out;
  const double half = 0.5 * p.robot_width;
  out.angles.front_left = resolve(half, true, out.hanging[0]);
  out.angles.front_right = resolve(-half, true, out.hanging[1]);
  out.angles.rear_left = resolve(half, false, out.hanging[2]);
  out.angles.rear_right = resolve(-half, false, out.hanging[3]);
  return out;
}

SkeletonCheck check_skeleton(const Morphology& m, const InflatedMap& d, const RobotParams& p,
                             const ContactSettings& s) {
  const auto segments = skeleton_segments(forward_kinematics(m, p));
  SkeletonCheck out;
  out.contact.min_clearance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto samples = sample_segment(segments[i].a, segments[i].b, s.sample_step);
    const ContactResult r = clearance(samples, d, s.epsilon);
    if (r.min_clearance < out.contact.min_clearance) out.contact = r;
    bool any_touching = false;
    for (const Eigen::Vector3d& q : samples) {
      if (std::abs(clearance_at(d, q)) <= s.epsilon) {
        any_touching = true;
        break;
      }
    }
    if (i < 3) out.supported_left = out.supported_left || any_touching;
    else if (i < 6) out.supported_right = out.supported_right || any_touching;
  }
  out.contact.touching = std::abs(out.contact.min_clearance) <= s.epsilon;
  return out;
}

}  // namespace flipper

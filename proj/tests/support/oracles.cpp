#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace flipper::oracle {

std::vector<double> brute_inflate(const ElevationMap& map, double r) {
  const GridGeometry& g = map.geometry();
  std::vector<double> out(g.cell_count(), 0.0);
  for (std::size_t qy = 0; qy < g.height_cells; ++qy) {
    for (std::size_t qx = 0; qx < g.width_cells; ++qx) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t py = 0; py < g.height_cells; ++py) {
        for (std::size_t px = 0; px < g.width_cells; ++px) {
          const double dx = (static_cast<double>(qx) - static_cast<double>(px)) * g.resolution;
          const double dy = (static_cast<double>(qy) - static_cast<double>(py)) * g.resolution;
          const double d2 = dx * dx + dy * dy;
          if (d2 > r * r) continue;
          best = std::max(best, map.at(px, py) + std::sqrt(r * r - d2));
        }
      }
      out[qy * g.width_cells + qx] = best;
    }
  }
  return out;
}

double bilinear(const GridGeometry& g, std::span<const double> v, double x, double y) {
  const double u = (x - g.origin.x()) / g.resolution;
  const double w = (y - g.origin.y()) / g.resolution;
  const auto cell = [](double c, std::size_t n) {
    if (n < 2) return std::size_t{0};
    const auto i = static_cast<long>(std::floor(c));
    return static_cast<std::size_t>(std::clamp(i, 0L, static_cast<long>(n) - 2));
  };
  const std::size_t i = cell(u, g.width_cells);
  const std::size_t j = cell(w, g.height_cells);
  const std::size_t i1 = std::min(i + 1, g.width_cells - 1);
  const std::size_t j1 = std::min(j + 1, g.height_cells - 1);
  const double a = g.width_cells < 2 ? 0.0 : u - static_cast<double>(i);
  const double b = g.height_cells < 2 ? 0.0 : w - static_cast<double>(j);
  const auto at = [&](std::size_t ix, std::size_t iy) { return v[iy * g.width_cells + ix]; };
  return (1 - a) * (1 - b) * at(i, j) + a * (1 - b) * at(i1, j) + (1 - a) * b * at(i, j1) +
         a * b * at(i1, j1);
}

Joints rodrigues_fk(const Morphology& m, const RobotParams& p) {
  using Eigen::AngleAxisd;
  using Eigen::Vector3d;
  const Eigen::Matrix3d body = (AngleAxisd(m.yaw, Vector3d::UnitZ()) *
                                AngleAxisd(m.pitch, Vector3d::UnitY()) *
                                AngleAxisd(m.roll, Vector3d::UnitX()))
                                   .toRotationMatrix();
  const Vector3d origin = m.middle_ref();
  Joints j;
  for (int s = 0; s < 2; ++s) {
    const double y = (s == 0 ? 0.5 : -0.5) * p.robot_width;
    const double alpha = s == 0 ? m.flippers.front_left : m.flippers.front_right;
    const double beta = s == 0 ? m.flippers.rear_left : m.flippers.rear_right;
    // A positive flipper angle lifts the tip, i.e. rotates about -y at the front
    // and +y at the rear.
    const Vector3d rear_axle(0, y, 0);
    const Vector3d front_axle(p.base_length, y, 0);
    const Vector3d front_tip =
        front_axle + AngleAxisd(-alpha, Vector3d::UnitY()) * Vector3d(p.flipper_length, 0, 0);
    const Vector3d rear_tip =
        rear_axle + AngleAxisd(beta, Vector3d::UnitY()) * Vector3d(-p.flipper_length, 0, 0);
    auto& out = s == 0 ? j.left : j.right;
    out[0] = origin + body * front_tip;
    out[1] = origin + body * front_axle;
    out[2] = origin + body * rear_axle;
    out[3] = origin + body * rear_tip;
  }
  return j;
}

namespace {

template <class Visit>
void walk(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double step, Visit&& visit) {
  const int n = std::max(1, static_cast<int>(std::ceil((b - a).norm() / step)));
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    visit((1 - t) * a + t * b);
  }
}

double gap(const InflatedMap& d, const Eigen::Vector3d& q) {
  return q.z() - bilinear(d.geometry(), d.values(), q.x(), q.y());
}

}  // namespace

Clearance skeleton_clearance(const Morphology& m, const InflatedMap& d, const RobotParams& p,
                             double step, double epsilon) {
  const Joints j = rodrigues_fk(m, p);
  Clearance c;
  c.min = std::numeric_limits<double>::infinity();
  for (int s = 0; s < 2; ++s) {
    const auto& k = s == 0 ? j.left : j.right;
    bool& touching = s == 0 ? c.touching_left : c.touching_right;
    for (int seg = 0; seg < 3; ++seg) {
      walk(k[3 - seg], k[2 - seg], step, [&](const Eigen::Vector3d& q) {
        const double g = gap(d, q);
        c.min = std::min(c.min, g);
        if (std::abs(g) <= epsilon) touching = true;
      });
    }
  }
  for (int axle : {1, 2}) {
    walk(j.left[axle], j.right[axle], step,
         [&](const Eigen::Vector3d& q) { c.min = std::min(c.min, gap(d, q)); });
  }
  return c;
}

double middle_line_cost(const Morphology& m, const InflatedMap& d, const RobotParams& p,
                        double step) {
  const Joints j = rodrigues_fk(m, p);
  const Eigen::Vector3d a = 0.5 * (j.left[2] + j.right[2]);
  const Eigen::Vector3d b = 0.5 * (j.left[1] + j.right[1]);
  double sum = 0.0;
  walk(a, b, step, [&](const Eigen::Vector3d& q) {
    const double g = gap(d, q);
    sum += g * g;
  });
  return sum;
}

double dense_pitch_contact(const Eigen::Vector3d& reference, Side side, const InflatedMap& d,
                           const RobotParams& p, double increment, double epsilon) {
  Morphology m;
  const Eigen::Vector3d offset(0, side_sign(side) * p.robot_width, 0);
  m.left_ref = side == Side::Left ? reference : Eigen::Vector3d(reference - offset);
  m.right_ref = side == Side::Right ? reference : Eigen::Vector3d(reference - offset);
  for (double theta = 0.0; theta <= p.pitch_search_bounds.upper; theta += increment) {
    m.pitch = theta;
    const Joints j = rodrigues_fk(m, p);
    const auto& k = side == Side::Left ? j.left : j.right;
    double lowest = std::numeric_limits<double>::infinity();
    walk(k[2], k[1], 0.001, [&](const Eigen::Vector3d& q) {
      if ((q - k[2]).norm() > 1e-12) lowest = std::min(lowest, gap(d, q));
    });
    if (lowest <= epsilon) return theta;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace flipper::oracle

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "flipper/config_gen.hpp"
#include "flipper/error.hpp"
#include "flipper/follower.hpp"
#include "flipper/inflation.hpp"
#include "flipper/path_search.hpp"
#include "flipper/robot_model.hpp"
#include "flipper/terrain.hpp"

namespace py = pybind11;
using namespace flipper;

namespace {

using HeightArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

GridGeometry geometry_for(const HeightArray& a, double resolution, Eigen::Vector2d origin) {
  if (a.ndim() != 2) throw InvalidArgument("heights must be a 2-D array (rows = y, cols = x)");
  GridGeometry g;
  g.width_cells = static_cast<std::size_t>(a.shape(1));
  g.height_cells = static_cast<std::size_t>(a.shape(0));
  g.resolution = resolution;
  g.origin = origin;
  return g;
}

py::array_t<double> as_array(const GridGeometry& g, std::span<const double> values) {
  py::array_t<double> out({g.height_cells, g.width_cells});
  std::copy(values.begin(), values.end(), out.mutable_data());
  return out;
}

py::array_t<double> stack(const std::vector<TrackingRecord>& records,
                          Eigen::Vector3d (TrackingRecord::*get)() const) {
  py::array_t<double> out({records.size(), std::size_t{3}});
  auto v = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Eigen::Vector3d e = (records[i].*get)();
    for (int k = 0; k < 3; ++k) v(static_cast<py::ssize_t>(i), k) = e[k];
  }
  return out;
}

py::array_t<double> stack_field(const std::vector<TrackingRecord>& records,
                                Eigen::Vector3d TrackingRecord::*field) {
  py::array_t<double> out({records.size(), std::size_t{3}});
  auto v = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (int k = 0; k < 3; ++k) v(static_cast<py::ssize_t>(i), k) = (records[i].*field)[k];
  }
  return out;
}

void raise_as(const char* name, const std::exception& e) {
  py::set_error(py::module_::import("flipperplan").attr(name), e.what());
}

}  // namespace

PYBIND11_MODULE(flipperplan, m) {
  m.doc() = "Flipper morphology planning for a tracked robot on 2.5D elevation maps";

  py::exception<Error> error(m, "Error");
  py::exception<InvalidArgument>(m, "InvalidArgument", error.ptr());
  py::exception<ParseError>(m, "ParseError", error.ptr());
  py::exception<IoError>(m, "IoError", error.ptr());
  py::exception<OutOfMapError>(m, "OutOfMapError", error.ptr());
  py::exception<ContactError>(m, "ContactError", error.ptr());
  py::exception<DeadEndError>(m, "DeadEndError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const DeadEndError& e) {
      raise_as("DeadEndError", e);
    } catch (const ContactError& e) {
      raise_as("ContactError", e);
    } catch (const OutOfMapError& e) {
      raise_as("OutOfMapError", e);
    } catch (const IoError& e) {
      raise_as("IoError", e);
    } catch (const ParseError& e) {
      raise_as("ParseError", e);
    } catch (const InvalidArgument& e) {
      raise_as("InvalidArgument", e);
    } catch (const Error& e) {
      raise_as("Error", e);
    }
  });

  py::enum_<Side>(m, "Side").value("LEFT", Side::Left).value("RIGHT", Side::Right);
  py::enum_<ObstacleKind>(m, "ObstacleKind")
      .value("STEP", ObstacleKind::Step)
      .value("RAMP", ObstacleKind::Ramp)
      .value("IRAMP", ObstacleKind::InverseRamp);

  py::class_<ElevationMap>(m, "ElevationMap")
      .def(py::init([](const HeightArray& heights, double resolution, Eigen::Vector2d origin) {
             const GridGeometry g = geometry_for(heights, resolution, origin);
             return ElevationMap(g, std::vector<double>(heights.data(),
                                                        heights.data() + heights.size()));
           }),
           py::arg("heights"), py::arg("resolution"), py::arg("origin") = Eigen::Vector2d::Zero())
      .def_property_readonly("heights",
                             [](const ElevationMap& e) { return as_array(e.geometry(), e.heights()); })
      .def_property_readonly("resolution", [](const ElevationMap& e) { return e.geometry().resolution; })
      .def_property_readonly("origin", [](const ElevationMap& e) { return e.geometry().origin; })
      .def("height_at", &ElevationMap::height_at, py::arg("x"), py::arg("y"))
      .def("mirrored_y", &ElevationMap::mirrored_y)
      .def("hash", &ElevationMap::hash)
      .def("__eq__", [](const ElevationMap& a, const ElevationMap& b) { return a == b; });

  py::class_<InflatedMap>(m, "InflatedMap")
      .def_property_readonly("values",
                             [](const InflatedMap& d) { return as_array(d.geometry(), d.values()); })
      .def_property_readonly("source_radius", &InflatedMap::source_radius)
      .def_property_readonly("resolution", [](const InflatedMap& d) { return d.geometry().resolution; })
      .def_property_readonly("origin", [](const InflatedMap& d) { return d.geometry().origin; })
      .def("value_at", &InflatedMap::value_at, py::arg("x"), py::arg("y"))
      .def("hash", &InflatedMap::hash);

  m.def("load_map", [](const std::filesystem::path& p) { return load_map(p, map_format_from_path(p)); },
        py::arg("path"));
  m.def("save_map",
        [](const ElevationMap& e, const std::filesystem::path& p) {
          save_map(e, p, map_format_from_path(p));
        },
        py::arg("map"), py::arg("path"));

  py::class_<ObstacleSpec>(m, "ObstacleSpec")
      .def(py::init<>())
      .def_readwrite("kind", &ObstacleSpec::kind)
      .def_readwrite("rotation_deg", &ObstacleSpec::rotation_deg)
      .def_readwrite("axis_distance", &ObstacleSpec::axis_distance)
      .def_readwrite("obstacle_height", &ObstacleSpec::obstacle_height)
      .def_readwrite("slope_run", &ObstacleSpec::slope_run)
      .def_readwrite("map_extent", &ObstacleSpec::map_extent)
      .def_readwrite("resolution", &ObstacleSpec::resolution)
      .def_readwrite("rear_margin", &ObstacleSpec::rear_margin);
  m.def("generate_obstacle", &generate_obstacle, py::arg("spec"));

  m.def("kernel_value", &kernel_value, py::arg("r"), py::arg("h"), py::arg("dx"), py::arg("dy"));
  m.def("inflate", &inflate, py::arg("map"), py::arg("r"));

  py::class_<RobotParams>(m, "RobotParams")
      .def(py::init<>())
      .def_readwrite("wheel_radius", &RobotParams::wheel_radius)
      .def_readwrite("track_width", &RobotParams::track_width)
      .def_readwrite("robot_width", &RobotParams::robot_width)
      .def_readwrite("base_length", &RobotParams::base_length)
      .def_readwrite("flipper_length", &RobotParams::flipper_length)
      .def_property(
          "flipper_angle_limits",
          [](const RobotParams& p) {
            return std::make_pair(p.flipper_angle_limits.lower, p.flipper_angle_limits.upper);
          },
          [](RobotParams& p, std::pair<double, double> v) { p.flipper_angle_limits = {v.first, v.second}; })
      .def_property(
          "pitch_search_bounds",
          [](const RobotParams& p) {
            return std::make_pair(p.pitch_search_bounds.lower, p.pitch_search_bounds.upper);
          },
          [](RobotParams& p, std::pair<double, double> v) { p.pitch_search_bounds = {v.first, v.second}; })
      .def("validate", &RobotParams::validate)
      .def("dumps", [](const RobotParams& p) {
        std::ostringstream out;
        write_robot_params(out, p);
        return out.str();
      });

  py::class_<FlipperAngles>(m, "FlipperAngles")
      .def(py::init<>())
      .def(py::init<double, double, double, double>(), py::arg("front_left"),
           py::arg("front_right"), py::arg("rear_left"), py::arg("rear_right"))
      .def_readwrite("front_left", &FlipperAngles::front_left)
      .def_readwrite("front_right", &FlipperAngles::front_right)
      .def_readwrite("rear_left", &FlipperAngles::rear_left)
      .def_readwrite("rear_right", &FlipperAngles::rear_right);

  py::class_<Morphology>(m, "Morphology")
      .def(py::init<>())
      .def_readwrite("left_ref", &Morphology::left_ref)
      .def_readwrite("right_ref", &Morphology::right_ref)
      .def_readwrite("yaw", &Morphology::yaw)
      .def_readwrite("pitch", &Morphology::pitch)
      .def_readwrite("roll", &Morphology::roll)
      .def_readwrite("flippers", &Morphology::flippers)
      .def("middle_ref", &Morphology::middle_ref)
      .def("__eq__", [](const Morphology& a, const Morphology& b) { return a == b; });

  m.def(
      "forward_kinematics",
      [](const Morphology& morph, const RobotParams& p) {
        const Skeleton s = forward_kinematics(morph, p);
        py::array_t<double> out({std::size_t{2}, std::size_t{4}, std::size_t{3}});
        auto v = out.mutable_unchecked<3>();
        for (int side = 0; side < 2; ++side) {
          const auto& joints = side == 0 ? s.left : s.right;
          for (int k = 0; k < 4; ++k) {
            for (int c = 0; c < 3; ++c) v(side, k, c) = joints[static_cast<std::size_t>(k)][c];
          }
        }
        return out;
      },
      py::arg("morphology"), py::arg("params"),
      "Joints as an array [side (0 left, 1 right), k (S_k), xyz].");

  py::class_<ContactSettings>(m, "ContactSettings")
      .def(py::init<>())
      .def_readwrite("epsilon", &ContactSettings::epsilon)
      .def_readwrite("sample_step", &ContactSettings::sample_step)
      .def_readwrite("angle_tolerance", &ContactSettings::angle_tolerance)
      .def_readwrite("max_scan_step", &ContactSettings::max_scan_step)
      .def_readwrite("roll_limit", &ContactSettings::roll_limit)
      .def_readwrite("n_interior", &ContactSettings::n_interior);

  py::class_<PoseCandidate>(m, "PoseCandidate")
      .def_readonly("reference_side", &PoseCandidate::reference_side)
      .def_readonly("reference", &PoseCandidate::reference)
      .def_readonly("other_reference", &PoseCandidate::other_reference)
      .def_readonly("yaw", &PoseCandidate::yaw)
      .def_readonly("pitch", &PoseCandidate::pitch)
      .def_readonly("roll", &PoseCandidate::roll)
      .def("morphology", &PoseCandidate::morphology);

  m.def("get_pose_candidates", &get_pose_candidates, py::arg("reference"), py::arg("side"),
        py::arg("inflated"), py::arg("params"), py::arg("settings") = ContactSettings{});
  m.def(
      "get_flipper_angles",
      [](const PoseCandidate& c, const InflatedMap& d, const RobotParams& p,
         const ContactSettings& s) { return get_flipper_angles(c, d, p, s).angles; },
      py::arg("candidate"), py::arg("inflated"), py::arg("params"),
      py::arg("settings") = ContactSettings{});

  py::class_<SearchSettings>(m, "SearchSettings")
      .def(py::init<>())
      .def_readwrite("dx", &SearchSettings::dx)
      .def_readwrite("dh", &SearchSettings::dh)
      .def_readwrite("h_samples", &SearchSettings::h_samples)
      .def_readwrite("target_x", &SearchSettings::target_x)
      .def_readwrite("cost_sample_step", &SearchSettings::cost_sample_step)
      .def_readwrite("beam_width", &SearchSettings::beam_width)
      .def_readwrite("contact", &SearchSettings::contact);

  py::class_<PlanStep>(m, "PlanStep")
      .def_readonly("morphology", &PlanStep::morphology)
      .def_readonly("cost", &PlanStep::cost)
      .def_readonly("reference_side", &PlanStep::reference_side);

  py::class_<PlanPath>(m, "PlanPath")
      .def_readonly("start", &PlanPath::start)
      .def_readonly("steps", &PlanPath::steps)
      .def_readonly("map_hash", &PlanPath::map_hash)
      .def("total_cost", &PlanPath::total_cost)
      .def("__len__", [](const PlanPath& p) { return p.steps.size(); })
      .def("__eq__", [](const PlanPath& a, const PlanPath& b) { return a == b; });

  m.def("step_cost", &step_cost, py::arg("morphology"), py::arg("inflated"), py::arg("params"),
        py::arg("sample_step") = 0.005);
  m.def("make_start_pose", &make_start_pose, py::arg("inflated"), py::arg("params"),
        py::arg("x") = 0.0, py::arg("settings") = ContactSettings{});
  m.def(
      "plan",
      [](const Morphology& start, const InflatedMap& d, const ElevationMap& h,
         const RobotParams& p, const SearchSettings& s) { return plan(start, d, h, p, s); },
      py::arg("start"), py::arg("inflated"), py::arg("heights"), py::arg("params"),
      py::arg("settings") = SearchSettings{}, py::call_guard<py::gil_scoped_release>());
  m.def("export_path", &export_path, py::arg("path"), py::arg("file"));
  m.def("import_path", &import_path, py::arg("file"));

  py::class_<Disturbance> dist(m, "Disturbance");
  py::enum_<Disturbance::Kind>(dist, "Kind")
      .value("NONE", Disturbance::Kind::None)
      .value("YAW_DRIFT", Disturbance::Kind::YawDrift)
      .value("GAUSSIAN_POSITION", Disturbance::Kind::GaussianPosition);
  dist.def(py::init<>())
      .def_readwrite("kind", &Disturbance::kind)
      .def_readwrite("yaw_drift", &Disturbance::yaw_drift)
      .def_readwrite("position_sigma", &Disturbance::position_sigma)
      .def_readwrite("seed", &Disturbance::seed)
      .def_readwrite("pitch_shift", &Disturbance::pitch_shift);

  py::class_<FollowerSettings>(m, "FollowerSettings")
      .def(py::init<>())
      .def_readwrite("tick_rate", &FollowerSettings::tick_rate)
      .def_readwrite("speed", &FollowerSettings::speed)
      .def_readwrite("reach_radius", &FollowerSettings::reach_radius)
      .def_readwrite("yaw_gain", &FollowerSettings::yaw_gain)
      .def_readwrite("ticks_max", &FollowerSettings::ticks_max)
      .def_readwrite("pitch_compensation", &FollowerSettings::pitch_compensation);

  py::class_<TrackingReport>(m, "TrackingReport")
      .def_readonly("completed", &TrackingReport::completed)
      .def_property_readonly("ticks", [](const TrackingReport& r) { return r.records.size(); })
      .def_property_readonly("target_index",
                             [](const TrackingReport& r) {
                               std::vector<std::size_t> idx;
                               for (const auto& rec : r.records) idx.push_back(rec.target_index);
                               return idx;
                             })
      .def_property_readonly("actual_position",
                             [](const TrackingReport& r) {
                               return stack_field(r.records, &TrackingRecord::actual_position);
                             })
      .def_property_readonly("target_position",
                             [](const TrackingReport& r) {
                               return stack_field(r.records, &TrackingRecord::target_position);
                             })
      .def_property_readonly("position_error",
                             [](const TrackingReport& r) {
                               return stack(r.records, &TrackingRecord::position_error);
                             })
      .def_property_readonly("orientation_error", [](const TrackingReport& r) {
        return stack(r.records, &TrackingRecord::orientation_error);
      });

  m.def("pitch_compensation", &pitch_compensation, py::arg("pitch"), py::arg("params"));
  m.def("follow", &follow, py::arg("path"), py::arg("params"),
        py::arg("disturbance") = Disturbance{}, py::arg("settings") = FollowerSettings{});
  m.def("write_report", &write_report, py::arg("report"), py::arg("dir"));
}

#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "flipper/error.hpp"
#include "flipper/follower.hpp"
#include "flipper/inflation.hpp"
#include "flipper/path_search.hpp"
#include "flipper/robot_model.hpp"
#include "flipper/terrain.hpp"
#include "io_util.hpp"

namespace flipper::cli {
namespace {

using detail::format_double;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A failed run that still produced its outputs (e.g. a sweep with infeasible cases).
class PartialFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  RobotParams params;
  SearchSettings search;
  FollowerSettings follower;
  Disturbance disturbance;
  ObstacleSpec obstacle;

  std::string params_file;
  std::string config_file;
  std::string disturbance_kind = "none";
  std::optional<std::uint64_t> seed;
  bool h_samples_explicit = false;

  std::uint64_t seed_flag = 0;
  std::vector<CLI::Option*> seed_options;
};

/// Flag values are held apart and copied over the config-file values after
/// both are known, so that explicit flags win.
class Overrides {
 public:
  template <class T>
  CLI::Option* add(CLI::App* app, const std::string& name, T& target, const std::string& help) {
    auto holder = std::make_shared<T>(target);
    CLI::Option* opt = app->add_option(name, *holder, help);
    apply_.push_back([opt, holder, &target] {
      if (opt->count() > 0) target = *holder;
    });
    return opt;
  }

  void apply() const {
    for (const auto& f : apply_) f();
  }

 private:
  std::vector<std::function<void()>> apply_;
};

void apply_config_file(RunConfig& cfg) {
  if (cfg.config_file.empty()) return;
  std::ifstream in(cfg.config_file);
  if (!in) throw IoError("cannot open '" + cfg.config_file + "' for reading");

  using Setter = std::function<void(std::string_view, std::size_t)>;
  const std::string& src = cfg.config_file;
  const auto num = [&](double& field) {
    return Setter([&field, &src](std::string_view v, std::size_t line) {
      field = detail::parse_double(v, src, line);
    });
  };
  const auto count = [&](std::size_t& field) {
    return Setter([&field, &src](std::string_view v, std::size_t line) {
      field = detail::parse_count(v, src, line);
    });
  };
  SearchSettings& s = cfg.search;
  FollowerSettings& f = cfg.follower;
  Disturbance& d = cfg.disturbance;
  const std::map<std::string, Setter, std::less<>> setters{
      {"dx", num(s.dx)},
      {"dh", num(s.dh)},
      {"h_samples",
       [&](std::string_view v, std::size_t line) {
         s.h_samples = detail::parse_count(v, src, line);
         cfg.h_samples_explicit = true;
       }},
      {"target_x", num(s.target_x)},
      {"cost_sample_step", num(s.cost_sample_step)},
      {"beam_width", count(s.beam_width)},
      {"n_interior", count(s.contact.n_interior)},
      {"epsilon", num(s.contact.epsilon)},
      {"sample_step", num(s.contact.sample_step)},
      {"angle_tolerance", num(s.contact.angle_tolerance)},
      {"roll_limit", num(s.contact.roll_limit)},
      {"tick_rate", num(f.tick_rate)},
      {"speed", num(f.speed)},
      {"reach_radius", num(f.reach_radius)},
      {"yaw_gain", num(f.yaw_gain)},
      {"ticks_max", count(f.ticks_max)},
      {"yaw_drift", num(d.yaw_drift)},
      {"position_sigma", num(d.position_sigma)},
      {"seed",
       [&](std::string_view v, std::size_t line) {
         cfg.seed = detail::parse_count(v, src, line);
       }},
  };

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(src, line_no, "expected 'name = value'");
    const std::string_view key = detail::trim(line.substr(0, eq));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw ParseError(src, line_no, "unknown config key '" + std::string(key) + "'");
    }
    it->second(detail::trim(line.substr(eq + 1)), line_no);
  }
}

void add_config_options(CLI::App* app, RunConfig& cfg) {
  app->add_option("--params", cfg.params_file, "Robot parameter file (name = value)");
  app->add_option("--config", cfg.config_file,
                  "Run settings file (name = value); explicit flags take precedence");
}

void add_search_options(CLI::App* app, RunConfig& cfg, Overrides& o) {
  o.add(app, "--dx", cfg.search.dx, "Forward step of the reference point (m)");
  o.add(app, "--dh", cfg.search.dh, "Reference height sample spacing (m)");
  auto* hs = o.add(app, "--h-samples", cfg.search.h_samples, "Reference heights per step");
  hs->each([&cfg](const std::string&) { cfg.h_samples_explicit = true; });
  o.add(app, "--target-x", cfg.search.target_x, "Stop once the rear axle midpoint reaches this x (m)");
  o.add(app, "--cost-step", cfg.search.cost_sample_step, "Cost sampling step (m)");
  o.add(app, "--beam-width", cfg.search.beam_width, "Partial paths kept per step");
  o.add(app, "--n-interior", cfg.search.contact.n_interior, "Interior pitch samples");
}

void add_obstacle_options(CLI::App* app, RunConfig& cfg, Overrides& o) {
  ObstacleSpec& s = cfg.obstacle;
  o.add(app, "--axis-distance", s.axis_distance, "Distance to the rotation axis (m)");
  o.add(app, "--height", s.obstacle_height, "Obstacle height (m)");
  o.add(app, "--slope-run", s.slope_run, "Ramp footprint length (m)");
  o.add(app, "--extent-x", s.map_extent.x(), "Map length along x (m)");
  o.add(app, "--extent-y", s.map_extent.y(), "Map width along y (m)");
  o.add(app, "--resolution", s.resolution, "Cell size (m)");
  o.add(app, "--rear-margin", s.rear_margin, "Map kept behind the start (m)");
}

void add_disturbance_options(CLI::App* app, RunConfig& cfg, Overrides& o) {
  app->add_option("--disturbance", cfg.disturbance_kind, "none | yaw-drift | gaussian")
      ->check(CLI::IsMember({"none", "yaw-drift", "gaussian"}));
  o.add(app, "--yaw-drift", cfg.disturbance.yaw_drift, "Yaw added per tick (rad)");
  o.add(app, "--sigma", cfg.disturbance.position_sigma, "Gaussian x/y noise per tick (m)");
  cfg.seed_options.push_back(app->add_option("--seed", cfg.seed_flag, "Seed of the noise generator"));
  app->add_flag("--pitch-shift", cfg.disturbance.pitch_shift,
                "Shift the measured rear axle by pitch * wheel radius");
  app->add_flag("--pitch-compensation", cfg.follower.pitch_compensation,
                "Remove the pitch shift before the reach test");
  o.add(app, "--ticks-max", cfg.follower.ticks_max, "Tick budget of the follower");
  o.add(app, "--speed", cfg.follower.speed, "Forward speed (m/s)");
  o.add(app, "--reach-radius", cfg.follower.reach_radius, "Target reach radius (m)");
  o.add(app, "--yaw-gain", cfg.follower.yaw_gain, "Yaw correction per tick (fraction)");
}

void finalize(RunConfig& cfg, const Overrides& o) {
  if (!cfg.params_file.empty()) cfg.params = load_robot_params(cfg.params_file);
  apply_config_file(cfg);
  o.apply();
  for (const CLI::Option* opt : cfg.seed_options) {
    if (opt->count() > 0) cfg.seed = cfg.seed_flag;
  }

  if (cfg.disturbance_kind == "none") {
    cfg.disturbance.kind = Disturbance::Kind::None;
  } else if (cfg.disturbance_kind == "yaw-drift") {
    cfg.disturbance.kind = Disturbance::Kind::YawDrift;
  } else {
    cfg.disturbance.kind = Disturbance::Kind::GaussianPosition;
    if (!cfg.seed) throw UsageError("--seed is required for the gaussian disturbance");
  }
  cfg.disturbance.seed = cfg.seed;

  cfg.params.validate();
  cfg.search.validate();
  cfg.follower.validate();
  cfg.disturbance.validate();
}

void require_file(const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) throw IoError("no such file '" + path + "'");
}

InflatedMap inflate_for(const ElevationMap& map, const RobotParams& p,
                        const std::string& inflated_file) {
  if (inflated_file.empty()) return inflate(map, p.wheel_radius);
  InflatedMap d = load_inflated_map(inflated_file, map_format_from_path(inflated_file));
  if (!(d.geometry() == map.geometry())) {
    throw InvalidArgument("inflated map grid differs from the elevation map grid");
  }
  if (d.source_radius() != p.wheel_radius) {
    throw InvalidArgument("inflated map radius differs from wheel_radius");
  }
  return d;
}

void write_candidates(const std::string& file, const std::vector<CandidateRecord>& records) {
  detail::write_file_atomically(file, [&](std::ostream& out) {
    out << "# step side height_index pitch roll cost ref_x ref_y ref_z\n";
    for (const auto& r : records) {
      out << r.step << ' ' << side_code(r.reference_side) << ' ' << r.height_index << ' '
          << format_double(r.pitch) << ' ' << format_double(r.roll) << ' '
          << format_double(r.cost) << ' ' << format_double(r.reference.x()) << ' '
          << format_double(r.reference.y()) << ' ' << format_double(r.reference.z()) << '\n';
    }
  });
}

/// Reference heights must reach the top of the obstacle plus the wheel radius
/// for the rear axle to ride onto it.
std::size_t sweep_h_samples(const RunConfig& cfg) {
  if (cfg.h_samples_explicit) return cfg.search.h_samples;
  const double span = cfg.obstacle.obstacle_height + cfg.params.wheel_radius;
  const auto needed = static_cast<std::size_t>(std::ceil(span / cfg.search.dh - 1e-9)) + 1;
  return std::max(cfg.search.h_samples, needed);
}

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out;
}

int report_error(std::ostream& err, int code, std::string_view kind, std::string_view message) {
  err << "error: code=" << code << " kind=" << kind << " message=\"" << escape(message) << "\"\n";
  return code;
}

struct SweepRow {
  std::string kind;
  double rotation = 0.0;
  bool planned = false;
  bool followed = false;
  std::size_t steps = 0;
  double total_cost = 0.0;
  std::size_t ticks = 0;
  double final_error = 0.0;
  Eigen::Vector3d max_error = Eigen::Vector3d::Zero();
  std::string message;
};

void run_sweep(const RunConfig& base, const std::string& out_dir, const std::string& kinds_arg,
               double rot_min, double rot_max, double rot_step, std::ostream& out) {
  if (!(rot_step > 0.0)) throw UsageError("--rot-step must be > 0");
  if (!(rot_max >= rot_min)) throw UsageError("--rot-max must be >= --rot-min");
  std::vector<ObstacleKind> kinds;
  for (auto k : detail::split(kinds_arg, ",")) kinds.push_back(parse_obstacle_kind(detail::trim(k)));
  if (kinds.empty()) throw UsageError("--kinds is empty");
  std::vector<double> rotations;
  for (long long i = 0;; ++i) {
    const double r = rot_min + static_cast<double>(i) * rot_step;
    if (r > rot_max + 1e-9) break;
    rotations.push_back(r);
  }

  // Validate every case before running any of them.
  for (ObstacleKind kind : kinds) {
    for (double rot : rotations) {
      ObstacleSpec spec = base.obstacle;
      spec.kind = kind;
      spec.rotation_deg = rot;
      spec.validate();
    }
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir + "': " + ec.message());

  std::vector<SweepRow> rows;
  std::size_t case_index = 0;
  for (ObstacleKind kind : kinds) {
    for (double rot : rotations) {
      RunConfig cfg = base;
      cfg.obstacle.kind = kind;
      cfg.obstacle.rotation_deg = rot;
      cfg.search.h_samples = sweep_h_samples(cfg);
      if (cfg.seed) cfg.disturbance.seed = *cfg.seed + case_index;
      ++case_index;

      SweepRow row;
      row.kind = std::string(to_string(kind));
      row.rotation = rot;
      std::ostringstream name;
      name << row.kind << '_' << std::setw(2) << std::setfill('0') << std::llround(rot);
      const std::filesystem::path case_dir = std::filesystem::path(out_dir) / name.str();
      std::filesystem::create_directories(case_dir, ec);
      if (ec) throw IoError("cannot create '" + case_dir.string() + "': " + ec.message());

      const ElevationMap map = generate_obstacle(cfg.obstacle);
      const InflatedMap d = inflate(map, cfg.params.wheel_radius);
      try {
        const Morphology start = make_start_pose(d, cfg.params, 0.0, cfg.search.contact);
        const PlanPath path = plan(start, d, map, cfg.params, cfg.search);
        export_path(path, case_dir / "path.txt");
        row.planned = true;
        row.steps = path.steps.size();
        row.total_cost = path.total_cost();

        const TrackingReport rep = follow(path, cfg.params, cfg.disturbance, cfg.follower);
        write_report(rep, case_dir / "report");
        row.followed = rep.completed;
        row.ticks = rep.records.size();
        if (!rep.records.empty()) row.final_error = rep.records.back().position_error().norm();
        row.max_error = rep.summary().max_abs_position_error;
        if (!rep.completed) row.message = "tick budget exhausted";
      } catch (const DeadEndError& e) {
        row.message = e.what();
      } catch (const InvalidArgument& e) {
        row.message = e.what();
      }
      rows.push_back(row);
    }
  }

  detail::write_file_atomically(std::filesystem::path(out_dir) / "summary.csv",
                                [&](std::ostream& csv) {
    csv << "kind,rotation_deg,planned,followed,steps,total_cost,ticks,final_error,"
           "max_abs_error_x,max_abs_error_y,max_abs_error_z,message\n";
    for (const SweepRow& r : rows) {
      csv << r.kind << ',' << format_double(r.rotation) << ',' << (r.planned ? 1 : 0) << ','
          << (r.followed ? 1 : 0) << ',' << r.steps << ',' << format_double(r.total_cost) << ','
          << r.ticks << ',' << format_double(r.final_error) << ','
          << format_double(r.max_error.x()) << ',' << format_double(r.max_error.y()) << ','
          << format_double(r.max_error.z()) << ",\"" << escape(r.message) << "\"\n";
    }
  });

  // Table in the shape of the experiment grid: one row per kind, 1 = success.
  for (const char* what : {"planned", "followed"}) {
    out << what << '\n' << std::setw(8) << "kind";
    for (double rot : rotations) out << std::setw(5) << format_double(rot);
    out << '\n';
    std::size_t i = 0;
    for (ObstacleKind kind : kinds) {
      out << std::setw(8) << to_string(kind);
      for (std::size_t j = 0; j < rotations.size(); ++j, ++i) {
        const bool ok = std::string_view(what) == "planned" ? rows[i].planned : rows[i].followed;
        out << std::setw(5) << (ok ? 1 : 0);
      }
      out << '\n';
    }
  }

  std::size_t failed = 0;
  for (const SweepRow& r : rows) failed += r.planned ? 0 : 1;
  if (failed > 0) {
    throw PartialFailure(std::to_string(failed) + " of " + std::to_string(rows.size()) +
                         " sweep cases have no feasible plan");
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Flipper morphology planning for a tracked robot", "flipperplan"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  RunConfig cfg;
  Overrides overrides;

  // params
  bool dump = false;
  CLI::App* params_cmd = app.add_subcommand("params", "Show robot parameters");
  params_cmd->add_flag("--dump", dump, "Print parameters as a loadable file")->required();
  params_cmd->add_option("--params", cfg.params_file, "Robot parameter file to merge");

  // gen-map
  std::string kind_name, map_out;
  CLI::App* gen_cmd = app.add_subcommand("gen-map", "Generate a synthetic obstacle map");
  gen_cmd->add_option("--kind", kind_name, "step | ramp | iramp")->required();
  overrides.add(gen_cmd, "--rot", cfg.obstacle.rotation_deg, "Rotation about the axis (deg)");
  add_obstacle_options(gen_cmd, cfg, overrides);
  gen_cmd->add_option("--out", map_out, "Output map (.csv selects CSV)")->required();

  // inflate
  std::string map_in, inflated_out;
  double radius = 0.0;
  CLI::App* inflate_cmd = app.add_subcommand("inflate", "Inflate an elevation map");
  inflate_cmd->add_option("--map", map_in, "Elevation map")->required();
  inflate_cmd->add_option("--out", inflated_out, "Output inflated map")->required();
  CLI::Option* radius_opt =
      inflate_cmd->add_option("--radius", radius, "Kernel radius (default: wheel_radius)");
  inflate_cmd->add_option("--params", cfg.params_file, "Robot parameter file");

  // plan
  std::string plan_map, plan_inflated, plan_out, debug_file;
  double start_x = 0.0;
  CLI::App* plan_cmd = app.add_subcommand("plan", "Plan a morphology sequence");
  plan_cmd->add_option("--map", plan_map, "Elevation map")->required();
  plan_cmd->add_option("--inflated", plan_inflated, "Pre-inflated map (default: inflate --map)");
  plan_cmd->add_option("--out", plan_out, "Output path file")->required();
  plan_cmd->add_option("--start-x", start_x, "x of the rear axle midpoint at the start (m)");
  plan_cmd->add_option("--debug-candidates", debug_file, "Dump every scored candidate");
  add_config_options(plan_cmd, cfg);
  add_search_options(plan_cmd, cfg, overrides);

  // simulate
  std::string sim_path, sim_out;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Replay a path with the follower");
  sim_cmd->add_option("--path", sim_path, "Path file")->required();
  sim_cmd->add_option("--out-dir", sim_out, "Report directory")->required();
  add_config_options(sim_cmd, cfg);
  add_disturbance_options(sim_cmd, cfg, overrides);

  // sweep
  std::string sweep_out, kinds = "step,ramp,iramp";
  double rot_min = 0.0, rot_max = 40.0, rot_step = 5.0;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Plan and replay every obstacle case");
  sweep_cmd->add_option("--out-dir", sweep_out, "Output directory")->required();
  sweep_cmd->add_option("--kinds", kinds, "Comma-separated obstacle kinds");
  sweep_cmd->add_option("--rot-min", rot_min, "First rotation (deg)");
  sweep_cmd->add_option("--rot-max", rot_max, "Last rotation (deg)");
  sweep_cmd->add_option("--rot-step", rot_step, "Rotation increment (deg)");
  add_config_options(sweep_cmd, cfg);
  add_search_options(sweep_cmd, cfg, overrides);
  add_obstacle_options(sweep_cmd, cfg, overrides);
  add_disturbance_options(sweep_cmd, cfg, overrides);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    return report_error(err, kUsage, "usage", e.what());
  }

  try {
    if (*params_cmd) {
      finalize(cfg, overrides);
      write_robot_params(out, cfg.params);
    } else if (*gen_cmd) {
      cfg.obstacle.kind = parse_obstacle_kind(kind_name);
      finalize(cfg, overrides);
      cfg.obstacle.validate();
      if (cfg.obstacle.rotation_deg > 40.0) {
        err << "warning: rotation " << format_double(cfg.obstacle.rotation_deg)
            << " deg is outside the 0-40 deg experiment sweep\n";
      }
      save_map(generate_obstacle(cfg.obstacle), map_out, map_format_from_path(map_out));
    } else if (*inflate_cmd) {
      finalize(cfg, overrides);
      require_file(map_in);
      const double r = radius_opt->count() > 0 ? radius : cfg.params.wheel_radius;
      const ElevationMap map = load_map(map_in, map_format_from_path(map_in));
      save_inflated_map(inflate(map, r), inflated_out, map_format_from_path(inflated_out));
    } else if (*plan_cmd) {
      finalize(cfg, overrides);
      require_file(plan_map);
      if (!plan_inflated.empty()) require_file(plan_inflated);
      const ElevationMap map = load_map(plan_map, map_format_from_path(plan_map));
      const InflatedMap d = inflate_for(map, cfg.params, plan_inflated);
      Morphology start;
      try {
        start = make_start_pose(d, cfg.params, start_x, cfg.search.contact);
      } catch (const InvalidArgument& e) {
        return report_error(err, kInfeasible, "infeasible", e.what());
      }
      std::vector<CandidateRecord> records;
      CandidateSink sink;
      if (!debug_file.empty()) sink = [&](const CandidateRecord& r) { records.push_back(r); };
      try {
        const PlanPath path = plan(start, d, map, cfg.params, cfg.search, sink);
        export_path(path, plan_out);
        if (!debug_file.empty()) write_candidates(debug_file, records);
        out << "planned " << path.steps.size() << " steps, total cost "
            << format_double(path.total_cost()) << '\n';
      } catch (const DeadEndError& e) {
        if (!debug_file.empty()) write_candidates(debug_file, records);
        return report_error(err, kInfeasible, "infeasible", e.what());
      }
    } else if (*sim_cmd) {
      finalize(cfg, overrides);
      require_file(sim_path);
      const PlanPath path = import_path(sim_path);
      const RobotParams& p = cfg.params_file.empty() ? path.params : cfg.params;
      const TrackingReport rep = follow(path, p, cfg.disturbance, cfg.follower);
      write_report(rep, sim_out);
      if (!rep.completed) {
        err << "warning: tick budget exhausted before the final target\n";
      }
      out << "simulated " << rep.records.size() << " ticks, completed "
          << (rep.completed ? 1 : 0) << '\n';
    } else if (*sweep_cmd) {
      // A seed alone selects the gaussian disturbance.
      if (sweep_cmd->count("--seed") > 0 && sweep_cmd->count("--disturbance") == 0) {
        cfg.disturbance_kind = "gaussian";
      }
      finalize(cfg, overrides);
      run_sweep(cfg, sweep_out, kinds, rot_min, rot_max, rot_step, out);
    }
  } catch (const UsageError& e) {
    return report_error(err, kUsage, "usage", e.what());
  } catch (const InvalidArgument& e) {
    return report_error(err, kUsage, "invalid_argument", e.what());
  } catch (const PartialFailure& e) {
    return report_error(err, kInfeasible, "infeasible", e.what());
  } catch (const DeadEndError& e) {
    return report_error(err, kInfeasible, "infeasible", e.what());
  } catch (const ParseError& e) {
    return report_error(err, kIo, "parse", e.what());
  } catch (const IoError& e) {
    return report_error(err, kIo, "io", e.what());
  } catch (const Error& e) {
    return report_error(err, kUsage, "error", e.what());
  }
  return kOk;
}

}  // namespace flipper::cli

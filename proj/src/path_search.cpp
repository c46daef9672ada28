#include "flipper/path_search.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <tuple>

#include "io_util.hpp"

namespace flipper {

void SearchSettings::validate() const {
  if (!(dx > 0.0)) throw InvalidArgument("dx must be > 0");
  if (!(dh > 0.0)) throw InvalidArgument("dh must be > 0");
  if (h_samples < 1) throw InvalidArgument("h_samples must be >= 1");
  if (!(cost_sample_step > 0.0)) throw InvalidArgument("cost_sample_step must be > 0");
  if (beam_width < 1) throw InvalidArgument("beam_width must be >= 1");
  if (!std::isfinite(target_x)) throw InvalidArgument("target_x must be finite");
  contact.validate();
}

double PlanPath::total_cost() const {
  return std::accumulate(steps.begin(), steps.end(), 0.0,
                         [](double acc, const PlanStep& s) { return acc + s.cost; });
}

double step_cost(const Morphology& m, const InflatedMap& d, const RobotParams& p,
                 double sample_step) {
  const Skeleton sk = forward_kinematics(m, p);
  double cost = 0.0;
  for (const Eigen::Vector3d& q : sample_segment(sk.middle_rear(), sk.middle_front(), sample_step)) {
    const double gap = q.z() - d.value_at(q.x(), q.y());
    cost += gap * gap;
  }
  return cost;
}

namespace {

std::string describe_dead_end(double x, const std::map<std::string, std::size_t>& reasons,
                              const std::optional<double>& best) {
  std::ostringstream msg;
  msg << "no feasible configuration after x=" << detail::format_double(x);
  if (!reasons.empty()) {
    msg << " (";
    bool first = true;
    for (const auto& [name, count] : reasons) {
      msg << (first ? "" : ", ") << name << '=' << count;
      first = false;
    }
    msg << ')';
  }
  if (best) msg << ", best skeleton clearance " << detail::format_double(*best);
  return msg.str();
}

}  // namespace

DeadEndError::DeadEndError(double x, std::map<std::string, std::size_t> reasons,
                           std::optional<double> best_clearance)
    : Error(describe_dead_end(x, reasons, best_clearance)),
      x_(x),
      reasons_(std::move(reasons)),
      best_clearance_(best_clearance) {}

Morphology make_start_pose(const InflatedMap& d, const RobotParams& p, double x,
                           const ContactSettings& s) {
  p.validate();
  const double half = 0.5 * p.robot_width;
  double z = -std::numeric_limits<double>::infinity();
  for (double y : {half, -half}) {
    for (const Eigen::Vector3d& q :
         sample_segment({x, y, 0.0}, {x + p.base_length, y, 0.0}, s.sample_step)) {
      z = std::max(z, d.value_at(q.x(), q.y()));
    }
  }

  PoseCandidate c;
  c.reference_side = Side::Left;
  c.reference = {x, half, z};
  c.other_reference = {x, -half, z};
  Morphology m = c.morphology();
  try {
    m.flippers = get_flipper_angles(c, d, p, s).angles;
  } catch (const ContactError& e) {
    throw InvalidArgument(std::string("start pose: ") + e.what());
  }
  if (!check_skeleton(m, d, p, s).feasible(s.epsilon)) {
    throw InvalidArgument("start pose is not feasible on this map");
  }
  return m;
}

namespace {

struct Scored {
  double cost;
  std::size_t height_index;
  Side side;
  PoseCandidate candidate;
};

bool scored_before(const Scored& a, const Scored& b) {
  const auto key = [](const Scored& s) {
    return std::make_tuple(s.cost, s.height_index, s.side == Side::Left ? 0 : 1,
                           std::abs(s.candidate.pitch), std::abs(s.candidate.roll));
  };
  return key(a) < key(b);
}

struct Diagnostics {
  std::map<std::string, std::size_t> reasons;
  std::optional<double> best_clearance;

  void count(const std::string& reason) { ++reasons[reason]; }
};

/// Up to `wanted` feasible successors of `parent`, cheapest first.
std::vector<PlanStep> expand(const Morphology& parent, std::size_t step_index,
                             const InflatedMap& d, const ElevationMap& heights,
                             const RobotParams& p, const SearchSettings& s, std::size_t wanted,
                             Diagnostics& diag, const CandidateSink& sink) {
  std::vector<Scored> scored;
  for (Side side : {Side::Left, Side::Right}) {
    Eigen::Vector3d ref = parent.reference(side);
    ref.x() += s.dx;
    for (std::size_t k = 0; k < s.h_samples; ++k) {
      std::vector<PoseCandidate> cands;
      try {
        ref.z() = heights.height_at(ref.x(), ref.y()) + static_cast<double>(k) * s.dh;
        cands = get_pose_candidates(ref, side, d, p, s.contact);
      } catch (const OutOfMapError&) {
        diag.count("out_of_map");
        break;
      }
      if (cands.empty()) diag.count("no_pose");
      for (auto& c : cands) {
        try {
          const double cost = step_cost(c.morphology(), d, p, s.cost_sample_step);
          scored.push_back({cost, k, side, std::move(c)});
        } catch (const OutOfMapError&) {
          diag.count("out_of_map");
        }
      }
    }
  }
  std::stable_sort(scored.begin(), scored.end(), scored_before);

  if (sink) {
    for (const Scored& c : scored) {
      sink({step_index, c.side, c.height_index, c.candidate.pitch, c.candidate.roll, c.cost,
            c.candidate.reference});
    }
  }

  std::vector<PlanStep> out;
  for (const Scored& c : scored) {
    if (out.size() >= wanted) break;
    Morphology m = c.candidate.morphology();
    try {
      m.flippers = get_flipper_angles(c.candidate, d, p, s.contact).angles;
      const SkeletonCheck check = check_skeleton(m, d, p, s.contact);
      if (!check.feasible(s.contact.epsilon)) {
        diag.count(check.contact.punctures(s.contact.epsilon) ? "skeleton_puncture"
                                                              : "unsupported");
        if (!diag.best_clearance || check.contact.min_clearance > *diag.best_clearance) {
          diag.best_clearance = check.contact.min_clearance;
        }
        continue;
      }
    } catch (const ContactError&) {
      diag.count("flipper_puncture");
      continue;
    } catch (const OutOfMapError&) {
      diag.count("out_of_map");
      continue;
    }
    out.push_back({m, c.cost, c.side});
  }
  return out;
}

struct Branch {
  std::vector<PlanStep> steps;
  double total = 0.0;
  Morphology last;
};

}  // namespace

PlanPath plan(const Morphology& start, const InflatedMap& d, const ElevationMap& heights,
              const RobotParams& p, const SearchSettings& s, const CandidateSink& sink) {
  p.validate();
  s.validate();
  if (!(d.geometry() == heights.geometry())) {
    throw InvalidArgument("inflated map and elevation map must share one grid");
  }
  const double start_x = start.middle_ref().x();
  if (!(s.target_x > start_x)) throw InvalidArgument("target_x must lie ahead of the start");
  if (!d.geometry().contains(s.target_x, 0.0)) throw InvalidArgument("target_x lies outside the map");
  if (!check_skeleton(start, d, p, s.contact).feasible(s.contact.epsilon)) {
    throw InvalidArgument("start pose is not feasible");
  }

  const double goal = s.target_x - 1e-9;
  const auto reached = [&](const Branch& b) { return b.last.middle_ref().x() >= goal; };
  // Each step advances one reference by dx, so S_middle,2 gains about dx.
  const auto max_steps =
      static_cast<std::size_t>(std::ceil((s.target_x - start_x) / s.dx)) * 4 + 16;

  std::vector<Branch> beam{{{}, 0.0, start}};
  for (std::size_t step = 0; !std::all_of(beam.begin(), beam.end(), reached); ++step) {
    if (step >= max_steps) {
      throw DeadEndError(beam.front().last.middle_ref().x(), {{"no_progress", 1}}, std::nullopt);
    }
    Diagnostics diag;
    std::vector<Branch> next;
    for (const Branch& b : beam) {
      if (reached(b)) {
        next.push_back(b);
        continue;
      }
      for (PlanStep& child : expand(b.last, step, d, heights, p, s, s.beam_width, diag, sink)) {
        Branch nb = b;
        nb.total += child.cost;
        nb.last = child.morphology;
        nb.steps.push_back(std::move(child));
        next.push_back(std::move(nb));
      }
    }
    if (next.empty()) {
      throw DeadEndError(beam.front().last.middle_ref().x(), std::move(diag.reasons),
                         diag.best_clearance);
    }
    std::stable_sort(next.begin(), next.end(),
                     [](const Branch& a, const Branch& b) { return a.total < b.total; });
    if (next.size() > s.beam_width) next.resize(s.beam_width);
    beam = std::move(next);
  }

  PlanPath out;
  out.start = start;
  out.steps = std::move(beam.front().steps);
  out.map_hash = d.hash();
  out.settings = s;
  out.params = p;
  return out;
}

namespace {

constexpr std::string_view kPathMagic = "flipperplan-path 1";

void write_morphology(std::ostream& out, const Morphology& m) {
  using detail::format_double;
  const double values[] = {m.left_ref.x(),         m.left_ref.y(),          m.left_ref.z(),
                           m.right_ref.x(),        m.right_ref.y(),         m.right_ref.z(),
                           m.yaw,                  m.pitch,                 m.roll,
                           m.flippers.front_left,  m.flippers.front_right,  m.flippers.rear_left,
                           m.flippers.rear_right};
  for (std::size_t i = 0; i < std::size(values); ++i) {
    out << (i ? " " : "") << format_double(values[i]);
  }
}

Morphology parse_morphology(const std::vector<std::string_view>& tokens, std::size_t offset,
                            const std::string& source, std::size_t line) {
  double v[13];
  for (std::size_t i = 0; i < 13; ++i) v[i] = detail::parse_double(tokens[offset + i], source, line);
  Morphology m;
  m.left_ref = {v[0], v[1], v[2]};
  m.right_ref = {v[3], v[4], v[5]};
  m.yaw = v[6];
  m.pitch = v[7];
  m.roll = v[8];
  m.flippers = {v[9], v[10], v[11], v[12]};
  return m;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

}  // namespace

void write_path(std::ostream& out, const PlanPath& path) {
  using detail::format_double;
  const SearchSettings& s = path.settings;
  const RobotParams& p = path.params;
  out << "# " << kPathMagic << '\n';
  out << "# map_hash " << hex64(path.map_hash) << '\n';
  out << "# settings dx=" << format_double(s.dx) << " dh=" << format_double(s.dh)
      << " h_samples=" << s.h_samples << " target_x=" << format_double(s.target_x)
      << " cost_sample_step=" << format_double(s.cost_sample_step)
      << " beam_width=" << s.beam_width << " epsilon=" << format_double(s.contact.epsilon)
      << " sample_step=" << format_double(s.contact.sample_step)
      << " angle_tolerance=" << format_double(s.contact.angle_tolerance)
      << " max_scan_step=" << format_double(s.contact.max_scan_step)
      << " roll_limit=" << format_double(s.contact.roll_limit)
      << " n_interior=" << s.contact.n_interior << '\n';
  out << "# robot wheel_radius=" << format_double(p.wheel_radius)
      << " track_width=" << format_double(p.track_width)
      << " robot_width=" << format_double(p.robot_width)
      << " base_length=" << format_double(p.base_length)
      << " flipper_length=" << format_double(p.flipper_length)
      << " flipper_angle_min=" << format_double(p.flipper_angle_limits.lower)
      << " flipper_angle_max=" << format_double(p.flipper_angle_limits.upper)
      << " pitch_min=" << format_double(p.pitch_search_bounds.lower)
      << " pitch_max=" << format_double(p.pitch_search_bounds.upper) << '\n';
  out << "# start ";
  write_morphology(out, path.start);
  out << '\n';
  out << "# columns x_l y_l z_l x_r y_r z_r psi theta phi alpha_l alpha_r beta_l beta_r cost "
         "side\n";
  for (const PlanStep& st : path.steps) {
    write_morphology(out, st.morphology);
    out << ' ' << format_double(st.cost) << ' ' << side_code(st.reference_side) << '\n';
  }
}

PlanPath read_path(std::istream& in, const std::string& source) {
  PlanPath path;
  std::string raw;
  std::size_t line_no = 0;
  bool seen_magic = false, seen_start = false;

  const auto assign_pairs = [&](const std::vector<std::string_view>& tokens, auto&& setter) {
    for (std::size_t i = 2; i < tokens.size(); ++i) {
      const auto eq = tokens[i].find('=');
      if (eq == std::string_view::npos) throw ParseError(source, line_no, "expected key=value");
      setter(tokens[i].substr(0, eq), tokens[i].substr(eq + 1));
    }
  };

  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = detail::trim(raw);
    if (line.empty()) continue;
    const auto tokens = detail::split(line, " \t");
    if (tokens.front() == "#") {
      if (tokens.size() < 2) continue;
      const std::string_view kind = tokens[1];
      if (!seen_magic) {
        if (detail::trim(line.substr(1)) != kPathMagic) {
          throw ParseError(source, line_no, "not a path file (missing '# " +
                                                std::string(kPathMagic) + "')");
        }
        seen_magic = true;
      } else if (kind == "map_hash") {
        if (tokens.size() != 3) throw ParseError(source, line_no, "expected '# map_hash <hex>'");
        const std::string hex(tokens[2]);
        char* end = nullptr;
        path.map_hash = std::strtoull(hex.c_str(), &end, 16);
        if (hex.empty() || *end != '\0') throw ParseError(source, line_no, "invalid map hash");
      } else if (kind == "settings") {
        SearchSettings& s = path.settings;
        assign_pairs(tokens, [&](std::string_view k, std::string_view v) {
          const auto num = [&] { return detail::parse_double(v, source, line_no); };
          const auto count = [&] { return detail::parse_count(v, source, line_no); };
          if (k == "dx") s.dx = num();
          else if (k == "dh") s.dh = num();
          else if (k == "h_samples") s.h_samples = count();
          else if (k == "target_x") s.target_x = num();
          else if (k == "cost_sample_step") s.cost_sample_step = num();
          else if (k == "beam_width") s.beam_width = count();
          else if (k == "epsilon") s.contact.epsilon = num();
          else if (k == "sample_step") s.contact.sample_step = num();
          else if (k == "angle_tolerance") s.contact.angle_tolerance = num();
          else if (k == "max_scan_step") s.contact.max_scan_step = num();
          else if (k == "roll_limit") s.contact.roll_limit = num();
          else if (k == "n_interior") s.contact.n_interior = count();
          else throw ParseError(source, line_no, "unknown setting '" + std::string(k) + "'");
        });
      } else if (kind == "robot") {
        std::string lines;
        assign_pairs(tokens, [&](std::string_view k, std::string_view v) {
          lines += std::string(k) + " = " + std::string(v) + "\n";
        });
        std::istringstream params_in(lines);
        try {
          path.params = parse_robot_params(params_in, "robot header");
        } catch (const ParseError& e) {
          throw ParseError(source, line_no, e.what());
        }
      } else if (kind == "start") {
        if (tokens.size() != 15) throw ParseError(source, line_no, "start needs 13 values");
        path.start = parse_morphology(tokens, 2, source, line_no);
        seen_start = true;
      }
      continue;
    }
    if (!seen_magic) throw ParseError(source, line_no, "record before path header");
    if (tokens.size() != 15) {
      throw ParseError(source, line_no,
                       "expected 15 fields, found " + std::to_string(tokens.size()));
    }
    PlanStep st;
    st.morphology = parse_morphology(tokens, 0, source, line_no);
    st.cost = detail::parse_double(tokens[13], source, line_no);
    if (tokens[14] == "l") st.reference_side = Side::Left;
    else if (tokens[14] == "r") st.reference_side = Side::Right;
    else throw ParseError(source, line_no, "side must be 'l' or 'r'");
    path.steps.push_back(st);
  }
  if (!seen_magic) throw ParseError(source, line_no, "empty path file");
  if (!seen_start) throw ParseError(source, line_no, "path header lacks '# start'");
  return path;
}

void export_path(const PlanPath& path, const std::filesystem::path& file) {
  detail::write_file_atomically(file, [&](std::ostream& out) { write_path(out, path); });
}

PlanPath import_path(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open '" + file.string() + "' for reading");
  return read_path(in, file.string());
}

}  // namespace flipper

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flipper/config_gen.hpp"
#include "flipper/error.hpp"
#include "flipper/inflation.hpp"
#include "flipper/robot_model.hpp"
#include "flipper/terrain.hpp"

namespace flipper {

struct SearchSettings {
  double dx = 0.02;
  double dh = 0.005;
  std::size_t h_samples = 12;
  double target_x = 0.5;
  double cost_sample_step = 0.005;
  /// Partial paths kept per step; 1 is plain greedy search.
  std::size_t beam_width = 1;
  ContactSettings contact;

  void validate() const;
  bool operator==(const SearchSettings&) const = default;
};

struct PlanStep {
  Morphology morphology;
  double cost = 0.0;
  Side reference_side = Side::Left;

  bool operator==(const PlanStep&) const = default;
};

struct PlanPath {
  Morphology start;
  std::vector<PlanStep> steps;
  std::uint64_t map_hash = 0;
  SearchSettings settings;
  RobotParams params;

  double total_cost() const;
  bool operator==(const PlanPath&) const = default;
};

/// Sum of squared gaps between the base middle line S_middle,2 -> S_middle,1
/// and D, sampled every `sample_step`.
double step_cost(const Morphology& m, const InflatedMap& d, const RobotParams& p,
                 double sample_step);

/// Raised when no feasible configuration exists at some step.
class DeadEndError : public Error {
 public:
  DeadEndError(double x, std::map<std::string, std::size_t> reasons,
               std::optional<double> best_clearance);

  /// x of S_middle,2 of the last feasible configuration.
  double x() const { return x_; }
  const std::map<std::string, std::size_t>& reasons() const { return reasons_; }
  /// Least negative skeleton clearance among rejected, fully resolved candidates.
  const std::optional<double>& best_clearance() const { return best_clearance_; }

 private:
  double x_;
  std::map<std::string, std::size_t> reasons_;
  std::optional<double> best_clearance_;
};

/// A scored configuration as enumerated by the planner, for debugging output.
struct CandidateRecord {
  std::size_t step = 0;
  Side reference_side = Side::Left;
  std::size_t height_index = 0;
  double pitch = 0.0;
  double roll = 0.0;
  double cost = 0.0;
  Eigen::Vector3d reference = Eigen::Vector3d::Zero();
};

using CandidateSink = std::function<void(const CandidateRecord&)>;

/// Level pose with S_middle,2 at (x, 0), resting on the highest D under either
/// base line, flippers resolved to contact. Throws InvalidArgument when that
/// pose is not feasible.
Morphology make_start_pose(const InflatedMap& d, const RobotParams& p, double x = 0.0,
                           const ContactSettings& s = {});

/// Greedy forward search from `start` until S_middle,2 reaches target_x.
/// `heights` is the un-inflated map on the same grid as `d`; reference heights
/// are sampled as h + k * dh. Throws DeadEndError when a step has no feasible
/// configuration.
PlanPath plan(const Morphology& start, const InflatedMap& d, const ElevationMap& heights,
              const RobotParams& p, const SearchSettings& s, const CandidateSink& sink = {});

void write_path(std::ostream& out, const PlanPath& path);
PlanPath read_path(std::istream& in, const std::string& source);
void export_path(const PlanPath& path, const std::filesystem::path& file);
PlanPath import_path(const std::filesystem::path& file);

}  // namespace flipper

#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "langnav/pipeline.hpp"
#include "langnav/planner.hpp"

namespace langnav {

enum class NavStatus { Idle, Navigating, Reached, Unreachable };

std::string_view nav_status_name(NavStatus status);
NavStatus parse_nav_status(std::string_view name);

struct NavConfig {
  PlannerConfig planner{};
  ReactiveConfig reactive{};
  SensorConfig sensor{};
  RobotLimits limits{};
  GroundingConfig grounding{};
  double dt = 0.1;
  // consecutive failed ticks (no local path or no safe command) before giving up
  int max_failures = 20;
  // ticks without getting stall_progress closer to the goal before giving up
  int stall_ticks = 100;
  double stall_progress = 0.01;
  // consecutive local planning failures that force a global replan
  int replan_after = 2;
  // a new goal drops earlier constraints
  bool clear_constraints_on_goal = false;
  std::uint64_t seed = 1;
};

// Throws Error(InvalidConfig).
void validate(const NavConfig& cfg);

struct ObjectSample {
  int id = 0;
  std::string label;
  Vec2 position;
  double radius = 0.0;
};

struct TrajectoryPoint {
  long tick = 0;
  double time = 0.0;
  Pose pose;
  ControlCommand command;
  bool collided = false;
  std::vector<ObjectSample> objects;
};

struct NavState {
  RobotState robot;
  long tick = 0;
  double time = 0.0;
  NavStatus status = NavStatus::Idle;
  std::string reason;

  std::optional<GoalGrounding> goal;
  std::vector<std::string> constraint_nouns;
  std::vector<ConstraintDisk> disks;

  Path global;
  std::vector<Vec2> local;
  std::optional<Vec2> intermediate;
  Costmap costmap;
  DetectionFrame frame;
  ControlCommand command;

  int local_failures = 0;
  int failures = 0;
  int replans = 0;
  int stall = 0;
  double best_distance = 0.0;
  std::vector<TrajectoryPoint> trajectory;
};

// Robot at the map's start pose, idle.
NavState initial_state(const SemanticMap& map, const NavConfig& cfg = {});

// New goal: global plan from the current pose, trajectory restarted.
// Throws whatever the global planner throws; the state is untouched then.
void set_goal(NavState& state, const GoalGrounding& goal, const SemanticMap& map, const ClearanceField& clearance,
              const NavConfig& cfg);

// Registers constraint nouns for dynamic grounding (duplicates ignored).
void add_constraint_nouns(NavState& state, const std::vector<std::string>& nouns);

// Applies a parsed instruction: a grounded goal replaces the active one,
// constraint nouns accumulate. Throws Error(NoGoal) when the command carries
// neither, or the goal error when the goal phrase failed to ground; the
// state is unchanged on any throw.
void apply_instruction(NavState& state, const ParsedCommand& command, const SemanticMap& map,
                       const ClearanceField& clearance, const NavConfig& cfg);

struct StepInfo {
  bool replanned = false;
  bool local_failed = false;
};

// One tick: step_world, sense, ground constraints, update disks, costmap,
// replan if needed, intermediate goal, local A*, reactive layer,
// apply_control, log. Visible objects are marked in the costmap with their
// own footprint besides the constraint disks. Objects move and constraints are grounded even when
// idle; the robot only moves while navigating.
StepInfo navigation_step(SemanticMap& world, NavState& state, const Lexicon& lex, const ClearanceField& clearance,
                         const NavConfig& cfg);

struct PathMetrics {
  double length = 0.0;
  double duration = 0.0;
  // centre-to-centre, per object label
  std::map<std::string, double> min_distance;
  int collisions = 0;
  std::size_t ticks = 0;
};

PathMetrics path_metrics(std::span<const TrajectoryPoint> trajectory);

// Trace: one JSON object per line per tick.
nlohmann::json trace_record(const NavState& state, const StepInfo& info);
std::vector<TrajectoryPoint> read_trace(std::istream& in);

}  // namespace langnav

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "langnav/grounding.hpp"
#include "langnav/kernels.hpp"
#include "langnav/world.hpp"

namespace langnav {

struct PlannerConfig {
  // constraint disks
  double disk_radius = 0.5;
  double moving_margin = 0.2;
  double moving_timeout = 3.0;
  // costmap
  double window = 6.0;
  kernels::InflationParams inflation{};
  // global RRT
  double rrt_step = 0.4;
  double goal_bias = 0.1;
  int rrt_iterations = 20000;
  double rrt_clearance = 0.2;
  int shortcut_attempts = 200;
  // local planning
  double lookahead = 2.0;
  double goal_tolerance = 0.25;
  kernels::Execution execution = kernels::Execution::Serial;
};

// Throws Error(InvalidConfig).
void validate(const PlannerConfig& cfg);

struct ConstraintDisk {
  int object_id = 0;
  std::string label;
  Vec2 center;  // world frame
  double radius = 0.5;
  bool moving = false;
  double last_seen = 0.0;

  bool contains(Vec2 p) const { return squared_distance(p, center) <= radius * radius; }
};

// World-frame disks keyed by object id, sorted by id. A re-seen id moves its
// disk; moving disks unseen for longer than the timeout are dropped.
std::vector<ConstraintDisk> update_constraints(std::vector<ConstraintDisk> disks,
                                               std::span<const ConstraintGrounding> groundings, const Pose& robot,
                                               double time, const PlannerConfig& cfg = {});

// Robot-centred window aligned with the world grid. Cost 255 is lethal.
struct Costmap {
  int width = 0;
  int height = 0;
  double resolution = 0.05;
  Vec2 origin{};
  std::vector<std::uint8_t> cost;

  bool in_bounds(CellIndex c) const { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }
  std::size_t index(CellIndex c) const {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(c.x);
  }
  std::uint8_t at(CellIndex c) const { return cost[index(c)]; }
  Vec2 center(CellIndex c) const {
    return {origin.x + (c.x + 0.5) * resolution, origin.y + (c.y + 0.5) * resolution};
  }
  // Cell containing p, if inside the window.
  std::optional<CellIndex> cell_of(Vec2 p) const;
  // Outside the window reads as 0.
  std::uint8_t at_world(Vec2 p) const;
};

// Static non-Free cells (Obstacle, Unknown, off-map) and disk cells are
// lethal, then inflated.
Costmap build_costmap(Vec2 robot, const SemanticMap& map, std::span<const ConstraintDisk> disks,
                      const PlannerConfig& cfg = {});

double path_length(std::span<const Vec2> points);

struct Path {
  std::vector<Vec2> points;
  double length() const { return path_length(points); }
};

// Points along the polyline no further apart than `spacing`, endpoints included.
std::vector<Vec2> densify(std::span<const Vec2> points, double spacing);

// Lower bound on the distance from a point to the nearest non-Free cell or
// the map edge.
class ClearanceField {
 public:
  explicit ClearanceField(const GridMap& grid, kernels::Execution exec = kernels::Execution::Serial);
  double at(Vec2 p) const;
  const GridMap& grid() const { return grid_; }

 private:
  GridMap grid_;
  std::vector<double> dist_;  // metres between cell centres
};

// RRT on the static map. Points must be Free with clearance >= rrt_clearance
// (relaxed to the endpoint's own clearance next to start and goal) and keep
// out of `blocked` disks grown by half a cell diagonal. The tree result is
// shortcut, greedily pruned and resampled at rrt_step. Throws
// Error(InvalidEndpoint) or Error(PlanningFailure).
Path plan_global_rrt(Vec2 start, Vec2 goal, const SemanticMap& map, const ClearanceField& clearance,
                     const PlannerConfig& cfg, std::uint64_t seed, std::span<const ConstraintDisk> blocked = {});

// Point at arc length `lookahead` past the closest point of the path to
// `position`; the final point when the path ends sooner.
Vec2 select_intermediate_goal(const Path& path, Vec2 position, double lookahead);

// Arc length of the closest point of the path to `position`.
double project_onto_path(std::span<const Vec2> points, Vec2 position);

inline constexpr std::uint64_t kCostScale = 1 << 16;

// Fixed-point edge weight: step x (128 + cost) x 2^16, diagonal steps rounded up.
std::uint64_t astar_edge_cost(bool diagonal, std::uint8_t dest_cost);

struct LocalPath {
  std::vector<CellIndex> cells;
  std::vector<Vec2> points;  // cell centres, world frame
  std::uint64_t cost = 0;

  // Cost in metres of zero-cost travel.
  double cost_m(double resolution) const { return double(cost) / (128.0 * kCostScale) * resolution; }
};

// 8-connected A* with an admissible, consistent Euclidean heuristic. Cells
// with cost >= blocked_from are impassable (the start cell excepted); a
// blocked goal moves to the nearest open cell. Ties: lower f, lower h,
// lower row-major index. Throws Error(InvalidEndpoint) or Error(NoPath).
LocalPath plan_local_astar(const Costmap& costmap, CellIndex start, CellIndex goal,
                           std::uint8_t blocked_from = kernels::kLethal);
// World points; the goal is clamped into the window first.
LocalPath plan_local_astar(const Costmap& costmap, Vec2 start, Vec2 goal, std::uint8_t blocked_from = kernels::kLethal);

struct ReactiveConfig {
  double linear_step = 0.1;
  int angular_samples = 11;
  double horizon = 1.0;
  double substep = 0.1;
  double margin = 0.05;
  double heading_weight = 0.3;
  double carrot_distance = 1.0;
};

struct Obstacle {
  Vec2 center;
  double radius = 0.0;
};

// Gap between the robot body at p and the nearest obstacle disk or lethal
// costmap cell, capped at `cap`.
double body_clearance(Vec2 p, double robot_radius, std::span<const Obstacle> obstacles, const Costmap* costmap,
                      double cap);

struct Rollout {
  ControlCommand command;
  double min_clearance = 0.0;
  Pose end;
};

Rollout rollout(const RobotState& robot, ControlCommand cmd, std::span<const Obstacle> obstacles,
                const Costmap* costmap, const ReactiveConfig& cfg);

// Carrot on the local path at carrot_distance, then grid search over
// (v, w). A pair is safe when its rollout keeps the margin; if the robot is
// already inside the margin it must move, touch nothing and end strictly
// further out; failing that it turns in place toward the nearest heading that
// escapes. Among safe pairs the lowest distance + heading_weight * heading
// error to the carrot wins. (0, 0) when nothing is safe.
ControlCommand reactive_avoid(std::span<const Vec2> local_path, const RobotState& robot,
                              std::span<const Obstacle> obstacles, const Costmap* costmap, const RobotLimits& limits,
                              const ReactiveConfig& cfg = {});

}  // namespace langnav

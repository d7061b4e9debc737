#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "langnav/geometry.hpp"

namespace langnav {

class Rng;

enum class Cell : std::uint8_t { Free = 0, Obstacle = 1, Unknown = 2 };

struct CellIndex {
  int x = 0;
  int y = 0;
  friend bool operator==(CellIndex, CellIndex) = default;
};

// Row-major occupancy grid; row 0 is the southern edge (smallest y).
class GridMap {
 public:
  GridMap() = default;
  GridMap(int width, int height, double resolution, Vec2 origin, Cell fill = Cell::Free);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  Vec2 origin() const { return origin_; }
  Vec2 extent() const { return {width_ * resolution_, height_ * resolution_}; }

  bool in_bounds(CellIndex c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  Cell at(CellIndex c) const { return cells_[index(c)]; }
  void set(CellIndex c, Cell v) { cells_[index(c)] = v; }
  // Out-of-bounds points read as Obstacle.
  Cell at_world(Vec2 p) const;
  bool is_free(Vec2 p) const { return at_world(p) == Cell::Free; }

  std::optional<CellIndex> cell_of(Vec2 p) const;
  Vec2 center(CellIndex c) const {
    return {origin_.x + (c.x + 0.5) * resolution_, origin_.y + (c.y + 0.5) * resolution_};
  }
  std::size_t index(CellIndex c) const {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(c.x);
  }
  const std::vector<Cell>& cells() const { return cells_; }

  // Marks every cell whose center lies in the axis-aligned rectangle.
  void fill_rect(Vec2 lo, Vec2 hi, Cell v);

 private:
  int width_ = 0;
  int height_ = 0;
  double resolution_ = 1.0;
  Vec2 origin_{};
  std::vector<Cell> cells_;
};

struct NamedLocation {
  std::string name;
  Vec2 position;
};

// Closed polyline followed at constant speed; `progress` is the arc length
// travelled from the first waypoint.
struct WaypointLoop {
  std::vector<Vec2> waypoints;
  double speed = 0.0;
  double progress = 0.0;

  double perimeter() const;
  Vec2 point_at(double arc) const;
};

struct WorldObject {
  int id = 0;
  std::string label;
  Vec2 position;
  double radius = 0.25;
  std::optional<WaypointLoop> loop;

  bool moving() const { return loop.has_value() && loop->speed > 0.0; }
};

struct SemanticMap {
  std::string name;
  GridMap grid;
  std::vector<NamedLocation> locations;
  std::vector<WorldObject> objects;
  Pose start;

  const NamedLocation* find_location(const std::string& name) const;
};

struct RobotLimits {
  double max_linear = 0.7;
  double max_angular = 1.5;
  double radius = 0.2;
};

struct RobotState {
  Pose pose;
  double linear = 0.0;
  double angular = 0.0;
  double radius = 0.2;
  bool collided = false;
};

struct ControlCommand {
  double linear = 0.0;
  double angular = 0.0;
  friend bool operator==(ControlCommand, ControlCommand) = default;
};

struct SensorConfig {
  double range = 5.0;
  double fov = 2.0 * std::numbers::pi / 3.0;
  double rate_hz = 10.0;
  // Gaussian position noise (meters); zero disables it.
  double noise_stddev = 0.0;
};

struct Detection {
  int object_id = 0;
  std::string label;
  Vec2 local;
  // Simulated tracker output: the object follows a motion plan.
  bool moving = false;
  // Footprint radius as reported by the detector.
  double radius = 0.0;
};

struct DetectionFrame {
  double timestamp = 0.0;
  std::vector<Detection> detections;
};

// True when any traversed cell between the two points is an Obstacle.
bool ray_blocked(const GridMap& grid, Vec2 from, Vec2 to);

// Range, half field of view around the heading, and an unobstructed grid ray
// to the object center.
bool visible(const RobotState& robot, const WorldObject& object, const SemanticMap& map, const SensorConfig& sensor);

// `noise` is only consulted when sensor.noise_stddev > 0.
DetectionFrame sense_objects(const RobotState& robot, const SemanticMap& map, double time,
                             const SensorConfig& sensor = {}, Rng* noise = nullptr);

// Advances waypoint-loop objects; static objects are untouched. dt must be positive.
void step_world(SemanticMap& map, double dt);

// Unicycle step: clamps the command, rotates, then translates along the new
// heading. Collisions with Obstacle cells or object disks are flagged on the
// returned state (the motion is still applied).
RobotState apply_control(const RobotState& robot, const ControlCommand& cmd, double dt, const SemanticMap& map,
                         const RobotLimits& limits = {});

bool in_collision(Vec2 position, double radius, const SemanticMap& map);

}  // namespace langnav

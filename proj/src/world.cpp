#include "langnav/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "langnav/error.hpp"
#include "langnav/random.hpp"

namespace langnav {

GridMap::GridMap(int width, int height, double resolution, Vec2 origin, Cell fill)
    : width_(width), height_(height), resolution_(resolution), origin_(origin) {
  if (width <= 0 || height <= 0 || !(resolution > 0.0)) {
    throw Error(ErrorCode::InvariantViolation, "grid needs positive size and resolution");
  }
  cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

std::optional<CellIndex> GridMap::cell_of(Vec2 p) const {
  const double gx = (p.x - origin_.x) / resolution_;
  const double gy = (p.y - origin_.y) / resolution_;
  if (!(gx >= 0.0) || !(gy >= 0.0)) return std::nullopt;
  CellIndex c{static_cast<int>(gx), static_cast<int>(gy)};
  if (!in_bounds(c)) return std::nullopt;
  return c;
}

Cell GridMap::at_world(Vec2 p) const {
  const auto c = cell_of(p);
  return c ? at(*c) : Cell::Obstacle;
}

void GridMap::fill_rect(Vec2 lo, Vec2 hi, Cell v) {
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const Vec2 c = center({x, y});
      if (c.x >= lo.x && c.x <= hi.x && c.y >= lo.y && c.y <= hi.y) set({x, y}, v);
    }
  }
}

double WaypointLoop::perimeter() const {
  double total = 0.0;
  for (std::size_t i = 0; i < waypoints.size() && waypoints.size() > 1; ++i) {
    total += distance(waypoints[i], waypoints[(i + 1) % waypoints.size()]);
  }
  return total;
}

Vec2 WaypointLoop::point_at(double arc) const {
  if (waypoints.empty()) return {};
  const double total = perimeter();
  if (waypoints.size() == 1 || total <= 0.0) return waypoints.front();
  arc = std::fmod(arc, total);
  if (arc < 0.0) arc += total;
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    const Vec2 a = waypoints[i];
    const Vec2 b = waypoints[(i + 1) % waypoints.size()];
    const double len = distance(a, b);
    if (arc <= len && len > 0.0) return a + (arc / len) * (b - a);
    arc -= len;
  }
  return waypoints.front();
}

const NamedLocation* SemanticMap::find_location(const std::string& loc_name) const {
  for (const auto& l : locations) {
    if (l.name == loc_name) return &l;
  }
  return nullptr;
}

bool ray_blocked(const GridMap& grid, Vec2 from, Vec2 to) {
  const double res = grid.resolution();
  const double gx0 = (from.x - grid.origin().x) / res;
  const double gy0 = (from.y - grid.origin().y) / res;
  const double gx1 = (to.x - grid.origin().x) / res;
  const double gy1 = (to.y - grid.origin().y) / res;
  int cx = static_cast<int>(std::floor(gx0));
  int cy = static_cast<int>(std::floor(gy0));
  const int ex = static_cast<int>(std::floor(gx1));
  const int ey = static_cast<int>(std::floor(gy1));
  const double dx = gx1 - gx0;
  const double dy = gy1 - gy0;
  constexpr double inf = std::numeric_limits<double>::infinity();
  const int step_x = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int step_y = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  double t_max_x = step_x != 0 ? ((cx + (step_x > 0 ? 1 : 0)) - gx0) / dx : inf;
  double t_max_y = step_y != 0 ? ((cy + (step_y > 0 ? 1 : 0)) - gy0) / dy : inf;
  const double t_delta_x = step_x != 0 ? 1.0 / std::abs(dx) : inf;
  const double t_delta_y = step_y != 0 ? 1.0 / std::abs(dy) : inf;
  const int max_steps = std::abs(ex - cx) + std::abs(ey - cy) + 2;
  for (int n = 0; n <= max_steps; ++n) {
    const CellIndex c{cx, cy};
    if (!grid.in_bounds(c) || grid.at(c) == Cell::Obstacle) return true;
    if (cx == ex && cy == ey) return false;
    if (t_max_x < t_max_y) {
      if (t_max_x > 1.0) return false;
      cx += step_x;
      t_max_x += t_delta_x;
    } else {
      if (t_max_y > 1.0) return false;
      cy += step_y;
      t_max_y += t_delta_y;
    }
  }
  return false;
}

bool visible(const RobotState& robot, const WorldObject& object, const SemanticMap& map, const SensorConfig& sensor) {
  const Vec2 d = object.position - robot.pose.position;
  const double range = norm(d);
  if (range > sensor.range) return false;
  if (range > 0.0) {
    const double bearing = wrap_angle(std::atan2(d.y, d.x) - robot.pose.heading);
    if (std::abs(bearing) > 0.5 * sensor.fov) return false;
  }
  return !ray_blocked(map.grid, robot.pose.position, object.position);
}

DetectionFrame sense_objects(const RobotState& robot, const SemanticMap& map, double time, const SensorConfig& sensor,
                             Rng* noise) {
  DetectionFrame frame;
  frame.timestamp = time;
  for (const auto& obj : map.objects) {
    if (!visible(robot, obj, map, sensor)) continue;
    Vec2 local = to_local(robot.pose, obj.position);
    if (sensor.noise_stddev > 0.0 && noise != nullptr) {
      local.x += sensor.noise_stddev * noise->gaussian();
      local.y += sensor.noise_stddev * noise->gaussian();
    }
    frame.detections.push_back({obj.id, obj.label, local, obj.moving(), obj.radius});
  }
  return frame;
}

void step_world(SemanticMap& map, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidConfig, "world step needs dt > 0");
  for (auto& obj : map.objects) {
    if (!obj.moving()) continue;
    auto& loop = *obj.loop;
    const double total = loop.perimeter();
    if (total <= 0.0) continue;
    loop.progress = std::fmod(loop.progress + loop.speed * dt, total);
    obj.position = loop.point_at(loop.progress);
  }
}

bool in_collision(Vec2 position, double radius, const SemanticMap& map) {
  for (const auto& obj : map.objects) {
    if (distance(position, obj.position) < obj.radius + radius) return true;
  }
  const auto& g = map.grid;
  const double res = g.resolution();
  const int x0 = static_cast<int>(std::floor((position.x - radius - g.origin().x) / res));
  const int x1 = static_cast<int>(std::floor((position.x + radius - g.origin().x) / res));
  const int y0 = static_cast<int>(std::floor((position.y - radius - g.origin().y) / res));
  const int y1 = static_cast<int>(std::floor((position.y + radius - g.origin().y) / res));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const CellIndex c{x, y};
      const bool blocked = !g.in_bounds(c) || g.at(c) == Cell::Obstacle;
      if (!blocked) continue;
      const double lo_x = g.origin().x + x * res;
      const double lo_y = g.origin().y + y * res;
      const double nx = std::clamp(position.x, lo_x, lo_x + res);
      const double ny = std::clamp(position.y, lo_y, lo_y + res);
      if (std::hypot(position.x - nx, position.y - ny) < radius) return true;
    }
  }
  return false;
}

RobotState apply_control(const RobotState& robot, const ControlCommand& cmd, double dt, const SemanticMap& map,
                         const RobotLimits& limits) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidConfig, "control step needs dt > 0");
  RobotState next = robot;
  next.linear = std::clamp(cmd.linear, 0.0, limits.max_linear);
  next.angular = std::clamp(cmd.angular, -limits.max_angular, limits.max_angular);
  next.pose.heading = wrap_angle(robot.pose.heading + next.angular * dt);
  next.pose.position = robot.pose.position +
                       (next.linear * dt) * Vec2{std::cos(next.pose.heading), std::sin(next.pose.heading)};
  next.collided = in_collision(next.pose.position, next.radius, map);
  return next;
}

}  // namespace langnav

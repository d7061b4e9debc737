#include "langnav/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <tuple>

#include "langnav/error.hpp"
#include "langnav/random.hpp"

namespace langnav {

void validate(const PlannerConfig& cfg) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::InvalidConfig, std::string("planner ") + name + " must be positive");
    }
  };
  positive(cfg.disk_radius, "disk_radius");
  positive(cfg.moving_timeout, "moving_timeout");
  positive(cfg.window, "window");
  positive(cfg.inflation.resolution, "resolution");
  positive(cfg.inflation.robot_radius, "robot_radius");
  positive(cfg.inflation.inflation_radius, "inflation_radius");
  positive(cfg.inflation.decay, "decay");
  positive(cfg.rrt_step, "rrt_step");
  positive(cfg.rrt_clearance, "rrt_clearance");
  positive(cfg.lookahead, "lookahead");
  positive(cfg.goal_tolerance, "goal_tolerance");
  if (cfg.moving_margin < 0.0) throw Error(ErrorCode::InvalidConfig, "planner moving_margin must be >= 0");
  if (cfg.goal_bias < 0.0 || cfg.goal_bias > 1.0) throw Error(ErrorCode::InvalidConfig, "planner goal_bias outside [0, 1]");
  if (cfg.rrt_iterations <= 0) throw Error(ErrorCode::InvalidConfig, "planner rrt_iterations must be positive");
  if (cfg.shortcut_attempts < 0) throw Error(ErrorCode::InvalidConfig, "planner shortcut_attempts must be >= 0");
}

std::vector<ConstraintDisk> update_constraints(std::vector<ConstraintDisk> disks,
                                               std::span<const ConstraintGrounding> groundings, const Pose& robot,
                                               double time, const PlannerConfig& cfg) {
  for (const auto& g : groundings) {
    const Vec2 world = to_world(robot, g.local);
    const double radius = cfg.disk_radius + (g.moving ? cfg.moving_margin : 0.0);
    auto it = std::find_if(disks.begin(), disks.end(), [&](const ConstraintDisk& d) { return d.object_id == g.object_id; });
    if (it == disks.end()) {
      disks.push_back({g.object_id, g.label, world, radius, g.moving, g.timestamp});
    } else {
      it->center = world;
      it->radius = radius;
      it->moving = g.moving;
      it->last_seen = std::max(it->last_seen, g.timestamp);
    }
  }
  std::erase_if(disks, [&](const ConstraintDisk& d) { return d.moving && time - d.last_seen > cfg.moving_timeout; });
  std::sort(disks.begin(), disks.end(), [](const auto& a, const auto& b) { return a.object_id < b.object_id; });
  return disks;
}

std::optional<CellIndex> Costmap::cell_of(Vec2 p) const {
  const CellIndex c{static_cast<int>(std::floor((p.x - origin.x) / resolution)),
                    static_cast<int>(std::floor((p.y - origin.y) / resolution))};
  if (!in_bounds(c)) return std::nullopt;
  return c;
}

std::uint8_t Costmap::at_world(Vec2 p) const {
  const auto c = cell_of(p);
  return c ? at(*c) : 0;
}

Costmap build_costmap(Vec2 robot, const SemanticMap& map, std::span<const ConstraintDisk> disks,
                      const PlannerConfig& cfg) {
  Costmap cm;
  const double res = cfg.inflation.resolution;
  cm.resolution = res;
  cm.width = cm.height = std::max(1, static_cast<int>(std::lround(cfg.window / res)));
  const Vec2 o = map.grid.origin();
  const double gx = std::floor((robot.x - o.x) / res);
  const double gy = std::floor((robot.y - o.y) / res);
  cm.origin = {o.x + (gx - cm.width / 2) * res, o.y + (gy - cm.height / 2) * res};

  std::vector<std::uint8_t> lethal(static_cast<std::size_t>(cm.width) * cm.height, 0);
  for (int y = 0; y < cm.height; ++y) {
    for (int x = 0; x < cm.width; ++x) {
      if (map.grid.at_world(cm.center({x, y})) != Cell::Free) lethal[cm.index({x, y})] = 1;
    }
  }
  std::vector<kernels::Disk> kd;
  for (const auto& d : disks) kd.push_back({d.center, d.radius});
  kernels::rasterize_disks(lethal, cm.width, cm.height, cm.origin, res, kd, cfg.execution);
  cm.cost = kernels::inflate(lethal, cm.width, cm.height, cfg.inflation, cfg.execution);
  return cm;
}

double path_length(std::span<const Vec2> points) {
  double total = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) total += distance(points[i - 1], points[i]);
  return total;
}

std::vector<Vec2> densify(std::span<const Vec2> points, double spacing) {
  if (!(spacing > 0.0)) throw Error(ErrorCode::InvalidConfig, "densify spacing must be positive");
  std::vector<Vec2> out;
  if (points.empty()) return out;
  out.push_back(points[0]);
  for (std::size_t i = 1; i < points.size(); ++i) {
    const Vec2 a = points[i - 1];
    const Vec2 b = points[i];
    const int n = std::max(1, static_cast<int>(std::ceil(distance(a, b) / spacing)));
    for (int k = 1; k < n; ++k) out.push_back(a + (double(k) / n) * (b - a));
    out.push_back(b);
  }
  return out;
}

ClearanceField::ClearanceField(const GridMap& grid, kernels::Execution exec) : grid_(grid) {
  std::vector<std::uint8_t> seeds(grid.cells().size());
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = grid.cells()[i] != Cell::Free;
  dist_ = kernels::squared_distance_transform(seeds, grid.width(), grid.height(), exec);
  for (auto& d : dist_) d = std::sqrt(d) * grid.resolution();
}

double ClearanceField::at(Vec2 p) const {
  const auto c = grid_.cell_of(p);
  if (!c) return 0.0;
  const double res = grid_.resolution();
  // p sits up to half a diagonal from its cell centre, and so does the
  // nearest point of the blocking cell from that cell's centre
  const double cells = dist_[grid_.index(*c)] - std::sqrt(2.0) * res;
  const Vec2 lo = grid_.origin();
  const Vec2 hi = lo + grid_.extent();
  const double edge = std::min({p.x - lo.x, hi.x - p.x, p.y - lo.y, hi.y - p.y});
  return std::max(0.0, std::min(cells, edge));
}

namespace {

class RrtChecker {
 public:
  RrtChecker(Vec2 start, Vec2 goal, const SemanticMap& map, const ClearanceField& field, const PlannerConfig& cfg,
             std::span<const ConstraintDisk> blocked)
      : start_(start), goal_(goal), map_(map), field_(field), cfg_(cfg) {
    start_clear_ = field.at(start);
    goal_clear_ = field.at(goal);
    const double grow = map.grid.resolution() * std::sqrt(0.5);
    for (const auto& d : blocked) {
      // a disk holding an endpoint would make every plan fail
      if (d.contains(start) || d.contains(goal)) continue;
      disks_.push_back({d.center, d.radius + grow});
    }
    spacing_ = map.grid.resolution() / 2.0;
  }

  bool point_ok(Vec2 p) const {
    if (!map_.grid.is_free(p)) return false;
    double need = cfg_.rrt_clearance;
    if (distance(p, start_) < cfg_.rrt_clearance) need = std::min(need, start_clear_);
    if (distance(p, goal_) < cfg_.rrt_clearance) need = std::min(need, goal_clear_);
    if (field_.at(p) < need) return false;
    for (const auto& d : disks_) {
      if (squared_distance(p, d.center) <= d.radius * d.radius) return false;
    }
    return true;
  }

  bool segment_ok(Vec2 a, Vec2 b) const {
    const int n = std::max(1, static_cast<int>(std::ceil(distance(a, b) / spacing_)));
    for (int k = 0; k <= n; ++k) {
      if (!point_ok(a + (double(k) / n) * (b - a))) return false;
    }
    return true;
  }

 private:
  Vec2 start_;
  Vec2 goal_;
  const SemanticMap& map_;
  const ClearanceField& field_;
  const PlannerConfig& cfg_;
  double start_clear_ = 0.0;
  double goal_clear_ = 0.0;
  double spacing_ = 0.025;
  std::vector<kernels::Disk> disks_;
};

std::vector<Vec2> smooth(std::vector<Vec2> pts, const RrtChecker& check, int attempts, double spacing, Rng& rng) {
  for (int a = 0; a < attempts && pts.size() > 2; ++a) {
    std::size_t i = rng.below(pts.size());
    std::size_t j = rng.below(pts.size());
    if (i > j) std::swap(i, j);
    if (j < i + 2) continue;
    if (check.segment_ok(pts[i], pts[j])) pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                                                    pts.begin() + static_cast<std::ptrdiff_t>(j));
  }
  // greedy: from each kept point jump to the furthest directly reachable one
  std::vector<Vec2> out{pts.front()};
  std::size_t i = 0;
  while (i + 1 < pts.size()) {
    std::size_t j = pts.size() - 1;
    while (j > i + 1 && !check.segment_ok(pts[i], pts[j])) --j;
    out.push_back(pts[j]);
    i = j;
  }
  // tighten: slide interior vertices toward the chord of their neighbours,
  // then pull the string again; tree vertices alone leave kinks
  for (int pass = 0; pass < 40 && out.size() > 2; ++pass) {
    const double before = path_length(out);
    out = densify(out, spacing);
    for (std::size_t k = 1; k + 1 < out.size(); ++k) {
      const Vec2 a = out[k - 1], c = out[k + 1];
      const Vec2 target = a + 0.5 * (c - a);
      for (double t = 1.0; t > 0.05; t *= 0.5) {
        const Vec2 q = out[k] + t * (target - out[k]);
        if (check.segment_ok(a, q) && check.segment_ok(q, c)) {
          out[k] = q;
          break;
        }
      }
    }
    std::vector<Vec2> pulled{out.front()};
    std::size_t k = 0;
    while (k + 1 < out.size()) {
      std::size_t j = k + 1;
      while (j + 1 < out.size() && check.segment_ok(out[k], out[j + 1])) ++j;
      pulled.push_back(out[j]);
      k = j;
    }
    out = std::move(pulled);
    if (path_length(out) > before - 1e-3) break;
  }
  return out;
}

}  // namespace

Path plan_global_rrt(Vec2 start, Vec2 goal, const SemanticMap& map, const ClearanceField& clearance,
                     const PlannerConfig& cfg, std::uint64_t seed, std::span<const ConstraintDisk> blocked) {
  validate(cfg);
  if (!map.grid.is_free(start)) throw Error(ErrorCode::InvalidEndpoint, "RRT start is not on a free cell");
  if (!map.grid.is_free(goal)) throw Error(ErrorCode::InvalidEndpoint, "RRT goal is not on a free cell");
  if (start == goal) return {{start}};
  const RrtChecker check(start, goal, map, clearance, cfg, blocked);
  Rng rng(seed);
  auto finish = [&](std::vector<Vec2> raw) {
    auto pts = smooth(std::move(raw), check, cfg.shortcut_attempts, 2.0 * map.grid.resolution(), rng);
    return Path{densify(pts, cfg.rrt_step)};
  };
  if (check.segment_ok(start, goal)) return finish({start, goal});

  struct Node {
    Vec2 p;
    int parent;
  };
  std::vector<Node> tree{{start, -1}};
  const Vec2 lo = map.grid.origin();
  const Vec2 hi = lo + map.grid.extent();
  for (int it = 0; it < cfg.rrt_iterations; ++it) {
    const Vec2 sample = rng.chance(cfg.goal_bias) ? goal : Vec2{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y)};
    std::size_t near = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < tree.size(); ++k) {
      const double d = squared_distance(tree[k].p, sample);
      if (d < best) {
        best = d;
        near = k;
      }
    }
    const Vec2 from = tree[near].p;
    const double len = std::sqrt(best);
    if (len == 0.0) continue;
    const Vec2 to = len <= cfg.rrt_step ? sample : from + (cfg.rrt_step / len) * (sample - from);
    if (!check.segment_ok(from, to)) continue;
    tree.push_back({to, static_cast<int>(near)});
    if (distance(to, goal) <= cfg.rrt_step && check.segment_ok(to, goal)) {
      std::vector<Vec2> raw{goal};
      for (int k = static_cast<int>(tree.size()) - 1; k >= 0; k = tree[k].parent) raw.push_back(tree[k].p);
      std::reverse(raw.begin(), raw.end());
      if (raw[raw.size() - 2] == goal) raw.pop_back();
      return finish(std::move(raw));
    }
  }
  throw Error(ErrorCode::PlanningFailure,
              "RRT found no path after " + std::to_string(cfg.rrt_iterations) + " iterations");
}

double project_onto_path(std::span<const Vec2> points, Vec2 position) {
  if (points.empty()) throw Error(ErrorCode::EmptyInput, "empty path");
  double best = squared_distance(points[0], position);
  double best_arc = 0.0;
  double arc = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const Vec2 a = points[i - 1];
    const Vec2 ab = points[i] - a;
    const double len2 = dot(ab, ab);
    const double t = len2 > 0.0 ? std::clamp(dot(position - a, ab) / len2, 0.0, 1.0) : 0.0;
    const double d = squared_distance(a + t * ab, position);
    const double len = std::sqrt(len2);
    if (d < best) {
      best = d;
      best_arc = arc + t * len;
    }
    arc += len;
  }
  return best_arc;
}

Vec2 select_intermediate_goal(const Path& path, Vec2 position, double lookahead) {
  const auto& pts = path.points;
  const double target = project_onto_path(pts, position) + lookahead;
  double arc = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double len = distance(pts[i - 1], pts[i]);
    if (arc + len >= target && len > 0.0) return pts[i - 1] + ((target - arc) / len) * (pts[i] - pts[i - 1]);
    arc += len;
  }
  return pts.back();
}

std::uint64_t astar_edge_cost(bool diagonal, std::uint8_t dest_cost) {
  const std::uint64_t straight = (128 + std::uint64_t(dest_cost)) * kCostScale;
  if (!diagonal) return straight;
  return static_cast<std::uint64_t>(std::ceil(std::sqrt(2.0) * double(straight)));
}

namespace {

std::uint64_t heuristic(CellIndex a, CellIndex b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return static_cast<std::uint64_t>(std::floor(std::sqrt(dx * dx + dy * dy) * 128.0 * kCostScale * (1.0 - 1e-9)));
}

}  // namespace

LocalPath plan_local_astar(const Costmap& cm, CellIndex start, CellIndex goal, std::uint8_t blocked_from) {
  if (!cm.in_bounds(start)) throw Error(ErrorCode::InvalidEndpoint, "A* start outside the costmap");
  if (!cm.in_bounds(goal)) throw Error(ErrorCode::InvalidEndpoint, "A* goal outside the costmap");
  if (cm.at(start) == kernels::kLethal) throw Error(ErrorCode::InvalidEndpoint, "A* start is on a lethal cell");
  auto open_cell = [&](CellIndex c) { return cm.at(c) < blocked_from; };
  if (!open_cell(goal) && !(goal == start)) {
    std::optional<CellIndex> best;
    long best_d = std::numeric_limits<long>::max();
    for (int y = 0; y < cm.height; ++y) {
      for (int x = 0; x < cm.width; ++x) {
        if (!open_cell({x, y})) continue;
        const long d = long(x - goal.x) * (x - goal.x) + long(y - goal.y) * (y - goal.y);
        if (d < best_d) {
          best_d = d;
          best = CellIndex{x, y};
        }
      }
    }
    if (!best) throw Error(ErrorCode::NoPath, "costmap has no open cell for the goal");
    goal = *best;
  }

  const std::size_t n = cm.cost.size();
  constexpr auto inf = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::uint64_t> g(n, inf);
  std::vector<int> parent(n, -1);
  std::vector<char> closed(n, 0);
  using Key = std::tuple<std::uint64_t, std::uint64_t, std::size_t>;  // f, h, index
  std::priority_queue<Key, std::vector<Key>, std::greater<>> open;
  const std::size_t s = cm.index(start);
  const std::size_t t = cm.index(goal);
  g[s] = 0;
  open.push({heuristic(start, goal), heuristic(start, goal), s});
  while (!open.empty()) {
    const auto [f, h, u] = open.top();
    open.pop();
    if (closed[u]) continue;
    closed[u] = 1;
    if (u == t) break;
    const CellIndex cu{static_cast<int>(u % cm.width), static_cast<int>(u / cm.width)};
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const CellIndex cv{cu.x + dx, cu.y + dy};
        if (!cm.in_bounds(cv) || !open_cell(cv)) continue;
        const std::size_t v = cm.index(cv);
        if (closed[v]) continue;
        const std::uint64_t nd = g[u] + astar_edge_cost(dx != 0 && dy != 0, cm.cost[v]);
        if (nd < g[v]) {
          g[v] = nd;
          parent[v] = static_cast<int>(u);
          const std::uint64_t hv = heuristic(cv, goal);
          open.push({nd + hv, hv, v});
        }
      }
    }
  }
  if (g[t] == inf) throw Error(ErrorCode::NoPath, "no path through the costmap");
  LocalPath out;
  out.cost = g[t];
  for (int v = static_cast<int>(t); v >= 0; v = parent[v]) {
    out.cells.push_back({v % cm.width, v / cm.width});
  }
  std::reverse(out.cells.begin(), out.cells.end());
  for (const auto& c : out.cells) out.points.push_back(cm.center(c));
  return out;
}

LocalPath plan_local_astar(const Costmap& cm, Vec2 start, Vec2 goal, std::uint8_t blocked_from) {
  const auto s = cm.cell_of(start);
  if (!s) throw Error(ErrorCode::InvalidEndpoint, "A* start outside the costmap");
  const CellIndex gc{
      std::clamp(static_cast<int>(std::floor((goal.x - cm.origin.x) / cm.resolution)), 0, cm.width - 1),
      std::clamp(static_cast<int>(std::floor((goal.y - cm.origin.y) / cm.resolution)), 0, cm.height - 1)};
  return plan_local_astar(cm, *s, gc, blocked_from);
}

double body_clearance(Vec2 p, double robot_radius, std::span<const Obstacle> obstacles, const Costmap* cm, double cap) {
  double best = cap;
  for (const auto& o : obstacles) best = std::min(best, distance(p, o.center) - o.radius - robot_radius);
  if (!cm) return best;
  const double reach = robot_radius + best;
  if (reach <= 0.0) return best;
  const double res = cm->resolution;
  const int x0 = static_cast<int>(std::floor((p.x - reach - cm->origin.x) / res));
  const int x1 = static_cast<int>(std::floor((p.x + reach - cm->origin.x) / res));
  const int y0 = static_cast<int>(std::floor((p.y - reach - cm->origin.y) / res));
  const int y1 = static_cast<int>(std::floor((p.y + reach - cm->origin.y) / res));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (!cm->in_bounds({x, y}) || cm->at({x, y}) != kernels::kLethal) continue;
      const double lx = cm->origin.x + x * res;
      const double ly = cm->origin.y + y * res;
      const double nx = std::clamp(p.x, lx, lx + res);
      const double ny = std::clamp(p.y, ly, ly + res);
      best = std::min(best, std::hypot(p.x - nx, p.y - ny) - robot_radius);
    }
  }
  return best;
}

Rollout rollout(const RobotState& robot, ControlCommand cmd, std::span<const Obstacle> obstacles, const Costmap* cm,
                const ReactiveConfig& cfg) {
  const double cap = cfg.margin + 1.0;
  Rollout r{cmd, cap, robot.pose};
  const int steps = std::max(1, static_cast<int>(std::lround(cfg.horizon / cfg.substep)));
  for (int k = 0; k < steps; ++k) {
    r.end.heading = wrap_angle(r.end.heading + cmd.angular * cfg.substep);
    r.end.position = r.end.position + (cmd.linear * cfg.substep) * Vec2{std::cos(r.end.heading), std::sin(r.end.heading)};
    r.min_clearance = std::min(r.min_clearance, body_clearance(r.end.position, robot.radius, obstacles, cm, cap));
  }
  return r;
}

ControlCommand reactive_avoid(std::span<const Vec2> local_path, const RobotState& robot,
                              std::span<const Obstacle> obstacles, const Costmap* cm, const RobotLimits& limits,
                              const ReactiveConfig& cfg) {
  if (local_path.empty()) throw Error(ErrorCode::EmptyInput, "reactive layer needs a local path");
  // carrot: first point at least carrot_distance of arc along the path
  Vec2 carrot = local_path.back();
  double arc = 0.0;
  for (std::size_t i = 1; i < local_path.size(); ++i) {
    arc += distance(local_path[i - 1], local_path[i]);
    if (arc >= cfg.carrot_distance) {
      carrot = local_path[i];
      break;
    }
  }
  const double cap = cfg.margin + 1.0;
  const double now = body_clearance(robot.pose.position, robot.radius, obstacles, cm, cap);
  const bool escaping = now < cfg.margin;
  const int n_v = static_cast<int>(std::floor(limits.max_linear / cfg.linear_step + 1e-9));
  ControlCommand best{0.0, 0.0};
  double best_score = std::numeric_limits<double>::infinity();
  for (int iv = 0; iv <= n_v; ++iv) {
    const double v = iv * cfg.linear_step;
    for (int iw = 0; iw < cfg.angular_samples; ++iw) {
      const double w = cfg.angular_samples == 1
                           ? 0.0
                           : -limits.max_angular + 2.0 * limits.max_angular * iw / (cfg.angular_samples - 1);
      const auto r = rollout(robot, {v, w}, obstacles, cm, cfg);
      bool safe = r.min_clearance >= cfg.margin;
      if (escaping) {
        safe = v > 0.0 && r.min_clearance >= std::min(now, 0.0) &&
               body_clearance(r.end.position, robot.radius, obstacles, cm, cap) > now;
      }
      if (!safe) continue;
      const Vec2 to = carrot - r.end.position;
      const double heading_error = norm(to) > 1e-9 ? std::abs(wrap_angle(std::atan2(to.y, to.x) - r.end.heading)) : 0.0;
      const double score = norm(to) + cfg.heading_weight * heading_error;
      if (score < best_score) {
        best_score = score;
        best = {v, w};
      }
    }
  }
  if (!escaping || best_score < std::numeric_limits<double>::infinity()) return best;
  // No arc gets out, typically because the robot faces the obstacle. Turn in
  // place toward the nearest heading from which driving straight escapes.
  constexpr int kHeadings = 36;
  double turn = 0.0;
  double best_turn = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kHeadings; ++k) {
    const double heading = -std::numbers::pi + 2.0 * std::numbers::pi * k / kHeadings;
    RobotState probe = robot;
    probe.pose.heading = heading;
    const auto r = rollout(probe, {limits.max_linear, 0.0}, obstacles, cm, cfg);
    if (r.min_clearance < std::min(now, 0.0) ||
        !(body_clearance(r.end.position, robot.radius, obstacles, cm, cap) > now)) {
      continue;
    }
    const double delta = wrap_angle(heading - robot.pose.heading);
    if (std::abs(delta) < best_turn) {
      best_turn = std::abs(delta);
      turn = delta;
    }
  }
  if (best_turn == std::numeric_limits<double>::infinity()) return best;
  return {0.0, std::clamp(turn / cfg.substep, -limits.max_angular, limits.max_angular)};
}

}  // namespace langnav

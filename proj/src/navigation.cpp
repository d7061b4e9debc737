#include "langnav/navigation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>

#include "langnav/error.hpp"

namespace langnav {
namespace {

constexpr std::pair<NavStatus, std::string_view> kStatusNames[] = {
    {NavStatus::Idle, "idle"},
    {NavStatus::Navigating, "navigating"},
    {NavStatus::Reached, "reached"},
    {NavStatus::Unreachable, "unreachable"},
};

std::vector<ObjectSample> sample_objects(const SemanticMap& world) {
  std::vector<ObjectSample> out;
  for (const auto& o : world.objects) out.push_back({o.id, o.label, o.position, o.radius});
  return out;
}

void log_point(NavState& s, const SemanticMap& world) {
  s.trajectory.push_back({s.tick, s.time, s.robot.pose, s.command, s.robot.collided, sample_objects(world)});
}

void stop(NavState& s, NavStatus status, std::string reason) {
  s.status = status;
  s.reason = std::move(reason);
  s.command = {};
}

// True when a global path sample inside the window falls on a cell made
// lethal by the map or a constraint disk. Sensed bodies are left to the
// local planner.
bool path_blocked(const Path& path, const Costmap& cm, const SemanticMap& world,
                  std::span<const ConstraintDisk> disks) {
  for (const auto& p : densify(path.points, cm.resolution / 2)) {
    const auto c = cm.cell_of(p);
    if (!c) continue;
    const Vec2 centre = cm.center(*c);
    if (world.grid.at_world(centre) != Cell::Free) return true;
    for (const auto& d : disks) {
      if (d.contains(centre)) return true;
    }
  }
  return false;
}

}  // namespace

std::string_view nav_status_name(NavStatus status) {
  for (const auto& [s, n] : kStatusNames) {
    if (s == status) return n;
  }
  return "idle";
}

NavStatus parse_nav_status(std::string_view name) {
  for (const auto& [s, n] : kStatusNames) {
    if (n == name) return s;
  }
  throw Error(ErrorCode::Parse, "unknown navigation status '" + std::string(name) + "'");
}

void validate(const NavConfig& cfg) {
  validate(cfg.planner);
  if (!(cfg.dt > 0.0)) throw Error(ErrorCode::InvalidConfig, "navigation dt must be positive");
  if (cfg.max_failures <= 0 || cfg.stall_ticks <= 0 || cfg.replan_after <= 0) {
    throw Error(ErrorCode::InvalidConfig, "navigation failure limits must be positive");
  }
  if (!(cfg.limits.max_linear > 0.0) || !(cfg.limits.max_angular > 0.0) || !(cfg.limits.radius > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "robot limits must be positive");
  }
  if (!(cfg.reactive.substep > 0.0) || !(cfg.reactive.horizon > 0.0) || !(cfg.reactive.linear_step > 0.0) ||
      cfg.reactive.angular_samples < 1) {
    throw Error(ErrorCode::InvalidConfig, "reactive layer settings must be positive");
  }
  if (!(cfg.sensor.range > 0.0) || !(cfg.sensor.fov > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "sensor range and field of view must be positive");
  }
}

NavState initial_state(const SemanticMap& map, const NavConfig& cfg) {
  NavState s;
  s.robot.pose = map.start;
  s.robot.radius = cfg.limits.radius;
  return s;
}

void set_goal(NavState& state, const GoalGrounding& goal, const SemanticMap& map, const ClearanceField& clearance,
              const NavConfig& cfg) {
  const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(state.replans) + 1;
  Path global = plan_global_rrt(state.robot.pose.position, goal.position, map, clearance, cfg.planner, seed,
                                state.disks);
  state.goal = goal;
  state.global = std::move(global);
  state.local.clear();
  state.intermediate.reset();
  state.status = NavStatus::Navigating;
  state.reason.clear();
  state.local_failures = 0;
  state.failures = 0;
  state.stall = 0;
  state.replans += 1;
  state.best_distance = distance(state.robot.pose.position, goal.position);
  state.command = {};
  state.trajectory.clear();
  log_point(state, map);
}

void add_constraint_nouns(NavState& state, const std::vector<std::string>& nouns) {
  for (const auto& n : nouns) {
    if (std::find(state.constraint_nouns.begin(), state.constraint_nouns.end(), n) == state.constraint_nouns.end()) {
      state.constraint_nouns.push_back(n);
    }
  }
}

void apply_instruction(NavState& state, const ParsedCommand& command, const SemanticMap& map,
                       const ClearanceField& clearance, const NavConfig& cfg) {
  if (!command.goal_error.empty()) throw Error(ErrorCode::NoMatch, command.goal_error);
  if (command.has_goal_phrase() && !command.goal) {
    throw Error(ErrorCode::NoMatch, "goal was not grounded against the map");
  }
  if (!command.goal && command.constraint_nouns.empty()) {
    throw Error(ErrorCode::NoGoal, "instruction has neither a goal nor a constraint");
  }
  NavState next = state;
  if (command.goal && cfg.clear_constraints_on_goal) {
    next.constraint_nouns.clear();
    next.disks.clear();
  }
  add_constraint_nouns(next, command.constraint_nouns);
  if (command.goal) set_goal(next, *command.goal, map, clearance, cfg);
  state = std::move(next);
}

StepInfo navigation_step(SemanticMap& world, NavState& s, const Lexicon& lex, const ClearanceField& clearance,
                         const NavConfig& cfg) {
  StepInfo info;
  step_world(world, cfg.dt);
  s.tick += 1;
  s.time = s.tick * cfg.dt;

  s.frame = sense_objects(s.robot, world, s.time, cfg.sensor);
  const auto groundings = ground_constraints(s.constraint_nouns, s.frame, lex, cfg.grounding);
  s.disks = update_constraints(std::move(s.disks), groundings, s.robot.pose, s.time, cfg.planner);
  // sensed bodies are marked with their own footprint next to the constraint disks
  std::vector<ConstraintDisk> marked = s.disks;
  for (const auto& d : s.frame.detections) {
    marked.push_back({d.object_id, d.label, to_world(s.robot.pose, d.local), d.radius, d.moving, s.time});
  }
  s.costmap = build_costmap(s.robot.pose.position, world, marked, cfg.planner);

  if (s.status != NavStatus::Navigating) {
    s.command = {};
    return info;
  }
  const Vec2 goal = s.goal->position;
  for (const auto& d : s.disks) {
    if (d.contains(goal)) {
      stop(s, NavStatus::Unreachable, "goal lies inside the constraint region of " + d.label + " " +
                                          std::to_string(d.object_id));
      log_point(s, world);
      return info;
    }
  }

  if (path_blocked(s.global, s.costmap, world, s.disks) || s.local_failures >= cfg.replan_after) {
    try {
      const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(s.replans) + 1;
      s.global = plan_global_rrt(s.robot.pose.position, goal, world, clearance, cfg.planner, seed, s.disks);
      s.replans += 1;
      s.local_failures = 0;
      info.replanned = true;
    } catch (const Error&) {
      // keep the old path; the local planner still has the costmap
      s.replans += 1;
    }
  }

  s.intermediate = select_intermediate_goal(s.global, s.robot.pose.position, cfg.planner.lookahead);
  bool have_local = false;
  for (std::uint8_t blocked_from : {kernels::kInscribed, kernels::kLethal}) {
    try {
      s.local = plan_local_astar(s.costmap, s.robot.pose.position, *s.intermediate, blocked_from).points;
      have_local = true;
      break;
    } catch (const Error&) {
    }
  }

  s.command = {};
  if (have_local) {
    s.local_failures = 0;
    std::vector<Obstacle> bodies;
    for (const auto& d : s.frame.detections) bodies.push_back({to_world(s.robot.pose, d.local), d.radius});
    // the local path starts at the cell centre; begin it at the robot
    std::vector<Vec2> path = s.local;
    path.front() = s.robot.pose.position;
    s.command = reactive_avoid(path, s.robot, bodies, &s.costmap, cfg.limits, cfg.reactive);
  } else {
    s.local.clear();
    s.local_failures += 1;
    info.local_failed = true;
  }
  s.failures = (s.command == ControlCommand{}) ? s.failures + 1 : 0;

  s.robot = apply_control(s.robot, s.command, cfg.dt, world, cfg.limits);
  log_point(s, world);

  const double to_goal = distance(s.robot.pose.position, goal);
  if (to_goal <= cfg.planner.goal_tolerance) {
    stop(s, NavStatus::Reached, "");
    return info;
  }
  if (to_goal < s.best_distance - cfg.stall_progress) {
    s.best_distance = to_goal;
    s.stall = 0;
  } else {
    s.stall += 1;
  }
  if (s.failures >= cfg.max_failures) {
    stop(s, NavStatus::Unreachable, "no safe motion for " + std::to_string(s.failures) + " ticks");
  } else if (s.stall >= cfg.stall_ticks) {
    stop(s, NavStatus::Unreachable, "no progress toward the goal for " + std::to_string(s.stall) + " ticks");
  }
  return info;
}

PathMetrics path_metrics(std::span<const TrajectoryPoint> trajectory) {
  if (trajectory.empty()) throw Error(ErrorCode::EmptyInput, "empty trajectory");
  PathMetrics m;
  m.ticks = trajectory.size();
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const auto& p = trajectory[i];
    if (i > 0) m.length += distance(trajectory[i - 1].pose.position, p.pose.position);
    m.collisions += p.collided;
    for (const auto& o : p.objects) {
      const double d = distance(p.pose.position, o.position);
      auto [it, fresh] = m.min_distance.emplace(o.label, d);
      if (!fresh) it->second = std::min(it->second, d);
    }
  }
  m.duration = trajectory.back().time - trajectory.front().time;
  return m;
}

nlohmann::json trace_record(const NavState& s, const StepInfo& info) {
  using nlohmann::json;
  auto pts = [](const std::vector<Vec2>& v) {
    json a = json::array();
    for (const auto& p : v) a.push_back({p.x, p.y});
    return a;
  };
  json disks = json::array();
  for (const auto& d : s.disks) {
    disks.push_back({{"id", d.object_id}, {"label", d.label}, {"x", d.center.x}, {"y", d.center.y},
                     {"radius", d.radius}, {"moving", d.moving}, {"last_seen", d.last_seen}});
  }
  json objects = json::array();
  if (!s.trajectory.empty()) {
    for (const auto& o : s.trajectory.back().objects) {
      objects.push_back({{"id", o.id}, {"label", o.label}, {"x", o.position.x}, {"y", o.position.y},
                         {"radius", o.radius}});
    }
  }
  // the command executed this tick; a finished run has since reset s.command
  ControlCommand cmd = s.command;
  if (!s.trajectory.empty() && s.trajectory.back().tick == s.tick) cmd = s.trajectory.back().command;
  json rec{{"tick", s.tick},
           {"time", s.time},
           {"status", nav_status_name(s.status)},
           {"pose", {s.robot.pose.position.x, s.robot.pose.position.y, s.robot.pose.heading}},
           {"command", {cmd.linear, cmd.angular}},
           {"collided", s.robot.collided},
           {"disks", disks},
           {"objects", objects},
           {"local", pts(s.local)},
           {"replanned", info.replanned}};
  if (s.goal) rec["goal"] = {{"location", s.goal->location}, {"x", s.goal->position.x}, {"y", s.goal->position.y}};
  if (info.replanned || s.tick <= 1) rec["global"] = pts(s.global.points);
  if (!s.reason.empty()) rec["reason"] = s.reason;
  return rec;
}

std::vector<TrajectoryPoint> read_trace(std::istream& in) {
  std::vector<TrajectoryPoint> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TrajectoryPoint p;
      p.tick = j.at("tick").get<long>();
      p.time = j.at("time").get<double>();
      const auto& pose = j.at("pose");
      p.pose = {{pose.at(0).get<double>(), pose.at(1).get<double>()}, pose.at(2).get<double>()};
      p.command = {j.at("command").at(0).get<double>(), j.at("command").at(1).get<double>()};
      p.collided = j.at("collided").get<bool>();
      for (const auto& o : j.at("objects")) {
        p.objects.push_back({o.at("id").get<int>(), o.at("label").get<std::string>(),
                             {o.at("x").get<double>(), o.at("y").get<double>()}, o.at("radius").get<double>()});
      }
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Parse, "trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace langnav

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "langnav/error.hpp"
#include "langnav/map_io.hpp"
#include "langnav/random.hpp"
#include "langnav/world.hpp"

using namespace langnav;
using nlohmann::json;

namespace {

SemanticMap open_map(int cells = 200, double res = 0.05) {
  SemanticMap m;
  m.grid = GridMap(cells, cells, res, {-5.0, -5.0});
  return m;
}

RobotState robot_at(Vec2 p, double heading = 0.0) {
  RobotState r;
  r.pose = {p, heading};
  return r;
}

json tiny_map_doc() {
  json rows = json::array();
  for (int i = 0; i < 10; ++i) rows.push_back("10.");
  return {{"resolution", 1.0},
          {"width", 10},
          {"height", 10},
          {"rows", rows},
          {"start", {{"x", 0.5}, {"y", 0.5}}},
          {"locations", json::array({{{"name", "hall"}, {"x", 5.5}, {"y", 5.5}}})}};
}

}  // namespace

TEST_CASE("row codec") {
  CHECK(decode_row("3.2#?") == std::vector<Cell>{Cell::Free, Cell::Free, Cell::Free, Cell::Obstacle, Cell::Obstacle,
                                                  Cell::Unknown});
  CHECK(decode_row("..#") == std::vector<Cell>{Cell::Free, Cell::Free, Cell::Obstacle});
  CHECK(encode_row(decode_row("12.3#?")) == "12.3#?");
  CHECK_THROWS_AS(decode_row("3x"), Error);
  CHECK_THROWS_AS(decode_row("3"), Error);
}

TEST_CASE("demo maps load") {
  const auto m = load_map(LANGNAV_DATA_DIR "/maps/scene1.json");
  for (const char* name : {"restaurant", "information desk", "laboratory", "lift", "hall"}) {
    CHECK(m.find_location(name) != nullptr);
  }
  CHECK(m.grid.is_free(m.start.position));
  const auto s9 = load_map(LANGNAV_DATA_DIR "/maps/scene9.json");
  int moving = 0;
  for (const auto& o : s9.objects) moving += o.moving() ? 1 : 0;
  CHECK(moving >= 1);
  // serialization round trip
  const auto back = parse_map(map_to_json(s9));
  CHECK(back.grid.cells() == s9.grid.cells());
  CHECK(back.objects.size() == s9.objects.size());
}

TEST_CASE("map validation") {
  const auto ok = parse_map(tiny_map_doc());
  for (auto c : ok.grid.cells()) CHECK(c == Cell::Free);
  CHECK(ok.locations.size() == 1);

  auto doc = tiny_map_doc();
  doc["rows"][4] = "5.#4.";  // y = 5 row, x = 5 is the location cell
  try {
    parse_map(doc);
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvariantViolation);
    CHECK(std::string(e.what()).find("hall") != std::string::npos);
  }
  doc = tiny_map_doc();
  doc["rows"][0] = "9.";
  CHECK_THROWS_AS(parse_map(doc), Error);
  doc = tiny_map_doc();
  doc["objects"] = json::array({{{"id", 1}, {"label", "person"}, {"x", 1.0}, {"y", 1.0}, {"radius", 0.0}}});
  CHECK_THROWS_AS(parse_map(doc), Error);
}

TEST_CASE("visibility") {
  auto m = open_map();
  WorldObject obj{1, "person", {1.0, 0.0}, 0.25, {}};
  const SensorConfig sensor;
  CHECK(visible(robot_at({0, 0}), obj, m, sensor));
  obj.position = {5.0 + 1e-9, 0.0};
  CHECK_FALSE(visible(robot_at({0, 0}), obj, m, sensor));
  obj.position = {5.0 - 1e-9, 0.0};
  CHECK(visible(robot_at({0, 0}), obj, m, sensor));
  obj.position = {-1.0, 0.0};
  CHECK_FALSE(visible(robot_at({0, 0}), obj, m, sensor));
  // wall between robot and object
  m.grid.fill_rect({0.9, -1.0}, {1.1, 1.0}, Cell::Obstacle);
  obj.position = {2.0, 0.0};
  CHECK(ray_blocked(m.grid, {0, 0}, {2.0, 0.0}));
  CHECK_FALSE(visible(robot_at({0, 0}), obj, m, sensor));
  obj.position = {2.0, 2.6};
  CHECK(visible(robot_at({0, 0}), obj, m, sensor));
}

TEST_CASE("visibility is monotone in range and field of view") {
  auto m = open_map();
  m.grid.fill_rect({1.0, -2.0}, {1.2, 0.5}, Cell::Obstacle);
  Rng rng(5);
  for (int k = 0; k < 400; ++k) {
    const WorldObject obj{1, "person", {rng.uniform(-4.5, 4.5), rng.uniform(-4.5, 4.5)}, 0.25, {}};
    const auto r = robot_at({rng.uniform(-1, 0), rng.uniform(-1, 1)}, rng.uniform(-3.1, 3.1));
    SensorConfig small{rng.uniform(1, 4), rng.uniform(0.3, 2.5), 10.0, 0.0};
    SensorConfig big = small;
    big.range += rng.uniform(0, 2);
    big.fov += rng.uniform(0, 1);
    if (visible(r, obj, m, small)) CHECK(visible(r, obj, m, big));
  }
}

TEST_CASE("sense_objects transforms into the robot frame") {
  auto m = open_map();
  CHECK(sense_objects(robot_at({0, 0}), m, 0.0).detections.empty());
  m.objects.push_back({7, "person", {3.0, 0.0}, 0.25, {}});
  auto f = sense_objects(robot_at({0, 0}), m, 1.5);
  REQUIRE(f.detections.size() == 1);
  CHECK(f.timestamp == 1.5);
  CHECK(f.detections[0].object_id == 7);
  CHECK(f.detections[0].local == Vec2{3.0, 0.0});

  m.objects[0].position = {0.0, 2.0};
  const auto r = robot_at({0, 0}, std::numbers::pi / 2);
  f = sense_objects(r, m, 0.0);
  REQUIRE(f.detections.size() == 1);
  CHECK(f.detections[0].local.x == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(f.detections[0].local.y) < 1e-12);

  Rng rng(3);
  for (int k = 0; k < 200; ++k) {
    m.objects[0].position = {rng.uniform(-4, 4), rng.uniform(-4, 4)};
    const auto rr = robot_at({rng.uniform(-1, 1), rng.uniform(-1, 1)}, rng.uniform(-3.14, 3.14));
    for (const auto& d : sense_objects(rr, m, 0.0).detections) {
      CHECK(distance(to_world(rr.pose, d.local), m.objects[0].position) < 1e-9);
    }
  }
}

TEST_CASE("step_world moves loop objects along their polyline") {
  auto m = open_map();
  m.objects.push_back({1, "table", {1.0, 1.0}, 0.4, {}});
  WaypointLoop loop{{{0, 0}, {4, 0}, {4, 3}}, 1.0, 0.0};
  m.objects.push_back({2, "person", {0, 0}, 0.25, loop});
  step_world(m, 0.1);
  CHECK(m.objects[0].position == Vec2{1.0, 1.0});
  CHECK(m.objects[1].position.x == doctest::Approx(0.1).epsilon(1e-15));

  auto a = m;
  auto b = m;
  for (int i = 0; i < 100; ++i) step_world(a, 0.01);
  step_world(b, 1.0);
  CHECK(distance(a.objects[1].position, b.objects[1].position) < 1e-9);

  // perimeter 12: wraps back to the start
  auto c = open_map();
  c.objects.push_back({2, "person", {0, 0}, 0.25, loop});
  for (int i = 0; i < 120; ++i) step_world(c, 0.1);
  CHECK(distance(c.objects[0].position, {0, 0}) < 1e-9);
  CHECK(c.objects.size() == 1);
  CHECK(c.objects[0].label == "person");
  CHECK_THROWS_AS(step_world(c, 0.0), Error);
}

TEST_CASE("loop pedestrians stay on free cells") {
  auto m = load_map(LANGNAV_DATA_DIR "/maps/scene9.json");
  for (int i = 0; i < 2000; ++i) {
    step_world(m, 0.1);
    for (const auto& o : m.objects) CHECK(m.grid.is_free(o.position));
  }
}

TEST_CASE("unicycle kinematics") {
  const auto m = open_map();
  const RobotLimits wide{10.0, 10.0, 0.2};
  auto r = robot_at({0, 0});
  CHECK(apply_control(r, {0, 0}, 0.1, m).pose.position == r.pose.position);
  auto n = apply_control(r, {1.0, 0.0}, 1.0, m, wide);
  CHECK(n.pose.position.x == doctest::Approx(1.0).epsilon(1e-15));
  n = apply_control(r, {0.0, std::numbers::pi}, 1.0, m, wide);
  CHECK(std::abs(wrap_angle(n.pose.heading - std::numbers::pi)) < 1e-12);
  // default limits clamp
  n = apply_control(r, {2.0, 5.0}, 1.0, m);
  CHECK(n.linear == 0.7);
  CHECK(n.angular == 1.5);
  n = apply_control(r, {-1.0, -5.0}, 1.0, m);
  CHECK(n.linear == 0.0);
  CHECK(n.angular == -1.5);
  CHECK_THROWS_AS(apply_control(r, {0, 0}, 0.0, m), Error);
}

TEST_CASE("collisions are flagged") {
  auto m = open_map();
  m.grid.fill_rect({1.0, -1.0}, {1.2, 1.0}, Cell::Obstacle);
  m.objects.push_back({1, "person", {0.0, 1.0}, 0.25, {}});
  auto r = robot_at({0.5, 0.0});
  CHECK_FALSE(apply_control(r, {0.1, 0.0}, 1.0, m).collided);
  CHECK(apply_control(r, {0.4, 0.0}, 1.0, m).collided);
  r = robot_at({0.0, 0.0}, std::numbers::pi / 2);
  CHECK(apply_control(r, {0.6, 0.0}, 1.0, m).collided);
  CHECK(in_collision({-4.95, 0.0}, 0.2, m));  // leaves the map
}

TEST_CASE("simulation is deterministic") {
  auto run = [] {
    auto m = load_map(LANGNAV_DATA_DIR "/maps/scene9.json");
    RobotState r;
    r.pose = m.start;
    Rng rng(9);
    std::vector<double> trace;
    for (int i = 0; i < 200; ++i) {
      step_world(m, 0.1);
      r = apply_control(r, {rng.uniform(0, 0.7), rng.uniform(-1.5, 1.5)}, 0.1, m);
      trace.push_back(r.pose.position.x);
      trace.push_back(r.pose.position.y);
      trace.push_back(r.pose.heading);
    }
    return trace;
  };
  CHECK(run() == run());
}

#include "langnav/map_io.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "langnav/error.hpp"

namespace langnav {
namespace {

using nlohmann::json;

Cell cell_from_char(char c) {
  switch (c) {
    case '.': return Cell::Free;
    case '#': return Cell::Obstacle;
    case '?': return Cell::Unknown;
    default: throw Error(ErrorCode::Parse, std::string("unknown cell character '") + c + "'");
  }
}

char cell_char(Cell c) {
  switch (c) {
    case Cell::Free: return '.';
    case Cell::Obstacle: return '#';
    case Cell::Unknown: return '?';
  }
  return '?';
}

template <typename T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::Parse, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("field '") + key + "': " + e.what());
  }
}

Vec2 point(const json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::Parse, "point must be [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

std::string fmt(Vec2 p) {
  std::ostringstream os;
  os << "(" << p.x << ", " << p.y << ")";
  return os.str();
}

}  // namespace

std::vector<Cell> decode_row(const std::string& row) {
  std::vector<Cell> out;
  std::size_t count = 0;
  bool have_count = false;
  for (char c : row) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      count = count * 10 + static_cast<std::size_t>(c - '0');
      have_count = true;
      continue;
    }
    const Cell v = cell_from_char(c);
    if (have_count && count == 0) throw Error(ErrorCode::Parse, "zero run length");
    out.insert(out.end(), have_count ? count : 1, v);
    count = 0;
    have_count = false;
  }
  if (have_count) throw Error(ErrorCode::Parse, "row ends with a run length");
  return out;
}

std::string encode_row(const std::vector<Cell>& row) {
  std::string out;
  std::size_t i = 0;
  while (i < row.size()) {
    std::size_t j = i;
    while (j < row.size() && row[j] == row[i]) ++j;
    if (j - i > 1) out += std::to_string(j - i);
    out += cell_char(row[i]);
    i = j;
  }
  return out;
}

SemanticMap parse_map(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::Parse, "map document must be an object");
  SemanticMap map;
  map.name = doc.value("name", std::string{});
  const double res = field<double>(doc, "resolution");
  const int width = field<int>(doc, "width");
  const int height = field<int>(doc, "height");
  const Vec2 origin = doc.contains("origin") ? point(doc.at("origin")) : Vec2{};
  if (!(res > 0.0) || width <= 0 || height <= 0) {
    throw Error(ErrorCode::InvariantViolation, "map needs resolution > 0 and positive width/height");
  }
  map.grid = GridMap(width, height, res, origin);
  const auto rows = field<std::vector<std::string>>(doc, "rows");
  if (rows.size() != static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::Parse, "expected " + std::to_string(height) + " rows, got " + std::to_string(rows.size()));
  }
  for (int r = 0; r < height; ++r) {
    const auto cells = decode_row(rows[static_cast<std::size_t>(r)]);
    if (cells.size() != static_cast<std::size_t>(width)) {
      throw Error(ErrorCode::Parse, "row " + std::to_string(r) + " has " + std::to_string(cells.size()) +
                                        " cells, expected " + std::to_string(width));
    }
    const int y = height - 1 - r;
    for (int x = 0; x < width; ++x) map.grid.set({x, y}, cells[static_cast<std::size_t>(x)]);
  }

  if (doc.contains("start")) {
    const auto& s = doc.at("start");
    map.start = {{field<double>(s, "x"), field<double>(s, "y")}, s.value("heading", 0.0)};
  }
  for (const auto& l : doc.value("locations", json::array())) {
    map.locations.push_back({field<std::string>(l, "name"), {field<double>(l, "x"), field<double>(l, "y")}});
  }
  for (const auto& o : doc.value("objects", json::array())) {
    WorldObject obj;
    obj.id = field<int>(o, "id");
    obj.label = field<std::string>(o, "label");
    obj.position = {field<double>(o, "x"), field<double>(o, "y")};
    obj.radius = o.value("radius", 0.25);
    if (o.contains("motion")) {
      const auto& m = o.at("motion");
      const auto type = field<std::string>(m, "type");
      if (type == "loop") {
        WaypointLoop loop;
        loop.speed = field<double>(m, "speed");
        for (const auto& w : field<json>(m, "waypoints")) loop.waypoints.push_back(point(w));
        if (loop.waypoints.empty()) throw Error(ErrorCode::Parse, "loop motion needs waypoints");
        obj.position = loop.point_at(0.0);
        obj.loop = std::move(loop);
      } else if (type != "static") {
        throw Error(ErrorCode::Parse, "unknown motion type '" + type + "'");
      }
    }
    map.objects.push_back(std::move(obj));
  }

  std::vector<std::string> bad;
  if (!map.grid.is_free(map.start.position)) bad.push_back("start " + fmt(map.start.position) + " not on a Free cell");
  std::set<std::string> names;
  for (const auto& l : map.locations) {
    if (!names.insert(l.name).second) bad.push_back("duplicate location '" + l.name + "'");
    if (!map.grid.is_free(l.position)) bad.push_back("location '" + l.name + "' " + fmt(l.position) + " not on a Free cell");
  }
  std::set<int> ids;
  for (const auto& o : map.objects) {
    const std::string tag = "object " + std::to_string(o.id);
    if (!ids.insert(o.id).second) bad.push_back("duplicate " + tag);
    if (!(o.radius > 0.0)) bad.push_back(tag + " radius must be > 0");
    if (o.loop) {
      if (!(o.loop->speed >= 0.0)) bad.push_back(tag + " speed must be >= 0");
      for (const auto& w : o.loop->waypoints) {
        if (!map.grid.is_free(w)) bad.push_back(tag + " waypoint " + fmt(w) + " not on a Free cell");
      }
    }
  }
  if (!bad.empty()) {
    std::string msg = "map '" + map.name + "' rejected:";
    for (const auto& b : bad) msg += "\n  " + b;
    throw Error(ErrorCode::InvariantViolation, msg);
  }
  return map;
}

SemanticMap load_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open map " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
  }
  auto map = parse_map(doc);
  if (map.name.empty()) map.name = path.stem().string();
  return map;
}

json map_to_json(const SemanticMap& map) {
  const auto& g = map.grid;
  json rows = json::array();
  for (int y = g.height() - 1; y >= 0; --y) {
    std::vector<Cell> row(static_cast<std::size_t>(g.width()));
    for (int x = 0; x < g.width(); ++x) row[static_cast<std::size_t>(x)] = g.at({x, y});
    rows.push_back(encode_row(row));
  }
  json locations = json::array();
  for (const auto& l : map.locations) locations.push_back({{"name", l.name}, {"x", l.position.x}, {"y", l.position.y}});
  json objects = json::array();
  for (const auto& o : map.objects) {
    json motion = {{"type", "static"}};
    if (o.loop) {
      json wps = json::array();
      for (const auto& w : o.loop->waypoints) wps.push_back({w.x, w.y});
      motion = {{"type", "loop"}, {"speed", o.loop->speed}, {"waypoints", wps}};
    }
    objects.push_back({{"id", o.id},
                       {"label", o.label},
                       {"x", o.position.x},
                       {"y", o.position.y},
                       {"radius", o.radius},
                       {"motion", motion}});
  }
  return {{"schema", "langnav-map/1"},
          {"name", map.name},
          {"resolution", g.resolution()},
          {"origin", {g.origin().x, g.origin().y}},
          {"width", g.width()},
          {"height", g.height()},
          {"rows", rows},
          {"start", {{"x", map.start.position.x}, {"y", map.start.position.y}, {"heading", map.start.heading}}},
          {"locations", locations},
          {"objects", objects}};
}

}  // namespace langnav

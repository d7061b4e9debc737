#include "langnav/service.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "langnav/error.hpp"
#include "langnav/map_io.hpp"
#include "langnav/training.hpp"

namespace langnav {

using nlohmann::json;

Assets Assets::load(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, "assets directory " + dir.string() + " not found");
  Assets a;
  a.lexicon = std::make_shared<const Lexicon>(Lexicon::load(dir / "lexicon.csv"));
  if (fs::is_directory(dir / "maps")) {
    for (const auto& e : fs::directory_iterator(dir / "maps")) {
      if (e.path().extension() != ".json") continue;
      auto m = load_map(e.path());
      a.lexicon->check_coverage(m);
      a.maps.emplace(e.path().stem().string(), std::move(m));
    }
  }
  if (fs::is_directory(dir / "models")) {
    for (const auto& e : fs::directory_iterator(dir / "models")) {
      if (e.path().extension() != ".model") continue;
      a.models.emplace(e.path().stem().string(), std::make_shared<const ClassifierModel>(load_model(e.path())));
    }
  }
  return a;
}

const SemanticMap& Assets::map(const std::string& id) const {
  auto it = maps.find(id);
  if (it == maps.end()) throw Error(ErrorCode::UnknownAsset, "unknown map '" + id + "'");
  return it->second;
}

std::shared_ptr<const ClassifierModel> Assets::model(const std::string& id) const {
  auto it = models.find(id);
  if (it == models.end()) throw Error(ErrorCode::UnknownAsset, "unknown model '" + id + "'");
  return it->second;
}

NavConfig nav_config_from_json(const json& overrides, std::uint64_t seed) {
  NavConfig cfg;
  cfg.seed = seed;
  if (overrides.is_null()) return cfg;
  if (!overrides.is_object()) throw Error(ErrorCode::InvalidConfig, "config overrides must be an object");
  const std::map<std::string, double*> numbers{
      {"disk_radius", &cfg.planner.disk_radius},
      {"moving_margin", &cfg.planner.moving_margin},
      {"moving_timeout", &cfg.planner.moving_timeout},
      {"lookahead", &cfg.planner.lookahead},
      {"goal_tolerance", &cfg.planner.goal_tolerance},
      {"constraint_threshold", &cfg.grounding.constraint_threshold},
      {"goal_threshold", &cfg.grounding.goal_threshold},
      {"sensor_range", &cfg.sensor.range},
      {"sensor_fov", &cfg.sensor.fov},
      {"max_linear", &cfg.limits.max_linear},
      {"max_angular", &cfg.limits.max_angular},
      {"dt", &cfg.dt},
  };
  for (const auto& [key, value] : overrides.items()) {
    if (key == "clear_constraints_on_goal") {
      if (!value.is_boolean()) throw Error(ErrorCode::InvalidConfig, "clear_constraints_on_goal must be a boolean");
      cfg.clear_constraints_on_goal = value.get<bool>();
      continue;
    }
    auto it = numbers.find(key);
    if (it == numbers.end()) throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
    if (!value.is_number()) throw Error(ErrorCode::InvalidConfig, "config key '" + key + "' must be a number");
    *it->second = value.get<double>();
  }
  validate(cfg);
  return cfg;
}

namespace {

json point(Vec2 p) { return json::array({p.x, p.y}); }

json points(const std::vector<Vec2>& v) {
  json a = json::array();
  for (const auto& p : v) a.push_back(point(p));
  return a;
}

json goal_json(const GoalGrounding& g) {
  return {{"noun", g.noun}, {"location", g.location}, {"x", g.position.x}, {"y", g.position.y}, {"score", g.score}};
}

}  // namespace

json parsed_command_json(const ParsedCommand& cmd) {
  json phrases = json::array();
  for (const auto& p : cmd.phrases) {
    json nouns = json::array();
    for (const auto& n : p.nouns) nouns.push_back({{"text", n.text}, {"canonical", n.canonical}, {"known", n.known}});
    json words = json::array();
    for (const auto& w : split_words(p.text)) words.push_back(w);
    json ph{{"text", p.text},
            {"label", label_name(p.label)},
            {"probs", {{"goal", p.probs[0]}, {"constraint", p.probs[1]}, {"uninformative", p.probs[2]}}},
            {"words", words},
            {"attention", p.attention},
            {"nouns", nouns}};
    if (!p.error.empty()) ph["error"] = p.error;
    phrases.push_back(std::move(ph));
  }
  json out{{"raw", cmd.raw}, {"phrases", phrases}, {"constraint_nouns", cmd.constraint_nouns}};
  out["goal_noun"] = cmd.goal_noun ? json(*cmd.goal_noun) : json(nullptr);
  out["goal"] = cmd.goal ? goal_json(*cmd.goal) : json(nullptr);
  if (!cmd.goal_error.empty()) out["goal_error"] = cmd.goal_error;
  return out;
}

json costmap_json(const Costmap& cm, int max_cells) {
  int k = 1;
  if (max_cells > 0) {
    while ((cm.width + k - 1) / k > max_cells || (cm.height + k - 1) / k > max_cells) ++k;
  }
  const int w = (cm.width + k - 1) / k;
  const int h = (cm.height + k - 1) / k;
  std::vector<int> cells(static_cast<std::size_t>(w) * h, 0);
  // each block keeps its worst cell
  for (int y = 0; y < cm.height; ++y) {
    for (int x = 0; x < cm.width; ++x) {
      auto& c = cells[static_cast<std::size_t>(y / k) * w + x / k];
      c = std::max<int>(c, cm.at({x, y}));
    }
  }
  return {{"width", w},        {"height", h},   {"resolution", cm.resolution * k}, {"origin", point(cm.origin)},
          {"downsample", k},   {"cells", cells}};
}

std::optional<SnapshotPtr> Subscription::pop(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return !queue_.empty() || closed_; });
  if (queue_.empty()) return std::nullopt;
  auto s = std::move(queue_.front());
  queue_.pop_front();
  return s;
}

bool Subscription::closed() const {
  std::lock_guard lock(mu_);
  return closed_ && queue_.empty();
}

void Subscription::push(SnapshotPtr s) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    queue_.push_back(std::move(s));
  }
  cv_.notify_all();
}

void Subscription::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

json InstructionEvent::to_json() const {
  json out{{"text", text}, {"tick", tick}, {"ok", ok}};
  if (!ok) out["error"] = {{"code", error_code}, {"message", error}};
  out["parse"] = parsed ? parsed_command_json(*parsed) : json(nullptr);
  return out;
}

Session::Session(std::string id, const Assets& assets, const std::string& map_id, const std::string& model_id,
                 const json& overrides, std::uint64_t seed)
    : id_(std::move(id)), assets_(assets) {
  world_ = assets.map(map_id);
  model_ = assets.model(model_id);
  lexicon_ = assets.lexicon;
  if (!lexicon_) throw Error(ErrorCode::UnknownAsset, "no lexicon loaded");
  cfg_ = nav_config_from_json(overrides, seed);
  clearance_ = std::make_unique<ClearanceField>(world_.grid);
  state_ = initial_state(world_, cfg_);
  state_.costmap = build_costmap(state_.robot.pose.position, world_, {}, cfg_.planner);
  events_.push_back({{"type", "create"},
                     {"map", map_id},
                     {"model", model_id},
                     {"config", overrides.is_null() ? json::object() : overrides},
                     {"seed", seed}});
  publish_locked();
}

Session::~Session() {
  stop_ticker();
  std::lock_guard lock(mu_);
  for (auto& s : subscribers_) s->close();
}

InstructionEvent Session::submit_instruction(const std::string& text) {
  std::lock_guard lock(mu_);
  InstructionEvent ev;
  ev.text = text;
  ev.tick = state_.tick;
  events_.push_back({{"type", "instruction"}, {"text", text}});
  try {
    ev.parsed = parse_command(text, *model_, *lexicon_, &world_, cfg_.grounding);
    apply_instruction(state_, *ev.parsed, world_, *clearance_, cfg_);
    ev.ok = true;
  } catch (const Error& e) {
    ev.ok = false;
    ev.error_code = std::string(error_code_name(e.code()));
    ev.error = e.what();
  }
  if (!ev.ok) return ev;  // failed instructions leave the session untouched
  last_instruction_ = ev;
  // same tick, so the current snapshot is replaced without a stream record
  publish_locked();
  return ev;
}

void Session::tick(int n) {
  if (n < 0) throw Error(ErrorCode::InvalidConfig, "tick count must be >= 0");
  std::lock_guard lock(mu_);
  step_locked(n);
}

void Session::step_locked(int n) {
  if (n == 0) return;
  for (int k = 0; k < n; ++k) {
    navigation_step(world_, state_, *lexicon_, *clearance_, cfg_);
    publish_locked();
    auto snap = snapshot();
    for (auto& s : subscribers_) s->push(snap);
  }
  if (!events_.empty() && events_.back().at("type") == "tick") {
    events_.back()["n"] = events_.back().at("n").get<long>() + n;
  } else {
    events_.push_back({{"type", "tick"}, {"n", n}});
  }
}

void Session::publish_locked() {
  auto snap = std::make_shared<Snapshot>();
  snap->tick = state_.tick;
  json objects = json::array();
  for (const auto& o : world_.objects) {
    objects.push_back({{"id", o.id}, {"label", o.label}, {"x", o.position.x}, {"y", o.position.y},
                       {"radius", o.radius}, {"moving", o.moving()}});
  }
  json disks = json::array();
  for (const auto& d : state_.disks) {
    disks.push_back({{"id", d.object_id}, {"label", d.label}, {"x", d.center.x}, {"y", d.center.y},
                     {"radius", d.radius}, {"moving", d.moving}, {"last_seen", d.last_seen}});
  }
  json detections = json::array();
  for (const auto& d : state_.frame.detections) {
    detections.push_back({{"id", d.object_id}, {"label", d.label}, {"x", d.local.x}, {"y", d.local.y}});
  }
  json metrics = nullptr;
  if (!state_.trajectory.empty()) {
    const auto m = path_metrics(state_.trajectory);
    metrics = {{"length", m.length},
               {"duration", m.duration},
               {"collisions", m.collisions},
               {"min_distance", m.min_distance}};
  }
  const auto& r = state_.robot;
  snap->doc = {
      {"schema", "langnav-snapshot/1"},
      {"session", id_},
      {"tick", state_.tick},
      {"time", state_.time},
      {"status", nav_status_name(state_.status)},
      {"reason", state_.reason},
      {"robot",
       {{"x", r.pose.position.x},
        {"y", r.pose.position.y},
        {"heading", r.pose.heading},
        {"linear", r.linear},
        {"angular", r.angular},
        {"radius", r.radius},
        {"collided", r.collided}}},
      {"objects", objects},
      {"goal", state_.goal ? goal_json(*state_.goal) : json(nullptr)},
      {"constraint_nouns", state_.constraint_nouns},
      {"disks", disks},
      {"detections", detections},
      {"global_path", points(state_.global.points)},
      {"local_path", points(state_.local)},
      {"intermediate", state_.intermediate ? point(*state_.intermediate) : json(nullptr)},
      {"instruction", last_instruction_ ? last_instruction_->to_json() : json(nullptr)},
      {"costmap", costmap_json(state_.costmap, 120)},
      {"metrics", metrics},
  };
  std::lock_guard lock(snap_mu_);
  snapshot_ = std::move(snap);
}

SnapshotPtr Session::snapshot() const {
  std::lock_guard lock(snap_mu_);
  return snapshot_;
}

json Session::costmap() const {
  std::lock_guard lock(mu_);
  return costmap_json(state_.costmap, 0);
}

std::shared_ptr<Subscription> Session::subscribe() {
  std::lock_guard lock(mu_);
  auto sub = std::make_shared<Subscription>();
  sub->push(snapshot());
  subscribers_.push_back(sub);
  return sub;
}

void Session::unsubscribe(const std::shared_ptr<Subscription>& sub) {
  std::lock_guard lock(mu_);
  std::erase(subscribers_, sub);
  sub->close();
}

std::vector<json> Session::events() const {
  std::lock_guard lock(mu_);
  return events_;
}

RunMode Session::mode() const {
  std::lock_guard lock(mu_);
  return mode_;
}

void Session::stop_ticker() {
  if (ticker_.joinable()) {
    ticker_.request_stop();
    ticker_.join();
  }
}

void Session::set_mode(RunMode mode, double rate_hz) {
  if (mode == RunMode::Realtime && !(rate_hz > 0.0 && rate_hz <= 1000.0)) {
    throw Error(ErrorCode::InvalidConfig, "realtime rate must be in (0, 1000] Hz");
  }
  stop_ticker();
  {
    std::lock_guard lock(mu_);
    mode_ = mode;
    rate_hz_ = rate_hz;
  }
  if (mode != RunMode::Realtime) return;
  ticker_ = std::jthread([this, rate_hz](std::stop_token stop) {
    using clock = std::chrono::steady_clock;
    const auto period = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(1.0 / rate_hz));
    auto next = clock::now() + period;
    std::mutex wait_mu;
    std::condition_variable_any cv;
    while (!stop.stop_requested()) {
      {
        std::unique_lock lock(wait_mu);
        if (cv.wait_until(lock, stop, next, [] { return false; })) break;
      }
      if (stop.stop_requested()) break;
      {
        std::lock_guard lock(mu_);
        step_locked(1);
      }
      next += period;
    }
  });
}

std::shared_ptr<Session> SessionManager::create(const std::string& map_id, const std::string& model_id,
                                                const json& overrides, std::uint64_t seed) {
  std::unique_lock lock(mu_);
  const std::string id = "s" + std::to_string(next_id_);
  auto s = std::make_shared<Session>(id, assets_, map_id, model_id, overrides, seed);
  ++next_id_;
  sessions_.emplace(id, s);
  return s;
}

std::shared_ptr<Session> SessionManager::get(const std::string& id) const {
  std::shared_lock lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "unknown session '" + id + "'");
  return it->second;
}

bool SessionManager::remove(const std::string& id) {
  std::shared_ptr<Session> gone;
  {
    std::unique_lock lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return false;
    gone = std::move(it->second);
    sessions_.erase(it);
  }
  gone->set_mode(RunMode::Paused);
  return true;
}

std::vector<std::string> SessionManager::ids() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, _] : sessions_) out.push_back(id);
  return out;
}

std::unique_ptr<Session> replay_events(const Assets& assets, const std::vector<json>& events, const std::string& id) {
  if (events.empty() || events.front().value("type", "") != "create") {
    throw Error(ErrorCode::Parse, "event log must start with a create record");
  }
  std::unique_ptr<Session> s;
  try {
    const auto& c = events.front();
    s = std::make_unique<Session>(id, assets, c.at("map").get<std::string>(), c.at("model").get<std::string>(),
                                  c.value("config", json::object()), c.at("seed").get<std::uint64_t>());
    for (std::size_t i = 1; i < events.size(); ++i) {
      const auto& e = events[i];
      const auto type = e.at("type").get<std::string>();
      if (type == "instruction") {
        s->submit_instruction(e.at("text").get<std::string>());
      } else if (type == "tick") {
        s->tick(e.at("n").get<int>());
      } else {
        throw Error(ErrorCode::Parse, "unknown event type '" + type + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("bad event record: ") + e.what());
  }
  return s;
}

std::vector<json> read_event_log(std::istream& in) {
  std::vector<json> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Parse, std::string("bad event log line: ") + e.what());
    }
  }
  return out;
}

void write_event_log(const std::vector<json>& events, std::ostream& out) {
  for (const auto& e : events) out << e.dump() << "\n";
}

}  // namespace langnav

#pragma once

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "langnav/navigation.hpp"

namespace langnav {

// Assets directory layout:
//   lexicon.csv
//   maps/<id>.json
//   models/<id>.model
struct Assets {
  std::shared_ptr<const Lexicon> lexicon;
  std::map<std::string, SemanticMap> maps;
  std::map<std::string, std::shared_ptr<const ClassifierModel>> models;

  static Assets load(const std::filesystem::path& dir);
  const SemanticMap& map(const std::string& id) const;
  std::shared_ptr<const ClassifierModel> model(const std::string& id) const;
};

// Overrides accepted at session creation (all optional):
//   disk_radius, moving_margin, moving_timeout, lookahead, goal_tolerance,
//   constraint_threshold, goal_threshold, sensor_range, sensor_fov,
//   max_linear, max_angular, dt, clear_constraints_on_goal.
// Unknown keys and invalid values throw Error(InvalidConfig).
NavConfig nav_config_from_json(const nlohmann::json& overrides, std::uint64_t seed);

nlohmann::json parsed_command_json(const ParsedCommand& cmd);
nlohmann::json costmap_json(const Costmap& cm, int max_cells);

struct Snapshot {
  long tick = 0;
  nlohmann::json doc;  // schema "langnav-snapshot/1"
};
using SnapshotPtr = std::shared_ptr<const Snapshot>;

// Per-subscriber FIFO of snapshots. pop() blocks until a snapshot arrives,
// the session closes it, or the timeout passes.
class Subscription {
 public:
  std::optional<SnapshotPtr> pop(std::chrono::milliseconds timeout);
  bool closed() const;

 private:
  friend class Session;
  void push(SnapshotPtr s);
  void close();

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<SnapshotPtr> queue_;
  bool closed_ = false;
};

enum class RunMode { Paused, Realtime };

struct InstructionEvent {
  std::string text;
  long tick = 0;
  bool ok = false;
  std::string error_code;
  std::string error;
  std::optional<ParsedCommand> parsed;

  nlohmann::json to_json() const;
};

// Single-writer simulation session. Every mutation takes the session lock;
// snapshots are immutable and shared with readers and subscribers.
class Session {
 public:
  Session(std::string id, const Assets& assets, const std::string& map_id, const std::string& model_id,
          const nlohmann::json& overrides, std::uint64_t seed);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const std::string& id() const { return id_; }

  InstructionEvent submit_instruction(const std::string& text);
  // Advances n ticks and publishes one snapshot per tick. n = 0 is a no-op.
  void tick(int n);
  // Realtime ticks on a background thread at rate_hz until paused.
  void set_mode(RunMode mode, double rate_hz = 10.0);
  RunMode mode() const;

  SnapshotPtr snapshot() const;
  nlohmann::json costmap() const;
  // Starts with the current snapshot, then every later one in tick order.
  std::shared_ptr<Subscription> subscribe();
  void unsubscribe(const std::shared_ptr<Subscription>& sub);

  // create / instruction / tick records; replaying them reproduces the run.
  std::vector<nlohmann::json> events() const;

 private:
  void step_locked(int n);
  void publish_locked();
  void stop_ticker();

  std::string id_;
  const Assets& assets_;
  std::shared_ptr<const ClassifierModel> model_;
  std::shared_ptr<const Lexicon> lexicon_;
  NavConfig cfg_;
  SemanticMap world_;
  std::unique_ptr<ClearanceField> clearance_;
  NavState state_;
  std::optional<InstructionEvent> last_instruction_;

  mutable std::mutex mu_;
  std::vector<nlohmann::json> events_;
  std::vector<std::shared_ptr<Subscription>> subscribers_;

  mutable std::mutex snap_mu_;
  SnapshotPtr snapshot_;

  RunMode mode_ = RunMode::Paused;
  double rate_hz_ = 10.0;
  std::jthread ticker_;
};

class SessionManager {
 public:
  explicit SessionManager(const Assets& assets) : assets_(assets) {}

  std::shared_ptr<Session> create(const std::string& map_id, const std::string& model_id,
                                  const nlohmann::json& overrides, std::uint64_t seed);
  // Throws Error(UnknownSession).
  std::shared_ptr<Session> get(const std::string& id) const;
  bool remove(const std::string& id);
  std::vector<std::string> ids() const;
  const Assets& assets() const { return assets_; }

 private:
  const Assets& assets_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  long next_id_ = 1;
};

// Rebuilds a session from its event log (the "create" record first).
std::unique_ptr<Session> replay_events(const Assets& assets, const std::vector<nlohmann::json>& events,
                                       const std::string& id = "replay");
std::vector<nlohmann::json> read_event_log(std::istream& in);
void write_event_log(const std::vector<nlohmann::json>& events, std::ostream& out);

}  // namespace langnav

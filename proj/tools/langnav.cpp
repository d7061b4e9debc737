// langnav command line: corpus, train, classify, ground, simulate, metrics, serve.
#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "langnav/corpus.hpp"
#include "langnav/error.hpp"
#include "langnav/http_server.hpp"
#include "langnav/map_io.hpp"
#include "langnav/navigation.hpp"
#include "langnav/pipeline.hpp"
#include "langnav/service.hpp"
#include "langnav/training.hpp"

using namespace langnav;
using nlohmann::json;

namespace {

const std::string kData = LANGNAV_DATA_DIR;

HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"langnav: language-driven robot navigation"};
  app.require_subcommand(1);

  // corpus
  std::string grammar_path = kData + "/grammar.json";
  std::uint64_t corpus_seed = 7;
  std::size_t n_instructions = 500;
  std::string corpus_out;
  auto* corpus_cmd = app.add_subcommand("corpus", "generate a labeled phrase corpus");
  corpus_cmd->add_option("--grammar", grammar_path, "grammar file");
  corpus_cmd->add_option("--seed", corpus_seed, "corpus seed");
  corpus_cmd->add_option("-n,--instructions", n_instructions, "instructions to generate");
  corpus_cmd->add_option("-o,--out", corpus_out, "output file (default stdout)");

  // train
  std::string train_corpus, model_out, loss_out, arch_name = "attbilstm";
  TrainConfig tcfg;
  bool parallel = false;
  auto* train_cmd = app.add_subcommand("train", "train a phrase classifier");
  train_cmd->add_option("--corpus", train_corpus, "corpus file (default: generate from --grammar/--seed)");
  train_cmd->add_option("--grammar", grammar_path, "grammar file");
  train_cmd->add_option("--corpus-seed", corpus_seed, "corpus seed");
  train_cmd->add_option("--arch", arch_name, "lstm | bilstm | attbilstm");
  train_cmd->add_option("--epochs", tcfg.epochs);
  train_cmd->add_option("--batch", tcfg.batch_size);
  train_cmd->add_option("--lr", tcfg.learning_rate);
  train_cmd->add_option("--seed", tcfg.seed, "initialization / shuffling seed");
  train_cmd->add_option("--embedding", tcfg.embedding_dim);
  train_cmd->add_option("--hidden", tcfg.hidden_dim);
  train_cmd->add_flag("--parallel", parallel, "OpenMP gradient kernels");
  train_cmd->add_option("-o,--out", model_out, "model file")->required();
  train_cmd->add_option("--loss-out", loss_out, "per-epoch loss CSV");

  // classify / ground
  std::string model_path, lexicon_path = kData + "/lexicon.csv", map_path;
  std::string text;
  auto* classify_cmd = app.add_subcommand("classify", "split and label an instruction");
  classify_cmd->add_option("--model", model_path)->required();
  classify_cmd->add_option("text", text)->required();
  auto* ground_cmd = app.add_subcommand("ground", "parse an instruction and ground its goal on a map");
  ground_cmd->add_option("--model", model_path)->required();
  ground_cmd->add_option("--lexicon", lexicon_path);
  ground_cmd->add_option("--map", map_path);
  ground_cmd->add_option("text", text)->required();

  // simulate
  int ticks = 1500;
  std::uint64_t sim_seed = 1;
  std::string record_path, config_json;
  auto* sim_cmd = app.add_subcommand("simulate", "run an instruction to completion and report metrics");
  sim_cmd->add_option("--model", model_path)->required();
  sim_cmd->add_option("--lexicon", lexicon_path);
  sim_cmd->add_option("--map", map_path)->required();
  sim_cmd->add_option("--ticks", ticks, "tick budget");
  sim_cmd->add_option("--seed", sim_seed);
  sim_cmd->add_option("--config", config_json, "JSON config overrides");
  sim_cmd->add_option("--record", record_path, "write a per-tick trace (JSON lines)");
  sim_cmd->add_option("text", text)->required();

  // metrics
  std::string trace_path;
  auto* metrics_cmd = app.add_subcommand("metrics", "path metrics of a recorded trace");
  metrics_cmd->add_option("--trace", trace_path)->required();

  // serve
  std::string assets_dir = kData, host = "127.0.0.1";
  int port = 8080;
  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP session service");
  serve_cmd->add_option("--assets", assets_dir, "directory with lexicon.csv, maps/, models/");
  serve_cmd->add_option("--bind", host, "bind address (env LANGNAV_BIND)");
  serve_cmd->add_option("--port", port, "port (env LANGNAV_PORT)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*corpus_cmd) {
      const auto corpus = generate_corpus(Grammar::load(grammar_path), corpus_seed, n_instructions);
      if (corpus_out.empty()) {
        write_corpus(corpus, std::cout);
      } else {
        auto out = open_out(corpus_out);
        write_corpus(corpus, out);
      }
      std::cerr << "train " << corpus.train.size() << "  test " << corpus.test.size() << "\n";
    } else if (*train_cmd) {
      const auto corpus = train_corpus.empty() ? generate_corpus(Grammar::load(grammar_path), corpus_seed, 500)
                                               : load_corpus(train_corpus);
      tcfg.execution = parallel ? kernels::Execution::Parallel : kernels::Execution::Serial;
      const auto r = train(corpus, tcfg, parse_architecture(arch_name));
      save_model(r.model, model_out);
      if (!loss_out.empty()) {
        auto out = open_out(loss_out);
        out << "epoch,loss\n" << std::setprecision(10);
        for (std::size_t e = 0; e < r.loss_curve.size(); ++e) out << e + 1 << "," << r.loss_curve[e] << "\n";
      }
      std::cout << arch_name << "  final loss " << r.loss_curve.back() << "  test accuracy "
                << evaluate_accuracy(r.model, std::span<const LabeledText>(corpus.test)) << "\n";
    } else if (*classify_cmd || *ground_cmd) {
      const auto model = load_model(model_path);
      const auto lex = Lexicon::load(lexicon_path);
      std::optional<SemanticMap> map;
      if (!map_path.empty()) map = load_map(map_path);
      const auto cmd = parse_command(text, model, lex, map ? &*map : nullptr);
      auto doc = parsed_command_json(cmd);
      if (*classify_cmd) {
        for (auto& ph : doc.at("phrases")) ph.erase("nouns");
        doc = doc.at("phrases");
      }
      std::cout << doc.dump(2) << "\n";
    } else if (*sim_cmd) {
      const auto model = load_model(model_path);
      const auto lex = Lexicon::load(lexicon_path);
      auto world = load_map(map_path);
      lex.check_coverage(world);
      const auto cfg = nav_config_from_json(config_json.empty() ? json::object() : json::parse(config_json), sim_seed);
      const ClearanceField clearance(world.grid);
      auto state = initial_state(world, cfg);
      const auto cmd = parse_command(text, model, lex, &world, cfg.grounding);
      apply_instruction(state, cmd, world, clearance, cfg);
      std::optional<std::ofstream> rec;
      if (!record_path.empty()) {
        rec = open_out(record_path);
        *rec << trace_record(state, StepInfo{}).dump() << "\n";
      }
      for (int k = 0; k < ticks && state.status == NavStatus::Navigating; ++k) {
        const auto info = navigation_step(world, state, lex, clearance, cfg);
        if (rec) *rec << trace_record(state, info).dump() << "\n";
      }
      const auto m = path_metrics(state.trajectory);
      json out{{"status", nav_status_name(state.status)},
               {"reason", state.reason},
               {"goal", cmd.goal ? cmd.goal->location : ""},
               {"constraints", state.constraint_nouns},
               {"ticks", state.tick},
               {"length", m.length},
               {"duration", m.duration},
               {"collisions", m.collisions},
               {"min_distance", m.min_distance}};
      std::cout << out.dump(2) << "\n";
      return state.status == NavStatus::Reached ? 0 : 2;
    } else if (*metrics_cmd) {
      std::ifstream in(trace_path);
      if (!in) throw Error(ErrorCode::Io, "cannot read " + trace_path);
      const auto traj = read_trace(in);
      const auto m = path_metrics(traj);
      std::cout << json{{"ticks", m.ticks},
                        {"length", m.length},
                        {"duration", m.duration},
                        {"collisions", m.collisions},
                        {"min_distance", m.min_distance}}
                       .dump(2)
                << "\n";
    } else if (*serve_cmd) {
      if (serve_cmd->count("--bind") == 0) host = bind_address_from_env(host);
      if (serve_cmd->count("--port") == 0) port = port_from_env(port);
      const auto assets = Assets::load(assets_dir);
      if (assets.models.empty()) {
        std::cerr << "warning: no models in " << assets_dir << "/models; sessions cannot be created\n";
      }
      SessionManager sessions(assets);
      HttpServer server(sessions);
      const int bound = server.bind(host, port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on http://" << host << ":" << bound << "\n";
      server.listen();
      g_server = nullptr;
    }
  } catch (const Error& e) {
    std::cerr << "error [" << error_code_name(e.code()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "error [parse]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

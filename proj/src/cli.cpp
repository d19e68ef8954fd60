// Copyright 2026 The Shuttle Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "shuttle/cli.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "shuttle/agents.hpp"
#include "shuttle/env_spec.hpp"
#include "shuttle/error.hpp"
#include "shuttle/eval.hpp"
#include "shuttle/models.hpp"
#include "shuttle/server.hpp"

namespace shuttle::cli {

namespace fs = std::filesystem;

namespace {

constexpr int kConfigVersion = 1;
const std::vector<std::string> kBlocks = {"dataset", "models", "env", "train", "eval", "serve"};

using C = std::vector<std::string>;
const C kEnvUsers = {"train", "eval", "simulate", "serve"};

std::vector<OptionSpec> build_table() {
  std::vector<OptionSpec> t = {
      {"dataset.preset", ValueType::String, "preset", {"synth"}, "ground-truth preset: balanced | attacker-favored"},
      {"dataset.ground_truth_file", ValueType::Path, "ground-truth", {"synth"}, "ground-truth config file (overrides preset)"},
      {"dataset.rallies", ValueType::Int, "rallies", {"synth"}, "number of rallies to generate"},
      {"dataset.seed", ValueType::Int, "seed", {"synth"}, "generator seed"},
      {"dataset.input", ValueType::Path, "data", {"fit"}, "rally log (JSON lines) to fit on"},
      {"dataset.test_fraction", ValueType::Float, "test-fraction", {"fit"}, "fraction of rallies held out"},
      {"dataset.split_seed", ValueType::Int, "split-seed", {"fit"}, "train/test split seed"},
      {"models.alpha", ValueType::Float, "alpha", {"fit"}, "Laplace smoothing"},
      {"models.reduction", ValueType::String, "reduction", {"fit"}, "success/return table key: drop_col | full"},
      {"models.next_action", ValueType::Path, "next-action", {"train", "eval", "simulate", "serve"},
       "next-action model behind bc:* policies"},
      {"env.file", ValueType::Path, "env-config", kEnvUsers, "env spec file; env.* keys set elsewhere override it"},
      {"env.models", ValueType::String, "env-models", kEnvUsers, "dynamics: ground_truth | fitted | constant"},
      {"env.preset", ValueType::String, "env-preset", kEnvUsers, "ground-truth preset for ground_truth dynamics"},
      {"env.ground_truth_file", ValueType::Path, "", kEnvUsers, "ground-truth config file for ground_truth dynamics"},
      {"env.success_file", ValueType::Path, "success-model", kEnvUsers, "fitted success model"},
      {"env.return_file", ValueType::Path, "return-model", kEnvUsers, "fitted return model"},
      {"env.p_success", ValueType::Float, "", kEnvUsers, "constant dynamics: execution probability"},
      {"env.p_return", ValueType::Float, "", kEnvUsers, "constant dynamics: return probability"},
      {"env.score_rule", ValueType::String, "score-rule", kEnvUsers, "game_to_21 | first_to_<n>"},
      {"env.history_window", ValueType::Int, "history-window", kEnvUsers, "shots in the observation window"},
      {"env.initial_server", ValueType::String, "", kEnvUsers, "p0 | p1"},
      {"env.reward_win", ValueType::Float, "", kEnvUsers, "reward for winning a rally"},
      {"env.reward_loss", ValueType::Float, "", kEnvUsers, "reward for losing a rally"},
      {"env.opponent_infallible", ValueType::Bool, "", kEnvUsers, "opponent shots never fault"},
      {"env.opponent", ValueType::String, "opponent", {"train", "eval", "simulate"},
       "fixed opponent in seat p1: uniform | bc:p0 | bc:p1 | <policy file>"},
      {"train.algorithm", ValueType::String, "algorithm", {"train"}, "a2c | ppo | sac"},
      {"train.total_steps", ValueType::Int, "steps", {"train"}, "environment steps"},
      {"train.seed", ValueType::Int, "seed", {"train"}, "training seed"},
      {"train.hidden", ValueType::IntList, "hidden", {"train"}, "hidden layer widths"},
      {"train.head", ValueType::String, "head", {"train"}, "action head: flat | factored"},
      {"train.optimizer", ValueType::String, "optimizer", {"train"}, "sgd | adam"},
      {"train.learning_rate", ValueType::Float, "lr", {"train"}, "learning rate"},
      {"train.momentum", ValueType::Float, "", {"train"}, "sgd momentum"},
      {"train.max_grad_norm", ValueType::Float, "", {"train"}, "gradient norm clip; <= 0 disables"},
      {"train.gamma", ValueType::Float, "gamma", {"train"}, "discount"},
      {"train.num_envs", ValueType::Int, "num-envs", {"train"}, "parallel environments (a2c, ppo)"},
      {"train.rollout_length", ValueType::Int, "", {"train"}, "steps per env per update (a2c, ppo)"},
      {"train.entropy_coef", ValueType::Float, "", {"train"}, "entropy bonus (a2c, ppo)"},
      {"train.value_coef", ValueType::Float, "", {"train"}, "value loss weight (a2c, ppo)"},
      {"train.gae_lambda", ValueType::Float, "", {"train"}, "GAE lambda (ppo)"},
      {"train.epochs", ValueType::Int, "", {"train"}, "epochs per rollout (ppo)"},
      {"train.minibatch_size", ValueType::Int, "", {"train"}, "minibatch size (ppo, sac)"},
      {"train.clip_epsilon", ValueType::Float, "", {"train"}, "ratio clip (ppo)"},
      {"train.clip", ValueType::Bool, "", {"train"}, "use the clipped surrogate (ppo)"},
      {"train.value_clip", ValueType::Float, "", {"train"}, "value clip; 0 disables (ppo)"},
      {"train.normalize_advantages", ValueType::Bool, "", {"train"}, "normalize advantages per minibatch (ppo)"},
      {"train.tau", ValueType::Float, "", {"train"}, "target network rate (sac)"},
      {"train.target_entropy", ValueType::Float, "", {"train"}, "target entropy in nats (sac)"},
      {"train.initial_temperature", ValueType::Float, "", {"train"}, "initial temperature (sac)"},
      {"train.auto_temperature", ValueType::Bool, "", {"train"}, "tune the temperature (sac)"},
      {"train.temperature_lr", ValueType::Float, "", {"train"}, "temperature learning rate (sac)"},
      {"train.replay_capacity", ValueType::Int, "", {"train"}, "replay buffer size (sac)"},
      {"train.learning_starts", ValueType::Int, "", {"train"}, "steps before updates start (sac)"},
      {"train.update_every", ValueType::Int, "", {"train"}, "env steps per update (sac)"},
      {"train.eval_every", ValueType::Int, "eval-every", {"train"}, "env steps between evaluations; 0 = end only"},
      {"train.eval_games", ValueType::Int, "eval-games", {"train"}, "games per evaluation"},
      {"train.eval_greedy", ValueType::Bool, "", {"train"}, "evaluate the greedy policy"},
      {"train.divergence_threshold", ValueType::Float, "", {"train"}, "abort when mean |logit| exceeds this"},
      {"eval.policy", ValueType::String, "policy", {"eval", "simulate"}, "policy in seat p0: uniform | bc:p0 | bc:p1 | <policy file>"},
      {"eval.greedy", ValueType::Bool, "greedy", {"eval", "simulate"}, "play policy files greedily"},
      {"eval.games", ValueType::Int, "games", {"eval", "simulate"}, "matches to play"},
      {"eval.seed", ValueType::Int, "seed", {"eval", "simulate"}, "match seed"},
      {"eval.best_of", ValueType::Int, "best-of", {"eval"}, "games per match (odd)"},
      {"eval.topk", ValueType::IntList, "topk", {"eval"}, "k values for the top-k table"},
      {"eval.projections", ValueType::StringList, "projections", {"eval"}, "stroke_type, landing_zone, full_action"},
      {"eval.test_data", ValueType::Path, "test-data", {"eval"}, "held-out rally log for the top-k table"},
      {"serve.host", ValueType::String, "host", {"serve"}, "bind address"},
      {"serve.port", ValueType::Int, "port", {"serve"}, "port"},
      {"serve.checkpoint_dir", ValueType::Path, "checkpoint-dir", {"serve"}, "directory of policy checkpoints"},
      {"serve.tick_ms", ValueType::Int, "tick-ms", {"serve"}, "autoplay interval of running sessions; 0 disables"},
      {"serve.static_dir", ValueType::Path, "static-dir", {"serve"}, "console bundle served at /"},
      {"serve.snapshot_dir", ValueType::Path, "snapshot-dir", {"serve"}, "write closed sessions here"},
  };
  return t;
}

Json block_defaults() {
  Json env = EnvSpec{};
  env["file"] = "";
  env["opponent"] = "bc:p1";
  return Json{{"dataset",
               {{"preset", "balanced"},
                {"ground_truth_file", ""},
                {"rallies", 10000},
                {"seed", 0},
                {"input", ""},
                {"test_fraction", 0.2},
                {"split_seed", 0}}},
              {"models", {{"alpha", 1.0}, {"reduction", "drop_col"}, {"next_action", ""}}},
              {"env", env},
              {"train", TrainConfig{}},
              {"eval",
               {{"policy", "uniform"},
                {"greedy", true},
                {"games", 1000},
                {"seed", 0},
                {"best_of", 1},
                {"topk", {1, 2, 3, 5}},
                {"projections", {"stroke_type", "landing_zone"}},
                {"test_data", ""}}},
              {"serve",
               {{"host", "127.0.0.1"},
                {"port", 8080},
                {"checkpoint_dir", ""},
                {"tick_ms", 400},
                {"static_dir", ""},
                {"snapshot_dir", ""}}}};
}

std::pair<std::string, std::string> split_key(const std::string& key) {
  const auto dot = key.find('.');
  return {key.substr(0, dot), key.substr(dot + 1)};
}

const OptionSpec& spec_for(const std::string& key) {
  for (const auto& s : option_table()) {
    if (s.key == key) return s;
  }
  throw ValidationError("unknown config key: " + key);
}

std::string type_name(ValueType t) {
  switch (t) {
    case ValueType::String: return "string";
    case ValueType::Path: return "path";
    case ValueType::Int: return "int";
    case ValueType::Float: return "float";
    case ValueType::Bool: return "bool";
    case ValueType::IntList: return "int_list";
    case ValueType::StringList: return "string_list";
  }
  return "";
}

bool type_ok(ValueType t, const Json& v) {
  switch (t) {
    case ValueType::String:
    case ValueType::Path: return v.is_string();
    case ValueType::Int: return v.is_number_integer();
    case ValueType::Float: return v.is_number();
    case ValueType::Bool: return v.is_boolean();
    case ValueType::IntList:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const Json& x) { return x.is_number_integer(); });
    case ValueType::StringList:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const Json& x) { return x.is_string(); });
  }
  return false;
}

Json& at_key(Json& cfg, const std::string& key) {
  const auto [block, name] = split_key(key);
  return cfg[block][name];
}

const Json& get(const Json& cfg, const std::string& key) {
  const auto [block, name] = split_key(key);
  return cfg.at(block).at(name);
}

std::string str(const Json& cfg, const std::string& key) { return get(cfg, key).get<std::string>(); }

// Relative paths become absolute against `base` so locks stay usable from
// any working directory.
void absolutize(Json& layer, const fs::path& base) {
  for (const auto& s : option_table()) {
    if (s.type != ValueType::Path) continue;
    const auto [block, name] = split_key(s.key);
    if (!layer.contains(block) || !layer[block].contains(name)) continue;
    Json& v = layer[block][name];
    if (v.is_string() && !v.get<std::string>().empty()) {
      fs::path p(v.get<std::string>());
      if (p.is_relative()) v = fs::weakly_canonical(base / p).string();
    }
  }
}

fs::path require_file(const Json& cfg, const std::string& key) {
  const std::string p = str(cfg, key);
  if (p.empty()) throw ValidationError(key + " is required");
  if (!fs::exists(p)) throw NotFoundError(key + ": no such file " + p);
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write " + path.string());
  out << text;
}

EnvSpec env_spec_of(const Json& cfg) {
  Json spec = cfg.at("env");
  spec.erase("file");
  spec.erase("opponent");
  return spec.get<EnvSpec>();
}

std::shared_ptr<const NextActionModel> next_action_of(const Json& cfg) {
  const fs::path p = require_file(cfg, "models.next_action");
  return std::make_shared<NextActionModel>(NextActionModel::from_json(load_json(p)));
}

PolicyHandle policy_of(const Json& cfg, const std::string& key, std::optional<int> obs_dim, bool greedy_files) {
  const std::string name = str(cfg, key);
  if (name == "uniform") return uniform_random_policy();
  if (name == "bc:p0" || name == "bc:p1") return bc_policy(next_action_of(cfg), name == "bc:p0" ? PlayerId::P0 : PlayerId::P1);
  if (name.empty()) throw ValidationError(key + " is required");
  if (!fs::exists(name)) throw NotFoundError(key + ": no such policy file " + name);
  PolicyHandle p = load_policy(name, obs_dim);
  return greedy_files ? with_greedy(p, true) : p;
}

EnvConfig env_of(const Json& cfg) {
  const EnvSpec spec = env_spec_of(cfg);
  EnvConfig env = build_env_config(spec);
  env.description["opponent"] = str(cfg, "env.opponent");
  return env;
}

struct Context {
  std::string command;
  Json cfg;
  fs::path run_dir;
  std::ostream& out;
};

Json cmd_synth(Context& c) {
  const GroundTruthConfig gt = str(c.cfg, "dataset.ground_truth_file").empty()
                                   ? ground_truth_preset(str(c.cfg, "dataset.preset"))
                                   : load_ground_truth(require_file(c.cfg, "dataset.ground_truth_file"));
  const int n = get(c.cfg, "dataset.rallies").get<int>();
  if (n < 1) throw RangeError("dataset.rallies must be >= 1");
  const auto rallies = synth_generate(gt, n, get(c.cfg, "dataset.seed").get<std::uint64_t>());
  save_rally_log(c.run_dir / "rallies.jsonl", rallies);
  save_json(c.run_dir / "ground_truth.json", gt);
  save_json(c.run_dir / "summary.json", summary_stats(rallies));
  return Json{{"rallies", (c.run_dir / "rallies.jsonl").string()}, {"count", n}};
}

Json cmd_fit(Context& c) {
  const auto all = load_rally_log(require_file(c.cfg, "dataset.input"));
  const auto [train, test] = split_rallies(all, get(c.cfg, "dataset.test_fraction").get<double>(),
                                           get(c.cfg, "dataset.split_seed").get<std::uint64_t>());
  const double alpha = get(c.cfg, "models.alpha").get<double>();
  const ActionReduction red = parse_action_reduction(str(c.cfg, "models.reduction"));
  save_json(c.run_dir / "success.json", success_model_to_json(fit_success(train, alpha, red)));
  save_json(c.run_dir / "return.json", return_model_to_json(fit_return(train, alpha, red)));
  save_json(c.run_dir / "next_action.json", fit_next_action(train, alpha).to_json());
  save_rally_log(c.run_dir / "train.jsonl", train);
  save_rally_log(c.run_dir / "test.jsonl", test);
  EnvSpec spec;
  spec.models = "fitted";
  spec.success_file = "success.json";
  spec.return_file = "return.json";
  save_json(c.run_dir / "env.json", spec);
  return Json{{"success", (c.run_dir / "success.json").string()},
              {"return", (c.run_dir / "return.json").string()},
              {"next_action", (c.run_dir / "next_action.json").string()},
              {"env", (c.run_dir / "env.json").string()},
              {"train_rallies", train.size()},
              {"test_rallies", test.size()}};
}

Json cmd_train(Context& c) {
  TrainConfig tc = c.cfg.at("train").get<TrainConfig>();
  EnvConfig env = env_of(c.cfg);
  env.opponent = policy_of(c.cfg, "env.opponent", observation_dim(env.observation.history_window), false);
  const int games = tc.eval_games;
  const PolicyHandle opponent = env.opponent;
  Evaluator evaluator = [&env, opponent, games](const PolicyHandle& p, std::uint64_t seed) {
    return run_matches(*p, *opponent, env, games, seed);
  };
  const TrainResult r = train(env, tc, evaluator);
  save_policy(*r.policy, c.run_dir / "policy.json");
  save_json(c.run_dir / "report.json", r.report);
  write_text(c.run_dir / "curve.csv", r.report.to_csv());
  const CurvePoint& last = r.report.curve.back();
  return Json{{"policy", (c.run_dir / "policy.json").string()},
              {"steps", r.report.steps},
              {"eval_win_rate", last.eval_win_rate},
              {"eval_ci", last.eval_ci}};
}

std::vector<Projection> projections_of(const Json& cfg) {
  std::vector<Projection> out;
  for (const auto& p : get(cfg, "eval.projections")) out.push_back(parse_projection(p.get<std::string>()));
  return out;
}

Json cmd_eval(Context& c) {
  EnvConfig env = env_of(c.cfg);
  const int obs = observation_dim(env.observation.history_window);
  const PolicyHandle policy = policy_of(c.cfg, "eval.policy", obs, get(c.cfg, "eval.greedy").get<bool>());
  const PolicyHandle opponent = policy_of(c.cfg, "env.opponent", obs, false);
  const int games = get(c.cfg, "eval.games").get<int>();
  Json summary;
  if (games > 0) {
    const WinRateReport w = run_matches(*policy, *opponent, env, games, get(c.cfg, "eval.seed").get<std::uint64_t>(),
                                        get(c.cfg, "eval.best_of").get<int>());
    save_json(c.run_dir / "win_rate.json", w);
    summary["win_rate"] = w.win_rate;
    summary["ci_halfwidth"] = w.ci_halfwidth;
    summary["games"] = w.n_games;
  }
  if (!str(c.cfg, "eval.test_data").empty()) {
    const auto test = load_rally_log(require_file(c.cfg, "eval.test_data"));
    const auto model = next_action_of(c.cfg);
    const TopkTable t = topk_report(*model, test, get(c.cfg, "eval.topk").get<std::vector<int>>(), projections_of(c.cfg));
    save_json(c.run_dir / "topk.json", t);
    write_text(c.run_dir / "topk.txt", t.to_text());
    c.out << t.to_text();
    summary["topk"] = (c.run_dir / "topk.json").string();
  }
  if (summary.is_null()) throw ValidationError("nothing to evaluate: set eval.games > 0 or eval.test_data");
  return summary;
}

Json cmd_simulate(Context& c) {
  EnvConfig env = env_of(c.cfg);
  const int obs = observation_dim(env.observation.history_window);
  const PolicyHandle policy = policy_of(c.cfg, "eval.policy", obs, get(c.cfg, "eval.greedy").get<bool>());
  const PolicyHandle opponent = policy_of(c.cfg, "env.opponent", obs, false);
  const int games = get(c.cfg, "eval.games").get<int>();
  if (games < 1) throw RangeError("eval.games must be >= 1");
  const auto seed = get(c.cfg, "eval.seed").get<std::uint64_t>();
  std::ofstream out(c.run_dir / "games.jsonl", std::ios::binary);
  int wins = 0;
  for (int g = 0; g < games; ++g) {
    const GameRecord rec = play_game(*policy, *opponent, env, mix_seed(seed, static_cast<std::uint64_t>(g)));
    wins += rec.winner == PlayerId::P0;
    out << Json(rec).dump() << "\n";
  }
  return Json{{"games", (c.run_dir / "games.jsonl").string()}, {"p0_wins", wins}, {"count", games}};
}

volatile std::sig_atomic_t g_stop_requested = 0;

Json cmd_serve(Context& c) {
  auto catalog = std::make_shared<CheckpointCatalog>();
  if (!str(c.cfg, "serve.checkpoint_dir").empty()) catalog->load_dir(str(c.cfg, "serve.checkpoint_dir"));
  if (!str(c.cfg, "models.next_action").empty()) {
    const auto model = next_action_of(c.cfg);
    catalog->add("bc-p0", bc_policy(model, PlayerId::P0));
    catalog->add("bc-p1", bc_policy(model, PlayerId::P1));
  }
  catalog->add("uniform", uniform_random_policy());
  ServiceOptions so;
  if (!str(c.cfg, "serve.snapshot_dir").empty()) so.snapshot_dir = fs::path(str(c.cfg, "serve.snapshot_dir"));
  auto sessions = std::make_shared<SessionManager>(catalog, so);
  sessions->add_env_config("default", env_of(c.cfg));
  ServerOptions opts;
  opts.tick_ms = get(c.cfg, "serve.tick_ms").get<int>();
  if (!str(c.cfg, "serve.static_dir").empty()) opts.static_dir = fs::path(str(c.cfg, "serve.static_dir"));
  HttpServer server(sessions, opts);
  const int port = server.bind(str(c.cfg, "serve.host"), get(c.cfg, "serve.port").get<int>());
  c.out << Json{{"listening", str(c.cfg, "serve.host") + ":" + std::to_string(port)},
                {"checkpoints", catalog->list().checkpoints.size()}}
               .dump()
        << std::endl;
  g_stop_requested = 0;
  std::signal(SIGINT, [](int) { g_stop_requested = 1; });
  std::signal(SIGTERM, [](int) { g_stop_requested = 1; });
  std::atomic<bool> done{false};
  std::thread watcher([&] {
    while (!done.load() && !g_stop_requested) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
  });
  server.run();
  done = true;
  watcher.join();
  return Json{{"stopped", true}};
}

std::string type_label(ValueType t) {
  switch (t) {
    case ValueType::Path: return "PATH";
    case ValueType::Int: return "INT";
    case ValueType::Float: return "FLOAT";
    case ValueType::Bool: return "BOOL";
    case ValueType::IntList: return "INT,...";
    case ValueType::StringList: return "NAME,...";
    default: return "TEXT";
  }
}

void print_error(std::ostream& err, const std::string& code, const std::string& message) {
  err << Json{{"error", {{"code", code}, {"message", message}}}}.dump() << std::endl;
}

}  // namespace

const std::vector<OptionSpec>& option_table() {
  static const std::vector<OptionSpec> table = build_table();
  return table;
}

std::vector<std::string> command_names() { return {"synth", "fit", "train", "eval", "simulate", "serve", "config-schema"}; }

Json default_config() { return block_defaults(); }

Json config_schema() {
  const Json defaults = default_config();
  Json keys = Json::array();
  for (const auto& s : option_table()) {
    keys.push_back(Json{{"key", s.key},
                        {"type", type_name(s.type)},
                        {"default", get(defaults, s.key)},
                        {"flag", s.flag.empty() ? Json(nullptr) : Json("--" + s.flag)},
                        {"commands", s.commands},
                        {"help", s.help}});
  }
  return Json{{"version", kConfigVersion}, {"keys", keys}};
}

void validate_config(const Json& cfg) {
  if (!cfg.is_object()) throw ValidationError("config must be a JSON object");
  for (const auto& [block, body] : cfg.items()) {
    if (block == "command") {
      if (!body.is_string()) throw ValidationError("command must be a string");
      continue;
    }
    if (block == "version") {
      if (body != kConfigVersion) throw ValidationError("unsupported config version " + body.dump());
      continue;
    }
    if (std::find(kBlocks.begin(), kBlocks.end(), block) == kBlocks.end()) {
      throw ValidationError("unknown config block: " + block);
    }
    if (!body.is_object()) throw ValidationError("config block " + block + " must be an object");
    for (const auto& [name, value] : body.items()) {
      const OptionSpec& s = spec_for(block + "." + name);
      if (!type_ok(s.type, value)) {
        throw ValidationError(s.key + " must be of type " + type_name(s.type) + ", got " + value.dump());
      }
    }
  }
}

Json merge_config(const Json& base, const Json& overlay) {
  validate_config(base);
  validate_config(overlay);
  Json out = base;
  for (const auto& [block, body] : overlay.items()) {
    if (!body.is_object()) {
      out[block] = body;
      continue;
    }
    for (const auto& [name, value] : body.items()) out[block][name] = value;
  }
  return out;
}

Json parse_value(const OptionSpec& spec, const std::string& text) {
  auto fail = [&] { return ValidationError(spec.key + ": cannot parse '" + text + "' as " + type_name(spec.type)); };
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) parts.push_back(item);
    }
    return parts;
  };
  try {
    switch (spec.type) {
      case ValueType::String:
      case ValueType::Path: return text;
      case ValueType::Int: {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used != text.size()) throw fail();
        return v;
      }
      case ValueType::Float: {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw fail();
        return v;
      }
      case ValueType::Bool:
        if (text == "true" || text == "1") return true;
        if (text == "false" || text == "0") return false;
        throw fail();
      case ValueType::IntList: {
        Json arr = Json::array();
        for (const auto& p : split(text)) {
          std::size_t used = 0;
          arr.push_back(std::stoll(p, &used));
          if (used != p.size()) throw fail();
        }
        return arr;
      }
      case ValueType::StringList: return Json(split(text));
    }
  } catch (const std::invalid_argument&) {
    throw fail();
  } catch (const std::out_of_range&) {
    throw fail();
  }
  throw fail();
}

fs::path run_directory(const std::string& command, const Json& lock, const std::string& explicit_dir) {
  if (!explicit_dir.empty()) return explicit_dir;
  const char* env = std::getenv("SHUTTLE_RUN_DIR");
  const fs::path root = env && *env ? fs::path(env) : fs::path("runs");
  return root / (command + "-" + fingerprint(lock).substr(0, 8));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Badminton rally simulator: synthesize logs, fit dynamics, train and evaluate agents, serve sessions.",
               "shuttle"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  struct Parsed {
    std::string config_file;
    std::vector<std::string> sets;
    std::string run_dir;
    std::map<std::string, std::string> flags;
  };
  std::map<std::string, Parsed> parsed;
  std::map<std::string, CLI::App*> subs;

  for (const auto& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name, name == "config-schema" ? "Print the config schema as JSON" : "Run the " + name + " stage");
    subs[name] = sub;
    if (name == "config-schema") continue;
    Parsed& p = parsed[name];
    sub->add_option("--config", p.config_file, "JSON config file (a config.lock.json works)");
    sub->add_option("--set", p.sets, "Override any key: --set train.gamma=0.95")->take_all();
    sub->add_option("--run-dir", p.run_dir, "Output directory (default: $SHUTTLE_RUN_DIR or ./runs, plus <command>-<hash>)");
    const Json defaults = default_config();
    for (const auto& s : option_table()) {
      if (s.flag.empty() || std::find(s.commands.begin(), s.commands.end(), name) == s.commands.end()) continue;
      sub->add_option("--" + s.flag, p.flags[s.key],
                      s.help + " [" + s.key + ", default " + get(defaults, s.key).dump() + "]")
          ->type_name(type_label(s.type));
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    for (const auto& [name, sub] : subs) {
      if (sub->parsed()) {
        out << sub->help();
        return 0;
      }
    }
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    print_error(err, "usage", e.what());
    return 1;
  }

  std::string command;
  for (const auto& [name, sub] : subs) {
    if (sub->parsed()) command = name;
  }
  try {
    if (command == "config-schema") {
      out << config_schema().dump(2) << "\n";
      return 0;
    }
    Parsed& p = parsed[command];
    CLI::App* sub = subs[command];

    Json user = Json::object();
    if (!p.config_file.empty()) {
      Json file = load_json(p.config_file);
      validate_config(file);
      if (file.contains("command") && file["command"] != command) {
        throw ValidationError("config is a lock for '" + file["command"].get<std::string>() + "', not '" + command + "'");
      }
      file.erase("command");
      file.erase("version");
      absolutize(file, fs::absolute(p.config_file).parent_path());
      user = merge_config(user, file);
    }
    Json cli_layer = Json::object();
    for (const auto& kv : p.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + kv + "'");
      const OptionSpec& s = spec_for(kv.substr(0, eq));
      at_key(cli_layer, s.key) = parse_value(s, kv.substr(eq + 1));
    }
    for (const auto& s : option_table()) {
      if (s.flag.empty()) continue;
      const auto it = p.flags.find(s.key);
      if (it == p.flags.end() || sub->count("--" + s.flag) == 0) continue;
      at_key(cli_layer, s.key) = parse_value(s, it->second);
    }
    absolutize(cli_layer, fs::current_path());
    user = merge_config(user, cli_layer);

    // env.file sits between the defaults and everything set explicitly.
    Json cfg = default_config();
    const std::string env_file = user.contains("env") && user["env"].contains("file") ? user["env"]["file"].get<std::string>() : "";
    if (!env_file.empty()) {
      Json spec = load_json(env_file);
      (void)spec.get<EnvSpec>();
      Json layer{{"env", spec}};
      absolutize(layer, fs::path(env_file).parent_path());
      cfg = merge_config(cfg, layer);
    }
    cfg = merge_config(cfg, user);
    (void)env_spec_of(cfg);
    cfg.at("train").get<TrainConfig>().validate();

    Json lock = cfg;
    lock["command"] = command;
    lock["version"] = kConfigVersion;
    const fs::path dir = run_directory(command, lock, p.run_dir);
    fs::create_directories(dir);
    save_json(dir / "config.lock.json", lock);

    Context ctx{command, cfg, dir, out};
    Json result;
    if (command == "synth") result = cmd_synth(ctx);
    if (command == "fit") result = cmd_fit(ctx);
    if (command == "train") result = cmd_train(ctx);
    if (command == "eval") result = cmd_eval(ctx);
    if (command == "simulate") result = cmd_simulate(ctx);
    if (command == "serve") result = cmd_serve(ctx);
    result["run_dir"] = dir.string();
    out << result.dump() << "\n";
    return 0;
  } catch (const DivergenceError& e) {
    print_error(err, e.code(), e.what());
    return 1;
  } catch (const Error& e) {
    print_error(err, e.code(), e.what());
    return e.code() == "io" ? 2 : 1;
  } catch (const std::exception& e) {
    print_error(err, "internal", e.what());
    return 2;
  }
}

}  // namespace shuttle::cli

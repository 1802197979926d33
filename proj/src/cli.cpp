#include "phimdp/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "phimdp/agent.hpp"
#include "phimdp/coding.hpp"
#include "phimdp/environment.hpp"
#include "phimdp/errors.hpp"
#include "phimdp/icost.hpp"
#include "phimdp/search.hpp"
#include "phimdp/trace.hpp"

namespace phimdp {

namespace fs = std::filesystem;

void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += fmt::format(".tmp{}", static_cast<unsigned long>(std::hash<std::string>{}(path) & 0xffffff));
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error(fmt::format("cannot open '{}' for writing", tmp.string()));
    f << content;
    f.flush();
    if (!f) throw std::runtime_error(fmt::format("write to '{}' failed", tmp.string()));
  }
  fs::rename(tmp, target);
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  auto number = [&](std::string_view s) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
      throw std::invalid_argument(fmt::format("bad seed '{}'", s));
    }
    return v;
  };
  std::vector<std::uint64_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string_view item = text.substr(pos, comma - pos);
    if (const auto dash = item.find('-'); dash != std::string_view::npos) {
      const auto lo = number(item.substr(0, dash));
      const auto hi = number(item.substr(dash + 1));
      if (hi < lo) throw std::invalid_argument(fmt::format("empty seed range '{}'", item));
      for (auto s = lo; s <= hi; ++s) out.push_back(s);
    } else {
      out.push_back(number(item));
    }
    pos = comma + 1;
  }
  return out;
}

std::string with_seed_suffix(const std::string& path, std::uint64_t seed) {
  fs::path p(path);
  const std::string stem = p.stem().string();
  const std::string ext = p.extension().string();
  return (p.parent_path() / fmt::format("{}.seed{}{}", stem, seed, ext)).string();
}

std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open config file '{}'", path));
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(path, lineno, "expected key=value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(path, lineno, "empty key");
    out.emplace_back(std::move(key), trim(line.substr(eq + 1)));
  }
  return out;
}

void configure_logging() {
  static bool done = false;
  if (!done) {
    spdlog::set_default_logger(spdlog::stderr_logger_mt("phimdp"));
    done = true;
  }
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("PHIMDP_LOG")) {
    const std::string v(env);
    if (v == "error") level = spdlog::level::err;
    else if (v == "warn") level = spdlog::level::warn;
    else if (v == "info") level = spdlog::level::info;
    else if (v == "debug") level = spdlog::level::debug;
  }
  spdlog::set_level(level);
}

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Folds `--config file` into the argument list: keys from the file become
// `--key value` unless the flag was given explicitly.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  auto it = std::find(args.begin(), args.end(), "--config");
  std::string path;
  if (it != args.end()) {
    if (it + 1 == args.end()) throw UsageError("--config needs a file");
    path = *(it + 1);
    args.erase(it, it + 2);
  } else {
    auto eq = std::find_if(args.begin(), args.end(), [](const std::string& a) { return a.rfind("--config=", 0) == 0; });
    if (eq == args.end()) return args;
    path = eq->substr(9);
    args.erase(eq);
  }
  for (const auto& [key, value] : read_config_file(path)) {
    const std::string flag = "--" + key;
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (!given) {
      args.push_back(flag);
      args.push_back(value);
    }
  }
  return args;
}

FeatureMap load_phi(const std::optional<std::string>& phi_file, const std::optional<std::size_t>& k,
                    const Alphabet& observations) {
  if (phi_file && k) throw UsageError("--phi-file and --phi-k are exclusive");
  if (k) return KOrderMap{*k};
  if (phi_file) return load_suffix_set(*phi_file, observations);
  return ContextTreeMap(observations.size());
}

std::string suffix_set_text(const ContextTreeMap& phi, const Alphabet& observations) {
  std::ostringstream s;
  write_suffix_set(s, phi, observations);
  return s.str();
}

struct RunOptions {
  std::string env;
  std::size_t steps = 1000;
  std::uint64_t seed = 0;
  std::optional<std::string> seeds;
  std::size_t improve_iters = 10;
  std::string gamma_schedule = "default";
  double rmax_coeff = AgentConfig{}.rmax_poly_coeff;
  std::string criterion = "cost";
  bool exploration = true;
  std::size_t window = 100;
  std::string out = "trace.csv";
  std::string metrics = "metrics.csv";
  std::optional<std::string> phi_out;
};

int cmd_run(const RunOptions& o, std::ostream& out) {
  AgentConfig cfg;
  cfg.improve_iters_per_step = o.improve_iters;
  cfg.gamma_schedule = GammaSchedule::parse(o.gamma_schedule);
  cfg.rmax_poly_coeff = o.rmax_coeff;
  cfg.criterion = parse_criterion(o.criterion);
  cfg.exploration = o.exploration;
  cfg.reward_window = o.window;
  if (o.steps < 1) throw UsageError("--steps must be at least 1");
  const auto seeds = o.seeds ? parse_seed_list(*o.seeds) : std::vector<std::uint64_t>{o.seed};
  const bool many = seeds.size() > 1;
  for (const auto seed : seeds) {
    cfg.seed = seed;
    auto env = make_environment(o.env);
    spdlog::info("run env={} steps={} seed={}", o.env, o.steps, seed);
    const EpisodeResult result = run_episode(*env, o.steps, cfg);
    const auto path = [&](const std::string& p) { return many ? with_seed_suffix(p, seed) : p; };
    write_file_atomic(path(o.out), trace_to_string(result.history));
    std::ostringstream m;
    write_metrics(m, result.metrics);
    write_file_atomic(path(o.metrics), m.str());
    if (o.phi_out) write_file_atomic(path(*o.phi_out), suffix_set_text(result.final_phi, env->alphabets()->observations));
    out << fmt::format("seed={} steps={} avg_reward={} states={} cost_bits={}\n", seed, o.steps,
                       result.average_reward(1, o.steps), result.metrics.back().states, result.final_cost);
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  configure_logging();
  CLI::App app{"Feature reinforcement learning: choose a state map by code length, then plan on it"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run the online agent in an environment");
  run_cmd->add_option("--env", run.env, "tiny, chain, bandit, flip or file:<path>")->required();
  run_cmd->add_option("--steps", run.steps, "Agent-environment cycles")->capture_default_str();
  run_cmd->add_option("--seed", run.seed, "Random seed")->capture_default_str();
  run_cmd->add_option("--seeds", run.seeds, "Seed list such as 1-10 or 1,4,9; outputs get a .seedK suffix");
  run_cmd->add_option("--improve-iters", run.improve_iters, "Phi improvement steps per cycle")->capture_default_str();
  run_cmd->add_option("--gamma-schedule", run.gamma_schedule, "default (1 - 1/(n+1)) or a fixed discount")
      ->capture_default_str();
  run_cmd->add_option("--rmax-coeff", run.rmax_coeff, "Coefficient of the exploration reward")->capture_default_str();
  run_cmd->add_option("--criterion", run.criterion, "cost or icost")->capture_default_str();
  run_cmd->add_option("--exploration", run.exploration, "Add the optimistic absorbing state")->capture_default_str();
  run_cmd->add_option("--window", run.window, "Reward averaging window for the metrics")->capture_default_str();
  run_cmd->add_option("--out", run.out, "Trace CSV")->capture_default_str();
  run_cmd->add_option("--metrics", run.metrics, "Metrics CSV")->capture_default_str();
  run_cmd->add_option("--phi-out", run.phi_out, "Final suffix set");

  std::string trace_path;
  std::optional<std::string> phi_file;
  std::optional<std::size_t> phi_k;
  auto add_trace_phi = [&](CLI::App* cmd) {
    cmd->add_option("--trace", trace_path, "Trace CSV")->required();
    cmd->add_option("--phi-file", phi_file, "Suffix-set file (default: the single empty context)");
    cmd->add_option("--phi-k", phi_k, "Use the last k observations instead of a suffix set");
  };
  auto* cost_cmd = app.add_subcommand("cost", "Print state_bits,reward_bits,total");
  add_trace_phi(cost_cmd);

  std::string penalty = "observed";
  auto* icost_cmd = app.add_subcommand("icost", "Print nll_bits,penalty_bits,total,M");
  add_trace_phi(icost_cmd);
  icost_cmd->add_option("--penalty", penalty, "full or observed")->capture_default_str();

  SearchConfig search_cfg;
  std::string criterion = "cost";
  std::optional<std::string> phi_out;
  std::optional<std::string> log_path;
  auto* search_cmd = app.add_subcommand("search", "Anneal a suffix set; prints the incumbent");
  search_cmd->add_option("--trace", trace_path, "Trace CSV")->required();
  search_cmd->add_option("--phi-file", phi_file, "Initial suffix set (default: the single empty context)");
  search_cmd->add_option("--iters", search_cfg.iterations, "Improvement steps")->capture_default_str();
  search_cmd->add_option("--seed", search_cfg.seed, "Random seed")->capture_default_str();
  search_cmd->add_option("--criterion", criterion, "cost or icost")->capture_default_str();
  search_cmd->add_option("--log-every", search_cfg.log_every, "Log every k-th iteration")->capture_default_str();
  search_cmd->add_option("--phi-out", phi_out, "Write the incumbent suffix set here");
  search_cmd->add_option("--log", log_path, "Write the iter,cost,accepted log here");

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? 0 : 2;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run, out);
    const History h = load_trace(trace_path);
    const auto& observations = h.alphabets().observations;
    if (cost_cmd->parsed()) {
      const auto c = cost(load_phi(phi_file, phi_k, observations), h);
      out << fmt::format("{},{},{}\n", c.state_bits, c.reward_bits, c.total);
      return 0;
    }
    if (icost_cmd->parsed()) {
      PenaltyMode mode;
      if (penalty == "observed") mode = PenaltyMode::Observed;
      else if (penalty == "full") mode = PenaltyMode::Full;
      else throw UsageError(fmt::format("unknown penalty '{}' (expected full or observed)", penalty));
      const auto c = icost(load_phi(phi_file, phi_k, observations), h, mode);
      out << fmt::format("{},{},{},{}\n", c.neg_log_likelihood, c.parameter_penalty, c.total, c.parameters);
      return 0;
    }
    search_cfg.criterion = parse_criterion(criterion);
    const FeatureMap start = load_phi(phi_file, std::nullopt, observations);
    const auto result = anneal(std::get<ContextTreeMap>(start), h, search_cfg);
    const std::string text = suffix_set_text(result.incumbent, observations);
    if (phi_out) write_file_atomic(*phi_out, text);
    if (log_path) {
      std::ostringstream log;
      write_search_log(log, result);
      write_file_atomic(*log_path, log.str());
    }
    out << text;
    spdlog::info("search: initial {} incumbent {} final {}", result.initial_cost, result.incumbent_cost,
                 result.final_cost);
    return 0;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace phimdp

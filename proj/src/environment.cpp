#include "phimdp/environment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <fmt/format.h>

#include "phimdp/errors.hpp"

namespace phimdp {

namespace {

constexpr double kProbSlack = 1e-9;

template <typename Items, typename Prob>
std::size_t sample(const Items& items, Prob prob_of, Rng& rng) {
  const double u = uniform_open_closed(rng);
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const double p = prob_of(items[i]);
    if (p <= 0.0) continue;
    acc += p;
    last = i;
    if (u <= acc) return i;
  }
  return last;  // rounding slack at the top end
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

constexpr std::string_view kFlip = R"(# Two states, observation = state. "flip" toggles, "stay" keeps.
[states]
s0
s1
[actions]
stay
flip
[transitions]
s0,stay,s0,1
s0,flip,s1,1
s1,stay,s1,1
s1,flip,s0,1
[obs]
s0,0
s1,1
[rewards]
s0,flip,s1,1
s1,stay,s1,1
)";

constexpr std::string_view kChain = R"(# Five-state chain, observation = state.
# "back" returns to s0, "forward" moves one step right (s4 stays put).
# Reward 1 only for entering or staying at s4.
[states]
s0
s1
s2
s3
s4
[actions]
back
forward
[start]
s0
[transitions]
s0,back,s0,1
s1,back,s0,1
s2,back,s0,1
s3,back,s0,1
s4,back,s0,1
s0,forward,s1,1
s1,forward,s2,1
s2,forward,s3,1
s3,forward,s4,1
s4,forward,s4,1
[obs]
s0,0
s1,1
s2,2
s3,3
s4,4
[rewards]
s3,forward,s4,1
s4,forward,s4,1
)";

constexpr std::string_view kBandit = R"(# Two-armed Bernoulli bandit behind a constant observation.
[states]
s
[actions]
arm0
arm1
[transitions]
s,arm0,s,1
s,arm1,s,1
[obs]
s,0
[rewards]
s,arm0,s,1,0.2
s,arm0,s,0,0.8
s,arm1,s,1,0.8
s,arm1,s,0,0.2
)";

}  // namespace

TinyExampleEnv::TinyExampleEnv()
    : alphabets_(std::make_shared<const Alphabets>(
          Alphabets{Alphabet({"0", "1"}), Alphabet({"0"}), RewardAlphabet({"0", "1", "2", "3"})})) {}

Symbol TinyExampleEnv::reset(Rng& rng) {
  previous_ = static_cast<Symbol>(rng() >> 63);
  return previous_;
}

Percept TinyExampleEnv::step(Symbol action, Rng& rng) {
  if (action != 0) throw std::invalid_argument(fmt::format("tiny example has a single action, got {}", action));
  const auto o = static_cast<Symbol>(rng() >> 63);
  const Symbol r = reward_for(previous_, o);
  previous_ = o;
  return Percept{o, r};
}

std::vector<TabularModel::RewardOutcome> TabularModel::reward_distribution(std::size_t s, Symbol a,
                                                                           std::size_t to) const {
  auto it = rewards.find({s, a, to});
  if (it != rewards.end()) return it->second;
  return {RewardOutcome{alphabets->rewards.index("0"), 1.0}};
}

TabularModel read_tabular_model(std::istream& in, const std::string& source) {
  struct Line {
    std::size_t number;
    std::vector<std::string> fields;
  };
  std::unordered_map<std::string, std::vector<Line>> sections;
  std::string section;
  std::string raw;
  std::size_t lineno = 0;
  static const std::vector<std::string> known = {"states", "actions", "start", "transitions", "obs", "rewards"};
  while (std::getline(in, raw)) {
    ++lineno;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(source, lineno, "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (std::find(known.begin(), known.end(), section) == known.end()) {
        throw ParseError(source, lineno, fmt::format("unknown section [{}]", section));
      }
      if (sections.count(section)) throw ParseError(source, lineno, fmt::format("duplicate section [{}]", section));
      sections[section];
      continue;
    }
    if (section.empty()) throw ParseError(source, lineno, "content before the first section");
    sections[section].push_back(Line{lineno, split_fields(line)});
  }

  auto need = [&](const std::string& name) -> const std::vector<Line>& {
    auto it = sections.find(name);
    if (it == sections.end() || it->second.empty()) throw ParseError(source, 0, fmt::format("missing section [{}]", name));
    return it->second;
  };
  auto expect_fields = [&](const Line& l, std::size_t lo, std::size_t hi) {
    if (l.fields.size() < lo || l.fields.size() > hi) {
      throw ParseError(source, l.number, fmt::format("expected {} fields, got {}",
                                                     lo == hi ? fmt::format("{}", lo) : fmt::format("{}-{}", lo, hi),
                                                     l.fields.size()));
    }
    for (const auto& f : l.fields) {
      if (f.empty()) throw ParseError(source, l.number, "empty field");
    }
  };
  auto parse_prob = [&](const Line& l, const std::string& text) {
    double p = 0.0;
    try {
      std::size_t used = 0;
      p = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
      throw ParseError(source, l.number, fmt::format("bad probability '{}'", text));
    }
    if (!(p >= 0.0 && p <= 1.0)) throw ParseError(source, l.number, fmt::format("probability {} outside [0, 1]", p));
    return p;
  };

  TabularModel m;
  std::unordered_map<std::string, std::size_t> state_index;
  for (const auto& l : need("states")) {
    expect_fields(l, 1, 1);
    if (!state_index.emplace(l.fields[0], m.states.size()).second) {
      throw ParseError(source, l.number, fmt::format("duplicate state '{}'", l.fields[0]));
    }
    m.states.push_back(l.fields[0]);
  }
  auto state_of = [&](const Line& l, const std::string& name) {
    auto it = state_index.find(name);
    if (it == state_index.end()) throw ParseError(source, l.number, fmt::format("unknown state '{}'", name));
    return it->second;
  };

  const auto& transitions = need("transitions");
  std::vector<std::string> actions;
  if (auto it = sections.find("actions"); it != sections.end()) {
    for (const auto& l : it->second) {
      expect_fields(l, 1, 1);
      if (std::find(actions.begin(), actions.end(), l.fields[0]) != actions.end()) {
        throw ParseError(source, l.number, fmt::format("duplicate action '{}'", l.fields[0]));
      }
      actions.push_back(l.fields[0]);
    }
  } else {
    for (const auto& l : transitions) {
      expect_fields(l, 4, 4);
      if (std::find(actions.begin(), actions.end(), l.fields[1]) == actions.end()) actions.push_back(l.fields[1]);
    }
  }
  if (actions.empty()) throw ParseError(source, 0, "no actions");
  auto action_of = [&](const Line& l, const std::string& name) {
    auto it = std::find(actions.begin(), actions.end(), name);
    if (it == actions.end()) throw ParseError(source, l.number, fmt::format("unknown action '{}'", name));
    return static_cast<Symbol>(it - actions.begin());
  };

  if (auto it = sections.find("start"); it != sections.end() && !it->second.empty()) {
    if (it->second.size() != 1) throw ParseError(source, it->second[1].number, "more than one start state");
    expect_fields(it->second[0], 1, 1);
    m.start = state_of(it->second[0], it->second[0].fields[0]);
  }

  const std::size_t na = actions.size();
  m.transitions.resize(m.states.size() * na);
  for (const auto& l : transitions) {
    expect_fields(l, 4, 4);
    const std::size_t s = state_of(l, l.fields[0]);
    const Symbol a = action_of(l, l.fields[1]);
    const std::size_t to = state_of(l, l.fields[2]);
    const double p = parse_prob(l, l.fields[3]);
    auto& row = m.transitions[s * na + a];
    if (std::any_of(row.begin(), row.end(), [&](const auto& o) { return o.to == to; })) {
      throw ParseError(source, l.number, "duplicate transition");
    }
    row.push_back({to, p});
  }
  for (std::size_t s = 0; s < m.states.size(); ++s) {
    for (std::size_t a = 0; a < na; ++a) {
      double sum = 0.0;
      for (const auto& o : m.transitions[s * na + a]) sum += o.probability;
      if (std::abs(sum - 1.0) > kProbSlack) {
        throw ParseError(source, 0, fmt::format("transitions of ({}, {}) sum to {}", m.states[s], actions[a], sum));
      }
    }
  }

  std::vector<std::string> obs_label(m.states.size());
  std::vector<std::string> obs_labels;
  for (const auto& l : need("obs")) {
    expect_fields(l, 2, 2);
    const std::size_t s = state_of(l, l.fields[0]);
    if (!obs_label[s].empty()) throw ParseError(source, l.number, fmt::format("second observation for '{}'", m.states[s]));
    obs_label[s] = l.fields[1];
    obs_labels.push_back(l.fields[1]);
  }
  for (std::size_t s = 0; s < m.states.size(); ++s) {
    if (obs_label[s].empty()) throw ParseError(source, 0, fmt::format("state '{}' has no observation", m.states[s]));
  }

  struct RawReward {
    std::size_t number;
    std::size_t s;
    Symbol a;
    std::size_t to;
    std::string label;
    double p;
  };
  std::vector<RawReward> raw_rewards;
  std::vector<std::string> reward_labels{"0"};
  if (auto it = sections.find("rewards"); it != sections.end()) {
    for (const auto& l : it->second) {
      expect_fields(l, 4, 5);
      RawReward r{l.number, state_of(l, l.fields[0]), action_of(l, l.fields[1]), state_of(l, l.fields[2]), l.fields[3],
                  l.fields.size() == 5 ? parse_prob(l, l.fields[4]) : 1.0};
      try {
        std::size_t used = 0;
        (void)std::stod(r.label, &used);
        if (used != r.label.size()) throw std::invalid_argument(r.label);
      } catch (const std::exception&) {
        throw ParseError(source, l.number, fmt::format("reward '{}' is not a number", r.label));
      }
      reward_labels.push_back(r.label);
      raw_rewards.push_back(std::move(r));
    }
  }

  auto alphabets = std::make_shared<Alphabets>();
  alphabets->observations = Alphabet(canonical_label_order(obs_labels));
  alphabets->actions = Alphabet(actions);
  alphabets->rewards = RewardAlphabet(canonical_label_order(reward_labels));
  m.alphabets = alphabets;
  for (std::size_t s = 0; s < m.states.size(); ++s) m.observation.push_back(alphabets->observations.index(obs_label[s]));

  for (const auto& r : raw_rewards) {
    auto& dist = m.rewards[{r.s, r.a, r.to}];
    const Symbol sym = alphabets->rewards.index(r.label);
    if (std::any_of(dist.begin(), dist.end(), [&](const auto& o) { return o.reward == sym; })) {
      throw ParseError(source, r.number, "duplicate reward outcome");
    }
    dist.push_back({sym, r.p});
  }
  for (const auto& [key, dist] : m.rewards) {
    double sum = 0.0;
    for (const auto& o : dist) sum += o.probability;
    if (std::abs(sum - 1.0) > kProbSlack) {
      const auto& [s, a, to] = key;
      throw ParseError(source, 0,
                       fmt::format("rewards of ({}, {}, {}) sum to {}", m.states[s], actions[a], m.states[to], sum));
    }
  }
  return m;
}

TabularModel load_tabular_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open environment file '{}'", path));
  return read_tabular_model(in, path);
}

TabularEnv::TabularEnv(TabularModel model) : model_(std::move(model)), state_(model_.start) {}

Symbol TabularEnv::reset(Rng&) {
  state_ = model_.start;
  return model_.observation[state_];
}

Percept TabularEnv::step(Symbol action, Rng& rng) {
  if (action >= model_.num_actions()) throw std::invalid_argument(fmt::format("action {} out of range", action));
  const auto& row = model_.transitions[state_ * model_.num_actions() + action];
  const std::size_t to = row[sample(row, [](const auto& o) { return o.probability; }, rng)].to;
  const auto dist = model_.reward_distribution(state_, action, to);
  const Symbol r = dist[sample(dist, [](const auto& o) { return o.probability; }, rng)].reward;
  state_ = to;
  return Percept{model_.observation[to], r};
}

std::string_view builtin_env_text(std::string_view name) {
  if (name == "flip") return kFlip;
  if (name == "chain") return kChain;
  if (name == "bandit") return kBandit;
  throw std::invalid_argument(fmt::format("unknown environment '{}'", name));
}

TabularModel builtin_model(std::string_view name) {
  std::istringstream in{std::string(builtin_env_text(name))};
  return read_tabular_model(in, std::string(name));
}

std::unique_ptr<Environment> make_environment(std::string_view spec) {
  if (spec == "tiny") return std::make_unique<TinyExampleEnv>();
  if (spec.starts_with("file:")) return std::make_unique<TabularEnv>(load_tabular_model(std::string(spec.substr(5))));
  return std::make_unique<TabularEnv>(builtin_model(spec));
}

}  // namespace phimdp

#include "phimdp/trace.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "phimdp/errors.hpp"

namespace phimdp {

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : std::runtime_error(line > 0 ? fmt::format("{}:{}: {}", source, line, what) : fmt::format("{}: {}", source, what)),
      line_(line) {}

namespace {

struct RawRow {
  std::size_t line;
  std::string o, a, r;
  bool complete;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<RawRow> read_rows(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  std::vector<RawRow> rows;
  while (std::getline(in, line)) {
    ++lineno;
    auto view = trim(line);
    if (view.empty()) continue;
    if (!header_seen) {
      auto fields = split_fields(view);
      if (fields != std::vector<std::string>{"t", "o", "a", "r"}) {
        throw ParseError(source, lineno, "expected header 't,o,a,r'");
      }
      header_seen = true;
      continue;
    }
    if (!rows.empty() && !rows.back().complete) {
      throw ParseError(source, rows.back().line, "only the final line may omit the action and reward");
    }
    auto fields = split_fields(view);
    if (fields.size() != 2 && fields.size() != 4) {
      throw ParseError(source, lineno, fmt::format("expected 4 fields (or 2 on the final line), got {}", fields.size()));
    }
    std::size_t t = 0;
    auto [ptr, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), t);
    if (ec != std::errc() || ptr != fields[0].data() + fields[0].size()) {
      throw ParseError(source, lineno, fmt::format("bad time index '{}'", fields[0]));
    }
    if (t != rows.size() + 1) {
      throw ParseError(source, lineno, fmt::format("expected t={}, got {}", rows.size() + 1, t));
    }
    if (fields[1].empty()) throw ParseError(source, lineno, "missing observation");
    RawRow row{lineno, fields[1], "", "", false};
    if (fields.size() == 4) {
      const bool has_a = !fields[2].empty();
      const bool has_r = !fields[3].empty();
      if (has_a != has_r) throw ParseError(source, lineno, "action and reward must both be present or both empty");
      row.a = fields[2];
      row.r = fields[3];
      row.complete = has_a;
    }
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw ParseError(source, 0, "empty trace (missing header)");
  return rows;
}

History build(const std::vector<RawRow>& rows, std::shared_ptr<const Alphabets> alphabets, const std::string& source) {
  History h(alphabets);
  // A complete last row has no following observation; its action and reward
  // cannot be attached to a cycle, so it is rejected.
  if (!rows.empty() && rows.back().complete) {
    throw ParseError(source, rows.back().line, "trace must end with the trailing observation line 't,o'");
  }
  auto lookup = [&](const Alphabet& alpha, const std::string& label, std::size_t line, const char* what) {
    if (!alpha.contains(label)) throw ParseError(source, line, fmt::format("unknown {} label '{}'", what, label));
    return alpha.index(label);
  };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const Symbol o = lookup(alphabets->observations, row.o, row.line, "observation");
    if (i == 0) {
      h.extend_first(o);
    } else {
      const auto& prev = rows[i - 1];
      h.extend(lookup(alphabets->actions, prev.a, prev.line, "action"),
               lookup(alphabets->rewards, prev.r, prev.line, "reward"), o);
    }
  }
  return h;
}

}  // namespace

void write_trace(std::ostream& out, const History& h) {
  const auto& ab = h.alphabets();
  out << "t,o,a,r\n";
  for (std::size_t i = 0; i < h.size(); ++i) {
    out << (i + 1) << ',' << ab.observations.label(h.observation(i));
    if (i < h.transitions()) {
      out << ',' << ab.actions.label(h.action(i)) << ',' << ab.rewards.label(h.reward(i));
    }
    out << '\n';
  }
}

std::string trace_to_string(const History& h) {
  std::ostringstream os;
  write_trace(os, h);
  return os.str();
}

History read_trace(std::istream& in, const std::string& source) {
  auto rows = read_rows(in, source);
  if (rows.empty()) throw ParseError(source, 0, "trace has no observations");
  std::vector<std::string> obs, act, rew;
  for (const auto& row : rows) {
    obs.push_back(row.o);
    if (row.complete) {
      act.push_back(row.a);
      rew.push_back(row.r);
    }
  }
  auto alphabets = std::make_shared<Alphabets>();
  try {
    alphabets->observations = Alphabet(canonical_label_order(obs));
    // Single-observation traces have no actions or rewards; a placeholder
    // symbol keeps both alphabets non-empty.
    alphabets->actions = Alphabet(act.empty() ? std::vector<std::string>{"0"} : canonical_label_order(act));
    alphabets->rewards = RewardAlphabet(rew.empty() ? std::vector<std::string>{"0"} : canonical_label_order(rew));
  } catch (const std::invalid_argument& e) {
    throw ParseError(source, 0, e.what());
  }
  return build(rows, std::move(alphabets), source);
}

History read_trace(std::istream& in, std::shared_ptr<const Alphabets> alphabets, const std::string& source) {
  return build(read_rows(in, source), std::move(alphabets), source);
}

History load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open trace file '{}'", path));
  return read_trace(in, path);
}

}  // namespace phimdp

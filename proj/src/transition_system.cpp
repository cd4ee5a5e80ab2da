#include "sysgraph/transition_system.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "sysgraph/diagnostics.hpp"

namespace sysgraph {

std::string GlobalState::key() const {
  std::string out;
  for (std::size_t i = 0; i < declarators.size(); ++i) {
    if (i) out += '|';
    out += declarators[i];
  }
  out += ';';
  bool first = true;
  for (const auto& [k, v] : merged) {
    if (!first) out += ',';
    first = false;
    out += k + "=" + v.str();
  }
  out += ';';
  first = true;
  for (const auto& [c, q] : channels) {
    if (!first) out += ',';
    first = false;
    out += c + "=[";
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (i) out += ',';
      out += q[i].str();
    }
    out += ']';
  }
  return out;
}

std::size_t TransitionSystem::add_state(TsState s) {
  auto [it, fresh] = index_.emplace(s.key, states.size());
  if (!fresh) return it->second;
  for (const auto& l : s.labels) atomic_propositions.insert(l);
  states.push_back(std::move(s));
  out_.emplace_back();
  return states.size() - 1;
}

void TransitionSystem::add_transition(std::size_t src, std::string action, std::size_t dst) {
  if (out_.size() < states.size()) out_.resize(states.size());
  for (auto i : out_[src])
    if (transitions[i].target == dst && transitions[i].action == action) return;
  out_[src].push_back(transitions.size());
  transitions.push_back({src, std::move(action), dst});
}

std::optional<std::size_t> TransitionSystem::find(const std::string& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::vector<std::size_t>& TransitionSystem::outgoing(std::size_t state) const {
  static const std::vector<std::size_t> none;
  return state < out_.size() ? out_[state] : none;
}

bool TransitionSystem::is_initial(std::size_t state) const {
  return std::find(initials.begin(), initials.end(), state) != initials.end();
}

std::set<std::string> TransitionSystem::actions() const {
  std::set<std::string> out;
  for (const auto& t : transitions) out.insert(t.action);
  return out;
}

std::string action_match_key(const std::string& action) {
  auto pos = action.find_first_of("!?");
  return pos == std::string::npos ? action : action.substr(0, pos + 1);
}

void write_ts(std::ostream& os, const TransitionSystem& ts) {
  os << "ts v1\n";
  if (!ts.atomic_propositions.empty()) {
    os << "ap";
    for (const auto& p : ts.atomic_propositions) os << ' ' << p;
    os << '\n';
  }
  for (std::size_t i = 0; i < ts.states.size(); ++i) {
    os << "state " << i << ' ' << ts.states[i].key;
    for (const auto& l : ts.states[i].labels) os << ' ' << l;
    os << '\n';
  }
  for (auto i : ts.initials) os << "init " << i << '\n';
  for (const auto& t : ts.transitions) os << "trans " << t.source << ' ' << t.action << ' ' << t.target << '\n';
  if (ts.truncated) os << "truncated\n";
}

std::string write_ts(const TransitionSystem& ts) {
  std::ostringstream os;
  write_ts(os, ts);
  return os.str();
}

namespace {

[[noreturn]] void bad_line(std::size_t line, const std::string& msg) {
  throw ModelError({{Severity::error, {line, 1, 0}, "syntax", msg}});
}

}  // namespace

TransitionSystem read_ts(std::istream& is) {
  TransitionSystem ts;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  std::set<std::string> declared_ap;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word) || word[0] == '#') continue;
    if (!header) {
      std::string version;
      if (word != "ts" || !(ls >> version) || version != "v1") bad_line(lineno, "expected header 'ts v1'");
      header = true;
      continue;
    }
    if (word == "ap") {
      std::string p;
      while (ls >> p) declared_ap.insert(p);
    } else if (word == "state") {
      std::size_t id;
      TsState s;
      if (!(ls >> id >> s.key)) bad_line(lineno, "expected 'state <id> <key> <labels...>'");
      if (id != ts.states.size()) bad_line(lineno, "state ids must be consecutive from 0");
      std::string l;
      while (ls >> l) s.labels.insert(l);
      if (ts.find(s.key)) bad_line(lineno, "duplicate state key '" + s.key + "'");
      ts.add_state(std::move(s));
    } else if (word == "init") {
      std::size_t id;
      if (!(ls >> id) || id >= ts.states.size()) bad_line(lineno, "expected 'init <id>' of a declared state");
      ts.initials.push_back(id);
    } else if (word == "trans") {
      std::size_t src, dst;
      std::string action;
      if (!(ls >> src >> action >> dst) || src >= ts.states.size() || dst >= ts.states.size())
        bad_line(lineno, "expected 'trans <src> <action> <dst>' over declared states");
      ts.add_transition(src, action, dst);
    } else if (word == "truncated") {
      ts.truncated = true;
    } else {
      bad_line(lineno, "unknown record '" + word + "'");
    }
  }
  if (!header) bad_line(std::max<std::size_t>(lineno, 1), "missing header 'ts v1'");
  ts.atomic_propositions.insert(declared_ap.begin(), declared_ap.end());
  return ts;
}

TransitionSystem read_ts(const std::string& text) {
  std::istringstream is(text);
  return read_ts(is);
}

}  // namespace sysgraph

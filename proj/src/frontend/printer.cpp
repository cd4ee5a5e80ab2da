#include <algorithm>
#include <sstream>

#include "sysgraph/frontend.hpp"

namespace sysgraph {

namespace {

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string pins(const Evaluation& e) {
  std::vector<std::string> parts;
  for (const auto& [k, v] : e) parts.push_back(k + "=" + v.str());
  return "{" + join(parts, ", ") + "}";
}

void print_body(std::ostream& os, const SystemGraph& g, bool sorted) {
  auto sigs = g.signatures;
  auto chans = g.channels;
  auto decls = g.declarators;
  auto trans = g.transitions;
  auto props = g.propositions;
  auto rules = g.labeling;
  auto terms = g.terminals;
  if (sorted) {
    auto by_name = [](const auto& a, const auto& b) { return a.name < b.name; };
    std::sort(sigs.begin(), sigs.end(), by_name);
    std::sort(chans.begin(), chans.end(), by_name);
    std::sort(decls.begin(), decls.end(), by_name);
    std::sort(props.begin(), props.end(), by_name);
    std::sort(trans.begin(), trans.end(), [](const Transition& a, const Transition& b) {
      return std::tie(a.source, a.target, a.action) < std::tie(b.source, b.target, b.action) ||
             (a.source == b.source && a.target == b.target && a.action == b.action && a.guard.str() < b.guard.str());
    });
    std::sort(rules.begin(), rules.end(), [](const LabelRule& a, const LabelRule& b) {
      return std::pair(a.proposition, a.when.str()) < std::pair(b.proposition, b.when.str());
    });
    std::sort(terms.begin(), terms.end());
  }

  os << "system " << g.name << " {\n";
  if (!sigs.empty()) {
    os << "  vars {\n";
    for (const auto& s : sigs) os << "    " << s.name << ": " << s.type.str() << " = " << s.default_value.str() << ";\n";
    os << "  }\n";
  }
  for (const auto& c : chans) {
    os << "  chan " << c.name << ": " << c.domain.str() << " cap " << c.capacity;
    if (!c.initial.empty()) {
      std::vector<std::string> vals;
      for (const auto& v : c.initial) vals.push_back(v.str());
      os << " = [" << join(vals, ", ") << "]";
    }
    os << ";\n";
  }
  for (const auto& d : decls) {
    os << "  state " << d.name << " " << pins(d.partial);
    if (d.name == g.initial) {
      os << " init";
      if (!g.initial_guard.is_true()) os << " when " << g.initial_guard.str();
    }
    os << ";\n";
  }
  for (const auto& t : trans) os << "  trans " << t.str() << ";\n";
  for (const auto& p : props) os << "  prop " << p.name << " := " << p.formula.str() << ";\n";
  for (const auto& r : rules) os << "  label when " << r.when.str() << " => " << r.proposition << ";\n";
  if (!terms.empty()) os << "  terminal " << join(terms, ", ") << ";\n";
  if (g.refinable) os << "  refinable;\n";
  os << "}\n";
}

}  // namespace

std::string print_graph(const SystemGraph& g) {
  std::ostringstream os;
  print_body(os, g, false);
  return os.str();
}

std::string canonical_text(const SystemGraph& g) {
  std::ostringstream os;
  print_body(os, g, true);
  return os.str();
}

std::string print_model(const Model& m) {
  std::ostringstream os;
  for (std::size_t i = 0; i < m.components.size(); ++i) {
    if (i) os << "\n";
    print_body(os, m.components[i], false);
  }
  bool single = m.components.size() == 1 && m.shared.empty() && m.components.front().name == m.name;
  if (!single) {
    std::vector<std::string> names;
    for (const auto& c : m.components) names.push_back(c.name);
    os << "\nparallel " << m.name << " = " << join(names, " | ");
    if (!m.shared.empty()) os << " shared { " << join(m.shared, ", ") << " }";
    os << ";\n";
  }
  return os.str();
}

}  // namespace sysgraph

#include "sysgraph/skeleton.hpp"

#include <cctype>
#include <sstream>

#include <json.hpp>

#include "sysgraph/elaboration.hpp"
#include "sysgraph/frontend.hpp"
#include "sysgraph/runtime.hpp"
#include "sysgraph/verification.hpp"

namespace sysgraph {

using json = nlohmann::json;

namespace {

std::string ident(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_') ? c : '_';
  return out;
}

std::string capitalized(const std::string& s) {
  std::string out = ident(s);
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

}  // namespace

std::vector<PropertyEvidence> verify_properties(const SystemGraph& g, const std::vector<std::string>& properties) {
  TransitionSystem ts = elaborate(g);
  std::vector<PropertyEvidence> out;
  for (const auto& p : properties) {
    Formula f = compile_property(p, g);
    out.push_back({p, check(ts, f).satisfied});
  }
  return out;
}

SkeletonBundle generate_skeleton(const SystemGraph& g, const SkeletonOptions& opts) {
  if (auto diags = validate_graph(g); has_errors(diags)) throw ModelError(diags);
  if (!opts.force) {
    if (opts.evidence.empty())
      throw ModelError("unverified", "'" + g.name + "' has no verified properties; verify it first or force generation");
    for (const auto& e : opts.evidence)
      if (!e.satisfied)
        throw ModelError("unverified", "'" + g.name + "' violates " + e.formula + "; fix it or force generation");
  }
  for (const auto& c : opts.external_channels)
    if (!g.find_channel(c)) throw ModelError("unresolved-name", "unknown external channel '" + c + "'");

  SkeletonBundle b;
  b.system = g.name;
  b.refinable = g.refinable;
  b.variables = g.signatures;
  b.declarators = g.declarators;
  b.terminals = g.terminals;
  for (std::size_t i = 0; i < g.transitions.size(); ++i) {
    const Transition& t = g.transitions[i];
    b.control_flow.push_back({i, t.source, t.guard.str(), t.action, t.target});
  }
  for (const auto& a : g.named_actions()) b.effect_hooks.push_back({a, "on_" + ident(a)});
  for (const auto& d : detect_divergences(g)) {
    std::string name = "choose_" + ident(d.declarator) + "_" + ident(g.transitions[d.first].action.str()) + "_" +
                       ident(g.transitions[d.second].action.str());
    b.divergence_interfaces.push_back({name, d.declarator, {d.first, d.second}});
  }
  for (const auto& c : g.channels) {
    SkeletonBundle::ChannelDescriptor cd;
    cd.channel = c;
    cd.external = opts.external_channels.count(c.name) > 0;
    if (cd.external) {
      cd.adapter = capitalized(c.name) + "Adapter";
    } else {
      bool sends = false, receives = false;
      for (const auto& t : g.transitions) {
        if (t.action.channel != c.name) continue;
        sends = sends || t.action.kind == Action::Kind::send;
        receives = receives || t.action.kind == Action::Kind::receive;
      }
      if (sends) cd.operations.push_back("send");
      if (receives) cd.operations.push_back("receive");
    }
    b.channels.push_back(std::move(cd));
  }
  b.entry_declarator = g.initial;
  b.entry_guard = g.initial_guard.str();
  b.propositions = g.propositions;
  b.labeling = g.labeling;
  b.verification = opts.evidence;
  b.forced = opts.force;
  return b;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json value_json(const TypedValue& v) {
  switch (v.kind()) {
    case ValueKind::boolean: return v.as_bool();
    case ValueKind::integer: return v.as_int();
    case ValueKind::symbol: return v.as_symbol();
  }
  return nullptr;
}

TypedValue value_of(const json& j, const VarType& t) {
  TypedValue v;
  switch (t.kind) {
    case ValueKind::boolean: v = TypedValue(j.get<bool>()); break;
    case ValueKind::integer: v = TypedValue(j.get<std::int64_t>()); break;
    case ValueKind::symbol: v = TypedValue::symbol(j.get<std::string>()); break;
  }
  if (!t.contains(v)) throw ModelError("syntax", "value " + j.dump() + " is not in " + t.str());
  return v;
}

json type_json(const VarType& t) {
  switch (t.kind) {
    case ValueKind::boolean: return {{"kind", "bool"}};
    case ValueKind::integer: return {{"kind", "int"}, {"lo", t.lo}, {"hi", t.hi}};
    case ValueKind::symbol: return {{"kind", "sym"}, {"values", t.enumerants}};
  }
  return nullptr;
}

VarType type_of(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "bool") return VarType::boolean();
  if (kind == "int") return VarType::integer(j.at("lo").get<std::int64_t>(), j.at("hi").get<std::int64_t>());
  if (kind == "sym") return VarType::symbol(j.at("values").get<std::vector<std::string>>());
  throw ModelError("syntax", "unknown type kind '" + kind + "'");
}

json action_json(const Action& a) {
  switch (a.kind) {
    case Action::Kind::named: return {{"kind", "named"}, {"name", a.name}};
    case Action::Kind::send: {
      json msg = a.message.is_var() ? json{{"var", a.message.var}} : json{{"value", value_json(a.message.literal)}};
      return {{"kind", "send"}, {"channel", a.channel}, {"message", msg}};
    }
    case Action::Kind::receive: return {{"kind", "receive"}, {"channel", a.channel}, {"target", a.target}};
  }
  return nullptr;
}

json evaluation_json(const Evaluation& e) {
  json out = json::object();
  for (const auto& [k, v] : e) out[k] = value_json(v);
  return out;
}

}  // namespace

std::string render_bundle_json(const SkeletonBundle& b) {
  json doc;
  doc["schema_version"] = b.schema_version;
  doc["system"] = b.system;
  doc["refinable"] = b.refinable;

  json vars = json::array();
  for (const auto& v : b.variables)
    vars.push_back({{"name", v.name}, {"type", type_json(v.type)}, {"default", value_json(v.default_value)}, {"immutable", true}});
  doc["variables"] = vars;

  json decls = json::array();
  for (const auto& d : b.declarators) decls.push_back({{"name", d.name}, {"pins", evaluation_json(d.partial)}});
  doc["declarators"] = decls;
  doc["terminals"] = b.terminals;

  json rows = json::array();
  for (const auto& r : b.control_flow)
    rows.push_back({{"index", r.index},
                    {"source", r.source},
                    {"guard", r.guard},
                    {"action", action_json(r.action)},
                    {"label", r.action.str()},
                    {"target", r.target},
                    {"immutable", true}});
  doc["control_flow"] = rows;

  json hooks = json::array();
  for (const auto& h : b.effect_hooks) hooks.push_back({{"action", h.action}, {"hook", h.name}, {"overridable", true}});
  doc["effect_hooks"] = hooks;

  json divs = json::array();
  for (const auto& d : b.divergence_interfaces) {
    json alts = json::array();
    for (auto e : d.edges) {
      const auto& r = b.control_flow.at(e);
      alts.push_back({{"row", e}, {"action", r.action.str()}, {"target", r.target}});
    }
    divs.push_back({{"name", d.name}, {"declarator", d.declarator}, {"alternatives", alts}});
  }
  doc["divergence_interfaces"] = divs;

  json chans = json::array();
  for (const auto& c : b.channels) {
    json initial = json::array();
    for (const auto& v : c.channel.initial) initial.push_back(value_json(v));
    json cj = {{"name", c.channel.name},
               {"domain", type_json(c.channel.domain)},
               {"capacity", c.channel.capacity},
               {"synchronous", c.channel.synchronous()},
               {"initial", initial},
               {"mode", c.external ? "external" : "internal"}};
    if (c.external)
      cj["adapter"] = {{"interface", c.adapter}, {"domain", type_json(c.channel.domain)}, {"capacity", c.channel.capacity}};
    else
      cj["operations"] = c.operations;
    chans.push_back(cj);
  }
  doc["channel_descriptors"] = chans;

  doc["entry_point"] = {{"declarator", b.entry_declarator}, {"guard", b.entry_guard}};

  json props = json::array();
  for (const auto& p : b.propositions) props.push_back({{"name", p.name}, {"formula", p.formula.str()}});
  doc["propositions"] = props;
  json rules = json::array();
  for (const auto& r : b.labeling) rules.push_back({{"when", r.when.str()}, {"proposition", r.proposition}});
  doc["labeling"] = rules;

  json evidence = json::array();
  for (const auto& e : b.verification) evidence.push_back({{"formula", e.formula}, {"satisfied", e.satisfied}});
  doc["verification"] = {{"forced", b.forced}, {"properties", evidence}};

  return doc.dump(2) + "\n";
}

SkeletonBundle read_bundle_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ModelError("syntax", std::string("bundle is not valid JSON: ") + e.what());
  }
  try {
    SkeletonBundle b;
    b.schema_version = doc.at("schema_version").get<int>();
    if (b.schema_version != SkeletonBundle::kSchemaVersion)
      throw ModelError("schema", "unsupported bundle schema version " + std::to_string(b.schema_version));
    b.system = doc.at("system").get<std::string>();
    b.refinable = doc.at("refinable").get<bool>();
    std::map<std::string, VarType> types;
    for (const auto& v : doc.at("variables")) {
      VarSignature s;
      s.name = v.at("name").get<std::string>();
      s.type = type_of(v.at("type"));
      s.default_value = value_of(v.at("default"), s.type);
      types[s.name] = s.type;
      b.variables.push_back(std::move(s));
    }
    for (const auto& d : doc.at("declarators")) {
      StateDeclarator sd;
      sd.name = d.at("name").get<std::string>();
      for (const auto& [k, v] : d.at("pins").items()) {
        auto t = types.find(k);
        if (t == types.end()) throw ModelError("syntax", "pin on unknown variable '" + k + "'");
        sd.partial.set(k, value_of(v, t->second));
      }
      b.declarators.push_back(std::move(sd));
    }
    b.terminals = doc.at("terminals").get<std::vector<std::string>>();

    for (const auto& c : doc.at("channel_descriptors")) {
      SkeletonBundle::ChannelDescriptor cd;
      cd.channel.name = c.at("name").get<std::string>();
      cd.channel.domain = type_of(c.at("domain"));
      cd.channel.capacity = c.at("capacity").get<std::size_t>();
      for (const auto& v : c.at("initial")) cd.channel.initial.push_back(value_of(v, cd.channel.domain));
      cd.external = c.at("mode").get<std::string>() == "external";
      if (cd.external)
        cd.adapter = c.at("adapter").at("interface").get<std::string>();
      else
        cd.operations = c.at("operations").get<std::vector<std::string>>();
      b.channels.push_back(std::move(cd));
    }
    auto domain_of = [&](const std::string& ch) -> const VarType& {
      for (const auto& c : b.channels)
        if (c.channel.name == ch) return c.channel.domain;
      throw ModelError("syntax", "action on unknown channel '" + ch + "'");
    };

    for (const auto& r : doc.at("control_flow")) {
      SkeletonBundle::Row row;
      row.index = r.at("index").get<std::size_t>();
      row.source = r.at("source").get<std::string>();
      row.guard = r.at("guard").get<std::string>();
      row.target = r.at("target").get<std::string>();
      const json& a = r.at("action");
      const std::string kind = a.at("kind").get<std::string>();
      if (kind == "named") {
        row.action = Action::named_action(a.at("name").get<std::string>());
      } else if (kind == "send") {
        std::string ch = a.at("channel").get<std::string>();
        const json& m = a.at("message");
        Operand msg = m.contains("var") ? Operand::variable(m.at("var").get<std::string>())
                                        : Operand::value(value_of(m.at("value"), domain_of(ch)));
        row.action = Action::send(ch, msg);
      } else if (kind == "receive") {
        row.action = Action::receive(a.at("channel").get<std::string>(), a.at("target").get<std::string>());
      } else {
        throw ModelError("syntax", "unknown action kind '" + kind + "'");
      }
      if (row.index != b.control_flow.size()) throw ModelError("syntax", "control-flow rows must be numbered from 0");
      b.control_flow.push_back(std::move(row));
    }
    for (const auto& h : doc.at("effect_hooks"))
      b.effect_hooks.push_back({h.at("action").get<std::string>(), h.at("hook").get<std::string>()});
    for (const auto& d : doc.at("divergence_interfaces")) {
      SkeletonBundle::DivergenceInterface di;
      di.name = d.at("name").get<std::string>();
      di.declarator = d.at("declarator").get<std::string>();
      for (const auto& a : d.at("alternatives")) di.edges.push_back(a.at("row").get<std::size_t>());
      b.divergence_interfaces.push_back(std::move(di));
    }
    b.entry_declarator = doc.at("entry_point").at("declarator").get<std::string>();
    b.entry_guard = doc.at("entry_point").at("guard").get<std::string>();

    // Guards are kept as text here and parsed against the variables on
    // reconstruction.
    SystemGraph scratch;
    scratch.signatures = b.variables;
    for (const auto& p : doc.at("propositions"))
      b.propositions.push_back({p.at("name").get<std::string>(), parse_guard(p.at("formula").get<std::string>(), scratch), {}});
    for (const auto& r : doc.at("labeling"))
      b.labeling.push_back({parse_guard(r.at("when").get<std::string>(), scratch), r.at("proposition").get<std::string>(), {}});
    const json& v = doc.at("verification");
    b.forced = v.at("forced").get<bool>();
    for (const auto& e : v.at("properties"))
      b.verification.push_back({e.at("formula").get<std::string>(), e.at("satisfied").get<bool>()});
    return b;
  } catch (const json::exception& e) {
    throw ModelError("syntax", std::string("malformed bundle: ") + e.what());
  }
}

SystemGraph bundle_to_graph(const SkeletonBundle& b) {
  SystemGraph g;
  g.name = b.system;
  g.refinable = b.refinable;
  g.signatures = b.variables;
  for (const auto& c : b.channels) g.channels.push_back(c.channel);
  g.declarators = b.declarators;
  for (const auto& r : b.control_flow) g.transitions.push_back({r.source, parse_guard(r.guard, g), r.action, r.target, {}});
  g.initial = b.entry_declarator;
  g.initial_guard = parse_guard(b.entry_guard, g);
  g.terminals = b.terminals;
  g.propositions = b.propositions;
  g.labeling = b.labeling;
  if (auto diags = validate_graph(g); has_errors(diags)) throw ModelError(diags);
  return g;
}

// ---------------------------------------------------------------------------
// Reference text

std::string render_reference_text(const SkeletonBundle& b) {
  const std::string cls = capitalized(b.system);
  std::ostringstream os;
  os << "// Skeleton of " << b.system << ". State variables and control flow are final;\n"
     << "// effects and divergence signals are the only extension points.\n\n";

  os << "abstract class System {\n"
     << "  final state: Evaluation\n"
     << "  final declarator: Declarator\n"
     << "  abstract controlFlow(): Transition[]\n"
     << "  final run(effects, signals, channels)   // provided by the runtime\n"
     << "}\n\n";

  os << "interface " << cls << "Effects {\n";
  for (const auto& h : b.effect_hooks) os << "  " << h.name << "(snapshot: readonly Evaluation): void   // default: no-op\n";
  os << "}\n\n";

  if (!b.divergence_interfaces.empty()) {
    os << "interface " << cls << "Signals {\n";
    for (const auto& d : b.divergence_interfaces) {
      os << "  " << d.name << "(snapshot: readonly Evaluation): ";
      for (std::size_t i = 0; i < d.edges.size(); ++i)
        os << (i ? " | " : "") << '"' << b.control_flow.at(d.edges[i]).action.str() << '"';
      os << "   // at " << d.declarator << "\n";
    }
    os << "}\n\n";
  }

  for (const auto& c : b.channels) {
    if (!c.external) continue;
    os << "interface " << c.adapter << " {   // external channel " << c.channel.name << ", capacity "
       << c.channel.capacity << "\n"
       << "  poll(): " << c.channel.domain.str() << " | none\n"
       << "}\n\n";
  }

  os << "final class " << cls << " extends System {\n";
  for (const auto& v : b.variables)
    os << "  final var " << v.name << ": " << v.type.str() << " = " << v.default_value.str() << "\n";
  for (const auto& c : b.channels) {
    os << "  final chan " << c.channel.name << ": " << c.channel.domain.str() << " capacity " << c.channel.capacity;
    if (c.external)
      os << " via " << c.adapter;
    else {
      os << " internal {";
      for (std::size_t i = 0; i < c.operations.size(); ++i) os << (i ? ", " : "") << c.operations[i];
      os << "}";
    }
    os << "\n";
  }
  os << "\n  entry " << b.entry_declarator << " when " << b.entry_guard << "\n";
  if (!b.terminals.empty()) {
    os << "  terminal ";
    for (std::size_t i = 0; i < b.terminals.size(); ++i) os << (i ? ", " : "") << b.terminals[i];
    os << "\n";
  }
  os << "\n  final controlFlow() = [\n";
  for (const auto& r : b.control_flow) {
    os << "    " << r.index << ": " << r.source << " -> " << r.target << " when " << r.guard << " on " << r.action.str();
    if (r.action.kind == Action::Kind::named) os << "  => effects.on_" << ident(r.action.name);
    os << "\n";
  }
  os << "  ]\n}\n";
  return os.str();
}

}  // namespace sysgraph

#include "sysgraph/value.hpp"

#include <algorithm>
#include <set>

namespace sysgraph {

std::string to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::boolean: return "bool";
    case ValueKind::integer: return "int";
    case ValueKind::symbol: return "sym";
  }
  return "?";
}

ValueKind TypedValue::kind() const {
  switch (v_.index()) {
    case 0: return ValueKind::boolean;
    case 1: return ValueKind::integer;
    default: return ValueKind::symbol;
  }
}

std::string TypedValue::str() const {
  switch (kind()) {
    case ValueKind::boolean: return as_bool() ? "true" : "false";
    case ValueKind::integer: return std::to_string(as_int());
    case ValueKind::symbol: return as_symbol();
  }
  return {};
}

bool VarType::contains(const TypedValue& v) const {
  if (v.kind() != kind) return false;
  switch (kind) {
    case ValueKind::boolean: return true;
    case ValueKind::integer: return v.as_int() >= lo && v.as_int() <= hi;
    case ValueKind::symbol:
      return std::find(enumerants.begin(), enumerants.end(), v.as_symbol()) != enumerants.end();
  }
  return false;
}

bool VarType::includes(const VarType& other) const {
  if (other.kind != kind) return false;
  switch (kind) {
    case ValueKind::boolean: return true;
    case ValueKind::integer: return other.lo >= lo && other.hi <= hi;
    case ValueKind::symbol:
      return std::all_of(other.enumerants.begin(), other.enumerants.end(), [&](const auto& e) {
        return std::find(enumerants.begin(), enumerants.end(), e) != enumerants.end();
      });
  }
  return false;
}

std::vector<TypedValue> VarType::values() const {
  std::vector<TypedValue> out;
  switch (kind) {
    case ValueKind::boolean:
      out = {TypedValue(false), TypedValue(true)};
      break;
    case ValueKind::integer:
      for (std::int64_t i = lo; i <= hi; ++i) out.emplace_back(i);
      break;
    case ValueKind::symbol:
      for (const auto& e : enumerants) out.push_back(TypedValue::symbol(e));
      break;
  }
  return out;
}

std::size_t VarType::size() const {
  switch (kind) {
    case ValueKind::boolean: return 2;
    case ValueKind::integer: return hi >= lo ? static_cast<std::size_t>(hi - lo + 1) : 0;
    case ValueKind::symbol: return enumerants.size();
  }
  return 0;
}

TypedValue VarType::default_value() const {
  switch (kind) {
    case ValueKind::boolean: return TypedValue(false);
    case ValueKind::integer: return TypedValue(std::clamp<std::int64_t>(0, lo, hi));
    case ValueKind::symbol:
      return enumerants.empty() ? TypedValue::symbol("") : TypedValue::symbol(enumerants.front());
  }
  return {};
}

std::string VarType::str() const {
  switch (kind) {
    case ValueKind::boolean: return "bool";
    case ValueKind::integer: return "int[" + std::to_string(lo) + ".." + std::to_string(hi) + "]";
    case ValueKind::symbol: {
      std::string s = "sym{";
      for (std::size_t i = 0; i < enumerants.size(); ++i) {
        if (i) s += ", ";
        s += enumerants[i];
      }
      return s + "}";
    }
  }
  return {};
}

const TypedValue& Evaluation::at(const std::string& var) const {
  auto it = bindings_.find(var);
  if (it == bindings_.end())
    throw EvalError(EvalError::Code::unknown_variable, "unknown variable '" + var + "'");
  return it->second;
}

std::optional<TypedValue> Evaluation::get(const std::string& var) const {
  auto it = bindings_.find(var);
  if (it == bindings_.end()) return std::nullopt;
  return it->second;
}

Evaluation Evaluation::restrict_to(const std::vector<std::string>& vars) const {
  Map out;
  for (const auto& v : vars) {
    auto it = bindings_.find(v);
    if (it != bindings_.end()) out.insert(*it);
  }
  return Evaluation(std::move(out));
}

std::string Evaluation::str() const {
  std::string s = "{";
  bool first = true;
  for (const auto& [k, v] : bindings_) {
    if (!first) s += ",";
    first = false;
    s += k + "=" + v.str();
  }
  return s + "}";
}

Evaluation eval_update(const Evaluation& base, const std::string& var, const TypedValue& value) {
  const TypedValue& old = base.at(var);
  if (old.kind() != value.kind())
    throw EvalError(EvalError::Code::kind_mismatch,
                    "kind mismatch for '" + var + "': expected " + to_string(old.kind()) +
                        ", got " + to_string(value.kind()));
  Evaluation out = base;
  out.set(var, value);
  return out;
}

Evaluation eval_merge(const std::vector<Evaluation>& parts) {
  Evaluation::Map out;
  for (const auto& p : parts) {
    for (const auto& [k, v] : p) {
      if (!out.emplace(k, v).second)
        throw EvalError(EvalError::Code::overlap, "overlapping domains on '" + k + "'");
    }
  }
  return Evaluation(std::move(out));
}

Evaluation eval_override(const Evaluation& base, const Evaluation& partial) {
  Evaluation out = base;
  for (const auto& [k, v] : partial) {
    const TypedValue& old = base.at(k);
    if (old.kind() != v.kind())
      throw EvalError(EvalError::Code::kind_mismatch, "kind mismatch for '" + k + "'");
    out.set(k, v);
  }
  return out;
}

std::vector<Evaluation> enumerate_evaluations(const std::vector<VarSignature>& sigs) {
  std::vector<Evaluation> out{Evaluation{}};
  for (const auto& sig : sigs) {
    std::vector<Evaluation> next;
    const auto vals = sig.type.values();
    next.reserve(out.size() * vals.size());
    for (const auto& e : out) {
      for (const auto& v : vals) {
        Evaluation x = e;
        x.set(sig.name, v);
        next.push_back(std::move(x));
      }
    }
    out = std::move(next);
  }
  return out;
}

Evaluation default_evaluation(const std::vector<VarSignature>& sigs) {
  Evaluation e;
  for (const auto& s : sigs) e.set(s.name, s.default_value);
  return e;
}

}  // namespace sysgraph

#pragma once

// Typed values, variable signatures and evaluations: the state algebra every
// other module works over.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "sysgraph/diagnostics.hpp"

namespace sysgraph {

enum class ValueKind { boolean, integer, symbol };

std::string to_string(ValueKind kind);

struct Symbol {
  std::string name;
  auto operator<=>(const Symbol&) const = default;
};

// A typed value. The kind is carried by the active alternative.
class TypedValue {
 public:
  TypedValue() : v_(false) {}
  TypedValue(bool b) : v_(b) {}
  TypedValue(std::int64_t i) : v_(i) {}
  TypedValue(int i) : v_(static_cast<std::int64_t>(i)) {}
  TypedValue(Symbol s) : v_(std::move(s)) {}

  static TypedValue symbol(std::string name) { return TypedValue(Symbol{std::move(name)}); }

  ValueKind kind() const;
  bool as_bool() const { return std::get<bool>(v_); }
  std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
  const std::string& as_symbol() const { return std::get<Symbol>(v_).name; }

  std::string str() const;

  auto operator<=>(const TypedValue&) const = default;

 private:
  std::variant<bool, std::int64_t, Symbol> v_;
};

// The type of a variable or a channel domain. Always finite.
struct VarType {
  ValueKind kind = ValueKind::boolean;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::vector<std::string> enumerants;

  static VarType boolean() { return {}; }
  static VarType integer(std::int64_t lo, std::int64_t hi) { return {ValueKind::integer, lo, hi, {}}; }
  static VarType symbol(std::vector<std::string> names) {
    return {ValueKind::symbol, 0, 0, std::move(names)};
  }

  bool contains(const TypedValue& v) const;
  // true iff every value of `other` is a value of this type.
  bool includes(const VarType& other) const;
  std::vector<TypedValue> values() const;
  std::size_t size() const;
  // The ε default: false, 0 (clamped into range), or the first enumerant.
  TypedValue default_value() const;
  std::string str() const;

  bool operator==(const VarType&) const = default;
};

struct VarSignature {
  std::string name;
  VarType type;
  TypedValue default_value;
  SourceSpan span;

  bool operator==(const VarSignature& o) const {
    return name == o.name && type == o.type && default_value == o.default_value;
  }
};

class EvalError : public std::runtime_error {
 public:
  enum class Code { unknown_variable, kind_mismatch, overlap };
  EvalError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

// A (total or partial) assignment of values to named variables.
class Evaluation {
 public:
  using Map = std::map<std::string, TypedValue>;

  Evaluation() = default;
  Evaluation(std::initializer_list<Map::value_type> init) : bindings_(init) {}
  explicit Evaluation(Map m) : bindings_(std::move(m)) {}

  bool contains(const std::string& var) const { return bindings_.count(var) != 0; }
  const TypedValue& at(const std::string& var) const;
  std::optional<TypedValue> get(const std::string& var) const;
  void set(const std::string& var, TypedValue v) { bindings_[var] = std::move(v); }
  std::size_t size() const { return bindings_.size(); }
  bool empty() const { return bindings_.empty(); }
  const Map& bindings() const { return bindings_; }
  auto begin() const { return bindings_.begin(); }
  auto end() const { return bindings_.end(); }

  Evaluation restrict_to(const std::vector<std::string>& vars) const;

  // `{a=1,b=true}` with keys in sorted order; no whitespace.
  std::string str() const;

  auto operator<=>(const Evaluation&) const = default;

 private:
  Map bindings_;
};

// V[x:v]. Throws EvalError on an unknown variable or a kind mismatch.
Evaluation eval_update(const Evaluation& base, const std::string& var, const TypedValue& value);

// ⊕ over pairwise-disjoint parts.
Evaluation eval_merge(const std::vector<Evaluation>& parts);

// V[V̂]: bindings of `partial` win, everything else comes from `base`.
Evaluation eval_override(const Evaluation& base, const Evaluation& partial);

// Every total evaluation over `sigs`, in lexicographic order of the signature
// list. Intended for small signature sets.
std::vector<Evaluation> enumerate_evaluations(const std::vector<VarSignature>& sigs);

// ε-default evaluation over `sigs`.
Evaluation default_evaluation(const std::vector<VarSignature>& sigs);

}  // namespace sysgraph

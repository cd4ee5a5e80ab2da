#include <doctest.h>

#include <random>

#include "sysgraph/graph.hpp"
#include "sysgraph/guard.hpp"
#include "sysgraph/value.hpp"

using namespace sysgraph;

namespace {

Guard cmp(const std::string& var, CmpOp op, TypedValue v) {
  return Guard::compare(Operand::variable(var), op, Operand::value(std::move(v)));
}

}  // namespace

TEST_CASE("eval_update overwrites one binding") {
  Evaluation v{{"status", 0}, {"paid", false}};
  CHECK(eval_update(v, "status", 1) == Evaluation{{"status", 1}, {"paid", false}});
  Evaluation one{{"status", 1}};
  CHECK(eval_update(one, "status", 1) == one);
  CHECK_THROWS_AS(eval_update(v, "tx", 7), EvalError);
  try {
    eval_update(v, "tx", 7);
  } catch (const EvalError& e) {
    CHECK(e.code() == EvalError::Code::unknown_variable);
  }
  CHECK_THROWS_AS(eval_update(v, "status", true), EvalError);
}

TEST_CASE("eval_merge joins disjoint parts") {
  CHECK(eval_merge({{{"a", 1}}, {{"b", true}}}) == Evaluation{{"a", 1}, {"b", true}});
  CHECK(eval_merge({{{"a", 1}}, {}}) == Evaluation{{"a", 1}});
  try {
    eval_merge({{{"a", 1}}, {{"a", 2}}});
    FAIL("expected overlap");
  } catch (const EvalError& e) {
    CHECK(e.code() == EvalError::Code::overlap);
  }
}

TEST_CASE("eval_override") {
  Evaluation base{{"status", 0}, {"paid", false}};
  CHECK(eval_override(base, {{"status", 1}, {"paid", true}}) == Evaluation{{"status", 1}, {"paid", true}});
  Evaluation b2{{"status", 2}, {"paid", true}};
  CHECK(eval_override(b2, {}) == b2);
  CHECK(eval_override({{"status", 4}, {"paid", true}}, {{"status", 3}}) == Evaluation{{"status", 3}, {"paid", true}});
  CHECK_THROWS_AS(eval_override(base, {{"gas", 1}}), EvalError);
}

TEST_CASE("guard_sat") {
  CHECK(guard_sat({{"status", 1}}, cmp("status", CmpOp::eq, 1)));
  CHECK(guard_sat({{"status", 1}}, Guard::truth()));
  Guard g = Guard::any_of({cmp("status", CmpOp::lt, 2), Guard::negate(cmp("paid", CmpOp::eq, true))});
  CHECK_FALSE(guard_sat({{"status", 2}, {"paid", true}}, g));
  CHECK_THROWS_AS(guard_sat({}, cmp("x", CmpOp::eq, 1)), EvalError);
}

TEST_CASE("atoms of the CNF") {
  auto s1 = cmp("status", CmpOp::eq, 1);
  auto p = cmp("paid", CmpOp::eq, true);
  CHECK(atoms(s1) == std::set<Comparison>{s1.comparison()});
  CHECK(atoms(Guard::all_of({s1, p})) == std::set<Comparison>{s1.comparison(), p.comparison()});
  auto neg = Guard::negate(Guard::any_of({s1, p}));
  CHECK(atoms(neg) == std::set<Comparison>{s1.comparison(), p.comparison()});
  Cnf c = to_cnf(neg);
  REQUIRE(c.clauses.size() == 2);
  for (const auto& cl : c.clauses) {
    REQUIRE(cl.size() == 1);
    CHECK_FALSE(cl.front().positive);
  }
}

TEST_CASE("default and enumerated evaluations") {
  std::vector<VarSignature> sigs{{"b", VarType::boolean(), false, {}},
                                 {"n", VarType::integer(2, 4), 2, {}},
                                 {"s", VarType::symbol({"x", "y"}), TypedValue::symbol("x"), {}}};
  CHECK(VarType::integer(2, 4).default_value() == TypedValue(2));
  CHECK(VarType::integer(-3, -1).default_value() == TypedValue(-1));
  CHECK(VarType::symbol({"x", "y"}).default_value() == TypedValue::symbol("x"));
  auto all = enumerate_evaluations(sigs);
  CHECK(all.size() == 12);
  CHECK(std::set<Evaluation>(all.begin(), all.end()).size() == 12);
  CHECK(default_evaluation(sigs) == Evaluation{{"b", false}, {"n", 2}, {"s", TypedValue::symbol("x")}});
}

namespace {

Guard random_guard(std::mt19937& rng, int depth, const std::vector<std::string>& ints,
                   const std::vector<std::string>& bools) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 6);
  switch (pick(rng)) {
    case 0: {
      std::uniform_int_distribution<std::size_t> v(0, ints.size() - 1);
      std::uniform_int_distribution<int> op(0, 5), k(0, 3);
      return cmp(ints[v(rng)], static_cast<CmpOp>(op(rng)), k(rng));
    }
    case 1: {
      std::uniform_int_distribution<std::size_t> v(0, bools.size() - 1);
      std::uniform_int_distribution<int> k(0, 1);
      return cmp(bools[v(rng)], k(rng) ? CmpOp::eq : CmpOp::ne, k(rng) == 1);
    }
    case 2: return Guard::negate(random_guard(rng, depth - 1, ints, bools));
    case 3:
      return Guard::all_of({random_guard(rng, depth - 1, ints, bools), random_guard(rng, depth - 1, ints, bools)});
    case 4:
      return Guard::any_of({random_guard(rng, depth - 1, ints, bools), random_guard(rng, depth - 1, ints, bools)});
    case 5: return Guard::implies(random_guard(rng, depth - 1, ints, bools), random_guard(rng, depth - 1, ints, bools));
    default: return std::uniform_int_distribution<int>(0, 1)(rng) ? Guard::truth() : Guard::falsity();
  }
}

}  // namespace

TEST_CASE("guard_sat agrees with the CNF on every evaluation") {
  std::vector<VarSignature> sigs;
  for (const char* n : {"a", "b", "c", "d", "e", "f"}) sigs.push_back({n, VarType::boolean(), false, {}});
  sigs.push_back({"i", VarType::integer(0, 3), 0, {}});
  sigs.push_back({"j", VarType::integer(0, 3), 0, {}});
  auto all = enumerate_evaluations(sigs);
  REQUIRE(all.size() == 1024);
  std::mt19937 rng(17);
  for (int round = 0; round < 60; ++round) {
    Guard g = random_guard(rng, 4, {"i", "j"}, {"a", "b", "c", "d", "e", "f"});
    Cnf c = to_cnf(g);
    Guard back = from_cnf(c);
    for (const auto& v : all) {
      bool expect = guard_sat(v, g);
      REQUIRE(cnf_sat(v, c) == expect);
      REQUIRE(guard_sat(v, back) == expect);
    }
  }
}

TEST_CASE("merge is associative and commutative; override identities") {
  Evaluation a{{"a", 1}}, b{{"b", true}}, c{{"c", TypedValue::symbol("k")}};
  CHECK(eval_merge({eval_merge({a, b}), c}) == eval_merge({a, eval_merge({b, c})}));
  CHECK(eval_merge({a, b, c}) == eval_merge({c, a, b}));
  Evaluation full{{"a", 2}, {"b", false}};
  Evaluation base{{"a", 1}, {"b", true}};
  CHECK(eval_override(base, full) == full);
  CHECK(eval_override(base, base.restrict_to({})) == base);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "mixcheck/expr.hpp"
#include "mixcheck/sampling.hpp"

using namespace mixcheck;
using namespace mixcheck::expr;

namespace {

double eval_ok(const ExprAst& a, double x, double y) {
  EvalResult r = evaluate(a, x, y);
  REQUIRE(r.ok());
  return r.value;
}

ExprAst parse_ok(const std::string& s) {
  ParseResult r = parse(s);
  INFO("source: ", s, " error: ", r.error.message, " at ", r.error.position);
  REQUIRE(r.ok());
  return *r.ast;
}

}  // namespace

TEST_CASE("x*y parses to a product of the two variables") {
  ExprAst a = parse_ok("x*y");
  const auto* bin = std::get_if<Node::Binary>(&a.root().data);
  REQUIRE(bin != nullptr);
  CHECK(bin->op == BinaryOp::mul);
  CHECK(std::get<Node::Var>(bin->lhs->data).name == 'x');
  CHECK(std::get<Node::Var>(bin->rhs->data).name == 'y');
}

TEST_CASE("rational counterexample expression has a division at the root") {
  ExprAst a = parse_ok("x*y*(x^2-y^2)/(x^2+y^2)");
  const auto* bin = std::get_if<Node::Binary>(&a.root().data);
  REQUIRE(bin != nullptr);
  CHECK(bin->op == BinaryOp::div);
}

TEST_CASE("malformed input reports the offending byte offset") {
  ParseResult r = parse("x*+y");
  REQUIRE(!r.ok());
  CHECK(r.error.position == 2);

  r = parse("(x+y");
  REQUIRE(!r.ok());
  CHECK(r.error.position == 4);  // at end of input, missing ')'

  r = parse("x + z");
  REQUIRE(!r.ok());
  CHECK(r.error.position == 4);
  CHECK(r.error.message.find("z") != std::string::npos);

  r = parse("x $ y");
  REQUIRE(!r.ok());
  CHECK(r.error.position == 2);

  // error position always lies within the source
  for (const char* bad : {"", ")", "min(x y)", "1..2", "if x then 1", "x <"}) {
    ParseResult b = parse(bad);
    if (!b.ok()) CHECK(b.error.position <= std::string(bad).size());
  }
}

TEST_CASE("arithmetic evaluation") {
  CHECK(eval_ok(parse_ok("x^2+y"), 2, 3) == 7);
  CHECK(eval_ok(parse_ok("1+2*3"), 0, 0) == 7);
  CHECK(eval_ok(parse_ok("2^3^2"), 0, 0) == 512);   // right-assoc
  CHECK(eval_ok(parse_ok("-2^2"), 0, 0) == -4);     // pow binds tighter than neg
  CHECK(eval_ok(parse_ok("2^-1"), 0, 0) == 0.5);
  CHECK(eval_ok(parse_ok("min(x, y) + max(x, y)"), 2, 5) == 7);
  CHECK(eval_ok(parse_ok("sign(-3) + sign(0) + sign(2)"), 0, 0) == 0);
  CHECK(eval_ok(parse_ok("abs(x - y)"), 1, 4) == 3);
}

TEST_CASE("comparisons and conditionals") {
  CHECK(eval_ok(parse_ok("1 < 2"), 0, 0) == 1);
  CHECK(eval_ok(parse_ok("2 <= 1"), 0, 0) == 0);
  CHECK(eval_ok(parse_ok("3 > 2"), 0, 0) == 1);
  CHECK(eval_ok(parse_ok("x == 0"), 0, 0) == 1);
  CHECK(eval_ok(parse_ok("if 1 < 2 then 3 else 4"), 0, 0) == 3);
  CHECK(eval_ok(parse_ok("if x == 0 and y == 0 then 5 else 6"), 0, 0) == 5);
  CHECK(eval_ok(parse_ok("if x == 0 and y == 0 then 5 else 6"), 1, 0) == 6);
  CHECK(eval_ok(parse_ok("if x == 0 or y == 0 then 5 else 6"), 1, 0) == 5);
}

TEST_CASE("guarded singularity: the untaken branch never evaluates") {
  ExprAst guarded =
      parse_ok("if x == 0 and y == 0 then 0 else x*y*(x^2-y^2)/(x^2+y^2)");
  CHECK(eval_ok(guarded, 0, 0) == 0);
  CHECK(eval_ok(guarded, 1, 1) == 0);  // (1-1)/(1+1)
  // conjunction short-circuits too
  ExprAst div_in_guard = parse_ok("if x == 0 and 1/x < 1 then 1 else 2");
  CHECK(evaluate(div_in_guard, 0, 0).fault == EvalFault::div_by_zero);
  CHECK(eval_ok(div_in_guard, 2, 0) == 2);  // x==0 false, 1/x never runs
}

TEST_CASE("evaluation faults are values") {
  CHECK(evaluate(parse_ok("1/x"), 0, 0).fault == EvalFault::div_by_zero);
  CHECK(evaluate(parse_ok("log(x)"), -1, 0).fault == EvalFault::log_domain);
  CHECK(evaluate(parse_ok("log(x)"), 0, 0).fault == EvalFault::log_domain);
  CHECK(evaluate(parse_ok("sqrt(x)"), -4, 0).fault == EvalFault::sqrt_domain);
  CHECK(evaluate(parse_ok("x^0.5"), -1, 0).fault == EvalFault::pow_domain);
  CHECK(evaluate(parse_ok("x^-1"), 0, 0).fault == EvalFault::div_by_zero);
  CHECK(evaluate(parse_ok("exp(x)"), 1e9, 0).fault == EvalFault::not_finite);
  CHECK(evaluate(parse_ok("x^0.5"), 4, 0).value == 2.0);
}

TEST_CASE("evaluation is deterministic") {
  ExprAst a = parse_ok("sin(x)*exp(y) + x^3/(y+2) - sqrt(abs(x*y))");
  for (double x : {-1.3, 0.0, 0.7, 2.0}) {
    for (double y : {-0.9, 0.1, 1.5}) {
      EvalResult r1 = evaluate(a, x, y);
      EvalResult r2 = evaluate(a, x, y);
      REQUIRE(r1.ok());
      CHECK(std::memcmp(&r1.value, &r2.value, sizeof(double)) == 0);
    }
  }
}

TEST_CASE("pretty printing fixed forms") {
  CHECK(pretty_print(ExprAst(make_binary(BinaryOp::mul, make_var('x'), make_var('y')))) ==
        "x * y");
  CHECK(pretty_print(ExprAst(make_const(1.5))) == "1.5");
  ExprAst peano = parse_ok("if x == 0 and y == 0 then 0 else x*y*(x^2-y^2)/(x^2+y^2)");
  ExprAst again = parse_ok(pretty_print(peano));
  CHECK(structurally_equal(peano, again));
}

// ---------------------------------------------------------------------------
// Round-trip property: parse(pretty_print(a)) is structurally identical to a.

namespace {

NodePtr gen_node(Rng& rng, int depth) {
  auto leaf = [&]() -> NodePtr {
    switch (rng.next_u64() % 4) {
      case 0: return make_var('x');
      case 1: return make_var('y');
      case 2: {
        static const double pool[] = {0, 1, 2, 0.5, 1.5, 3.25, 0.1, 7, 1000, 0.001,
                                      3.141592653589793};
        return make_const(pool[rng.next_u64() % (sizeof(pool) / sizeof(pool[0]))]);
      }
      default: return make_const(std::floor(rng.uniform(0, 1000)) / 16.0);
    }
  };
  if (depth <= 0 || rng.next_u64() % 5 == 0) return leaf();

  switch (rng.next_u64() % 10) {
    case 0: {
      static const UnaryOp ops[] = {UnaryOp::neg, UnaryOp::abs, UnaryOp::sin, UnaryOp::cos,
                                    UnaryOp::exp, UnaryOp::log, UnaryOp::sqrt, UnaryOp::sign};
      return make_unary(ops[rng.next_u64() % 8], gen_node(rng, depth - 1));
    }
    case 1: case 2: case 3: case 4: case 5: {
      static const BinaryOp ops[] = {BinaryOp::add, BinaryOp::sub, BinaryOp::mul,
                                     BinaryOp::div, BinaryOp::pow, BinaryOp::min, BinaryOp::max};
      return make_binary(ops[rng.next_u64() % 7], gen_node(rng, depth - 1), gen_node(rng, depth - 1));
    }
    case 6: case 7: {
      static const CompareOp ops[] = {CompareOp::lt, CompareOp::le, CompareOp::eq};
      return make_compare(ops[rng.next_u64() % 3], gen_node(rng, depth - 1), gen_node(rng, depth - 1));
    }
    case 8: {
      LogicOp op = rng.next_u64() % 2 ? LogicOp::conj : LogicOp::disj;
      return make_logic(op, gen_node(rng, depth - 1), gen_node(rng, depth - 1));
    }
    default:
      return make_cond(gen_node(rng, depth - 1), gen_node(rng, depth - 1), gen_node(rng, depth - 1));
  }
}

}  // namespace

TEST_CASE("round trip holds on 1000 generated trees") {
  Rng rng(20240817);
  for (int i = 0; i < 1000; ++i) {
    ExprAst a(gen_node(rng, 1 + static_cast<int>(rng.next_u64() % 5)));
    std::string text = pretty_print(a);
    ParseResult r = parse(text);
    INFO("printed: ", text);
    REQUIRE(r.ok());
    CHECK(structurally_equal(a, *r.ast));
  }
}

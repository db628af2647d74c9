#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "mixcheck/types.hpp"

namespace mixcheck::expr {

// Closed-form bivariate expressions in x and y.  The grammar is fixed
// (docs/grammar.ebnf); identifiers are limited to x, y and the function
// names below, which keeps evaluation total and auditable.

enum class UnaryOp : std::uint8_t { neg, abs, sin, cos, exp, log, sqrt, sign };
enum class BinaryOp : std::uint8_t { add, sub, mul, div, pow, min, max };
enum class CompareOp : std::uint8_t { lt, le, eq };  // == is exact IEEE equality
enum class LogicOp : std::uint8_t { conj, disj };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  struct Const { double value; };
  struct Var { char name; };  // 'x' or 'y'
  struct Unary { UnaryOp op; NodePtr arg; };
  struct Binary { BinaryOp op; NodePtr lhs, rhs; };
  struct Compare { CompareOp op; NodePtr lhs, rhs; };
  struct Logic { LogicOp op; NodePtr lhs, rhs; };
  struct Cond { NodePtr cond, if_true, if_false; };

  using Data = std::variant<Const, Var, Unary, Binary, Compare, Logic, Cond>;
  Data data;
};

NodePtr make_const(double v);
NodePtr make_var(char name);
NodePtr make_unary(UnaryOp op, NodePtr arg);
NodePtr make_binary(BinaryOp op, NodePtr lhs, NodePtr rhs);
NodePtr make_compare(CompareOp op, NodePtr lhs, NodePtr rhs);
NodePtr make_logic(LogicOp op, NodePtr lhs, NodePtr rhs);
NodePtr make_cond(NodePtr cond, NodePtr if_true, NodePtr if_false);

/// Immutable after construction; evaluation is reentrant.
class ExprAst {
 public:
  explicit ExprAst(NodePtr root) : root_(std::move(root)) {}
  const Node& root() const { return *root_; }
  const NodePtr& root_ptr() const { return root_; }

 private:
  NodePtr root_;
};

struct ParseError {
  std::size_t position = 0;  // byte offset of the offending input
  std::string message;
};

struct ParseResult {
  std::optional<ExprAst> ast;
  ParseError error;
  bool ok() const { return ast.has_value(); }
};

ParseResult parse(std::string_view source);

/// IEEE double evaluation.  The conditional short-circuits: the untaken
/// branch is never evaluated, so "if x == 0 and y == 0 then 0 else ..."
/// guards removable singularities.
EvalResult evaluate(const ExprAst& ast, double x, double y);

/// Canonical text form; parse(pretty_print(a)) is structurally equal to a.
std::string pretty_print(const ExprAst& ast);

bool structurally_equal(const ExprAst& a, const ExprAst& b);
bool structurally_equal(const NodePtr& a, const NodePtr& b);

/// Shortest decimal form that round-trips through parse.
std::string format_double(double v);

}  // namespace mixcheck::expr

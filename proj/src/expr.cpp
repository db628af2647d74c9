#include "mixcheck/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

namespace mixcheck::expr {

NodePtr make_const(double v) { return std::make_shared<Node>(Node{Node::Const{v}}); }
NodePtr make_var(char name) { return std::make_shared<Node>(Node{Node::Var{name}}); }
NodePtr make_unary(UnaryOp op, NodePtr arg) {
  return std::make_shared<Node>(Node{Node::Unary{op, std::move(arg)}});
}
NodePtr make_binary(BinaryOp op, NodePtr lhs, NodePtr rhs) {
  return std::make_shared<Node>(Node{Node::Binary{op, std::move(lhs), std::move(rhs)}});
}
NodePtr make_compare(CompareOp op, NodePtr lhs, NodePtr rhs) {
  return std::make_shared<Node>(Node{Node::Compare{op, std::move(lhs), std::move(rhs)}});
}
NodePtr make_logic(LogicOp op, NodePtr lhs, NodePtr rhs) {
  return std::make_shared<Node>(Node{Node::Logic{op, std::move(lhs), std::move(rhs)}});
}
NodePtr make_cond(NodePtr cond, NodePtr if_true, NodePtr if_false) {
  return std::make_shared<Node>(
      Node{Node::Cond{std::move(cond), std::move(if_true), std::move(if_false)}});
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok : std::uint8_t {
  number, ident,
  plus, minus, star, slash, caret, lparen, rparen, comma,
  lt, le, gt, ge, eq,
  end,
};

struct Token {
  Tok kind;
  std::size_t pos;
  double number = 0.0;
  std::string text;  // identifiers
};

struct LexFailure {
  std::size_t pos;
  std::string message;
};

bool is_ident_char(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Tokenizes the whole input up front; returns false and fills `fail` on bad input.
bool lex(std::string_view src, std::vector<Token>& out, LexFailure& fail) {
  std::size_t i = 0;
  const std::size_t n = src.size();
  while (i < n) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') { ++i; continue; }
    if (is_digit(c) || (c == '.' && i + 1 < n && is_digit(src[i + 1]))) {
      double value = 0.0;
      const char* begin = src.data() + i;
      const char* end = src.data() + n;
      auto [ptr, ec] = std::from_chars(begin, end, value);
      if (ec != std::errc()) {
        fail = {i, "invalid number"};
        return false;
      }
      out.push_back({Tok::number, i, value, {}});
      i += static_cast<std::size_t>(ptr - begin);
      continue;
    }
    if (is_ident_char(c)) {
      std::size_t start = i;
      while (i < n && (is_ident_char(src[i]) || is_digit(src[i]))) ++i;
      out.push_back({Tok::ident, start, 0.0, std::string(src.substr(start, i - start))});
      continue;
    }
    switch (c) {
      case '+': out.push_back({Tok::plus, i, 0, {}}); ++i; continue;
      case '-': out.push_back({Tok::minus, i, 0, {}}); ++i; continue;
      case '*': out.push_back({Tok::star, i, 0, {}}); ++i; continue;
      case '/': out.push_back({Tok::slash, i, 0, {}}); ++i; continue;
      case '^': out.push_back({Tok::caret, i, 0, {}}); ++i; continue;
      case '(': out.push_back({Tok::lparen, i, 0, {}}); ++i; continue;
      case ')': out.push_back({Tok::rparen, i, 0, {}}); ++i; continue;
      case ',': out.push_back({Tok::comma, i, 0, {}}); ++i; continue;
      case '<':
        if (i + 1 < n && src[i + 1] == '=') { out.push_back({Tok::le, i, 0, {}}); i += 2; }
        else { out.push_back({Tok::lt, i, 0, {}}); ++i; }
        continue;
      case '>':
        if (i + 1 < n && src[i + 1] == '=') { out.push_back({Tok::ge, i, 0, {}}); i += 2; }
        else { out.push_back({Tok::gt, i, 0, {}}); ++i; }
        continue;
      case '=':
        if (i + 1 < n && src[i + 1] == '=') { out.push_back({Tok::eq, i, 0, {}}); i += 2; continue; }
        fail = {i, "expected '==' (single '=' is not an operator)"};
        return false;
      default:
        fail = {i, std::string("unexpected character '") + c + "'"};
        return false;
    }
  }
  out.push_back({Tok::end, n, 0, {}});
  return true;
}

// ---------------------------------------------------------------------------
// Parser (recursive descent, see docs/grammar.ebnf)

struct ParserAbort {
  std::size_t pos;
  std::string message;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  NodePtr run() {
    NodePtr e = conditional();
    if (peek().kind != Tok::end) throw ParserAbort{peek().pos, "unexpected trailing input"};
    return e;
  }

 private:
  const Token& peek() const { return toks_[idx_]; }
  const Token& advance() { return toks_[idx_++]; }

  bool match_ident(const char* word) {
    if (peek().kind == Tok::ident && peek().text == word) { ++idx_; return true; }
    return false;
  }

  void expect_ident(const char* word) {
    if (!match_ident(word))
      throw ParserAbort{peek().pos, std::string("expected '") + word + "'"};
  }

  NodePtr conditional() {
    if (match_ident("if")) {
      NodePtr c = disjunction();
      expect_ident("then");
      NodePtr a = conditional();
      expect_ident("else");
      NodePtr b = conditional();
      return make_cond(std::move(c), std::move(a), std::move(b));
    }
    return disjunction();
  }

  NodePtr disjunction() {
    NodePtr e = conjunction();
    while (match_ident("or")) e = make_logic(LogicOp::disj, std::move(e), conjunction());
    return e;
  }

  NodePtr conjunction() {
    NodePtr e = relation();
    while (match_ident("and")) e = make_logic(LogicOp::conj, std::move(e), relation());
    return e;
  }

  NodePtr relation() {
    NodePtr e = sum();
    switch (peek().kind) {
      case Tok::lt: advance(); return make_compare(CompareOp::lt, std::move(e), sum());
      case Tok::le: advance(); return make_compare(CompareOp::le, std::move(e), sum());
      case Tok::eq: advance(); return make_compare(CompareOp::eq, std::move(e), sum());
      // a > b and a >= b normalize to swapped-operand < and <=
      case Tok::gt: { advance(); NodePtr r = sum(); return make_compare(CompareOp::lt, std::move(r), std::move(e)); }
      case Tok::ge: { advance(); NodePtr r = sum(); return make_compare(CompareOp::le, std::move(r), std::move(e)); }
      default: return e;
    }
  }

  NodePtr sum() {
    NodePtr e = term();
    for (;;) {
      if (peek().kind == Tok::plus) { advance(); e = make_binary(BinaryOp::add, std::move(e), term()); }
      else if (peek().kind == Tok::minus) { advance(); e = make_binary(BinaryOp::sub, std::move(e), term()); }
      else return e;
    }
  }

  NodePtr term() {
    NodePtr e = factor();
    for (;;) {
      if (peek().kind == Tok::star) { advance(); e = make_binary(BinaryOp::mul, std::move(e), factor()); }
      else if (peek().kind == Tok::slash) { advance(); e = make_binary(BinaryOp::div, std::move(e), factor()); }
      else return e;
    }
  }

  // '^' binds tighter than unary minus: -x^2 is -(x^2), 2^-3 is allowed.
  NodePtr factor() {
    if (peek().kind == Tok::minus) {
      advance();
      return make_unary(UnaryOp::neg, factor());
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (peek().kind == Tok::caret) {
      advance();
      return make_binary(BinaryOp::pow, std::move(base), factor());  // right-assoc
    }
    return base;
  }

  NodePtr atom() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::number: advance(); return make_const(t.number);
      case Tok::lparen: {
        advance();
        NodePtr e = conditional();
        if (peek().kind != Tok::rparen) throw ParserAbort{peek().pos, "expected ')'"};
        advance();
        return e;
      }
      case Tok::ident: return ident_atom();
      default: throw ParserAbort{t.pos, "expected a value"};
    }
  }

  NodePtr ident_atom() {
    const Token& t = advance();
    const std::string& w = t.text;
    if (w == "x" || w == "y") return make_var(w[0]);

    struct Fn1 { const char* name; UnaryOp op; };
    static constexpr Fn1 kUnary[] = {
        {"abs", UnaryOp::abs}, {"sin", UnaryOp::sin}, {"cos", UnaryOp::cos},
        {"exp", UnaryOp::exp}, {"log", UnaryOp::log}, {"sqrt", UnaryOp::sqrt},
        {"sign", UnaryOp::sign},
    };
    for (const auto& fn : kUnary) {
      if (w == fn.name) {
        expect_lparen();
        NodePtr a = conditional();
        expect_rparen();
        return make_unary(fn.op, std::move(a));
      }
    }
    if (w == "min" || w == "max") {
      BinaryOp op = (w == "min") ? BinaryOp::min : BinaryOp::max;
      expect_lparen();
      NodePtr a = conditional();
      if (peek().kind != Tok::comma) throw ParserAbort{peek().pos, "expected ','"};
      advance();
      NodePtr b = conditional();
      expect_rparen();
      return make_binary(op, std::move(a), std::move(b));
    }
    throw ParserAbort{t.pos, "unknown identifier '" + w + "'"};
  }

  void expect_lparen() {
    if (peek().kind != Tok::lparen) throw ParserAbort{peek().pos, "expected '('"};
    advance();
  }
  void expect_rparen() {
    if (peek().kind != Tok::rparen) throw ParserAbort{peek().pos, "expected ')'"};
    advance();
  }

  std::vector<Token> toks_;
  std::size_t idx_ = 0;
};

}  // namespace

ParseResult parse(std::string_view source) {
  std::vector<Token> toks;
  LexFailure lf;
  if (!lex(source, toks, lf)) return {std::nullopt, {lf.pos, lf.message}};
  try {
    Parser p(std::move(toks));
    return {ExprAst(p.run()), {}};
  } catch (const ParserAbort& a) {
    return {std::nullopt, {a.pos, a.message}};
  }
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

EvalResult eval_node(const Node& n, double x, double y);

EvalResult eval_unary(const Node::Unary& u, double x, double y) {
  EvalResult a = eval_node(*u.arg, x, y);
  if (!a.ok()) return a;
  switch (u.op) {
    case UnaryOp::neg: return EvalResult::of(-a.value);
    case UnaryOp::abs: return EvalResult::of(std::fabs(a.value));
    case UnaryOp::sin: return EvalResult::of(std::sin(a.value));
    case UnaryOp::cos: return EvalResult::of(std::cos(a.value));
    case UnaryOp::exp: return EvalResult::of(std::exp(a.value));
    case UnaryOp::log:
      if (a.value <= 0.0) return EvalResult::failed(EvalFault::log_domain);
      return EvalResult::of(std::log(a.value));
    case UnaryOp::sqrt:
      if (a.value < 0.0) return EvalResult::failed(EvalFault::sqrt_domain);
      return EvalResult::of(std::sqrt(a.value));
    case UnaryOp::sign:
      return EvalResult::of(a.value > 0.0 ? 1.0 : (a.value < 0.0 ? -1.0 : 0.0));
  }
  return EvalResult::failed(EvalFault::not_finite);
}

EvalResult eval_pow(double base, double expo) {
  if (base == 0.0 && expo < 0.0) return EvalResult::failed(EvalFault::div_by_zero);
  if (base < 0.0 && std::nearbyint(expo) != expo)
    return EvalResult::failed(EvalFault::pow_domain);
  return EvalResult::of(std::pow(base, expo));
}

EvalResult eval_binary(const Node::Binary& b, double x, double y) {
  EvalResult l = eval_node(*b.lhs, x, y);
  if (!l.ok()) return l;
  EvalResult r = eval_node(*b.rhs, x, y);
  if (!r.ok()) return r;
  switch (b.op) {
    case BinaryOp::add: return EvalResult::of(l.value + r.value);
    case BinaryOp::sub: return EvalResult::of(l.value - r.value);
    case BinaryOp::mul: return EvalResult::of(l.value * r.value);
    case BinaryOp::div:
      if (r.value == 0.0) return EvalResult::failed(EvalFault::div_by_zero);
      return EvalResult::of(l.value / r.value);
    case BinaryOp::pow: return eval_pow(l.value, r.value);
    case BinaryOp::min: return EvalResult::of(std::fmin(l.value, r.value));
    case BinaryOp::max: return EvalResult::of(std::fmax(l.value, r.value));
  }
  return EvalResult::failed(EvalFault::not_finite);
}

EvalResult eval_node(const Node& n, double x, double y) {
  return std::visit(
      [&](const auto& v) -> EvalResult {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Node::Const>) {
          return EvalResult::of(v.value);
        } else if constexpr (std::is_same_v<T, Node::Var>) {
          return EvalResult::of(v.name == 'x' ? x : y);
        } else if constexpr (std::is_same_v<T, Node::Unary>) {
          return eval_unary(v, x, y);
        } else if constexpr (std::is_same_v<T, Node::Binary>) {
          return eval_binary(v, x, y);
        } else if constexpr (std::is_same_v<T, Node::Compare>) {
          EvalResult l = eval_node(*v.lhs, x, y);
          if (!l.ok()) return l;
          EvalResult r = eval_node(*v.rhs, x, y);
          if (!r.ok()) return r;
          bool t = false;
          switch (v.op) {
            case CompareOp::lt: t = l.value < r.value; break;
            case CompareOp::le: t = l.value <= r.value; break;
            case CompareOp::eq: t = l.value == r.value; break;
          }
          return EvalResult::of(t ? 1.0 : 0.0);
        } else if constexpr (std::is_same_v<T, Node::Logic>) {
          EvalResult l = eval_node(*v.lhs, x, y);
          if (!l.ok()) return l;
          const bool lt = l.value != 0.0;
          // short-circuit like the conditional
          if (v.op == LogicOp::conj && !lt) return EvalResult::of(0.0);
          if (v.op == LogicOp::disj && lt) return EvalResult::of(1.0);
          EvalResult r = eval_node(*v.rhs, x, y);
          if (!r.ok()) return r;
          return EvalResult::of(r.value != 0.0 ? 1.0 : 0.0);
        } else {
          static_assert(std::is_same_v<T, Node::Cond>);
          EvalResult c = eval_node(*v.cond, x, y);
          if (!c.ok()) return c;
          // untaken branch is never evaluated
          return c.value != 0.0 ? eval_node(*v.if_true, x, y)
                                : eval_node(*v.if_false, x, y);
        }
      },
      n.data);
}

}  // namespace

EvalResult evaluate(const ExprAst& ast, double x, double y) {
  return eval_node(ast.root(), x, y);
}

// ---------------------------------------------------------------------------
// Pretty printing

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

namespace {

// Binding levels, loosest to tightest.  A child is parenthesized when its
// level is below what its context requires.
enum : int {
  kLevelCond = 0, kLevelOr = 1, kLevelAnd = 2, kLevelCmp = 3,
  kLevelAdd = 4, kLevelMul = 5, kLevelNeg = 6, kLevelPow = 7, kLevelAtom = 8,
};

int node_level(const Node& n) {
  return std::visit(
      [](const auto& v) -> int {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Node::Const> || std::is_same_v<T, Node::Var>) return kLevelAtom;
        else if constexpr (std::is_same_v<T, Node::Unary>)
          return v.op == UnaryOp::neg ? kLevelNeg : kLevelAtom;  // named fns print as calls
        else if constexpr (std::is_same_v<T, Node::Binary>) {
          switch (v.op) {
            case BinaryOp::add: case BinaryOp::sub: return kLevelAdd;
            case BinaryOp::mul: case BinaryOp::div: return kLevelMul;
            case BinaryOp::pow: return kLevelPow;
            default: return kLevelAtom;  // min/max print as calls
          }
        }
        else if constexpr (std::is_same_v<T, Node::Compare>) return kLevelCmp;
        else if constexpr (std::is_same_v<T, Node::Logic>)
          return v.op == LogicOp::conj ? kLevelAnd : kLevelOr;
        else return kLevelCond;
      },
      n.data);
}

void print_node(const Node& n, int min_level, std::string& out);

void print_child(const NodePtr& c, int min_level, std::string& out) {
  if (node_level(*c) < min_level) {
    out += '(';
    print_node(*c, kLevelCond, out);
    out += ')';
  } else {
    print_node(*c, min_level, out);
  }
}

const char* unary_name(UnaryOp op) {
  switch (op) {
    case UnaryOp::abs: return "abs";
    case UnaryOp::sin: return "sin";
    case UnaryOp::cos: return "cos";
    case UnaryOp::exp: return "exp";
    case UnaryOp::log: return "log";
    case UnaryOp::sqrt: return "sqrt";
    case UnaryOp::sign: return "sign";
    default: return "?";
  }
}

void print_node(const Node& n, int /*min_level*/, std::string& out) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Node::Const>) {
          out += format_double(v.value);
        } else if constexpr (std::is_same_v<T, Node::Var>) {
          out += v.name;
        } else if constexpr (std::is_same_v<T, Node::Unary>) {
          if (v.op == UnaryOp::neg) {
            out += '-';
            print_child(v.arg, kLevelNeg + (std::holds_alternative<Node::Unary>(v.arg->data) &&
                                            std::get<Node::Unary>(v.arg->data).op == UnaryOp::neg
                                                ? 1 : 0),
                        out);
          } else {
            out += unary_name(v.op);
            out += '(';
            print_node(*v.arg, kLevelCond, out);
            out += ')';
          }
        } else if constexpr (std::is_same_v<T, Node::Binary>) {
          switch (v.op) {
            case BinaryOp::add:
              print_child(v.lhs, kLevelAdd, out); out += " + "; print_child(v.rhs, kLevelMul, out); break;
            case BinaryOp::sub:
              print_child(v.lhs, kLevelAdd, out); out += " - "; print_child(v.rhs, kLevelMul, out); break;
            case BinaryOp::mul:
              print_child(v.lhs, kLevelMul, out); out += " * "; print_child(v.rhs, kLevelNeg, out); break;
            case BinaryOp::div:
              print_child(v.lhs, kLevelMul, out); out += " / "; print_child(v.rhs, kLevelNeg, out); break;
            case BinaryOp::pow:
              // right-assoc: parenthesize a pow/neg left child
              print_child(v.lhs, kLevelAtom, out); out += " ^ "; print_child(v.rhs, kLevelNeg, out); break;
            case BinaryOp::min: case BinaryOp::max:
              out += (v.op == BinaryOp::min ? "min(" : "max(");
              print_node(*v.lhs, kLevelCond, out);
              out += ", ";
              print_node(*v.rhs, kLevelCond, out);
              out += ')';
              break;
          }
        } else if constexpr (std::is_same_v<T, Node::Compare>) {
          print_child(v.lhs, kLevelAdd, out);
          out += v.op == CompareOp::lt ? " < " : (v.op == CompareOp::le ? " <= " : " == ");
          print_child(v.rhs, kLevelAdd, out);
        } else if constexpr (std::is_same_v<T, Node::Logic>) {
          if (v.op == LogicOp::conj) {
            print_child(v.lhs, kLevelAnd, out); out += " and "; print_child(v.rhs, kLevelCmp, out);
          } else {
            print_child(v.lhs, kLevelOr, out); out += " or "; print_child(v.rhs, kLevelAnd, out);
          }
        } else {
          static_assert(std::is_same_v<T, Node::Cond>);
          out += "if ";
          print_child(v.cond, kLevelOr, out);
          out += " then ";
          print_node(*v.if_true, kLevelCond, out);
          out += " else ";
          print_node(*v.if_false, kLevelCond, out);
        }
      },
      n.data);
}

}  // namespace

std::string pretty_print(const ExprAst& ast) {
  std::string out;
  print_node(ast.root(), kLevelCond, out);
  return out;
}

bool structurally_equal(const NodePtr& a, const NodePtr& b) {
  if (a.get() == b.get()) return true;
  if (a->data.index() != b->data.index()) return false;
  return std::visit(
      [&](const auto& va) -> bool {
        using T = std::decay_t<decltype(va)>;
        const auto& vb = std::get<T>(b->data);
        if constexpr (std::is_same_v<T, Node::Const>) return va.value == vb.value;
        else if constexpr (std::is_same_v<T, Node::Var>) return va.name == vb.name;
        else if constexpr (std::is_same_v<T, Node::Unary>)
          return va.op == vb.op && structurally_equal(va.arg, vb.arg);
        else if constexpr (std::is_same_v<T, Node::Binary>)
          return va.op == vb.op && structurally_equal(va.lhs, vb.lhs) && structurally_equal(va.rhs, vb.rhs);
        else if constexpr (std::is_same_v<T, Node::Compare>)
          return va.op == vb.op && structurally_equal(va.lhs, vb.lhs) && structurally_equal(va.rhs, vb.rhs);
        else if constexpr (std::is_same_v<T, Node::Logic>)
          return va.op == vb.op && structurally_equal(va.lhs, vb.lhs) && structurally_equal(va.rhs, vb.rhs);
        else
          return structurally_equal(va.cond, vb.cond) &&
                 structurally_equal(va.if_true, vb.if_true) &&
                 structurally_equal(va.if_false, vb.if_false);
      },
      a->data);
}

bool structurally_equal(const ExprAst& a, const ExprAst& b) {
  return structurally_equal(a.root_ptr(), b.root_ptr());
}

}  // namespace mixcheck::expr

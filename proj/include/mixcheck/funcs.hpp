#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixcheck/expr.hpp"
#include "mixcheck/types.hpp"

namespace mixcheck::funcs {

/// Open rectangle (a,b) x (c,d).
struct Rectangle {
  double a, b, c, d;

  double width() const { return b - a; }
  double height() const { return d - c; }
  bool contains(Point p) const { return p.x > a && p.x < b && p.y > c && p.y < d; }
  bool contains(Point p, double margin) const {
    return p.x > a + margin && p.x < b - margin && p.y > c + margin && p.y < d - margin;
  }
};

using Evaluator = std::function<EvalResult(double, double)>;

/// Evaluatable bivariate function with optional analytic derivative oracles.
/// Values are immutable and evaluators pure, so sharing across threads is safe.
struct Function2D {
  std::string label;
  Rectangle domain{-1, 1, -1, 1};
  Evaluator eval;
  Evaluator d1, d2;    // analytic first partials, when known
  Evaluator d21, d12;  // analytic mixed partials (d21: x first then y)

  EvalResult operator()(double x, double y) const { return eval(x, y); }
};

struct UnknownBuiltin : std::runtime_error {
  explicit UnknownBuiltin(const std::string& name)
      : std::runtime_error("unknown builtin function: " + name) {}
};

/// Named test-function corpus with oracles attached; see `builtin_names`.
Function2D builtin(const std::string& name);
std::vector<std::string> builtin_names();

Function2D from_expr(const expr::ExprAst& ast, Rectangle domain, std::string label = "expr");

/// f^T(x, y) = f(y, x), oracles swapped accordingly.
Function2D transpose(const Function2D& f);

// The switching-ramp pieces behind the "esser_shisha" corpus entry:
// q(t) = t * s(t) where s flips sign on the harmonic intervals
// [1/(m+1), 1/m), extended oddly to t < 0.  Its antiderivative is smooth
// at 0 (|h(y)| <= y^2/2) yet q is discontinuous on every neighborhood of 0.
namespace ramp {

/// Index m of the harmonic interval [1/(m+1), 1/m) containing t > 0.
double piece_index(double t);

/// s(t): +1 on even-index intervals, -1 on odd, odd in t, 0 at 0.
double sign_switch(double t);

/// q(t) = t * s(t).
double value(double t);

/// h(y) = integral of q from 0 to y, in closed form per interval.
double antiderivative(double y);

}  // namespace ramp

}  // namespace mixcheck::funcs

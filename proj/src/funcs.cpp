#include "mixcheck/funcs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mixcheck::funcs {

// ---------------------------------------------------------------------------
// Switching ramp

namespace ramp {

double piece_index(double t) {
  if (t >= 1.0) return 0.0;
  double m = std::ceil(1.0 / t) - 1.0;
  return m < 0.0 ? 0.0 : m;
}

namespace {

double parity_sign(double m) { return std::fmod(m, 2.0) == 0.0 ? 1.0 : -1.0; }

// Tail A(N) = sum_{j>=N} (-1)^j / j^2.
// Small N: closed form through sum_{j>=1} (-1)^j / j^2 = -pi^2/12.
// Large N: Euler transform of the alternating tail (repeated averaging of
// partial sums), machine precision in ~36 terms for any N.
double alternating_tail(double n) {
  if (n <= 80.0) {
    double head = 0.0;
    double sign = -1.0;  // j = 1 term
    for (double j = 1.0; j < n; ++j) {
      head += sign / (j * j);
      sign = -sign;
    }
    return -std::numbers::pi * std::numbers::pi / 12.0 - head;
  }
  constexpr int kTerms = 36;
  double s[kTerms];
  double partial = 0.0;
  double sign = 1.0;
  for (int k = 0; k < kTerms; ++k) {
    const double jk = n + k;
    partial += sign / (jk * jk);
    s[k] = partial;
    sign = -sign;
  }
  for (int lev = 1; lev < kTerms; ++lev)
    for (int k = 0; k + lev < kTerms; ++k) s[k] = 0.5 * (s[k] + s[k + 1]);
  return parity_sign(n) * s[0];
}

double antiderivative_pos(double y) {
  const double m = piece_index(y);
  const double lo = 1.0 / (m + 1.0);
  const double sigma = parity_sign(m);
  // pieces below the current interval, then the partial piece
  const double below = alternating_tail(m + 2.0) - sigma / (2.0 * (m + 1.0) * (m + 1.0));
  return sigma * (y * y - lo * lo) / 2.0 + below;
}

}  // namespace

double sign_switch(double t) {
  if (t == 0.0) return 0.0;
  const double s = parity_sign(piece_index(std::fabs(t)));
  return t > 0.0 ? s : -s;
}

double value(double t) {
  if (t == 0.0) return 0.0;
  const double a = std::fabs(t);
  return a * parity_sign(piece_index(a));  // even in t
}

double antiderivative(double y) {
  if (y == 0.0) return 0.0;
  return y > 0.0 ? antiderivative_pos(y) : -antiderivative_pos(-y);  // odd
}

}  // namespace ramp

// ---------------------------------------------------------------------------
// Corpus

namespace {

EvalResult num(double v) { return EvalResult::of(v); }

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

Function2D make_smooth_poly() {
  Function2D f;
  f.label = "smooth_poly";
  f.domain = {-1, 1, -1, 1};
  f.eval = [](double x, double y) { return num(x * x * x * y + x * y * y); };
  f.d1 = [](double x, double y) { return num(3 * x * x * y + y * y); };
  f.d2 = [](double x, double y) { return num(x * x * x + 2 * x * y); };
  f.d21 = [](double x, double y) { return num(3 * x * x + 2 * y); };
  f.d12 = f.d21;
  return f;
}

Function2D make_trig() {
  Function2D f;
  f.label = "trig";
  f.domain = {-2, 2, -2, 2};
  f.eval = [](double x, double y) { return num(std::sin(x) * std::cos(y)); };
  f.d1 = [](double x, double y) { return num(std::cos(x) * std::cos(y)); };
  f.d2 = [](double x, double y) { return num(-std::sin(x) * std::sin(y)); };
  f.d21 = [](double x, double y) { return num(-std::cos(x) * std::sin(y)); };
  f.d12 = f.d21;
  return f;
}

Function2D make_xy() {
  Function2D f;
  f.label = "xy";
  f.domain = {-1, 1, -1, 1};
  f.eval = [](double x, double y) { return num(x * y); };
  f.d1 = [](double, double y) { return num(y); };
  f.d2 = [](double x, double) { return num(x); };
  f.d21 = [](double, double) { return num(1.0); };
  f.d12 = f.d21;
  return f;
}

// f = x y (x^2 - y^2) / (x^2 + y^2), f(0,0) = 0.  C^1 everywhere, smooth off
// the origin, and the two iterated mixed derivatives at the origin differ:
// d1f(0,y) = -y gives d21 = -1, while antisymmetry f(x,y) = -f(y,x) forces
// d12 = +1.  Off the origin both orders agree with the rational form below.
Function2D make_peano() {
  Function2D f;
  f.label = "peano";
  f.domain = {-1, 1, -1, 1};
  f.eval = [](double x, double y) {
    if (x == 0.0 && y == 0.0) return num(0.0);
    return num(x * y * (x * x - y * y) / (x * x + y * y));
  };
  f.d1 = [](double x, double y) {
    if (x == 0.0 && y == 0.0) return num(0.0);
    const double r2 = x * x + y * y;
    return num(y * (x * x * x * x + 4 * x * x * y * y - y * y * y * y) / (r2 * r2));
  };
  f.d2 = [](double x, double y) {
    if (x == 0.0 && y == 0.0) return num(0.0);
    const double r2 = x * x + y * y;
    return num(x * (x * x * x * x - 4 * x * x * y * y - y * y * y * y) / (r2 * r2));
  };
  f.d21 = [](double x, double y) {
    if (x == 0.0 && y == 0.0) return num(-1.0);
    const double r2 = x * x + y * y;
    const double x2 = x * x, y2 = y * y;
    return num((x2 * x2 * x2 + 9 * x2 * x2 * y2 - 9 * x2 * y2 * y2 - y2 * y2 * y2) /
               (r2 * r2 * r2));
  };
  f.d12 = [d21 = f.d21](double x, double y) {
    if (x == 0.0 && y == 0.0) return num(1.0);
    return d21(x, y);
  };
  return f;
}

Function2D make_abs_mix() {
  Function2D f;
  f.label = "abs_mix";
  f.domain = {-1, 1, -1, 1};
  f.eval = [](double x, double y) { return num(x * std::fabs(y)); };
  f.d1 = [](double, double y) { return num(std::fabs(y)); };
  f.d2 = [](double x, double y) {
    if (y == 0.0) return EvalResult::failed(EvalFault::undefined);
    return num(x * sgn(y));
  };
  f.d21 = [](double, double y) {
    if (y == 0.0) return EvalResult::failed(EvalFault::undefined);
    return num(sgn(y));
  };
  f.d12 = f.d21;
  return f;
}

// g(x) = x^2 sin(1/x), g(0) = 0: differentiable everywhere, but the
// derivative oscillates within +-1 near 0, so no single slope works for
// two-point quotients on both sides of 0.
Function2D make_osc() {
  Function2D f;
  f.label = "osc";
  f.domain = {-1, 1, -1, 1};
  f.eval = [](double x, double) {
    if (x == 0.0) return num(0.0);
    return num(x * x * std::sin(1.0 / x));
  };
  f.d1 = [](double x, double) {
    if (x == 0.0) return num(0.0);
    return num(2 * x * std::sin(1.0 / x) - std::cos(1.0 / x));
  };
  f.d2 = [](double, double) { return num(0.0); };
  f.d21 = [](double, double) { return num(0.0); };
  f.d12 = f.d21;
  return f;
}

// f = x * h(y) with h the ramp antiderivative: d1 f = h(y) exists everywhere
// and is well behaved at 0, while d2 f = x q(y) fails to exist on every line
// y = 1/n, n integer.
Function2D make_esser_shisha() {
  Function2D f;
  f.label = "esser_shisha";
  f.domain = {-1, 1, -1, 1};
  f.eval = [](double x, double y) { return num(x * ramp::antiderivative(y)); };
  f.d1 = [](double, double y) { return num(ramp::antiderivative(y)); };
  f.d2 = [](double x, double y) { return num(x * ramp::value(y)); };
  f.d21 = [](double, double y) { return num(ramp::value(y)); };
  f.d12 = f.d21;
  return f;
}

}  // namespace

Function2D builtin(const std::string& name) {
  if (name == "smooth_poly") return make_smooth_poly();
  if (name == "trig") return make_trig();
  if (name == "xy") return make_xy();
  if (name == "peano") return make_peano();
  if (name == "abs_mix") return make_abs_mix();
  if (name == "osc") return make_osc();
  if (name == "esser_shisha") return make_esser_shisha();
  throw UnknownBuiltin(name);
}

std::vector<std::string> builtin_names() {
  return {"abs_mix", "esser_shisha", "osc", "peano", "smooth_poly", "trig", "xy"};
}

Function2D from_expr(const expr::ExprAst& ast, Rectangle domain, std::string label) {
  Function2D f;
  f.label = std::move(label);
  f.domain = domain;
  f.eval = [root = ast.root_ptr()](double x, double y) {
    return expr::evaluate(expr::ExprAst(root), x, y);
  };
  return f;
}

Function2D transpose(const Function2D& f) {
  Function2D t;
  t.label = f.label + "^T";
  t.domain = {f.domain.c, f.domain.d, f.domain.a, f.domain.b};
  auto flip = [](const Evaluator& e) -> Evaluator {
    if (!e) return {};
    return [e](double x, double y) { return e(y, x); };
  };
  t.eval = flip(f.eval);
  t.d1 = flip(f.d2);
  t.d2 = flip(f.d1);
  t.d21 = flip(f.d12);
  t.d12 = flip(f.d21);
  return t;
}

}  // namespace mixcheck::funcs

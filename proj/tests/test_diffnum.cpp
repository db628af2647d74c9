#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>

#include "mixcheck/diffnum.hpp"
#include "mixcheck/sampling.hpp"

using namespace mixcheck;
using namespace mixcheck::diffnum;
using funcs::Function2D;

namespace {

Function2D from_text(const char* text, funcs::Rectangle rect = {-1, 1, -1, 1}) {
  auto pr = expr::parse(text);
  REQUIRE(pr.ok());
  return funcs::from_expr(*pr.ast, rect, text);
}

}  // namespace

TEST_CASE("first partial matches the hand derivative on smooth_poly") {
  Function2D f = funcs::builtin("smooth_poly");
  DerivativeEstimate e = partial(f, Axis::x, {1, 1});
  CHECK_FALSE(e.excluded);
  CHECK(e.value == doctest::Approx(4.0).epsilon(1e-8));  // 3x^2 y + y^2
  e = partial(f, Axis::y, {0.5, -0.25});
  CHECK(e.value == doctest::Approx(0.5 * 0.5 * 0.5 + 2 * 0.5 * -0.25).epsilon(1e-8));
}

TEST_CASE("central difference is exact on linear functions") {
  Function2D f = from_text("x");
  for (double px : {-0.9, -0.3, 0.0, 0.17, 0.5, 2.0 / 3.0}) {
    DerivativeEstimate e = partial(f, Axis::x, {px, 0.1});
    CHECK(e.value == 1.0);  // realized-spread division makes this exact
  }
  // exactness is for the identity map; compound affine forms still round
  Function2D g = from_text("3*x - 2*y + 1");
  CHECK(partial(g, Axis::y, {0.3, 0.4}).value == doctest::Approx(-2.0).epsilon(1e-9));
}

TEST_CASE("central difference is exact within 1e-12 on quadratics") {
  Rng rng(2024);
  const double h0 = 0x1p-7;
  for (int trial = 0; trial < 50; ++trial) {
    double c[6];
    for (double& v : c) v = rng.symmetric();
    Function2D f;
    f.domain = {-2, 2, -2, 2};
    f.eval = [&c](double x, double y) {
      return EvalResult::of(c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y +
                            c[5] * y * y);
    };
    double px = rng.symmetric(), py = rng.symmetric();
    double want_dx = c[1] + 2 * c[3] * px + c[4] * py;
    double want_dy = c[2] + c[4] * px + 2 * c[5] * py;
    CHECK(std::fabs(partial(f, Axis::x, {px, py}, Scheme::central, h0).value - want_dx) <=
          1e-12);
    CHECK(std::fabs(partial(f, Axis::y, {px, py}, Scheme::central, h0).value - want_dy) <=
          1e-12);
  }
}

TEST_CASE("kink at y=0 of abs_mix: central quotient 0, indicator large") {
  Function2D f = funcs::builtin("abs_mix");
  DerivativeEstimate e = partial(f, Axis::y, {1, 0});
  CHECK_FALSE(e.excluded);
  CHECK(std::fabs(e.value) < 1e-12);       // one-sided limits +-1 cancel
  CHECK(e.error_indicator > 0.9);          // forward/backward spread flags it
}

TEST_CASE("one-sided fallback and exclusion") {
  // domain wall at x=0: evaluations fail on the left half-plane
  Function2D f;
  f.domain = {-1, 1, -1, 1};
  f.eval = [](double x, double y) {
    if (x < 0) return EvalResult::failed(EvalFault::log_domain);
    return EvalResult::of(std::log(1 + x) + y);
  };
  DerivativeEstimate e = partial(f, Axis::x, {0.0, 0.0});
  CHECK_FALSE(e.excluded);  // forward stencil rescues the wall point
  CHECK(e.value == doctest::Approx(1.0).epsilon(1e-4));

  Function2D dead;
  dead.domain = {-1, 1, -1, 1};
  dead.eval = [](double, double) { return EvalResult::failed(EvalFault::div_by_zero); };
  CHECK(partial(dead, Axis::x, {0, 0}).excluded);
  CHECK(mixed_iterated(dead, {Axis::x, Axis::y}, {0, 0}).excluded);
  CHECK(mixed_cross(dead, {0, 0}, 1e-4, 1e-4).excluded);
}

TEST_CASE("richardson and one-sided schemes behave") {
  Function2D f = from_text("x^3");
  DerivativeEstimate rich = partial(f, Axis::x, {0.5, 0}, Scheme::richardson, 1e-3);
  CHECK(rich.value == doctest::Approx(0.75).epsilon(1e-10));
  DerivativeEstimate fwd = partial(from_text("2*x"), Axis::x, {0.25, 0}, Scheme::forward);
  CHECK(fwd.value == doctest::Approx(2.0).epsilon(1e-9));
  DerivativeEstimate bwd = partial(from_text("2*x"), Axis::x, {0.25, 0}, Scheme::backward);
  CHECK(bwd.value == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("iterated mixed estimates match oracles on the smooth corpus") {
  for (const char* name : {"smooth_poly", "trig", "xy"}) {
    Function2D f = funcs::builtin(name);
    Rng rng(42);
    for (int i = 0; i < 25; ++i) {
      double x = rng.uniform(f.domain.a + 0.1, f.domain.b - 0.1);
      double y = rng.uniform(f.domain.c + 0.1, f.domain.d - 0.1);
      double want = f.d21(x, y).value;
      DerivativeEstimate d21 = mixed_iterated(f, {Axis::x, Axis::y}, {x, y});
      DerivativeEstimate d12 = mixed_iterated(f, {Axis::y, Axis::x}, {x, y});
      REQUIRE_FALSE(d21.excluded);
      REQUIRE_FALSE(d12.excluded);
      CHECK(std::fabs(d21.value - want) < 1e-5);
      CHECK(std::fabs(d12.value - want) < 1e-5);
    }
  }
  CHECK(mixed_iterated(funcs::builtin("smooth_poly"), {Axis::x, Axis::y}, {1, 1}).value ==
        doctest::Approx(5.0).epsilon(1e-5));
}

TEST_CASE("order of limits at the peano origin: -1, +1, and 0") {
  Function2D f = funcs::builtin("peano");
  DerivativeEstimate d21 = mixed_iterated(f, {Axis::x, Axis::y}, {0, 0});
  DerivativeEstimate d12 = mixed_iterated(f, {Axis::y, Axis::x}, {0, 0});
  CHECK(std::fabs(d21.value - (-1.0)) < 1e-3);
  CHECK(std::fabs(d12.value - (+1.0)) < 1e-3);
  for (double h : {1e-2, 1e-3, 1e-4, 0x1p-10}) {
    DerivativeEstimate cross = mixed_cross(f, {0, 0}, h, h);
    CHECK(std::fabs(cross.value) <= 1e-12);  // f(t,t) = 0 kills the quotient
  }
}

TEST_CASE("cross quotient is exact on bilinear functions") {
  Function2D f = funcs::builtin("xy");
  CHECK(mixed_cross(f, {1, 1}, 0x1p-10, 0x1p-10).value == 1.0);
  CHECK(mixed_cross(f, {0.5, -0.25}, 0x1p-8, 0x1p-12).value == 1.0);
  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    double x = rng.symmetric(), y = rng.symmetric();
    double h = std::pow(10, rng.uniform(-4, -2));
    double k = std::pow(10, rng.uniform(-4, -2));
    CHECK(mixed_cross(f, {x, y}, h, k).value == doctest::Approx(1.0).epsilon(1e-6));
  }
  // smooth_poly: cross = 3x^2 + h^2 + 2y, so 5 within 1e-6 at (1,1), h=1e-4
  CHECK(std::fabs(mixed_cross(funcs::builtin("smooth_poly"), {1, 1}, 1e-4, 1e-4).value - 5) <
        1e-6);
}

TEST_CASE("transpose symmetry of the cross quotient is exact") {
  Rng rng(99);
  for (const char* name : {"peano", "trig", "smooth_poly"}) {
    Function2D f = funcs::builtin(name);
    Function2D ft = funcs::transpose(f);
    for (int i = 0; i < 100; ++i) {
      double x = rng.uniform(-0.8, 0.8), y = rng.uniform(-0.8, 0.8);
      double h = std::pow(10, rng.uniform(-5, -2));
      double k = std::pow(10, rng.uniform(-5, -2));
      double a = mixed_cross(f, {x, y}, h, k).value;
      double b = mixed_cross(ft, {y, x}, k, h).value;
      CHECK(std::memcmp(&a, &b, sizeof(double)) == 0);
    }
  }
}

TEST_CASE("audit of the smooth corpus is clean") {
  for (const char* name : {"trig", "smooth_poly"}) {
    Function2D f = funcs::builtin(name);
    SchwarzAuditReport rep = schwarz_audit(f, f.domain, 51, 51, 1e-5);
    CHECK(rep.mismatch_fraction == 0.0);
    CHECK(rep.excluded_fraction == 0.0);
    CHECK(rep.max_discrepancy <= 1e-5);
    CHECK(rep.pass_nodes + rep.mismatch_nodes + rep.excluded_nodes == rep.total_nodes);
    CHECK(rep.total_nodes == 51 * 51);
  }
}

TEST_CASE("audit flags exactly the origin for peano on an odd grid") {
  Function2D f = funcs::builtin("peano");
  // even grid: the origin is off the grid and equality holds everywhere
  SchwarzAuditReport even = schwarz_audit(f, f.domain, 50, 50, 1e-3);
  CHECK(even.mismatch_fraction == 0.0);
  // odd grid: the center node is the origin, where the orders differ by 2
  std::vector<AuditNode> nodes;
  SchwarzAuditReport odd = schwarz_audit(f, f.domain, 51, 51, 1e-3, &nodes);
  CHECK(odd.mismatch_nodes == 1);
  CHECK(odd.max_discrepancy == doctest::Approx(2.0).epsilon(1e-2));
  CHECK(std::fabs(odd.argmax_point.x) < 1e-9);
  CHECK(std::fabs(odd.argmax_point.y) < 1e-9);
  CHECK(nodes.size() == 51 * 51);
}

TEST_CASE("audit of abs_mix off the kink line is clean") {
  Function2D f = funcs::builtin("abs_mix");
  SchwarzAuditReport rep = schwarz_audit(f, f.domain, 50, 50, 1e-5);
  CHECK(rep.mismatch_fraction == 0.0);
  CHECK(rep.excluded_fraction == 0.0);
}

TEST_CASE("audit reports are deterministic and thread-count independent") {
  Function2D f = funcs::builtin("trig");
  std::vector<AuditNode> n1, n2;
  setenv("MIXCHECK_THREADS", "1", 1);
  SchwarzAuditReport r1 = schwarz_audit(f, f.domain, 21, 17, 1e-5, &n1);
  setenv("MIXCHECK_THREADS", "4", 1);
  SchwarzAuditReport r2 = schwarz_audit(f, f.domain, 21, 17, 1e-5, &n2);
  unsetenv("MIXCHECK_THREADS");
  REQUIRE(n1.size() == n2.size());
  for (std::size_t i = 0; i < n1.size(); ++i) {
    CHECK(std::memcmp(&n1[i].d21, &n2[i].d21, sizeof(double)) == 0);
    CHECK(std::memcmp(&n1[i].d12, &n2[i].d12, sizeof(double)) == 0);
  }
  CHECK(r1.max_discrepancy == r2.max_discrepancy);
  CHECK(r1.argmax_point.x == r2.argmax_point.x);
  // row/column summaries are consistent with the global count
  double rows = 0;
  for (double v : r1.row_mismatch_fraction) rows += v * r1.nx;
  CHECK(rows == doctest::Approx(static_cast<double>(r1.mismatch_nodes)));
}

#pragma once

#include <cmath>
#include <cstdint>

namespace mixcheck {

/// Why an evaluation produced no usable number.
enum class EvalFault : std::uint8_t {
  none = 0,
  div_by_zero,
  log_domain,
  sqrt_domain,
  pow_domain,
  not_finite,   // overflow or other non-finite result
  undefined,    // the quantity does not exist at this point (oracles, filters)
  quadrature,   // too many integrand failures while integrating
};

const char* to_string(EvalFault f);

/// A real value or the fault that prevented computing one.
/// Faults are values, not exceptions: numeric drivers count failed points
/// and decide their own exclusion policy.
struct EvalResult {
  double value = 0.0;
  EvalFault fault = EvalFault::none;

  bool ok() const { return fault == EvalFault::none; }

  static EvalResult of(double v) {
    if (!std::isfinite(v)) return {v, EvalFault::not_finite};
    return {v, EvalFault::none};
  }
  static EvalResult failed(EvalFault f) { return {0.0, f}; }
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class Axis : std::uint8_t { x, y };

inline Axis other_axis(Axis a) { return a == Axis::x ? Axis::y : Axis::x; }

inline double coord(Point p, Axis a) { return a == Axis::x ? p.x : p.y; }

inline Point with_coord(Point p, Axis a, double v) {
  if (a == Axis::x) p.x = v; else p.y = v;
  return p;
}

const char* to_string(Axis a);

}  // namespace mixcheck

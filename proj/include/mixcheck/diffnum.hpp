#pragma once

#include <vector>

#include "mixcheck/funcs.hpp"
#include "mixcheck/types.hpp"

namespace mixcheck::diffnum {

enum class Scheme : std::uint8_t { central, forward, backward, richardson };

const char* to_string(Scheme s);

struct DerivativeEstimate {
  double value = 0.0;
  double step = 0.0;            // final step actually used
  Scheme scheme = Scheme::central;
  double error_indicator = 0.0; // refinement gap, widened by one-sided spread
  bool excluded = false;        // too many stencil evaluations failed
};

// Step policy: first derivatives start at max(|coordinate|, 1) * eps^(1/3);
// the outer step of an iterated mixed stencil uses eps^(1/4) scaling.
// Refinement halves the step until the indicator stops decreasing, at most
// eight levels.
double first_derivative_step(double coordinate);
double mixed_outer_step(double coordinate);

/// First partial derivative along `axis` at p.  h0 = 0 means policy default.
/// Falls back to one-sided stencils when an evaluation faults; the estimate
/// is excluded only when those fail too.
DerivativeEstimate partial(const funcs::Function2D& f, Axis axis, Point p,
                           Scheme scheme = Scheme::central, double h0 = 0.0);

struct MixedOrder {
  Axis first;   // differentiated first (inner)
  Axis second;  // differentiated second (outer)
};

/// Iterated mixed derivative: order {x, y} differentiates in x first, then
/// in y, i.e. the outer central difference of inner d/dx estimates.
DerivativeEstimate mixed_iterated(const funcs::Function2D& f, MixedOrder order, Point p);

/// Symmetric double-difference quotient
///   [f(x+h,y+k) - f(x+h,y-k) - f(x-h,y+k) + f(x-h,y-k)] / (4hk)
/// at the caller's h, k (no refinement of the returned value).
DerivativeEstimate mixed_cross(const funcs::Function2D& f, Point p, double h, double k);

struct SchwarzAuditReport {
  int nx = 0, ny = 0;
  double tol = 0.0;
  double mismatch_fraction = 0.0;  // fractions are over all interior nodes,
  double pass_fraction = 0.0;      // so the three sum to 1
  double excluded_fraction = 0.0;
  double max_discrepancy = 0.0;    // over non-excluded nodes
  Point argmax_point;
  std::vector<double> row_mismatch_fraction;  // per y row
  std::vector<double> col_mismatch_fraction;  // per x column
  long total_nodes = 0;
  long pass_nodes = 0;
  long mismatch_nodes = 0;
  long excluded_nodes = 0;
};

struct AuditNode {
  double x = 0, y = 0;
  double d21 = 0, d12 = 0, delta = 0;
  char status = 'P';  // 'P' pass, 'M' mismatch, 'X' excluded
};

/// Evaluates both iterated orders at every interior node of a uniform grid
/// (pulled inside `rect` by one stencil margin) and classifies each node
/// against `tol`.  The grid-fraction "measure" is an explicit proxy; even
/// node counts keep the center of a symmetric rectangle off the grid.
/// Nodes run in parallel; aggregation is index-ordered and deterministic.
SchwarzAuditReport schwarz_audit(const funcs::Function2D& f, funcs::Rectangle rect,
                                 int nx, int ny, double tol,
                                 std::vector<AuditNode>* nodes = nullptr);

}  // namespace mixcheck::diffnum

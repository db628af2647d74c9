#pragma once

#include <stdexcept>
#include <vector>

#include "mixcheck/funcs.hpp"
#include "mixcheck/types.hpp"

namespace mixcheck::tolstov {

/// Quadrature for f(x,y) = ∫ₐˣ du ∫꜀ʸ h(u,v) dv: composite Simpson on
/// panels anchored to the rectangle (the grid never slides with x or y, so
/// the quadrature error is smooth and cancels out of finite differences).
/// A panel that moves by more than 0.1% of its own magnitude under one
/// bisection is treated as holding a discontinuity and refined adaptively
/// to machine accuracy; smooth panels keep the plain composite value.
struct QuadratureSpec {
  int panels_per_unit = 48;   // anchored panel density per unit length; even, >= 8
  int refinement_levels = 40; // max adaptive bisection depth of a flagged panel
};

struct QuadratureFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Single-axis integrals of a density, same quadrature as the constructed f.
EvalResult integral_in_y(const funcs::Function2D& h, double x, double y_from, double y_to,
                         funcs::Rectangle rect, QuadratureSpec spec);
EvalResult integral_in_x(const funcs::Function2D& h, double y, double x_from, double x_to,
                         funcs::Rectangle rect, QuadratureSpec spec);

/// The constructed f, with the slice integrals attached as first-derivative
/// oracles and the density itself as both mixed oracles.  Evaluations carry
/// EvalFault::quadrature when more than 1% of the integrand samples fail.
funcs::Function2D integrate_density(const funcs::Function2D& h, funcs::Rectangle rect,
                                    QuadratureSpec spec = {});

struct Lemma1Report {
  std::vector<double> x_samples, y_samples;
  double max_gap = 0.0;        // over included sample pairs
  double pass_fraction = 0.0;  // gap <= tol among included samples
  double excluded_fraction = 0.0;
  long total_samples = 0;
};

/// Checks d1 f(x,y) against ∫꜀ʸ h(x,v) dv on a midpoint-offset sample grid
/// (offset grids keep jump lines at round coordinates off the samples).
/// Throws QuadratureFailure when the constructed f is globally unusable.
Lemma1Report verify_lemma1(const funcs::Function2D& h, funcs::Rectangle rect,
                           QuadratureSpec spec, int nx, int ny, double tol);

struct Theorem2Report {
  int nx = 0, ny = 0;
  double gap_a1 = 0.0;   // max |d1 f - ∫ h dv|
  double gap_a2 = 0.0;   // max |d2 f - ∫ h du|
  double gap_b21 = 0.0;  // max |d2 d1 f - h|
  double gap_b12 = 0.0;  // max |d1 d2 f - h|
  double pass_a1 = 0.0, pass_a2 = 0.0, pass_b = 0.0;  // fractions under tol
  double excluded_fraction = 0.0;
  std::vector<double> slice_pass_fraction;  // per x column, the (b) predicate
  long total_nodes = 0;
};

struct NodeGaps {
  double x = 0, y = 0;
  double a1 = 0, a2 = 0, b21 = 0, b12 = 0;
  char status = 'P';  // 'P' included, 'X' excluded
};

/// Reconstruction check: both iterated mixed derivatives of the constructed
/// f should recover the density pointwise; the first derivatives should
/// recover the slice integrals.  Grid fractions are the declared
/// almost-everywhere proxy.
Theorem2Report verify_theorem2(const funcs::Function2D& h, funcs::Rectangle rect,
                               QuadratureSpec spec, int nx, int ny, double tol,
                               std::vector<NodeGaps>* nodes = nullptr);

}  // namespace mixcheck::tolstov

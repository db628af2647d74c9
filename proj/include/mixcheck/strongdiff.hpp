#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixcheck/diffnum.hpp"
#include "mixcheck/funcs.hpp"
#include "mixcheck/types.hpp"

namespace mixcheck::strongdiff {

// A strong (two-point) difference quotient compares g at two nearby points
// t1, t2 while a side parameter z also stays near its base value:
//     q = (g(t2, z) - g(t1, z)) / (t2 - t1).
// g is strongly differentiable at (t0, z0) with slope L exactly when the
// sup of |q - L| over all such samples within radius delta tends to 0.

/// One-parameter family g(t, z); for plain one-variable functions z is unused.
using Family = std::function<EvalResult(double t, double z)>;

Family family_of(const funcs::Function2D& f, Axis axis);  // t along `axis`

struct SamplerParams {
  std::uint64_t seed = 42;
  int pairs_per_radius = 64;  // random triples per radius, on top of the grid
};

struct InsufficientSamples : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Sampled sup-modulus per radius.  Sample sets are nested across radii
/// (every triple kept at a smaller radius also counts at the larger ones),
/// so modulus is non-decreasing in delta by construction.
struct ModulusCurve {
  Point point;
  Axis axis = Axis::x;
  double candidate_slope = 0.0;
  std::vector<double> radii;     // strictly decreasing
  std::vector<double> modulus;   // max |q - L| per radius
  std::vector<long> pair_count;  // cumulative usable pairs per radius
  double min_separation = 0.0;   // |t2 - t1| lower bound at the finest radius
};

/// Default radius schedule {1e-1, 3e-2, 1e-2, 3e-3, 1e-3} times `scale`.
std::vector<double> default_radii(double scale = 1.0);

/// Throws InsufficientSamples when more than half of the pairs at some
/// radius failed to evaluate.
ModulusCurve strong_modulus(const Family& g, Point p, Axis axis, double candidate_slope,
                            const std::vector<double>& radii, const SamplerParams& sp = {});

/// Raw quotients at one radius (the sample set strong_modulus would use).
std::vector<double> sampled_quotients(const Family& g, Point p, Axis axis, double delta,
                                      const SamplerParams& sp = {});

struct SlopeFit {
  double slope = 0.0;    // Chebyshev center: (min q + max q) / 2
  double modulus = 0.0;  // (max q - min q) / 2, the optimal sup deviation
  long pairs = 0;
};

SlopeFit estimate_strong_derivative(const Family& g, Point p, Axis axis, double delta,
                                    const SamplerParams& sp = {});

enum class Outcome : std::uint8_t { yes, no, inconclusive };
const char* to_string(Outcome o);

/// Decision rule (a documented heuristic; the evidence curve is always
/// attached): Yes when the modulus at the finest radius is <= eta and the
/// curve shrinks with the radius; No when every radius stays >= 10*eta.
struct Verdict {
  Outcome outcome = Outcome::inconclusive;
  double eta = 0.0;
  ModulusCurve evidence;
  std::string note;
};

Verdict is_strongly_differentiable(const Family& g, Point p, Axis axis,
                                   const std::vector<double>& radii, double eta,
                                   const SamplerParams& sp = {});

struct StrongSlope {
  double slope = 0.0;
  double modulus = 0.0;  // at the finest radius
};

struct Theorem1Report {
  Point point;
  StrongSlope d21;  // strong slope of d1 f taken in y
  StrongSlope d12;  // strong slope of d2 f taken in x, on the existence set
  double existence_fraction = 1.0;  // sampled points where d2 f looks real
  double equality_gap = 0.0;        // |d21.slope - d12.slope|
  ModulusCurve curve_d21, curve_d12;
};

/// Pointwise equality check for the mixed derivatives: estimates the strong
/// slope of d1 f in y, then of d2 f in x restricted to the sampled points
/// where the inner d2 f quotient converges (both one-sided quotients agree
/// within half their size and the refinement gap stays under 10*tol).
/// Throws InsufficientSamples when that set misses the point entirely.
Theorem1Report verify_theorem1(const funcs::Function2D& f, Point p,
                               const std::vector<double>& radii, double tol,
                               const SamplerParams& sp = {});

}  // namespace mixcheck::strongdiff

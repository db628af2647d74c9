#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>

#include "mixcheck/funcs.hpp"
#include "mixcheck/types.hpp"

namespace mixcheck::lipcheck {

using Func1D = std::function<EvalResult(double)>;

struct Interval {
  double lo, hi;
  double length() const { return hi - lo; }
};

struct ExcludedSlice : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AllSlicesExcluded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SliceEstimate {
  double k_hat = 0.0;       // max sampled two-point quotient
  double witness_t1 = 0.0;  // the pair attaining it
  double witness_t2 = 0.0;
  long samples_used = 0;
};

/// Sampled Lipschitz constant of g over the interval: the max quotient
/// |g(b)-g(a)|/|b-a| over a fixed endpoint-heavy grid plus a seeded random
/// stream.  Pairs are kept at least length*1e-3 apart (well above the
/// contractual length*1e-6 floor) since value noise divides by the
/// separation.  Always a lower bound of the true constant; growing
/// n_samples extends the stream, so the estimate never decreases.
/// Throws ExcludedSlice when most evaluations fail.
SliceEstimate lipschitz_estimate(const Func1D& g, Interval iv, int n_samples,
                                 std::uint64_t seed = 42);

struct UniformLipschitzReport {
  double k_hat = 0.0;
  double worst_slice = 0.0;  // slice coordinate attaining k_hat
  Point witness_a, witness_b;
  int slices_tested = 0;
  int excluded_slices = 0;
};

/// Tests whether the `derivative_axis` partial, viewed along
/// `lipschitz_axis`, is Lipschitz with one constant across slices: runs
/// lipschitz_estimate on finite-difference derivative slices at uniform
/// plus seeded random slice coordinates and takes the max.
/// Throws AllSlicesExcluded when no slice yields an estimate.
UniformLipschitzReport uniform_partial_lipschitz(const funcs::Function2D& f,
                                                 Axis derivative_axis, Axis lipschitz_axis,
                                                 funcs::Rectangle rect, int n_slices,
                                                 int n_samples, std::uint64_t seed = 42);

}  // namespace mixcheck::lipcheck

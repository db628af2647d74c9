#include "mixcheck/lipcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mixcheck/diffnum.hpp"
#include "mixcheck/sampling.hpp"

namespace mixcheck::lipcheck {

namespace {

// Fixed grid prefix, endpoint-heavy so near-extreme pairs are always present;
// random samples extend it, and growing n_samples only appends, which keeps
// the estimate monotone in the sample count.
constexpr double kGridFractions[] = {0.0, 1.0, 0.999, 0.001, 0.5,
                                     0.99, 0.01, 0.75, 0.25, 0.9};
constexpr int kGridPoints = static_cast<int>(sizeof(kGridFractions) / sizeof(double));

std::vector<double> sample_points(Interval iv, int n_samples, std::uint64_t seed) {
  std::vector<double> ts;
  ts.reserve(static_cast<std::size_t>(std::max(n_samples, kGridPoints)));
  for (int i = 0; i < std::min(kGridPoints, n_samples); ++i)
    ts.push_back(iv.lo + iv.length() * kGridFractions[i]);
  Rng rng(seed);
  for (int i = kGridPoints; i < n_samples; ++i) ts.push_back(rng.uniform(iv.lo, iv.hi));
  return ts;
}

}  // namespace

SliceEstimate lipschitz_estimate(const Func1D& g, Interval iv, int n_samples,
                                 std::uint64_t seed) {
  const std::vector<double> ts = sample_points(iv, n_samples, seed);
  // noise in g is amplified by 1/separation, so the sampler keeps pairs
  // further apart than the contractual floor of length * 1e-6
  const double min_sep = iv.length() * 1e-3;

  std::vector<double> values(ts.size());
  std::vector<char> ok(ts.size());
  long failures = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    EvalResult r = g(ts[i]);
    ok[i] = r.ok();
    values[i] = r.value;
    if (!r.ok()) ++failures;
  }
  if (failures * 2 > static_cast<long>(ts.size()))
    throw ExcludedSlice("more than half of the slice evaluations failed");

  SliceEstimate est;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!ok[i]) continue;
    for (std::size_t j = i + 1; j < ts.size(); ++j) {
      if (!ok[j]) continue;
      const double sep = std::fabs(ts[j] - ts[i]);
      if (sep < min_sep) continue;
      const double q = std::fabs(values[j] - values[i]) / sep;
      if (q > est.k_hat) {
        est.k_hat = q;
        est.witness_t1 = ts[i];
        est.witness_t2 = ts[j];
      }
    }
    ++est.samples_used;
  }
  return est;
}

UniformLipschitzReport uniform_partial_lipschitz(const funcs::Function2D& f,
                                                 Axis derivative_axis, Axis lipschitz_axis,
                                                 funcs::Rectangle rect, int n_slices,
                                                 int n_samples, std::uint64_t seed) {
  const Axis slice_axis = other_axis(lipschitz_axis);

  const double slice_lo = slice_axis == Axis::x ? rect.a : rect.c;
  const double slice_hi = slice_axis == Axis::x ? rect.b : rect.d;
  const double along_lo = lipschitz_axis == Axis::x ? rect.a : rect.c;
  const double along_hi = lipschitz_axis == Axis::x ? rect.b : rect.d;

  // Slice values feed two-point quotients whose error is the value noise
  // over the pair separation, so the derivative step is chosen much wider
  // than the generic policy: quotient noise shrinks with 1/step and the
  // truncation it costs is far below what the quotients can resolve.
  const double deriv_lo = derivative_axis == Axis::x ? rect.a : rect.c;
  const double deriv_hi = derivative_axis == Axis::x ? rect.b : rect.d;
  const double slice_step = 0.0025 * (deriv_hi - deriv_lo);

  // pull everything inside the rectangle by one stencil reach
  const double margin_slice = derivative_axis == slice_axis ? 2.0 * slice_step : 0.0;
  const double margin_along = derivative_axis == lipschitz_axis ? 2.0 * slice_step : 0.0;

  std::vector<double> slices;
  for (int i = 0; i < n_slices; ++i)
    slices.push_back((slice_lo + margin_slice) +
                     (slice_hi - slice_lo - 2 * margin_slice) * i /
                         std::max(1, n_slices - 1));
  Rng rng(derive_stream(seed, 0x51));
  const int extra = std::max(2, n_slices / 2);
  for (int i = 0; i < extra; ++i)
    slices.push_back(rng.uniform(slice_lo + margin_slice, slice_hi - margin_slice));

  const Interval along{along_lo + margin_along, along_hi - margin_along};

  UniformLipschitzReport rep;
  for (std::size_t s = 0; s < slices.size(); ++s) {
    const double sc = slices[s];
    Func1D slice_fn = [&f, derivative_axis, slice_axis, sc, slice_step](double t) -> EvalResult {
      Point q = with_coord(with_coord(Point{}, slice_axis, sc),
                           other_axis(slice_axis), t);
      diffnum::DerivativeEstimate e =
          diffnum::partial(f, derivative_axis, q, diffnum::Scheme::central, slice_step);
      if (e.excluded) return EvalResult::failed(EvalFault::undefined);
      return EvalResult::of(e.value);
    };
    ++rep.slices_tested;
    try {
      SliceEstimate est =
          lipschitz_estimate(slice_fn, along, n_samples, derive_stream(seed, s));
      if (est.k_hat > rep.k_hat) {
        rep.k_hat = est.k_hat;
        rep.worst_slice = sc;
        rep.witness_a = with_coord(with_coord(Point{}, slice_axis, sc),
                                   other_axis(slice_axis), est.witness_t1);
        rep.witness_b = with_coord(with_coord(Point{}, slice_axis, sc),
                                   other_axis(slice_axis), est.witness_t2);
      }
    } catch (const ExcludedSlice&) {
      ++rep.excluded_slices;
    }
  }
  if (rep.excluded_slices == rep.slices_tested)
    throw AllSlicesExcluded("every slice was excluded; nothing to report");
  return rep;
}

}  // namespace mixcheck::lipcheck

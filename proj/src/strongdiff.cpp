#include "mixcheck/strongdiff.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "mixcheck/sampling.hpp"

namespace mixcheck::strongdiff {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kSeparationFactor = 1e-3;  // min pair separation = delta * this

// Symmetric grid offsets (fractions of delta).  The near-endpoint entries
// make the sampled sup track the true sup closely; their mirror images keep
// the Chebyshev center of symmetric quotient sets unbiased.  The dense top
// band matters for slopes that oscillate at ever finer scales: only anchors
// near delta have oscillation periods the tight pairs can resolve, so there
// have to be enough of them to land on a slope extreme.
constexpr double kGridOffsets[] = {0.999, 0.99, 0.97, 0.95, 0.93, 0.9,
                                   0.87, 0.85, 0.8, 0.75, 0.7, 0.6,
                                   0.45, 0.3, 0.2, 0.1, 0.05};
constexpr double kParamOffsets[] = {0.0, -0.999, -0.5, 0.5, 0.999};

struct Triple {
  double t1, t2, z;
};

// Deterministic grid plus seeded random triples at one radius.  Every grid
// anchor also contributes a minimum-separation pair centered on it: those
// tight pairs probe the local slope, which is what exposes functions whose
// derivative keeps oscillating at every scale.
void build_triples(Point p, Axis axis, double delta, std::uint64_t seed,
                   std::uint64_t stream, int n_random, std::vector<Triple>& out) {
  const double t0 = coord(p, axis);
  const double z0 = coord(p, other_axis(axis));
  const double min_sep = delta * kSeparationFactor;

  std::vector<double> ts;
  for (double o : kGridOffsets) {
    ts.push_back(t0 + o * delta);
    ts.push_back(t0 - o * delta);
  }
  std::vector<double> zs;
  for (double w : kParamOffsets) zs.push_back(z0 + w * delta);

  for (std::size_t i = 0; i < ts.size(); ++i) {
    for (std::size_t j = i + 1; j < ts.size(); ++j) {
      if (std::fabs(ts[j] - ts[i]) < min_sep) continue;
      for (double z : zs) out.push_back({ts[i], ts[j], z});
    }
  }
  for (double a : ts) {
    // 0.6 on each side keeps the realized separation above min_sep even
    // after the additions round
    const double t1 = a - 0.6 * min_sep, t2 = a + 0.6 * min_sep;
    if (t2 - t1 < min_sep || std::fabs(t1 - t0) >= delta || std::fabs(t2 - t0) >= delta)
      continue;
    for (double z : zs) out.push_back({t1, t2, z});
  }

  Rng rng(derive_stream(seed, stream));
  for (int n = 0; n < n_random; ++n) {
    const double t1 = t0 + delta * rng.symmetric();
    double t2 = t1;
    for (int tries = 0; tries < 64 && std::fabs(t2 - t1) < min_sep; ++tries)
      t2 = t0 + delta * rng.symmetric();
    if (std::fabs(t2 - t1) < min_sep) continue;
    out.push_back({t1, t2, z0 + delta * rng.symmetric()});
  }
}

struct PointKey {
  std::uint64_t a, b;
  bool operator==(const PointKey&) const = default;
};
struct PointKeyHash {
  std::size_t operator()(const PointKey& k) const {
    SplitMix64 sm(k.a ^ (k.b * 0x9E3779B97F4A7C15ull));
    return static_cast<std::size_t>(sm.next());
  }
};

class CachedFamily {
 public:
  explicit CachedFamily(const Family& g) : g_(g) {}

  EvalResult at(double t, double z) {
    PointKey key{std::bit_cast<std::uint64_t>(t), std::bit_cast<std::uint64_t>(z)};
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    EvalResult r = g_(t, z);
    cache_.emplace(key, r);
    return r;
  }

 private:
  const Family& g_;
  std::unordered_map<PointKey, EvalResult, PointKeyHash> cache_;
};

struct SamplePolicy {
  double max_failure_fraction = 0.5;
  long min_usable = 1;
};

struct RadiusQuotients {
  std::vector<double> values;
  long attempted = 0;
};

RadiusQuotients quotients_at_radius(CachedFamily& g, Point p, Axis axis, double delta,
                                    const SamplerParams& sp, std::uint64_t stream,
                                    const SamplePolicy& policy) {
  std::vector<Triple> triples;
  build_triples(p, axis, delta, sp.seed, stream, sp.pairs_per_radius, triples);

  RadiusQuotients out;
  out.attempted = static_cast<long>(triples.size());
  out.values.reserve(triples.size());
  for (const Triple& tr : triples) {
    EvalResult a = g.at(tr.t1, tr.z);
    if (!a.ok()) continue;
    EvalResult b = g.at(tr.t2, tr.z);
    if (!b.ok()) continue;
    out.values.push_back((b.value - a.value) / (tr.t2 - tr.t1));
  }
  const long failed = out.attempted - static_cast<long>(out.values.size());
  if (failed > policy.max_failure_fraction * out.attempted ||
      static_cast<long>(out.values.size()) < policy.min_usable) {
    throw InsufficientSamples("too few usable pairs at radius " +
                              expr::format_double(delta) + " (" +
                              std::to_string(out.values.size()) + " of " +
                              std::to_string(out.attempted) + ")");
  }
  return out;
}

ModulusCurve curve_with_policy(const Family& g, Point p, Axis axis, double slope,
                               const std::vector<double>& radii, const SamplerParams& sp,
                               const SamplePolicy& policy) {
  ModulusCurve curve;
  curve.point = p;
  curve.axis = axis;
  curve.candidate_slope = slope;
  curve.radii = radii;
  curve.modulus.assign(radii.size(), 0.0);
  curve.pair_count.assign(radii.size(), 0);
  curve.min_separation = radii.empty() ? 0.0 : radii.back() * kSeparationFactor;

  CachedFamily cached(g);
  // smallest radius first; carrying the running max realizes the nesting
  double running_max = 0.0;
  long running_count = 0;
  for (std::size_t i = radii.size(); i-- > 0;) {
    RadiusQuotients rq = quotients_at_radius(cached, p, axis, radii[i], sp,
                                             static_cast<std::uint64_t>(i), policy);
    for (double q : rq.values) running_max = std::max(running_max, std::fabs(q - slope));
    running_count += static_cast<long>(rq.values.size());
    curve.modulus[i] = running_max;
    curve.pair_count[i] = running_count;
  }
  return curve;
}

SlopeFit fit_with_policy(const Family& g, Point p, Axis axis, double delta,
                         const SamplerParams& sp, const SamplePolicy& policy) {
  CachedFamily cached(g);
  RadiusQuotients rq = quotients_at_radius(cached, p, axis, delta, sp, 0, policy);
  const auto [lo, hi] = std::minmax_element(rq.values.begin(), rq.values.end());
  SlopeFit fit;
  fit.slope = (*lo + *hi) / 2.0;
  fit.modulus = (*hi - *lo) / 2.0;
  fit.pairs = static_cast<long>(rq.values.size());
  return fit;
}

}  // namespace

Family family_of(const funcs::Function2D& f, Axis axis) {
  if (axis == Axis::x)
    return [eval = f.eval](double t, double z) { return eval(t, z); };
  return [eval = f.eval](double t, double z) { return eval(z, t); };
}

std::vector<double> default_radii(double scale) {
  return {1e-1 * scale, 3e-2 * scale, 1e-2 * scale, 3e-3 * scale, 1e-3 * scale};
}

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::yes: return "Yes";
    case Outcome::no: return "No";
    case Outcome::inconclusive: return "Inconclusive";
  }
  return "?";
}

ModulusCurve strong_modulus(const Family& g, Point p, Axis axis, double candidate_slope,
                            const std::vector<double>& radii, const SamplerParams& sp) {
  return curve_with_policy(g, p, axis, candidate_slope, radii, sp, SamplePolicy{});
}

std::vector<double> sampled_quotients(const Family& g, Point p, Axis axis, double delta,
                                      const SamplerParams& sp) {
  CachedFamily cached(g);
  return quotients_at_radius(cached, p, axis, delta, sp, 0, SamplePolicy{}).values;
}

SlopeFit estimate_strong_derivative(const Family& g, Point p, Axis axis, double delta,
                                    const SamplerParams& sp) {
  return fit_with_policy(g, p, axis, delta, sp, SamplePolicy{});
}

Verdict is_strongly_differentiable(const Family& g, Point p, Axis axis,
                                   const std::vector<double>& radii, double eta,
                                   const SamplerParams& sp) {
  Verdict v;
  v.eta = eta;
  try {
    SlopeFit fit = estimate_strong_derivative(g, p, axis, radii.back(), sp);
    v.evidence = strong_modulus(g, p, axis, fit.slope, radii, sp);
  } catch (const InsufficientSamples& e) {
    v.outcome = Outcome::inconclusive;
    v.note = e.what();
    return v;
  }
  const auto& m = v.evidence.modulus;
  bool shrinking = true;
  for (std::size_t i = 0; i + 1 < m.size(); ++i)
    if (m[i + 1] > m[i] * 1.05 + 1e-15) shrinking = false;
  if (m.back() <= eta && shrinking) {
    v.outcome = Outcome::yes;
    return v;
  }
  bool all_large = true;
  for (double mi : m)
    if (mi < 10 * eta) all_large = false;
  if (all_large) {
    v.outcome = Outcome::no;
    v.note = "modulus stays above 10*eta at every radius";
    return v;
  }
  v.outcome = Outcome::inconclusive;
  v.note = "modulus neither settles under eta nor stays large";
  return v;
}

namespace {

// Numeric stand-in for "the y-partial exists here": the refinement gap of the
// central estimate stays under 10*tol, and the forward/backward quotients
// agree to within half their own size.  The relative clause is what catches
// genuine one-sided mismatches even where the function values are tiny.
bool partial_converges(const funcs::Function2D& f, Axis ax, Point q, double tol,
                       double* value_out) {
  diffnum::DerivativeEstimate e = diffnum::partial(f, ax, q);
  if (e.excluded) return false;
  *value_out = e.value;
  if (e.error_indicator > 10 * tol) return false;

  const double c = coord(q, ax);
  const double k = diffnum::first_derivative_step(c);
  const double cp = c + k, cm = c - k;
  EvalResult f0 = f.eval(q.x, q.y);
  EvalResult fp = ax == Axis::x ? f.eval(cp, q.y) : f.eval(q.x, cp);
  EvalResult fm = ax == Axis::x ? f.eval(cm, q.y) : f.eval(q.x, cm);
  if (!f0.ok() || !fp.ok() || !fm.ok()) return false;
  const double dp = (fp.value - f0.value) / (cp - c);
  const double dm = (f0.value - fm.value) / (c - cm);
  const double noise_floor = 1e3 * kEps * (1.0 + std::fabs(f0.value)) / k;
  return std::fabs(dp - dm) <= 0.5 * std::max(std::fabs(dp), std::fabs(dm)) + noise_floor;
}

}  // namespace

Theorem1Report verify_theorem1(const funcs::Function2D& f, Point p,
                               const std::vector<double>& radii, double tol,
                               const SamplerParams& sp) {
  Theorem1Report rep;
  rep.point = p;
  const double delta_min = radii.back();

  // Strong slope of d1 f in y: the side parameter z is the x coordinate.
  Family g1 = [&f](double t, double z) -> EvalResult {
    diffnum::DerivativeEstimate e = diffnum::partial(f, Axis::x, {z, t});
    if (e.excluded) return EvalResult::failed(EvalFault::undefined);
    return EvalResult::of(e.value);
  };
  SlopeFit fit21 = estimate_strong_derivative(g1, p, Axis::y, delta_min, sp);
  rep.curve_d21 = strong_modulus(g1, p, Axis::y, fit21.slope, radii, sp);
  rep.d21 = {fit21.slope, rep.curve_d21.modulus.back()};

  // Strong slope of d2 f in x, restricted to points where d2 f converges.
  // Membership is memoized per point so the existence fraction counts each
  // sampled point once.
  struct Membership {
    long tested = 0, members = 0;
    std::unordered_map<PointKey, EvalResult, PointKeyHash> cache;
  } membership;
  Family g2 = [&f, &membership, tol](double t, double z) -> EvalResult {
    PointKey key{std::bit_cast<std::uint64_t>(t), std::bit_cast<std::uint64_t>(z)};
    auto it = membership.cache.find(key);
    if (it != membership.cache.end()) return it->second;
    double value = 0.0;
    EvalResult r = partial_converges(f, Axis::y, {t, z}, tol, &value)
                       ? EvalResult::of(value)
                       : EvalResult::failed(EvalFault::undefined);
    ++membership.tested;
    if (r.ok()) ++membership.members;
    membership.cache.emplace(key, r);
    return r;
  };

  // lenient sampling: heavy filtering is expected near the point, the check
  // only needs the existence set to accumulate there
  SamplePolicy lenient{1.0, 8};
  SlopeFit fit12 = fit_with_policy(g2, p, Axis::x, delta_min, sp, lenient);
  rep.curve_d12 = curve_with_policy(g2, p, Axis::x, fit12.slope, radii, sp, lenient);
  rep.d12 = {fit12.slope, rep.curve_d12.modulus.back()};

  rep.existence_fraction =
      membership.tested == 0
          ? 0.0
          : static_cast<double>(membership.members) / static_cast<double>(membership.tested);
  rep.equality_gap = std::fabs(rep.d21.slope - rep.d12.slope);
  return rep;
}

}  // namespace mixcheck::strongdiff

#include "mixcheck/diffnum.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "mixcheck/sampling.hpp"

namespace mixcheck::diffnum {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxLevels = 8;

double scale_of(double c) { return std::max(std::fabs(c), 1.0); }

}  // namespace

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::central: return "central";
    case Scheme::forward: return "forward";
    case Scheme::backward: return "backward";
    case Scheme::richardson: return "richardson";
  }
  return "?";
}

double first_derivative_step(double coordinate) {
  static const double root = std::cbrt(kEps);
  return scale_of(coordinate) * root;
}

double mixed_outer_step(double coordinate) {
  static const double root = std::pow(kEps, 0.25);
  return scale_of(coordinate) * root;
}

namespace {

struct QuotientSample {
  double q = 0.0;
  double scale = 0.0;  // |a| + |b| of the stencil values, for the noise floor
};

// Quotients divide by the realized node spread, not the nominal 2h, so
// linear functions come out exact regardless of representability of p +- h.
std::optional<QuotientSample> central_quotient(const funcs::Function2D& f, Axis ax, Point p,
                                               double h) {
  const double c = coord(p, ax);
  const double cp = c + h, cm = c - h;
  if (cp == cm) return std::nullopt;
  EvalResult a = f.eval(ax == Axis::x ? cp : p.x, ax == Axis::y ? cp : p.y);
  if (!a.ok()) return std::nullopt;
  EvalResult b = f.eval(ax == Axis::x ? cm : p.x, ax == Axis::y ? cm : p.y);
  if (!b.ok()) return std::nullopt;
  return QuotientSample{(a.value - b.value) / (cp - cm),
                        std::fabs(a.value) + std::fabs(b.value)};
}

std::optional<QuotientSample> one_sided_quotient(const funcs::Function2D& f, Axis ax, Point p,
                                                 double h /* signed */) {
  const double c = coord(p, ax);
  const double cs = c + h;
  if (cs == c) return std::nullopt;
  EvalResult a = f.eval(ax == Axis::x ? cs : p.x, ax == Axis::y ? cs : p.y);
  if (!a.ok()) return std::nullopt;
  EvalResult b = f.eval(p.x, p.y);
  if (!b.ok()) return std::nullopt;
  return QuotientSample{(a.value - b.value) / (cs - c),
                        std::fabs(a.value) + std::fabs(b.value)};
}

using QuotientFn = std::optional<QuotientSample> (*)(const funcs::Function2D&, Axis, Point,
                                                     double);

std::optional<QuotientSample> forward_fn(const funcs::Function2D& f, Axis ax, Point p,
                                         double h) {
  return one_sided_quotient(f, ax, p, +h);
}
std::optional<QuotientSample> backward_fn(const funcs::Function2D& f, Axis ax, Point p,
                                          double h) {
  return one_sided_quotient(f, ax, p, -h);
}

// Central with fallback to forward, then backward, when evaluations fault.
std::optional<QuotientSample> central_with_fallback(const funcs::Function2D& f, Axis ax,
                                                    Point p, double h) {
  if (auto q = central_quotient(f, ax, p, h)) return q;
  if (auto q = forward_fn(f, ax, p, h)) return q;
  return backward_fn(f, ax, p, h);
}

struct Refined {
  double value = 0.0;
  double step = 0.0;
  double indicator = 0.0;
  bool ok = false;
};

// Halve the step until successive quotients stop agreeing better, keeping the
// level with the smallest gap to its predecessor.  Once the gap is at the
// rounding floor of the stencil there is nothing left to resolve; stopping
// there keeps the step as large as possible, which is where quotient noise
// is smallest.
Refined refine(const funcs::Function2D& f, Axis ax, Point p, double h0, QuotientFn quot) {
  Refined best;
  std::optional<QuotientSample> prev;
  double prev_ind = std::numeric_limits<double>::infinity();
  double h = h0;
  for (int level = 0; level < kMaxLevels; ++level, h *= 0.5) {
    std::optional<QuotientSample> q = quot(f, ax, p, h);
    if (!q) {
      if (!prev) return best;  // base step unusable
      break;
    }
    if (prev) {
      const double ind = std::fabs(q->q - prev->q);
      if (!best.ok || ind < best.indicator) best = {q->q, h, ind, true};
      const double noise_floor = 8.0 * kEps * q->scale / (2.0 * h);
      if (ind <= noise_floor) break;
      if (ind > prev_ind) break;  // refinement stopped paying off
      prev_ind = ind;
    }
    prev = q;
  }
  if (!best.ok && prev) best = {prev->q, h0, 0.0, true};
  return best;
}

}  // namespace

DerivativeEstimate partial(const funcs::Function2D& f, Axis axis, Point p,
                           Scheme scheme, double h0) {
  DerivativeEstimate est;
  est.scheme = scheme;
  const double h = h0 > 0.0 ? h0 : first_derivative_step(coord(p, axis));
  est.step = h;

  if (scheme == Scheme::richardson) {
    // one extrapolation level over h and h/2
    auto d1 = central_with_fallback(f, axis, p, h);
    auto d2 = central_with_fallback(f, axis, p, h / 2);
    if (!d1 || !d2) { est.excluded = true; return est; }
    est.value = (4.0 * d2->q - d1->q) / 3.0;
    est.step = h / 2;
    est.error_indicator = std::fabs(est.value - d2->q);
    return est;
  }

  QuotientFn quot = scheme == Scheme::central ? central_with_fallback
                    : scheme == Scheme::forward ? forward_fn
                                                : backward_fn;
  Refined r = refine(f, axis, p, h, quot);
  if (!r.ok) { est.excluded = true; return est; }
  est.value = r.value;
  est.step = r.step;
  est.error_indicator = r.indicator;

  // A kink hides from the symmetric quotient (it converges to the one-sided
  // average), so widen the indicator by the forward/backward spread.
  if (scheme == Scheme::central) {
    auto qf = forward_fn(f, axis, p, r.step);
    auto qb = backward_fn(f, axis, p, r.step);
    if (qf && qb)
      est.error_indicator = std::max(est.error_indicator, std::fabs(qf->q - qb->q) / 2.0);
  }
  return est;
}

namespace {

// Inner partial estimate for the iterated stencil; excluded -> nullopt.
std::optional<DerivativeEstimate> inner_partial(const funcs::Function2D& f, Axis ax, Point p) {
  DerivativeEstimate e = partial(f, ax, p);
  if (e.excluded) return std::nullopt;
  return e;
}

struct OuterQuotient {
  double q = 0.0;
  double inv_inner_step = 0.0;  // sum of 1/h over the inner estimates used
};

}  // namespace

DerivativeEstimate mixed_iterated(const funcs::Function2D& f, MixedOrder order, Point p) {
  DerivativeEstimate est;
  est.scheme = Scheme::central;
  const Axis outer = order.second;
  const double c = coord(p, outer);
  const double k0 = mixed_outer_step(c);
  est.step = k0;

  EvalResult f0 = f.eval(p.x, p.y);
  const double fscale = f0.ok() ? std::fabs(f0.value) : 0.0;

  auto outer_quotient = [&](double k) -> std::optional<OuterQuotient> {
    const double cp = c + k, cm = c - k;
    if (cp == cm) return std::nullopt;
    auto gp = inner_partial(f, order.first, with_coord(p, outer, cp));
    auto gm = inner_partial(f, order.first, with_coord(p, outer, cm));
    if (gp && gm)
      return OuterQuotient{(gp->value - gm->value) / (cp - cm),
                           1.0 / gp->step + 1.0 / gm->step};
    // one-sided fallback on the outer difference
    auto g0 = inner_partial(f, order.first, p);
    if (g0 && gp)
      return OuterQuotient{(gp->value - g0->value) / (cp - c),
                           1.0 / gp->step + 1.0 / g0->step};
    if (g0 && gm)
      return OuterQuotient{(g0->value - gm->value) / (c - cm),
                           1.0 / g0->step + 1.0 / gm->step};
    return std::nullopt;
  };

  Refined best;
  std::optional<OuterQuotient> prev;
  double prev_k = k0;
  double prev_ind = std::numeric_limits<double>::infinity();
  double k = k0;
  for (int level = 0; level < kMaxLevels; ++level, k *= 0.5) {
    std::optional<OuterQuotient> q = outer_quotient(k);
    if (!q) {
      if (!prev) { est.excluded = true; return est; }
      break;
    }
    if (prev) {
      const double ind = std::fabs(q->q - prev->q);
      // The inner estimates carry rounding noise ~ eps*|f|/(2h) each; once
      // the outer gap is at that scale, shrinking k only amplifies it, so
      // keep the previous (larger) step instead.
      const double noise_floor = 4.0 * kEps * fscale * q->inv_inner_step / (2.0 * 2.0 * k);
      if (ind <= noise_floor) {
        best = {prev->q, prev_k, ind, true};
        break;
      }
      if (!best.ok || ind < best.indicator) best = {q->q, k, ind, true};
      if (ind == 0.0) break;
      if (ind > prev_ind) break;
      prev_ind = ind;
    }
    prev = q;
    prev_k = k;
  }
  if (!best.ok) {
    if (!prev) { est.excluded = true; return est; }
    best = {prev->q, prev_k, 0.0, true};
  }
  est.value = best.value;
  est.step = best.step;
  est.error_indicator = best.indicator;
  return est;
}

DerivativeEstimate mixed_cross(const funcs::Function2D& f, Point p, double h, double k) {
  DerivativeEstimate est;
  est.scheme = Scheme::central;
  est.step = h;

  auto cross = [&f, &p](double hh, double kk) -> std::optional<double> {
    const double xp = p.x + hh, xm = p.x - hh;
    const double yp = p.y + kk, ym = p.y - kk;
    if (xp == xm || yp == ym) return std::nullopt;
    EvalResult fpp = f.eval(xp, yp), fpm = f.eval(xp, ym);
    EvalResult fmp = f.eval(xm, yp), fmm = f.eval(xm, ym);
    if (!fpp.ok() || !fpm.ok() || !fmp.ok() || !fmm.ok()) return std::nullopt;
    // grouped so transposing f (and swapping h,k) reproduces the exact
    // floating-point result
    const double numer = (fpp.value + fmm.value) - (fpm.value + fmp.value);
    return numer / ((xp - xm) * (yp - ym));
  };

  auto d = cross(h, k);
  if (!d) { est.excluded = true; return est; }
  est.value = *d;
  if (auto half = cross(h / 2, k / 2)) est.error_indicator = std::fabs(*d - *half);
  return est;
}

SchwarzAuditReport schwarz_audit(const funcs::Function2D& f, funcs::Rectangle rect,
                                 int nx, int ny, double tol,
                                 std::vector<AuditNode>* nodes) {
  SchwarzAuditReport rep;
  rep.nx = nx;
  rep.ny = ny;
  rep.tol = tol;
  rep.total_nodes = static_cast<long>(nx) * ny;
  rep.row_mismatch_fraction.assign(static_cast<std::size_t>(ny), 0.0);
  rep.col_mismatch_fraction.assign(static_cast<std::size_t>(nx), 0.0);

  // one stencil margin: outer mixed step plus the inner stencil reach
  const double sx = std::max(std::fabs(rect.a), std::fabs(rect.b));
  const double sy = std::max(std::fabs(rect.c), std::fabs(rect.d));
  const double mx = mixed_outer_step(sx) + 4.0 * first_derivative_step(sx);
  const double my = mixed_outer_step(sy) + 4.0 * first_derivative_step(sy);

  auto node_coord = [](double lo, double hi, double margin, int i, int n) {
    if (n == 1) return 0.5 * (lo + hi);
    return (lo + margin) + (hi - lo - 2 * margin) * i / (n - 1);
  };

  std::vector<AuditNode> grid(static_cast<std::size_t>(rep.total_nodes));
  parallel_for(grid.size(), [&](std::size_t idx) {
    const int i = static_cast<int>(idx) % nx;  // column (x)
    const int j = static_cast<int>(idx) / nx;  // row (y)
    AuditNode& node = grid[idx];
    node.x = node_coord(rect.a, rect.b, mx, i, nx);
    node.y = node_coord(rect.c, rect.d, my, j, ny);
    DerivativeEstimate d21 = mixed_iterated(f, {Axis::x, Axis::y}, {node.x, node.y});
    DerivativeEstimate d12 = mixed_iterated(f, {Axis::y, Axis::x}, {node.x, node.y});
    if (d21.excluded || d12.excluded) {
      node.status = 'X';
      return;
    }
    node.d21 = d21.value;
    node.d12 = d12.value;
    node.delta = d21.value - d12.value;
    node.status = std::fabs(node.delta) <= tol ? 'P' : 'M';
  });

  // sequential reduction in node order keeps the report deterministic
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    const AuditNode& node = grid[idx];
    const int i = static_cast<int>(idx) % nx;
    const int j = static_cast<int>(idx) / nx;
    switch (node.status) {
      case 'X': ++rep.excluded_nodes; break;
      case 'M':
        ++rep.mismatch_nodes;
        rep.row_mismatch_fraction[j] += 1.0;
        rep.col_mismatch_fraction[i] += 1.0;
        break;
      default: ++rep.pass_nodes; break;
    }
    if (node.status != 'X' && std::fabs(node.delta) > rep.max_discrepancy) {
      rep.max_discrepancy = std::fabs(node.delta);
      rep.argmax_point = {node.x, node.y};
    }
  }
  const double total = static_cast<double>(rep.total_nodes);
  rep.mismatch_fraction = rep.mismatch_nodes / total;
  rep.pass_fraction = rep.pass_nodes / total;
  rep.excluded_fraction = rep.excluded_nodes / total;
  for (auto& v : rep.row_mismatch_fraction) v /= nx;
  for (auto& v : rep.col_mismatch_fraction) v /= ny;
  if (nodes) *nodes = std::move(grid);
  return rep;
}

}  // namespace mixcheck::diffnum

#include "mixcheck/tolstov.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "mixcheck/diffnum.hpp"
#include "mixcheck/sampling.hpp"

namespace mixcheck::tolstov {

namespace {

struct Counters {
  long evals = 0;
  long faults = 0;
};

// 1-D integrand: value 0 is substituted for a faulted sample, the fault is
// counted, and the caller decides whether the count is fatal.
using Integrand = std::function<double(double, Counters&)>;

double simpson(double fa, double fm, double fb, double width) {
  return width * (fa + 4.0 * fm + fb) / 6.0;
}

// Adaptive bisection of one panel; tol halves with each split.
double adaptive_panel(const Integrand& g, Counters& cnt, double lo, double hi, double fa,
                      double fm, double fb, double whole, double tol, int depth) {
  const double mid = 0.5 * (lo + hi);
  const double fl = g(0.5 * (lo + mid), cnt);
  const double fr = g(0.5 * (mid + hi), cnt);
  const double left = simpson(fa, fl, fm, mid - lo);
  const double right = simpson(fm, fr, fb, hi - mid);
  const double split = left + right;
  if (depth <= 0 || std::fabs(split - whole) <= 15.0 * tol)
    return split + (split - whole) / 15.0;
  return adaptive_panel(g, cnt, lo, mid, fa, fl, fm, left, tol / 2, depth - 1) +
         adaptive_panel(g, cnt, mid, hi, fm, fr, fb, right, tol / 2, depth - 1);
}

// When one bisection moves a panel by less than this fraction of its own
// magnitude the panel is taken as-is.  Smooth densities then keep the plain
// composite-Simpson error field, which is smooth in the endpoints and
// cancels out of finite differences; a panel holding a discontinuity (or a
// jump sitting exactly on a node) trips the trigger and is bisected down to
// machine accuracy instead.
constexpr double kRefineTrigger = 1e-3;

double panel_value(const Integrand& g, Counters& cnt, double lo, double hi, double fa,
                   double fm, double fb, int max_depth) {
  const double w = hi - lo;
  const double whole = simpson(fa, fm, fb, w);
  const double mid = 0.5 * (lo + hi);
  const double fl = g(0.5 * (lo + mid), cnt);
  const double fr = g(0.5 * (mid + hi), cnt);
  const double left = simpson(fa, fl, fm, mid - lo);
  const double right = simpson(fm, fr, fb, hi - mid);
  const double split = left + right;
  const double magnitude =
      w * (std::fabs(fa) + std::fabs(fl) + 4.0 * std::fabs(fm) + std::fabs(fr) +
           std::fabs(fb)) / 8.0;
  if (std::fabs(split - whole) <= kRefineTrigger * magnitude + 1e-14 * w) return whole;
  const double tol = 1e-13 * w;
  return adaptive_panel(g, cnt, lo, mid, fa, fl, fm, left, tol / 2, max_depth) +
         adaptive_panel(g, cnt, mid, hi, fm, fr, fb, right, tol / 2, max_depth);
}

// ∫ from `anchor_lo` to `to` with Simpson panels anchored at
// anchor_lo + k * panel_width plus a trailing partial panel, every panel
// going through the refinement trigger above.
double anchored_integral(const Integrand& g, Counters& cnt, double anchor_lo,
                         double anchor_hi, double to, const QuadratureSpec& spec) {
  if (to == anchor_lo) return 0.0;
  double lo = anchor_lo, hi = to;
  double sign = 1.0;
  if (hi < lo) {
    std::swap(lo, hi);
    sign = -1.0;
    // integrating below the anchor: anchor panels still start at anchor_lo
  }
  const double span = anchor_hi - anchor_lo;
  const int panels = std::max(4, static_cast<int>(std::ceil(spec.panels_per_unit * span / 2.0)));
  const double width = span / panels;

  double total = 0.0;
  double cursor = lo;
  double f_lo = g(cursor, cnt);
  while (cursor < hi) {
    const double next = std::min(cursor + width, hi);
    const double mid = 0.5 * (cursor + next);
    const double f_mid = g(mid, cnt);
    const double f_next = g(next, cnt);
    total += panel_value(g, cnt, cursor, next, f_lo, f_mid, f_next, spec.refinement_levels);
    cursor = next;
    f_lo = f_next;
  }
  return sign * total;
}

constexpr double kMaxFaultFraction = 0.01;

EvalResult finish(double value, const Counters& cnt) {
  if (cnt.faults > kMaxFaultFraction * cnt.evals)
    return EvalResult::failed(EvalFault::quadrature);
  return EvalResult::of(value);
}

Integrand y_integrand(const funcs::Evaluator& h, double x) {
  return [&h, x](double v, Counters& cnt) {
    ++cnt.evals;
    EvalResult r = h(x, v);
    if (!r.ok()) {
      ++cnt.faults;
      return 0.0;
    }
    return r.value;
  };
}

Integrand x_integrand(const funcs::Evaluator& h, double y) {
  return [&h, y](double u, Counters& cnt) {
    ++cnt.evals;
    EvalResult r = h(u, y);
    if (!r.ok()) {
      ++cnt.faults;
      return 0.0;
    }
    return r.value;
  };
}

}  // namespace

EvalResult integral_in_y(const funcs::Function2D& h, double x, double y_from, double y_to,
                         funcs::Rectangle rect, QuadratureSpec spec) {
  Counters cnt;
  Integrand g = y_integrand(h.eval, x);
  double v = anchored_integral(g, cnt, y_from, rect.d, y_to, spec);
  return finish(v, cnt);
}

EvalResult integral_in_x(const funcs::Function2D& h, double y, double x_from, double x_to,
                         funcs::Rectangle rect, QuadratureSpec spec) {
  Counters cnt;
  Integrand g = x_integrand(h.eval, y);
  double v = anchored_integral(g, cnt, x_from, rect.b, x_to, spec);
  return finish(v, cnt);
}

funcs::Function2D integrate_density(const funcs::Function2D& h, funcs::Rectangle rect,
                                    QuadratureSpec spec) {
  funcs::Function2D f;
  f.label = "integral(" + h.label + ")";
  f.domain = rect;
  const funcs::Evaluator density = h.eval;

  f.eval = [density, rect, spec](double x, double y) -> EvalResult {
    Counters cnt;
    Integrand outer = [&density, &rect, &spec, y, &cnt](double u, Counters& outer_cnt) {
      Integrand inner = y_integrand(density, u);
      double v = anchored_integral(inner, cnt, rect.c, rect.d, y, spec);
      ++outer_cnt.evals;
      return v;
    };
    Counters outer_cnt;
    double v = anchored_integral(outer, outer_cnt, rect.a, rect.b, x, spec);
    cnt.evals += outer_cnt.evals;  // inner faults dominate; outer evals counted too
    return finish(v, cnt);
  };
  f.d1 = [density, rect, spec](double x, double y) -> EvalResult {
    Counters cnt;
    Integrand g = y_integrand(density, x);
    return finish(anchored_integral(g, cnt, rect.c, rect.d, y, spec), cnt);
  };
  f.d2 = [density, rect, spec](double x, double y) -> EvalResult {
    Counters cnt;
    Integrand g = x_integrand(density, y);
    return finish(anchored_integral(g, cnt, rect.a, rect.b, x, spec), cnt);
  };
  f.d21 = density;
  f.d12 = density;
  return f;
}

namespace {

std::vector<double> midpoint_grid(double lo, double hi, int n) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * (i + 0.5) / n);
  return out;
}

}  // namespace

Lemma1Report verify_lemma1(const funcs::Function2D& h, funcs::Rectangle rect,
                           QuadratureSpec spec, int nx, int ny, double tol) {
  funcs::Function2D f = integrate_density(h, rect, spec);
  Lemma1Report rep;
  rep.x_samples = midpoint_grid(rect.a, rect.b, nx);
  rep.y_samples = midpoint_grid(rect.c, rect.d, ny);
  rep.total_samples = static_cast<long>(nx) * ny;

  struct Cell { double gap = 0.0; char status = 'P'; };
  std::vector<Cell> cells(static_cast<std::size_t>(rep.total_samples));
  long quad_faults = 0;

  parallel_for(cells.size(), [&](std::size_t idx) {
    const double x = rep.x_samples[idx % static_cast<std::size_t>(nx)];
    const double y = rep.y_samples[idx / static_cast<std::size_t>(nx)];
    diffnum::DerivativeEstimate est = diffnum::partial(f, Axis::x, {x, y});
    EvalResult slice = integral_in_y(h, x, rect.c, y, rect, spec);
    if (est.excluded || !slice.ok()) {
      cells[idx].status = 'X';
      return;
    }
    cells[idx].gap = std::fabs(est.value - slice.value);
  });

  long included = 0, passed = 0, excluded = 0;
  for (const Cell& c : cells) {
    if (c.status == 'X') {
      ++excluded;
      ++quad_faults;
      continue;
    }
    ++included;
    rep.max_gap = std::max(rep.max_gap, c.gap);
    if (c.gap <= tol) ++passed;
  }
  if (included == 0)
    throw QuadratureFailure("no usable sample points while checking the slice integrals");
  rep.pass_fraction = static_cast<double>(passed) / included;
  rep.excluded_fraction = static_cast<double>(excluded) / rep.total_samples;
  return rep;
}

Theorem2Report verify_theorem2(const funcs::Function2D& h, funcs::Rectangle rect,
                               QuadratureSpec spec, int nx, int ny, double tol,
                               std::vector<NodeGaps>* nodes) {
  funcs::Function2D f = integrate_density(h, rect, spec);
  Theorem2Report rep;
  rep.nx = nx;
  rep.ny = ny;
  rep.total_nodes = static_cast<long>(nx) * ny;
  rep.slice_pass_fraction.assign(static_cast<std::size_t>(nx), 0.0);

  const std::vector<double> xs = midpoint_grid(rect.a, rect.b, nx);
  const std::vector<double> ys = midpoint_grid(rect.c, rect.d, ny);

  std::vector<NodeGaps> grid(static_cast<std::size_t>(rep.total_nodes));
  parallel_for(grid.size(), [&](std::size_t idx) {
    NodeGaps& node = grid[idx];
    node.x = xs[idx % static_cast<std::size_t>(nx)];
    node.y = ys[idx / static_cast<std::size_t>(nx)];
    EvalResult hv = h(node.x, node.y);
    EvalResult sy = integral_in_y(h, node.x, rect.c, node.y, rect, spec);
    EvalResult sx = integral_in_x(h, node.y, rect.a, node.x, rect, spec);
    diffnum::DerivativeEstimate e1 = diffnum::partial(f, Axis::x, {node.x, node.y});
    diffnum::DerivativeEstimate e2 = diffnum::partial(f, Axis::y, {node.x, node.y});
    diffnum::DerivativeEstimate m21 = diffnum::mixed_iterated(f, {Axis::x, Axis::y}, {node.x, node.y});
    diffnum::DerivativeEstimate m12 = diffnum::mixed_iterated(f, {Axis::y, Axis::x}, {node.x, node.y});
    if (!hv.ok() || !sy.ok() || !sx.ok() || e1.excluded || e2.excluded || m21.excluded ||
        m12.excluded) {
      node.status = 'X';
      return;
    }
    node.a1 = std::fabs(e1.value - sy.value);
    node.a2 = std::fabs(e2.value - sx.value);
    node.b21 = std::fabs(m21.value - hv.value);
    node.b12 = std::fabs(m12.value - hv.value);
  });

  long included = 0, pass_a1 = 0, pass_a2 = 0, pass_b = 0, excluded = 0;
  std::vector<long> col_pass(static_cast<std::size_t>(nx), 0);
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    const NodeGaps& node = grid[idx];
    if (node.status == 'X') {
      ++excluded;
      continue;
    }
    ++included;
    rep.gap_a1 = std::max(rep.gap_a1, node.a1);
    rep.gap_a2 = std::max(rep.gap_a2, node.a2);
    rep.gap_b21 = std::max(rep.gap_b21, node.b21);
    rep.gap_b12 = std::max(rep.gap_b12, node.b12);
    if (node.a1 <= tol) ++pass_a1;
    if (node.a2 <= tol) ++pass_a2;
    if (node.b21 <= tol && node.b12 <= tol) {
      ++pass_b;
      ++col_pass[idx % static_cast<std::size_t>(nx)];
    }
  }
  if (included == 0)
    throw QuadratureFailure("no usable grid nodes while checking the reconstruction");
  rep.pass_a1 = static_cast<double>(pass_a1) / included;
  rep.pass_a2 = static_cast<double>(pass_a2) / included;
  rep.pass_b = static_cast<double>(pass_b) / included;
  rep.excluded_fraction = static_cast<double>(excluded) / rep.total_nodes;
  for (int i = 0; i < nx; ++i)
    rep.slice_pass_fraction[static_cast<std::size_t>(i)] =
        static_cast<double>(col_pass[static_cast<std::size_t>(i)]) / ny;
  if (nodes) *nodes = std::move(grid);
  return rep;
}

}  // namespace mixcheck::tolstov

#include "mixcheck/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "mixcheck/report_json.hpp"

namespace mixcheck::cli {

namespace {

using report::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> split_doubles(const std::string& text, char sep) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    try {
      std::size_t used = 0;
      double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw UsageError("cannot parse number '" + item + "' in '" + text + "'");
    }
  }
  return out;
}

Point parse_point(const std::string& text) {
  auto v = split_doubles(text, ',');
  if (v.size() != 2) throw UsageError("--at expects 'x,y', got '" + text + "'");
  return {v[0], v[1]};
}

funcs::Rectangle parse_rect(const std::string& text) {
  auto v = split_doubles(text, ',');
  if (v.size() != 4) throw UsageError("--rect expects 'a,b,c,d', got '" + text + "'");
  funcs::Rectangle r{v[0], v[1], v[2], v[3]};
  if (!(r.a < r.b) || !(r.c < r.d))
    throw UsageError("--rect needs a < b and c < d, got '" + text + "'");
  return r;
}

std::pair<int, int> parse_grid(const std::string& text) {
  auto xpos = text.find('x');
  if (xpos == std::string::npos)
    throw UsageError("--grid expects 'NxM', got '" + text + "'");
  try {
    int nx = std::stoi(text.substr(0, xpos));
    int ny = std::stoi(text.substr(xpos + 1));
    if (nx < 3 || ny < 3) throw UsageError("--grid dimensions must be >= 3");
    return {nx, ny};
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception&) {
    throw UsageError("--grid expects 'NxM', got '" + text + "'");
  }
}

Axis parse_axis(const std::string& text, const char* flag) {
  if (text == "x") return Axis::x;
  if (text == "y") return Axis::y;
  throw UsageError(std::string(flag) + " expects 'x' or 'y', got '" + text + "'");
}

std::vector<double> parse_radii(const std::string& text) {
  auto v = split_doubles(text, ',');
  if (v.size() < 2) throw UsageError("--radii needs at least two entries");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] <= 0) throw UsageError("--radii entries must be positive");
    if (i > 0 && v[i] >= v[i - 1])
      throw UsageError("--radii must be strictly decreasing");
  }
  return v;
}

// One function source per invocation: a builtin label, an inline expression,
// or an expression file.
struct SourceFlags {
  std::string builtin, expr_text, expr_file, rect_text;
};

void add_source_flags(CLI::App* cmd, SourceFlags& src, bool with_rect = true) {
  cmd->add_option("--builtin", src.builtin, "builtin corpus function");
  cmd->add_option("--expr", src.expr_text, "closed-form expression in x and y");
  cmd->add_option("--expr-file", src.expr_file, "file containing an expression");
  if (with_rect)
    cmd->add_option("--rect", src.rect_text,
                    "domain rectangle a,b,c,d (defaults to the builtin's)");
}

struct Resolved {
  funcs::Function2D fn;
  funcs::Rectangle rect;
  json config;
};

Resolved resolve_source(const SourceFlags& src) {
  const int sources = (!src.builtin.empty()) + (!src.expr_text.empty()) +
                      (!src.expr_file.empty());
  if (sources != 1)
    throw UsageError("exactly one of --builtin / --expr / --expr-file is required");

  Resolved rs;
  if (!src.builtin.empty()) {
    try {
      rs.fn = funcs::builtin(src.builtin);
    } catch (const funcs::UnknownBuiltin& e) {
      throw UsageError(e.what());
    }
    rs.config["function"] = {{"kind", "builtin"}, {"name", src.builtin}};
  } else {
    std::string text = src.expr_text;
    if (!src.expr_file.empty()) {
      std::ifstream is(src.expr_file);
      if (!is) throw UsageError("cannot read --expr-file " + src.expr_file);
      std::stringstream buf;
      buf << is.rdbuf();
      text = buf.str();
      while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    }
    expr::ParseResult pr = expr::parse(text);
    if (!pr.ok())
      throw UsageError("expression error at offset " +
                       std::to_string(pr.error.position) + ": " + pr.error.message);
    if (src.rect_text.empty())
      throw UsageError("--rect is required with --expr / --expr-file");
    rs.fn = funcs::from_expr(*pr.ast, parse_rect(src.rect_text), text);
    rs.config["function"] = {{"kind", "expr"}, {"source", text}};
  }
  rs.rect = src.rect_text.empty() ? rs.fn.domain : parse_rect(src.rect_text);
  rs.fn.domain = rs.rect;
  rs.config["rect"] = json::array({rs.rect.a, rs.rect.b, rs.rect.c, rs.rect.d});
  return rs;
}

void emit(json envelope, const std::string& out_path) {
  const std::string text = envelope.dump(2) + "\n";
  if (!out_path.empty()) report::write_text_atomic(out_path, text);
  std::cout << text;
}

json envelope_for(const char* command, json config) {
  return json{{"schema", 1}, {"command", command}, {"config", std::move(config)}};
}

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"numerical checks on the equality of mixed partial derivatives"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML file mirroring the flags (flags win)");

  // ---- list-builtins
  auto* list_cmd = app.add_subcommand("list-builtins", "print the corpus labels and domains");

  // ---- eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a function at a point");
  SourceFlags eval_src;
  std::string eval_at;
  add_source_flags(eval_cmd, eval_src);
  eval_cmd->add_option("--at", eval_at, "evaluation point x,y")->required();

  // ---- partials
  auto* part_cmd = app.add_subcommand("partials", "first partial derivative estimate");
  SourceFlags part_src;
  std::string part_at, part_axis = "x", part_scheme = "central", part_out;
  double part_step = 0.0;
  add_source_flags(part_cmd, part_src);
  part_cmd->add_option("--at", part_at)->required();
  part_cmd->add_option("--axis", part_axis, "x or y");
  part_cmd->add_option("--scheme", part_scheme, "central|forward|backward|richardson");
  part_cmd->add_option("--step", part_step, "initial step (0 = policy default)");
  part_cmd->add_option("--out", part_out, "write the JSON report here");

  // ---- mixed
  auto* mixed_cmd = app.add_subcommand("mixed", "mixed second derivative estimate");
  SourceFlags mixed_src;
  std::string mixed_at, mixed_order = "xy", mixed_out;
  double mixed_h = 1e-4, mixed_k = 1e-4;
  add_source_flags(mixed_cmd, mixed_src);
  mixed_cmd->add_option("--at", mixed_at)->required();
  mixed_cmd->add_option("--order", mixed_order, "xy (x first), yx, or cross");
  mixed_cmd->add_option("--step", mixed_h, "cross stencil h");
  mixed_cmd->add_option("--step2", mixed_k, "cross stencil k");
  mixed_cmd->add_option("--out", mixed_out);

  // ---- schwarz-audit
  auto* audit_cmd = app.add_subcommand(
      "schwarz-audit", "grid audit of |d2 d1 f - d1 d2 f| over the rectangle");
  SourceFlags audit_src;
  std::string audit_grid = "51x51", audit_out, audit_csv_path;
  double audit_tol = 1e-5;
  add_source_flags(audit_cmd, audit_src);
  audit_cmd->add_option("--grid", audit_grid, "grid dimensions NxM");
  audit_cmd->add_option("--tol", audit_tol, "pass tolerance");
  audit_cmd->add_option("--out", audit_out);
  audit_cmd->add_option("--csv", audit_csv_path, "write per-node CSV here");

  // ---- strongdiff
  auto* strong_cmd =
      app.add_subcommand("strongdiff", "strong differentiability verdict at a point");
  SourceFlags strong_src;
  std::string strong_at, strong_axis = "x", strong_radii, strong_out, strong_csv;
  double strong_eta = 1e-3;
  std::uint64_t strong_seed = 42;
  int strong_pairs = 64;
  add_source_flags(strong_cmd, strong_src);
  strong_cmd->add_option("--at", strong_at)->required();
  strong_cmd->add_option("--axis", strong_axis);
  strong_cmd->add_option("--radii", strong_radii,
                         "decreasing list; default 1e-1..1e-3 times the domain half-size");
  strong_cmd->add_option("--eta", strong_eta, "modulus threshold for Yes");
  strong_cmd->add_option("--seed", strong_seed);
  strong_cmd->add_option("--pairs", strong_pairs, "random pairs per radius");
  strong_cmd->add_option("--out", strong_out);
  strong_cmd->add_option("--csv", strong_csv, "write the modulus curve CSV here");

  // ---- verify-theorem1
  auto* th1_cmd = app.add_subcommand(
      "verify-theorem1", "pointwise mixed-derivative equality via strong quotients");
  SourceFlags th1_src;
  std::string th1_at, th1_radii, th1_out;
  double th1_tol = 1e-3;
  std::uint64_t th1_seed = 42;
  int th1_pairs = 64;
  add_source_flags(th1_cmd, th1_src);
  th1_cmd->add_option("--at", th1_at)->required();
  th1_cmd->add_option("--radii", th1_radii);
  th1_cmd->add_option("--tol", th1_tol);
  th1_cmd->add_option("--seed", th1_seed);
  th1_cmd->add_option("--pairs", th1_pairs);
  th1_cmd->add_option("--out", th1_out);

  // ---- lipcheck
  auto* lip_cmd = app.add_subcommand(
      "lipcheck", "uniform Lipschitz estimate of a partial-derivative slice family");
  SourceFlags lip_src;
  std::string lip_deriv = "x", lip_axis = "y", lip_out;
  int lip_slices = 9, lip_samples = 64;
  std::uint64_t lip_seed = 42;
  add_source_flags(lip_cmd, lip_src);
  lip_cmd->add_option("--deriv-axis", lip_deriv, "axis of the inner partial");
  lip_cmd->add_option("--lip-axis", lip_axis, "axis along which slices must be Lipschitz");
  lip_cmd->add_option("--slices", lip_slices);
  lip_cmd->add_option("--samples", lip_samples);
  lip_cmd->add_option("--seed", lip_seed);
  lip_cmd->add_option("--out", lip_out);

  // ---- tolstov
  auto* tol_cmd = app.add_subcommand(
      "tolstov", "reconstruct f from a density by double integration and verify it");
  std::string tol_density, tol_rect_text, tol_grid = "21x21", tol_out, tol_csv;
  double tol_tol = 1e-4;
  int tol_panels = 48, tol_levels = 40;
  tol_cmd->add_option("--density", tol_density, "builtin label or expression in x,y")->required();
  tol_cmd->add_option("--rect", tol_rect_text, "integration rectangle, default 0,1,0,1");
  tol_cmd->add_option("--grid", tol_grid);
  tol_cmd->add_option("--tol", tol_tol);
  tol_cmd->add_option("--panels", tol_panels, "anchored Simpson panels per unit length");
  tol_cmd->add_option("--levels", tol_levels, "adaptive depth of the partial panel");
  tol_cmd->add_option("--out", tol_out);
  tol_cmd->add_option("--csv", tol_csv, "write per-node gap CSV here");

  // let --config (and any shared flag) after a subcommand reach the app
  for (CLI::App* sc : app.get_subcommands([](const CLI::App*) { return true; }))
    sc->fallthrough();

  // CLI11 wants argv in reverse order, without the program name
  std::vector<std::string> rev(args.rbegin(), args.rend());
  rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    // prints a one-line diagnostic naming the flag; --help exits 0
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (list_cmd->parsed()) {
    for (const auto& name : funcs::builtin_names()) {
      funcs::Function2D f = funcs::builtin(name);
      std::cout << name << "  [" << f.domain.a << "," << f.domain.b << "]x["
                << f.domain.c << "," << f.domain.d << "]\n";
    }
    return 0;
  }

  if (eval_cmd->parsed()) {
    Resolved rs = resolve_source(eval_src);
    Point at = parse_point(eval_at);
    EvalResult r = rs.fn(at.x, at.y);
    if (!r.ok()) {
      std::cerr << "evaluation failed: " << to_string(r.fault) << "\n";
      return 2;
    }
    std::cout << expr::format_double(r.value) << "\n";
    return 0;
  }

  if (part_cmd->parsed()) {
    Resolved rs = resolve_source(part_src);
    Point at = parse_point(part_at);
    Axis ax = parse_axis(part_axis, "--axis");
    diffnum::Scheme scheme;
    if (part_scheme == "central") scheme = diffnum::Scheme::central;
    else if (part_scheme == "forward") scheme = diffnum::Scheme::forward;
    else if (part_scheme == "backward") scheme = diffnum::Scheme::backward;
    else if (part_scheme == "richardson") scheme = diffnum::Scheme::richardson;
    else throw UsageError("unknown --scheme '" + part_scheme + "'");
    if (part_step < 0) throw UsageError("--step must be >= 0");
    json cfg = rs.config;
    cfg["at"] = json::array({at.x, at.y});
    cfg["axis"] = part_axis;
    cfg["scheme"] = part_scheme;
    cfg["step"] = part_step;
    json env = envelope_for("partials", cfg);
    env["estimate"] = report::to_json(diffnum::partial(rs.fn, ax, at, scheme, part_step));
    emit(env, part_out);
    return 0;
  }

  if (mixed_cmd->parsed()) {
    Resolved rs = resolve_source(mixed_src);
    Point at = parse_point(mixed_at);
    json cfg = rs.config;
    cfg["at"] = json::array({at.x, at.y});
    cfg["order"] = mixed_order;
    diffnum::DerivativeEstimate est;
    if (mixed_order == "xy") est = diffnum::mixed_iterated(rs.fn, {Axis::x, Axis::y}, at);
    else if (mixed_order == "yx") est = diffnum::mixed_iterated(rs.fn, {Axis::y, Axis::x}, at);
    else if (mixed_order == "cross") {
      if (mixed_h <= 0 || mixed_k <= 0) throw UsageError("--step/--step2 must be > 0");
      cfg["step"] = mixed_h;
      cfg["step2"] = mixed_k;
      est = diffnum::mixed_cross(rs.fn, at, mixed_h, mixed_k);
    } else {
      throw UsageError("--order expects xy, yx or cross, got '" + mixed_order + "'");
    }
    json env = envelope_for("mixed", cfg);
    env["estimate"] = report::to_json(est);
    emit(env, mixed_out);
    return 0;
  }

  if (audit_cmd->parsed()) {
    Resolved rs = resolve_source(audit_src);
    auto [nx, ny] = parse_grid(audit_grid);
    if (audit_tol <= 0) throw UsageError("--tol must be > 0");
    json cfg = rs.config;
    cfg["grid"] = json::array({nx, ny});
    cfg["tol"] = audit_tol;
    std::vector<diffnum::AuditNode> nodes;
    diffnum::SchwarzAuditReport rep = diffnum::schwarz_audit(
        rs.fn, rs.rect, nx, ny, audit_tol, audit_csv_path.empty() ? nullptr : &nodes);
    json env = envelope_for("schwarz-audit", cfg);
    env["report"] = report::to_json(rep);
    emit(env, audit_out);
    if (!audit_csv_path.empty())
      report::write_text_atomic(audit_csv_path, report::audit_csv(nodes));
    return 0;
  }

  // default radii scale with the domain so the schedule stays interior
  auto scaled_default_radii = [](const funcs::Rectangle& r) {
    return strongdiff::default_radii(std::max(r.width(), r.height()) / 2.0);
  };

  if (strong_cmd->parsed()) {
    Resolved rs = resolve_source(strong_src);
    Point at = parse_point(strong_at);
    Axis ax = parse_axis(strong_axis, "--axis");
    if (strong_eta <= 0) throw UsageError("--eta must be > 0");
    if (strong_pairs < 16) throw UsageError("--pairs must be >= 16");
    std::vector<double> radii = strong_radii.empty() ? scaled_default_radii(rs.rect)
                                                     : parse_radii(strong_radii);
    strongdiff::SamplerParams sp{strong_seed, strong_pairs};
    json cfg = rs.config;
    cfg["at"] = json::array({at.x, at.y});
    cfg["axis"] = strong_axis;
    cfg["radii"] = radii;
    cfg["eta"] = strong_eta;
    cfg["seed"] = strong_seed;
    cfg["pairs"] = strong_pairs;
    strongdiff::Verdict v = strongdiff::is_strongly_differentiable(
        strongdiff::family_of(rs.fn, ax), at, ax, radii, strong_eta, sp);
    json env = envelope_for("strongdiff", cfg);
    env["verdict"] = report::to_json(v);
    emit(env, strong_out);
    if (!strong_csv.empty())
      report::write_text_atomic(strong_csv, report::curve_csv(v.evidence));
    return 0;
  }

  if (th1_cmd->parsed()) {
    Resolved rs = resolve_source(th1_src);
    Point at = parse_point(th1_at);
    if (th1_tol <= 0) throw UsageError("--tol must be > 0");
    if (th1_pairs < 16) throw UsageError("--pairs must be >= 16");
    std::vector<double> radii =
        th1_radii.empty() ? scaled_default_radii(rs.rect) : parse_radii(th1_radii);
    strongdiff::SamplerParams sp{th1_seed, th1_pairs};
    json cfg = rs.config;
    cfg["at"] = json::array({at.x, at.y});
    cfg["radii"] = radii;
    cfg["tol"] = th1_tol;
    cfg["seed"] = th1_seed;
    cfg["pairs"] = th1_pairs;
    strongdiff::Theorem1Report rep = strongdiff::verify_theorem1(rs.fn, at, radii, th1_tol, sp);
    json env = envelope_for("verify-theorem1", cfg);
    env["report"] = report::to_json(rep);
    emit(env, th1_out);
    return 0;
  }

  if (lip_cmd->parsed()) {
    Resolved rs = resolve_source(lip_src);
    Axis da = parse_axis(lip_deriv, "--deriv-axis");
    Axis la = parse_axis(lip_axis, "--lip-axis");
    if (da == la) throw UsageError("--deriv-axis and --lip-axis must differ");
    if (lip_slices < 3) throw UsageError("--slices must be >= 3");
    if (lip_samples < 8) throw UsageError("--samples must be >= 8");
    json cfg = rs.config;
    cfg["deriv_axis"] = lip_deriv;
    cfg["lip_axis"] = lip_axis;
    cfg["slices"] = lip_slices;
    cfg["samples"] = lip_samples;
    cfg["seed"] = lip_seed;
    lipcheck::UniformLipschitzReport rep = lipcheck::uniform_partial_lipschitz(
        rs.fn, da, la, rs.rect, lip_slices, lip_samples, lip_seed);
    json env = envelope_for("lipcheck", cfg);
    env["report"] = report::to_json(rep);
    emit(env, lip_out);
    return 0;
  }

  if (tol_cmd->parsed()) {
    // --density takes a builtin label or an inline expression
    SourceFlags src;
    bool is_builtin = false;
    for (const auto& name : funcs::builtin_names()) is_builtin |= (name == tol_density);
    if (is_builtin) src.builtin = tol_density;
    else src.expr_text = tol_density;
    src.rect_text = tol_rect_text.empty() ? (is_builtin ? "" : "0,1,0,1") : tol_rect_text;
    Resolved rs = resolve_source(src);
    auto [nx, ny] = parse_grid(tol_grid);
    if (tol_tol <= 0) throw UsageError("--tol must be > 0");
    if (tol_panels < 8 || tol_panels % 2 != 0)
      throw UsageError("--panels must be even and >= 8");
    if (tol_levels < 1) throw UsageError("--levels must be >= 1");
    tolstov::QuadratureSpec spec{tol_panels, tol_levels};
    json cfg = rs.config;
    cfg["grid"] = json::array({nx, ny});
    cfg["tol"] = tol_tol;
    cfg["panels"] = tol_panels;
    cfg["refinement_levels"] = tol_levels;
    std::vector<tolstov::NodeGaps> nodes;
    tolstov::Lemma1Report lem = tolstov::verify_lemma1(rs.fn, rs.rect, spec, nx, ny, tol_tol);
    tolstov::Theorem2Report th2 = tolstov::verify_theorem2(
        rs.fn, rs.rect, spec, nx, ny, tol_tol, tol_csv.empty() ? nullptr : &nodes);
    json env = envelope_for("tolstov", cfg);
    env["lemma1"] = report::to_json(lem);
    env["theorem2"] = report::to_json(th2);
    emit(env, tol_out);
    if (!tol_csv.empty()) report::write_text_atomic(tol_csv, report::gaps_csv(nodes));
    return 0;
  }

  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  try {
    return dispatch(args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const strongdiff::InsufficientSamples& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 2;
  } catch (const tolstov::QuadratureFailure& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 2;
  } catch (const lipcheck::AllSlicesExcluded& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace mixcheck::cli

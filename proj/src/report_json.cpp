#include "mixcheck/report_json.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "mixcheck/expr.hpp"

namespace mixcheck::report {

namespace {

json point_json(Point p) { return json::array({p.x, p.y}); }

std::string csv_num(double v) { return expr::format_double(v); }

}  // namespace

json to_json(const diffnum::DerivativeEstimate& e) {
  return json{
      {"value", e.value},
      {"step", e.step},
      {"scheme", diffnum::to_string(e.scheme)},
      {"error_indicator", e.error_indicator},
      {"excluded", e.excluded},
  };
}

json to_json(const diffnum::SchwarzAuditReport& r) {
  return json{
      {"grid", {{"nx", r.nx}, {"ny", r.ny}}},
      {"tol", r.tol},
      {"mismatch_fraction", r.mismatch_fraction},
      {"pass_fraction", r.pass_fraction},
      {"excluded_fraction", r.excluded_fraction},
      {"max_discrepancy", r.max_discrepancy},
      {"argmax_point", point_json(r.argmax_point)},
      {"row_mismatch_fraction", r.row_mismatch_fraction},
      {"col_mismatch_fraction", r.col_mismatch_fraction},
      {"counts",
       {{"total", r.total_nodes},
        {"pass", r.pass_nodes},
        {"mismatch", r.mismatch_nodes},
        {"excluded", r.excluded_nodes}}},
  };
}

json to_json(const strongdiff::ModulusCurve& c) {
  return json{
      {"point", point_json(c.point)},
      {"axis", to_string(c.axis)},
      {"candidate_L", c.candidate_slope},
      {"radii", c.radii},
      {"modulus", c.modulus},
      {"pair_count", c.pair_count},
      {"min_separation", c.min_separation},
  };
}

json to_json(const strongdiff::Verdict& v) {
  json j{
      {"outcome", strongdiff::to_string(v.outcome)},
      {"eta", v.eta},
      {"curve", to_json(v.evidence)},
  };
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

json to_json(const strongdiff::Theorem1Report& r) {
  return json{
      {"point", point_json(r.point)},
      {"strong_d21", {{"L", r.d21.slope}, {"modulus", r.d21.modulus}}},
      {"strong_d12", {{"L", r.d12.slope}, {"modulus", r.d12.modulus}}},
      {"existence_fraction_of_A", r.existence_fraction},
      {"equality_gap", r.equality_gap},
      {"curve_d21", to_json(r.curve_d21)},
      {"curve_d12", to_json(r.curve_d12)},
  };
}

json to_json(const lipcheck::UniformLipschitzReport& r) {
  return json{
      {"K_hat", r.k_hat},
      {"worst_slice", r.worst_slice},
      {"witness_pair", json::array({point_json(r.witness_a), point_json(r.witness_b)})},
      {"slices_tested", r.slices_tested},
      {"excluded_slices", r.excluded_slices},
  };
}

json to_json(const tolstov::Lemma1Report& r) {
  return json{
      {"x_samples", r.x_samples},
      {"y_samples", r.y_samples},
      {"max_gap", r.max_gap},
      {"pass_fraction", r.pass_fraction},
      {"excluded_fraction", r.excluded_fraction},
      {"total_samples", r.total_samples},
  };
}

json to_json(const tolstov::Theorem2Report& r) {
  return json{
      {"grid", {{"nx", r.nx}, {"ny", r.ny}}},
      {"gaps",
       {{"a1", r.gap_a1}, {"a2", r.gap_a2}, {"b21", r.gap_b21}, {"b12", r.gap_b12}}},
      {"pass_fractions", {{"a1", r.pass_a1}, {"a2", r.pass_a2}, {"b", r.pass_b}}},
      {"excluded_fraction", r.excluded_fraction},
      {"slice_pass_fraction", r.slice_pass_fraction},
      {"total_nodes", r.total_nodes},
  };
}

std::string audit_csv(const std::vector<diffnum::AuditNode>& nodes) {
  std::string out = "x,y,d21,d12,delta,status\n";
  for (const auto& n : nodes) {
    out += csv_num(n.x);
    out += ',';
    out += csv_num(n.y);
    out += ',';
    out += csv_num(n.d21);
    out += ',';
    out += csv_num(n.d12);
    out += ',';
    out += csv_num(n.delta);
    out += ',';
    out += n.status;
    out += '\n';
  }
  return out;
}

std::string curve_csv(const strongdiff::ModulusCurve& c) {
  std::string out = "delta,modulus,pairs\n";
  for (std::size_t i = 0; i < c.radii.size(); ++i) {
    out += csv_num(c.radii[i]);
    out += ',';
    out += csv_num(c.modulus[i]);
    out += ',';
    out += std::to_string(c.pair_count[i]);
    out += '\n';
  }
  return out;
}

std::string gaps_csv(const std::vector<tolstov::NodeGaps>& nodes) {
  std::string out = "x,y,gap_a1,gap_a2,gap_b21,gap_b12,status\n";
  for (const auto& n : nodes) {
    out += csv_num(n.x);
    out += ',';
    out += csv_num(n.y);
    out += ',';
    out += csv_num(n.a1);
    out += ',';
    out += csv_num(n.a2);
    out += ',';
    out += csv_num(n.b21);
    out += ',';
    out += csv_num(n.b12);
    out += ',';
    out += n.status;
    out += '\n';
  }
  return out;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open for writing: " + tmp);
    os << content;
    if (!os) throw std::runtime_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("rename failed: " + path);
}

}  // namespace mixcheck::report

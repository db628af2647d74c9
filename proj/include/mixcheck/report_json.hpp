#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mixcheck/diffnum.hpp"
#include "mixcheck/lipcheck.hpp"
#include "mixcheck/strongdiff.hpp"
#include "mixcheck/tolstov.hpp"

namespace mixcheck::report {

using nlohmann::json;

json to_json(const diffnum::DerivativeEstimate& e);
json to_json(const diffnum::SchwarzAuditReport& r);
json to_json(const strongdiff::ModulusCurve& c);
json to_json(const strongdiff::Verdict& v);
json to_json(const strongdiff::Theorem1Report& r);
json to_json(const lipcheck::UniformLipschitzReport& r);
json to_json(const tolstov::Lemma1Report& r);
json to_json(const tolstov::Theorem2Report& r);

// CSV emitters; fixed column order, documented in docs/reports.md.
std::string audit_csv(const std::vector<diffnum::AuditNode>& nodes);
std::string curve_csv(const strongdiff::ModulusCurve& c);
std::string gaps_csv(const std::vector<tolstov::NodeGaps>& nodes);

/// Writes via a temp file in the target directory, then renames.
void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace mixcheck::report

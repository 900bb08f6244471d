#pragma once

#include <json.hpp>

#include "pointproc/report.hpp"

namespace pointproc {

inline nlohmann::json to_json(const IdentityReport& r) {
  nlohmann::json j;
  j["identity"] = r.identity;
  j["mode"] = to_string(r.mode);
  j["lhs"] = r.lhs;
  j["lhs_se"] = r.lhs_se;
  j["rhs"] = r.rhs;
  j["rhs_se"] = r.rhs_se;
  j["combined_se"] = r.combined_se;
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  if (!r.terms.empty()) {
    nlohmann::json terms = nlohmann::json::array();
    for (const TermValue& t : r.terms)
      terms.push_back({{"label", t.label}, {"value", t.value}, {"se", t.se}});
    j["terms"] = terms;
  }
  if (!r.notes.empty()) j["notes"] = r.notes;
  return j;
}

}  // namespace pointproc

#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace pointproc {

enum class CheckMode { Exact, MonteCarlo };

inline const char* to_string(CheckMode m) {
  return m == CheckMode::Exact ? "exact" : "mc";
}

struct TermValue {
  std::string label;
  double value = 0.0;
  double se = 0.0;
};

// Outcome of one identity check: both sides, error bars, verdict.
struct IdentityReport {
  std::string identity;
  CheckMode mode = CheckMode::Exact;
  double lhs = 0.0;
  double lhs_se = 0.0;
  double rhs = 0.0;
  double rhs_se = 0.0;
  double combined_se = 0.0;  // se of (lhs - rhs); paired when both sides share samples
  double tolerance = 0.0;    // exact mode: relative tolerance; mc mode: z_crit
  bool pass = false;
  std::vector<TermValue> terms;
  std::vector<std::string> notes;

  double abs_error() const { return std::fabs(lhs - rhs); }

  static IdentityReport exact(std::string name, double lhs, double rhs, double rel_tol) {
    IdentityReport r;
    r.identity = std::move(name);
    r.mode = CheckMode::Exact;
    r.lhs = lhs;
    r.rhs = rhs;
    r.tolerance = rel_tol;
    r.pass = std::fabs(lhs - rhs) <= rel_tol * (1.0 + std::fabs(lhs));
    return r;
  }

  static IdentityReport monte_carlo(std::string name, double lhs, double lhs_se, double rhs,
                                    double rhs_se, double combined_se, double z_crit) {
    IdentityReport r;
    r.identity = std::move(name);
    r.mode = CheckMode::MonteCarlo;
    r.lhs = lhs;
    r.lhs_se = lhs_se;
    r.rhs = rhs;
    r.rhs_se = rhs_se;
    r.combined_se = combined_se;
    r.tolerance = z_crit;
    if (combined_se > 0.0) {
      r.pass = std::fabs(lhs - rhs) <= z_crit * combined_se;
    } else {
      // Both sides came out deterministic; hold them to near round-off.
      r.pass = std::fabs(lhs - rhs) <= 1e-9 * (1.0 + std::fabs(lhs));
    }
    return r;
  }
};

inline std::string csv_header() { return "identity,mode,lhs,rhs,stderr,tolerance,pass"; }

inline std::string csv_row(const IdentityReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << r.identity << ',' << to_string(r.mode) << ',' << r.lhs << ',' << r.rhs << ','
     << r.combined_se << ',' << r.tolerance << ',' << (r.pass ? "true" : "false");
  return os.str();
}

}  // namespace pointproc

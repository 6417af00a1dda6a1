#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qlpairs {

struct AcceptanceResult {
  std::string name;
  bool pass = false;
  bool gating = true;  // informational rows never fail the suite
  std::string detail;
};

struct AcceptanceTable {
  std::vector<AcceptanceResult> results;
  bool all_pass() const {
    for (const auto& r : results)
      if (r.gating && !r.pass) return false;
    return true;
  }
};

/// Runs the acceptance battery. "fast" covers the counting oracle and the
/// exact subalgebra checks; "full" runs every criterion at its stated
/// tolerance. Progress lines go to `out`.
AcceptanceTable run_acceptance(const std::string& level, std::ostream& out);

}  // namespace qlpairs

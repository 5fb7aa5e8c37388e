#pragma once

// The thirteen acceptance criteria, each run at its stated tolerance and
// reported as one PASS/FAIL line.

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

namespace ltm {

enum class Profile { Smoke, Desk, Deep };

Profile parse_profile(const std::string& name);
std::string profile_name(Profile p);

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string measured;
  std::string expected;
  std::vector<std::string> notes;  // supplementary diagnostics, not asserted
  double seconds = 0;
};

struct AcceptanceReport {
  Profile profile = Profile::Desk;
  std::uint64_t seed = 1;
  std::vector<CriterionResult> results;

  bool all_pass() const;
};

/// Runs the criteria listed in `only` (all when empty). When `log` is given,
/// each line is printed as soon as its criterion finishes.
AcceptanceReport run_acceptance(Profile profile, std::uint64_t seed, const std::set<int>& only = {},
                                std::ostream* log = nullptr);

std::string format_result(const CriterionResult& r);

}  // namespace ltm

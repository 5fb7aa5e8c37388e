#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ltm {

/// A forward orbit did not come back to S within the configured cap. Seen for
/// points pinned (or nearly pinned) to the invariant boundary circles.
class ReturnTimeOverflow : public std::runtime_error {
 public:
  ReturnTimeOverflow(std::int64_t cap, const std::string& where)
      : std::runtime_error("no return to S within " + std::to_string(cap) + " steps (" + where + ")"),
        cap_(cap) {}
  std::int64_t cap() const { return cap_; }

 private:
  std::int64_t cap_;
};

class NoCrossingFound : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class BranchMismatch : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class NotHyperbolic : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class ResolutionExceeded : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ltm

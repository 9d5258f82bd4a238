#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace spindyn {

/// Numerical-integrity violation (trace drift, Hermiticity loss, negativity
/// beyond tolerance). Maps to CLI exit code 3.
class integrity_error : public std::runtime_error {
 public:
  explicit integrity_error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid experiment configuration. Carries every violated constraint so a
/// single validation pass reports all problems at once. Maps to exit code 2.
class config_error : public std::runtime_error {
 public:
  explicit config_error(std::vector<std::string> violations)
      : std::runtime_error(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "invalid configuration:";
    for (const auto& s : v) {
      out += "\n  - " + s;
    }
    return out;
  }
  std::vector<std::string> violations_;
};

}  // namespace spindyn

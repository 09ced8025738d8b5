#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rtetr {

/// Invalid arguments, shape mismatches, malformed configuration.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative solver or time stepper failed (non-convergence, NaN, divergence).
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double last_residual = 0.0)
      : std::runtime_error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

using WarningSink = std::function<void(std::string_view)>;

// Warnings go to std::clog unless a sink is installed. Not synchronized;
// install once at startup.
void set_warning_sink(WarningSink sink);
void warn(std::string_view message);

}  // namespace rtetr

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"
#include "setup.hpp"

namespace rtetr::experiment {

enum ExitCode : int { kOk = 0, kConfigError = 1, kSolverError = 2, kValidationError = 3 };

struct RunOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  bool allow_inverse_crime = false;
};

/// Runs one CLI command and returns its exit code. Progress goes to `log`,
/// errors to `err`.
int run(const std::string& command, const RunOptions& options, std::ostream& log,
        std::ostream& err);

struct InversionOutcome {
  Field truth;
  Measurement data;
  Field reconstruction;
  std::optional<ReconstructionReport> neumann;
  std::optional<FredholmReport> fredholm;
  double relative_error = 0.0;
  bool inverse_crime = false;
};

/// Synthetic-data inversion. Unless `allow_inverse_crime`, data come from a
/// grid refined by 2 in space and time.
InversionOutcome run_inversion(const ExperimentConfig& config, const Setup& setup,
                               bool allow_inverse_crime);

struct Check {
  std::string name;
  bool passed = true;
  double value = 0.0;
  double limit = 0.0;
  std::string detail;
  bool informational = false;  // reported, never a violation
};

std::vector<Check> validation_suite(const ExperimentConfig& config, const Setup& setup,
                                    std::uint64_t seed);

void print_regime(std::ostream& os, const RegimeReport& regime);

}  // namespace rtetr::experiment

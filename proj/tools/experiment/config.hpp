#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "rtetr/control.hpp"
#include "rtetr/phase_grid.hpp"
#include "rtetr/timereversal.hpp"

namespace rtetr::experiment {

/// Malformed or inconsistent configuration (CLI exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Analytic field profile evaluated at cell centres.
struct ProfileSpec {
  std::string kind = "gaussian";  // gaussian | box | ring | zero | random | file
  std::array<double, 2> center{0.5, 0.5};
  double width = 0.1;       // gaussian std-dev, box half-width, ring thickness
  double radius = 0.25;     // ring radius
  double amplitude = 1.0;
  double anisotropy = 0.0;  // multiplies by (1 + anisotropy * theta_x)
  std::filesystem::path path;
};

struct CoefficientProfile {
  std::string name;  // empty, gaussian-bump or two-disk
  double amplitude = 1.0;
  std::vector<std::array<double, 2>> centers;
  double width = 0.15;  // bump std-dev or disk radius
};

struct MediumSpec {
  double mu_a = 0.0;
  double mu_s = 0.0;
  CoefficientProfile profile;
  std::filesystem::path mu_a_file;
  std::filesystem::path mu_s_file;
  std::string kernel = "isotropic";  // isotropic | hg | table
  double g = 0.0;
  std::filesystem::path kernel_table;
};

struct TimeSpec {
  std::optional<double> tau;  // empty: auto
  std::optional<double> dt;   // empty: auto
  double cfl_safety = kDefaultCflSafety;
};

struct SimulateSpec {
  std::size_t record_every = 0;
};

struct InvertSpec {
  int n_iter = 20;
  Lift lift = Lift::Zero;
  std::string method = "neumann";  // neumann | fredholm
  double tol = 1e-8;
  int max_iter = 200;
  bool inverse_crime_guard = true;
};

struct ControlSpec {
  ProfileSpec target;
  double tol = 1e-3;
  int max_iter = 200;
  AdjointMode adjoint = AdjointMode::ExactDiscrete;
  double tikhonov = 0.0;
};

struct SpectrumSpec {
  int iters = 20;
  std::vector<double> multiples{1.0, 2.0, 3.0};  // times in units of T
};

struct ValidateSpec {
  int n_random = 3;
};

struct ExperimentConfig {
  std::string name;
  GeometryConfig geometry;
  MediumSpec medium;
  TimeSpec time;
  ProfileSpec initial;
  SimulateSpec simulate;
  InvertSpec invert;
  ControlSpec control;
  SpectrumSpec spectrum;
  ValidateSpec validate;
  std::filesystem::path output = "out";
  std::uint64_t seed = 1;
  std::filesystem::path source;  // the config file itself
};

/// Parses a YAML config; relative paths resolve against the file's directory.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});

/// Every external file the config refers to (config file first).
std::vector<std::filesystem::path> referenced_files(const ExperimentConfig& config);

nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace rtetr::experiment

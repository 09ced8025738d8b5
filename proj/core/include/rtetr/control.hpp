#pragma once

#include <string>
#include <vector>

#include "rtetr/evolution.hpp"
#include "rtetr/medium.hpp"
#include "rtetr/phase_grid.hpp"

namespace rtetr {

enum class AdjointMode { ExactDiscrete, PaperFormula };

std::string to_string(AdjointMode mode);
AdjointMode adjoint_mode_from_string(const std::string& name);

/// Final state of a direct run from rest driven by the inflow trace `h`.
/// `h` must hold n_steps + 1 samples; sample n feeds step n.
Field steer(const PhaseSpaceGrid& grid, const Medium& medium, const BoundaryTrace& h);
Field steer(const PhaseSpaceGrid& grid, const Medium& medium, const BoundaryTrace& h, double tau,
            double cfl_safety = kDefaultCflSafety);

/// Adjoint of `steer` as an inflow trace with n_steps + 1 samples.
///
/// ExactDiscrete is the transpose of the discrete map in the V0 and
/// L2([0, tau]; T) inner products. PaperFormula is (c / l) U Lambda V g, the
/// continuum composition scaled to the same units; the two differ by one
/// time step.
BoundaryTrace adjoint_steer(const PhaseSpaceGrid& grid, const Medium& medium, const Field& g,
                            const TimeGrid& time, AdjointMode mode = AdjointMode::ExactDiscrete);
BoundaryTrace adjoint_steer(const PhaseSpaceGrid& grid, const Medium& medium, const Field& g,
                            double tau, AdjointMode mode = AdjointMode::ExactDiscrete,
                            double cfl_safety = kDefaultCflSafety);

struct ControlOptions {
  double tol = 1e-3;
  int max_iter = 200;
  double tikhonov = 0.0;  // solves (Y Y* + eps I) w = v*
  double cfl_safety = kDefaultCflSafety;
};

struct ControlSolveReport {
  BoundaryTrace h_min;
  int cg_iterations = 0;
  std::vector<double> residual_history;
  double achieved = 0.0;  // |Y h_min - v*| / |v*|
  bool converged = false;
  Field reached;          // Y h_min
};

/// Conjugate gradients on Y Y* w = v*, h_min = Y* w (exact discrete adjoint).
/// Non-convergence is reported through `converged`/`achieved`, not thrown.
ControlSolveReport min_norm_control(const PhaseSpaceGrid& grid, const Medium& medium,
                                    const Field& v_star, double tau,
                                    const ControlOptions& options = {});

}  // namespace rtetr

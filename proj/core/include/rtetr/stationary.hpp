#pragma once

#include <optional>
#include <vector>

#include "rtetr/medium.hpp"
#include "rtetr/phase_grid.hpp"

namespace rtetr {

struct StationarySpec {
  Field source;                         // f (direct) or rho (reversed)
  std::optional<BoundaryTrace> inflow;  // ghost values on the inflow part
  std::size_t inflow_sample = 0;        // which time sample of `inflow` to use
  double tol = 0.0;                     // 0 selects 1e-10 * (1 + |source|)
  int max_sweeps = 500;
};

struct StationaryResult {
  Field solution;
  int sweeps = 0;
  double residual = 0.0;
  std::vector<double> history;  // residual after each sweep
};

/// Source iteration for theta.grad u + mu_a u + mu_s (I - K) u = f / l.
StationaryResult solve_stationary_direct_report(const PhaseSpaceGrid& grid, const Medium& medium,
                                                const StationarySpec& spec);
Field solve_stationary_direct(const PhaseSpaceGrid& grid, const Medium& medium,
                              const StationarySpec& spec);

/// Source iteration for theta.grad psi - mu_a psi - mu_s (I - K*) psi = rho / l.
/// Warns when the weak-scattering condition fails.
StationaryResult solve_stationary_reversed_report(const PhaseSpaceGrid& grid, const Medium& medium,
                                                  const StationarySpec& spec);
Field solve_stationary_reversed(const PhaseSpaceGrid& grid, const Medium& medium,
                                const StationarySpec& spec);

/// V0 norm of the discrete equation residual, evaluated from scratch.
double stationary_residual(const PhaseSpaceGrid& grid, const Medium& medium, const Field& u,
                           const StationarySpec& spec, bool reversed);

/// phi = l (theta.grad psi - (mu_a + mu_s) psi), zero inflow ghosts.
Field infsup_witness(const PhaseSpaceGrid& grid, const Medium& medium, const Field& psi);

}  // namespace rtetr

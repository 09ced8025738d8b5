#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rtetr/evolution.hpp"
#include "rtetr/medium.hpp"
#include "rtetr/phase_grid.hpp"

namespace rtetr {

/// Outflow trace of a direct run, one sample per step including t = 0.
struct Measurement {
  BoundaryTrace trace;
  double tau = 0.0;
  double dt = 0.0;
  std::size_t n_steps = 0;
};

enum class Lift { Zero, Stationary };

std::string to_string(Lift lift);
Lift lift_from_string(const std::string& name);

Measurement measure(const PhaseSpaceGrid& grid, const Medium& medium, const Field& u0, double tau,
                    double cfl_safety = kDefaultCflSafety);
Measurement measure(const PhaseSpaceGrid& grid, const Medium& medium, const Field& u0,
                    const TimeGrid& time);

/// Reverses time and maps every direction to its opposite; outflow becomes inflow.
BoundaryTrace reflect_time(const PhaseSpaceGrid& grid, const BoundaryTrace& h);
Trajectory reflect_time(const PhaseSpaceGrid& grid, const Trajectory& trajectory);
/// (V f)(x, theta) = f(x, -theta)
Field reflect_angle(const PhaseSpaceGrid& grid, const Field& f);

/// G h: reversed run driven by the reflected trace, angle-reflected at the end.
///
/// Step m of the reversed run reads sample m + 1 of U h, which lines the
/// ghost values up with the cells they left in the direct run (the reversal
/// is exact in vacuum at unit Courant number).
Field time_reversal(const PhaseSpaceGrid& grid, const Medium& medium, const Measurement& h,
                    Lift lift = Lift::Zero);

/// u0 - G Lambda u0
Field apply_Q(const PhaseSpaceGrid& grid, const Medium& medium, const Field& u0, double tau,
              Lift lift = Lift::Zero, double cfl_safety = kDefaultCflSafety);
/// V R(tau) V S(tau) u0
Field apply_Q_composition(const PhaseSpaceGrid& grid, const Medium& medium, const Field& u0,
                          double tau, double cfl_safety = kDefaultCflSafety);

/// Exact transposes (in V0 and the L2([0, tau]; T) inner product) of the
/// discrete Lambda and of G with lift = Zero.
Field measure_adjoint(const PhaseSpaceGrid& grid, const Medium& medium, const BoundaryTrace& y);
BoundaryTrace time_reversal_adjoint(const PhaseSpaceGrid& grid, const Medium& medium,
                                    const Field& x, std::size_t n_steps, double dt);

struct ReconstructionReport {
  std::vector<double> increments;     // |u^(n) - u^(n-1)|_V0, first entry |u^(0)|
  std::vector<double> increments_v1;  // same in V1 (Stationary lift only)
  std::vector<double> errors;         // |u^(n) - truth|_V0 / |truth|_V0 when truth is given
  std::vector<double> ratios;         // increments[n] / increments[n-1]
  double contraction_estimate = 0.0;
  bool converged = false;
  bool diverged = false;
  int iterations = 0;
  Field final;
};

struct NeumannOptions {
  int n_iter = 20;
  Lift lift = Lift::Zero;
  double tol = 0.0;  // stop when an increment drops below tol * |u^(0)|
  std::optional<Field> ground_truth;
};

ReconstructionReport reconstruct_neumann(const PhaseSpaceGrid& grid, const Medium& medium,
                                         const Measurement& h, const NeumannOptions& options);

struct FredholmReport {
  Field solution;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  std::vector<double> history;
};

/// GMRES(30) on (I - Q) u0 = G h with lift = Zero, zero initial guess. The
/// report variant returns the last iterate when the tolerance is not met;
/// solve_fredholm throws SolverError instead.
FredholmReport solve_fredholm_report(const PhaseSpaceGrid& grid, const Medium& medium,
                                     const Measurement& h, double tol, int max_iter);
Field solve_fredholm(const PhaseSpaceGrid& grid, const Medium& medium, const Measurement& h,
                     double tol, int max_iter);

/// Power-iteration estimate of |Q(tau)|: V0 operator norm for lift = Zero,
/// dominant growth ratio in V1 for lift = Stationary.
double contraction_factor(const PhaseSpaceGrid& grid, const Medium& medium, double tau, Lift lift,
                          int iters, std::uint64_t seed, double cfl_safety = kDefaultCflSafety);

}  // namespace rtetr

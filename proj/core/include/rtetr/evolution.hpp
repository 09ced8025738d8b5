#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rtetr/medium.hpp"
#include "rtetr/phase_grid.hpp"

namespace rtetr {

/// Which transport equation a stepper advances.
enum class Problem {
  Direct,             // (1/c) u_t + theta.grad u + mu_a u + mu_s (I - K) u = f / l
  Reversed,           // (1/c) psi_t + theta.grad psi - mu_a psi - mu_s (I - K*) psi = rho / l
  BallisticDirect,    // scattering removed, total attenuation mu_a + mu_s
  BallisticReversed,  // scattering removed, total growth mu_a + mu_s
};

inline constexpr double kDefaultCflSafety = 0.9;

/// Largest stable explicit step times `cfl_safety`:
/// cfl_safety / (c * max_k sum_axis |theta_k,axis| / h_axis).
/// On the rod this is cfl_safety * dx / c.
double cfl_timestep(const PhaseSpaceGrid& grid, double cfl_safety = kDefaultCflSafety);

struct TimeGrid {
  std::size_t n_steps = 0;
  double dt = 0.0;
  double tau() const noexcept { return static_cast<double>(n_steps) * dt; }
};

/// Uniform steps covering [0, tau] exactly with dt <= cfl_timestep(grid, cfl_safety).
TimeGrid make_time_grid(const PhaseSpaceGrid& grid, double tau,
                        double cfl_safety = kDefaultCflSafety);

struct EvolutionSpec {
  double tau = 0.0;
  double dt = 0.0;
  /// Empty: no forcing. One field: constant forcing. Otherwise one field per step.
  std::vector<Field> forcing;
  /// Inflow trace with at least n_steps samples; sample n feeds step n -> n+1.
  std::optional<BoundaryTrace> inflow;
  bool record_trace = true;
  /// Snapshot stride; 0 keeps only the initial and final states.
  std::size_t record_every = 0;

  static EvolutionSpec over(const PhaseSpaceGrid& grid, double tau,
                            double cfl_safety = kDefaultCflSafety);
  std::size_t n_steps() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<std::size_t> steps;
  std::vector<Field> snapshots;
  Field final;
  BoundaryTrace outflow;  // n_steps + 1 samples when recorded
  std::size_t n_steps = 0;
  double dt = 0.0;
};

/// One explicit Euler step with first-order upwinding, and its exact transpose.
class TransportStepper {
 public:
  TransportStepper(const PhaseSpaceGrid& grid, const Medium& medium, double dt, Problem problem);

  /// out = u - c dt [D u + reaction(u)] + (c dt / l) forcing, with inflow
  /// sample n as upwind ghosts (zero when `inflow` is null).
  void step(const Field& u, Field& out, const BoundaryTrace* inflow = nullptr, std::size_t n = 0,
            const Field* forcing = nullptr) const;
  /// Transpose (in V0) of the zero-inflow, zero-forcing step.
  void step_transpose(const Field& u, Field& out) const;
  /// h(n) += scale * B^T lambda, where B injects inflow sample n into a step.
  void inject_transpose(const Field& lambda, BoundaryTrace& h, std::size_t n,
                        double scale = 1.0) const;

  double dt() const noexcept { return dt_; }
  Problem problem() const noexcept { return problem_; }
  const PhaseSpaceGrid& grid() const noexcept { return *grid_; }
  const Medium& medium() const noexcept { return *medium_; }

 private:
  void reaction(const Field& u, Field& out, bool transpose) const;

  const PhaseSpaceGrid* grid_;
  const Medium* medium_;
  double dt_;
  Problem problem_;
};

Trajectory evolve(const PhaseSpaceGrid& grid, const Medium& medium, const Field& u0,
                  const EvolutionSpec& spec, Problem problem);
Trajectory evolve_direct(const PhaseSpaceGrid& grid, const Medium& medium, const Field& u0,
                         const EvolutionSpec& spec);
Trajectory evolve_reversed(const PhaseSpaceGrid& grid, const Medium& medium, const Field& psi0,
                           const EvolutionSpec& spec);
Trajectory evolve_ballistic(const PhaseSpaceGrid& grid, const Medium& medium, const Field& u0,
                            const EvolutionSpec& spec, bool reversed);

/// Final state only (zero inflow, zero forcing); no trace or snapshots kept.
Field propagate(const TransportStepper& stepper, Field u, std::size_t n_steps);
/// Transpose of `propagate`.
Field propagate_transpose(const TransportStepper& stepper, Field u, std::size_t n_steps);

enum class Semigroup { S, R };

/// Power-iteration estimate of |S(t)| or |R(t)| in V0 using exact discrete
/// transposes.
double semigroup_norm(const PhaseSpaceGrid& grid, const Medium& medium, double t, Semigroup which,
                      int iters, std::uint64_t seed, double cfl_safety = kDefaultCflSafety);

}  // namespace rtetr

#include "rtetr/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rtetr/error.hpp"

namespace rtetr {

double cfl_timestep(const PhaseSpaceGrid& grid, double cfl_safety) {
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0))
    throw InvalidArgument("cfl_safety must lie in (0, 1]");
  double rate = 0.0;
  for (std::size_t k = 0; k < grid.n_directions(); ++k) {
    const auto& d = grid.direction(k);
    double r = std::abs(d.x) / grid.spacing(0);
    if (grid.dimension() == 2) r += std::abs(d.y) / grid.spacing(1);
    rate = std::max(rate, r);
  }
  return cfl_safety / (grid.speed() * rate);
}

TimeGrid make_time_grid(const PhaseSpaceGrid& grid, double tau, double cfl_safety) {
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw InvalidArgument("tau must be finite and >= 0");
  const double dt_max = cfl_timestep(grid, cfl_safety);
  if (tau == 0.0) return {0, dt_max};
  const auto n = static_cast<std::size_t>(std::ceil(tau / dt_max * (1.0 - 1e-12)));
  return {std::max<std::size_t>(n, 1), tau / static_cast<double>(std::max<std::size_t>(n, 1))};
}

EvolutionSpec EvolutionSpec::over(const PhaseSpaceGrid& grid, double tau, double cfl_safety) {
  const TimeGrid tg = make_time_grid(grid, tau, cfl_safety);
  EvolutionSpec spec;
  spec.tau = tau;
  spec.dt = tg.dt;
  return spec;
}

std::size_t EvolutionSpec::n_steps() const {
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  if (!(tau >= 0.0)) throw InvalidArgument("tau must be nonnegative");
  const double ratio = tau / dt;
  const double n = std::round(ratio);
  if (std::abs(n * dt - tau) > 1e-9 * std::max(tau, dt))
    throw InvalidArgument("tau must be an integer multiple of dt");
  return static_cast<std::size_t>(n);
}

TransportStepper::TransportStepper(const PhaseSpaceGrid& grid, const Medium& medium, double dt,
                                   Problem problem)
    : grid_(&grid), medium_(&medium), dt_(dt), problem_(problem) {
  if (medium.n_cells() != grid.n_cells()) throw InvalidArgument("medium does not match grid");
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  const double limit = cfl_timestep(grid, 1.0);
  if (dt > limit * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "CFL violation: dt = " << dt << " exceeds " << limit;
    throw InvalidArgument(os.str());
  }
}

void TransportStepper::reaction(const Field& u, Field& out, bool transpose) const {
  const double cdt = grid_->speed() * dt_;
  const std::size_t nd = grid_->n_directions();
  const bool reversed = problem_ == Problem::Reversed || problem_ == Problem::BallisticReversed;
  const double sign = reversed ? -1.0 : 1.0;
  for (std::size_t c = 0; c < grid_->n_cells(); ++c) {
    const double sigma = sign * cdt * (medium_->mu_a(c) + medium_->mu_s(c));
    if (sigma == 0.0) continue;
    for (std::size_t k = 0; k < nd; ++k) out(c, k) -= sigma * u(c, k);
  }
  switch (problem_) {
    case Problem::Direct:
      accumulate_scattering(*grid_, *medium_, u, cdt, transpose, out);
      break;
    case Problem::Reversed:
      accumulate_scattering(*grid_, *medium_, u, -cdt, !transpose, out);
      break;
    default:
      break;
  }
}

void TransportStepper::step(const Field& u, Field& out, const BoundaryTrace* inflow,
                            std::size_t n, const Field* forcing) const {
  out = u;
  const double cdt = grid_->speed() * dt_;
  accumulate_derivative(*grid_, u, -cdt, out, Upwind::Along, Ghost::Zero, inflow, n);
  reaction(u, out, false);
  if (forcing != nullptr) out.axpy(cdt / grid_->diameter(), *forcing);
}

void TransportStepper::step_transpose(const Field& u, Field& out) const {
  out = u;
  const double cdt = grid_->speed() * dt_;
  accumulate_derivative(*grid_, u, -cdt, out, Upwind::Against, Ghost::Zero, nullptr, 0);
  reaction(u, out, true);
}

void TransportStepper::inject_transpose(const Field& lambda, BoundaryTrace& h, std::size_t n,
                                        double scale) const {
  const double cdt = grid_->speed() * dt_;
  for (std::size_t face = 0; face < grid_->n_faces(); ++face) {
    const auto& fc = grid_->faces()[face];
    const double inv_h = 1.0 / grid_->spacing(fc.axis);
    for (std::size_t k = 0; k < grid_->n_directions(); ++k) {
      const double v = grid_->flux(face, k);
      if (!(v < 0.0)) continue;
      h(n, face, k) += scale * cdt * (-v) * inv_h * lambda(fc.cell, k);
    }
  }
}

Trajectory evolve(const PhaseSpaceGrid& grid, const Medium& medium, const Field& u0,
                  const EvolutionSpec& spec, Problem problem) {
  if (!u0.matches(grid)) throw InvalidArgument("initial field does not match grid");
  if (!u0.all_finite()) throw InvalidArgument("initial field has non-finite entries");
  const std::size_t n_steps = spec.n_steps();
  const TransportStepper stepper(grid, medium, spec.dt, problem);

  if (spec.inflow) {
    const auto& h = *spec.inflow;
    if (h.n_faces() != grid.n_faces() || h.n_directions() != grid.n_directions())
      throw InvalidArgument("inflow trace does not match grid");
    if (h.n_times() < n_steps) throw InvalidArgument("inflow trace is shorter than the run");
  }
  if (!spec.forcing.empty()) {
    if (spec.forcing.size() != 1 && spec.forcing.size() < n_steps)
      throw InvalidArgument("forcing must be constant or given for every step");
    for (const auto& f : spec.forcing) {
      if (!f.matches(grid)) throw InvalidArgument("forcing does not match grid");
    }
  }

  const std::size_t stride = spec.record_every == 0 ? std::max<std::size_t>(n_steps, 1)
                                                    : spec.record_every;
  Trajectory traj;
  traj.n_steps = n_steps;
  traj.dt = spec.dt;
  if (spec.record_trace) {
    traj.outflow = BoundaryTrace(grid, TracePart::Outflow, n_steps + 1, spec.dt);
    restrict_trace_into(grid, u0, traj.outflow, 0);
  }
  traj.snapshots.push_back(u0);
  traj.steps.push_back(0);
  traj.times.push_back(0.0);

  const bool check_growth = (problem == Problem::Reversed || problem == Problem::BallisticReversed) &&
                            !spec.inflow && spec.forcing.empty();
  const RegimeReport regime = regime_report(medium, grid);
  const double norm0 = check_growth ? v0_norm(grid, u0) : 0.0;
  bool warned = false;

  Field u = u0;
  Field next(grid);
  const BoundaryTrace* inflow = spec.inflow ? &*spec.inflow : nullptr;
  for (std::size_t n = 0; n < n_steps; ++n) {
    const Field* forcing = nullptr;
    if (!spec.forcing.empty()) forcing = spec.forcing.size() == 1 ? &spec.forcing[0] : &spec.forcing[n];
    stepper.step(u, next, inflow, n, forcing);
    std::swap(u, next);
    const std::size_t step = n + 1;
    if (step % 100 == 0 || step == n_steps) {
      if (!u.all_finite()) {
        std::ostringstream os;
        os << "non-finite values after step " << step << " (t = " << step * spec.dt << ")";
        throw SolverError(os.str());
      }
      if (check_growth && !warned) {
        const double t = step * spec.dt;
        const double bound = 10.0 * regime.reversed_growth_bound(t) * norm0;
        if (v0_norm(grid, u) > bound) {
          warn("reversed evolution exceeds 10x its analytic growth bound; possible instability");
          warned = true;
        }
      }
    }
    if (spec.record_trace) restrict_trace_into(grid, u, traj.outflow, step);
    if (step % stride == 0) {
      traj.snapshots.push_back(u);
      traj.steps.push_back(step);
      traj.times.push_back(step * spec.dt);
    }
  }
  traj.final = std::move(u);
  return traj;
}

Trajectory evolve_direct(const PhaseSpaceGrid& grid, const Medium& medium, const Field& u0,
                         const EvolutionSpec& spec) {
  return evolve(grid, medium, u0, spec, Problem::Direct);
}

Trajectory evolve_reversed(const PhaseSpaceGrid& grid, const Medium& medium, const Field& psi0,
                           const EvolutionSpec& spec) {
  return evolve(grid, medium, psi0, spec, Problem::Reversed);
}

Trajectory evolve_ballistic(const PhaseSpaceGrid& grid, const Medium& medium, const Field& u0,
                            const EvolutionSpec& spec, bool reversed) {
  return evolve(grid, medium, u0, spec,
                reversed ? Problem::BallisticReversed : Problem::BallisticDirect);
}

Field propagate(const TransportStepper& stepper, Field u, std::size_t n_steps) {
  Field next(u.n_cells(), u.n_directions());
  for (std::size_t n = 0; n < n_steps; ++n) {
    stepper.step(u, next);
    std::swap(u, next);
  }
  return u;
}

Field propagate_transpose(const TransportStepper& stepper, Field u, std::size_t n_steps) {
  Field next(u.n_cells(), u.n_directions());
  for (std::size_t n = 0; n < n_steps; ++n) {
    stepper.step_transpose(u, next);
    std::swap(u, next);
  }
  return u;
}

double semigroup_norm(const PhaseSpaceGrid& grid, const Medium& medium, double t, Semigroup which,
                      int iters, std::uint64_t seed, double cfl_safety) {
  if (iters < 3) throw InvalidArgument("semigroup_norm needs at least 3 iterations");
  if (!(t >= 0.0)) throw InvalidArgument("t must be nonnegative");
  if (t == 0.0) return 1.0;
  const TimeGrid tg = make_time_grid(grid, t, cfl_safety);
  const TransportStepper stepper(grid, medium, tg.dt,
                                 which == Semigroup::S ? Problem::Direct : Problem::Reversed);
  return operator_norm_estimate(
      [&](const Field& x) { return propagate(stepper, x, tg.n_steps); },
      [&](const Field& x) { return propagate_transpose(stepper, x, tg.n_steps); }, grid, iters,
      seed);
}

}  // namespace rtetr

#include "rtetr/control.hpp"

#include <cmath>

#include "rtetr/error.hpp"
#include "rtetr/krylov.hpp"
#include "rtetr/timereversal.hpp"

namespace rtetr {

std::string to_string(AdjointMode mode) {
  return mode == AdjointMode::ExactDiscrete ? "exact" : "paper";
}

AdjointMode adjoint_mode_from_string(const std::string& name) {
  if (name == "exact" || name == "exact_discrete") return AdjointMode::ExactDiscrete;
  if (name == "paper" || name == "paper_formula") return AdjointMode::PaperFormula;
  throw InvalidArgument("unknown adjoint mode '" + name + "' (expected exact or paper)");
}

Field steer(const PhaseSpaceGrid& grid, const Medium& medium, const BoundaryTrace& h) {
  if (h.n_faces() != grid.n_faces() || h.n_directions() != grid.n_directions())
    throw InvalidArgument("control trace does not match grid");
  if (h.n_times() < 2) throw InvalidArgument("control trace needs at least two samples");
  EvolutionSpec spec;
  spec.dt = h.dt();
  spec.tau = static_cast<double>(h.n_times() - 1) * h.dt();
  spec.inflow = h;
  spec.record_trace = false;
  return evolve_direct(grid, medium, Field(grid), spec).final;
}

Field steer(const PhaseSpaceGrid& grid, const Medium& medium, const BoundaryTrace& h, double tau,
            double cfl_safety) {
  const TimeGrid tg = make_time_grid(grid, tau, cfl_safety);
  if (h.n_times() != tg.n_steps + 1 || std::abs(h.dt() - tg.dt) > 1e-12 * tg.dt)
    throw InvalidArgument("control trace does not match the time grid of tau");
  return steer(grid, medium, h);
}

BoundaryTrace adjoint_steer(const PhaseSpaceGrid& grid, const Medium& medium, const Field& g,
                            const TimeGrid& time, AdjointMode mode) {
  if (!g.matches(grid)) throw InvalidArgument("field does not match grid");
  if (!g.all_finite()) throw InvalidArgument("field has non-finite entries");
  if (time.n_steps == 0) throw InvalidArgument("adjoint_steer needs at least one step");
  const std::size_t n_steps = time.n_steps;
  const double dt = time.dt;

  if (mode == AdjointMode::PaperFormula) {
    BoundaryTrace out = reflect_time(grid, measure(grid, medium, reflect_angle(grid, g), time).trace);
    out *= grid.speed() / grid.diameter();
    return out;
  }

  const TransportStepper stepper(grid, medium, dt, Problem::Direct);
  BoundaryTrace out(grid, TracePart::Inflow, n_steps + 1, dt);
  Field lambda = g;
  Field next(grid);
  for (std::size_t n = n_steps; n-- > 0;) {
    stepper.inject_transpose(lambda, out, n);
    if (n > 0) {
      stepper.step_transpose(lambda, next);
      std::swap(lambda, next);
    }
  }
  // Euclidean transpose -> adjoint in the weighted inner products.
  for (std::size_t f = 0; f < grid.n_faces(); ++f) {
    for (std::size_t k = 0; k < grid.n_directions(); ++k) {
      if (!(grid.flux(f, k) < 0.0)) continue;
      const double s =
          grid.cell_volume() * grid.weight(k) / (trace_weight(grid, f, k) * dt);
      for (std::size_t n = 0; n < n_steps; ++n) out(n, f, k) *= s;
    }
  }
  return out;
}

BoundaryTrace adjoint_steer(const PhaseSpaceGrid& grid, const Medium& medium, const Field& g,
                            double tau, AdjointMode mode, double cfl_safety) {
  return adjoint_steer(grid, medium, g, make_time_grid(grid, tau, cfl_safety), mode);
}

ControlSolveReport min_norm_control(const PhaseSpaceGrid& grid, const Medium& medium,
                                    const Field& v_star, double tau,
                                    const ControlOptions& options) {
  if (!v_star.matches(grid)) throw InvalidArgument("target does not match grid");
  if (!v_star.all_finite()) throw InvalidArgument("target has non-finite entries");
  if (tau < grid.crossing_time())
    throw InvalidArgument("tau must be at least the crossing time l / c");
  if (!(options.tol > 0.0)) throw InvalidArgument("tol must be positive");
  if (options.max_iter < 1) throw InvalidArgument("max_iter must be >= 1");
  if (options.tikhonov < 0.0) throw InvalidArgument("tikhonov must be nonnegative");
  const RegimeReport regime = regime_report(medium, grid);
  if (!regime.satisfied)
    warn("weak-scattering condition fails; exact controllability is not guaranteed");

  const TimeGrid time = make_time_grid(grid, tau, options.cfl_safety);
  const KrylovOp<Field> normal = [&](const Field& w) {
    Field out = steer(grid, medium, adjoint_steer(grid, medium, w, time));
    if (options.tikhonov > 0.0) out.axpy(options.tikhonov, w);
    return out;
  };
  const KrylovInner<Field> inner = [&](const Field& a, const Field& b) {
    return v0_inner(grid, a, b);
  };

  ControlSolveReport rep;
  Field w(grid);
  const KrylovReport kr = conjugate_gradient(normal, v_star, w, inner, options.tol, options.max_iter);
  rep.cg_iterations = kr.iterations;
  rep.residual_history = kr.history;
  rep.h_min = adjoint_steer(grid, medium, w, time);
  rep.reached = steer(grid, medium, rep.h_min);
  const double target = v0_norm(grid, v_star);
  if (target == 0.0) {
    rep.achieved = 0.0;
    rep.converged = true;
    return rep;
  }
  Field miss = rep.reached;
  miss -= v_star;
  rep.achieved = v0_norm(grid, miss) / target;
  rep.converged = kr.converged;
  if (!kr.converged)
    warn("control CG stopped before tolerance; the target may be weakly reachable on this grid");
  return rep;
}

}  // namespace rtetr

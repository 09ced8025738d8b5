#include "rtetr/timereversal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rtetr/error.hpp"
#include "rtetr/krylov.hpp"
#include "rtetr/stationary.hpp"

namespace rtetr {
namespace {

void check_measurement(const PhaseSpaceGrid& grid, const Measurement& h) {
  const auto& tr = h.trace;
  if (tr.n_faces() != grid.n_faces() || tr.n_directions() != grid.n_directions())
    throw InvalidArgument("measurement does not match grid");
  if (tr.n_times() != h.n_steps + 1)
    throw InvalidArgument("measurement must hold n_steps + 1 samples");
  if (!(h.dt > 0.0)) throw InvalidArgument("measurement dt must be positive");
}

TimeGrid time_of(const Measurement& h) { return TimeGrid{h.n_steps, h.dt}; }

// V0 weight of one (cell, direction) entry.
double v0_weight(const PhaseSpaceGrid& grid, std::size_t k) {
  return grid.cell_volume() * grid.weight(k);
}

}  // namespace

std::string to_string(Lift lift) { return lift == Lift::Zero ? "zero" : "stationary"; }

Lift lift_from_string(const std::string& name) {
  if (name == "zero") return Lift::Zero;
  if (name == "stationary") return Lift::Stationary;
  throw InvalidArgument("unknown lift '" + name + "' (expected zero or stationary)");
}

Measurement measure(const PhaseSpaceGrid& grid, const Medium& medium, const Field& u0,
                    const TimeGrid& time) {
  EvolutionSpec spec;
  spec.tau = time.tau();
  spec.dt = time.dt;
  Measurement m;
  if (time.n_steps == 0) throw InvalidArgument("measurement needs at least one step");
  Trajectory traj = evolve_direct(grid, medium, u0, spec);
  m.trace = std::move(traj.outflow);
  m.tau = spec.tau;
  m.dt = time.dt;
  m.n_steps = time.n_steps;
  return m;
}

Measurement measure(const PhaseSpaceGrid& grid, const Medium& medium, const Field& u0, double tau,
                    double cfl_safety) {
  return measure(grid, medium, u0, make_time_grid(grid, tau, cfl_safety));
}

BoundaryTrace reflect_time(const PhaseSpaceGrid& grid, const BoundaryTrace& h) {
  if (h.n_faces() != grid.n_faces() || h.n_directions() != grid.n_directions())
    throw InvalidArgument("trace does not match grid");
  TracePart part = h.part();
  if (part == TracePart::Outflow) {
    part = TracePart::Inflow;
  } else if (part == TracePart::Inflow) {
    part = TracePart::Outflow;
  }
  BoundaryTrace out(h.n_faces(), h.n_directions(), h.n_times(), part, h.dt());
  const std::size_t last = h.n_times() - 1;
  for (std::size_t n = 0; n < h.n_times(); ++n) {
    for (std::size_t f = 0; f < h.n_faces(); ++f) {
      for (std::size_t k = 0; k < h.n_directions(); ++k)
        out(n, f, k) = h(last - n, f, grid.opposite(k));
    }
  }
  return out;
}

Field reflect_angle(const PhaseSpaceGrid& grid, const Field& f) {
  if (!f.matches(grid)) throw InvalidArgument("field does not match grid");
  Field out(grid);
  for (std::size_t c = 0; c < grid.n_cells(); ++c) {
    for (std::size_t k = 0; k < grid.n_directions(); ++k) out(c, k) = f(c, grid.opposite(k));
  }
  return out;
}

Trajectory reflect_time(const PhaseSpaceGrid& grid, const Trajectory& trajectory) {
  Trajectory out;
  out.n_steps = trajectory.n_steps;
  out.dt = trajectory.dt;
  const double tau = static_cast<double>(trajectory.n_steps) * trajectory.dt;
  for (std::size_t i = trajectory.snapshots.size(); i-- > 0;) {
    out.snapshots.push_back(reflect_angle(grid, trajectory.snapshots[i]));
    out.steps.push_back(trajectory.n_steps - trajectory.steps[i]);
    out.times.push_back(tau - trajectory.times[i]);
  }
  out.final = out.snapshots.empty() ? Field() : out.snapshots.back();
  if (trajectory.outflow.n_times() > 0) out.outflow = reflect_time(grid, trajectory.outflow);
  return out;
}

Field time_reversal(const PhaseSpaceGrid& grid, const Medium& medium, const Measurement& h,
                    Lift lift) {
  check_measurement(grid, h);
  const std::size_t n = h.n_steps;
  const BoundaryTrace g = reflect_time(grid, h.trace);
  BoundaryTrace ahead(grid, TracePart::Inflow, n + 1, h.dt);
  for (std::size_t m = 0; m < n; ++m) {
    auto dst = ahead.sample(m);
    auto src = g.sample(m + 1);
    std::copy(src.begin(), src.end(), dst.begin());
  }

  Field psi0(grid);
  if (lift == Lift::Stationary) {
    StationarySpec ss;
    ss.source = Field(grid);
    ss.inflow = g;
    ss.inflow_sample = 0;
    psi0 = solve_stationary_reversed(grid, medium, ss);
  }

  EvolutionSpec spec;
  spec.tau = static_cast<double>(n) * h.dt;
  spec.dt = h.dt;
  spec.inflow = std::move(ahead);
  spec.record_trace = false;
  const Trajectory traj = evolve_reversed(grid, medium, psi0, spec);
  return reflect_angle(grid, traj.final);
}

Field apply_Q(const PhaseSpaceGrid& grid, const Medium& medium, const Field& u0, double tau,
              Lift lift, double cfl_safety) {
  const Measurement h = measure(grid, medium, u0, tau, cfl_safety);
  Field out = u0;
  out -= time_reversal(grid, medium, h, lift);
  return out;
}

Field apply_Q_composition(const PhaseSpaceGrid& grid, const Medium& medium, const Field& u0,
                          double tau, double cfl_safety) {
  if (!u0.matches(grid)) throw InvalidArgument("field does not match grid");
  const TimeGrid tg = make_time_grid(grid, tau, cfl_safety);
  const TransportStepper direct(grid, medium, tg.dt, Problem::Direct);
  const TransportStepper reversed(grid, medium, tg.dt, Problem::Reversed);
  Field u = propagate(direct, u0, tg.n_steps);
  u = propagate(reversed, reflect_angle(grid, u), tg.n_steps);
  return reflect_angle(grid, u);
}

Field measure_adjoint(const PhaseSpaceGrid& grid, const Medium& medium, const BoundaryTrace& y) {
  if (y.n_faces() != grid.n_faces() || y.n_directions() != grid.n_directions() ||
      y.n_times() == 0)
    throw InvalidArgument("trace does not match grid");
  const std::size_t n_steps = y.n_times() - 1;
  const double dt = y.dt();
  Field lambda(grid);
  Field next(grid);
  std::optional<TransportStepper> stepper;
  if (n_steps > 0) stepper.emplace(grid, medium, dt, Problem::Direct);
  for (std::size_t n = n_steps + 1; n-- > 0;) {
    if (n < n_steps) {
      stepper->step_transpose(lambda, next);
      std::swap(lambda, next);
    }
    for (std::size_t f = 0; f < grid.n_faces(); ++f) {
      const std::size_t cell = grid.faces()[f].cell;
      for (std::size_t k = 0; k < grid.n_directions(); ++k) {
        if (!(grid.flux(f, k) > 0.0)) continue;
        lambda(cell, k) += trace_weight(grid, f, k) * dt / v0_weight(grid, k) * y(n, f, k);
      }
    }
  }
  return lambda;
}

BoundaryTrace time_reversal_adjoint(const PhaseSpaceGrid& grid, const Medium& medium,
                                    const Field& x, std::size_t n_steps, double dt) {
  if (!x.matches(grid)) throw InvalidArgument("field does not match grid");
  BoundaryTrace h(grid, TracePart::Outflow, n_steps + 1, dt);
  if (n_steps == 0) return h;
  const TransportStepper stepper(grid, medium, dt, Problem::Reversed);
  BoundaryTrace injected(grid, TracePart::Inflow, 1, dt);
  Field mu = reflect_angle(grid, x);
  Field next(grid);
  for (std::size_t n = 0; n < n_steps; ++n) {
    for (auto& v : injected.values()) v = 0.0;
    stepper.inject_transpose(mu, injected, 0);
    for (std::size_t f = 0; f < grid.n_faces(); ++f) {
      for (std::size_t k = 0; k < grid.n_directions(); ++k) {
        if (!(grid.flux(f, k) > 0.0)) continue;
        h(n, f, k) = injected(0, f, grid.opposite(k)) * v0_weight(grid, k) /
                     (trace_weight(grid, f, k) * dt);
      }
    }
    stepper.step_transpose(mu, next);
    std::swap(mu, next);
  }
  return h;
}

ReconstructionReport reconstruct_neumann(const PhaseSpaceGrid& grid, const Medium& medium,
                                         const Measurement& h, const NeumannOptions& options) {
  check_measurement(grid, h);
  if (options.n_iter < 1) throw InvalidArgument("n_iter must be >= 1");
  if (options.ground_truth && !options.ground_truth->matches(grid))
    throw InvalidArgument("ground truth does not match grid");
  const TimeGrid time = time_of(h);
  const bool v1 = options.lift == Lift::Stationary;
  const double truth_norm = options.ground_truth ? v0_norm(grid, *options.ground_truth) : 0.0;

  ReconstructionReport rep;
  auto record_error = [&](const Field& u) {
    if (!options.ground_truth) return;
    Field e = u;
    e -= *options.ground_truth;
    const double en = v0_norm(grid, e);
    rep.errors.push_back(truth_norm > 0.0 ? en / truth_norm : en);
  };

  Field u = time_reversal(grid, medium, h, options.lift);
  const double first = v0_norm(grid, u);
  rep.increments.push_back(first);
  if (v1) rep.increments_v1.push_back(v1_norm(grid, u));
  record_error(u);

  int above_one = 0;
  double log_sum = 0.0;
  for (int it = 1; it <= options.n_iter; ++it) {
    if (rep.increments.back() == 0.0) break;
    if (options.tol > 0.0 && rep.increments.back() <= options.tol * first) break;
    Measurement r = h;
    r.trace -= measure(grid, medium, u, time).trace;
    const Field d = time_reversal(grid, medium, r, options.lift);
    u += d;
    const double inc = v0_norm(grid, d);
    const double ratio = inc / rep.increments.back();
    rep.increments.push_back(inc);
    rep.ratios.push_back(ratio);
    if (v1) rep.increments_v1.push_back(v1_norm(grid, d));
    record_error(u);
    rep.iterations = it;
    if (ratio > 0.0) log_sum += std::log(ratio);
    if (!std::isfinite(inc)) {
      rep.diverged = true;
      break;
    }
    above_one = ratio > 1.0 ? above_one + 1 : 0;
    if (above_one >= 3) {
      rep.diverged = true;
      break;
    }
  }
  if (!rep.ratios.empty()) {
    const bool any_zero =
        std::any_of(rep.ratios.begin(), rep.ratios.end(), [](double r) { return r == 0.0; });
    rep.contraction_estimate =
        any_zero ? 0.0 : std::exp(log_sum / static_cast<double>(rep.ratios.size()));
  }
  const bool reached_tol =
      rep.increments.back() == 0.0 ||
      (options.tol > 0.0 && rep.increments.back() <= options.tol * first);
  rep.converged = !rep.diverged && (reached_tol || rep.contraction_estimate < 1.0);
  rep.final = std::move(u);
  return rep;
}

FredholmReport solve_fredholm_report(const PhaseSpaceGrid& grid, const Medium& medium,
                                     const Measurement& h, double tol, int max_iter) {
  check_measurement(grid, h);
  if (!(tol > 0.0)) throw InvalidArgument("tol must be positive");
  if (max_iter < 1) throw InvalidArgument("max_iter must be >= 1");
  const TimeGrid time = time_of(h);
  const Field b = time_reversal(grid, medium, h, Lift::Zero);
  const KrylovOp<Field> op = [&](const Field& x) {
    return time_reversal(grid, medium, measure(grid, medium, x, time), Lift::Zero);
  };
  const KrylovInner<Field> inner = [&](const Field& a, const Field& c) {
    return v0_inner(grid, a, c);
  };
  FredholmReport rep;
  rep.solution = Field(grid);
  const KrylovReport kr = gmres(op, b, rep.solution, inner, tol, max_iter, 30);
  rep.iterations = kr.iterations;
  rep.residual = kr.residual;
  rep.history = kr.history;
  rep.converged = kr.converged;
  return rep;
}

Field solve_fredholm(const PhaseSpaceGrid& grid, const Medium& medium, const Measurement& h,
                     double tol, int max_iter) {
  FredholmReport rep = solve_fredholm_report(grid, medium, h, tol, max_iter);
  if (!rep.converged) {
    std::ostringstream os;
    os << "GMRES stagnated after " << rep.iterations << " iterations (relative residual "
       << rep.residual << "); 1 may lie close to the spectrum of Q";
    throw SolverError(os.str(), rep.residual);
  }
  return std::move(rep.solution);
}

double contraction_factor(const PhaseSpaceGrid& grid, const Medium& medium, double tau, Lift lift,
                          int iters, std::uint64_t seed, double cfl_safety) {
  if (iters < 3) throw InvalidArgument("contraction_factor needs at least 3 iterations");
  const TimeGrid time = make_time_grid(grid, tau, cfl_safety);
  const LinearMap q = [&](const Field& x) {
    Field out = x;
    out -= time_reversal(grid, medium, measure(grid, medium, x, time), lift);
    return out;
  };
  if (lift == Lift::Zero) {
    const LinearMap qt = [&](const Field& x) {
      const BoundaryTrace g = time_reversal_adjoint(grid, medium, x, time.n_steps, time.dt);
      Field out = x;
      out -= measure_adjoint(grid, medium, g);
      return out;
    };
    return operator_norm_estimate(q, qt, grid, iters, seed);
  }
  Field x = random_field(grid, seed);
  double norm = v1_norm(grid, x);
  double ratio = 0.0;
  for (int it = 0; it < iters; ++it) {
    x *= 1.0 / norm;
    x = q(x);
    norm = v1_norm(grid, x);
    ratio = norm;
    if (norm == 0.0) break;
  }
  return ratio;
}

}  // namespace rtetr

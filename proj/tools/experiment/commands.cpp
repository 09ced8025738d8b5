#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "manifest.hpp"
#include "rtetr/control.hpp"
#include "rtetr/error.hpp"
#include "rtetr/field_io.hpp"
#include "rtetr/stationary.hpp"

namespace rtetr::experiment {
namespace {

BoundaryTrace random_trace(const PhaseSpaceGrid& grid, TracePart part, std::size_t n_times,
                           double dt, std::uint64_t seed) {
  BoundaryTrace h(grid, part, n_times, dt);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& v : h.values()) v = dist(rng);
  h.mask(grid);
  return h;
}

double rel_diff(const PhaseSpaceGrid& grid, const Field& a, const Field& b) {
  Field d = a;
  d -= b;
  const double scale = std::max(v0_norm(grid, a), v0_norm(grid, b));
  return scale == 0.0 ? v0_norm(grid, d) : v0_norm(grid, d) / scale;
}

Check bound_check(std::string name, double value, double limit, std::string detail = {}) {
  Check c;
  c.name = std::move(name);
  c.value = value;
  c.limit = limit;
  c.passed = value <= limit;
  c.detail = std::move(detail);
  return c;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

nlohmann::json resolved_config(const ExperimentConfig& cfg, const Setup& s) {
  nlohmann::json j = to_json(cfg);
  j["time"]["tau_resolved"] = s.time.tau();
  j["time"]["dt_resolved"] = s.time.dt;
  j["time"]["n_steps"] = s.time.n_steps;
  j["time"]["tau_auto"] = s.tau_auto;
  j["time"]["dt_auto"] = s.dt_auto;
  j["regime"] = {{"l", s.regime.l},
                 {"T", s.regime.T},
                 {"mu_a_bar", s.regime.mu_a_bar},
                 {"mu_s_bar", s.regime.mu_s_bar},
                 {"lhs", s.regime.lhs},
                 {"satisfied", s.regime.satisfied}};
  return j;
}

void write_trace_index(const std::filesystem::path& path, const PhaseSpaceGrid& grid,
                       const BoundaryTrace& h) {
  std::vector<double> t(h.n_times()), norm(h.n_times());
  for (std::size_t n = 0; n < h.n_times(); ++n) {
    t[n] = static_cast<double>(n) * h.dt();
    norm[n] = trace_norm(grid, h, n);
  }
  write_csv(path, {"time", "trace_norm"}, {t, norm});
}

int cmd_simulate(const ExperimentConfig& cfg, const Setup& s, Manifest& m, std::ostream& log) {
  const Field u0 = make_profile(s.grid, cfg.initial, cfg.seed);
  EvolutionSpec spec;
  spec.tau = s.time.tau();
  spec.dt = s.time.dt;
  spec.record_every = cfg.simulate.record_every;
  const Trajectory traj = evolve_direct(s.grid, s.medium, u0, spec);

  write_field(m.output("initial.rtef"), u0);
  write_field(m.output("final.rtef"), traj.final);
  write_trace(m.output("outflow.rtet"), traj.outflow);
  write_trace_index(m.output("outflow.csv"), s.grid, traj.outflow);
  std::vector<double> step, time, norm;
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    step.push_back(static_cast<double>(traj.steps[i]));
    time.push_back(traj.times[i]);
    norm.push_back(v0_norm(s.grid, traj.snapshots[i]));
    if (cfg.simulate.record_every > 0) {
      char name[64];
      std::snprintf(name, sizeof name, "snapshots/step_%06zu.rtef", traj.steps[i]);
      write_field(m.output(name), traj.snapshots[i]);
    }
  }
  write_csv(m.output("snapshots.csv"), {"step", "time", "v0_norm"}, {step, time, norm});
  log << "simulated " << traj.n_steps << " steps to t = " << s.time.tau()
      << "; |u(tau)| / |u0| = " << (v0_norm(s.grid, u0) > 0.0
                                        ? v0_norm(s.grid, traj.final) / v0_norm(s.grid, u0)
                                        : 0.0)
      << '\n';
  return kOk;
}

int cmd_invert(const ExperimentConfig& cfg, const Setup& s, Manifest& m, std::ostream& log,
               bool allow_crime) {
  const InversionOutcome out = run_inversion(cfg, s, allow_crime);
  m.extra()["inverse_crime"] = out.inverse_crime;
  write_field(m.output("truth.rtef"), out.truth);
  write_field(m.output("reconstruction.rtef"), out.reconstruction);
  write_trace(m.output("measurement.rtet"), out.data.trace);
  write_trace_index(m.output("measurement.csv"), s.grid, out.data.trace);
  if (out.neumann) {
    const auto& r = *out.neumann;
    std::vector<double> it, inc, err, ratio;
    for (std::size_t i = 0; i < r.increments.size(); ++i) {
      it.push_back(static_cast<double>(i));
      inc.push_back(r.increments[i]);
      err.push_back(i < r.errors.size() ? r.errors[i] : std::nan(""));
      ratio.push_back(i == 0 ? std::nan("") : r.ratios[i - 1]);
    }
    write_csv(m.output("report.csv"), {"iteration", "increment", "error", "ratio"},
              {it, inc, err, ratio});
    log << "neumann: " << r.iterations << " iterations, contraction estimate "
        << r.contraction_estimate << ", relative error " << out.relative_error << '\n';
    if (r.diverged) {
      log << "neumann series diverged (increment ratio > 1 three times in a row)\n";
      return kSolverError;
    }
  } else {
    const auto& r = *out.fredholm;
    std::vector<double> it, res;
    for (std::size_t i = 0; i < r.history.size(); ++i) {
      it.push_back(static_cast<double>(i));
      res.push_back(r.history[i]);
    }
    write_csv(m.output("gmres.csv"), {"iteration", "residual"}, {it, res});
    log << "fredholm: " << r.iterations << " GMRES iterations, residual " << r.residual
        << ", relative error " << out.relative_error << '\n';
  }
  return kOk;
}

int cmd_control(const ExperimentConfig& cfg, const Setup& s, Manifest& m, std::ostream& log) {
  const Field target = make_profile(s.grid, cfg.control.target, cfg.seed);
  ControlOptions opt;
  opt.tol = cfg.control.tol;
  opt.max_iter = cfg.control.max_iter;
  opt.tikhonov = cfg.control.tikhonov;
  opt.cfl_safety = cfg.time.cfl_safety;
  if (cfg.control.adjoint != AdjointMode::ExactDiscrete)
    log << "note: min-norm control always uses the exact discrete adjoint\n";
  const ControlSolveReport rep = min_norm_control(s.grid, s.medium, target, s.time.tau(), opt);
  write_field(m.output("target.rtef"), target);
  write_field(m.output("reached.rtef"), rep.reached);
  write_trace(m.output("h_min.rtet"), rep.h_min);
  std::vector<double> it, res;
  for (std::size_t i = 0; i < rep.residual_history.size(); ++i) {
    it.push_back(static_cast<double>(i));
    res.push_back(rep.residual_history[i]);
  }
  write_csv(m.output("cg.csv"), {"iteration", "residual"}, {it, res});
  const double hnorm = trace_time_norm(s.grid, rep.h_min);
  const double tnorm = v0_norm(s.grid, target);
  log << "control: " << rep.cg_iterations << " CG iterations, achieved " << rep.achieved
      << ", |h_min| = " << hnorm << ", |h_min| / |v*| = " << (tnorm > 0 ? hnorm / tnorm : 0.0)
      << (rep.converged ? "" : " (tolerance not reached)") << '\n';
  m.extra()["achieved"] = rep.achieved;
  return kOk;
}

int cmd_spectrum(const ExperimentConfig& cfg, const Setup& s, Manifest& m, std::ostream& log) {
  const double T = s.regime.T;
  std::vector<double> times;
  for (double k : cfg.spectrum.multiples) times.push_back(k * T);
  if (std::none_of(times.begin(), times.end(),
                   [&](double t) { return std::abs(t - s.time.tau()) <= 1e-12 * t; }))
    times.push_back(s.time.tau());
  std::vector<double> t_col, s_col, r_col, bound_col;
  for (double t : times) {
    const double sn = semigroup_norm(s.grid, s.medium, t, Semigroup::S, cfg.spectrum.iters,
                                     cfg.seed, cfg.time.cfl_safety);
    const double rn = semigroup_norm(s.grid, s.medium, t, Semigroup::R, cfg.spectrum.iters,
                                     cfg.seed, cfg.time.cfl_safety);
    const double b = s.regime.decay_bound(t);
    t_col.push_back(t);
    s_col.push_back(sn);
    r_col.push_back(rn);
    bound_col.push_back(b);
    log << "t = " << t << " (" << t / T << " T): |S(t)| = " << sn << ", |R(t)| = " << rn
        << ", decay bound " << b << '\n';
  }
  write_csv(m.output("spectrum.csv"), {"t", "S_norm", "R_norm", "decay_bound"},
            {t_col, s_col, r_col, bound_col});
  const double q = contraction_factor(s.grid, s.medium, s.time.tau(), Lift::Zero,
                                      cfg.spectrum.iters, cfg.seed, cfg.time.cfl_safety);
  const double qb = std::pow(s.regime.decay_bound(s.time.tau()), 2);
  log << "|Q(tau)| = " << q << " at tau = " << s.time.tau() << " (product bound " << qb << ")\n";
  write_csv(m.output("contraction.csv"), {"tau", "Q_norm", "product_bound"},
            {{s.time.tau()}, {q}, {qb}});
  m.extra()["contraction_factor"] = q;
  return kOk;
}

int cmd_validate(const ExperimentConfig& cfg, const Setup& s, Manifest& m, std::ostream& log) {
  const std::vector<Check> checks = validation_suite(cfg, s, cfg.seed);
  std::vector<double> value, limit, passed;
  std::vector<std::string> lines;
  int violations = 0;
  for (const auto& c : checks) {
    const char* tag = c.informational ? "info" : (c.passed ? "ok" : "VIOLATION");
    log << std::left << std::setw(10) << tag << c.name << ": " << fmt(c.value);
    if (!c.informational) log << " (limit " << fmt(c.limit) << ")";
    if (!c.detail.empty()) log << " " << c.detail;
    log << '\n';
    if (!c.passed && !c.informational) ++violations;
  }
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : checks) {
    j.push_back({{"name", c.name},
                 {"passed", c.passed},
                 {"informational", c.informational},
                 {"value", c.value},
                 {"limit", c.limit},
                 {"detail", c.detail}});
  }
  std::ofstream(m.output("validation.json")) << j.dump(2) << '\n';
  log << violations << " violation(s) in " << checks.size() << " checks\n";
  return violations == 0 ? kOk : kValidationError;
}

}  // namespace

void print_regime(std::ostream& os, const RegimeReport& r) {
  os << "regime: l = " << r.l << ", c = " << r.c << ", T = " << r.T << ", mu_a_bar = " << r.mu_a_bar
     << ", mu_s_bar = " << r.mu_s_bar << '\n'
     << "regime: l mu_s e^{l(mu_a+mu_s)} = " << r.lhs << (r.satisfied ? " < 1 (weak scattering)"
                                                                     : " >= 1 (condition fails)")
     << '\n';
  if (r.satisfied) {
    os << "regime: omega* = " << r.omega_star << ", E* = " << r.E_star
       << ", suggested tau = " << r.suggested_tau() << '\n';
  }
}

InversionOutcome run_inversion(const ExperimentConfig& cfg, const Setup& s,
                               bool allow_inverse_crime) {
  InversionOutcome out;
  out.truth = make_profile(s.grid, cfg.initial, cfg.seed);
  out.inverse_crime = allow_inverse_crime || !cfg.invert.inverse_crime_guard;
  if (out.inverse_crime) {
    out.data = measure(s.grid, s.medium, out.truth, s.time);
  } else {
    if (cfg.initial.kind == "file" || cfg.initial.kind == "random")
      throw ConfigError("the inverse-crime guard needs an analytic initial condition; "
                        "use --allow-inverse-crime");
    if (s.grid.kind() == GeometryKind::Disk2D)
      throw ConfigError("the inverse-crime guard does not support disk2d; "
                        "use --allow-inverse-crime");
    const Setup fine = make_setup(cfg, 2);
    const Field truth_fine = make_profile(fine.grid, cfg.initial, cfg.seed);
    const Measurement fine_data = measure(fine.grid, fine.medium, truth_fine, fine.time);
    out.data = coarsen_measurement(fine.grid, fine_data, s.grid, s.time);
  }

  if (cfg.invert.method == "neumann") {
    NeumannOptions opt;
    opt.n_iter = cfg.invert.n_iter;
    opt.lift = cfg.invert.lift;
    opt.ground_truth = out.truth;
    ReconstructionReport rep = reconstruct_neumann(s.grid, s.medium, out.data, opt);
    out.reconstruction = rep.final;
    out.neumann = std::move(rep);
  } else {
    if (cfg.invert.lift != Lift::Zero) throw ConfigError("fredholm method requires lift: zero");
    FredholmReport rep =
        solve_fredholm_report(s.grid, s.medium, out.data, cfg.invert.tol, cfg.invert.max_iter);
    if (!rep.converged) {
      std::ostringstream os;
      os << "GMRES stagnated after " << rep.iterations << " iterations (relative residual "
         << rep.residual << "); 1 may lie close to the spectrum of Q";
      throw SolverError(os.str(), rep.residual);
    }
    out.reconstruction = rep.solution;
    out.fredholm = std::move(rep);
  }
  Field e = out.reconstruction;
  e -= out.truth;
  const double tn = v0_norm(s.grid, out.truth);
  out.relative_error = tn > 0.0 ? v0_norm(s.grid, e) / tn : v0_norm(s.grid, e);
  return out;
}

std::vector<Check> validation_suite(const ExperimentConfig& cfg, const Setup& s,
                                    std::uint64_t seed) {
  const auto& grid = s.grid;
  const auto& medium = s.medium;
  const TimeGrid time = s.time;
  std::vector<Check> checks;

  {
    const auto issues = validate_kernel(grid, medium);
    Check c;
    c.name = "medium.kernel_assumptions";
    c.value = static_cast<double>(issues.size());
    c.passed = issues.empty();
    if (!issues.empty())
      c.detail = issues.front().invariant + " at (" + std::to_string(issues.front().k) + ", " +
                 std::to_string(issues.front().kp) + ")";
    checks.push_back(c);
  }

  const Field f = random_field(grid, seed);
  const Field g = random_field(grid, seed + 1);
  const BoundaryTrace h = random_trace(grid, TracePart::Outflow, time.n_steps + 1, time.dt, seed);
  {
    const BoundaryTrace uu = reflect_time(grid, reflect_time(grid, h));
    checks.push_back(bound_check("timereversal.U_involution", uu == h ? 0.0 : 1.0, 0.0));
    const Field vv = reflect_angle(grid, reflect_angle(grid, f));
    checks.push_back(bound_check("timereversal.V_involution", vv == f ? 0.0 : 1.0, 0.0));
    const double hn = trace_time_norm(grid, h);
    checks.push_back(bound_check("timereversal.U_norm",
                                 std::abs(trace_time_norm(grid, reflect_time(grid, h)) - hn) / hn,
                                 1e-14));
    const double fn = v0_norm(grid, f);
    checks.push_back(bound_check("timereversal.V_norm",
                                 std::abs(v0_norm(grid, reflect_angle(grid, f)) - fn) / fn, 1e-14));
    const Field vk = reflect_angle(grid, apply_scattering(grid, medium, f));
    const Field kv = apply_scattering_adjoint(grid, medium, reflect_angle(grid, f));
    Field d = vk;
    d -= kv;
    checks.push_back(bound_check("timereversal.intertwining", v0_norm(grid, d) / fn, 1e-12));
  }

  {
    const TransportStepper direct(grid, medium, time.dt, Problem::Direct);
    const TransportStepper reversed(grid, medium, time.dt, Problem::Reversed);
    for (const auto* st : {&direct, &reversed}) {
      Field mf(grid), mtg(grid);
      st->step(f, mf);
      st->step_transpose(g, mtg);
      const double a = v0_inner(grid, mf, g);
      const double b = v0_inner(grid, f, mtg);
      const double scale = v0_norm(grid, f) * v0_norm(grid, g);
      checks.push_back(bound_check(st == &direct ? "evolution.transpose_direct"
                                                 : "evolution.transpose_reversed",
                                   std::abs(a - b) / scale, 1e-12));
    }
    const Field sf = propagate(direct, f, time.n_steps);
    const Field sg = propagate(direct, g, time.n_steps);
    Field comb = f;
    comb *= 2.0;
    comb.axpy(-3.0, g);
    Field expect = sf;
    expect *= 2.0;
    expect.axpy(-3.0, sg);
    checks.push_back(bound_check("evolution.linearity",
                                 rel_diff(grid, propagate(direct, comb, time.n_steps), expect),
                                 1e-10));
    Field pos = f;
    for (auto& v : pos.values()) v = std::abs(v);
    EvolutionSpec spec;
    spec.tau = time.tau();
    spec.dt = time.dt;
    spec.record_every = 1;
    spec.record_trace = false;
    const Trajectory traj = evolve_direct(grid, medium, pos, spec);
    double min_v = 0.0;
    for (const auto& snap : traj.snapshots) {
      for (double v : snap.values()) min_v = std::min(min_v, v);
    }
    checks.push_back(bound_check("evolution.positivity", -min_v, 0.0));
  }

  {
    const double T = s.regime.T;
    const int iters = 10;
    const double sn = semigroup_norm(grid, medium, T, Semigroup::S, iters, seed,
                                     cfg.time.cfl_safety);
    checks.push_back(bound_check("evolution.direct_growth_bound", sn,
                                 1.1 * s.regime.direct_growth_bound(T)));
    const double rn = semigroup_norm(grid, medium, T, Semigroup::R, iters, seed,
                                     cfg.time.cfl_safety);
    checks.push_back(bound_check("evolution.reversed_growth_bound", rn,
                                 1.1 * s.regime.reversed_growth_bound(T)));
    for (int k = 1; k <= 2; ++k) {
      const double t = k * T;
      Check c = bound_check("evolution.decay_bound_" + std::to_string(k) + "T",
                            std::max(semigroup_norm(grid, medium, t, Semigroup::S, iters, seed,
                                                    cfg.time.cfl_safety),
                                     semigroup_norm(grid, medium, t, Semigroup::R, iters, seed,
                                                    cfg.time.cfl_safety)),
                            1.1 * s.regime.decay_bound(t));
      if (!s.regime.satisfied) c.informational = true;
      checks.push_back(c);
    }
  }

  {
    const BoundaryTrace hin =
        random_trace(grid, TracePart::Inflow, time.n_steps + 1, time.dt, seed + 2);
    const Field yh = steer(grid, medium, hin);
    const BoundaryTrace ystar = adjoint_steer(grid, medium, g, time, AdjointMode::ExactDiscrete);
    const double a = v0_inner(grid, yh, g);
    const double b = trace_time_inner(grid, hin, ystar);
    checks.push_back(bound_check(
        "control.adjoint_identity",
        std::abs(a - b) / (trace_time_norm(grid, hin) * v0_norm(grid, g)), 1e-10));

    const Measurement lf = measure(grid, medium, f, time);
    const double la = trace_time_inner(grid, lf.trace, h);
    const double lb = v0_inner(grid, f, measure_adjoint(grid, medium, h));
    checks.push_back(bound_check(
        "timereversal.measure_adjoint",
        std::abs(la - lb) / (trace_time_norm(grid, h) * v0_norm(grid, f)), 1e-10));

    Measurement hm;
    hm.trace = h;
    hm.n_steps = time.n_steps;
    hm.dt = time.dt;
    hm.tau = time.tau();
    const double ga = v0_inner(grid, time_reversal(grid, medium, hm, Lift::Zero), g);
    const double gb =
        trace_time_inner(grid, h, time_reversal_adjoint(grid, medium, g, time.n_steps, time.dt));
    checks.push_back(bound_check(
        "timereversal.G_adjoint",
        std::abs(ga - gb) / (trace_time_norm(grid, h) * v0_norm(grid, g)), 1e-10));
  }

  {
    StationarySpec ss;
    ss.source = f;
    const StationaryResult dr = solve_stationary_direct_report(grid, medium, ss);
    const double tol = 1e-10 * (1.0 + v0_norm(grid, f));
    checks.push_back(bound_check("stationary.direct_residual",
                                 stationary_residual(grid, medium, dr.solution, ss, false), tol));
    if (s.regime.satisfied) {
      const StationaryResult rr = solve_stationary_reversed_report(grid, medium, ss);
      checks.push_back(bound_check("stationary.reversed_residual",
                                   stationary_residual(grid, medium, rr.solution, ss, true), tol));
    }
  }

  {
    const double q = contraction_factor(grid, medium, time.tau(), Lift::Zero, 10, seed,
                                        cfg.time.cfl_safety);
    Check c = bound_check("timereversal.contraction", q, 1.0, "|Q(tau)| must be < 1");
    c.passed = q < 1.0;
    if (!s.regime.satisfied) c.informational = true;
    checks.push_back(c);
    Check pb;
    pb.name = "timereversal.contraction_vs_product_bound";
    pb.value = q;
    pb.limit = 1.1 * std::pow(s.regime.decay_bound(time.tau()), 2);
    pb.informational = true;
    pb.detail = "product bound x1.1 = " + fmt(pb.limit) +
                "; grid-scale modes are dissipated, so the discrete norm stays near 1";
    checks.push_back(pb);

    Check qc;
    qc.name = "timereversal.Q_composition";
    Field qd = apply_Q(grid, medium, f, time.tau(), Lift::Zero, cfg.time.cfl_safety);
    qd -= apply_Q_composition(grid, medium, f, time.tau(), cfg.time.cfl_safety);
    qc.value = v0_norm(grid, qd) / v0_norm(grid, f);
    qc.informational = true;
    qc.detail = "(I - G Lambda) vs V R V S; explicit upwind is not time-reversible";
    checks.push_back(qc);
  }
  return checks;
}

int run(const std::string& command, const RunOptions& options, std::ostream& log,
        std::ostream& err) {
  static const std::vector<std::string> commands{"simulate", "invert", "control", "validate",
                                                 "spectrum"};
  if (std::find(commands.begin(), commands.end(), command) == commands.end()) {
    err << "error: unknown command '" << command << "'\n";
    return kConfigError;
  }
  ExperimentConfig cfg;
  std::optional<Setup> setup;
  try {
    cfg = load_config(options.config);
    if (options.out) cfg.output = *options.out;
    if (options.seed) cfg.seed = *options.seed;
    setup.emplace(make_setup(cfg));
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InvalidArgument& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  const Setup& s = *setup;
  print_regime(log, s.regime);
  log << "time: tau = " << s.time.tau() << (s.tau_auto ? " (auto)" : "") << ", dt = " << s.time.dt
      << (s.dt_auto ? " (auto)" : "") << ", steps = " << s.time.n_steps << '\n';

  Manifest manifest(command, cfg.output / command);
  manifest.set_config(resolved_config(cfg, s));
  for (const auto& f : referenced_files(cfg)) manifest.add_input(f);
  manifest.extra()["seed"] = cfg.seed;

  int code = kOk;
  try {
    if (command == "simulate") code = cmd_simulate(cfg, s, manifest, log);
    if (command == "invert") code = cmd_invert(cfg, s, manifest, log, options.allow_inverse_crime);
    if (command == "control") code = cmd_control(cfg, s, manifest, log);
    if (command == "spectrum") code = cmd_spectrum(cfg, s, manifest, log);
    if (command == "validate") code = cmd_validate(cfg, s, manifest, log);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    code = kConfigError;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    code = kSolverError;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    code = kConfigError;
  }
  const auto path = manifest.write(code);
  log << "manifest: " << path.string() << '\n';
  return code;
}

}  // namespace rtetr::experiment

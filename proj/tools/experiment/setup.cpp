#include "setup.hpp"

#include <cmath>
#include <map>
#include <tuple>

#include "rtetr/error.hpp"
#include "rtetr/field_io.hpp"

namespace rtetr::experiment {
namespace {

double coefficient_shape(const CoefficientProfile& p, double x, double y) {
  if (p.name.empty()) return 1.0;
  double bump = 0.0;
  if (p.name == "gaussian-bump") {
    const auto centers = p.centers.empty() ? std::vector<std::array<double, 2>>{{0.5, 0.5}}
                                           : p.centers;
    for (const auto& c : centers) {
      const double r2 = (x - c[0]) * (x - c[0]) + (y - c[1]) * (y - c[1]);
      bump += std::exp(-r2 / (2.0 * p.width * p.width));
    }
  } else {
    const auto centers = p.centers.empty()
                             ? std::vector<std::array<double, 2>>{{0.3, 0.5}, {0.7, 0.5}}
                             : p.centers;
    for (const auto& c : centers) {
      if (std::hypot(x - c[0], y - c[1]) <= p.width) bump = 1.0;
    }
  }
  return 1.0 + p.amplitude * bump;
}

}  // namespace

Medium make_medium(const ExperimentConfig& cfg, const PhaseSpaceGrid& grid, bool at_config_grid) {
  const auto& m = cfg.medium;
  if (!at_config_grid && (!m.mu_a_file.empty() || !m.mu_s_file.empty()))
    throw ConfigError("coefficient files cannot be resampled to the data grid; "
                      "use --allow-inverse-crime");
  const auto shape = [&](double base) {
    return sample_coefficient(grid, [&](double x, double y) {
      return base * coefficient_shape(m.profile, x, y);
    });
  };
  std::vector<double> mu_a = m.mu_a_file.empty() ? shape(m.mu_a)
                                                 : read_coefficient_csv(m.mu_a_file, grid.n_cells());
  std::vector<double> mu_s = m.mu_s_file.empty() ? shape(m.mu_s)
                                                 : read_coefficient_csv(m.mu_s_file, grid.n_cells());
  Kernel kernel = Kernel::isotropic(grid);
  if (m.kernel == "hg") {
    kernel = Kernel::henyey_greenstein(grid, m.g);
  } else if (m.kernel == "table") {
    kernel = read_kernel_tables(m.kernel_table, grid);
    if (!at_config_grid && kernel.n_tables() > 1)
      throw ConfigError("per-cell kernel tables cannot be resampled; use --allow-inverse-crime");
  }
  return Medium(grid, std::move(mu_a), std::move(mu_s), std::move(kernel));
}

Setup make_setup(const ExperimentConfig& cfg, int refine) {
  GeometryConfig gc = cfg.geometry;
  gc.n_cells *= refine;
  PhaseSpaceGrid grid = build_grid(gc);
  Medium medium = make_medium(cfg, grid, refine == 1);
  const auto issues = validate_kernel(grid, medium);
  if (!issues.empty()) {
    const auto& v = issues.front();
    throw ConfigError("kernel violates " + v.invariant + " at (" + std::to_string(v.k) + ", " +
                      std::to_string(v.kp) + ")");
  }
  // Regime and auto time are always resolved on the configured grid so the
  // refined setup shares tau and an exact dt / refine.
  RegimeReport regime = regime_report(medium, grid);
  Setup s{std::move(grid), std::move(medium), regime, {}, false, false};
  if (refine != 1) {
    const Setup base = make_setup(cfg, 1);
    s.tau_auto = base.tau_auto;
    s.dt_auto = base.dt_auto;
    s.time = TimeGrid{base.time.n_steps * static_cast<std::size_t>(refine),
                      base.time.dt / refine};
    return s;
  }

  double tau = 0.0;
  if (cfg.time.tau) {
    tau = *cfg.time.tau;
  } else {
    tau = regime.suggested_tau();
    s.tau_auto = true;
    if (!(tau > 0.0))
      throw ConfigError("tau: auto has no finite suggestion (regime condition fails); set tau");
  }
  if (cfg.time.dt) {
    const double dt = *cfg.time.dt;
    const double n = std::round(tau / dt);
    if (n < 1.0 || std::abs(n * dt - tau) > 1e-9 * tau)
      throw ConfigError("tau must be an integer multiple of dt");
    if (dt > cfl_timestep(s.grid, 1.0) * (1.0 + 1e-12))
      throw ConfigError("dt violates the CFL bound " + std::to_string(cfl_timestep(s.grid, 1.0)));
    s.time = TimeGrid{static_cast<std::size_t>(n), dt};
  } else {
    s.time = make_time_grid(s.grid, tau, cfg.time.cfl_safety);
    s.dt_auto = true;
  }
  return s;
}

Field make_profile(const PhaseSpaceGrid& grid, const ProfileSpec& p, std::uint64_t seed) {
  if (p.kind == "file") {
    Field f = read_field(p.path);
    if (!f.matches(grid))
      throw ConfigError(p.path.string() + ": field shape does not match the grid");
    return f;
  }
  if (p.kind == "random") {
    Field f = random_field(grid, seed);
    f *= p.amplitude;
    return f;
  }
  Field f(grid);
  if (p.kind == "zero") return f;
  const bool two_d = grid.dimension() == 2;
  for (std::size_t c = 0; c < grid.n_cells(); ++c) {
    const Direction x = grid.cell_center(c);
    const double dx = x.x - p.center[0];
    const double dy = two_d ? x.y - p.center[1] : 0.0;
    const double r = std::hypot(dx, dy);
    double v = 0.0;
    if (p.kind == "gaussian") {
      v = std::exp(-r * r / (2.0 * p.width * p.width));
    } else if (p.kind == "box") {
      v = std::abs(dx) <= p.width && std::abs(dy) <= p.width ? 1.0 : 0.0;
    } else {
      const double d = r - p.radius;
      v = std::exp(-d * d / (2.0 * p.width * p.width));
    }
    for (std::size_t k = 0; k < grid.n_directions(); ++k)
      f(c, k) = p.amplitude * v * (1.0 + p.anisotropy * grid.direction(k).x);
  }
  return f;
}

Measurement coarsen_measurement(const PhaseSpaceGrid& fine, const Measurement& fine_data,
                                const PhaseSpaceGrid& coarse, const TimeGrid& coarse_time) {
  if (coarse.kind() == GeometryKind::Disk2D)
    throw ConfigError("the inverse-crime guard does not support disk2d (staircase boundaries "
                      "differ between grids); use --allow-inverse-crime");
  if (fine.nx() != 2 * coarse.nx() || fine.n_directions() != coarse.n_directions())
    throw InvalidArgument("fine grid must refine the coarse grid by 2 in space");
  if (fine_data.n_steps != 2 * coarse_time.n_steps)
    throw InvalidArgument("fine data must refine the coarse time grid by 2");

  std::map<std::tuple<int, int, int, int>, std::size_t> coarse_face;
  for (std::size_t f = 0; f < coarse.n_faces(); ++f) {
    const auto& face = coarse.faces()[f];
    const auto [i, j] = coarse.cell_index(face.cell);
    coarse_face[{i, j, face.axis, face.side}] = f;
  }
  std::vector<std::size_t> parent(fine.n_faces());
  std::vector<int> count(coarse.n_faces(), 0);
  for (std::size_t f = 0; f < fine.n_faces(); ++f) {
    const auto& face = fine.faces()[f];
    const auto [i, j] = fine.cell_index(face.cell);
    const int cj = coarse.dimension() == 2 ? j / 2 : j;
    const auto it = coarse_face.find({i / 2, cj, face.axis, face.side});
    if (it == coarse_face.end()) throw InvalidArgument("fine boundary face has no coarse parent");
    parent[f] = it->second;
    ++count[it->second];
  }

  Measurement out;
  out.n_steps = coarse_time.n_steps;
  out.dt = coarse_time.dt;
  out.tau = coarse_time.tau();
  out.trace = BoundaryTrace(coarse, TracePart::Outflow, out.n_steps + 1, out.dt);
  for (std::size_t n = 0; n <= out.n_steps; ++n) {
    for (std::size_t f = 0; f < fine.n_faces(); ++f) {
      const std::size_t cf = parent[f];
      for (std::size_t k = 0; k < coarse.n_directions(); ++k)
        out.trace(n, cf, k) += fine_data.trace(2 * n, f, k) / count[cf];
    }
  }
  out.trace.mask(coarse);
  return out;
}

}  // namespace rtetr::experiment

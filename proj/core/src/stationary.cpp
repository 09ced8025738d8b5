#include "rtetr/stationary.hpp"

#include <cmath>
#include <sstream>

#include "rtetr/error.hpp"

namespace rtetr {
namespace {

void check_spec(const PhaseSpaceGrid& grid, const Medium& medium, const StationarySpec& spec) {
  if (medium.n_cells() != grid.n_cells()) throw InvalidArgument("medium does not match grid");
  if (!spec.source.matches(grid)) throw InvalidArgument("source does not match grid");
  if (spec.tol < 0.0 || !std::isfinite(spec.tol)) throw InvalidArgument("tol must be > 0");
  if (spec.max_sweeps < 1) throw InvalidArgument("max_sweeps must be >= 1");
  if (spec.inflow) {
    const auto& h = *spec.inflow;
    if (h.n_faces() != grid.n_faces() || h.n_directions() != grid.n_directions())
      throw InvalidArgument("inflow trace does not match grid");
    if (spec.inflow_sample >= h.n_times()) throw InvalidArgument("inflow sample out of range");
  }
}

// Operator applied to u, minus source / l.
Field residual_field(const PhaseSpaceGrid& grid, const Medium& medium, const Field& u,
                     const StationarySpec& spec, bool reversed) {
  Field r(grid);
  const BoundaryTrace* inflow = spec.inflow ? &*spec.inflow : nullptr;
  accumulate_derivative(grid, u, 1.0, r, Upwind::Along, Ghost::Zero, inflow, spec.inflow_sample);
  const double sign = reversed ? -1.0 : 1.0;
  for (std::size_t c = 0; c < grid.n_cells(); ++c) {
    const double sigma = sign * (medium.mu_a(c) + medium.mu_s(c));
    for (std::size_t k = 0; k < grid.n_directions(); ++k) r(c, k) += sigma * u(c, k);
  }
  accumulate_scattering(grid, medium, u, -sign, reversed, r);
  r.axpy(-1.0 / grid.diameter(), spec.source);
  return r;
}

// Solves (theta.grad + sign * sigma) u = rhs exactly by upwind marching.
void sweep(const PhaseSpaceGrid& grid, const Medium& medium, const Field& rhs,
           const BoundaryTrace* inflow, std::size_t sample, double sign, Field& u) {
  const int nx = grid.nx();
  const int ny = grid.dimension() == 2 ? grid.ny() : 1;
  for (std::size_t k = 0; k < grid.n_directions(); ++k) {
    const auto& d = grid.direction(k);
    const double vx = std::abs(d.x) < 1e-12 ? 0.0 : d.x;
    const double vy = grid.dimension() == 2 && std::abs(d.y) >= 1e-12 ? d.y : 0.0;
    const double ax = std::abs(vx) / grid.spacing(0);
    const double ay = grid.dimension() == 2 ? std::abs(vy) / grid.spacing(1) : 0.0;
    const int up_x = vx > 0.0 ? -1 : 1;
    const int up_y = vy > 0.0 ? -1 : 1;
    for (int jj = 0; jj < ny; ++jj) {
      const int j = up_y < 0 ? jj : ny - 1 - jj;
      for (int ii = 0; ii < nx; ++ii) {
        const int i = up_x < 0 ? ii : nx - 1 - ii;
        const std::ptrdiff_t cell = grid.cell_at(i, j);
        if (cell == kNoNeighbor) continue;
        const auto c = static_cast<std::size_t>(cell);
        const double diag = ax + ay + sign * (medium.mu_a(c) + medium.mu_s(c));
        if (!(diag > 0.0))
          throw SolverError("reversed sweep is singular on this grid; refine the mesh");
        double acc = rhs(c, k);
        for (int axis = 0; axis < grid.dimension(); ++axis) {
          const double a = axis == 0 ? ax : ay;
          if (a == 0.0) continue;
          const int up = axis == 0 ? up_x : up_y;
          const std::ptrdiff_t nb = grid.neighbor(c, axis, up);
          double fu = 0.0;
          if (nb != kNoNeighbor) {
            fu = u(static_cast<std::size_t>(nb), k);
          } else if (inflow != nullptr) {
            fu = (*inflow)(sample, static_cast<std::size_t>(grid.boundary_face(c, axis, up)), k);
          }
          acc += a * fu;
        }
        u(c, k) = acc / diag;
      }
    }
  }
}

StationaryResult source_iteration(const PhaseSpaceGrid& grid, const Medium& medium,
                                  const StationarySpec& spec, bool reversed) {
  check_spec(grid, medium, spec);
  const double tol = spec.tol > 0.0 ? spec.tol : 1e-10 * (1.0 + v0_norm(grid, spec.source));
  const double sign = reversed ? -1.0 : 1.0;
  const BoundaryTrace* inflow = spec.inflow ? &*spec.inflow : nullptr;

  StationaryResult result;
  result.solution = Field(grid);
  result.residual = v0_norm(grid, residual_field(grid, medium, result.solution, spec, reversed));
  if (result.residual <= tol) return result;

  Field rhs(grid);
  for (int s = 1; s <= spec.max_sweeps; ++s) {
    rhs = spec.source;
    rhs *= 1.0 / grid.diameter();
    // direct: + mu_s K u_prev ; reversed: - mu_s K* psi_prev
    accumulate_scattering(grid, medium, result.solution, sign, reversed, rhs);
    sweep(grid, medium, rhs, inflow, spec.inflow_sample, sign, result.solution);
    result.sweeps = s;
    result.residual = v0_norm(grid, residual_field(grid, medium, result.solution, spec, reversed));
    result.history.push_back(result.residual);
    if (!std::isfinite(result.residual)) break;
    if (result.residual <= tol) return result;
  }
  std::ostringstream os;
  os << "stationary source iteration did not converge in " << result.sweeps
     << " sweeps (residual " << result.residual << ", tol " << tol << ")";
  throw SolverError(os.str(), result.residual);
}

}  // namespace

StationaryResult solve_stationary_direct_report(const PhaseSpaceGrid& grid, const Medium& medium,
                                                const StationarySpec& spec) {
  return source_iteration(grid, medium, spec, false);
}

Field solve_stationary_direct(const PhaseSpaceGrid& grid, const Medium& medium,
                              const StationarySpec& spec) {
  return source_iteration(grid, medium, spec, false).solution;
}

StationaryResult solve_stationary_reversed_report(const PhaseSpaceGrid& grid, const Medium& medium,
                                                  const StationarySpec& spec) {
  if (!regime_report(medium, grid).satisfied)
    warn("weak-scattering condition fails; reversed stationary solution carries no guarantee");
  return source_iteration(grid, medium, spec, true);
}

Field solve_stationary_reversed(const PhaseSpaceGrid& grid, const Medium& medium,
                                const StationarySpec& spec) {
  return solve_stationary_reversed_report(grid, medium, spec).solution;
}

double stationary_residual(const PhaseSpaceGrid& grid, const Medium& medium, const Field& u,
                           const StationarySpec& spec, bool reversed) {
  check_spec(grid, medium, spec);
  if (!u.matches(grid)) throw InvalidArgument("field does not match grid");
  return v0_norm(grid, residual_field(grid, medium, u, spec, reversed));
}

Field infsup_witness(const PhaseSpaceGrid& grid, const Medium& medium, const Field& psi) {
  if (!psi.matches(grid)) throw InvalidArgument("field does not match grid");
  Field phi = directional_derivative(grid, psi, Upwind::Along, Ghost::Zero);
  for (std::size_t c = 0; c < grid.n_cells(); ++c) {
    const double sigma = medium.mu_a(c) + medium.mu_s(c);
    for (std::size_t k = 0; k < grid.n_directions(); ++k) phi(c, k) -= sigma * psi(c, k);
  }
  phi *= grid.diameter();
  return phi;
}

}  // namespace rtetr

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <random>

#include "rtetr/rtetr.hpp"

namespace rtetr::testing {

inline PhaseSpaceGrid rod(int n, double length = 1.0, double speed = 1.0) {
  GeometryConfig gc;
  gc.kind = GeometryKind::Rod1D;
  gc.length = length;
  gc.n_cells = n;
  gc.speed = speed;
  return build_grid(gc);
}

inline PhaseSpaceGrid box(int n, int n_theta, double width = 1.0, double height = 1.0) {
  GeometryConfig gc;
  gc.kind = GeometryKind::Box2D;
  gc.width = width;
  gc.height = height;
  gc.n_cells = n;
  gc.n_theta = n_theta;
  return build_grid(gc);
}

inline BoundaryTrace random_trace(const PhaseSpaceGrid& grid, TracePart part,
                                  std::size_t n_times, double dt, std::uint64_t seed) {
  BoundaryTrace h(grid, part, n_times, dt);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  for (auto& v : h.values()) v = ud(rng);
  h.mask(grid);
  return h;
}

// Isotropic Gaussian exp(-|x - centre|^2 / width^2).
inline Field pulse(const PhaseSpaceGrid& grid, double cx, double cy, double width) {
  Field f(grid);
  for (std::size_t c = 0; c < grid.n_cells(); ++c) {
    const auto x = grid.cell_center(c);
    const double r2 = (x.x - cx) * (x.x - cx) + (x.y - cy) * (x.y - cy);
    for (std::size_t k = 0; k < grid.n_directions(); ++k) f(c, k) = std::exp(-r2 / (width * width));
  }
  return f;
}

inline Eigen::VectorXd vec(const Field& f) {
  return Eigen::Map<const Eigen::VectorXd>(f.values().data(),
                                           static_cast<Eigen::Index>(f.size()));
}

inline Field field(const PhaseSpaceGrid& grid, const Eigen::VectorXd& v) {
  Field f(grid);
  for (Eigen::Index i = 0; i < v.size(); ++i) f[static_cast<std::size_t>(i)] = v(i);
  return f;
}

// Columns are images of unit fields.
inline Eigen::MatrixXd assemble(const PhaseSpaceGrid& grid,
                                const std::function<Field(const Field&)>& map) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd a(n, n);
  Field e(grid);
  for (Eigen::Index j = 0; j < n; ++j) {
    e[static_cast<std::size_t>(j)] = 1.0;
    a.col(j) = vec(map(e));
    e[static_cast<std::size_t>(j)] = 0.0;
  }
  return a;
}

// Diagonal of the V0 mass matrix: cell volume times direction weight.
inline Eigen::VectorXd mass(const PhaseSpaceGrid& grid) {
  Eigen::VectorXd m(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t c = 0; c < grid.n_cells(); ++c)
    for (std::size_t k = 0; k < grid.n_directions(); ++k)
      m(static_cast<Eigen::Index>(c * grid.n_directions() + k)) =
          grid.cell_volume() * grid.weight(k);
  return m;
}

// First-order upwind theta.grad with zero ghosts, built from cell adjacency.
inline Eigen::MatrixXd upwind_matrix(const PhaseSpaceGrid& grid) {
  const std::size_t nd = grid.n_directions();
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t c = 0; c < grid.n_cells(); ++c) {
    const auto [i, j] = grid.cell_index(c);
    for (std::size_t k = 0; k < nd; ++k) {
      const double comp[2] = {grid.direction(k).x, grid.direction(k).y};
      const auto row = static_cast<Eigen::Index>(c * nd + k);
      for (int axis = 0; axis < grid.dimension(); ++axis) {
        if (comp[axis] == 0.0) continue;
        const double a = std::abs(comp[axis]) / grid.spacing(axis);
        d(row, row) += a;
        const int step = comp[axis] > 0 ? -1 : 1;
        const auto up = axis == 0 ? grid.cell_at(i + step, j) : grid.cell_at(i, j + step);
        if (up >= 0) d(row, static_cast<Eigen::Index>(static_cast<std::size_t>(up) * nd + k)) -= a;
      }
    }
  }
  return d;
}

// Per-cell scattering matrix (K f)_k = sum_k' kappa(k,k') w_k' f_k'.
inline Eigen::MatrixXd scattering_matrix(const PhaseSpaceGrid& grid, const Medium& medium) {
  const std::size_t nd = grid.n_directions();
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t c = 0; c < grid.n_cells(); ++c)
    for (std::size_t a = 0; a < nd; ++a)
      for (std::size_t b = 0; b < nd; ++b)
        k(static_cast<Eigen::Index>(c * nd + a), static_cast<Eigen::Index>(c * nd + b)) =
            medium.kernel()(c, a, b) * grid.weight(b);
  return k;
}

inline Eigen::MatrixXd coefficient_diagonal(const PhaseSpaceGrid& grid,
                                            std::span<const double> mu) {
  const std::size_t nd = grid.n_directions();
  Eigen::VectorXd d(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t c = 0; c < grid.n_cells(); ++c)
    for (std::size_t k = 0; k < nd; ++k) d(static_cast<Eigen::Index>(c * nd + k)) = mu[c];
  return d.asDiagonal();
}

inline double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / b.norm();
}

// l <D psi - mu_a psi - mu_s (psi - K* psi), phi>
inline double bilinear_b(const PhaseSpaceGrid& g, const Medium& m, const Field& psi,
                         const Field& phi) {
  Field r = directional_derivative(g, psi);
  const Field ks = apply_scattering_adjoint(g, m, psi);
  for (std::size_t c = 0; c < g.n_cells(); ++c)
    for (std::size_t k = 0; k < g.n_directions(); ++k)
      r(c, k) += -(m.mu_a(c) + m.mu_s(c)) * psi(c, k) + m.mu_s(c) * ks(c, k);
  return g.diameter() * v0_inner(g, r, phi);
}

// Random field whose inflow trace vanishes.
inline Field zero_inflow(const PhaseSpaceGrid& g, std::uint64_t seed) {
  Field f = random_field(g, seed);
  for (std::size_t face = 0; face < g.n_faces(); ++face)
    for (std::size_t k = 0; k < g.n_directions(); ++k)
      if (in_part(g, face, k, TracePart::Inflow)) f(g.faces()[face].cell, k) = 0.0;
  return f;
}

struct MinNormGap {
  double relative = 0.0;    // |h_cg - h_dense| / |h_dense| in the trace norm
  double norm_ratio = 0.0;  // |h_cg| / |h_seed|, at most 1 for a minimiser
  bool converged = false;
};

// Compares min_norm_control with the weighted pseudoinverse of the assembled
// control map on a reachable target Y h_seed.
inline MinNormGap min_norm_gap(const PhaseSpaceGrid& g, const Medium& m, double tau,
                               std::uint64_t seed) {
  const TimeGrid tg = make_time_grid(g, tau);
  struct Entry {
    std::size_t n, f, k;
  };
  std::vector<Entry> entries;
  for (std::size_t n = 0; n <= tg.n_steps; ++n)
    for (std::size_t f = 0; f < g.n_faces(); ++f)
      for (std::size_t k = 0; k < g.n_directions(); ++k)
        if (in_part(g, f, k, TracePart::Inflow)) entries.push_back({n, f, k});

  const auto cols = static_cast<Eigen::Index>(entries.size());
  Eigen::MatrixXd y(static_cast<Eigen::Index>(g.size()), cols);
  Eigen::VectorXd w(cols);
  BoundaryTrace unit(g, TracePart::Inflow, tg.n_steps + 1, tg.dt);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const Entry& e = entries[static_cast<std::size_t>(j)];
    unit(e.n, e.f, e.k) = 1.0;
    y.col(j) = vec(steer(g, m, unit));
    unit(e.n, e.f, e.k) = 0.0;
    w(j) = trace_weight(g, e.f, e.k) * tg.dt;
  }

  // Reachable, so the minimiser does not depend on the field weights.
  const BoundaryTrace h_seed = random_trace(g, TracePart::Inflow, tg.n_steps + 1, tg.dt, seed);
  const Field v_star = steer(g, m, h_seed);
  const Eigen::VectorXd s = w.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd ys = y * s.asDiagonal();
  const Eigen::VectorXd h = s.cwiseProduct(ys.completeOrthogonalDecomposition().solve(vec(v_star)));

  ControlOptions opt;
  opt.tol = 1e-10;
  opt.max_iter = 5000;
  const ControlSolveReport rep = min_norm_control(g, m, v_star, tau, opt);
  BoundaryTrace diff = rep.h_min;
  BoundaryTrace dense(g, TracePart::Inflow, tg.n_steps + 1, tg.dt);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const Entry& e = entries[static_cast<std::size_t>(j)];
    dense(e.n, e.f, e.k) = h(j);
    diff(e.n, e.f, e.k) -= h(j);
  }
  MinNormGap out;
  out.converged = rep.converged;
  out.relative = trace_time_norm(g, diff) / trace_time_norm(g, dense);
  out.norm_ratio = trace_time_norm(g, rep.h_min) / trace_time_norm(g, h_seed);
  return out;
}

}  // namespace rtetr::testing

#include "rtetr/medium.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "rtetr/error.hpp"

namespace rtetr {

namespace {

constexpr double kConservationTol = 1e-10;

double max_row_deviation(const PhaseSpaceGrid& grid, std::span<const double> table) {
  const std::size_t nd = grid.n_directions();
  double worst = 0.0;
  for (std::size_t k = 0; k < nd; ++k) {
    double row = 0.0;
    for (std::size_t kp = 0; kp < nd; ++kp) row += table[k * nd + kp] * grid.weight(kp);
    worst = std::max(worst, std::abs(row - 1.0));
  }
  return worst;
}

void check_table_shape(const PhaseSpaceGrid& grid, const std::vector<std::vector<double>>& tables,
                       const std::vector<std::uint32_t>& cell_table) {
  const std::size_t nd = grid.n_directions();
  if (tables.empty()) throw InvalidArgument("kernel needs at least one table");
  for (const auto& t : tables) {
    if (t.size() != nd * nd) throw InvalidArgument("kernel table must be n_dir x n_dir");
  }
  if (!cell_table.empty()) {
    if (cell_table.size() != grid.n_cells())
      throw InvalidArgument("per-cell kernel index must have one entry per cell");
    for (auto idx : cell_table) {
      if (idx >= tables.size()) throw InvalidArgument("per-cell kernel index out of range");
    }
  }
}

}  // namespace

Kernel::Kernel(KernelKind kind, double g, std::size_t n_dir,
               std::vector<std::vector<double>> tables, std::vector<std::uint32_t> cell_table)
    : kind_(kind),
      g_(g),
      n_dir_(n_dir),
      tables_(std::move(tables)),
      cell_table_(std::move(cell_table)) {}

void conservative_reciprocal(const PhaseSpaceGrid& grid, std::span<double> table) {
  const std::size_t nd = grid.n_directions();
  if (table.size() != nd * nd) throw InvalidArgument("kernel table must be n_dir x n_dir");
  std::vector<double> tmp(table.size());
  for (int iter = 0; iter < 200; ++iter) {
    for (std::size_t k = 0; k < nd; ++k) {
      double row = 0.0;
      for (std::size_t kp = 0; kp < nd; ++kp) row += table[k * nd + kp] * grid.weight(kp);
      if (row <= 0.0) throw InvalidArgument("kernel row has no positive mass");
      for (std::size_t kp = 0; kp < nd; ++kp) table[k * nd + kp] /= row;
    }
    for (std::size_t k = 0; k < nd; ++k) {
      for (std::size_t kp = 0; kp < nd; ++kp) {
        const double a = table[k * nd + kp];
        const double b = table[grid.opposite(kp) * nd + grid.opposite(k)];
        tmp[k * nd + kp] = 0.5 * (a + b);
      }
    }
    std::copy(tmp.begin(), tmp.end(), table.begin());
    if (max_row_deviation(grid, table) <= 1e-14) break;
  }
}

Kernel Kernel::isotropic(const PhaseSpaceGrid& grid) {
  const std::size_t nd = grid.n_directions();
  std::vector<double> t(nd * nd, 1.0 / grid.sphere_measure());
  return Kernel(KernelKind::Isotropic, 0.0, nd, {std::move(t)}, {});
}

Kernel Kernel::henyey_greenstein(const PhaseSpaceGrid& grid, double g) {
  if (!(g > -1.0 && g < 1.0)) throw InvalidArgument("Henyey-Greenstein g must lie in (-1, 1)");
  const std::size_t nd = grid.n_directions();
  std::vector<double> t(nd * nd);
  for (std::size_t k = 0; k < nd; ++k) {
    for (std::size_t kp = 0; kp < nd; ++kp) {
      const auto& a = grid.direction(k);
      const auto& b = grid.direction(kp);
      const double cosphi = std::clamp(a.x * b.x + a.y * b.y, -1.0, 1.0);
      if (grid.dimension() == 1) {
        t[k * nd + kp] = 0.5 * (1.0 + g * cosphi);
      } else {
        t[k * nd + kp] =
            (1.0 - g * g) / (2.0 * std::numbers::pi * (1.0 + g * g - 2.0 * g * cosphi));
      }
    }
  }
  conservative_reciprocal(grid, t);
  return Kernel(KernelKind::HenyeyGreenstein, g, nd, {std::move(t)}, {});
}

Kernel Kernel::table(const PhaseSpaceGrid& grid, std::vector<std::vector<double>> tables,
                     std::vector<std::uint32_t> cell_table) {
  check_table_shape(grid, tables, cell_table);
  for (auto& t : tables) {
    if (std::any_of(t.begin(), t.end(), [](double v) { return !(v >= 0.0); }))
      throw InvalidArgument("kernel table entries must be nonnegative");
    conservative_reciprocal(grid, t);
  }
  return Kernel(KernelKind::Table, 0.0, grid.n_directions(), std::move(tables),
                std::move(cell_table));
}

Kernel Kernel::unnormalized(const PhaseSpaceGrid& grid, std::vector<std::vector<double>> tables,
                            std::vector<std::uint32_t> cell_table) {
  check_table_shape(grid, tables, cell_table);
  return Kernel(KernelKind::Table, 0.0, grid.n_directions(), std::move(tables),
                std::move(cell_table));
}

Medium::Medium(const PhaseSpaceGrid& grid, std::vector<double> mu_a, std::vector<double> mu_s,
               Kernel kernel)
    : mu_a_(std::move(mu_a)), mu_s_(std::move(mu_s)), kernel_(std::move(kernel)) {
  if (mu_a_.size() != grid.n_cells() || mu_s_.size() != grid.n_cells())
    throw InvalidArgument("coefficient arrays must have one entry per cell");
  if (kernel_.n_directions() != grid.n_directions())
    throw InvalidArgument("kernel does not match the direction set");
  for (std::size_t c = 0; c < mu_a_.size(); ++c) {
    if (!(mu_a_[c] >= 0.0) || !std::isfinite(mu_a_[c]))
      throw InvalidArgument("absorption coefficient must be finite and nonnegative");
    if (!(mu_s_[c] >= 0.0) || !std::isfinite(mu_s_[c]))
      throw InvalidArgument("scattering coefficient must be finite and nonnegative");
  }
  mu_a_bar_ = *std::max_element(mu_a_.begin(), mu_a_.end());
  mu_s_bar_ = *std::max_element(mu_s_.begin(), mu_s_.end());
}

Medium Medium::homogeneous(const PhaseSpaceGrid& grid, double mu_a, double mu_s, Kernel kernel) {
  return Medium(grid, std::vector<double>(grid.n_cells(), mu_a),
                std::vector<double>(grid.n_cells(), mu_s), std::move(kernel));
}

Medium Medium::vacuum(const PhaseSpaceGrid& grid) {
  return homogeneous(grid, 0.0, 0.0, Kernel::isotropic(grid));
}

std::vector<double> sample_coefficient(const PhaseSpaceGrid& grid,
                                       const std::function<double(double, double)>& profile) {
  std::vector<double> out(grid.n_cells());
  for (std::size_t c = 0; c < grid.n_cells(); ++c) {
    const auto p = grid.cell_center(c);
    out[c] = profile(p.x, p.y);
  }
  return out;
}

void accumulate_scattering(const PhaseSpaceGrid& grid, const Medium& medium, const Field& f,
                           double scale, bool adjoint, Field& out) {
  if (!f.matches(grid) || !out.matches(grid)) throw InvalidArgument("field does not match grid");
  const std::size_t nd = grid.n_directions();
  const auto w = grid.weights();
  const Kernel& K = medium.kernel();
  for (std::size_t c = 0; c < grid.n_cells(); ++c) {
    const double s = scale * medium.mu_s(c);
    if (s == 0.0) continue;
    const auto table = K.table_for_cell(c);
    for (std::size_t k = 0; k < nd; ++k) {
      double acc = 0.0;
      if (!adjoint) {
        for (std::size_t kp = 0; kp < nd; ++kp) acc += table[k * nd + kp] * f(c, kp) * w[kp];
      } else {
        for (std::size_t kp = 0; kp < nd; ++kp) acc += table[kp * nd + k] * f(c, kp) * w[kp];
      }
      out(c, k) += s * acc;
    }
  }
}

namespace {

Field scatter(const PhaseSpaceGrid& grid, const Medium& medium, const Field& f, bool adjoint) {
  if (!f.matches(grid)) throw InvalidArgument("field does not match grid");
  const std::size_t nd = grid.n_directions();
  const auto w = grid.weights();
  Field out(grid);
  for (std::size_t c = 0; c < grid.n_cells(); ++c) {
    const auto table = medium.kernel().table_for_cell(c);
    for (std::size_t k = 0; k < nd; ++k) {
      double acc = 0.0;
      for (std::size_t kp = 0; kp < nd; ++kp) {
        const double kappa = adjoint ? table[kp * nd + k] : table[k * nd + kp];
        acc += kappa * f(c, kp) * w[kp];
      }
      out(c, k) = acc;
    }
  }
  return out;
}

}  // namespace

Field apply_scattering(const PhaseSpaceGrid& grid, const Medium& medium, const Field& f) {
  return scatter(grid, medium, f, false);
}

Field apply_scattering_adjoint(const PhaseSpaceGrid& grid, const Medium& medium, const Field& f) {
  return scatter(grid, medium, f, true);
}

std::vector<KernelViolation> validate_kernel(const PhaseSpaceGrid& grid, const Medium& medium) {
  std::vector<KernelViolation> out;
  const Kernel& K = medium.kernel();
  const std::size_t nd = grid.n_directions();
  for (std::size_t t = 0; t < K.n_tables(); ++t) {
    const auto table = K.table(t);
    for (std::size_t k = 0; k < nd; ++k) {
      double row = 0.0;
      for (std::size_t kp = 0; kp < nd; ++kp) {
        const double v = table[k * nd + kp];
        if (!(v >= 0.0)) out.push_back({"nonnegativity", t, k, kp, v});
        row += v * grid.weight(kp);
        const double r = table[grid.opposite(kp) * nd + grid.opposite(k)];
        if (v != r) out.push_back({"reciprocity", t, k, kp, v - r});
      }
      if (!(std::abs(row - 1.0) <= kConservationTol)) out.push_back({"conservation", t, k, k, row});
    }
  }
  return out;
}

RegimeReport regime_report(const Medium& medium, const PhaseSpaceGrid& grid) {
  RegimeReport r;
  r.l = grid.diameter();
  r.c = grid.speed();
  r.T = grid.crossing_time();
  r.mu_a_bar = medium.mu_a_bar();
  r.mu_s_bar = medium.mu_s_bar();
  const double sigma = r.mu_a_bar + r.mu_s_bar;
  const double growth = std::exp(r.l * sigma);
  r.lhs = r.l * r.mu_s_bar * growth;
  r.satisfied = r.lhs < std::exp(-1.0);
  if (r.mu_s_bar > 0.0) {
    r.omega_star = std::log(r.T * growth * r.c * r.mu_s_bar) / r.T;
    r.E_star = std::log(growth * r.mu_s_bar * r.l * std::numbers::e) / r.T;
  } else {
    r.omega_star = -std::numeric_limits<double>::infinity();
    r.E_star = -std::numeric_limits<double>::infinity();
  }
  r.alpha0 = 1.0 + std::numbers::sqrt2 + r.l * sigma;
  r.beta0 = std::numbers::sqrt2 + (1.0 + r.l * sigma) * growth;
  const double num = std::numbers::sqrt2 * std::numbers::e - 1.0;
  const double den = std::numbers::sqrt2 * std::numbers::e;
  r.alpha = num / (den * r.alpha0);
  r.beta = num / (den * r.beta0);
  return r;
}

double RegimeReport::direct_growth_bound(double t) const {
  return std::exp(c * mu_s_bar * t);
}

double RegimeReport::reversed_growth_bound(double t) const {
  const double n0 = std::exp(l * (mu_a_bar + mu_s_bar));
  return n0 * std::exp(n0 * c * mu_s_bar * t);
}

double RegimeReport::decay_bound(double t) const {
  if (t < T) return reversed_growth_bound(t);
  const double growth = std::exp(l * (mu_a_bar + mu_s_bar));
  const double base = std::numbers::e * growth * l * mu_s_bar;
  return std::numbers::e * growth * std::pow(base, t / T - 1.0);
}

double RegimeReport::suggested_tau(double target, int max_multiple) const {
  for (int k = 1; k <= max_multiple; ++k) {
    const double b = decay_bound(k * T);
    if (b * b <= target) return k * T;
  }
  return -1.0;
}

Field random_field(const PhaseSpaceGrid& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Field f(grid);
  for (auto& v : f.values()) v = dist(rng);
  return f;
}

double operator_norm_estimate(const LinearMap& apply, const LinearMap& adjoint,
                              const PhaseSpaceGrid& grid, int iters, std::uint64_t seed) {
  if (iters < 1) throw InvalidArgument("power iteration needs at least one iteration");
  Field x = random_field(grid, seed);
  x *= 1.0 / v0_norm(grid, x);
  double estimate = 0.0;
  for (int i = 0; i < iters; ++i) {
    const Field y = apply(x);
    if (adjoint) {
      Field z = adjoint(y);
      // <x, A*A x> = |A x|^2 with |x| = 1
      estimate = v0_norm(grid, y);
      const double nz = v0_norm(grid, z);
      if (nz == 0.0) return 0.0;
      x = std::move(z);
      x *= 1.0 / nz;
    } else {
      const double ny = v0_norm(grid, y);
      estimate = ny;
      if (ny == 0.0) return 0.0;
      x = y;
      x *= 1.0 / ny;
    }
  }
  if (adjoint) estimate = std::max(estimate, v0_norm(grid, apply(x)));
  return estimate;
}

double operator_norm_estimate(const LinearMap& apply, const PhaseSpaceGrid& grid, int iters,
                              std::uint64_t seed) {
  return operator_norm_estimate(apply, LinearMap{}, grid, iters, seed);
}

}  // namespace rtetr

#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rtetr/phase_grid.hpp"

namespace rtetr {

enum class KernelKind { Isotropic, HenyeyGreenstein, Table };

/// Scattering kernel realized on the discrete ordinates.
///
/// A table holds kappa[k * n_dir + k'] such that (K f)_k = sum_k' kappa[k,k'] f_k' w_k'.
/// One table may be shared by every cell, or `cell_table` selects a table per cell.
class Kernel {
 public:
  static Kernel isotropic(const PhaseSpaceGrid& grid);
  /// 2D normalization (1 - g^2) / (2 pi (1 + g^2 - 2 g cos phi)); on the rod
  /// the forward/backward split (1 +/- g)/2 is used instead.
  static Kernel henyey_greenstein(const PhaseSpaceGrid& grid, double g);
  /// Rows are made conservative and reciprocal (see `conservative_reciprocal`).
  static Kernel table(const PhaseSpaceGrid& grid, std::vector<std::vector<double>> tables,
                      std::vector<std::uint32_t> cell_table = {});
  /// Tables taken verbatim, without normalization. Intended for validation tests.
  static Kernel unnormalized(const PhaseSpaceGrid& grid, std::vector<std::vector<double>> tables,
                             std::vector<std::uint32_t> cell_table = {});

  KernelKind kind() const noexcept { return kind_; }
  double asymmetry() const noexcept { return g_; }
  std::size_t n_directions() const noexcept { return n_dir_; }
  std::size_t n_tables() const noexcept { return tables_.size(); }
  std::span<const double> table(std::size_t t) const { return tables_[t]; }
  std::size_t table_index(std::size_t cell) const {
    return cell_table_.empty() ? 0 : cell_table_[cell];
  }
  std::span<const double> table_for_cell(std::size_t cell) const {
    return tables_[table_index(cell)];
  }
  double operator()(std::size_t cell, std::size_t k, std::size_t kp) const {
    return tables_[table_index(cell)][k * n_dir_ + kp];
  }

 private:
  Kernel(KernelKind kind, double g, std::size_t n_dir, std::vector<std::vector<double>> tables,
         std::vector<std::uint32_t> cell_table);

  KernelKind kind_ = KernelKind::Isotropic;
  double g_ = 0.0;
  std::size_t n_dir_ = 0;
  std::vector<std::vector<double>> tables_;
  std::vector<std::uint32_t> cell_table_;
};

/// Alternately renormalizes rows (sum_k' kappa w_k' = 1) and averages
/// kappa[k,k'] with kappa[-k',-k] until both hold; the final step is the
/// average, so reciprocity is exact bitwise.
void conservative_reciprocal(const PhaseSpaceGrid& grid, std::span<double> table);

/// Piecewise-constant optical coefficients with a scattering kernel.
class Medium {
 public:
  Medium(const PhaseSpaceGrid& grid, std::vector<double> mu_a, std::vector<double> mu_s,
         Kernel kernel);
  static Medium homogeneous(const PhaseSpaceGrid& grid, double mu_a, double mu_s, Kernel kernel);
  static Medium vacuum(const PhaseSpaceGrid& grid);

  std::span<const double> mu_a() const noexcept { return mu_a_; }
  std::span<const double> mu_s() const noexcept { return mu_s_; }
  double mu_a(std::size_t cell) const { return mu_a_[cell]; }
  double mu_s(std::size_t cell) const { return mu_s_[cell]; }
  double mu_a_bar() const noexcept { return mu_a_bar_; }
  double mu_s_bar() const noexcept { return mu_s_bar_; }
  const Kernel& kernel() const noexcept { return kernel_; }
  std::size_t n_cells() const noexcept { return mu_a_.size(); }

 private:
  std::vector<double> mu_a_;
  std::vector<double> mu_s_;
  Kernel kernel_;
  double mu_a_bar_ = 0.0;
  double mu_s_bar_ = 0.0;
};

/// Samples a coefficient function at cell centers.
std::vector<double> sample_coefficient(const PhaseSpaceGrid& grid,
                                       const std::function<double(double, double)>& profile);

/// K f
Field apply_scattering(const PhaseSpaceGrid& grid, const Medium& medium, const Field& f);
/// K* f, the exact transpose of K in the V0 inner product.
Field apply_scattering_adjoint(const PhaseSpaceGrid& grid, const Medium& medium, const Field& f);

/// out(c, .) += scale * mu_s(c) * (K f)(c, .)   (or K* when `adjoint`)
void accumulate_scattering(const PhaseSpaceGrid& grid, const Medium& medium, const Field& f,
                           double scale, bool adjoint, Field& out);

struct KernelViolation {
  std::string invariant;  // "nonnegativity", "conservation" or "reciprocity"
  std::size_t table = 0;
  std::size_t k = 0;
  std::size_t kp = 0;
  double value = 0.0;
};

/// Empty iff every table is nonnegative, conservative to 1e-10 per row and
/// exactly reciprocal.
std::vector<KernelViolation> validate_kernel(const PhaseSpaceGrid& grid, const Medium& medium);

/// Weak-scattering diagnostics and the analytic constants that depend on them.
struct RegimeReport {
  double l = 0.0;
  double c = 0.0;
  double T = 0.0;
  double mu_a_bar = 0.0;
  double mu_s_bar = 0.0;
  double lhs = 0.0;  // l mu_s e^{l (mu_a + mu_s)}
  bool satisfied = false;
  double omega_star = 0.0;
  double E_star = 0.0;
  double alpha0 = 0.0;
  double beta0 = 0.0;
  double alpha = 0.0;
  double beta = 0.0;

  /// Bound on |R(t)| (and hence |S(t)|) in V0. For t >= T this is the
  /// exponential decay estimate; for t < T the omega = 0 growth estimate.
  double decay_bound(double t) const;
  /// omega = 0 growth bounds M_0 e^{M_0 c mu_s t} and N_0 e^{N_0 c mu_s t}.
  double direct_growth_bound(double t) const;
  double reversed_growth_bound(double t) const;
  /// Smallest integer multiple of T with decay_bound^2 <= target, or a
  /// negative value if none exists within `max_multiple` crossings.
  double suggested_tau(double target = 0.5, int max_multiple = 1000) const;
};

RegimeReport regime_report(const Medium& medium, const PhaseSpaceGrid& grid);

using LinearMap = std::function<Field(const Field&)>;

/// Power-iteration estimate of the V0 operator norm of `apply`. When `adjoint`
/// is given the iteration runs on adjoint(apply(x)); otherwise `apply` is
/// taken to be self-adjoint.
double operator_norm_estimate(const LinearMap& apply, const LinearMap& adjoint,
                              const PhaseSpaceGrid& grid, int iters, std::uint64_t seed);
double operator_norm_estimate(const LinearMap& apply, const PhaseSpaceGrid& grid, int iters,
                              std::uint64_t seed);

/// Deterministic uniform(-1, 1) field.
Field random_field(const PhaseSpaceGrid& grid, std::uint64_t seed);

}  // namespace rtetr

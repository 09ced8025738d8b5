#include <cmath>

#include "doctest.h"
#include "support.hpp"

using namespace rtetr;
using namespace rtetr::testing;

namespace {

StationarySpec tight(Field source) {
  StationarySpec spec;
  spec.source = std::move(source);
  spec.tol = 1e-13;
  spec.max_sweeps = 2000;
  return spec;
}

}  // namespace

TEST_CASE("zero data gives zero") {
  const auto g = box(8, 8);
  const Medium m = Medium::homogeneous(g, 0.1, 0.1, Kernel::isotropic(g));
  StationarySpec spec;
  spec.source = Field(g);
  CHECK(solve_stationary_direct(g, m, spec) == Field(g));
  CHECK(solve_stationary_reversed(g, m, spec) == Field(g));
}

TEST_CASE("absorbing rod matches the ODE solution") {
  auto error = [](int n) {
    const auto g = rod(n);
    const double mu = 1.5, f = 2.0;
    const Medium m = Medium::homogeneous(g, mu, 0.0, Kernel::isotropic(g));
    StationarySpec spec;
    spec.source = Field(g, f);
    const Field u = solve_stationary_direct(g, m, spec);
    double num = 0.0, den = 0.0;
    for (std::size_t c = 0; c < g.n_cells(); ++c) {
      const double x = g.cell_center(c).x;
      const double exact = f / (g.diameter() * mu) * (1.0 - std::exp(-mu * x));
      num += (u(c, 0) - exact) * (u(c, 0) - exact);
      den += exact * exact;
    }
    return std::sqrt(num / den);
  };
  const double e128 = error(128), e256 = error(256);
  CHECK(e128 < 0.01);
  CHECK(e128 / e256 == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("sweeps agree with the dense stationary matrix") {
  const auto g = box(16, 8);
  std::vector<double> mu_a(g.n_cells()), mu_s(g.n_cells());
  for (std::size_t c = 0; c < g.n_cells(); ++c) {
    const auto x = g.cell_center(c);
    mu_a[c] = 0.05 + 0.1 * x.x;
    mu_s[c] = 0.1 + 0.05 * x.y;
  }
  const Medium m(g, mu_a, mu_s, Kernel::henyey_greenstein(g, 0.5));
  const Eigen::MatrixXd d = upwind_matrix(g);
  const Eigen::MatrixXd k = scattering_matrix(g, m);
  const Eigen::MatrixXd sa = coefficient_diagonal(g, m.mu_a());
  const Eigen::MatrixXd ss = coefficient_diagonal(g, m.mu_s());
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d.rows(), d.cols());
  // K* is the V0 adjoint; uniform weights make it the plain transpose here.
  const Eigen::MatrixXd direct = d + sa + ss * (id - k);
  const Eigen::MatrixXd reversed = d - sa - ss * (id - k.transpose());

  const Field f = random_field(g, 21);
  const Eigen::VectorXd rhs = vec(f) / g.diameter();
  const Eigen::VectorXd u_dense = direct.partialPivLu().solve(rhs);
  const Eigen::VectorXd psi_dense = reversed.partialPivLu().solve(rhs);

  CHECK(rel(vec(solve_stationary_direct(g, m, tight(f))), u_dense) <= 1e-8);
  CHECK(rel(vec(solve_stationary_reversed(g, m, tight(f))), psi_dense) <= 1e-8);
}

TEST_CASE("reversed lift with inflow data") {
  const auto g = box(12, 8);
  const Medium m = Medium::homogeneous(g, 0.1, 0.1, Kernel::isotropic(g));
  StationarySpec spec;
  spec.source = Field(g);
  spec.inflow = random_trace(g, TracePart::Inflow, 1, 0.0, 4);
  const StationaryResult r = solve_stationary_reversed_report(g, m, spec);
  const double tol = 1e-10;
  CHECK(r.residual <= tol);
  CHECK(stationary_residual(g, m, r.solution, spec, true) <= tol);
  CHECK(v0_norm(g, r.solution) > 0.0);
}

TEST_CASE("residual certificates and contraction") {
  const auto g = box(12, 8);
  const Medium m = Medium::homogeneous(g, 0.1, 0.15, Kernel::henyey_greenstein(g, 0.3));
  REQUIRE(regime_report(m, g).satisfied);
  StationarySpec spec;
  spec.source = random_field(g, 5);
  const double tol = 1e-10 * (1.0 + v0_norm(g, spec.source));
  for (bool reversed : {false, true}) {
    const StationaryResult r = reversed ? solve_stationary_reversed_report(g, m, spec)
                                        : solve_stationary_direct_report(g, m, spec);
    CHECK(stationary_residual(g, m, r.solution, spec, reversed) <= tol);
    for (std::size_t i = 1; i < r.history.size(); ++i)
      if (r.history[i - 1] > 1e3 * tol) CHECK(r.history[i] / r.history[i - 1] < 1.0);
  }
  spec.max_sweeps = 1;
  spec.tol = 1e-15;
  CHECK_THROWS_AS(solve_stationary_direct(g, m, spec), SolverError);
}

TEST_CASE("reversed stability estimate") {
  const auto g = box(16, 8);
  const Medium m = Medium::homogeneous(g, 0.1, 0.1, Kernel::isotropic(g));
  const RegimeReport r = regime_report(m, g);
  for (std::uint64_t s = 0; s < 5; ++s) {
    StationarySpec spec;
    spec.source = random_field(g, 100 + s);
    const Field psi = solve_stationary_reversed(g, m, spec);
    CHECK(v1_norm(g, psi) <= 1.5 / r.beta * v0_norm(g, spec.source));
  }
}

TEST_CASE("inf-sup witness") {
  const auto g = box(16, 8);
  const Medium m = Medium::homogeneous(g, 0.1, 0.1, Kernel::isotropic(g));
  const double beta = regime_report(m, g).beta;
  CHECK(infsup_witness(g, m, Field(g)) == Field(g));
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Field psi = zero_inflow(g, s);
    const Field phi = infsup_witness(g, m, psi);
    CHECK(bilinear_b(g, m, psi, phi) >= 0.9 * beta * v1_norm(g, psi) * v0_norm(g, phi));
  }
  const Medium ballistic = Medium::homogeneous(g, 0.3, 0.0, Kernel::isotropic(g));
  const Field psi = zero_inflow(g, 77);
  const Field phi = infsup_witness(g, ballistic, psi);
  CHECK(bilinear_b(g, ballistic, psi, phi) ==
        doctest::Approx(v0_inner(g, phi, phi)).epsilon(1e-12));
}

TEST_CASE("discrete Poincare inequalities") {
  const auto g = box(16, 8);
  const Medium m = Medium::homogeneous(g, 0.1, 0.1, Kernel::isotropic(g));
  const double l = g.diameter();
  const double sigma = m.mu_a_bar() + m.mu_s_bar();
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Field u = zero_inflow(g, 300 + s);
    const Field du = directional_derivative(g, u);
    Field plus = du, minus = du;
    plus.axpy(sigma, u);
    minus.axpy(-sigma, u);
    CHECK(v0_norm(g, u) <= 1.2 * l / std::sqrt(2.0) * v0_norm(g, plus));
    CHECK(v0_norm(g, u) <= 1.2 * l / std::sqrt(2.0) * std::exp(l * sigma) * v0_norm(g, minus));
  }
}

#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "support.hpp"

using namespace rtetr;
using namespace rtetr::testing;

namespace {

Eigen::MatrixXd hg_rows(const PhaseSpaceGrid& grid, double g) {
  const auto n = static_cast<Eigen::Index>(grid.n_directions());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    double row = 0.0;
    for (Eigen::Index b = 0; b < n; ++b) {
      const auto& da = grid.direction(static_cast<std::size_t>(a));
      const auto& db = grid.direction(static_cast<std::size_t>(b));
      const double cosine = da.x * db.x + da.y * db.y;
      k(a, b) = (1.0 - g * g) / (2.0 * std::numbers::pi * (1.0 + g * g - 2.0 * g * cosine));
      row += k(a, b) * grid.weight(static_cast<std::size_t>(b));
    }
    k.row(a) /= row;
  }
  return k;
}

}  // namespace

TEST_CASE("isotropic scattering fixes angular constants") {
  const auto g = box(6, 8);
  const Medium m = Medium::homogeneous(g, 0.1, 0.3, Kernel::isotropic(g));
  Field f(g);
  for (std::size_t c = 0; c < g.n_cells(); ++c)
    for (std::size_t k = 0; k < 8; ++k) f(c, k) = static_cast<double>(c) + 0.5;
  const Field kf = apply_scattering(g, m, f);
  CHECK(rel(vec(kf), vec(f)) < 1e-14);
  CHECK(v0_norm(g, apply_scattering(g, m, Field(g))) == 0.0);
}

TEST_CASE("Henyey-Greenstein matches the normalized dense rows") {
  const auto g = box(4, 8);
  const Medium m = Medium::homogeneous(g, 0.0, 1.0, Kernel::henyey_greenstein(g, 0.5));
  const Eigen::MatrixXd rows = hg_rows(g, 0.5);
  const Field f = random_field(g, 3);
  const Field kf = apply_scattering(g, m, f);
  for (std::size_t c = 0; c < g.n_cells(); ++c) {
    for (std::size_t a = 0; a < 8; ++a) {
      double expect = 0.0;
      for (std::size_t b = 0; b < 8; ++b)
        expect += rows(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) *
                  g.weight(b) * f(c, b);
      CHECK(kf(c, a) == doctest::Approx(expect).epsilon(1e-13));
    }
  }
}

TEST_CASE("scattering adjoint") {
  const auto g = box(5, 8);
  const Medium hg = Medium::homogeneous(g, 0.0, 1.0, Kernel::henyey_greenstein(g, 0.7));
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Field f = random_field(g, 2 * s);
    const Field h = random_field(g, 2 * s + 1);
    const double lhs = v0_inner(g, apply_scattering(g, hg, f), h);
    const double rhs = v0_inner(g, f, apply_scattering_adjoint(g, hg, h));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
  }
  const Medium iso = Medium::homogeneous(g, 0.0, 1.0, Kernel::isotropic(g));
  const Field f = random_field(g, 7);
  CHECK(apply_scattering(g, iso, f) == apply_scattering_adjoint(g, iso, f));
}

TEST_CASE("kernel validation") {
  const auto g = box(4, 8);
  CHECK(validate_kernel(g, Medium::homogeneous(g, 0.1, 0.1, Kernel::isotropic(g))).empty());
  CHECK(validate_kernel(g, Medium::homogeneous(g, 0.1, 0.1, Kernel::henyey_greenstein(g, 0.9)))
            .empty());

  std::vector<double> table(64, 1.0 / (2.0 * std::numbers::pi));
  table[1] = -0.01;
  const Medium bad = Medium::homogeneous(g, 0.1, 0.1, Kernel::unnormalized(g, {table}));
  const auto issues = validate_kernel(g, bad);
  int negative = 0;
  for (const auto& v : issues) negative += v.invariant == "nonnegativity";
  CHECK(negative == 1);
}

TEST_CASE("bundled kernels are conservative and reciprocal") {
  const auto g = box(4, 16);
  for (const Kernel& kernel : {Kernel::isotropic(g), Kernel::henyey_greenstein(g, 0.3),
                               Kernel::henyey_greenstein(g, 0.95)}) {
    for (std::size_t a = 0; a < 16; ++a) {
      double row = 0.0;
      for (std::size_t b = 0; b < 16; ++b) {
        row += kernel(0, a, b) * g.weight(b);
        CHECK(kernel(0, a, b) == kernel(0, g.opposite(b), g.opposite(a)));
        CHECK(kernel(0, a, b) >= 0.0);
      }
      CHECK(std::abs(row - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("regime constants") {
  const auto g = rod(32);
  // tests/oracles/constants.py
  const RegimeReport r = regime_report(Medium::homogeneous(g, 0.0, 0.1, Kernel::isotropic(g)), g);
  CHECK(r.lhs == doctest::Approx(0.11051709180756476).epsilon(1e-14));
  CHECK(r.satisfied);
  CHECK(r.omega_star == doctest::Approx(-2.2025850929940457).epsilon(1e-14));
  CHECK(r.E_star == doctest::Approx(-1.2025850929940457).epsilon(1e-14));
  CHECK(r.alpha0 == doctest::Approx(2.514213562373095).epsilon(1e-14));
  CHECK(r.beta0 == doctest::Approx(2.6299015722563074).epsilon(1e-14));
  CHECK(r.alpha == doctest::Approx(0.29427490311929319).epsilon(1e-14));
  CHECK(r.beta == doctest::Approx(0.28132990234071338).epsilon(1e-14));

  const RegimeReport strong =
      regime_report(Medium::homogeneous(g, 0.0, 0.5, Kernel::isotropic(g)), g);
  CHECK(strong.lhs == doctest::Approx(0.82436063535006407).epsilon(1e-14));
  CHECK_FALSE(strong.satisfied);

  const RegimeReport ballistic =
      regime_report(Medium::homogeneous(g, 0.7, 0.0, Kernel::isotropic(g)), g);
  CHECK(ballistic.lhs == 0.0);
  CHECK(ballistic.satisfied);
  CHECK(ballistic.omega_star == -std::numeric_limits<double>::infinity());
  CHECK(ballistic.decay_bound(1.5 * ballistic.T) == 0.0);
}

TEST_CASE("decay bound on the weak-scattering box") {
  const auto g = box(8, 8);
  const RegimeReport r = regime_report(Medium::homogeneous(g, 0.1, 0.1, Kernel::isotropic(g)), g);
  CHECK(r.lhs == doctest::Approx(0.18765149429323386).epsilon(1e-13));
  CHECK(r.decay_bound(r.T) == doctest::Approx(3.6068784842123653).epsilon(1e-13));
  CHECK(r.decay_bound(2 * r.T) == doctest::Approx(1.8398313728576632).epsilon(1e-13));
  CHECK(r.decay_bound(3 * r.T) == doctest::Approx(0.93847893555817761).epsilon(1e-13));
  CHECK(r.suggested_tau() == doctest::Approx(4 * r.T));
}

TEST_CASE("regime lhs grows with scattering") {
  const auto g = box(4, 8);
  double prev = -1.0;
  for (double mus = 0.0; mus <= 1.0; mus += 0.05) {
    const RegimeReport r =
        regime_report(Medium::homogeneous(g, 0.2, mus, Kernel::isotropic(g)), g);
    CHECK(r.lhs > prev);
    CHECK(r.satisfied == (r.lhs < std::exp(-1.0)));
    if (r.satisfied && mus > 0.0) CHECK(r.E_star < 0.0);
    prev = r.lhs;
  }
}

TEST_CASE("power iteration") {
  const auto g = box(6, 8);
  const LinearMap id = [](const Field& f) { return f; };
  CHECK(std::abs(operator_norm_estimate(id, g, 5, 1) - 1.0) <= 1e-10);

  const Medium m = Medium::homogeneous(g, 0.0, 1.0, Kernel::henyey_greenstein(g, 0.6));
  const LinearMap k = [&](const Field& f) { return apply_scattering(g, m, f); };
  const LinearMap kt = [&](const Field& f) { return apply_scattering_adjoint(g, m, f); };
  const double norm = operator_norm_estimate(k, kt, g, 200, 3);
  CHECK(norm <= 1.0 + 1e-8);
  CHECK(norm >= 1.0 - 1e-6);

  const LinearMap k2 = [&](const Field& f) { return 2.0 * apply_scattering(g, m, f); };
  const LinearMap k2t = [&](const Field& f) { return 2.0 * apply_scattering_adjoint(g, m, f); };
  CHECK(operator_norm_estimate(k2, k2t, g, 200, 3) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK_THROWS_AS(operator_norm_estimate(id, g, 0, 1), InvalidArgument);
}

TEST_CASE("medium rejects negative coefficients") {
  const auto g = rod(4);
  CHECK_THROWS_AS(Medium(g, {0.1, -0.1, 0.1, 0.1}, {0, 0, 0, 0}, Kernel::isotropic(g)),
                  InvalidArgument);
  const Medium m(g, {0.1, 0.4, 0.2, 0.0}, {0.3, 0.0, 0.5, 0.1}, Kernel::isotropic(g));
  CHECK(m.mu_a_bar() == 0.4);
  CHECK(m.mu_s_bar() == 0.5);
}

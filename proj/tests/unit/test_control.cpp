#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "support.hpp"

using namespace rtetr;
using namespace rtetr::testing;

namespace {

Medium weak(const PhaseSpaceGrid& g) {
  return Medium::homogeneous(g, 0.1, 0.1, Kernel::isotropic(g));
}

BoundaryTrace difference(const BoundaryTrace& a, const BoundaryTrace& b) {
  BoundaryTrace d = a;
  for (std::size_t i = 0; i < d.values().size(); ++i) d.values()[i] -= b.values()[i];
  return d;
}

}  // namespace

TEST_CASE("steering is linear and vanishes on zero data") {
  const auto g = box(8, 8);
  const Medium m = weak(g);
  const TimeGrid tg = make_time_grid(g, 0.8);
  const BoundaryTrace zero(g, TracePart::Inflow, tg.n_steps + 1, tg.dt);
  CHECK(steer(g, m, zero) == Field(g));

  const BoundaryTrace a = random_trace(g, TracePart::Inflow, tg.n_steps + 1, tg.dt, 1);
  const BoundaryTrace b = random_trace(g, TracePart::Inflow, tg.n_steps + 1, tg.dt, 2);
  BoundaryTrace s = a;
  for (std::size_t i = 0; i < s.values().size(); ++i) s.values()[i] -= 0.5 * b.values()[i];
  Field expect = steer(g, m, a);
  expect.axpy(-0.5, steer(g, m, b));
  CHECK(rel(vec(steer(g, m, s, 0.8)), vec(expect)) <= 1e-13);

  const BoundaryTrace wrong(g, TracePart::Inflow, tg.n_steps + 3, tg.dt);
  CHECK_THROWS_AS(steer(g, m, wrong, 0.8), InvalidArgument);
}

TEST_CASE("vacuum steering carries the inflow profile inwards") {
  const int n = 32;
  const auto g = rod(n);
  const Medium m = Medium::homogeneous(g, 0.0, 0.0, Kernel::isotropic(g));
  const TimeGrid tg = make_time_grid(g, 1.0, 1.0);
  REQUIRE(tg.n_steps == static_cast<std::size_t>(n));
  std::size_t left = g.n_faces();
  for (std::size_t f = 0; f < g.n_faces(); ++f)
    if (g.faces()[f].normal.x < 0.0) left = f;
  REQUIRE(left < g.n_faces());
  BoundaryTrace h(g, TracePart::Inflow, tg.n_steps + 1, tg.dt);
  for (std::size_t s = 0; s <= tg.n_steps; ++s) {
    const double t = static_cast<double>(s) * tg.dt - 0.5;
    h(s, left, 0) = std::exp(-t * t / 0.01);
  }
  const Field u = steer(g, m, h);
  for (std::size_t c = 0; c < g.n_cells(); ++c) {
    CHECK(u(c, 0) == doctest::Approx(h(tg.n_steps - 1 - c, left, 0)).epsilon(1e-13));
    CHECK(u(c, 1) == 0.0);
  }
}

TEST_CASE("exact discrete adjoint") {
  const auto g = box(8, 8);
  const Medium m = Medium::homogeneous(g, 0.2, 0.3, Kernel::henyey_greenstein(g, 0.5));
  const TimeGrid tg = make_time_grid(g, 1.0);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const BoundaryTrace h = random_trace(g, TracePart::Inflow, tg.n_steps + 1, tg.dt, 10 + s);
    const Field x = random_field(g, 20 + s);
    const double lhs = v0_inner(g, steer(g, m, h), x);
    const double rhs = trace_time_inner(g, h, adjoint_steer(g, m, x, tg));
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("continuum adjoint formula approaches the discrete one") {
  auto mismatch = [](int n) {
    const auto g = rod(n);
    const Medium m = Medium::homogeneous(g, 0.3, 0.0, Kernel::isotropic(g));
    const Field x = pulse(g, 0.5, 0.0, 0.15);
    const TimeGrid tg = make_time_grid(g, 1.5);
    const BoundaryTrace exact = adjoint_steer(g, m, x, tg, AdjointMode::ExactDiscrete);
    const BoundaryTrace paper = adjoint_steer(g, m, x, tg, AdjointMode::PaperFormula);
    return trace_time_norm(g, difference(exact, paper)) / trace_time_norm(g, exact);
  };
  const double e64 = mismatch(64), e128 = mismatch(128), e256 = mismatch(256);
  CHECK(e128 < e64);
  CHECK(e256 < e128);
  CHECK(e256 < 0.1);
}

TEST_CASE("minimum-norm control basics") {
  const auto g = box(8, 8);
  const Medium m = weak(g);
  const double tau = 1.2 * g.crossing_time();
  const ControlSolveReport zero = min_norm_control(g, m, Field(g), tau);
  CHECK(zero.cg_iterations == 0);
  CHECK(trace_time_norm(g, zero.h_min) == 0.0);
  CHECK_THROWS_AS(min_norm_control(g, m, pulse(g, 0.5, 0.5, 0.2), 0.9 * g.crossing_time()),
                  InvalidArgument);

  const auto r = rod(128);
  const Medium vac = Medium::homogeneous(r, 0.0, 0.0, Kernel::isotropic(r));
  ControlOptions opt;
  opt.tol = 1e-6;
  opt.max_iter = 50;
  opt.cfl_safety = 1.0;
  const ControlSolveReport rep = min_norm_control(r, vac, pulse(r, 0.5, 0.0, 0.08), 1.25, opt);
  CHECK(rep.converged);
  CHECK(rep.cg_iterations <= 50);
  CHECK(rep.achieved <= 1e-6);
  CHECK(rel(vec(steer(r, vac, rep.h_min)), vec(rep.reached)) <= 1e-13);
}

TEST_CASE("minimum-norm control matches the weighted pseudoinverse") {
  const auto g = box(8, 4);
  const MinNormGap gap = min_norm_gap(g, weak(g), 1.2 * g.crossing_time(), 33);
  CHECK(gap.converged);
  CHECK(gap.relative <= 1e-6);
  CHECK(gap.norm_ratio <= 1.0);
}

TEST_CASE("control cost is uniform across targets") {
  const auto g = box(16, 8);
  const Medium m = weak(g);
  const double tau = regime_report(m, g).suggested_tau();
  ControlOptions opt;
  opt.tol = 1e-2;
  std::vector<double> cost;
  for (const auto& [cx, cy] : std::vector<std::pair<double, double>>{
           {0.5, 0.5}, {0.3, 0.4}, {0.7, 0.6}, {0.4, 0.7}, {0.6, 0.3}}) {
    const Field v = pulse(g, cx, cy, 0.3);
    const ControlSolveReport rep = min_norm_control(g, m, v, tau, opt);
    CHECK(rep.converged);
    cost.push_back(trace_time_norm(g, rep.h_min) / v0_norm(g, v));
  }
  const auto [lo, hi] = std::minmax_element(cost.begin(), cost.end());
  CHECK(std::isfinite(*hi));
  CHECK(*hi / *lo < 3.0);
}

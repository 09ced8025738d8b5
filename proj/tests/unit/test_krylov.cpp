#include <Eigen/Dense>
#include <random>
#include <span>
#include <vector>

#include "doctest.h"
#include "rtetr/krylov.hpp"

using namespace rtetr;

namespace {

struct Vec {
  std::vector<double> v;
  std::span<double> values() { return v; }
  std::span<const double> values() const { return v; }
};

Vec from(const Eigen::VectorXd& e) { return {std::vector<double>(e.data(), e.data() + e.size())}; }

Eigen::VectorXd to(const Vec& x) {
  return Eigen::Map<const Eigen::VectorXd>(x.v.data(), static_cast<Eigen::Index>(x.v.size()));
}

KrylovOp<Vec> op(const Eigen::MatrixXd& a) {
  return [&a](const Vec& x) { return from(a * to(x)); };
}

const KrylovInner<Vec> dot = [](const Vec& a, const Vec& b) { return to(a).dot(to(b)); };

Eigen::MatrixXd random_matrix(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = nd(rng);
  return a;
}

}  // namespace

TEST_CASE("conjugate gradients on an SPD system") {
  const int n = 60;
  const Eigen::MatrixXd r = random_matrix(n, 1);
  const Eigen::MatrixXd a = r.transpose() * r + n * Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(n, -1.0, 2.0);
  Vec x{std::vector<double>(n, 0.0)};
  const KrylovReport rep = conjugate_gradient<Vec>(op(a), from(b), x, dot, 1e-12, 200);
  CHECK(rep.converged);
  CHECK(rep.iterations <= n);
  const Eigen::VectorXd exact = a.llt().solve(b);
  CHECK((to(x) - exact).norm() <= 1e-10 * exact.norm());
  CHECK(rep.history.front() == doctest::Approx(1.0));
}

TEST_CASE("GMRES on a nonsymmetric system") {
  const int n = 80;
  const Eigen::MatrixXd a = random_matrix(n, 2) / std::sqrt(n) + 3.0 * Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd b = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd exact = a.partialPivLu().solve(b);
  for (int restart : {5, 30, 100}) {
    Vec x{std::vector<double>(n, 0.0)};
    const KrylovReport rep = gmres<Vec>(op(a), from(b), x, dot, 1e-12, 1000, restart);
    CHECK(rep.converged);
    CHECK((to(x) - exact).norm() <= 1e-9 * exact.norm());
    CHECK((b - a * to(x)).norm() <= 1e-11 * b.norm());
  }
}

TEST_CASE("zero right-hand side") {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(4, 4);
  Vec x{{1.0, 2.0, 3.0, 4.0}};
  const Vec b{std::vector<double>(4, 0.0)};
  CHECK(gmres<Vec>(op(a), b, x, dot, 1e-10, 10).iterations == 0);
  CHECK(x.v == std::vector<double>(4, 0.0));
  x.v = {1.0, 1.0, 1.0, 1.0};
  CHECK(conjugate_gradient<Vec>(op(a), b, x, dot, 1e-10, 10).converged);
  CHECK(x.v == std::vector<double>(4, 0.0));
}

TEST_CASE("iteration cap is reported") {
  const int n = 50;
  const Eigen::MatrixXd a = random_matrix(n, 3);
  Vec x{std::vector<double>(n, 0.0)};
  const KrylovReport rep =
      gmres<Vec>(op(a), from(Eigen::VectorXd::Ones(n)), x, dot, 1e-14, 7, 5);
  CHECK_FALSE(rep.converged);
  CHECK(rep.iterations == 7);
}

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace rtetr {

struct KrylovReport {
  int iterations = 0;
  double residual = 0.0;  // relative: |b - A x| / |b|
  bool converged = false;
  std::vector<double> history;
};

// Vec needs values() returning a span of doubles and value semantics.
namespace detail {

template <class Vec>
void axpy(double a, const Vec& x, Vec& y) {
  auto xs = x.values();
  auto ys = y.values();
  for (std::size_t i = 0; i < ys.size(); ++i) ys[i] += a * xs[i];
}

template <class Vec>
void scale(double a, Vec& x) {
  for (auto& v : x.values()) v *= a;
}

template <class Vec>
void zero(Vec& x) {
  for (auto& v : x.values()) v = 0.0;
}

}  // namespace detail

template <class Vec>
using KrylovOp = std::function<Vec(const Vec&)>;
template <class Vec>
using KrylovInner = std::function<double(const Vec&, const Vec&)>;

/// Conjugate gradients for a symmetric positive semidefinite `apply`.
/// `x` holds the initial guess on entry.
template <class Vec>
KrylovReport conjugate_gradient(const KrylovOp<Vec>& apply, const Vec& b, Vec& x,
                                const KrylovInner<Vec>& inner, double tol, int max_iter) {
  KrylovReport rep;
  const double bnorm = std::sqrt(inner(b, b));
  if (bnorm == 0.0) {
    detail::zero(x);
    rep.converged = true;
    return rep;
  }
  Vec r = b;
  detail::axpy(-1.0, apply(x), r);
  Vec p = r;
  double rr = inner(r, r);
  rep.residual = std::sqrt(rr) / bnorm;
  rep.history.push_back(rep.residual);
  while (rep.residual > tol && rep.iterations < max_iter) {
    const Vec ap = apply(p);
    const double pap = inner(p, ap);
    if (!(pap > 0.0)) break;
    const double alpha = rr / pap;
    detail::axpy(alpha, p, x);
    detail::axpy(-alpha, ap, r);
    const double rr_new = inner(r, r);
    detail::scale(rr_new / rr, p);
    detail::axpy(1.0, r, p);
    rr = rr_new;
    ++rep.iterations;
    rep.residual = std::sqrt(rr) / bnorm;
    rep.history.push_back(rep.residual);
  }
  rep.converged = rep.residual <= tol;
  return rep;
}

/// Restarted GMRES with modified Gram-Schmidt and Givens rotations.
/// `x` holds the initial guess on entry.
template <class Vec>
KrylovReport gmres(const KrylovOp<Vec>& apply, const Vec& b, Vec& x,
                   const KrylovInner<Vec>& inner, double tol, int max_iter, int restart = 30) {
  KrylovReport rep;
  const double bnorm = std::sqrt(inner(b, b));
  if (bnorm == 0.0) {
    detail::zero(x);
    rep.converged = true;
    return rep;
  }
  const auto m = static_cast<std::size_t>(restart);
  while (true) {
    Vec r = b;
    detail::axpy(-1.0, apply(x), r);
    double beta = std::sqrt(inner(r, r));
    rep.residual = beta / bnorm;
    if (rep.history.empty()) rep.history.push_back(rep.residual);
    if (rep.residual <= tol || rep.iterations >= max_iter) break;

    std::vector<Vec> basis;
    basis.reserve(m + 1);
    detail::scale(1.0 / beta, r);
    basis.push_back(std::move(r));
    std::vector<std::vector<double>> h(m + 1, std::vector<double>(m, 0.0));
    std::vector<double> cs(m, 0.0), sn(m, 0.0), g(m + 1, 0.0);
    g[0] = beta;
    std::size_t j = 0;
    for (; j < m && rep.iterations < max_iter; ++j) {
      Vec w = apply(basis[j]);
      for (std::size_t i = 0; i <= j; ++i) {
        h[i][j] = inner(w, basis[i]);
        detail::axpy(-h[i][j], basis[i], w);
      }
      h[j + 1][j] = std::sqrt(inner(w, w));
      for (std::size_t i = 0; i < j; ++i) {
        const double t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
        h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
        h[i][j] = t;
      }
      const double denom = std::hypot(h[j][j], h[j + 1][j]);
      cs[j] = denom == 0.0 ? 1.0 : h[j][j] / denom;
      sn[j] = denom == 0.0 ? 0.0 : h[j + 1][j] / denom;
      h[j][j] = denom;
      const double hj1 = h[j + 1][j];
      h[j + 1][j] = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      ++rep.iterations;
      rep.residual = std::abs(g[j + 1]) / bnorm;
      rep.history.push_back(rep.residual);
      const bool breakdown = hj1 <= 1e-14 * beta;
      if (!breakdown) {
        detail::scale(1.0 / hj1, w);
        basis.push_back(std::move(w));
      }
      if (rep.residual <= tol || breakdown) {
        ++j;
        break;
      }
    }
    std::vector<double> y(j, 0.0);
    for (std::size_t i = j; i-- > 0;) {
      double s = g[i];
      for (std::size_t l = i + 1; l < j; ++l) s -= h[i][l] * y[l];
      y[i] = h[i][i] == 0.0 ? 0.0 : s / h[i][i];
    }
    for (std::size_t i = 0; i < j; ++i) detail::axpy(y[i], basis[i], x);
    if (rep.residual <= tol && j < m) {
      Vec check = b;
      detail::axpy(-1.0, apply(x), check);
      rep.residual = std::sqrt(inner(check, check)) / bnorm;
      break;
    }
  }
  rep.converged = rep.residual <= tol;
  return rep;
}

}  // namespace rtetr

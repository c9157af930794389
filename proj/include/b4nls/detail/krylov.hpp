#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

namespace b4nls::detail {

struct CgResult {
  Eigen::VectorXcd x;
  int iterations = 0;
  double relative_residual = 0.0;  // measured with the caller's norm, recomputed at exit
  bool converged = false;
  std::vector<double> history;     // relative residual after each iteration
};

/// Conjugate gradient for a Hermitian positive (semi)definite operator. The
/// iteration runs in the Euclidean inner product; `norm` only decides when to
/// stop, so a Sobolev-weighted stopping rule does not change the Krylov space.
template <class Apply, class Norm>
CgResult conjugate_gradient(Apply&& apply, const Eigen::VectorXcd& b, Eigen::VectorXcd x, double tol, int max_iter,
                            Norm&& norm) {
  CgResult out;
  const double bnorm = norm(b);
  if (bnorm == 0.0) {
    out.x = Eigen::VectorXcd::Zero(b.size());
    out.converged = true;
    return out;
  }
  if (x.size() != b.size()) x = Eigen::VectorXcd::Zero(b.size());
  Eigen::VectorXcd r = b - apply(x);
  double rel = norm(r) / bnorm;
  if (rel <= tol) {
    out.x = std::move(x);
    out.relative_residual = rel;
    out.converged = true;
    return out;
  }
  Eigen::VectorXcd p = r;
  double rr = r.squaredNorm();
  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::VectorXcd ap = apply(p);
    const double pap = p.dot(ap).real();
    if (!(pap > 0.0)) break;
    const double alpha = rr / pap;
    x += alpha * p;
    r -= alpha * ap;
    const double rr_new = r.squaredNorm();
    rel = norm(r) / bnorm;
    out.history.push_back(rel);
    out.iterations = it;
    if (rel <= tol) break;
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  out.relative_residual = norm(b - apply(x)) / bnorm;
  out.converged = out.relative_residual <= tol;
  out.x = std::move(x);
  return out;
}

template <class Apply>
CgResult conjugate_gradient(Apply&& apply, const Eigen::VectorXcd& b, Eigen::VectorXcd x, double tol, int max_iter) {
  return conjugate_gradient(std::forward<Apply>(apply), b, std::move(x), tol, max_iter,
                            [](const Eigen::VectorXcd& v) { return v.norm(); });
}

}  // namespace b4nls::detail

#pragma once

#include <cmath>
#include <utility>

namespace quasi {

struct CgResult {
  int iterations = 0;
  double rel_residual = 0.0;
  bool breakdown = false;  // hit a zero/negative curvature direction
};

/// Conjugate gradient for symmetric positive definite operators, warm-started
/// from `x`. Works on any vector type providing dot(a, b), axpy_in_place and
/// scale_in_place free functions (Volume and VolumeSequence both qualify).
/// Stops after `max_iterations` or once ||b - A x|| <= rel_tol * ||b||,
/// whichever comes first. On breakdown the current iterate is kept and the
/// flag is set.
template <class Vec, class ApplyOp>
CgResult cg_solve(ApplyOp&& apply, const Vec& b, Vec& x, int max_iterations,
                  double rel_tol) {
  CgResult result;
  const double b_norm = std::sqrt(dot(b, b));
  if (b_norm == 0.0) {
    scale_in_place(0.0, x);
    return result;
  }

  Vec r = b;
  {
    Vec ax = apply(x);
    axpy_in_place(-1.0, ax, r);
  }
  double rr = dot(r, r);
  result.rel_residual = std::sqrt(rr) / b_norm;
  if (result.rel_residual <= rel_tol) return result;

  Vec p = r;
  for (int it = 0; it < max_iterations; ++it) {
    Vec ap = apply(p);
    const double p_ap = dot(p, ap);
    if (!(p_ap > 0.0)) {
      result.breakdown = true;
      return result;
    }
    const double step = rr / p_ap;
    axpy_in_place(step, p, x);
    axpy_in_place(-step, ap, r);

    const double rr_next = dot(r, r);
    result.iterations = it + 1;
    result.rel_residual = std::sqrt(rr_next) / b_norm;
    if (result.rel_residual <= rel_tol) return result;

    scale_in_place(rr_next / rr, p);
    axpy_in_place(1.0, r, p);
    rr = rr_next;
  }
  return result;
}

}  // namespace quasi

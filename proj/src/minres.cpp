#include "ce/minres.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace ce {

namespace {

double checked_inner(const Vector& r, const Vector& y) {
  const double v = r.dot(y);
  if (!std::isfinite(v))
    throw std::runtime_error("preconditioner produced non-finite values");
  if (v < 0.0)
    throw std::runtime_error("preconditioner is not positive definite: r' M^-1 r < 0");
  return v;
}

}  // namespace

SolveReport minres(const ApplyFn& a, index_t n, const Vector& b, const ApplyFn& precond,
                   const MinresOptions& opts, Vector& x) {
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  SolveReport rep;
  x = Vector::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    rep.converged = true;
    rep.trace.samples.push_back({0, 0.0, 0.0, elapsed()});
    return rep;
  }

  Vector r1 = b;
  Vector y = precond ? precond(b) : b;
  double beta1 = checked_inner(r1, y);
  if (beta1 == 0.0) {
    // b is in the preconditioner's null space; nothing to do.
    rep.converged = true;
    rep.trace.samples.push_back({0, 0.0, 1.0, elapsed()});
    return rep;
  }
  beta1 = std::sqrt(beta1);

  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0;
  double qrnorm = beta1, phibar = beta1, cs = -1.0, sn = 0.0;
  Vector r2 = r1;
  Vector w = Vector::Zero(n);
  Vector w2 = Vector::Zero(n);

  rep.trace.samples.push_back({0, 1.0, opts.track_true_residual ? 1.0 : -1.0, elapsed()});

  const double tiny = 1e-290;
  for (index_t itn = 1; itn <= opts.maxit; ++itn) {
    const double s = 1.0 / beta;
    Vector v = s * y;
    y = a(v);
    if (itn >= 2) y -= (beta / oldb) * r1;
    const double alfa = v.dot(y);
    y -= (alfa / beta) * r2;
    r1 = r2;
    r2 = y;
    y = precond ? precond(r2) : r2;
    oldb = beta;
    beta = checked_inner(r2, y);
    beta = std::sqrt(beta);

    // Plane rotations folding the new column of the tridiagonal.
    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    double gamma = std::sqrt(gbar * gbar + beta * beta);
    gamma = std::max(gamma, tiny);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    Vector w1 = w2;
    w2 = w;
    w = (v - oldeps * w1 - delta * w2) / gamma;
    x += phi * w;
    qrnorm = phibar;

    IterationSample sample;
    sample.iter = itn;
    sample.recurrence_resid = qrnorm / beta1;
    if (opts.track_true_residual) sample.true_resid = (b - a(x)).norm() / bnorm;
    sample.seconds = elapsed();
    rep.trace.samples.push_back(sample);

    rep.iterations = itn;
    if (sample.recurrence_resid <= opts.tol) {
      rep.converged = true;
      break;
    }
    if (beta / beta1 < 1e-30) {
      // Krylov space exhausted: the iterate is exact up to roundoff.
      rep.converged = true;
      break;
    }
  }

  rep.final_recurrence_residual = qrnorm / beta1;
  rep.final_true_residual = (b - a(x)).norm() / bnorm;
  if (!rep.trace.samples.empty() && !opts.track_true_residual)
    rep.trace.samples.back().true_resid = rep.final_true_residual;
  return rep;
}

double relative_residual(const ApplyFn& a, const Vector& x, const Vector& b) {
  const double bnorm = b.norm();
  if (bnorm == 0.0) return a(x).norm();
  return (b - a(x)).norm() / bnorm;
}

double error_vs_reference(const Vector& x, const Vector& reference) {
  const double rnorm = reference.norm();
  if (rnorm == 0.0) return x.norm();
  return (x - reference).norm() / rnorm;
}

}  // namespace ce

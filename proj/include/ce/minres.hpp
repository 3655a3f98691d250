#pragma once

#include <functional>
#include <vector>

#include "ce/types.hpp"

namespace ce {

using ApplyFn = std::function<Vector(const Vector&)>;

struct IterationSample {
  index_t iter = 0;
  // Recurrence estimate of the preconditioned residual, relative to the
  // starting value.
  double recurrence_resid = 0.0;
  // ||b - A x|| / ||b||, from an explicit matvec.  -1 when not tracked.
  double true_resid = -1.0;
  double seconds = 0.0;
};

struct IterationTrace {
  std::vector<IterationSample> samples;
};

struct SolveReport {
  bool converged = false;
  index_t iterations = 0;
  double final_recurrence_residual = 0.0;
  double final_true_residual = 0.0;
  IterationTrace trace;
};

struct MinresOptions {
  double tol = 1e-10;
  index_t maxit = 1000;
  bool track_true_residual = true;
};

// Minimum-residual iteration for symmetric (indefinite or definite) A
// with an SPD preconditioner.  Stops when the recurrence estimate of the
// preconditioned residual drops below tol relative to its starting
// value; a Lanczos beta of zero before that signals an exact solution
// and is treated as convergence.  A preconditioner that produces a
// negative or non-finite inner product is reported as an error.
SolveReport minres(const ApplyFn& a, index_t n, const Vector& b, const ApplyFn& precond,
                   const MinresOptions& opts, Vector& x);

double relative_residual(const ApplyFn& a, const Vector& x, const Vector& b);
double error_vs_reference(const Vector& x, const Vector& reference);

}  // namespace ce

#pragma once

#include "stepcon/types.hpp"

namespace stepcon {

struct NnlsResult {
  Vector x;
  double residual = 0.0;  // ||A x - b||
  int iterations = 0;
};

/// Lawson-Hanson active-set solver for min ||A x - b|| subject to x >= 0.
/// max_iterations <= 0 selects 100 * (rows + cols). Throws kNoConvergence
/// when the cap is hit.
NnlsResult nnls(const Matrix& A, const Vector& b, double tol = 1e-10, int max_iterations = 0);

}  // namespace stepcon

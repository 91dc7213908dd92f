#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "sosarp/types.hpp"

namespace sosarp {

/// Block-diagonal symmetric matrix, one dense block per entry.
using BlockMatrix = std::vector<Matrix>;

BlockMatrix zeroBlocks(const std::vector<int>& sizes);
BlockMatrix identityBlocks(const std::vector<int>& sizes);
/// Frobenius inner product <A, B> summed over blocks.
Scalar inner(const BlockMatrix& a, const BlockMatrix& b);
Scalar frobeniusNorm(const BlockMatrix& a);
/// Smallest eigenvalue over all blocks.
Scalar minEigenvalue(const BlockMatrix& a);

struct SdpConstraint {
  BlockMatrix a;
  Scalar b = 0.0;
};

/// minimize <C, X>  subject to  <A_k, X> = b_k,  X positive semidefinite,
/// with X block-diagonal with the given block sizes.
struct SdpProblem {
  std::vector<int> blocks;
  BlockMatrix c;
  std::vector<SdpConstraint> constraints;

  /// Throws ContractViolation when a matrix does not conform to `blocks` or
  /// is not symmetric.
  void validate() const;
};

enum class SdpStatus { Optimal, Infeasible, DualInfeasible, MaxIterations, NumericalFailure };

std::string statusName(SdpStatus status);

struct SdpSolution {
  SdpStatus status = SdpStatus::NumericalFailure;
  BlockMatrix x;
  Vector y;
  BlockMatrix z;
  Scalar primal_objective = 0.0;
  Scalar dual_objective = 0.0;
  /// |pobj - dobj| / (1 + |pobj| + |dobj|).
  Scalar gap = 0.0;
  /// ||b - A(X)|| / (1 + ||b||).
  Scalar primal_residual = 0.0;
  /// ||C - Z - A^T y||_F / (1 + ||C||_F).
  Scalar dual_residual = 0.0;
  int iterations = 0;
  /// Constraints dropped as linearly dependent on the others.
  int removed_constraints = 0;
};

struct SdpOptions {
  Scalar tol = 1e-8;
  int max_iter = 200;
  /// Fraction of the distance to the cone boundary taken per step.
  Scalar step_fraction = 0.98;
  /// |dual objective| or |primal objective| beyond this is read as divergence.
  Scalar divergence = 1e12;
  /// Per-iteration trace on stderr.
  bool verbose = false;
};

/// Infeasible-start primal-dual interior-point method (HKM direction,
/// Mehrotra predictor-corrector). Failures come back as statuses.
SdpSolution solveSdp(const SdpProblem& problem, const SdpOptions& options = {});

/// Plain-text listing of C, every A_k and b_k, for cross-checking elsewhere.
void dumpSdp(const SdpProblem& problem, std::ostream& os);

}  // namespace sosarp

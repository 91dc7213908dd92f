#pragma once

#include "sosarp/sos.hpp"

namespace sosarp {

enum class SubsolveStatus { Converged, NumericalFailure, MaxIterations };

std::string statusName(SubsolveStatus status);

struct SubsolveResult {
  Vector s;
  Scalar model_value = 0.0;
  Scalar grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  SubsolveStatus status = SubsolveStatus::Converged;
};

/// Damped Newton from s = 0 on a convex, coercive model. Stops when
/// |grad m(s)| <= max(theta |s|^(p'-1), abs_tol); abs_tol < 0 selects
/// 1e-12 (1 + |f0|).
SubsolveResult minimizeModel(const SosModel& model, Scalar theta = 0.5, Scalar abs_tol = -1.0,
                             int max_iter = 500);

}  // namespace sosarp

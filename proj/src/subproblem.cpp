#include "sosarp/subproblem.hpp"

#include <cmath>
#include <limits>

namespace sosarp {

std::string statusName(SubsolveStatus status) {
  switch (status) {
    case SubsolveStatus::Converged: return "Converged";
    case SubsolveStatus::NumericalFailure: return "NumericalFailure";
    case SubsolveStatus::MaxIterations: return "MaxIterations";
  }
  return "?";
}

namespace {

// m(s) - f0, which keeps small model decreases visible.
Scalar shifted(const SosModel& m, const Vector& s) {
  return m.taylorPart(s) + m.sigma / m.p_prime * std::pow(s.norm(), m.p_prime);
}

Vector newtonDirection(const Matrix& h, const Vector& g) {
  const int n = static_cast<int>(g.size());
  Eigen::LLT<Matrix> llt(h);
  if (llt.info() == Eigen::Success) return -llt.solve(g);
  Scalar ridge = 1e-12 * (1.0 + h.cwiseAbs().maxCoeff());
  for (int k = 0; k < 30; ++k, ridge *= 10.0) {
    llt.compute(h + ridge * Matrix::Identity(n, n));
    if (llt.info() == Eigen::Success) return -llt.solve(g);
  }
  return -g;
}

}  // namespace

SubsolveResult minimizeModel(const SosModel& model, Scalar theta, Scalar abs_tol, int max_iter) {
  model.validate();
  require(theta > 0.0 && theta < 1.0, "minimizeModel: theta must lie in (0, 1)");
  if (abs_tol < 0.0) abs_tol = 1e-12 * (1.0 + std::abs(model.f0));
  const Scalar noise = 8.0 * std::numeric_limits<Scalar>::epsilon();

  SubsolveResult r;
  Vector s = Vector::Zero(model.n);
  Scalar val = 0.0;
  Vector g = model.gradient(s);
  for (int it = 0;; ++it) {
    r.iterations = it;
    const Scalar gn = g.norm();
    if (gn <= std::max(theta * std::pow(s.norm(), model.p_prime - 1), abs_tol)) {
      r.status = SubsolveStatus::Converged;
      break;
    }
    if (it == max_iter) {
      r.status = SubsolveStatus::MaxIterations;
      break;
    }
    Vector d = newtonDirection(model.hessian(s), g);
    Scalar slope = g.dot(d);
    if (!(slope < 0.0)) {
      d = -g;
      slope = -gn * gn;
    }
    // Armijo backtracking; a decrease below rounding level is tolerated so
    // that the last Newton steps are not rejected for noise.
    Scalar alpha = 1.0;
    bool accepted = false;
    for (int h = 0; h <= 60; ++h, alpha *= 0.5) {
      const Vector trial = s + alpha * d;
      const Scalar tv = shifted(model, trial);
      const Scalar slack = noise * (std::abs(val) + std::abs(tv));
      if (tv <= val + 1e-4 * alpha * slope + slack && tv <= 0.0) {
        s = trial;
        val = tv;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      r.status = SubsolveStatus::NumericalFailure;
      break;
    }
    g = model.gradient(s);
  }
  r.s = s;
  r.model_value = model.f0 + val;
  r.grad_norm = g.norm();
  r.converged = r.status == SubsolveStatus::Converged;
  return r;
}

}  // namespace sosarp

#include "sosarp/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <limits>

namespace sosarp {

BlockMatrix zeroBlocks(const std::vector<int>& sizes) {
  BlockMatrix r;
  r.reserve(sizes.size());
  for (int n : sizes) r.push_back(Matrix::Zero(n, n));
  return r;
}

BlockMatrix identityBlocks(const std::vector<int>& sizes) {
  BlockMatrix r;
  r.reserve(sizes.size());
  for (int n : sizes) r.push_back(Matrix::Identity(n, n));
  return r;
}

Scalar inner(const BlockMatrix& a, const BlockMatrix& b) {
  Scalar s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k].cwiseProduct(b[k]).sum();
  return s;
}

Scalar frobeniusNorm(const BlockMatrix& a) { return std::sqrt(inner(a, a)); }

Scalar minEigenvalue(const BlockMatrix& a) {
  Scalar m = std::numeric_limits<Scalar>::infinity();
  for (const auto& blk : a) {
    if (blk.size() == 0) continue;
    Eigen::SelfAdjointEigenSolver<Matrix> es(blk, Eigen::EigenvaluesOnly);
    m = std::min(m, es.eigenvalues()(0));
  }
  return m;
}

std::string statusName(SdpStatus status) {
  switch (status) {
    case SdpStatus::Optimal: return "Optimal";
    case SdpStatus::Infeasible: return "Infeasible";
    case SdpStatus::DualInfeasible: return "DualInfeasible";
    case SdpStatus::MaxIterations: return "MaxIterations";
    case SdpStatus::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

namespace {

void checkConforms(const BlockMatrix& m, const std::vector<int>& blocks, const char* what) {
  require(m.size() == blocks.size(), std::string(what) + ": wrong number of blocks");
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    require(m[k].rows() == blocks[k] && m[k].cols() == blocks[k],
            std::string(what) + ": block size mismatch");
    require((m[k] - m[k].transpose()).cwiseAbs().maxCoeff() <=
                1e-12 * (1.0 + m[k].cwiseAbs().maxCoeff()),
            std::string(what) + ": block is not symmetric");
  }
}

// Upper-triangle vectorization with sqrt(2) weights so that dot products
// reproduce Frobenius inner products.
Vector svec(const BlockMatrix& m, int total) {
  Vector v(total);
  int pos = 0;
  for (const auto& blk : m) {
    for (int j = 0; j < blk.cols(); ++j)
      for (int i = 0; i <= j; ++i) v(pos++) = (i == j ? 1.0 : std::sqrt(2.0)) * blk(i, j);
  }
  return v;
}

Matrix sym(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// Largest alpha in (0, 1] with x + alpha * dx positive semidefinite, scaled by
// `fraction` when the boundary is hit before alpha = 1.
Scalar stepLength(const BlockMatrix& x, const BlockMatrix& dx, Scalar fraction, bool& ok) {
  Scalar alpha_max = std::numeric_limits<Scalar>::infinity();
  for (std::size_t k = 0; k < x.size(); ++k) {
    Eigen::LLT<Matrix> llt(x[k]);
    if (llt.info() != Eigen::Success) {
      ok = false;
      return 0.0;
    }
    const Matrix l_inv = llt.matrixL().solve(Matrix::Identity(x[k].rows(), x[k].cols()));
    const Matrix w = sym(l_inv * dx[k] * l_inv.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(w, Eigen::EigenvaluesOnly);
    const Scalar lam = es.eigenvalues()(0);
    if (lam < 0.0) alpha_max = std::min(alpha_max, -1.0 / lam);
  }
  return std::min(1.0, fraction * alpha_max);
}

struct Direction {
  BlockMatrix dx;
  Vector dy;
  BlockMatrix dz;
};

class InteriorPoint {
 public:
  InteriorPoint(const std::vector<int>& blocks, const BlockMatrix& c,
                std::vector<const SdpConstraint*> cons, const SdpOptions& options)
      : blocks_(blocks), c_(c), cons_(std::move(cons)), opt_(options) {
    m_ = static_cast<int>(cons_.size());
    b_.resize(m_);
    for (int k = 0; k < m_; ++k) b_(k) = cons_[k]->b;
    for (int n : blocks_) dim_ += n;
  }

  SdpSolution run() {
    SdpSolution sol;
    initialize();
    const Scalar norm_b = b_.norm();
    const Scalar norm_c = frobeniusNorm(c_);

    for (int iter = 0; iter <= opt_.max_iter; ++iter) {
      const Vector rp = b_ - applyA(x_);
      const BlockMatrix rd = dualResidual();
      const Scalar pobj = inner(c_, x_);
      const Scalar dobj = b_.dot(y_);
      const Scalar mu = inner(x_, z_) / dim_;

      sol.iterations = iter;
      sol.primal_objective = pobj;
      sol.dual_objective = dobj;
      sol.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
      sol.primal_residual = rp.norm() / (1.0 + norm_b);
      sol.dual_residual = frobeniusNorm(rd) / (1.0 + norm_c);

      if (opt_.verbose)
        std::fprintf(stderr, "sdp %3d pobj % .10e dobj % .10e gap %.2e pres %.2e dres %.2e mu %.2e\n",
                     iter, pobj, dobj, sol.gap, sol.primal_residual, sol.dual_residual, mu);
      if (!std::isfinite(pobj) || !std::isfinite(dobj) || !std::isfinite(mu)) {
        return fallback(SdpStatus::NumericalFailure);
      }
      const Scalar compl_rel = inner(x_, z_) / (1.0 + std::abs(pobj));
      const Scalar merit = std::max({sol.gap, compl_rel, sol.primal_residual, sol.dual_residual});
      if (merit < best_merit_) {
        best_merit_ = merit;
        best_ = sol;
        finish(best_);
      }
      if (sol.gap <= opt_.tol && compl_rel <= opt_.tol && sol.primal_residual <= opt_.tol &&
          sol.dual_residual <= opt_.tol) {
        sol.status = SdpStatus::Optimal;
        return finish(sol);
      }
      if (dobj > opt_.divergence && sol.dual_residual <= 1e-6) {
        sol.status = SdpStatus::Infeasible;
        return finish(sol);
      }
      if (pobj < -opt_.divergence && sol.primal_residual <= 1e-6) {
        sol.status = SdpStatus::DualInfeasible;
        return finish(sol);
      }
      if (iter == opt_.max_iter) break;

      if (!factor()) {
        if (opt_.verbose) std::fprintf(stderr, "sdp: Schur/Z factorization failed\n");
        return fallback(SdpStatus::NumericalFailure);
      }

      // Predictor (affine scaling).
      Direction aff = solveDirection(rp, rd, 0.0, nullptr);
      bool ok = true;
      const Scalar ap = stepLength(x_, aff.dx, 1.0, ok);
      const Scalar ad = stepLength(z_, aff.dz, 1.0, ok);
      if (!ok) {
        if (opt_.verbose) std::fprintf(stderr, "sdp: predictor step length failed\n");
        return fallback(SdpStatus::NumericalFailure);
      }
      Scalar mu_aff = 0.0;
      for (std::size_t k = 0; k < blocks_.size(); ++k)
        mu_aff += (x_[k] + ap * aff.dx[k]).cwiseProduct(z_[k] + ad * aff.dz[k]).sum();
      mu_aff /= dim_;
      const Scalar sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

      // Corrector with the second-order term.
      BlockMatrix w(blocks_.size());
      for (std::size_t k = 0; k < blocks_.size(); ++k) w[k] = aff.dx[k] * aff.dz[k];
      Direction d = solveDirection(rp, rd, sigma * mu, &w);
      const Scalar alpha_p = stepLength(x_, d.dx, opt_.step_fraction, ok);
      const Scalar alpha_d = stepLength(z_, d.dz, opt_.step_fraction, ok);
      if (!ok || !(alpha_p > 0.0) || !(alpha_d > 0.0)) {
        if (opt_.verbose) std::fprintf(stderr, "sdp: corrector step failed (%g, %g)\n", alpha_p, alpha_d);
        return fallback(SdpStatus::NumericalFailure);
      }
      if (opt_.verbose)
        std::fprintf(stderr, "     ap %.3e ad %.3e sigma %.2e dir-res %.2e\n", alpha_p, alpha_d, sigma,
                     (rp - applyA(d.dx)).norm());
      for (std::size_t k = 0; k < blocks_.size(); ++k) {
        x_[k] = sym(x_[k] + alpha_p * d.dx[k]);
        z_[k] = sym(z_[k] + alpha_d * d.dz[k]);
      }
      y_ += alpha_d * d.dy;

      if (alpha_p < 1e-10 && alpha_d < 1e-10) {
        if (++stalls_ >= 3) {
          return fallback(SdpStatus::NumericalFailure);
        }
      } else {
        stalls_ = 0;
      }
    }
    return fallback(SdpStatus::MaxIterations);
  }

 private:
  void initialize() {
    Scalar xi = 10.0, eta = 10.0;
    xi = std::max(xi, std::sqrt(static_cast<Scalar>(dim_)));
    eta = std::max(eta, std::sqrt(static_cast<Scalar>(dim_)));
    for (int k = 0; k < m_; ++k) {
      const Scalar na = frobeniusNorm(cons_[k]->a);
      xi = std::max(xi, std::sqrt(static_cast<Scalar>(dim_)) * (1.0 + std::abs(b_(k))) / (1.0 + na));
      eta = std::max(eta, na);
    }
    eta = std::max(eta, frobeniusNorm(c_));
    x_ = identityBlocks(blocks_);
    z_ = identityBlocks(blocks_);
    for (auto& blk : x_) blk *= xi;
    for (auto& blk : z_) blk *= eta;
    y_ = Vector::Zero(m_);

  }

  Vector applyA(const BlockMatrix& x) const {
    Vector r(m_);
    for (int k = 0; k < m_; ++k) r(k) = inner(cons_[k]->a, x);
    return r;
  }

  BlockMatrix applyAT(const Vector& y) const {
    BlockMatrix r = zeroBlocks(blocks_);
    for (int k = 0; k < m_; ++k)
      for (std::size_t b = 0; b < blocks_.size(); ++b) r[b] += y(k) * cons_[k]->a[b];
    return r;
  }

  BlockMatrix dualResidual() const {
    BlockMatrix rd = applyAT(y_);
    for (std::size_t b = 0; b < blocks_.size(); ++b) rd[b] = c_[b] - z_[b] - rd[b];
    return rd;
  }

  // Builds and factors the Schur complement M_ij = <A_i, X A_j Z^{-1}>.
  bool factor() {
    z_inv_.resize(blocks_.size());
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      Eigen::LLT<Matrix> llt(z_[b]);
      if (llt.info() != Eigen::Success) return false;
      z_inv_[b] = sym(llt.solve(Matrix::Identity(blocks_[b], blocks_[b])));
    }
    Matrix m = Matrix::Zero(m_, m_);
    BlockMatrix g(blocks_.size());
    for (int j = 0; j < m_; ++j) {
      for (std::size_t b = 0; b < blocks_.size(); ++b) g[b] = x_[b] * cons_[j]->a[b] * z_inv_[b];
      for (int i = 0; i <= j; ++i) m(i, j) = inner(cons_[i]->a, g);
    }
    m = m.selfadjointView<Eigen::Upper>();
    schur_.compute(m);
    use_ldlt_ = schur_.info() != Eigen::Success;
    if (!use_ldlt_) return true;
    // Near-singular Schur matrix: pivoted LDLT, refinement in solveDirection
    // cleans up the rest.
    schur_ldlt_.compute(m);
    return schur_ldlt_.info() == Eigen::Success;
  }

  // Solves A(dX) = rp,  A^T dy + dZ = rd  with the HKM linearization
  //   dX = sym(target Z^{-1} - X - (W + X dZ) Z^{-1}),
  // where W is the second-order correction (empty for the predictor). The -X
  // term is applied directly instead of forming (XZ) Z^{-1}.
  Direction solveDirection(const Vector& rp, const BlockMatrix& rd, Scalar target,
                           const BlockMatrix* w) const {
    BlockMatrix t(blocks_.size());
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      t[b] = x_[b] * rd[b] * z_inv_[b] - target * z_inv_[b] + x_[b];
      if (w) t[b] += (*w)[b] * z_inv_[b];
    }
    Vector rhs = rp;
    for (int k = 0; k < m_; ++k) rhs(k) += inner(cons_[k]->a, t);

    Direction d;
    d.dy = schurSolve(rhs);
    d.dz.resize(blocks_.size());
    d.dx.resize(blocks_.size());
    Scalar last = std::numeric_limits<Scalar>::infinity();
    for (int round = 0;; ++round) {
      const BlockMatrix at = applyAT(d.dy);
      for (std::size_t b = 0; b < blocks_.size(); ++b) {
        d.dz[b] = rd[b] - at[b];
        Matrix u = x_[b] * d.dz[b];
        if (w) u += (*w)[b];
        d.dx[b] = sym(target * z_inv_[b] - u * z_inv_[b]) - x_[b];
      }
      if (round == kRefineRounds) break;
      // Refine dy against the true residual; the assembled Schur matrix
      // loses accuracy near the boundary.
      const Vector res = rp - applyA(d.dx);
      const Scalar rn = res.norm();
      if (rn <= 1e-14 * (1.0 + rp.norm() + b_.norm()) || rn > 0.5 * last) break;
      last = rn;
      d.dy += schurSolve(res);
    }
    return d;
  }

  Vector schurSolve(const Vector& r) const {
    if (use_ldlt_) return schur_ldlt_.solve(r);
    return schur_.solve(r);
  }

  // Returns the iterate with the smallest optimality measure seen so far.
  SdpSolution fallback(SdpStatus status) {
    if (!std::isfinite(best_merit_)) finish(best_);
    best_.status = status;
    return best_;
  }

  SdpSolution& finish(SdpSolution& sol) {
    sol.x = x_;
    sol.y = y_;
    sol.z = z_;
    return sol;
  }

  const std::vector<int>& blocks_;
  const BlockMatrix& c_;
  std::vector<const SdpConstraint*> cons_;
  SdpOptions opt_;
  int m_ = 0;
  int dim_ = 0;
  int stalls_ = 0;
  Scalar best_merit_ = std::numeric_limits<Scalar>::infinity();
  SdpSolution best_;
  Vector b_;
  BlockMatrix x_, z_, z_inv_;
  Vector y_;
  Eigen::LLT<Matrix> schur_;
  Eigen::LDLT<Matrix> schur_ldlt_;
  bool use_ldlt_ = false;
  static constexpr int kRefineRounds = 8;
};

}  // namespace

void SdpProblem::validate() const {
  for (int n : blocks) require(n >= 1, "SdpProblem: block sizes must be positive");
  checkConforms(c, blocks, "SdpProblem objective");
  for (const auto& con : constraints) checkConforms(con.a, blocks, "SdpProblem constraint");
}

SdpSolution solveSdp(const SdpProblem& problem, const SdpOptions& options) {
  problem.validate();
  const int m = static_cast<int>(problem.constraints.size());
  int total = 0;
  for (int n : problem.blocks) total += n * (n + 1) / 2;

  // Drop linearly dependent constraints; an inconsistent right-hand side on a
  // dependent row means the problem is infeasible.
  std::vector<int> keep;
  bool inconsistent = false;
  if (m > 0) {
    Matrix v(total, m);
    for (int k = 0; k < m; ++k) v.col(k) = svec(problem.constraints[k].a, total);
    Eigen::ColPivHouseholderQR<Matrix> qr(v);
    qr.setThreshold(1e-10);
    const int rank = static_cast<int>(qr.rank());
    const auto perm = qr.colsPermutation().indices();
    for (int r = 0; r < rank; ++r) keep.push_back(perm(r));
    std::sort(keep.begin(), keep.end());
    if (rank < m) {
      Matrix basis(total, rank);
      Vector bk(rank);
      for (int r = 0; r < rank; ++r) {
        basis.col(r) = v.col(keep[r]);
        bk(r) = problem.constraints[keep[r]].b;
      }
      Eigen::ColPivHouseholderQR<Matrix> bqr(basis);
      for (int k = 0; k < m; ++k) {
        if (std::binary_search(keep.begin(), keep.end(), k)) continue;
        const Vector coef = bqr.solve(Vector(v.col(k)));
        const Scalar predicted = coef.dot(bk);
        const Scalar bval = problem.constraints[k].b;
        if (std::abs(predicted - bval) > 1e-8 * (1.0 + std::abs(bval) + bk.cwiseAbs().maxCoeff()))
          inconsistent = true;
      }
    }
  }

  if (inconsistent) {
    SdpSolution sol;
    sol.status = SdpStatus::Infeasible;
    sol.x = zeroBlocks(problem.blocks);
    sol.z = zeroBlocks(problem.blocks);
    sol.y = Vector::Zero(m);
    sol.removed_constraints = m - static_cast<int>(keep.size());
    return sol;
  }

  std::vector<const SdpConstraint*> cons;
  for (int k : keep) cons.push_back(&problem.constraints[k]);
  InteriorPoint ipm(problem.blocks, problem.c, cons, options);
  SdpSolution reduced = ipm.run();

  SdpSolution sol = std::move(reduced);
  Vector y_full = Vector::Zero(m);
  for (std::size_t r = 0; r < keep.size(); ++r) y_full(keep[r]) = sol.y(r);
  sol.y = y_full;
  sol.removed_constraints = m - static_cast<int>(keep.size());
  return sol;
}

void dumpSdp(const SdpProblem& problem, std::ostream& os) {
  os << std::setprecision(17);
  os << "blocks";
  for (int n : problem.blocks) os << ' ' << n;
  os << "\nconstraints " << problem.constraints.size() << '\n';
  auto dumpBlocks = [&](const BlockMatrix& m) {
    for (std::size_t b = 0; b < m.size(); ++b)
      for (int i = 0; i < m[b].rows(); ++i)
        for (int j = i; j < m[b].cols(); ++j)
          if (m[b](i, j) != 0.0) os << b << ' ' << i << ' ' << j << ' ' << m[b](i, j) << '\n';
  };
  os << "C\n";
  dumpBlocks(problem.c);
  for (std::size_t k = 0; k < problem.constraints.size(); ++k) {
    os << "A " << k << " b " << problem.constraints[k].b << '\n';
    dumpBlocks(problem.constraints[k].a);
  }
}

}  // namespace sosarp

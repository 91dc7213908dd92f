#include "sosarp/sos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <stdexcept>

#include "sosarp/taylor.hpp"

namespace sosarp {

std::string caseName(CaseTag tag) {
  switch (tag) {
    case CaseTag::StronglyConvex: return "StronglyConvex";
    case CaseTag::Nonconvex: return "Nonconvex";
    case CaseTag::NearlyStronglyConvex: return "NearlyStronglyConvex";
  }
  return "?";
}

std::string statusName(SosStatus status) {
  switch (status) {
    case SosStatus::Certified: return "Certified";
    case SosStatus::NotCertified: return "NotCertified";
    case SosStatus::Indeterminate: return "Indeterminate";
  }
  return "?";
}

int regularizationPower(int p) {
  require(p >= 1, "regularizationPower: p must be positive");
  return p % 2 == 1 ? p + 1 : p + 2;
}

void SosModel::validate() const {
  require(n >= 1, "SosModel: n must be positive");
  require(p >= 3, "SosModel: p must be at least 3");
  require(p_prime == regularizationPower(p), "SosModel: p_prime does not match p");
  require(g.size() == n, "SosModel: gradient has wrong size");
  require(h_bar.rows() == n && h_bar.cols() == n, "SosModel: H_bar has wrong shape");
  require(static_cast<int>(higher.size()) == p - 2, "SosModel: need tensors of orders 3..p");
  for (std::size_t k = 0; k < higher.size(); ++k) {
    require(higher[k].order() == static_cast<int>(k) + 3, "SosModel: tensor order mismatch");
    require(higher[k].dim() == n, "SosModel: tensor dimension mismatch");
  }
  require(delta > 0.0, "SosModel: delta must be positive");
  require(sigma >= 0.0, "SosModel: sigma must be nonnegative");
  const Scalar scale = 1.0 + h_bar.cwiseAbs().maxCoeff();
  require(minEigenvalue(h_bar).value >= delta - 1e-10 * scale,
          "SosModel: lambda_min(H_bar) is below delta");
}

namespace {

Scalar factorial(int k) {
  Scalar r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

}  // namespace

Scalar SosModel::taylorPart(const Vector& s) const {
  Scalar v = g.dot(s) + 0.5 * s.dot(h_bar * s);
  for (const auto& t : higher) v += contract(t, s) / factorial(t.order());
  return v;
}

Scalar SosModel::value(const Vector& s) const {
  return f0 + taylorPart(s) + sigma / p_prime * std::pow(s.norm(), p_prime);
}

Vector SosModel::gradient(const Vector& s) const {
  Vector r = g + h_bar * s;
  for (const auto& t : higher) r += contractDrop1(t, s) / factorial(t.order() - 1);
  r += sigma * std::pow(s.norm(), p_prime - 2) * s;
  return r;
}

Matrix SosModel::hessian(const Vector& s) const {
  Matrix r = h_bar;
  for (const auto& t : higher) r += contractDrop2(t, s) / factorial(t.order() - 2);
  const Scalar ns2 = s.squaredNorm();
  r += sigma * std::pow(ns2, (p_prime - 2) / 2) * Matrix::Identity(n, n);
  if (p_prime > 2)
    r += sigma * (p_prime - 2) * std::pow(ns2, (p_prime - 4) / 2) * (s * s.transpose());
  return r;
}

namespace {

// sum_{a,b} entries[a][b](s) y_a y_b in 2n variables.
Polynomial quadraticInY(const std::vector<std::vector<Polynomial>>& entries, int n) {
  Polynomial out(2 * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (entries[a][b].isZero()) continue;
      out += entries[a][b].embedded(2 * n, 0) * Polynomial::variable(2 * n, n + a) *
             Polynomial::variable(2 * n, n + b);
    }
  return out;
}

Polynomial sigmaFreeForm(const SosModel& model) {
  const int n = model.n;
  Polynomial cubic_up(n);
  for (const auto& t : model.higher) cubic_up += expandTensor(t);
  std::vector<std::vector<Polynomial>> entries(n, std::vector<Polynomial>(n, Polynomial(n)));
  for (int a = 0; a < n; ++a) {
    const Polynomial da = cubic_up.derivative(a);
    for (int b = 0; b < n; ++b) {
      entries[a][b] = da.derivative(b);
      entries[a][b] += Polynomial::constant(n, model.h_bar(a, b));
    }
  }
  return quadraticInY(entries, n);
}

int sDegree(const Exponent& e, int n) {
  int d = 0;
  for (int i = 0; i < n; ++i) d += e[i];
  return d;
}

// Coefficients of s-degree k multiplied by alpha^k / c, i.e. q(alpha s, y) / c.
Polynomial rescaled(const Polynomial& q, int n, Scalar alpha, Scalar c) {
  Polynomial out(q.dim());
  for (const auto& [e, v] : q.terms()) out.addTerm(e, v * std::pow(alpha, sDegree(e, n)) / c);
  return out;
}

struct Scaling {
  Scalar alpha = 1.0;
  Scalar c = 1.0;
};

// Substitution s -> alpha s and division by c so that the s-free part has
// unit size and no other s-degree dominates it.
Scaling chooseScaling(const Polynomial& q, int n) {
  std::vector<Scalar> m;
  for (const auto& [e, v] : q.terms()) {
    const int k = sDegree(e, n);
    if (static_cast<int>(m.size()) <= k) m.resize(k + 1, 0.0);
    m[k] = std::max(m[k], std::abs(v));
  }
  Scaling sc;
  if (m.empty() || m[0] == 0.0) return sc;
  sc.c = m[0];
  Scalar alpha = std::numeric_limits<Scalar>::infinity();
  for (std::size_t k = 1; k < m.size(); ++k)
    if (m[k] > 0.0) alpha = std::min(alpha, std::pow(m[0] / m[k], 1.0 / static_cast<Scalar>(k)));
  if (std::isfinite(alpha)) sc.alpha = alpha;
  return sc;
}

struct GramLayout {
  int n = 0;
  std::vector<Exponent> basis;
  std::map<Exponent, std::vector<std::pair<int, int>>> pairs;

  GramLayout(int n_, int half_degree) : n(n_), basis(gramBasis(n_, half_degree)) {
    const int nb = static_cast<int>(basis.size());
    for (int a = 0; a < nb; ++a)
      for (int b = a; b < nb; ++b) {
        Exponent e(2 * n);
        for (int i = 0; i < 2 * n; ++i) e[i] = basis[a][i] + basis[b][i];
        pairs[e].emplace_back(a, b);
      }
  }

  int size() const { return static_cast<int>(basis.size()); }

  Matrix matrixFor(const Exponent& e) const {
    Matrix a = Matrix::Zero(size(), size());
    auto it = pairs.find(e);
    if (it == pairs.end()) return a;
    for (auto [i, j] : it->second) {
      a(i, j) = 1.0;
      a(j, i) = 1.0;
    }
    return a;
  }

  // Every monomial touched by the basis products or by the listed forms.
  std::vector<Exponent> monomials(std::initializer_list<const Polynomial*> forms) const {
    std::vector<Exponent> out;
    for (const auto& kv : pairs) out.push_back(kv.first);
    for (const Polynomial* f : forms)
      for (const auto& kv : f->terms())
        if (!pairs.count(kv.first)) out.push_back(kv.first);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

GramCertificate unscaledCertificate(const GramLayout& layout, const Matrix& q_scaled,
                                    const Scaling& sc) {
  GramCertificate cert;
  cert.n = layout.n;
  cert.basis = layout.basis;
  const int nb = layout.size();
  cert.q.resize(nb, nb);
  for (int a = 0; a < nb; ++a)
    for (int b = 0; b < nb; ++b) {
      const int k = sDegree(layout.basis[a], layout.n) + sDegree(layout.basis[b], layout.n);
      cert.q(a, b) = sc.c * q_scaled(a, b) * std::pow(sc.alpha, -k);
    }
  return cert;
}

Scalar certificateResidual(const GramCertificate& cert, const Polynomial& target) {
  return infStarNorm(gramPolynomial(cert) - target);
}

// Optimal, or a stalled solve whose best iterate is still accurate.
bool usable(const SdpSolution& sol, const SosOptions& options) {
  if (sol.status == SdpStatus::Optimal) return true;
  if (sol.status != SdpStatus::NumericalFailure && sol.status != SdpStatus::MaxIterations) return false;
  return sol.gap <= options.accept_tol && sol.primal_residual <= options.accept_tol &&
         sol.dual_residual <= options.accept_tol;
}

struct ScaledCheck {
  SosStatus status = SosStatus::Indeterminate;
  Scalar shift = 0.0;
  Matrix q;
};

// Largest lambda_min over Gram matrices of `target`, posed as
//   min t  s.t.  coefficients of z'(Q' - (t - tau) I)z match `target`, Q' PSD, t >= 0.
// tau bounds lambda_min from above (the Gram entry of y_i^2 is forced to equal
// its coefficient), so the optimal t stays away from zero and the problem is
// not degenerate even when the form sits on the boundary of the SoS cone.
ScaledCheck scaledFeasibility(const GramLayout& layout, const Polynomial& target_in,
                              const SosOptions& options) {
  const int nb = layout.size();
  // Rebalance the s-degrees of this particular target; with a large weight the
  // regularizer part would otherwise dominate tau and loosen the test.
  const Scaling inner = chooseScaling(target_in, layout.n);
  const Polynomial target = rescaled(target_in, layout.n, inner.alpha, inner.c);
  const Scalar tau = 1.0 + infStarNorm(target);
  SdpProblem prob;
  prob.blocks = {nb, 1};
  prob.c = {Matrix::Zero(nb, nb), Matrix::Ones(1, 1)};
  for (const auto& e : layout.monomials({&target})) {
    SdpConstraint con;
    Matrix a = layout.matrixFor(e);
    const Scalar tr = a.trace();
    con.a = {std::move(a), Matrix::Constant(1, 1, -tr)};
    con.b = target.coefficient(e) - tau * tr;
    prob.constraints.push_back(std::move(con));
  }
  const SdpSolution sol = solveSdp(prob, options.sdp);
  ScaledCheck out;
  if (sol.status == SdpStatus::Infeasible) {
    out.status = SosStatus::NotCertified;
    return out;
  }
  if (!usable(sol, options)) return out;
  out.shift = sol.x[1](0, 0) - tau;
  Matrix q = sol.x[0];
  if (out.shift < 0.0) q -= out.shift * Matrix::Identity(nb, nb);
  out.q = unscaledCertificate(layout, q, inner).q;
  out.status = out.shift <= options.feasibility_tol * (1.0 + infStarNorm(target))
                   ? SosStatus::Certified
                   : SosStatus::NotCertified;
  return out;
}

}  // namespace

Polynomial regularizerForm(int n, int p_prime) {
  require(n >= 1 && p_prime >= 4 && p_prime % 2 == 0, "regularizerForm: need even p' >= 4");
  const int d = 2 * n;
  Polynomial s2(d), y2(d), sy(d);
  for (int i = 0; i < n; ++i) {
    const Polynomial si = Polynomial::variable(d, i), yi = Polynomial::variable(d, n + i);
    s2 += si * si;
    y2 += yi * yi;
    sy += si * yi;
  }
  return s2.pow((p_prime - 4) / 2) * (s2 * y2 + static_cast<Scalar>(p_prime - 2) * (sy * sy));
}

Polynomial hessianForm(const SosModel& model) {
  model.validate();
  Polynomial out = sigmaFreeForm(model);
  if (model.sigma != 0.0) out += model.sigma * regularizerForm(model.n, model.p_prime);
  return out;
}

std::vector<Exponent> gramBasis(int n, int half_degree) {
  require(n >= 1 && half_degree >= 0, "gramBasis: bad arguments");
  // All beta in N^n with |beta| <= half_degree, graded order.
  std::vector<Exponent> betas{Exponent(n, 0)};
  std::vector<Exponent> frontier = betas;
  for (int deg = 1; deg <= half_degree; ++deg) {
    std::vector<Exponent> next;
    for (const auto& b : frontier) {
      int last = 0;
      for (int i = 0; i < n; ++i)
        if (b[i] > 0) last = i;
      for (int i = last; i < n; ++i) {
        Exponent c = b;
        ++c[i];
        next.push_back(c);
      }
    }
    betas.insert(betas.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  std::vector<Exponent> out;
  for (int i = 0; i < n; ++i)
    for (const auto& b : betas) {
      Exponent e(2 * n, 0);
      std::copy(b.begin(), b.end(), e.begin());
      e[n + i] = 1;
      out.push_back(e);
    }
  return out;
}

Polynomial gramPolynomial(const GramCertificate& cert) {
  const int nb = static_cast<int>(cert.basis.size());
  require(cert.q.rows() == nb && cert.q.cols() == nb, "gramPolynomial: Q does not match basis");
  Polynomial out(2 * cert.n);
  for (int a = 0; a < nb; ++a)
    for (int b = 0; b < nb; ++b) {
      if (cert.q(a, b) == 0.0) continue;
      Exponent e(2 * cert.n);
      for (int i = 0; i < 2 * cert.n; ++i) e[i] = cert.basis[a][i] + cert.basis[b][i];
      out.addTerm(e, cert.q(a, b));
    }
  return out;
}

SosCheck isSosConvex(const SosModel& model, const SosOptions& options) {
  const Polynomial form = hessianForm(model);
  const GramLayout layout(model.n, (model.p_prime - 2) / 2);
  const Scaling sc = chooseScaling(form, model.n);
  const ScaledCheck chk = scaledFeasibility(layout, rescaled(form, model.n, sc.alpha, sc.c), options);
  SosCheck out;
  out.status = chk.status;
  out.shift = chk.shift;
  if (chk.status == SosStatus::Certified) {
    GramCertificate cert = unscaledCertificate(layout, chk.q, sc);
    cert.residual = certificateResidual(cert, form);
    out.cert = std::move(cert);
  }
  return out;
}

SigmaResult minSigmaSos(const SosModel& model, const SosOptions& options) {
  SosModel base = model;
  base.sigma = 0.0;
  const Polynomial h0 = hessianForm(base);
  const Polynomial reg = regularizerForm(model.n, model.p_prime);
  const GramLayout layout(model.n, (model.p_prime - 2) / 2);
  const Scaling sc = chooseScaling(h0, model.n);
  const Polynomial h0s = rescaled(h0, model.n, sc.alpha, sc.c);
  Polynomial regs = rescaled(reg, model.n, sc.alpha, sc.c);
  // sigma = sigma_scaled / r keeps the scaled unknown of order one.
  const Scalar r = infStarNorm(regs);
  regs *= 1.0 / r;

  SigmaResult result;
  auto finish = [&](Scalar sigma_scaled, const Matrix& q) {
    result.sigma_bar = sigma_scaled / r;
    result.cert = unscaledCertificate(layout, q, sc);
    SosModel at = model;
    at.sigma = result.sigma_bar;
    result.cert.residual = certificateResidual(result.cert, hessianForm(at));
    return result;
  };
  auto checkAt = [&](Scalar sigma_scaled) {
    return scaledFeasibility(layout, h0s + sigma_scaled * regs, options);
  };
  auto checkZero = [&] {
    SosOptions loose = options;
    loose.feasibility_tol = std::max(options.feasibility_tol, options.zero_feasibility_tol);
    return scaledFeasibility(layout, h0s, loose);
  };

  if (!options.force_bisection) {
    const int nb = layout.size();
    SdpProblem prob;
    prob.blocks = {nb, 1};
    prob.c = {Matrix::Zero(nb, nb), Matrix::Ones(1, 1)};
    for (const auto& e : layout.monomials({&h0s, &regs})) {
      SdpConstraint con;
      con.a = {layout.matrixFor(e), Matrix::Constant(1, 1, -regs.coefficient(e))};
      con.b = h0s.coefficient(e);
      prob.constraints.push_back(std::move(con));
    }
    const SdpSolution sol = solveSdp(prob, options.sdp);
    result.sdp_status = sol.status;
    if (usable(sol, options)) {
      const Scalar sig = std::max(sol.x[1](0, 0), 0.0);
      if (sig <= options.zero_threshold) {
        const ScaledCheck zero = checkZero();
        if (zero.status == SosStatus::Certified) return finish(0.0, zero.q);
      }
      return finish(sig, sol.x[0]);
    }
  }

  // Bisection on the scaled weight with feasibility queries.
  result.used_bisection = true;
  ScaledCheck lo_chk = checkZero();
  if (lo_chk.status == SosStatus::Certified) return finish(0.0, lo_chk.q);
  Scalar lo = 0.0, hi = 1.0;
  ScaledCheck hi_chk = checkAt(hi);
  int doublings = 0;
  while (hi_chk.status != SosStatus::Certified) {
    if (++doublings > 200)
      throw std::runtime_error("minSigmaSos: no certified sigma found (last SDP status " +
                               statusName(hi_chk.status) + ", sdp " +
                               statusName(result.sdp_status) + ")");
    lo = hi;
    hi *= 2.0;
    hi_chk = checkAt(hi);
  }
  for (int it = 0; it < 100 && hi - lo > 1e-10 * hi; ++it) {
    const Scalar mid = 0.5 * (lo + hi);
    ScaledCheck mid_chk = checkAt(mid);
    if (mid_chk.status == SosStatus::Certified) {
      hi = mid;
      hi_chk = std::move(mid_chk);
    } else {
      lo = mid;
    }
  }
  return finish(hi, hi_chk.q);
}

CertificateReport verifyCertificate(const GramCertificate& cert, const SosModel& model, int samples,
                                    std::uint64_t seed) {
  CertificateReport rep;
  const Polynomial form = hessianForm(model);
  rep.residual = certificateResidual(cert, form);
  if (cert.q.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(cert.q, Eigen::EigenvaluesOnly);
    rep.q_min_eigenvalue = es.eigenvalues()(0);
  }
  const Scalar q_norm = cert.q.size() > 0 ? cert.q.cwiseAbs().maxCoeff() : 0.0;

  std::mt19937_64 rng(seed);
  std::normal_distribution<Scalar> normal(0.0, 1.0);
  std::uniform_real_distribution<Scalar> log_radius(-3.0, 2.0);
  rep.worst_hessian_ratio = std::numeric_limits<Scalar>::infinity();
  for (int k = 0; k < samples; ++k) {
    Vector s(model.n);
    for (int i = 0; i < model.n; ++i) s(i) = normal(rng);
    s *= std::pow(10.0, log_radius(rng)) / std::max(s.norm(), 1e-300);
    const Matrix h = model.hessian(s);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    const Scalar lmin = es.eigenvalues()(0);
    const Scalar hnorm = es.eigenvalues().cwiseAbs().maxCoeff();
    const Scalar ratio = lmin / (1.0 + hnorm);
    rep.worst_hessian_ratio = std::min(rep.worst_hessian_ratio, ratio);
    if (ratio < -1e-8) ++rep.hessian_violations;
  }
  if (samples == 0) rep.worst_hessian_ratio = 0.0;
  rep.ok = rep.residual <= 1e-7 * (1.0 + infStarNorm(form)) &&
           rep.q_min_eigenvalue >= -1e-9 * (1.0 + q_norm) && rep.hessian_violations == 0;
  return rep;
}

void dumpSos(const SosModel& model, std::ostream& os) {
  std::vector<std::string> names;
  for (int i = 0; i < model.n; ++i) names.push_back("s" + std::to_string(i + 1));
  for (int i = 0; i < model.n; ++i) names.push_back("y" + std::to_string(i + 1));
  os << "case " << caseName(model.case_tag) << " p " << model.p << " p' " << model.p_prime
     << " sigma " << model.sigma << '\n';
  os << "hessian form: " << format(hessianForm(model), names) << '\n';
  os << "gram basis:";
  for (const auto& e : gramBasis(model.n, (model.p_prime - 2) / 2)) {
    Polynomial mono(2 * model.n);
    mono.addTerm(e, 1.0);
    os << ' ' << format(mono, names);
  }
  os << '\n';
}

}  // namespace sosarp

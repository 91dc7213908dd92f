#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sosarp/polynomial.hpp"
#include "sosarp/sdp.hpp"
#include "sosarp/tensor.hpp"

namespace sosarp {

enum class CaseTag { StronglyConvex, Nonconvex, NearlyStronglyConvex };

std::string caseName(CaseTag tag);

/// p + 1 for odd p, p + 2 for even p.
int regularizationPower(int p);

/// Regularized Taylor model
///   m(s) = f0 + g.s + 1/2 s'H s + sum_{j=3..p} T_j[s]^j / j! + sigma/p' |s|^p'.
struct SosModel {
  int n = 0;
  int p = 3;
  int p_prime = 4;
  Scalar f0 = 0.0;
  Vector g;
  Matrix h_bar;
  /// higher[j - 3] is the order-j tensor.
  std::vector<SymmetricTensor> higher;
  Scalar delta = 1.0;
  Scalar sigma = 0.0;
  CaseTag case_tag = CaseTag::StronglyConvex;

  void validate() const;

  Scalar value(const Vector& s) const;
  Vector gradient(const Vector& s) const;
  Matrix hessian(const Vector& s) const;
  /// m(s) - f0 without the regularizer.
  Scalar taylorPart(const Vector& s) const;
};

/// y' Hess m(s) y as a polynomial in (s_1..s_n, y_1..y_n).
Polynomial hessianForm(const SosModel& model);

/// Hessian form of |s|^p' / p' alone, i.e. the coefficient of sigma.
Polynomial regularizerForm(int n, int p_prime);

/// Gram matrix q with z'qz reproducing a form quadratic in y, where z runs over
/// y_i s^beta with |beta| <= (p' - 2) / 2.
struct GramCertificate {
  int n = 0;
  std::vector<Exponent> basis;
  Matrix q;
  Scalar residual = 0.0;
};

/// Monomials y_i s^beta, |beta| <= half_degree, as exponents in 2n variables.
std::vector<Exponent> gramBasis(int n, int half_degree);

/// z'qz as a polynomial in 2n variables.
Polynomial gramPolynomial(const GramCertificate& cert);

struct SosOptions {
  SdpOptions sdp = [] {
    SdpOptions o;
    o.tol = 1e-10;
    o.max_iter = 300;
    return o;
  }();
  /// A solve that stalls short of sdp.tol is still used when its gap and
  /// residuals are below this.
  Scalar accept_tol = 1e-8;
  /// Feasibility threshold on the shift t with q + tI PSD, in balanced units.
  Scalar feasibility_tol = 1e-10;
  /// Below this (scaled) the minimal weight is tested against exactly zero.
  Scalar zero_threshold = 1e-6;
  /// Feasibility threshold for that zero test. With no regularizer the Gram
  /// blocks of s-dependent monomials vanish, so the test is always on the
  /// boundary and needs more room than feasibility_tol.
  Scalar zero_feasibility_tol = 1e-8;
  /// Force the bisection path (for testing).
  bool force_bisection = false;
};

struct SigmaResult {
  Scalar sigma_bar = 0.0;
  GramCertificate cert;
  bool used_bisection = false;
  SdpStatus sdp_status = SdpStatus::Optimal;
};

/// Smallest sigma making the model SoS-convex (model.sigma is ignored).
/// Throws std::runtime_error when neither the SDP nor bisection succeeds.
SigmaResult minSigmaSos(const SosModel& model, const SosOptions& options = {});

enum class SosStatus { Certified, NotCertified, Indeterminate };

std::string statusName(SosStatus status);

struct SosCheck {
  SosStatus status = SosStatus::Indeterminate;
  std::optional<GramCertificate> cert;
  /// Minus the largest lambda_min over Gram matrices (scaled units).
  Scalar shift = 0.0;
};

/// Feasibility of the Gram SDP at the model's fixed sigma.
SosCheck isSosConvex(const SosModel& model, const SosOptions& options = {});

struct CertificateReport {
  Scalar residual = 0.0;
  Scalar q_min_eigenvalue = 0.0;
  /// Worst lambda_min(Hess m(s)) / (1 + |Hess m(s)|) over the sampled s.
  Scalar worst_hessian_ratio = 0.0;
  int hessian_violations = 0;
  bool ok = false;
};

/// Rebuilds z'qz, compares coefficients with the model's Hessian form and
/// samples the model Hessian at `samples` random points.
CertificateReport verifyCertificate(const GramCertificate& cert, const SosModel& model,
                                    int samples = 100, std::uint64_t seed = 0xce47);

/// Human-readable listing of the Hessian form and Gram basis.
void dumpSos(const SosModel& model, std::ostream& os);

}  // namespace sosarp

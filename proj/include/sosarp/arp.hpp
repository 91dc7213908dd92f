#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sosarp/sos.hpp"
#include "sosarp/subproblem.hpp"
#include "sosarp/taylor.hpp"

namespace sosarp {

struct ArpConfig {
  int p = 3;
  Scalar epsilon = 1e-5;
  /// delta = epsilon^a unless `delta` is set.
  Scalar a = 0.5;
  std::optional<Scalar> delta;
  Scalar eta = 0.1;
  Scalar gamma1 = 2.0;
  Scalar gamma2 = 0.5;
  Scalar sigma_min = 1e-8;
  /// Initial adaptive weight; defaults to sigma_min.
  std::optional<Scalar> sigma0;
  Scalar theta = 0.5;
  int max_iter = 1000;
  /// Consecutive unsuccessful iterations before giving up.
  int max_failures = 60;
  std::optional<Vector> x0;
  SosOptions sos;

  void validate() const;
  Scalar effectiveDelta() const;
  Scalar initialSigma() const { return sigma0.value_or(sigma_min); }
};

struct IterationRecord {
  int k = 0;
  CaseTag case_tag = CaseTag::StronglyConvex;
  Scalar lambda_min = 0.0;
  Scalar sigma_bar = 0.0;
  /// Adaptive weight used at this iteration.
  Scalar sigma_r = 0.0;
  Scalar sigma = 0.0;
  Scalar step_norm = 0.0;
  /// Trial step s_k (empty when the subsolve failed).
  Vector step;
  Scalar rho = 0.0;
  Scalar f_before = 0.0;
  /// f(x_{k+1}); equals f_before on unsuccessful iterations.
  Scalar f_after = 0.0;
  /// f(x_k + s_k), whether or not the step was accepted.
  Scalar f_trial = 0.0;
  /// f(x_k) - T_p(x_k, s_k).
  Scalar taylor_decrease = 0.0;
  /// Gradient norm at x_k.
  Scalar grad_norm = 0.0;
  bool success = false;
  /// Step below 1e-14 (1 + |x|).
  bool stationary_step = false;
  /// Taylor decrease not positive; iteration forced unsuccessful.
  bool bad_denominator = false;
  bool subsolve_failed = false;
};

enum class RunStatus { Converged, MaxIterations, SubsolverFailure };

std::string statusName(RunStatus status);

struct RunResult {
  RunStatus status = RunStatus::MaxIterations;
  Vector x;
  Scalar f = 0.0;
  Scalar grad_norm = 0.0;
  Scalar delta = 0.0;
  std::vector<IterationRecord> records;
  int successful = 0;
  int unsuccessful = 0;
  /// Largest of sigma_0, every sigma_k and every updated adaptive weight.
  Scalar sigma_max_observed = 0.0;
  /// Adaptive weight after the last update.
  Scalar final_sigma_r = 0.0;
  std::string message;
};

/// lambda_min >= delta: StronglyConvex; lambda_min <= 0: Nonconvex;
/// otherwise NearlyStronglyConvex.
CaseTag classifyCase(Scalar lambda_min, Scalar delta);

/// Case-dependent regularized model at the bundle's point.
SosModel buildModel(const DerivativeBundle& bundle, CaseTag tag, Scalar delta, Scalar sigma);

/// (f_k - f_trial) / taylor_decrease.
Scalar ratioTest(Scalar f_k, Scalar f_trial, Scalar taylor_decrease);

using IterationCallback = std::function<void(const IterationRecord&)>;

RunResult run(const Objective& objective, const ArpConfig& config,
              const IterationCallback& on_iteration = {});

struct TheoryReport {
  std::vector<std::string> failures;
  int model_decrease_checked = 0;
  int decrease_checked = 0;
  int convex_decrease_checked = 0;
  /// Failure counts per check.
  int model_decrease_failed = 0;
  int decrease_failed = 0;
  int convex_decrease_failed = 0;
  int monotone_failed = 0;
  bool count_failed = false;
  bool ok() const { return failures.empty(); }
};

/// Replays the record stream against the model-decrease, acceptance,
/// iteration-count, strongly convex decrease (p = 3) and monotonicity
/// inequalities.
TheoryReport assertTheory(const RunResult& result, const ArpConfig& config);

}  // namespace sosarp

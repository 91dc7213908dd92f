#include "sosarp/arp.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sosarp {

std::string statusName(RunStatus status) {
  switch (status) {
    case RunStatus::Converged: return "Converged";
    case RunStatus::MaxIterations: return "MaxIterations";
    case RunStatus::SubsolverFailure: return "SubsolverFailure";
  }
  return "?";
}

void ArpConfig::validate() const {
  require(p >= 3, "ArpConfig: p must be at least 3");
  require(epsilon > 0.0 && epsilon < 1.0, "ArpConfig: epsilon must lie in (0, 1)");
  if (delta)
    require(*delta > 0.0 && *delta <= 1.0, "ArpConfig: delta must lie in (0, 1]");
  else
    require(a >= 0.0 && a <= 0.5, "ArpConfig: a must lie in [0, 1/2]");
  require(eta > 0.0 && eta < 1.0, "ArpConfig: eta must lie in (0, 1)");
  require(gamma1 > 1.0 && gamma2 > 0.0 && gamma2 < 1.0, "ArpConfig: need gamma1 > 1 > gamma2 > 0");
  require(sigma_min > 0.0, "ArpConfig: sigma_min must be positive");
  require(initialSigma() >= sigma_min, "ArpConfig: sigma0 must be at least sigma_min");
  require(theta > 0.0 && theta < 1.0, "ArpConfig: theta must lie in (0, 1)");
  require(max_iter >= 0, "ArpConfig: max_iter must be nonnegative");
  require(max_failures >= 1, "ArpConfig: max_failures must be positive");
}

Scalar ArpConfig::effectiveDelta() const { return delta ? *delta : std::pow(epsilon, a); }

CaseTag classifyCase(Scalar lambda_min, Scalar delta) {
  require(delta > 0.0, "classifyCase: delta must be positive");
  if (lambda_min >= delta) return CaseTag::StronglyConvex;
  if (lambda_min <= 0.0) return CaseTag::Nonconvex;
  return CaseTag::NearlyStronglyConvex;
}

SosModel buildModel(const DerivativeBundle& bundle, CaseTag tag, Scalar delta, Scalar sigma) {
  bundle.validate();
  require(bundle.order() >= 3, "buildModel: need derivatives up to order p >= 3");
  const Matrix h = bundle.hessian();
  const Scalar lmin = minEigenvalue(h).value;
  require(classifyCase(lmin, delta) == tag, "buildModel: case does not match lambda_min(H)");
  const int n = bundle.dim();
  SosModel m;
  m.n = n;
  m.p = bundle.order();
  m.p_prime = regularizationPower(m.p);
  m.f0 = bundle.value;
  m.g = bundle.gradient();
  switch (tag) {
    case CaseTag::StronglyConvex: m.h_bar = h; break;
    case CaseTag::Nonconvex: m.h_bar = h + (delta - lmin) * Matrix::Identity(n, n); break;
    case CaseTag::NearlyStronglyConvex: m.h_bar = h + delta * Matrix::Identity(n, n); break;
  }
  for (int j = 3; j <= m.p; ++j) m.higher.push_back(bundle.tensor(j));
  m.delta = delta;
  m.sigma = sigma;
  m.case_tag = tag;
  m.validate();
  return m;
}

Scalar ratioTest(Scalar f_k, Scalar f_trial, Scalar taylor_decrease) {
  return (f_k - f_trial) / taylor_decrease;
}

RunResult run(const Objective& objective, const ArpConfig& config, const IterationCallback& on_iteration) {
  config.validate();
  const int n = objective.dim();
  Vector x = config.x0.value_or(Vector::Zero(n));
  require(x.size() == n, "run: x0 has wrong length");

  RunResult res;
  res.delta = config.effectiveDelta();
  const Scalar delta = res.delta;
  Scalar sigma_r = config.initialSigma();
  res.sigma_max_observed = sigma_r;

  DerivativeBundle bundle = objective.derivatives(x, config.p);
  bool have_sigma_bar = false;
  Scalar sigma_bar = 0.0;
  int failures = 0;

  for (int k = 0;; ++k) {
    const Scalar gnorm = bundle.gradient().norm();
    if (gnorm <= config.epsilon) {
      res.status = RunStatus::Converged;
      break;
    }
    if (k == config.max_iter) {
      res.status = RunStatus::MaxIterations;
      break;
    }
    if (failures >= config.max_failures) {
      res.status = RunStatus::SubsolverFailure;
      res.message = std::to_string(failures) + " consecutive unsuccessful iterations";
      break;
    }

    IterationRecord rec;
    rec.k = k;
    rec.grad_norm = gnorm;
    rec.f_before = bundle.value;
    rec.lambda_min = minEigenvalue(bundle.hessian()).value;
    rec.case_tag = classifyCase(rec.lambda_min, delta);
    if (!have_sigma_bar) {
      try {
        sigma_bar = minSigmaSos(buildModel(bundle, rec.case_tag, delta, 0.0), config.sos).sigma_bar;
      } catch (const std::runtime_error& e) {
        res.status = RunStatus::SubsolverFailure;
        res.message = std::string("certification failed: ") + e.what();
        break;
      }
      have_sigma_bar = true;
    }
    rec.sigma_bar = sigma_bar;
    rec.sigma_r = sigma_r;
    rec.sigma = std::max(sigma_bar, sigma_r);
    const SosModel model = buildModel(bundle, rec.case_tag, delta, rec.sigma);

    const SubsolveResult sub = minimizeModel(model, config.theta);
    bool success = false;
    rec.f_after = rec.f_before;
    rec.f_trial = rec.f_before;
    if (!sub.converged) {
      rec.subsolve_failed = true;
    } else {
      rec.step = sub.s;
      rec.step_norm = sub.s.norm();
      if (rec.step_norm <= 1e-14 * (1.0 + x.norm())) {
        rec.stationary_step = true;
      } else {
        rec.taylor_decrease = -taylorIncrement(bundle, sub.s);
        rec.f_trial = objective.value(x + sub.s);
        if (!(rec.taylor_decrease > 0.0)) {
          rec.bad_denominator = true;
        } else {
          rec.rho = ratioTest(rec.f_before, rec.f_trial, rec.taylor_decrease);
          success = rec.rho > config.eta;
        }
      }
    }
    rec.success = success;
    if (success) {
      x += sub.s;
      bundle = objective.derivatives(x, config.p);
      rec.f_after = bundle.value;
      sigma_r = std::max(config.gamma2 * rec.sigma, config.sigma_min);
      have_sigma_bar = false;
      failures = 0;
      ++res.successful;
    } else {
      sigma_r = config.gamma1 * rec.sigma;
      ++failures;
      ++res.unsuccessful;
    }
    res.sigma_max_observed = std::max({res.sigma_max_observed, rec.sigma, sigma_r});
    res.records.push_back(rec);
    if (on_iteration) on_iteration(rec);
  }
  res.x = x;
  res.f = bundle.value;
  res.grad_norm = bundle.gradient().norm();
  res.final_sigma_r = sigma_r;
  return res;
}

TheoryReport assertTheory(const RunResult& result, const ArpConfig& config) {
  TheoryReport rep;
  const Scalar delta = result.delta;
  const int pp = regularizationPower(config.p);
  auto fail = [&](int k, const std::string& what) {
    std::ostringstream os;
    os << "iteration " << k << ": " << what;
    rep.failures.push_back(os.str());
  };
  Scalar last_f = std::numeric_limits<Scalar>::infinity();
  for (const auto& r : result.records) {
    if (r.step_norm > 0.0 && !r.stationary_step && !r.subsolve_failed) {
      const Scalar s2 = r.step_norm * r.step_norm;
      Scalar bound = r.sigma / pp * std::pow(r.step_norm, pp);
      if (r.case_tag == CaseTag::Nonconvex) bound += 0.5 * (-r.lambda_min + delta) * s2;
      if (r.case_tag == CaseTag::NearlyStronglyConvex) bound += 0.5 * delta * s2;
      ++rep.model_decrease_checked;
      if (r.taylor_decrease < bound - 1e-8 * (std::abs(bound) + std::abs(r.taylor_decrease))) {
        std::ostringstream os;
        os << "model decrease " << r.taylor_decrease << " below bound " << bound;
        fail(r.k, os.str());
        ++rep.model_decrease_failed;
      }
    }
    if (r.success) {
      ++rep.decrease_checked;
      if (r.f_before - r.f_after < config.eta * r.taylor_decrease) {
        std::ostringstream os;
        os << "decrease " << r.f_before - r.f_after << " below eta * model decrease "
           << config.eta * r.taylor_decrease;
        fail(r.k, os.str());
        ++rep.decrease_failed;
      }
      if (config.p == 3 && r.case_tag == CaseTag::StronglyConvex) {
        ++rep.convex_decrease_checked;
        const Scalar need = config.eta * delta / 18.0 * r.step_norm * r.step_norm - 1e-10;
        if (r.f_before - r.f_after < need) {
          std::ostringstream os;
          os << "strongly convex decrease " << r.f_before - r.f_after << " below " << need;
          fail(r.k, os.str());
          ++rep.convex_decrease_failed;
        }
      }
      if (r.f_after > r.f_before || r.f_before > last_f) {
        fail(r.k, "objective increased");
        ++rep.monotone_failed;
      }
      last_f = r.f_after;
    } else if (r.f_after != r.f_before) {
      fail(r.k, "unsuccessful iteration changed the objective");
      ++rep.monotone_failed;
    }
  }
  // Iteration count against successes and the weight growth.
  const Scalar m = static_cast<Scalar>(result.records.size());
  const Scalar lg1 = std::log(config.gamma1), lg2 = std::abs(std::log(config.gamma2));
  const Scalar sigma0 = config.initialSigma();
  const Scalar bound = result.successful * (1.0 + lg2 / lg1) +
                       std::log(result.sigma_max_observed / sigma0) / lg1;
  if (m > bound + 1e-9 * (1.0 + bound)) {
    std::ostringstream os;
    os << "iteration count " << m << " exceeds " << bound;
    rep.failures.push_back(os.str());
    rep.count_failed = true;
  }
  return rep;
}

}  // namespace sosarp

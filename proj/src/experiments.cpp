#include "sosarp/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

namespace sosarp {

std::uint64_t defaultSeed() {
  const char* env = std::getenv("SOSARP_SEED");
  if (env == nullptr || *env == '\0') return kDefaultSeed;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  require(end != nullptr && *end == '\0', "SOSARP_SEED must be a nonnegative integer");
  return static_cast<std::uint64_t>(v);
}

void ScanConfig::validate() const {
  require(n >= 1, "scan: n must be positive");
  require(p >= 3, "scan: p must be at least 3");
  require(seeds >= 1, "scan: need at least one seed");
  require(!values.empty(), "scan: no scan values");
  for (Scalar v : values) require(std::isfinite(v) && v > 0.0, "scan: values must be positive");
  if (kind == ScanKind::Delta)
    for (Scalar v : values) require(v <= 1.0, "scan: delta values must lie in (0, 1]");
  require(delta > 0.0 && delta <= 1.0, "scan: delta must lie in (0, 1]");
  require(threads >= 0, "scan: threads must be nonnegative");
}

SosModel randomScanModel(int n, int p, Scalar delta, std::optional<Scalar> max_entry, std::uint64_t seed) {
  require(n >= 1 && p >= 3, "randomScanModel: need n >= 1 and p >= 3");
  require(delta > 0.0, "randomScanModel: delta must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<Scalar> normal;
  SosModel m;
  m.n = n;
  m.p = p;
  m.p_prime = regularizationPower(p);
  m.g = Vector::NullaryExpr(n, [&] { return normal(rng); });
  Matrix h(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) h(i, j) = h(j, i) = normal(rng);
  const Scalar lmin = minEigenvalue(h).value;
  m.h_bar = h + (delta - lmin) * Matrix::Identity(n, n);
  for (int j = 3; j <= p; ++j) {
    SymmetricTensor t = SymmetricTensor::random(j, n, rng);
    if (max_entry) {
      const Scalar big = t.maxAbsEntry();
      require(big > 0.0, "randomScanModel: zero tensor drawn");
      t = t.scaled(*max_entry / big);
    }
    m.higher.push_back(std::move(t));
  }
  m.delta = delta;
  m.case_tag = CaseTag::StronglyConvex;
  m.validate();
  return m;
}

Scalar logLogSlope(const std::vector<Scalar>& x, const std::vector<Scalar>& y) {
  require(x.size() == y.size() && x.size() >= 2, "logLogSlope: need two or more points");
  const auto k = static_cast<Scalar>(x.size());
  Scalar mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, "logLogSlope: values must be positive");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= k;
  my /= k;
  Scalar sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Scalar dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  require(sxx > 0.0, "logLogSlope: x values must not all coincide");
  return sxy / sxx;
}

namespace {

// Per-seed stream, identical across scan values so each seed is one fixed
// random direction.
std::uint64_t cellSeed(std::uint64_t base, int seed_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(seed_index)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace

ScanResult runScan(const ScanConfig& config) {
  config.validate();
  ScanResult result;
  const int cols = static_cast<int>(config.values.size());
  result.cells.resize(static_cast<std::size_t>(cols) * config.seeds);
  for (int c = 0; c < cols; ++c)
    for (int s = 0; s < config.seeds; ++s) {
      ScanCell& cell = result.cells[static_cast<std::size_t>(c) * config.seeds + s];
      cell.x = config.values[c];
      cell.seed = s;
    }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < result.cells.size(); i = next++) {
      ScanCell& cell = result.cells[i];
      const std::uint64_t seed = cellSeed(config.base_seed, cell.seed);
      try {
        const SosModel model = config.kind == ScanKind::TensorScale
                                   ? randomScanModel(config.n, config.p, config.delta, cell.x, seed)
                                   : randomScanModel(config.n, config.p, cell.x, std::nullopt, seed);
        cell.sigma_bar = minSigmaSos(model, config.sos).sigma_bar;
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  };
  int threads = config.threads > 0 ? config.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, static_cast<int>(result.cells.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<Scalar> xs, ys;
  for (int c = 0; c < cols; ++c) {
    ScanSummary sum;
    sum.x = config.values[c];
    Scalar acc = 0.0;
    for (int s = 0; s < config.seeds; ++s) {
      const ScanCell& cell = result.cells[static_cast<std::size_t>(c) * config.seeds + s];
      if (!cell.ok) {
        ++result.failures;
        continue;
      }
      if (cell.sigma_bar <= 0.0) continue;
      acc += std::log(cell.sigma_bar);
      ++sum.used;
    }
    sum.geometric_mean = sum.used > 0 ? std::exp(acc / sum.used) : std::numeric_limits<Scalar>::quiet_NaN();
    if (sum.used > 0) {
      xs.push_back(sum.x);
      ys.push_back(sum.geometric_mean);
    }
    result.summary.push_back(sum);
  }
  if (xs.size() >= 2) result.slope = logLogSlope(xs, ys);
  return result;
}

namespace {

std::string num(Scalar v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

}  // namespace

void writeScanCsv(const ScanResult& result, std::ostream& os) {
  os << "kind,x,seed,sigma_bar\n";
  for (const ScanCell& c : result.cells)
    os << "cell," << num(c.x) << ',' << c.seed << ',' << (c.ok ? num(c.sigma_bar) : "failed") << '\n';
  for (const ScanSummary& s : result.summary)
    os << "summary," << num(s.x) << ",," << (s.used > 0 ? num(s.geometric_mean) : "nan") << '\n';
  os << "slope,,," << (result.slope ? num(*result.slope) : "") << '\n';
  os << "failures,,," << result.failures << '\n';
}

std::vector<RateRow> convexRate(const ProblemSpec& spec, const ArpConfig& base,
                                const std::vector<Scalar>& epsilons) {
  if (!isStronglyConvex(spec))
    throw ContractViolation("convex-rate: problem '" + spec.name + "' is not flagged strongly convex");
  require(!epsilons.empty(), "convex-rate: no epsilon values");
  ArpConfig probe = base;
  for (Scalar e : epsilons) {
    probe.epsilon = e;
    probe.validate();
  }
  const ProblemObjective objective(spec);
  std::vector<RateRow> rows;
  for (Scalar e : epsilons) {
    ArpConfig cfg = base;
    cfg.epsilon = e;
    if (!cfg.x0) cfg.x0 = spec.x0;
    RateRow row;
    row.epsilon = e;
    const RunResult r = run(objective, cfg);
    row.successful = r.successful;
    row.total = static_cast<int>(r.records.size());
    row.status = r.status;
    row.final_f = r.f;
    for (const IterationRecord& rec : r.records) row.f_trajectory.push_back(rec.f_before);
    row.f_trajectory.push_back(r.f);
    rows.push_back(std::move(row));
  }
  return rows;
}

void writeRateCsv(const std::vector<RateRow>& rows, std::ostream& os) {
  os << "epsilon,successful_iterations,total_iterations,status,final_f\n";
  for (const RateRow& r : rows)
    os << num(r.epsilon) << ',' << r.successful << ',' << r.total << ',' << statusName(r.status) << ','
       << num(r.final_f) << '\n';
}

void writeTrajectoryCsv(const std::vector<RateRow>& rows, std::ostream& os) {
  Scalar f_ref = std::numeric_limits<Scalar>::infinity();
  for (const RateRow& r : rows) f_ref = std::min(f_ref, r.final_f);
  os << "epsilon,iter,f,f_gap\n";
  for (const RateRow& r : rows)
    for (std::size_t k = 0; k < r.f_trajectory.size(); ++k)
      os << num(r.epsilon) << ',' << k << ',' << num(r.f_trajectory[k]) << ','
         << num(r.f_trajectory[k] - f_ref) << '\n';
}

void writeIterationHeader(std::ostream& os) {
  os << "iter,case,lambda_min,sigma_bar,sigma_r,sigma,step_norm,rho,f,grad_norm,success\n";
}

void writeIterationRow(const IterationRecord& rec, std::ostream& os) {
  os << rec.k << ',' << caseName(rec.case_tag) << ',' << num(rec.lambda_min) << ',' << num(rec.sigma_bar)
     << ',' << num(rec.sigma_r) << ',' << num(rec.sigma) << ',' << num(rec.step_norm) << ','
     << num(rec.rho) << ',' << num(rec.f_before) << ',' << num(rec.grad_norm) << ','
     << (rec.success ? 1 : 0) << '\n';
}

std::string statusLine(const RunResult& result) {
  std::ostringstream os;
  os << "status=" << statusName(result.status) << " iters=" << result.records.size()
     << " f=" << num(result.f) << " grad_norm=" << num(result.grad_norm);
  return os.str();
}

CertifyResult certifyAt(const ProblemSpec& spec, const Vector& x, int p, Scalar delta,
                        const SosOptions& options) {
  require(p >= 3, "certify: p must be at least 3");
  require(delta > 0.0, "certify: delta must be positive");
  const DerivativeBundle bundle = derivatives(spec, x, p);
  CertifyResult out;
  out.delta = delta;
  out.lambda_min = minEigenvalue(bundle.hessian()).value;
  out.case_tag = classifyCase(out.lambda_min, delta);
  out.model = buildModel(bundle, out.case_tag, delta, 0.0);
  out.sigma = minSigmaSos(out.model, options);
  SosModel at = out.model;
  at.sigma = out.sigma.sigma_bar;
  out.report = verifyCertificate(out.sigma.cert, at);
  return out;
}

}  // namespace sosarp

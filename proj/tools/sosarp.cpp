// sosarp command-line front end. Exit codes: 0 success, 1 usage or input
// error, 2 iteration limit, 3 numerical or solver failure.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sosarp/arp.hpp"
#include "sosarp/experiments.hpp"
#include "sosarp/problems.hpp"

using namespace sosarp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitMaxIter = 2;
constexpr int kExitFailure = 3;

// Raised for flag combinations CLI11 cannot express; reported as usage errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const auto kOpenUnit = CLI::Validator(
    [](std::string& s) -> std::string {
      double v = 0.0;
      try {
        v = std::stod(s);
      } catch (const std::exception&) {
        return "not a number: " + s;
      }
      return (v > 0.0 && v < 1.0) ? "" : "must lie in (0, 1)";
    },
    "in (0,1)");

struct ModelFlags {
  std::string problem;
  std::string point;
  int p = 3;
  double eps = 1e-5;
  std::optional<double> a;
  std::optional<double> delta;

  void add(CLI::App* cmd, bool needs_problem = true) {
    auto* pr = cmd->add_option("--problem", problem, "Problem file (JSON)")->check(CLI::ExistingFile);
    if (needs_problem) pr->required();
    cmd->add_option("--point", point, "Starting point / evaluation point file");
    cmd->add_option("--p", p, "Taylor order")->check(CLI::Range(3, 8));
    cmd->add_option("--eps", eps, "Gradient tolerance")->check(kOpenUnit);
    auto* oa = cmd->add_option("--a", a, "delta = eps^a")->check(CLI::Range(0.0, 0.5));
    auto* od = cmd->add_option("--delta", delta, "Fixed delta in (0, 1]")->check(CLI::Range(1e-300, 1.0));
    oa->excludes(od);
  }

  ProblemSpec loadSpec() const { return loadProblem(problem); }

  Vector point_or_default(const ProblemSpec& spec) const {
    if (!point.empty()) return loadPoint(point, spec.n);
    if (spec.x0) return *spec.x0;
    return Vector::Zero(spec.n);
  }

  ArpConfig config() const {
    ArpConfig c;
    c.p = p;
    c.epsilon = eps;
    if (a) c.a = *a;
    c.delta = delta;
    return c;
  }
};

void checkOrder(const ProblemSpec& spec, int p) {
  if (spec.kind != ProblemKind::Builtin) return;
  const BuiltinInfo& info = builtinInfo(spec.builtin);
  if (info.max_order >= 0 && p > info.max_order)
    throw UsageError("problem '" + spec.name + "' provides derivatives up to order " +
                     std::to_string(info.max_order));
}

// Opened only after every flag has been validated.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw UsageError("cannot open output file '" + path + "'");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  bool isFile() const { return static_cast<bool>(file_); }

 private:
  std::unique_ptr<std::ofstream> file_;
};

int exitFor(RunStatus s) {
  switch (s) {
    case RunStatus::Converged: return kExitOk;
    case RunStatus::MaxIterations: return kExitMaxIter;
    case RunStatus::SubsolverFailure: return kExitFailure;
  }
  return kExitFailure;
}

struct MinimizeCmd {
  ModelFlags model;
  double eta = 0.1, gamma1 = 2.0, gamma2 = 0.5, sigma_min = 1e-8, theta = 0.5;
  std::optional<double> sigma0;
  int max_iter = 1000;
  int max_failures = 60;
  std::string out;
  bool check_theory = false;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("minimize", "Run the adaptive regularization method");
    model.add(cmd);
    cmd->add_option("--eta", eta, "Acceptance threshold")->check(kOpenUnit);
    cmd->add_option("--gamma1", gamma1, "Weight increase factor");
    cmd->add_option("--gamma2", gamma2, "Weight decrease factor")->check(kOpenUnit);
    cmd->add_option("--sigma-min", sigma_min, "Lower bound on the adaptive weight");
    cmd->add_option("--sigma0", sigma0, "Initial adaptive weight");
    cmd->add_option("--theta", theta, "Subproblem termination constant")->check(kOpenUnit);
    cmd->add_option("--max-iter", max_iter, "Iteration limit")->check(CLI::NonNegativeNumber);
    cmd->add_option("--max-failures", max_failures, "Consecutive unsuccessful iterations allowed")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", out, "CSV path (default: stdout)");
    cmd->add_flag("--check-theory", check_theory, "Replay the run against the analytic inequalities");
    cmd_ = cmd;
  }

  int exec() {
    const ProblemSpec spec = model.loadSpec();
    checkOrder(spec, model.p);
    ArpConfig cfg = model.config();
    cfg.eta = eta;
    cfg.gamma1 = gamma1;
    cfg.gamma2 = gamma2;
    cfg.sigma_min = sigma_min;
    cfg.sigma0 = sigma0;
    cfg.theta = theta;
    cfg.max_iter = max_iter;
    cfg.max_failures = max_failures;
    cfg.x0 = model.point_or_default(spec);
    try {
      cfg.validate();
    } catch (const ContractViolation& e) {
      throw UsageError(e.what());
    }

    Output csv(out);
    writeIterationHeader(csv.stream());
    const ProblemObjective objective(spec);
    const RunResult result =
        run(objective, cfg, [&](const IterationRecord& r) { writeIterationRow(r, csv.stream()); });
    csv.stream().flush();
    std::cout << statusLine(result) << '\n';
    if (check_theory) {
      const TheoryReport rep = assertTheory(result, cfg);
      std::cout << "theory=" << (rep.ok() ? "ok" : "violated")
                << " model_decrease_checked=" << rep.model_decrease_checked
                << " decrease_checked=" << rep.decrease_checked << '\n';
      for (const auto& f : rep.failures) std::cout << "  " << f << '\n';
      if (!rep.ok()) return kExitFailure;
    }
    return exitFor(result.status);
  }

  CLI::App* cmd_ = nullptr;
};

struct ScanCmd {
  ScanKind kind;
  int n = 2;
  int p = 3;
  int seeds = 10;
  double delta = 1.0;
  std::vector<double> values;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string out;

  explicit ScanCmd(ScanKind k) : kind(k) {
    if (k == ScanKind::TensorScale) {
      values = {1.0, 10.0, 100.0, 1000.0};
    } else {
      for (int i = 0; i < 7; ++i) values.push_back(std::pow(10.0, -3.0 + 0.5 * i));
    }
  }

  void add(CLI::App& app) {
    const bool tensor = kind == ScanKind::TensorScale;
    auto* cmd = app.add_subcommand(tensor ? "scan-tensor" : "scan-delta",
                                   tensor ? "Minimal SoS weight against tensor magnitude"
                                          : "Minimal SoS weight against delta");
    cmd->add_option("--n", n, "Dimension")->check(CLI::Range(1, 4));
    cmd->add_option("--p", p, "Taylor order")->check(CLI::IsMember({3, 4}));
    cmd->add_option("--seeds", seeds, "Random models per scan value")->check(CLI::PositiveNumber);
    if (tensor) {
      cmd->add_option("--delta", delta, "Smallest Hessian eigenvalue")->check(CLI::Range(1e-300, 1.0));
      cmd->add_option("--scales", values, "Largest absolute tensor entries")
          ->delimiter(',')
          ->check(CLI::PositiveNumber);
    } else {
      cmd->add_option("--deltas", values, "Delta values")->delimiter(',')->check(CLI::Range(1e-300, 1.0));
    }
    cmd->add_option("--seed", seed, "Base seed (default: SOSARP_SEED or built-in)");
    cmd->add_option("--threads", threads, "Worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
    cmd->add_option("--out", out, "CSV path (default: stdout)");
    cmd_ = cmd;
  }

  int exec() {
    ScanConfig cfg;
    cfg.kind = kind;
    cfg.n = n;
    cfg.p = p;
    cfg.seeds = seeds;
    cfg.delta = delta;
    cfg.values = values;
    cfg.threads = threads;
    cfg.base_seed = seed ? *seed : defaultSeed();
    try {
      cfg.validate();
    } catch (const ContractViolation& e) {
      throw UsageError(e.what());
    }
    const ScanResult result = runScan(cfg);
    Output csv(out);
    writeScanCsv(result, csv.stream());
    return result.failures == 0 ? kExitOk : kExitFailure;
  }

  CLI::App* cmd_ = nullptr;
};

struct CertifyCmd {
  ModelFlags model;
  bool dump = false;
  bool gram = false;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("certify", "Minimal SoS-convexity weight of the model at a point");
    model.add(cmd);
    cmd->add_flag("--dump", dump, "Print the Hessian form and Gram basis");
    cmd->add_flag("--gram", gram, "Print the Gram matrix");
    cmd_ = cmd;
  }

  int exec() {
    const ProblemSpec spec = model.loadSpec();
    checkOrder(spec, model.p);
    const Vector x = model.point_or_default(spec);
    ArpConfig cfg = model.config();
    try {
      cfg.validate();
    } catch (const ContractViolation& e) {
      throw UsageError(e.what());
    }
    const CertifyResult r = certifyAt(spec, x, model.p, cfg.effectiveDelta());
    std::cout << "case=" << caseName(r.case_tag) << " lambda_min=" << r.lambda_min << " delta=" << r.delta
              << '\n';
    std::cout << std::fixed << std::setprecision(6) << "sigma_bar=" << r.sigma.sigma_bar << '\n'
              << std::defaultfloat;
    std::cout << "residual=" << r.report.residual << " q_min_eigenvalue=" << r.report.q_min_eigenvalue
              << " hessian_violations=" << r.report.hessian_violations
              << " sdp_status=" << statusName(r.sigma.sdp_status)
              << (r.sigma.used_bisection ? " bisection=1" : "") << '\n';
    if (dump) dumpSos(r.model, std::cout);
    if (gram) {
      const Eigen::IOFormat fmt(8, 0, ", ", "\n", "  [", "]");
      std::cout << "gram=\n" << r.sigma.cert.q.format(fmt) << '\n';
    }
    return r.report.ok ? kExitOk : kExitFailure;
  }

  CLI::App* cmd_ = nullptr;
};

struct ConvexRateCmd {
  ModelFlags model;
  std::vector<double> eps_list{1e-1, 1e-2, 1e-3, 1e-4};
  int max_iter = 1000;
  std::string out;
  std::string trajectory;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("convex-rate", "Iteration counts over a list of tolerances");
    model.add(cmd);
    cmd->add_option("--eps-list", eps_list, "Gradient tolerances")->delimiter(',')->check(kOpenUnit);
    cmd->add_option("--max-iter", max_iter, "Iteration limit per run")->check(CLI::NonNegativeNumber);
    cmd->add_option("--out", out, "Summary CSV path (default: stdout)");
    cmd->add_option("--trajectory", trajectory, "Objective-gap trajectory CSV path");
    cmd_ = cmd;
  }

  int exec() {
    const ProblemSpec spec = model.loadSpec();
    checkOrder(spec, model.p);
    if (!isStronglyConvex(spec))
      throw UsageError("problem '" + spec.name + "' is not registered as strongly convex");
    if (eps_list.empty()) throw UsageError("--eps-list is empty");
    ArpConfig cfg = model.config();
    cfg.max_iter = max_iter;
    cfg.x0 = model.point_or_default(spec);
    try {
      for (double e : eps_list) {
        cfg.epsilon = e;
        cfg.validate();
      }
    } catch (const ContractViolation& e) {
      throw UsageError(e.what());
    }
    const std::vector<RateRow> rows = convexRate(spec, cfg, eps_list);
    Output csv(out);
    writeRateCsv(rows, csv.stream());
    if (!trajectory.empty()) {
      Output traj(trajectory);
      writeTrajectoryCsv(rows, traj.stream());
    }
    int code = kExitOk;
    for (const RateRow& r : rows) code = std::max(code, exitFor(r.status));
    return code;
  }

  CLI::App* cmd_ = nullptr;
};

struct CheckDerivsCmd {
  ModelFlags model;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("check-derivs", "Finite-difference check of the analytic derivatives");
    model.add(cmd);
    cmd_ = cmd;
  }

  int exec() {
    const ProblemSpec spec = model.loadSpec();
    checkOrder(spec, model.p);
    const Vector x = model.point_or_default(spec);
    const DerivativeReport rep = checkDerivatives(spec, x, model.p);
    for (const OrderCheck& o : rep.orders)
      std::cout << "order=" << o.order << " max_rel_error=" << o.max_rel_error << " threshold=" << o.threshold
                << ' ' << (o.pass ? "pass" : "FAIL") << '\n';
    std::cout << "result=" << (rep.pass ? "pass" : "fail") << '\n';
    return rep.pass ? kExitOk : kExitFailure;
  }

  CLI::App* cmd_ = nullptr;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive regularization with sum-of-squares convex models"};
  app.require_subcommand(1);

  MinimizeCmd minimize;
  ScanCmd scan_tensor(ScanKind::TensorScale);
  ScanCmd scan_delta(ScanKind::Delta);
  CertifyCmd certify;
  ConvexRateCmd convex_rate;
  CheckDerivsCmd check_derivs;
  minimize.add(app);
  scan_tensor.add(app);
  scan_delta.add(app);
  certify.add(app);
  convex_rate.add(app);
  check_derivs.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (minimize.cmd_->parsed()) return minimize.exec();
    if (scan_tensor.cmd_->parsed()) return scan_tensor.exec();
    if (scan_delta.cmd_->parsed()) return scan_delta.exec();
    if (certify.cmd_->parsed()) return certify.exec();
    if (convex_rate.cmd_->parsed()) return convex_rate.exec();
    if (check_derivs.cmd_->parsed()) return check_derivs.exec();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ContractViolation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

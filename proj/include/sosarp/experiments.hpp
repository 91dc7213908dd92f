#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sosarp/arp.hpp"
#include "sosarp/problems.hpp"
#include "sosarp/sos.hpp"

namespace sosarp {

inline constexpr std::uint64_t kDefaultSeed = 20240611;

/// Seed from the SOSARP_SEED environment variable, else kDefaultSeed.
std::uint64_t defaultSeed();

enum class ScanKind { TensorScale, Delta };

struct ScanConfig {
  ScanKind kind = ScanKind::TensorScale;
  int n = 2;
  int p = 3;
  int seeds = 10;
  std::uint64_t base_seed = kDefaultSeed;
  /// Tensor magnitudes (tensor scan) or delta values (delta scan).
  std::vector<Scalar> values;
  /// Fixed delta of the tensor scan.
  Scalar delta = 1.0;
  /// 0 picks the hardware concurrency.
  int threads = 0;
  SosOptions sos;

  void validate() const;
};

/// Random model: g, H with N(0, 1) entries, H shifted so lambda_min = delta,
/// tensors of orders 3..p with N(0, 1) entries. With `max_entry` set, the
/// tensors are rescaled so their largest absolute entry equals it.
SosModel randomScanModel(int n, int p, Scalar delta, std::optional<Scalar> max_entry, std::uint64_t seed);

struct ScanCell {
  Scalar x = 0.0;
  int seed = 0;
  Scalar sigma_bar = 0.0;
  bool ok = false;
  std::string error;
};

struct ScanSummary {
  Scalar x = 0.0;
  /// Geometric mean of the positive sigma_bar values of the column.
  Scalar geometric_mean = 0.0;
  int used = 0;
};

struct ScanResult {
  std::vector<ScanCell> cells;
  std::vector<ScanSummary> summary;
  /// Least-squares slope of log(mean) against log(x); empty with < 2 points.
  std::optional<Scalar> slope;
  int failures = 0;
};

ScanResult runScan(const ScanConfig& config);

/// Slope of the least-squares line through (log x, log y).
Scalar logLogSlope(const std::vector<Scalar>& x, const std::vector<Scalar>& y);

/// Columns kind,x,seed,sigma_bar with cell, summary, slope and failures rows.
void writeScanCsv(const ScanResult& result, std::ostream& os);

struct RateRow {
  Scalar epsilon = 0.0;
  int successful = 0;
  int total = 0;
  RunStatus status = RunStatus::MaxIterations;
  Scalar final_f = 0.0;
  /// f(x_k) at every iterate, then the final value.
  std::vector<Scalar> f_trajectory;
};

/// Runs the driver for every epsilon. Throws ContractViolation unless the
/// problem carries the strongly convex flag.
std::vector<RateRow> convexRate(const ProblemSpec& spec, const ArpConfig& base,
                                const std::vector<Scalar>& epsilons);

/// Columns epsilon,successful_iterations,total_iterations,status,final_f.
void writeRateCsv(const std::vector<RateRow>& rows, std::ostream& os);
/// Columns epsilon,iter,f,f_gap with f_gap measured from the smallest final f.
void writeTrajectoryCsv(const std::vector<RateRow>& rows, std::ostream& os);

/// Columns iter,case,lambda_min,sigma_bar,sigma_r,sigma,step_norm,rho,f,grad_norm,success.
void writeIterationHeader(std::ostream& os);
void writeIterationRow(const IterationRecord& rec, std::ostream& os);
/// status=<..> iters=<..> f=<..> grad_norm=<..>
std::string statusLine(const RunResult& result);

struct CertifyResult {
  CaseTag case_tag = CaseTag::StronglyConvex;
  Scalar lambda_min = 0.0;
  Scalar delta = 0.0;
  SigmaResult sigma;
  CertificateReport report;
  SosModel model;
};

/// Minimal SoS weight of the case-dependent model of `spec` at x.
CertifyResult certifyAt(const ProblemSpec& spec, const Vector& x, int p, Scalar delta,
                        const SosOptions& options = {});

}  // namespace sosarp

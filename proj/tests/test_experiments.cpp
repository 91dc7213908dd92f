#include <cmath>
#include <sstream>

#include "doctest.h"
#include "sosarp/experiments.hpp"

using namespace sosarp;

TEST_CASE("log-log slope of exact power laws") {
  CHECK(logLogSlope({1, 10, 100}, {3, 300, 30000}) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(logLogSlope({1e-3, 1e-2, 1}, {5e3, 5e2, 5}) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK_THROWS_AS(logLogSlope({1}, {1}), ContractViolation);
  CHECK_THROWS_AS(logLogSlope({1, 1}, {1, 2}), ContractViolation);
  CHECK_THROWS_AS(logLogSlope({1, 2}, {0, 2}), ContractViolation);
}

TEST_CASE("random scan models honour delta and the tensor scale") {
  for (Scalar delta : {1e-3, 0.5}) {
    const SosModel m = randomScanModel(3, 4, delta, 25.0, 17);
    CHECK(minEigenvalue(m.h_bar).value == doctest::Approx(delta).epsilon(1e-9));
    REQUIRE(m.higher.size() == 2);
    for (const auto& t : m.higher) CHECK(t.maxAbsEntry() == doctest::Approx(25.0).epsilon(1e-14));
  }
  const SosModel a = randomScanModel(2, 3, 0.1, std::nullopt, 3);
  const SosModel b = randomScanModel(2, 3, 0.1, std::nullopt, 3);
  CHECK(a.g == b.g);
  CHECK(a.h_bar == b.h_bar);
  // The delta scan keeps the same draw for every delta.
  const SosModel c = randomScanModel(2, 3, 0.9, std::nullopt, 3);
  CHECK(c.g == a.g);
  CHECK(c.higher[0].entries() == a.higher[0].entries());
}

TEST_CASE("scan rows are ordered and independent of the thread count") {
  ScanConfig cfg;
  cfg.values = {1.0, 10.0};
  cfg.seeds = 3;
  cfg.threads = 1;
  const ScanResult one = runScan(cfg);
  cfg.threads = 4;
  const ScanResult four = runScan(cfg);
  REQUIRE(one.cells.size() == 6);
  for (std::size_t i = 0; i < one.cells.size(); ++i) {
    CHECK(one.cells[i].x == cfg.values[i / 3]);
    CHECK(one.cells[i].seed == static_cast<int>(i % 3));
    CHECK(one.cells[i].sigma_bar == four.cells[i].sigma_bar);
  }
  REQUIRE(one.slope);
  // sigma_bar is homogeneous of degree 2 in the p = 3 tensor along a fixed draw.
  CHECK(*one.slope == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("scan configuration is validated") {
  ScanConfig cfg;
  CHECK_THROWS_AS(runScan(cfg), ContractViolation);
  cfg.values = {1.0};
  cfg.seeds = 0;
  CHECK_THROWS_AS(runScan(cfg), ContractViolation);
  cfg.seeds = 1;
  cfg.kind = ScanKind::Delta;
  cfg.values = {2.0};
  CHECK_THROWS_AS(runScan(cfg), ContractViolation);
}

TEST_CASE("failed cells are marked, excluded from the mean and counted") {
  ScanResult r;
  r.cells = {{1.0, 0, 4.0, true, ""}, {1.0, 1, 0.0, false, "boom"}, {1.0, 2, 16.0, true, ""}};
  r.summary = {{1.0, 8.0, 2}};
  r.failures = 1;
  std::ostringstream os;
  writeScanCsv(r, os);
  CHECK(os.str() ==
        "kind,x,seed,sigma_bar\n"
        "cell,1,0,4\n"
        "cell,1,1,failed\n"
        "cell,1,2,16\n"
        "summary,1,,8\n"
        "slope,,,\n"
        "failures,,,1\n");
}

TEST_CASE("iteration rows and the status line") {
  IterationRecord rec;
  rec.k = 3;
  rec.case_tag = CaseTag::Nonconvex;
  rec.lambda_min = -0.5;
  rec.success = true;
  std::ostringstream os;
  writeIterationHeader(os);
  writeIterationRow(rec, os);
  CHECK(os.str() ==
        "iter,case,lambda_min,sigma_bar,sigma_r,sigma,step_norm,rho,f,grad_norm,success\n"
        "3,Nonconvex,-0.5,0,0,0,0,0,0,0,1\n");
  RunResult res;
  res.status = RunStatus::Converged;
  res.f = 0.25;
  res.grad_norm = 1e-7;
  res.records.resize(4);
  CHECK(statusLine(res) == "status=Converged iters=4 f=0.25 grad_norm=1e-07");
}

TEST_CASE("convex rate refuses problems without the strongly convex flag") {
  CHECK_THROWS_AS(convexRate(rosenbrock(2), ArpConfig{}, {1e-2}), ContractViolation);
  const auto rows = convexRate(separableQuartic(2), ArpConfig{}, {1e-1, 1e-3});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].status == RunStatus::Converged);
  CHECK(rows[1].successful >= rows[0].successful);
  CHECK(rows[1].f_trajectory.size() == static_cast<std::size_t>(rows[1].total) + 1);
}

TEST_CASE("certify at a point recovers the univariate discriminant") {
  ProblemSpec spec;
  spec.name = "cubic";
  spec.n = 1;
  spec.terms = {{Exponent{2}, 1.5}, {Exponent{3}, -2.0}};
  const CertifyResult r = certifyAt(spec, Vector::Zero(1), 3, 0.01);
  // h = 3, t = -12: sigma_bar = t^2 / (12 h) = 4.
  CHECK(r.case_tag == CaseTag::StronglyConvex);
  CHECK(r.sigma.sigma_bar == doctest::Approx(4.0).epsilon(1e-7));
  CHECK(r.report.ok);
}

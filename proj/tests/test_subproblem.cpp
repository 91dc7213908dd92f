#include <cmath>
#include <random>

#include "doctest.h"
#include "sosarp/subproblem.hpp"

using namespace sosarp;

namespace {

SosModel quadraticModel(const Matrix& h, const Vector& g, Scalar sigma) {
  SosModel m;
  m.n = static_cast<int>(g.size());
  m.p = 3;
  m.p_prime = 4;
  m.f0 = 1.5;
  m.g = g;
  m.h_bar = h;
  m.higher = {SymmetricTensor(3, m.n)};
  m.delta = std::min(1.0, minEigenvalue(h).value);
  m.sigma = sigma;
  return m;
}

// Plain Newton with backtracking from an arbitrary start.
Vector independentMinimize(const SosModel& m, Vector s) {
  for (int it = 0; it < 200; ++it) {
    const Vector g = m.gradient(s);
    if (g.norm() < 1e-13) break;
    const Vector d = -m.hessian(s).ldlt().solve(g);
    Scalar a = 1.0;
    const Scalar v = m.value(s);
    while (a > 1e-12 && m.value(s + a * d) > v) a *= 0.5;
    s += a * d;
  }
  return s;
}

Scalar cubicRoot(Scalar p, Scalar q) {
  // Real root of t^3 + p t - q = 0 with p > 0.
  const Scalar disc = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
  return std::cbrt(q / 2.0 + disc) + std::cbrt(q / 2.0 - disc);
}

}  // namespace

TEST_CASE("zero gradient gives the zero step") {
  const SosModel m = quadraticModel(Matrix::Identity(2, 2), Vector::Zero(2), 1.0);
  const SubsolveResult r = minimizeModel(m);
  CHECK(r.converged);
  CHECK(r.iterations == 0);
  CHECK(r.s.norm() == 0.0);
  CHECK(r.model_value == m.f0);
}

TEST_CASE("univariate quartic model root") {
  const SosModel m = quadraticModel(Matrix::Identity(1, 1), Vector::Constant(1, -1.0), 1.0);
  const SubsolveResult r = minimizeModel(m, 1e-10);
  REQUIRE(r.converged);
  const Scalar oracle = cubicRoot(1.0, 1.0);
  CHECK(oracle == doctest::Approx(0.6823278).epsilon(1e-7));
  CHECK(std::abs(r.s(0) - oracle) <= 1e-10);
}

TEST_CASE("minimizer along an eigen-direction") {
  Matrix h{{2.0, 0.0}, {0.0, 5.0}};
  const Matrix q = Eigen::Rotation2D<Scalar>(0.3).toRotationMatrix();
  h = q * h * q.transpose();
  const Scalar sigma = 0.8, c = 3.0;
  const Vector g = -c * q.col(0);
  const SubsolveResult r = minimizeModel(quadraticModel(h, g, sigma), 1e-10);
  REQUIRE(r.converged);
  const Scalar tau = cubicRoot(2.0 / sigma, c / sigma);
  CHECK((r.s - tau * q.col(0)).norm() <= 1e-9);
}

TEST_CASE("default stopping rule and global minimum") {
  std::mt19937_64 rng(5);
  std::normal_distribution<Scalar> normal(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + trial % 2;
    const int p = 3 + trial % 2;
    SosModel m;
    m.n = n;
    m.p = p;
    m.p_prime = regularizationPower(p);
    m.f0 = normal(rng);
    m.g = Vector::NullaryExpr(n, [&] { return normal(rng); });
    Matrix a = Matrix::NullaryExpr(n, n, [&] { return normal(rng); });
    m.h_bar = 0.5 * (a + a.transpose());
    m.h_bar += (0.1 - minEigenvalue(m.h_bar).value) * Matrix::Identity(n, n);
    for (int j = 3; j <= p; ++j) m.higher.push_back(SymmetricTensor::random(j, n, rng));
    m.delta = 0.1;
    m.sigma = 1.2 * minSigmaSos(m).sigma_bar + 1e-3;

    const SubsolveResult r = minimizeModel(m);
    REQUIRE(r.converged);
    CHECK(r.model_value < m.value(Vector::Zero(n)));
    CHECK(r.grad_norm <= std::max(0.5 * std::pow(r.s.norm(), m.p_prime - 1),
                                  1e-12 * (1.0 + std::abs(m.f0))));
    CHECK(r.model_value == doctest::Approx(m.value(r.s)).epsilon(1e-12));

    const SubsolveResult tight = minimizeModel(m, 1e-10);
    for (int k = 0; k < 10; ++k) {
      const Vector start = Vector::NullaryExpr(n, [&] { return 3.0 * normal(rng); });
      const Vector s = independentMinimize(m, start);
      CHECK(m.value(s) >= tight.model_value - 1e-8 * (1.0 + std::abs(m.f0)));
      CHECK(std::abs(m.value(s) - tight.model_value) <= 1e-8 * (1.0 + std::abs(m.f0)));
    }
  }
}

TEST_CASE("bad theta is rejected") {
  const SosModel m = quadraticModel(Matrix::Identity(1, 1), Vector::Constant(1, -1.0), 1.0);
  CHECK_THROWS_AS(minimizeModel(m, 1.5), ContractViolation);
}

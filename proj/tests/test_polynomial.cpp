#include <cmath>
#include <random>

#include "doctest.h"
#include "sosarp/polynomial.hpp"
#include "sosarp/taylor.hpp"

using namespace sosarp;

namespace {

Polynomial randomPolynomial(int n, int degree, int terms, std::mt19937_64& rng) {
  std::normal_distribution<Scalar> normal(0.0, 1.0);
  Polynomial q(n);
  for (int k = 0; k < terms; ++k) {
    Exponent e(n, 0);
    int budget = degree;
    for (int i = 0; i < n; ++i) {
      e[i] = std::uniform_int_distribution<int>(0, budget)(rng);
      budget -= e[i];
    }
    q.addTerm(e, normal(rng));
  }
  return q;
}

Vector randomVector(int n, std::mt19937_64& rng) {
  std::normal_distribution<Scalar> normal(0.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

}  // namespace

TEST_CASE("degree and infStarNorm") {
  Polynomial q(2);
  CHECK(q.degree() == 0);
  CHECK(infStarNorm(q) == 0.0);
  CHECK(q.evaluate(Vector::Ones(2)) == 0.0);
  q.addTerm({2, 1}, 3.0);
  q.addTerm({0, 3}, -5.0);
  CHECK(q.degree() == 3);
  CHECK(infStarNorm(q) == 5.0);
  CHECK_THROWS_AS(q.addTerm({1}, 1.0), ContractViolation);
}

TEST_CASE("terms cancel to nothing") {
  Polynomial q(1);
  q.addTerm({2}, 1.5);
  q.addTerm({2}, -1.5);
  CHECK(q.isZero());

  Polynomial tol(1, 1e-3);
  tol.addTerm({1}, 5e-4);
  CHECK(tol.isZero());
}

TEST_CASE("gradient and Hessian of s1^2 s2") {
  Polynomial q(2);
  q.addTerm({2, 1}, 1.0);
  Vector s = Vector::Ones(2);
  const Vector g = polyGradient(q, s);
  CHECK(g(0) == doctest::Approx(2.0));
  CHECK(g(1) == doctest::Approx(1.0));
  const Matrix h = polyHessian(q, s);
  CHECK(h(0, 0) == doctest::Approx(2.0));
  CHECK(h(0, 1) == doctest::Approx(2.0));
  CHECK(h(1, 1) == doctest::Approx(0.0));

  const Polynomial c = Polynomial::constant(3, 7.0);
  std::mt19937_64 rng(1);
  CHECK(polyGradient(c, randomVector(3, rng)).norm() == 0.0);
}

TEST_CASE("symbolic derivatives agree with central differences") {
  std::mt19937_64 rng(21);
  const Scalar h = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    const Polynomial q = randomPolynomial(3, 4, 8, rng);
    const Vector s = randomVector(3, rng);
    const Vector g = polyGradient(q, s);
    const Matrix hess = polyHessian(q, s);
    for (int i = 0; i < 3; ++i) {
      Vector e = Vector::Zero(3);
      e(i) = h;
      const Scalar fd = (q.evaluate(s + e) - q.evaluate(s - e)) / (2 * h);
      CHECK(std::abs(fd - g(i)) <= 1e-6 * (1.0 + std::abs(g(i))));
      const Vector fdg = (polyGradient(q, s + e) - polyGradient(q, s - e)) / (2 * h);
      CHECK((fdg - hess.col(i)).norm() <= 1e-6 * (1.0 + hess.col(i).norm()));
    }
  }
}

TEST_CASE("product and power evaluate consistently") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 10; ++trial) {
    const Polynomial a = randomPolynomial(2, 3, 5, rng);
    const Polynomial b = randomPolynomial(2, 2, 4, rng);
    const Vector s = randomVector(2, rng);
    const Scalar ab = (a * b).evaluate(s);
    CHECK(std::abs(ab - a.evaluate(s) * b.evaluate(s)) <= 1e-12 * (1.0 + std::abs(ab)));
    const Scalar a3 = a.pow(3).evaluate(s);
    CHECK(std::abs(a3 - std::pow(a.evaluate(s), 3)) <= 1e-11 * (1.0 + std::abs(a3)));
  }
}

TEST_CASE("embedding shifts variables") {
  Polynomial q(2);
  q.addTerm({1, 2}, 2.0);
  const Polynomial e = q.embedded(4, 2);
  CHECK(e.coefficient({0, 0, 1, 2}) == 2.0);
  Vector v(4);
  v << 9.0, 9.0, 2.0, 3.0;
  CHECK(e.evaluate(v) == doctest::Approx(36.0));
}

TEST_CASE("expansion of a bundle matches the Taylor sum") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    DerivativeBundle b;
    b.x = randomVector(3, rng);
    b.value = 1.25;
    for (int j = 1; j <= 4; ++j) b.tensors.push_back(SymmetricTensor::random(j, 3, rng));
    const Polynomial full = expandToPolynomial(b, {0, 1, 2, 3, 4});
    const Polynomial partial = expandToPolynomial(b, {2, 4});
    CHECK(expandToPolynomial(b, {}).isZero());
    for (int k = 0; k < 20; ++k) {
      const Vector s = randomVector(3, rng);
      const Scalar tv = taylorValue(b, s);
      CHECK(std::abs(full.evaluate(s) - tv) <= 1e-10 * (1.0 + std::abs(tv)));
      const Scalar part = contract(b.tensor(2), s) / 2.0 + contract(b.tensor(4), s) / 24.0;
      CHECK(std::abs(partial.evaluate(s) - part) <= 1e-10 * (1.0 + std::abs(part)));
    }
    // Differentiation commutes with expansion: the gradient polynomial of the
    // expansion evaluated at 0 is the gradient tensor.
    const Vector g0 = polyGradient(full, Vector::Zero(3));
    CHECK((g0 - b.gradient()).norm() <= 1e-12);
    CHECK((polyHessian(full, Vector::Zero(3)) - b.hessian()).norm() <= 1e-12);
  }
}

TEST_CASE("Taylor value of x^2 is exact") {
  DerivativeBundle b;
  b.x = Vector::Ones(1);
  b.value = 1.0;
  b.tensors.push_back(SymmetricTensor::fromVector(Vector::Constant(1, 2.0)));
  b.tensors.push_back(SymmetricTensor::fromMatrix(Matrix::Constant(1, 1, 2.0)));
  b.tensors.push_back(SymmetricTensor(3, 1));
  for (Scalar s : {-1.0, 0.5, 2.0}) {
    const Vector sv = Vector::Constant(1, s);
    CHECK(taylorValue(b, sv) == (1.0 + s) * (1.0 + s));
  }
  CHECK(taylorValue(b, Vector::Zero(1)) == 1.0);
  CHECK_THROWS_AS(taylorValue(b, Vector::Zero(2)), ContractViolation);
}

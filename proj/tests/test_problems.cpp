#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "sosarp/problems.hpp"

using namespace sosarp;

namespace {

const std::string kDir = SOSARP_PROBLEM_DIR;

ProblemSpec quarticSum() {
  ProblemSpec s;
  s.name = "q";
  s.n = 2;
  s.terms = {{{4, 0}, 1.0}, {{0, 4}, 1.0}};
  return s;
}

ProblemSpec randomPolynomial(int n, int degree, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> e(0, degree);
  std::normal_distribution<Scalar> c(0.0, 1.0);
  ProblemSpec s;
  s.name = "random";
  s.n = n;
  for (int t = 0; t < 8; ++t) {
    Exponent ex(n, 0);
    int left = degree;
    for (int i = 0; i < n; ++i) {
      ex[i] = std::uniform_int_distribution<int>(0, left)(rng);
      left -= ex[i];
    }
    s.terms.emplace_back(ex, c(rng));
  }
  return s;
}

}  // namespace

TEST_CASE("monomial calculus for x1^4 + x2^4") {
  const DerivativeBundle b = derivatives(quarticSum(), Vector{{1.0, 1.0}}, 3);
  CHECK(b.value == 2.0);
  CHECK(b.gradient() == Vector{{4.0, 4.0}});
  CHECK(b.hessian() == Matrix{{12.0, 0.0}, {0.0, 12.0}});
  CHECK(b.tensor(3)({0, 0, 0}) == 24.0);
  CHECK(b.tensor(3)({1, 1, 1}) == 24.0);
  CHECK(b.tensor(3)({0, 0, 1}) == 0.0);
  CHECK(b.tensor(3)({0, 1, 1}) == 0.0);
}

TEST_CASE("low-order derivatives vanish at the origin") {
  ProblemSpec s;
  s.name = "cubic";
  s.n = 2;
  s.terms = {{{3, 0}, 2.0}, {{1, 2}, -1.0}};
  const DerivativeBundle b = derivatives(s, Vector::Zero(2), 3);
  CHECK(b.value == 0.0);
  CHECK(b.tensor(1).entries().empty());
  CHECK(b.tensor(2).entries().empty());
  CHECK(b.tensor(3)({0, 0, 0}) == 12.0);
  CHECK(b.tensor(3)({0, 1, 1}) == -2.0);
}

TEST_CASE("builtin derivatives agree with finite differences") {
  std::mt19937_64 rng(17);
  std::normal_distribution<Scalar> normal(0.0, 1.0);
  const std::vector<ProblemSpec> specs = {separableQuartic(3), cubicQuartic(), rosenbrock(3), sumExp(3)};
  for (const auto& spec : specs) {
    const int max_order = builtinInfo(spec.builtin).max_order;
    const int p = max_order < 0 ? 4 : max_order;
    for (int k = 0; k < 10; ++k) {
      const Vector x = Vector::NullaryExpr(spec.n, [&] { return 0.7 * normal(rng); });
      const DerivativeReport rep = checkDerivatives(spec, x, p);
      CHECK_MESSAGE(rep.pass, spec.name);
      for (const auto& o : rep.orders) CHECK(o.max_rel_error <= (o.order <= 3 ? 1e-5 : 1e-3));
    }
  }
}

TEST_CASE("explicit polynomials pass the derivative check to order 4") {
  ProblemSpec s = quarticSum();
  const DerivativeReport good = checkDerivatives(s, Vector{{0.3, -0.2}}, 4);
  CHECK(good.pass);
  CHECK(good.orders.size() == 4);
}

TEST_CASE("unsupported builtin order is an error") {
  CHECK_THROWS_AS(derivatives(rosenbrock(2), Vector::Zero(2), 4), ContractViolation);
  CHECK_NOTHROW(derivatives(rosenbrock(2), Vector::Zero(2), 3));
}

TEST_CASE("Taylor expansion of low-degree polynomials is exact") {
  std::mt19937_64 rng(23);
  std::normal_distribution<Scalar> normal(0.0, 1.0);
  for (int p : {3, 4}) {
    const ProblemSpec s = randomPolynomial(3, p, rng);
    const ProblemObjective obj(s);
    for (int k = 0; k < 20; ++k) {
      const Vector x = Vector::NullaryExpr(3, [&] { return normal(rng); });
      const Vector d = Vector::NullaryExpr(3, [&] { return normal(rng); });
      const Scalar expect = obj.value(x + d);
      CHECK(std::abs(taylorValue(obj.derivatives(x, p), d) - expect) <= 1e-10 * (1.0 + std::abs(expect)));
    }
  }
}

TEST_CASE("derivative tensors match symbolic gradient and Hessian") {
  std::mt19937_64 rng(29);
  std::normal_distribution<Scalar> normal(0.0, 1.0);
  for (int t = 0; t < 5; ++t) {
    const ProblemSpec s = randomPolynomial(3, 5, rng);
    const Polynomial q = s.polynomial();
    const Vector x = Vector::NullaryExpr(3, [&] { return normal(rng); });
    const DerivativeBundle b = derivatives(s, x, 2);
    CHECK((b.gradient() - polyGradient(q, x)).norm() <= 1e-12 * (1.0 + b.gradient().norm()));
    CHECK((b.hessian() - polyHessian(q, x)).norm() <= 1e-12 * (1.0 + b.hessian().norm()));
  }
}

TEST_CASE("minimal problem file") {
  const ProblemSpec s =
      parseProblem(R"({"name": "sq", "n": 1, "kind": "ExplicitPolynomial", "terms": [[[2], 1.0]]})");
  CHECK(s.n == 1);
  CHECK(evaluate(s, Vector::Constant(1, 3.0)) == 9.0);
  CHECK_FALSE(s.x0.has_value());
}

TEST_CASE("bundled problems round-trip") {
  int count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(kDir)) {
    if (entry.path().extension() != ".prob") continue;
    ++count;
    const ProblemSpec s = loadProblem(entry.path().string());
    CHECK(parseProblem(serializeProblem(s)) == s);
    const std::string tmp = (std::filesystem::temp_directory_path() / "sosarp_roundtrip.prob").string();
    saveProblem(s, tmp);
    CHECK(loadProblem(tmp) == s);
    std::remove(tmp.c_str());
  }
  CHECK(count >= 6);
}

TEST_CASE("parse errors name the offending field") {
  auto message = [](const std::string& text) {
    try {
      parseProblem(text, "t.prob");
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  const std::string bad_len = message(
      R"({"name": "x", "n": 2, "kind": "ExplicitPolynomial", "terms": [[[2, 0], 1.0], [[1, 1, 1], 2.0]]})");
  CHECK(bad_len.find("terms[1]") != std::string::npos);
  CHECK(bad_len.find("length 3") != std::string::npos);

  const std::string bad_builtin = message(R"({"name": "x", "n": 2, "kind": "Builtin", "builtin": "nope"})");
  CHECK(bad_builtin.find("unknown builtin 'nope'") != std::string::npos);

  const std::string bad_json = message("{\n  \"name\": \"x\",\n  \"n\": 2,,\n}");
  CHECK(bad_json.find("line 3") != std::string::npos);

  CHECK(message(R"({"name": "x", "n": 1, "kind": "Builtin", "builtin": "rosenbrock", "params": {"b": 1}})")
            .find("no parameter 'b'") != std::string::npos);
  CHECK(message(R"({"name": "x", "n": 3, "kind": "Builtin", "builtin": "cubic_quartic"})")
            .find("requires n = 2") != std::string::npos);
  CHECK(message(R"({"name": "x", "n": 1, "kind": "ExplicitPolynomial", "terms": [[[9], 1.0]]})")
            .find("degree exceeds") != std::string::npos);
  CHECK(message(R"({"name": "x", "n": 1, "kind": "Other"})").find("'kind'") != std::string::npos);
}

TEST_CASE("point files") {
  CHECK(parsePoint("1.5, -2\n# comment 3\n", 2) == Vector{{1.5, -2.0}});
  CHECK(parsePoint("[0.25 1e-3]", 2) == Vector{{0.25, 1e-3}});
  CHECK_THROWS_AS(parsePoint("1 2 3", 2), ParseError);
  CHECK_THROWS_AS(parsePoint("1 x", 2), ParseError);
}

TEST_CASE("strong convexity flags") {
  CHECK(isStronglyConvex(separableQuartic(2)));
  CHECK(isStronglyConvex(sumExp(2)));
  CHECK_FALSE(isStronglyConvex(cubicQuartic()));
  CHECK_FALSE(isStronglyConvex(rosenbrock(2)));
  CHECK_FALSE(isStronglyConvex(quarticSum()));
}

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sosarp/polynomial.hpp"
#include "sosarp/taylor.hpp"

namespace sosarp {

enum class ProblemKind { ExplicitPolynomial, Builtin };

std::string kindName(ProblemKind kind);

/// Largest total degree accepted for explicit polynomial problems.
inline constexpr int kMaxPolynomialDegree = 8;

struct ProblemSpec {
  std::string name;
  int n = 0;
  ProblemKind kind = ProblemKind::ExplicitPolynomial;
  /// Explicit polynomial terms (exponent vector, coefficient).
  std::vector<std::pair<Exponent, Scalar>> terms;
  /// Builtin identifier and numeric parameters.
  std::string builtin;
  std::map<std::string, Scalar> params;
  std::optional<Vector> x0;
  std::string description;

  /// Throws ContractViolation on inconsistent fields.
  void validate() const;
  Polynomial polynomial() const;

  friend bool operator==(const ProblemSpec& a, const ProblemSpec& b);
};

struct BuiltinInfo {
  std::string name;
  /// Highest derivative order available; -1 for any order.
  int max_order = -1;
  /// Required dimension; 0 for any n >= 1.
  int fixed_n = 0;
  std::string description;
};

const std::vector<BuiltinInfo>& registeredBuiltins();
const BuiltinInfo& builtinInfo(const std::string& name);

/// True when the problem carries the strongly convex registry flag.
bool isStronglyConvex(const ProblemSpec& spec);

/// Ready-made builtin specs with default parameters and starting points.
ProblemSpec separableQuartic(int n);
ProblemSpec cubicQuartic();
ProblemSpec rosenbrock(int n = 2, Scalar a = 10.0);
ProblemSpec sumExp(int n, int terms = 4, int seed = 1);

Scalar evaluate(const ProblemSpec& spec, const Vector& x);
DerivativeBundle derivatives(const ProblemSpec& spec, const Vector& x, int p);

/// Objective view of a problem; symbolic derivatives of explicit
/// polynomials are computed once and cached.
class ProblemObjective : public Objective {
 public:
  explicit ProblemObjective(ProblemSpec spec);
  int dim() const override { return spec_.n; }
  Scalar value(const Vector& x) const override;
  DerivativeBundle derivatives(const Vector& x, int p) const override;
  const ProblemSpec& spec() const { return spec_; }

 private:
  ProblemSpec spec_;
  struct Cache;
  std::shared_ptr<Cache> cache_;
};

/// Parse errors name the offending field.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ProblemSpec parseProblem(const std::string& text, const std::string& source = "<string>");
std::string serializeProblem(const ProblemSpec& spec);
ProblemSpec loadProblem(const std::string& path);
void saveProblem(const ProblemSpec& spec, const std::string& path);

/// Flat list of reals separated by whitespace or commas; '#' starts a comment.
Vector parsePoint(const std::string& text, int n);
Vector loadPoint(const std::string& path, int n);

struct OrderCheck {
  int order = 0;
  Scalar max_rel_error = 0.0;
  Scalar threshold = 0.0;
  bool pass = false;
};

struct DerivativeReport {
  std::vector<OrderCheck> orders;
  bool pass = false;
};

/// Central differences of the order j-1 derivative against the order j one,
/// entrywise error |fd - exact| / (1 + |exact|).
DerivativeReport checkDerivatives(const ProblemSpec& spec, const Vector& x, int p);

}  // namespace sosarp

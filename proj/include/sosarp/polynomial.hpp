#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "sosarp/types.hpp"

namespace sosarp {

/// Exponent vector alpha in N^n of the monomial s^alpha.
using Exponent = std::vector<int>;

/// Sparse multivariate polynomial in the standard monomial basis.
///
/// Terms whose coefficient has magnitude at or below the drop tolerance are
/// not stored. The default tolerance of 0 keeps every nonzero coefficient.
class Polynomial {
 public:
  explicit Polynomial(int dim, Scalar drop_tol = 0.0);

  static Polynomial constant(int dim, Scalar c);
  /// The polynomial s_i.
  static Polynomial variable(int dim, int i);

  int dim() const { return dim_; }
  Scalar dropTolerance() const { return drop_tol_; }
  const std::map<Exponent, Scalar>& terms() const { return terms_; }
  bool isZero() const { return terms_.empty(); }

  /// Max total degree over stored terms; 0 for the zero polynomial.
  int degree() const;
  Scalar coefficient(const Exponent& alpha) const;

  void addTerm(const Exponent& alpha, Scalar coeff);

  Scalar evaluate(const Vector& s) const;
  Polynomial derivative(int var) const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(Scalar c);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, Scalar c) { return a *= c; }
  friend Polynomial operator*(Scalar c, Polynomial a) { return a *= c; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

  Polynomial pow(int k) const;

  /// Same terms with the variable space widened to `new_dim`; old variable i
  /// becomes variable `offset + i`.
  Polynomial embedded(int new_dim, int offset) const;

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.dim_ == b.dim_ && a.terms_ == b.terms_;
  }

 private:
  void checkExponent(const Exponent& alpha) const;

  int dim_;
  Scalar drop_tol_;
  std::map<Exponent, Scalar> terms_;
};

/// Largest absolute coefficient; 0 for the zero polynomial.
Scalar infStarNorm(const Polynomial& q);

Vector polyGradient(const Polynomial& q, const Vector& s);
Matrix polyHessian(const Polynomial& q, const Vector& s);

/// Symbolic gradient, one polynomial per variable.
std::vector<Polynomial> gradientPolynomials(const Polynomial& q);

/// Human-readable listing, e.g. "3*s0^2*s1 - 5*s1^3".
std::string format(const Polynomial& q, const std::vector<std::string>& names = {});

std::ostream& operator<<(std::ostream& os, const Polynomial& q);

}  // namespace sosarp

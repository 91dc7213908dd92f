#pragma once

#include <set>
#include <vector>

#include "sosarp/polynomial.hpp"
#include "sosarp/tensor.hpp"

namespace sosarp {

/// Value and derivative tensors of orders 1..p of an objective at a point.
struct DerivativeBundle {
  Vector x;
  Scalar value = 0.0;
  /// tensors[j - 1] holds the order-j derivative.
  std::vector<SymmetricTensor> tensors;

  int dim() const { return static_cast<int>(x.size()); }
  int order() const { return static_cast<int>(tensors.size()); }

  Vector gradient() const { return tensors.at(0).toVector(); }
  Matrix hessian() const { return tensors.at(1).toMatrix(); }
  const SymmetricTensor& tensor(int j) const { return tensors.at(j - 1); }

  /// Throws ContractViolation unless orders and dimensions are consistent.
  void validate() const;
};

/// Objective with exact derivatives up to some order.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual int dim() const = 0;
  virtual Scalar value(const Vector& x) const = 0;
  /// Value and derivative tensors of orders 1..p at x.
  virtual DerivativeBundle derivatives(const Vector& x, int p) const = 0;
};

/// sum_{j=1..p} T_j[s]^j / j!  (the Taylor expansion minus f(x)).
Scalar taylorIncrement(const DerivativeBundle& bundle, const Vector& s);

/// f(x) + sum_{j=1..p} T_j[s]^j / j!.
Scalar taylorValue(const DerivativeBundle& bundle, const Vector& s);

/// The Taylor terms of the listed orders as a polynomial in s. Order 0 is the
/// constant f(x).
Polynomial expandToPolynomial(const DerivativeBundle& bundle, const std::set<int>& orders);

/// (1/j!) T[s]^j as a polynomial in s.
Polynomial expandTensor(const SymmetricTensor& t);

}  // namespace sosarp

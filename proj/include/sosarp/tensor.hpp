#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "sosarp/types.hpp"

namespace sosarp {

/// Sorted (non-decreasing) list of 0-based coordinate indices.
using MultiIndex = std::vector<int>;

/// Symmetric tensor of order j over R^n.
///
/// Only one representative per index multiset is stored (the sorted one), so
/// symmetry cannot be violated. Multiplicities are applied when the tensor is
/// contracted or expanded into monomials.
class SymmetricTensor {
 public:
  SymmetricTensor(int order, int dim);

  /// Order-1 tensor from a gradient vector.
  static SymmetricTensor fromVector(const Vector& v);
  /// Order-2 tensor from a symmetric matrix (upper triangle is read).
  static SymmetricTensor fromMatrix(const Matrix& m);
  /// Entries drawn i.i.d. from N(0, 1), one per stored multiset.
  static SymmetricTensor random(int order, int dim, std::mt19937_64& rng);

  int order() const { return order_; }
  int dim() const { return dim_; }

  /// Entry lookup; the index is sorted first, so any permutation works.
  Scalar operator()(MultiIndex index) const;
  void set(MultiIndex index, Scalar value);
  void add(MultiIndex index, Scalar value);

  const std::map<MultiIndex, Scalar>& entries() const { return entries_; }

  SymmetricTensor scaled(Scalar factor) const;
  /// Largest absolute stored entry.
  Scalar maxAbsEntry() const;

  /// Dense n x n matrix; only valid for order 2.
  Matrix toMatrix() const;
  /// Dense vector; only valid for order 1.
  Vector toVector() const;

 private:
  void checkIndex(const MultiIndex& index) const;

  int order_;
  int dim_;
  std::map<MultiIndex, Scalar> entries_;
};

/// Number of distinct orderings of a sorted multiset, j! / prod(count_i!).
Scalar multiplicity(const MultiIndex& sorted);

/// T[s]^j, the full contraction.
Scalar contract(const SymmetricTensor& t, const Vector& s);
/// T[s]^{j-1}, one free index.
Vector contractDrop1(const SymmetricTensor& t, const Vector& s);
/// T[s]^{j-2}, two free indices.
Matrix contractDrop2(const SymmetricTensor& t, const Vector& s);

/// Contraction with `drop` free indices, drop in {0, 1, 2}. The result is
/// returned as a matrix of shape 1x1, n x 1 or n x n.
Matrix tensorApply(const SymmetricTensor& t, const Vector& s, int drop);

struct NormEstimate {
  Scalar value = 0.0;
  /// True when `value` is only a lower bound (orders >= 3).
  bool approximate = false;
};

/// max |T[u]^j| over unit vectors u. Exact for orders 1 and 2; for higher
/// orders the best value found by shifted power ascent from `restarts`
/// random starting points, which is a lower bound on the true norm.
NormEstimate tensorNorm(const SymmetricTensor& t, int restarts = 50,
                        std::uint64_t seed = 0x5eed);

struct EigenPair {
  Scalar value;
  Vector vector;
};

/// Leftmost eigenvalue of a symmetric matrix and a unit eigenvector.
EigenPair minEigenvalue(const Matrix& h);

}  // namespace sosarp

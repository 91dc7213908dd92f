#include "sosarp/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace sosarp {

namespace {

Scalar factorial(int k) {
  Scalar r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

Scalar monomialProduct(const MultiIndex& idx, const Vector& s) {
  Scalar r = 1.0;
  for (int i : idx) r *= s(i);
  return r;
}

// Removes one occurrence of the element at position `pos` from a sorted
// multiset.
MultiIndex without(const MultiIndex& idx, std::size_t pos) {
  MultiIndex r;
  r.reserve(idx.size() - 1);
  for (std::size_t k = 0; k < idx.size(); ++k)
    if (k != pos) r.push_back(idx[k]);
  return r;
}

}  // namespace

SymmetricTensor::SymmetricTensor(int order, int dim) : order_(order), dim_(dim) {
  require(order >= 1, "SymmetricTensor: order must be >= 1");
  require(dim >= 1, "SymmetricTensor: dim must be >= 1");
}

SymmetricTensor SymmetricTensor::fromVector(const Vector& v) {
  SymmetricTensor t(1, static_cast<int>(v.size()));
  for (int i = 0; i < v.size(); ++i)
    if (v(i) != 0.0) t.entries_[{i}] = v(i);
  return t;
}

SymmetricTensor SymmetricTensor::fromMatrix(const Matrix& m) {
  require(m.rows() == m.cols(), "SymmetricTensor::fromMatrix: matrix must be square");
  SymmetricTensor t(2, static_cast<int>(m.rows()));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = i; j < m.cols(); ++j)
      if (m(i, j) != 0.0) t.entries_[{i, j}] = m(i, j);
  return t;
}

SymmetricTensor SymmetricTensor::random(int order, int dim, std::mt19937_64& rng) {
  SymmetricTensor t(order, dim);
  std::normal_distribution<Scalar> normal(0.0, 1.0);
  MultiIndex idx(order, 0);
  // Enumerate sorted multi-indices in lexicographic order.
  while (true) {
    t.entries_[idx] = normal(rng);
    int k = order - 1;
    while (k >= 0 && idx[k] == dim - 1) --k;
    if (k < 0) break;
    ++idx[k];
    for (int m = k + 1; m < order; ++m) idx[m] = idx[k];
  }
  return t;
}

void SymmetricTensor::checkIndex(const MultiIndex& index) const {
  require(static_cast<int>(index.size()) == order_,
          "SymmetricTensor: index length differs from tensor order");
  for (int i : index)
    require(i >= 0 && i < dim_, "SymmetricTensor: index out of range");
}

Scalar SymmetricTensor::operator()(MultiIndex index) const {
  checkIndex(index);
  std::sort(index.begin(), index.end());
  auto it = entries_.find(index);
  return it == entries_.end() ? 0.0 : it->second;
}

void SymmetricTensor::set(MultiIndex index, Scalar value) {
  checkIndex(index);
  std::sort(index.begin(), index.end());
  if (value == 0.0)
    entries_.erase(index);
  else
    entries_[index] = value;
}

void SymmetricTensor::add(MultiIndex index, Scalar value) {
  checkIndex(index);
  std::sort(index.begin(), index.end());
  Scalar& slot = entries_[index];
  slot += value;
  if (slot == 0.0) entries_.erase(index);
}

SymmetricTensor SymmetricTensor::scaled(Scalar factor) const {
  SymmetricTensor r(order_, dim_);
  if (factor == 0.0) return r;
  for (const auto& [k, v] : entries_) r.entries_[k] = v * factor;
  return r;
}

Scalar SymmetricTensor::maxAbsEntry() const {
  Scalar m = 0.0;
  for (const auto& [k, v] : entries_) m = std::max(m, std::abs(v));
  return m;
}

Matrix SymmetricTensor::toMatrix() const {
  require(order_ == 2, "SymmetricTensor::toMatrix: order must be 2");
  Matrix m = Matrix::Zero(dim_, dim_);
  for (const auto& [k, v] : entries_) {
    m(k[0], k[1]) = v;
    m(k[1], k[0]) = v;
  }
  return m;
}

Vector SymmetricTensor::toVector() const {
  require(order_ == 1, "SymmetricTensor::toVector: order must be 1");
  Vector r = Vector::Zero(dim_);
  for (const auto& [k, v] : entries_) r(k[0]) = v;
  return r;
}

Scalar multiplicity(const MultiIndex& sorted) {
  Scalar r = factorial(static_cast<int>(sorted.size()));
  std::size_t run = 1;
  for (std::size_t k = 1; k <= sorted.size(); ++k) {
    if (k < sorted.size() && sorted[k] == sorted[k - 1]) {
      ++run;
    } else {
      r /= factorial(static_cast<int>(run));
      run = 1;
    }
  }
  return r;
}

Scalar contract(const SymmetricTensor& t, const Vector& s) {
  require(s.size() == t.dim(), "contract: dimension mismatch");
  Scalar r = 0.0;
  for (const auto& [k, v] : t.entries()) r += v * multiplicity(k) * monomialProduct(k, s);
  return r;
}

Vector contractDrop1(const SymmetricTensor& t, const Vector& s) {
  require(s.size() == t.dim(), "contractDrop1: dimension mismatch");
  Vector out = Vector::Zero(t.dim());
  for (const auto& [k, v] : t.entries()) {
    for (std::size_t a = 0; a < k.size(); ++a) {
      if (a > 0 && k[a] == k[a - 1]) continue;
      const MultiIndex rest = without(k, a);
      out(k[a]) += v * multiplicity(rest) * monomialProduct(rest, s);
    }
  }
  return out;
}

Matrix contractDrop2(const SymmetricTensor& t, const Vector& s) {
  require(s.size() == t.dim(), "contractDrop2: dimension mismatch");
  require(t.order() >= 2, "contractDrop2: tensor order must be >= 2");
  Matrix out = Matrix::Zero(t.dim(), t.dim());
  for (const auto& [k, v] : t.entries()) {
    for (std::size_t a = 0; a < k.size(); ++a) {
      if (a > 0 && k[a] == k[a - 1]) continue;
      const MultiIndex r1 = without(k, a);
      for (std::size_t b = 0; b < r1.size(); ++b) {
        if (b > 0 && r1[b] == r1[b - 1]) continue;
        const MultiIndex r2 = without(r1, b);
        out(k[a], r1[b]) += v * multiplicity(r2) * monomialProduct(r2, s);
      }
    }
  }
  return out;
}

Matrix tensorApply(const SymmetricTensor& t, const Vector& s, int drop) {
  require(drop >= 0 && drop <= 2, "tensorApply: drop must be 0, 1 or 2");
  require(drop <= t.order(), "tensorApply: drop exceeds tensor order");
  switch (drop) {
    case 0: {
      Matrix r(1, 1);
      r(0, 0) = contract(t, s);
      return r;
    }
    case 1:
      return contractDrop1(t, s);
    default:
      return contractDrop2(t, s);
  }
}

NormEstimate tensorNorm(const SymmetricTensor& t, int restarts, std::uint64_t seed) {
  if (t.order() == 1) return {t.toVector().norm(), false};
  if (t.order() == 2) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(t.toMatrix(), Eigen::EigenvaluesOnly);
    return {es.eigenvalues().cwiseAbs().maxCoeff(), false};
  }

  const int n = t.dim();
  const Scalar j = t.order();
  std::mt19937_64 rng(seed);
  std::normal_distribution<Scalar> normal(0.0, 1.0);
  Scalar best = 0.0;

  for (int r = 0; r < std::max(1, restarts); ++r) {
    Vector u(n);
    for (int i = 0; i < n; ++i) u(i) = normal(rng);
    if (u.norm() == 0.0) u(0) = 1.0;
    u.normalize();
    // Ascend on sign * T[u]^j; both signs matter for even orders.
    for (Scalar sign : {1.0, -1.0}) {
      Vector x = u;
      Scalar value = sign * contract(t, x);
      Scalar step = 1.0;
      for (int it = 0; it < 500 && step > 1e-14; ++it) {
        Vector grad = sign * j * contractDrop1(t, x);
        grad -= grad.dot(x) * x;  // tangent component
        if (grad.norm() < 1e-15 * (1.0 + std::abs(value))) break;
        Vector trial = (x + step * grad).normalized();
        const Scalar tv = sign * contract(t, trial);
        if (tv > value) {
          x = trial;
          value = tv;
          step *= 1.5;
        } else {
          step *= 0.5;
        }
      }
      best = std::max(best, std::abs(contract(t, x)));
    }
  }
  return {best, true};
}

EigenPair minEigenvalue(const Matrix& h) {
  require(h.rows() == h.cols(), "minEigenvalue: matrix must be square");
  const Scalar asym = (h - h.transpose()).cwiseAbs().maxCoeff();
  require(asym <= 1e-12 * (1.0 + h.cwiseAbs().maxCoeff()),
          "minEigenvalue: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  return {es.eigenvalues()(0), es.eigenvectors().col(0)};
}

}  // namespace sosarp

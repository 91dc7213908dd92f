#include "sosarp/taylor.hpp"

namespace sosarp {

namespace {

Scalar factorial(int k) {
  Scalar r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

}  // namespace

void DerivativeBundle::validate() const {
  for (std::size_t j = 0; j < tensors.size(); ++j) {
    require(tensors[j].order() == static_cast<int>(j) + 1,
            "DerivativeBundle: tensor orders must be 1..p in sequence");
    require(tensors[j].dim() == dim(), "DerivativeBundle: tensor dimension differs from x");
  }
}

Scalar taylorIncrement(const DerivativeBundle& bundle, const Vector& s) {
  require(s.size() == bundle.dim(), "taylorIncrement: dimension mismatch");
  Scalar total = 0.0;
  for (const auto& t : bundle.tensors) total += contract(t, s) / factorial(t.order());
  return total;
}

Scalar taylorValue(const DerivativeBundle& bundle, const Vector& s) {
  return bundle.value + taylorIncrement(bundle, s);
}

Polynomial expandTensor(const SymmetricTensor& t) {
  Polynomial q(t.dim());
  const Scalar inv = 1.0 / factorial(t.order());
  for (const auto& [idx, v] : t.entries()) {
    Exponent alpha(t.dim(), 0);
    for (int i : idx) ++alpha[i];
    q.addTerm(alpha, v * multiplicity(idx) * inv);
  }
  return q;
}

Polynomial expandToPolynomial(const DerivativeBundle& bundle, const std::set<int>& orders) {
  Polynomial q(bundle.dim());
  for (int j : orders) {
    require(j >= 0 && j <= bundle.order(), "expandToPolynomial: order outside 0..p");
    if (j == 0)
      q.addTerm(Exponent(bundle.dim(), 0), bundle.value);
    else
      q += expandTensor(bundle.tensor(j));
  }
  return q;
}

}  // namespace sosarp

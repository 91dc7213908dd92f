#include "sosarp/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sosarp {

Polynomial::Polynomial(int dim, Scalar drop_tol) : dim_(dim), drop_tol_(drop_tol) {
  require(dim >= 1, "Polynomial: dim must be >= 1");
  require(drop_tol >= 0.0, "Polynomial: drop tolerance must be nonnegative");
}

Polynomial Polynomial::constant(int dim, Scalar c) {
  Polynomial p(dim);
  p.addTerm(Exponent(dim, 0), c);
  return p;
}

Polynomial Polynomial::variable(int dim, int i) {
  require(i >= 0 && i < dim, "Polynomial::variable: index out of range");
  Polynomial p(dim);
  Exponent e(dim, 0);
  e[i] = 1;
  p.addTerm(e, 1.0);
  return p;
}

void Polynomial::checkExponent(const Exponent& alpha) const {
  require(static_cast<int>(alpha.size()) == dim_, "Polynomial: exponent length differs from dim");
  for (int a : alpha) require(a >= 0, "Polynomial: negative exponent");
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [alpha, c] : terms_) {
    int total = 0;
    for (int a : alpha) total += a;
    d = std::max(d, total);
  }
  return d;
}

Scalar Polynomial::coefficient(const Exponent& alpha) const {
  auto it = terms_.find(alpha);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::addTerm(const Exponent& alpha, Scalar coeff) {
  checkExponent(alpha);
  if (coeff == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(alpha, coeff);
  if (!inserted) it->second += coeff;
  if (std::abs(it->second) <= drop_tol_) terms_.erase(it);
}

Scalar Polynomial::evaluate(const Vector& s) const {
  require(s.size() == dim_, "Polynomial::evaluate: dimension mismatch");
  Scalar total = 0.0;
  for (const auto& [alpha, c] : terms_) {
    Scalar m = c;
    for (int i = 0; i < dim_; ++i)
      for (int k = 0; k < alpha[i]; ++k) m *= s(i);
    total += m;
  }
  return total;
}

Polynomial Polynomial::derivative(int var) const {
  require(var >= 0 && var < dim_, "Polynomial::derivative: variable out of range");
  Polynomial d(dim_, drop_tol_);
  for (const auto& [alpha, c] : terms_) {
    if (alpha[var] == 0) continue;
    Exponent e = alpha;
    e[var] -= 1;
    d.addTerm(e, c * alpha[var]);
  }
  return d;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  require(other.dim_ == dim_, "Polynomial: dimension mismatch in +");
  for (const auto& [alpha, c] : other.terms_) addTerm(alpha, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  require(other.dim_ == dim_, "Polynomial: dimension mismatch in -");
  for (const auto& [alpha, c] : other.terms_) addTerm(alpha, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(Scalar c) {
  if (c == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= c;
    if (std::abs(it->second) <= drop_tol_)
      it = terms_.erase(it);
    else
      ++it;
  }
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  require(a.dim_ == b.dim_, "Polynomial: dimension mismatch in *");
  Polynomial r(a.dim_, std::max(a.drop_tol_, b.drop_tol_));
  Exponent e(a.dim_);
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) {
      for (int i = 0; i < a.dim_; ++i) e[i] = ea[i] + eb[i];
      r.addTerm(e, ca * cb);
    }
  }
  return r;
}

Polynomial Polynomial::pow(int k) const {
  require(k >= 0, "Polynomial::pow: negative power");
  Polynomial r = constant(dim_, 1.0);
  for (int i = 0; i < k; ++i) r = r * *this;
  return r;
}

Polynomial Polynomial::embedded(int new_dim, int offset) const {
  require(offset >= 0 && offset + dim_ <= new_dim, "Polynomial::embedded: bad layout");
  Polynomial r(new_dim, drop_tol_);
  for (const auto& [alpha, c] : terms_) {
    Exponent e(new_dim, 0);
    std::copy(alpha.begin(), alpha.end(), e.begin() + offset);
    r.addTerm(e, c);
  }
  return r;
}

Scalar infStarNorm(const Polynomial& q) {
  Scalar m = 0.0;
  for (const auto& [alpha, c] : q.terms()) m = std::max(m, std::abs(c));
  return m;
}

std::vector<Polynomial> gradientPolynomials(const Polynomial& q) {
  std::vector<Polynomial> g;
  g.reserve(q.dim());
  for (int i = 0; i < q.dim(); ++i) g.push_back(q.derivative(i));
  return g;
}

Vector polyGradient(const Polynomial& q, const Vector& s) {
  Vector g(q.dim());
  for (int i = 0; i < q.dim(); ++i) g(i) = q.derivative(i).evaluate(s);
  return g;
}

Matrix polyHessian(const Polynomial& q, const Vector& s) {
  const int n = q.dim();
  Matrix h(n, n);
  for (int i = 0; i < n; ++i) {
    const Polynomial di = q.derivative(i);
    for (int j = i; j < n; ++j) {
      h(i, j) = di.derivative(j).evaluate(s);
      h(j, i) = h(i, j);
    }
  }
  return h;
}

std::string format(const Polynomial& q, const std::vector<std::string>& names) {
  if (q.isZero()) return "0";
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& [alpha, c] : q.terms()) {
    if (first)
      os << c;
    else
      os << (c < 0 ? " - " : " + ") << std::abs(c);
    first = false;
    for (int i = 0; i < q.dim(); ++i) {
      if (alpha[i] == 0) continue;
      os << '*' << (i < static_cast<int>(names.size()) ? names[i] : "s" + std::to_string(i));
      if (alpha[i] > 1) os << '^' << alpha[i];
    }
  }
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const Polynomial& q) { return os << format(q); }

}  // namespace sosarp

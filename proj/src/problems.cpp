#include "sosarp/problems.hpp"

#include <cmath>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace sosarp {

using nlohmann::json;

std::string kindName(ProblemKind kind) {
  return kind == ProblemKind::ExplicitPolynomial ? "ExplicitPolynomial" : "Builtin";
}

namespace {

struct BuiltinEntry {
  BuiltinInfo info;
  std::set<std::string> params;
};

const std::vector<BuiltinEntry>& registry() {
  static const std::vector<BuiltinEntry> r = {
      {{"separable_quartic", -1, 0,
        "sum_i a/2 (x_i - c)^2 + b/4 (x_i - c)^4; strongly convex for a > 0, b >= 0, minimum 0 at x = c"},
       {"a", "b", "c"}},
      {{"cubic_quartic", -1, 2,
        "x1^4/4 + x1^3/3 - x1^2/2 + x2^4/4; indefinite near x1 = 0, degenerate in x2, minimum about -1.0075"},
       {}},
      {{"rosenbrock", 3, 0,
        "sum_i a (x_{i+1} - x_i^2)^2 + (1 - x_i)^2; nonnegative, minimum 0 at the all-ones point"},
       {"a"}},
      {{"sum_exp", -1, 0,
        "sum_k exp(a_k.x) / K + mu/2 |x|^2 with a_k ~ N(0, I) from the seed; positive, strongly convex for mu > 0"},
       {"terms", "seed", "mu"}},
  };
  return r;
}

const BuiltinEntry& entry(const std::string& name) {
  for (const auto& e : registry())
    if (e.info.name == name) return e;
  throw ContractViolation("unknown builtin '" + name + "'");
}

Scalar param(const ProblemSpec& spec, const std::string& key, Scalar fallback) {
  auto it = spec.params.find(key);
  return it == spec.params.end() ? fallback : it->second;
}

// Nondecreasing index lists of length `order` over 0..n-1.
std::vector<MultiIndex> sortedIndices(int order, int n) {
  std::vector<MultiIndex> out;
  MultiIndex cur;
  auto rec = [&](auto&& self, int start) -> void {
    if (static_cast<int>(cur.size()) == order) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i < n; ++i) {
      cur.push_back(i);
      self(self, i);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

DerivativeBundle emptyBundle(const Vector& x, int p) {
  DerivativeBundle b;
  b.x = x;
  const int n = static_cast<int>(x.size());
  for (int j = 1; j <= p; ++j) b.tensors.emplace_back(j, n);
  return b;
}

// f = sum_i phi_i(x_i); d(i, t, j) is the j-th derivative of phi_i at t.
template <class D>
DerivativeBundle separable(const Vector& x, int p, D d) {
  DerivativeBundle b = emptyBundle(x, p);
  for (int i = 0; i < x.size(); ++i) {
    b.value += d(i, x(i), 0);
    for (int j = 1; j <= p; ++j) b.tensors[j - 1].set(MultiIndex(j, i), d(i, x(i), j));
  }
  return b;
}

DerivativeBundle separableQuarticDerivs(const ProblemSpec& spec, const Vector& x, int p) {
  const Scalar a = param(spec, "a", 1.0), bq = param(spec, "b", 1.0), c = param(spec, "c", 1.0);
  return separable(x, p, [&](int, Scalar t, int j) -> Scalar {
    const Scalar u = t - c;
    switch (j) {
      case 0: return 0.5 * a * u * u + 0.25 * bq * u * u * u * u;
      case 1: return a * u + bq * u * u * u;
      case 2: return a + 3.0 * bq * u * u;
      case 3: return 6.0 * bq * u;
      case 4: return 6.0 * bq;
      default: return 0.0;
    }
  });
}

DerivativeBundle cubicQuarticDerivs(const Vector& x, int p) {
  return separable(x, p, [](int i, Scalar t, int j) -> Scalar {
    const Scalar t2 = t * t;
    if (i == 0) {
      switch (j) {
        case 0: return 0.25 * t2 * t2 + t2 * t / 3.0 - 0.5 * t2;
        case 1: return t2 * t + t2 - t;
        case 2: return 3.0 * t2 + 2.0 * t - 1.0;
        case 3: return 6.0 * t + 2.0;
        case 4: return 6.0;
        default: return 0.0;
      }
    }
    switch (j) {
      case 0: return 0.25 * t2 * t2;
      case 1: return t2 * t;
      case 2: return 3.0 * t2;
      case 3: return 6.0 * t;
      case 4: return 6.0;
      default: return 0.0;
    }
  });
}

DerivativeBundle rosenbrockDerivs(const ProblemSpec& spec, const Vector& x, int p) {
  const Scalar a = param(spec, "a", 10.0);
  DerivativeBundle b = emptyBundle(x, p);
  for (int i = 0; i + 1 < x.size(); ++i) {
    const int k = i + 1;
    const Scalar xi = x(i), y = x(k);
    const Scalar u = y - xi * xi;
    const Scalar v = 1.0 - xi;
    b.value += a * u * u + v * v;
    if (p >= 1) {
      auto& t = b.tensors[0];
      t.add({i}, -4.0 * a * xi * u - 2.0 * v);
      t.add({k}, 2.0 * a * u);
    }
    if (p >= 2) {
      auto& t = b.tensors[1];
      t.add({i, i}, -4.0 * a * u + 8.0 * a * xi * xi + 2.0);
      t.add({i, k}, -4.0 * a * xi);
      t.add({k, k}, 2.0 * a);
    }
    if (p >= 3) {
      auto& t = b.tensors[2];
      t.add({i, i, i}, 24.0 * a * xi);
      t.add({i, i, k}, -4.0 * a);
    }
  }
  return b;
}

struct SumExpData {
  std::vector<Vector> a;
  Scalar c = 1.0;
  Scalar mu = 0.1;
};

SumExpData sumExpData(const ProblemSpec& spec) {
  const int terms = static_cast<int>(param(spec, "terms", 4.0));
  const auto seed = static_cast<std::uint64_t>(param(spec, "seed", 1.0));
  std::mt19937_64 rng(seed);
  std::normal_distribution<Scalar> normal(0.0, 1.0);
  SumExpData d;
  for (int k = 0; k < terms; ++k) d.a.push_back(Vector::NullaryExpr(spec.n, [&] { return normal(rng); }));
  d.c = 1.0 / terms;
  d.mu = param(spec, "mu", 0.1);
  return d;
}

DerivativeBundle sumExpDerivs(const ProblemSpec& spec, const Vector& x, int p) {
  const SumExpData d = sumExpData(spec);
  const int n = spec.n;
  DerivativeBundle b = emptyBundle(x, p);
  b.value = 0.5 * d.mu * x.squaredNorm();
  std::vector<Scalar> w;
  for (const auto& ak : d.a) {
    w.push_back(d.c * std::exp(ak.dot(x)));
    b.value += w.back();
  }
  for (int j = 1; j <= p; ++j) {
    for (const auto& idx : sortedIndices(j, n)) {
      Scalar v = 0.0;
      for (std::size_t k = 0; k < d.a.size(); ++k) {
        Scalar prod = w[k];
        for (int i : idx) prod *= d.a[k](i);
        v += prod;
      }
      if (j == 1) v += d.mu * x(idx[0]);
      if (j == 2 && idx[0] == idx[1]) v += d.mu;
      b.tensors[j - 1].set(idx, v);
    }
  }
  return b;
}

DerivativeBundle builtinDerivs(const ProblemSpec& spec, const Vector& x, int p) {
  const BuiltinInfo& info = builtinInfo(spec.builtin);
  if (info.max_order >= 0 && p > info.max_order)
    throw ContractViolation("builtin '" + spec.builtin + "' supports derivatives up to order " +
                            std::to_string(info.max_order) + ", requested " + std::to_string(p));
  if (spec.builtin == "separable_quartic") return separableQuarticDerivs(spec, x, p);
  if (spec.builtin == "cubic_quartic") return cubicQuarticDerivs(x, p);
  if (spec.builtin == "rosenbrock") return rosenbrockDerivs(spec, x, p);
  return sumExpDerivs(spec, x, p);
}

}  // namespace

const std::vector<BuiltinInfo>& registeredBuiltins() {
  static const std::vector<BuiltinInfo> infos = [] {
    std::vector<BuiltinInfo> v;
    for (const auto& e : registry()) v.push_back(e.info);
    return v;
  }();
  return infos;
}

const BuiltinInfo& builtinInfo(const std::string& name) { return entry(name).info; }

bool isStronglyConvex(const ProblemSpec& spec) {
  if (spec.kind != ProblemKind::Builtin) return false;
  if (spec.builtin == "separable_quartic") return param(spec, "a", 1.0) > 0.0 && param(spec, "b", 1.0) >= 0.0;
  if (spec.builtin == "sum_exp") return param(spec, "mu", 0.1) > 0.0;
  return false;
}

void ProblemSpec::validate() const {
  require(n >= 1, "problem '" + name + "': n must be positive");
  if (x0) require(x0->size() == n, "problem '" + name + "': x0 has wrong length");
  if (kind == ProblemKind::ExplicitPolynomial) {
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const auto& e = terms[t].first;
      const std::string where = "problem '" + name + "' term " + std::to_string(t);
      require(static_cast<int>(e.size()) == n,
              where + ": exponent vector has length " + std::to_string(e.size()) + ", expected " +
                  std::to_string(n));
      int deg = 0;
      for (int k : e) {
        require(k >= 0, where + ": negative exponent");
        deg += k;
      }
      require(deg <= kMaxPolynomialDegree, where + ": degree exceeds " + std::to_string(kMaxPolynomialDegree));
      require(std::isfinite(terms[t].second), where + ": coefficient is not finite");
    }
  } else {
    const BuiltinEntry& e = entry(builtin);
    require(e.info.fixed_n == 0 || e.info.fixed_n == n,
            "builtin '" + builtin + "' requires n = " + std::to_string(e.info.fixed_n));
    for (const auto& [k, v] : params)
      require(e.params.count(k) > 0, "builtin '" + builtin + "' has no parameter '" + k + "'");
    if (builtin == "sum_exp") require(param(*this, "terms", 4.0) >= 1.0, "sum_exp: terms must be >= 1");
  }
}

Polynomial ProblemSpec::polynomial() const {
  require(kind == ProblemKind::ExplicitPolynomial, "polynomial(): not an explicit polynomial");
  Polynomial q(n);
  for (const auto& [e, c] : terms) q.addTerm(e, c);
  return q;
}

bool operator==(const ProblemSpec& a, const ProblemSpec& b) {
  const bool x0_equal = a.x0.has_value() == b.x0.has_value() && (!a.x0 || *a.x0 == *b.x0);
  return a.name == b.name && a.n == b.n && a.kind == b.kind && a.terms == b.terms &&
         a.builtin == b.builtin && a.params == b.params && x0_equal && a.description == b.description;
}

ProblemSpec separableQuartic(int n) {
  ProblemSpec s;
  s.name = "separable_quartic";
  s.n = n;
  s.kind = ProblemKind::Builtin;
  s.builtin = "separable_quartic";
  Vector x0(n);
  for (int i = 0; i < n; ++i) x0(i) = (i % 2 == 0) ? -2.0 : 3.0;
  s.x0 = x0;
  return s;
}

ProblemSpec cubicQuartic() {
  ProblemSpec s;
  s.name = "cubic_quartic";
  s.n = 2;
  s.kind = ProblemKind::Builtin;
  s.builtin = "cubic_quartic";
  s.x0 = Vector{{0.1, 1.0}};
  return s;
}

ProblemSpec rosenbrock(int n, Scalar a) {
  ProblemSpec s;
  s.name = "rosenbrock";
  s.n = n;
  s.kind = ProblemKind::Builtin;
  s.builtin = "rosenbrock";
  s.params["a"] = a;
  s.x0 = Vector::Constant(n, -1.0);
  return s;
}

ProblemSpec sumExp(int n, int terms, int seed) {
  ProblemSpec s;
  s.name = "sum_exp";
  s.n = n;
  s.kind = ProblemKind::Builtin;
  s.builtin = "sum_exp";
  s.params["terms"] = terms;
  s.params["seed"] = seed;
  s.x0 = Vector::Ones(n);
  return s;
}

struct ProblemObjective::Cache {
  std::mutex mutex;
  Polynomial poly{1};
  /// derivs[j][idx] is the j-th order partial derivative for sorted idx.
  std::vector<std::map<MultiIndex, Polynomial>> derivs;
};

ProblemObjective::ProblemObjective(ProblemSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  if (spec_.kind == ProblemKind::ExplicitPolynomial) {
    cache_ = std::make_shared<Cache>();
    cache_->poly = spec_.polynomial();
    cache_->derivs.push_back({{MultiIndex{}, cache_->poly}});
  }
}

Scalar ProblemObjective::value(const Vector& x) const {
  require(x.size() == spec_.n, "ProblemObjective: point has wrong length");
  if (cache_) return cache_->poly.evaluate(x);
  return builtinDerivs(spec_, x, 0).value;
}

DerivativeBundle ProblemObjective::derivatives(const Vector& x, int p) const {
  require(x.size() == spec_.n, "ProblemObjective: point has wrong length");
  require(p >= 0, "ProblemObjective: negative order");
  if (!cache_) return builtinDerivs(spec_, x, p);
  std::lock_guard<std::mutex> lock(cache_->mutex);
  auto& d = cache_->derivs;
  while (static_cast<int>(d.size()) <= p) {
    const int j = static_cast<int>(d.size());
    std::map<MultiIndex, Polynomial> next;
    for (const auto& idx : sortedIndices(j, spec_.n)) {
      MultiIndex rest(idx.begin(), idx.end() - 1);
      next.emplace(idx, d[j - 1].at(rest).derivative(idx.back()));
    }
    d.push_back(std::move(next));
  }
  DerivativeBundle b = emptyBundle(x, p);
  b.value = cache_->poly.evaluate(x);
  for (int j = 1; j <= p; ++j)
    for (const auto& [idx, q] : d[j])
      if (!q.isZero()) b.tensors[j - 1].set(idx, q.evaluate(x));
  return b;
}

Scalar evaluate(const ProblemSpec& spec, const Vector& x) { return ProblemObjective(spec).value(x); }

DerivativeBundle derivatives(const ProblemSpec& spec, const Vector& x, int p) {
  return ProblemObjective(spec).derivatives(x, p);
}

// ---------------------------------------------------------------- file format

ProblemSpec parseProblem(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ": " + e.what());
  }
  auto fail = [&](const std::string& field, const std::string& what) -> ParseError {
    return ParseError(source + ": field '" + field + "': " + what);
  };
  if (!j.is_object()) throw ParseError(source + ": top level must be an object");
  static const std::set<std::string> known = {"name", "n", "kind", "terms", "builtin", "params", "x0", "description"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw fail(it.key(), "unknown field");

  ProblemSpec s;
  if (!j.contains("name") || !j["name"].is_string()) throw fail("name", "missing or not a string");
  s.name = j["name"];
  if (!j.contains("n") || !j["n"].is_number_integer() || j["n"].get<int>() < 1)
    throw fail("n", "missing or not a positive integer");
  s.n = j["n"];
  if (!j.contains("kind") || !j["kind"].is_string()) throw fail("kind", "missing or not a string");
  const std::string kind = j["kind"];
  if (kind == "ExplicitPolynomial") {
    s.kind = ProblemKind::ExplicitPolynomial;
    if (!j.contains("terms") || !j["terms"].is_array()) throw fail("terms", "missing or not a list");
    const json& terms = j["terms"];
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const std::string field = "terms[" + std::to_string(t) + "]";
      const json& term = terms[t];
      if (!term.is_array() || term.size() != 2 || !term[0].is_array() || !term[1].is_number())
        throw fail(field, "expected [[exponents...], coefficient]");
      Exponent e;
      for (const auto& v : term[0]) {
        if (!v.is_number_integer() || v.get<int>() < 0)
          throw fail(field, "exponents must be nonnegative integers");
        e.push_back(v.get<int>());
      }
      if (static_cast<int>(e.size()) != s.n)
        throw fail(field, "exponent vector has length " + std::to_string(e.size()) + ", expected n = " +
                              std::to_string(s.n));
      s.terms.emplace_back(std::move(e), term[1].get<Scalar>());
    }
    if (j.contains("builtin") || j.contains("params"))
      throw fail("builtin", "not allowed for ExplicitPolynomial");
  } else if (kind == "Builtin") {
    s.kind = ProblemKind::Builtin;
    if (!j.contains("builtin") || !j["builtin"].is_string()) throw fail("builtin", "missing or not a string");
    s.builtin = j["builtin"];
    bool found = false;
    for (const auto& b : registeredBuiltins()) found = found || b.name == s.builtin;
    if (!found) throw fail("builtin", "unknown builtin '" + s.builtin + "'");
    if (j.contains("params")) {
      if (!j["params"].is_object()) throw fail("params", "must be an object");
      for (auto it = j["params"].begin(); it != j["params"].end(); ++it) {
        if (!it.value().is_number()) throw fail("params." + it.key(), "must be a number");
        s.params[it.key()] = it.value().get<Scalar>();
      }
    }
    if (j.contains("terms")) throw fail("terms", "not allowed for Builtin");
  } else {
    throw fail("kind", "must be ExplicitPolynomial or Builtin, got '" + kind + "'");
  }
  if (j.contains("x0")) {
    const json& x0 = j["x0"];
    if (!x0.is_array() || static_cast<int>(x0.size()) != s.n)
      throw fail("x0", "must be a list of n = " + std::to_string(s.n) + " numbers");
    Vector v(s.n);
    for (int i = 0; i < s.n; ++i) {
      if (!x0[i].is_number()) throw fail("x0", "must be a list of numbers");
      v(i) = x0[i].get<Scalar>();
    }
    s.x0 = v;
  }
  if (j.contains("description")) {
    if (!j["description"].is_string()) throw fail("description", "must be a string");
    s.description = j["description"];
  }
  try {
    s.validate();
  } catch (const ContractViolation& e) {
    throw ParseError(source + ": " + e.what());
  }
  return s;
}

std::string serializeProblem(const ProblemSpec& spec) {
  spec.validate();
  std::ostringstream os;
  os << "{\n";
  os << "  \"name\": " << json(spec.name).dump() << ",\n";
  os << "  \"n\": " << spec.n << ",\n";
  os << "  \"kind\": " << json(kindName(spec.kind)).dump();
  if (!spec.description.empty()) os << ",\n  \"description\": " << json(spec.description).dump();
  if (spec.kind == ProblemKind::ExplicitPolynomial) {
    os << ",\n  \"terms\": [";
    for (std::size_t t = 0; t < spec.terms.size(); ++t) {
      os << (t ? ",\n    " : "\n    ") << json::array({json(spec.terms[t].first), json(spec.terms[t].second)}).dump();
    }
    os << (spec.terms.empty() ? "]" : "\n  ]");
  } else {
    os << ",\n  \"builtin\": " << json(spec.builtin).dump();
    if (!spec.params.empty()) os << ",\n  \"params\": " << json(spec.params).dump();
  }
  if (spec.x0) {
    std::vector<Scalar> v(spec.x0->data(), spec.x0->data() + spec.n);
    os << ",\n  \"x0\": " << json(v).dump();
  }
  os << "\n}\n";
  return os.str();
}

namespace {

std::string readFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ProblemSpec loadProblem(const std::string& path) { return parseProblem(readFile(path), path); }

void saveProblem(const ProblemSpec& spec, const std::string& path) {
  const std::string text = serializeProblem(spec);
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot write file");
  out << text;
}

Vector parsePoint(const std::string& text, int n) {
  std::string clean;
  bool comment = false;
  for (char ch : text) {
    if (ch == '#') comment = true;
    if (ch == '\n') comment = false;
    if (comment) continue;
    clean += (ch == ',' || ch == '[' || ch == ']') ? ' ' : ch;
  }
  std::istringstream in(clean);
  std::vector<Scalar> v;
  std::string tok;
  while (in >> tok) {
    std::size_t used = 0;
    Scalar x = 0.0;
    try {
      x = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw ParseError("point: '" + tok + "' is not a number");
    v.push_back(x);
  }
  if (static_cast<int>(v.size()) != n)
    throw ParseError("point: expected " + std::to_string(n) + " values, got " + std::to_string(v.size()));
  return Eigen::Map<Vector>(v.data(), n);
}

Vector loadPoint(const std::string& path, int n) {
  try {
    return parsePoint(readFile(path), n);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

// ------------------------------------------------------- derivative checking

DerivativeReport checkDerivatives(const ProblemSpec& spec, const Vector& x, int p) {
  const ProblemObjective obj(spec);
  require(x.size() == spec.n, "checkDerivatives: point has wrong length");
  require(p >= 1, "checkDerivatives: p must be positive");
  const DerivativeBundle exact = obj.derivatives(x, p);
  DerivativeReport rep;
  rep.pass = true;
  for (int j = 1; j <= p; ++j) {
    const Scalar h = j <= 2 ? 1e-5 : (j == 3 ? 1e-4 : 1e-3);
    OrderCheck oc;
    oc.order = j;
    oc.threshold = j <= 3 ? 1e-5 : 1e-3;
    std::vector<DerivativeBundle> plus, minus;
    for (int i = 0; i < spec.n; ++i) {
      Vector e = Vector::Zero(spec.n);
      e(i) = h;
      plus.push_back(obj.derivatives(x + e, j - 1));
      minus.push_back(obj.derivatives(x - e, j - 1));
    }
    for (const auto& idx : sortedIndices(j, spec.n)) {
      const int i = idx.back();
      const MultiIndex rest(idx.begin(), idx.end() - 1);
      const Scalar hi = j == 1 ? plus[i].value : plus[i].tensor(j - 1)(rest);
      const Scalar lo = j == 1 ? minus[i].value : minus[i].tensor(j - 1)(rest);
      const Scalar fd = (hi - lo) / (2.0 * h);
      const Scalar ex = exact.tensor(j)(idx);
      oc.max_rel_error = std::max(oc.max_rel_error, std::abs(fd - ex) / (1.0 + std::abs(ex)));
    }
    oc.pass = oc.max_rel_error <= oc.threshold;
    rep.pass = rep.pass && oc.pass;
    rep.orders.push_back(oc);
  }
  return rep;
}

}  // namespace sosarp

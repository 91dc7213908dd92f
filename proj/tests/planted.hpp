#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "sosarp/sdp.hpp"

namespace sosarp::testing {


inline Matrix randomSymmetric(int n, std::mt19937_64& rng) {
  std::normal_distribution<Scalar> normal(0.0, 1.0);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = normal(rng);
  return m;
}

inline Matrix randomOrthogonal(int n, std::mt19937_64& rng) {
  std::normal_distribution<Scalar> normal(0.0, 1.0);
  Matrix g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ();
}

struct Planted {
  SdpProblem problem;
  Scalar objective;
};

// X* and Z* share eigenvectors with complementary supports, so X* Z* = 0 and
// both are optimal for the derived b and C.
// Random primal-dual pair with a unique, nondegenerate, strictly complementary
// optimum: the constraint count lies between the face dimension of X* and the
// dimension of the tangent space of the rank-r matrices at X*.
inline Planted plantedProblem(std::mt19937_64& rng, int max_block, int max_cons) {
  std::uniform_int_distribution<int> nblocks(1, 3);
  std::uniform_int_distribution<int> bsize(1, max_block);
  std::uniform_real_distribution<Scalar> pos(0.5, 2.0);
  Planted out;
  auto& p = out.problem;
  const int nb = nblocks(rng);
  std::vector<int> ranks;
  int face = 0, tangent = 0;
  for (int k = 0; k < nb; ++k) {
    const int n = bsize(rng);
    const int r = std::uniform_int_distribution<int>(k == 0 ? 1 : 0, n)(rng);
    p.blocks.push_back(n);
    ranks.push_back(r);
    face += r * (r + 1) / 2;
    tangent += r * (r + 1) / 2 + r * (n - r);
  }
  BlockMatrix xs, zs;
  for (std::size_t k = 0; k < p.blocks.size(); ++k) {
    const int n = p.blocks[k];
    const Matrix q = randomOrthogonal(n, rng);
    Vector dx = Vector::Zero(n), dz = Vector::Zero(n);
    for (int i = 0; i < n; ++i) (i < ranks[k] ? dx(i) : dz(i)) = pos(rng);
    xs.push_back(q * dx.asDiagonal() * q.transpose());
    zs.push_back(q * dz.asDiagonal() * q.transpose());
  }
  const int hi = std::max(1, std::min(max_cons, tangent));
  const int lo = std::min(face, hi);
  const int m = std::uniform_int_distribution<int>(lo, hi)(rng);
  std::normal_distribution<Scalar> normal(0.0, 1.0);
  p.c = zs;
  Scalar obj = 0.0;
  for (int k = 0; k < m; ++k) {
    SdpConstraint con;
    for (int n : p.blocks) con.a.push_back(randomSymmetric(n, rng));
    con.b = inner(con.a, xs);
    const Scalar y = normal(rng);
    for (std::size_t b = 0; b < p.blocks.size(); ++b) p.c[b] += y * con.a[b];
    obj += y * con.b;
    p.constraints.push_back(std::move(con));
  }
  out.objective = obj;
  return out;
}

}  // namespace sosarp::testing

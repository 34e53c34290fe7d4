#pragma once

#include "mckay/types.hpp"

#include <array>

namespace mckay {

struct CyclicGroup {
  int n = 2;
  cplx omega{-1.0, 0.0};

  // ω^k, evaluated from the angle so that large k does not accumulate error.
  cplx root(long k) const {
    long r = k % n;
    if (r < 0) r += n;
    if (r == 0) return {1.0, 0.0};
    if (2 * r == n) return {-1.0, 0.0};
    return std::polar(1.0, 2.0 * pi * static_cast<double>(r) / n);
  }
};

inline CyclicGroup make_group(int n) {
  if (n < 2) throw invalid_argument("group order must be at least 2, got " + std::to_string(n));
  CyclicGroup g;
  g.n = n;
  g.omega = g.root(1);
  return g;
}

struct GroupElement {
  int m = 0;
  cplx u{1.0, 0.0};
  cplx v{0.0, 0.0};

  /// The SU(2) form diag(u, conj(u)).
  Eigen::Matrix2cd su2() const {
    Eigen::Matrix2cd g;
    g << u, -std::conj(v), v, std::conj(u);
    return g;
  }
};

inline void check_index(const CyclicGroup& g, int k, const char* what) {
  if (k < 0 || k >= g.n)
    throw invalid_argument(std::string(what) + " index " + std::to_string(k) + " out of range for n=" +
                           std::to_string(g.n));
}

inline GroupElement element(const CyclicGroup& g, int m) {
  check_index(g, m, "element");
  return {m, g.root(m), {0.0, 0.0}};
}

inline CMatrix regular_rep(const CyclicGroup& g, int m) {
  check_index(g, m, "element");
  CMatrix r = CMatrix::Zero(g.n, g.n);
  for (int j = 0; j < g.n; ++j) r(j, j) = g.root(static_cast<long>(j) * m);
  return r;
}

inline CVector irrep_vector(const CyclicGroup& g, int j) {
  check_index(g, j, "irrep");
  CVector v(g.n);
  for (int k = 0; k < g.n; ++k) v(k) = g.root(static_cast<long>(j) * k);
  return v;
}

// Unnormalized: trace n, entries ω^{j(a-b)}.
inline CMatrix character_projector(const CyclicGroup& g, int j) {
  CVector v = irrep_vector(g, j);
  return v * v.adjoint();
}

} // namespace mckay

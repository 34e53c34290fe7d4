#pragma once

#include "mckay/group_rep.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace mckay {

// Edge slots use 1-based labels: alpha(i) holds α_{i+1}, the map from
// vertex i to vertex i+1 (mod n); beta(i) holds β_{i+1}, the reverse map.
// α_j sits at matrix entry (j mod n, j-1) and β_j at (j-1, j mod n).
struct QuiverPoint {
  int n = 0;
  CVector alpha;
  CVector beta;

  QuiverPoint() = default;
  explicit QuiverPoint(int n_) : n(n_), alpha(CVector::Zero(n_)), beta(CVector::Zero(n_)) {}
  QuiverPoint(CVector a, CVector b) : n(static_cast<int>(a.size())), alpha(std::move(a)), beta(std::move(b)) {
    if (alpha.size() != beta.size()) throw invalid_argument("alpha and beta must have equal length");
  }
};

inline double squared_norm(const QuiverPoint& q) { return q.alpha.squaredNorm() + q.beta.squaredNorm(); }

inline double distance(const QuiverPoint& p, const QuiverPoint& q) {
  return std::sqrt((p.alpha - q.alpha).squaredNorm() + (p.beta - q.beta).squaredNorm());
}

inline std::pair<CMatrix, CMatrix> embed_matrices(const QuiverPoint& q) {
  const int n = q.n;
  CMatrix A = CMatrix::Zero(n, n), B = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    A(wrap(i + 1, n), i) += q.alpha(i);
    B(i, wrap(i + 1, n)) += q.beta(i);
  }
  return {A, B};
}

// Signed slot quantity s_i = |α_{i+1}|² - |β_{i+1}|².
inline RVector slot_balance(const QuiverPoint& q) {
  return (q.alpha.cwiseAbs2() - q.beta.cwiseAbs2()).eval();
}

// Component j: |α_{j+1}|² - |β_{j+1}|² + |β_j|² - |α_j|².
inline RVector moment_map_real(const QuiverPoint& q) {
  RVector s = slot_balance(q);
  RVector m(q.n);
  for (int j = 0; j < q.n; ++j) m(j) = s(j) - s(wrap(j - 1, q.n));
  return m;
}

// Component j: α_jβ_j - α_{j+1}β_{j+1}, the diagonal of [A,B].
inline CVector moment_map_complex(const QuiverPoint& q) {
  CVector p = q.alpha.cwiseProduct(q.beta);
  CVector m(q.n);
  for (int j = 0; j < q.n; ++j) m(j) = p(wrap(j - 1, q.n)) - p(j);
  return m;
}

inline double flatness_residual(const QuiverPoint& q) {
  auto [A, B] = embed_matrices(q);
  return (A * B - B * A).norm();
}

// Φ with k₀ = 1.
inline double morse_value(const QuiverPoint& q) { return squared_norm(q); }

inline QuiverPoint gauge_act(const QuiverPoint& q, const CVector& f) {
  if (f.size() != q.n) throw invalid_argument("gauge vector has wrong length");
  for (int j = 0; j < q.n; ++j)
    if (f(j) == cplx(0.0)) throw invalid_argument("singular gauge: zero diagonal entry at vertex " + std::to_string(j));
  QuiverPoint r = q;
  for (int i = 0; i < q.n; ++i) {
    const cplx head = f(wrap(i + 1, q.n)), tail = f(i);
    r.alpha(i) = head / tail * q.alpha(i);
    r.beta(i) = tail / head * q.beta(i);
  }
  return r;
}

inline QuiverPoint circle_act(const QuiverPoint& q, double phi) {
  const cplx e = std::polar(1.0, phi);
  return {(e * q.alpha).eval(), (e * q.beta).eval()};
}

// J(α,β) = (-β*, α*); on edge coordinates the adjoint keeps slot labels.
inline QuiverPoint j_action(const QuiverPoint& q) {
  return {(-q.beta.conjugate()).eval(), q.alpha.conjugate().eval()};
}

struct FullMomentMaps {
  CMatrix mu1, mu2, mu3;
};

inline FullMomentMaps full_moment_maps(const QuiverPoint& q) {
  auto [A, B] = embed_matrices(q);
  const cplx I(0.0, 1.0);
  CMatrix Ad = A.adjoint(), Bd = B.adjoint();
  CMatrix AB = A * B - B * A;
  CMatrix AdBd = Ad * Bd - Bd * Ad;
  return {(0.5 * I) * ((A * Ad - Ad * A) + (B * Bd - Bd * B)), 0.5 * (AB + AdBd), (0.5 * I) * (-AB + AdBd)};
}

struct ZetaLevel {
  RVector values;
  std::vector<std::string> warnings;

  int n() const { return static_cast<int>(values.size()); }
};

// Sum over the proper cyclic interval of vertices [start, start+len).
inline double interval_sum(const RVector& z, int start, int len) {
  double s = 0.0;
  for (int k = 0; k < len; ++k) s += z(wrap(start + k, static_cast<int>(z.size())));
  return s;
}

inline double zeta_scale(const RVector& z) { return z.size() ? z.cwiseAbs().maxCoeff() : 0.0; }

// First vanishing proper cyclic partial sum, if any.
inline std::optional<std::pair<int, int>> vanishing_partial_sum(const RVector& z, double rel_tol = 1e-12) {
  const int n = static_cast<int>(z.size());
  const double tol = rel_tol * std::max(1.0, zeta_scale(z));
  for (int len = 1; len < n; ++len)
    for (int start = 0; start < n; ++start)
      if (std::abs(interval_sum(z, start, len)) <= tol) return std::make_pair(start, len);
  return std::nullopt;
}

inline ZetaLevel make_zeta(const RVector& values) {
  if (values.size() < 2) throw invalid_argument("zeta needs at least two entries");
  for (double v : values)
    if (!std::isfinite(v)) throw invalid_argument("zeta entries must be finite");
  const double tol = 1e-12 * std::max(1.0, zeta_scale(values));
  if (std::abs(values.sum()) > tol) throw invalid_argument("zeta entries must sum to zero");
  ZetaLevel z{values, {}};
  if (auto bad = vanishing_partial_sum(values))
    z.warnings.push_back("non-generic zeta: partial sum over vertices " + std::to_string(bad->first) + ".." +
                         std::to_string(bad->first + bad->second - 1) + " (cyclic) vanishes");
  return z;
}

// n=2: (a², -a²); n=3: (a², b², -a²-b²).
inline ZetaLevel zeta_from_ab(int n, double a, std::optional<double> b = std::nullopt) {
  if (n == 2) {
    RVector z(2);
    z << a * a, -a * a;
    return make_zeta(z);
  }
  if (n == 3) {
    if (!b) throw invalid_argument("n=3 needs both a and b");
    RVector z(3);
    z << a * a, (*b) * (*b), -a * a - (*b) * (*b);
    ZetaLevel lvl = make_zeta(z);
    if (std::abs(std::abs(a) - std::abs(*b)) <= 1e-12 * std::max(1.0, std::abs(a)))
      lvl.warnings.push_back("|a| = |b|: the Z3 example requires |a| != |b|");
    return lvl;
  }
  throw invalid_argument("a/b parametrization is defined only for n = 2, 3; pass an explicit vector");
}

// Default generic level for any n: 1, 2, ..., n-1 followed by the balancing entry.
inline ZetaLevel default_zeta(int n) {
  if (n < 2) throw invalid_argument("n must be at least 2");
  RVector z(n);
  for (int j = 0; j < n - 1; ++j) z(j) = j + 1.0;
  z(n - 1) = -z.head(n - 1).sum();
  return make_zeta(z);
}

} // namespace mckay

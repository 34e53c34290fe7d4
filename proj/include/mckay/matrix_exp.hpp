#pragma once

#include "mckay/types.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

namespace mckay {

template <class Real>
using CMat = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <class Real>
double to_double(const Real& x) {
  return static_cast<double>(x);
}

template <class Real>
Real one_norm(const CMat<Real>& m) {
  using std::abs;
  Real best(0);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    Real s(0);
    for (Eigen::Index r = 0; r < m.rows(); ++r) s += abs(m(r, c));
    if (s > best) best = s;
  }
  return best;
}

template <class Real>
std::complex<Real> unit_root(int n, long k) {
  using std::acos;
  using std::cos;
  using std::sin;
  long r = k % n;
  if (r < 0) r += n;
  if (r == 0) return {Real(1), Real(0)};
  if (2 * r == n) return {Real(-1), Real(0)};
  const Real theta = Real(2) * acos(Real(-1)) * Real(r) / Real(n);
  return {cos(theta), sin(theta)};
}

/// A matrix stored as exp(log_scale) * m, so that exponentials of large
/// arguments stay representable.
template <class Real>
struct ScaledMatrix {
  CMat<Real> m;
  Real log_scale = Real(0);

  CMat<Real> value() const {
    using std::exp;
    if (to_double(log_scale) > 700.0) throw numeric_failure("scaled matrix exceeds double range");
    return m * std::complex<Real>(exp(log_scale), Real(0));
  }
};

// Scaling and squaring around a Taylor series summed to convergence.
template <class Real>
CMat<Real> dense_matrix_exp(const CMat<Real>& M) {
  using C = std::complex<Real>;
  if (M.rows() != M.cols()) throw invalid_argument("matrix exponential needs a square matrix");
  const Eigen::Index n = M.rows();
  const Real nrm = one_norm<Real>(M);
  if (!std::isfinite(to_double(nrm))) throw numeric_failure("non-finite matrix in exponential");
  if (to_double(nrm) > 700.0) throw numeric_failure("matrix exponential argument too large (norm > 700); renormalize first");
  int squarings = 0;
  if (to_double(nrm) > 0.5) squarings = static_cast<int>(std::ceil(std::log2(to_double(nrm) / 0.5)));
  const Real scale = Real(std::ldexp(1.0, -squarings));
  CMat<Real> X = M * C(scale, Real(0));
  CMat<Real> sum = CMat<Real>::Identity(n, n);
  CMat<Real> term = CMat<Real>::Identity(n, n);
  const Real eps = std::numeric_limits<Real>::epsilon();
  for (int k = 1; k < 2000; ++k) {
    term = (term * X) * C(Real(1) / Real(k), Real(0));
    sum += term;
    if (one_norm<Real>(term) <= eps * Real(0.01)) break;
  }
  for (int i = 0; i < squarings; ++i) sum = (sum * sum).eval();
  return sum;
}

enum class ShiftDirection { lower, upper };

template <class Real>
struct ShiftForm {
  ShiftDirection dir = ShiftDirection::lower;
  std::vector<std::complex<Real>> w;  // w[i] = M(i+1, i) or M(i, i+1)
};

// Recognize a single-direction weighted cyclic shift; returns false otherwise.
template <class Real>
bool shift_form(const CMat<Real>& M, ShiftForm<Real>& out) {
  using std::abs;
  const int n = static_cast<int>(M.rows());
  if (M.cols() != n || n < 2) return false;
  for (ShiftDirection d : {ShiftDirection::lower, ShiftDirection::upper}) {
    bool ok = true;
    for (int r = 0; r < n && ok; ++r)
      for (int c = 0; c < n && ok; ++c) {
        const bool on = d == ShiftDirection::lower ? r == wrap(c + 1, n) : c == wrap(r + 1, n);
        if (!on && M(r, c) != std::complex<Real>(Real(0), Real(0))) ok = false;
      }
    if (ok) {
      out.dir = d;
      out.w.resize(n);
      for (int i = 0; i < n; ++i) out.w[i] = d == ShiftDirection::lower ? M(wrap(i + 1, n), i) : M(i, wrap(i + 1, n));
      return true;
    }
  }
  return false;
}

// exp(M) for M^n = s·I, returned in scaled form. For |η| <= 1 the coefficients
// g_k(η)/η^k are summed as the series Σ_l s^l/(ln+k)!; otherwise the root-of-unity
// formula is used with the dominant exponential factored out.
// root_branch selects η = ω^branch · principal root; the result does not depend on it.
template <class Real>
ScaledMatrix<Real> cyclic_matrix_exp_scaled(const CMat<Real>& M, int root_branch = 0) {
  using C = std::complex<Real>;
  using std::abs;
  using std::exp;
  using std::log;
  ShiftForm<Real> sf;
  if (!shift_form<Real>(M, sf)) throw invalid_argument("cyclic_matrix_exp: matrix is not a single-direction weighted cyclic shift");
  const int n = static_cast<int>(M.rows());
  C s(Real(1), Real(0));
  bool nilpotent = false;
  for (const C& w : sf.w) {
    if (w == C(Real(0), Real(0))) nilpotent = true;
    s *= w;
  }
  std::vector<C> coef(n);  // coefficient of M^k
  Real log_scale(0);
  const Real abs_s = abs(s);
  if (nilpotent || abs_s <= Real(1)) {
    // Series in s; for nilpotent M this truncates to Σ_{k<n} M^k/k!.
    const Real eps = std::numeric_limits<Real>::epsilon();
    std::vector<Real> inv_fact(1, Real(1));
    for (int k = 0; k < n; ++k) {
      C acc(Real(0), Real(0));
      C spow(Real(1), Real(0));
      for (int l = 0; l < 400; ++l) {
        const int idx = l * n + k;
        while (static_cast<int>(inv_fact.size()) <= idx)
          inv_fact.push_back(inv_fact.back() / Real(static_cast<int>(inv_fact.size())));
        const C t = spow * C(inv_fact[idx], Real(0));
        acc += t;
        if (nilpotent || abs(t) <= eps * Real(0.01) * (abs(acc) + eps)) break;
        spow *= s;
      }
      coef[k] = acc;
    }
  } else {
    const C eta = exp(log(s) / Real(n)) * unit_root<Real>(n, root_branch);
    std::vector<C> roots(n);
    Real shift = Real(-1) * std::numeric_limits<Real>::max();
    for (int m = 0; m < n; ++m) {
      roots[m] = unit_root<Real>(n, m);
      const Real re = (roots[m] * eta).real();
      if (re > shift) shift = re;
    }
    log_scale = shift;
    std::vector<C> ex(n);
    for (int m = 0; m < n; ++m) ex[m] = exp(roots[m] * eta - C(shift, Real(0)));
    C eta_pow(Real(1), Real(0));
    for (int k = 0; k < n; ++k) {
      C g(Real(0), Real(0));
      for (int m = 0; m < n; ++m) g += unit_root<Real>(n, -static_cast<long>(m) * k) * ex[m];
      coef[k] = g / (C(Real(n), Real(0)) * eta_pow);
      eta_pow *= eta;
    }
  }
  CMat<Real> out = CMat<Real>::Identity(n, n) * coef[0];
  CMat<Real> Mk = CMat<Real>::Identity(n, n);
  for (int k = 1; k < n; ++k) {
    Mk = (Mk * M).eval();
    out += Mk * coef[k];
  }
  return {out, log_scale};
}

template <class Real>
CMat<Real> cyclic_matrix_exp(const CMat<Real>& M) {
  return cyclic_matrix_exp_scaled<Real>(M).value();
}

inline CMatrix dense_matrix_exp(const CMatrix& M) { return dense_matrix_exp<double>(M); }
inline CMatrix cyclic_matrix_exp(const CMatrix& M) { return cyclic_matrix_exp<double>(M); }

} // namespace mckay

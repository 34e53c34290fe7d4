#pragma once

#include "mckay/matrix_exp.hpp"
#include "mckay/quiver.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace mckay {

// Extended precision used where double loses the spectrum (large ‖E‖).
using hp_real = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<100>, boost::multiprecision::et_off>;

struct BasePoint {
  cplx v1{1.0, 0.0};
  cplx v2{0.0, 0.0};
};

inline BasePoint make_base(cplx v1, cplx v2) {
  const double nrm = std::norm(v1) + std::norm(v2);
  if (std::abs(nrm - 1.0) > 1e-12) throw invalid_argument("base point must lie on the unit sphere (|v1|^2 + |v2|^2 = 1)");
  return {v1, v2};
}

inline BasePoint normalized_base(cplx v1, cplx v2) {
  const double r = std::sqrt(std::norm(v1) + std::norm(v2));
  if (!(r > 0)) throw invalid_argument("base point cannot be zero");
  return {v1 / r, v2 / r};
}

using C2 = Eigen::Vector2cd;

inline C2 act(const GroupElement& g, const BasePoint& b) { return g.su2() * C2(b.v1, b.v2); }

// γ̃(t) = ((1-t+tu)v₁ - t·v̄·v₂, t·v·v₁ + (1-t+tū)v₂), projected to S³.
inline std::vector<C2> group_loop(const BasePoint& base, const GroupElement& g, int samples) {
  if (samples < 1) throw invalid_argument("loop needs at least one segment");
  std::vector<C2> path;
  path.reserve(samples + 1);
  for (int k = 0; k <= samples; ++k) {
    const double t = static_cast<double>(k) / samples;
    const C2 chord((1.0 - t + t * g.u) * base.v1 - t * std::conj(g.v) * base.v2,
                   t * g.v * base.v1 + (1.0 - t + t * std::conj(g.u)) * base.v2);
    const double r = chord.norm();
    if (r < 1e-9) throw degenerate_input("degenerate chord: the loop passes through the origin at t=" + std::to_string(t));
    path.push_back(chord / r);
  }
  return path;
}

// Loop used by the transport oracle; chords through the origin are replaced by two
// chords via the half rotation diag(e^{iθ/2}, e^{-iθ/2})·base.
inline std::vector<C2> transport_path(const BasePoint& base, const GroupElement& g, int samples) {
  try {
    return group_loop(base, g, samples);
  } catch (const degenerate_input&) {
    const double theta = std::arg(g.u);
    GroupElement half{g.m, std::polar(1.0, theta / 2.0), {0.0, 0.0}};
    const C2 mid = act(half, base);
    BasePoint bmid{mid(0), mid(1)};
    GroupElement rest = half;
    auto first = group_loop(base, half, samples / 2);
    auto second = group_loop(bmid, rest, samples - samples / 2);
    first.insert(first.end(), second.begin() + 1, second.end());
    return first;
  }
}

// Coefficients (x, y) of E = xA + yB.
inline std::pair<cplx, cplx> holonomy_coefficients(const BasePoint& b, const GroupElement& g) {
  const cplx x = b.v1 - (g.u * b.v1 - std::conj(g.v) * b.v2);
  const cplx y = b.v2 - (std::conj(g.u) * b.v2 + g.v * b.v1);
  return {x, y};
}

inline CMatrix holonomy_exponent(const QuiverPoint& q, const BasePoint& b, const GroupElement& g) {
  auto [A, B] = embed_matrices(q);
  auto [x, y] = holonomy_coefficients(b, g);
  return x * A + y * B;
}

inline double flatness_tolerance(const QuiverPoint& q) { return 1e-8 * std::max(1.0, morse_value(q)); }

inline void require_flat(const QuiverPoint& q) {
  const double r = flatness_residual(q);
  if (r > flatness_tolerance(q))
    throw invalid_argument("not flat: [alpha, beta] has norm " + std::to_string(r));
}

// R(γ)·exp(E): cyclic exponential for shift-form exponents, dense otherwise.
inline CMatrix holonomy(const QuiverPoint& q, const BasePoint& b, const CyclicGroup& grp, int m) {
  require_flat(q);
  const GroupElement g = element(grp, m);
  const CMatrix E = holonomy_exponent(q, b, g);
  ShiftForm<double> sf;
  const CMatrix X = shift_form<double>(E, sf) ? cyclic_matrix_exp<double>(E) : dense_matrix_exp<double>(E);
  return regular_rep(grp, m) * X;
}

// ---------------------------------------------------------------------------
// Generic-precision evaluation.

template <class Real>
std::pair<CMat<Real>, CMat<Real>> embed_matrices_as(const QuiverPoint& q, bool flatten) {
  using C = std::complex<Real>;
  const int n = q.n;
  std::vector<C> a(n), bt(n);
  bool all_products = true;
  for (int i = 0; i < n; ++i) {
    a[i] = C(Real(q.alpha(i).real()), Real(q.alpha(i).imag()));
    bt[i] = C(Real(q.beta(i).real()), Real(q.beta(i).imag()));
    all_products = all_products && q.alpha(i) != cplx(0.0) && q.beta(i) != cplx(0.0);
  }
  if (flatten && all_products) {
    // Equalize the products α_iβ_i in working precision: β_i = z / α_i.
    C z(Real(0), Real(0));
    for (int i = 0; i < n; ++i) z += a[i] * bt[i];
    z /= C(Real(n), Real(0));
    for (int i = 0; i < n; ++i) bt[i] = z / a[i];
  }
  CMat<Real> A = CMat<Real>::Zero(n, n), B = CMat<Real>::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    A(wrap(i + 1, n), i) += a[i];
    B(i, wrap(i + 1, n)) += bt[i];
  }
  return {A, B};
}

template <class Real>
std::complex<Real> as_complex(cplx z) {
  return {Real(z.real()), Real(z.imag())};
}

template <class Real>
CMat<Real> regular_rep_as(int n, int m) {
  CMat<Real> R = CMat<Real>::Zero(n, n);
  for (int j = 0; j < n; ++j) R(j, j) = unit_root<Real>(n, static_cast<long>(j) * m);
  return R;
}

// exp(xA + yB) for commuting A, B, as a product of cyclic exponentials.
template <class Real>
ScaledMatrix<Real> split_exp_scaled(const CMat<Real>& A, const CMat<Real>& B, std::complex<Real> x, std::complex<Real> y) {
  const std::complex<Real> zero(Real(0), Real(0));
  const bool has_a = x != zero && !A.isZero(0), has_b = y != zero && !B.isZero(0);
  const int n = static_cast<int>(A.rows());
  if (!has_a && !has_b) return {CMat<Real>::Identity(n, n), Real(0)};
  if (!has_b) return cyclic_matrix_exp_scaled<Real>(CMat<Real>(A * x));
  if (!has_a) return cyclic_matrix_exp_scaled<Real>(CMat<Real>(B * y));
  auto ea = cyclic_matrix_exp_scaled<Real>(CMat<Real>(A * x));
  auto eb = cyclic_matrix_exp_scaled<Real>(CMat<Real>(B * y));
  return {CMat<Real>(ea.m * eb.m), ea.log_scale + eb.log_scale};
}

// Per-element holonomy in working precision Real, with products equalized.
template <class Real>
CMat<Real> holonomy_as(const QuiverPoint& q, const BasePoint& b, int n, int m) {
  auto [A, B] = embed_matrices_as<Real>(q, true);
  const std::complex<Real> u = unit_root<Real>(n, m);
  const std::complex<Real> v1 = as_complex<Real>(b.v1), v2 = as_complex<Real>(b.v2);
  const std::complex<Real> one(Real(1), Real(0));
  const std::complex<Real> x = v1 * (one - u), y = v2 * (one - std::conj(u));
  return regular_rep_as<Real>(n, m) * split_exp_scaled<Real>(A, B, x, y).value();
}

// ---------------------------------------------------------------------------

// The representation used by the intertwiner module: ρ(γ_m) = ρ(γ₁)^m, evaluated
// as R(γ_m)·exp(c_A(m)v₁A + c_B(m)v₂B) with c_A(m) = ω^{1-m} - ω and
// c_B(m) = ω^{m-1} - ω̄. ρ(γ₁) equals holonomy(q, base, γ₁).
// The literal per-element formula R(γ_m)exp(v₁(1-u)A + v₂(1-ū)B) composes to this
// only for n = 2 (see holonomy_rep_per_element).
struct HolonomyRep {
  int n = 0;
  std::vector<CMatrix> rho;  // value = exp(log_scale) * rho[m]
  double log_scale = 0.0;
};

inline std::pair<cplx, cplx> generator_power_coefficients(const CyclicGroup& g, const BasePoint& b, int m) {
  const cplx cA = g.root(1 - m) - g.root(1);
  const cplx cB = g.root(m - 1) - std::conj(g.root(1));
  return {cA * b.v1, cB * b.v2};
}

// All elements share one log scale; elements far below the dominant scale
// underflow to zero, which is harmless for group averages.
inline HolonomyRep holonomy_rep_scaled(const QuiverPoint& q, const BasePoint& b, const CyclicGroup& g) {
  require_flat(q);
  auto [A, B] = embed_matrices_as<double>(q, true);
  std::vector<ScaledMatrix<double>> parts;
  double top = -std::numeric_limits<double>::infinity();
  for (int m = 0; m < g.n; ++m) {
    auto [x, y] = generator_power_coefficients(g, b, m);
    if (m == 0) x = y = 0.0;
    parts.push_back(split_exp_scaled<double>(A, B, x, y));
    top = std::max(top, parts.back().log_scale);
  }
  HolonomyRep rep;
  rep.n = g.n;
  rep.log_scale = top;
  for (int m = 0; m < g.n; ++m)
    rep.rho.push_back(regular_rep(g, m) * parts[m].m * std::exp(parts[m].log_scale - top));
  return rep;
}

inline HolonomyRep holonomy_rep(const QuiverPoint& q, const BasePoint& b, const CyclicGroup& g) {
  HolonomyRep rep = holonomy_rep_scaled(q, b, g);
  if (rep.log_scale > 50.0) throw numeric_failure("raw holonomy requested beyond the renormalization threshold");
  for (auto& r : rep.rho) r *= std::exp(rep.log_scale);
  rep.log_scale = 0.0;
  return rep;
}

inline HolonomyRep holonomy_rep_per_element(const QuiverPoint& q, const BasePoint& b, const CyclicGroup& g) {
  HolonomyRep rep;
  rep.n = g.n;
  for (int m = 0; m < g.n; ++m) rep.rho.push_back(holonomy(q, b, g, m));
  return rep;
}

// max over m, k of ‖ρ_mρ_k - ρ_{m+k}‖ / (‖ρ_m‖‖ρ_k‖).
inline double representation_defect(const HolonomyRep& rep) {
  double worst = 0.0;
  for (int m = 0; m < rep.n; ++m)
    for (int k = 0; k < rep.n; ++k) {
      // divided through by exp(log_scale) so that large scales do not overflow
      const double scale = rep.rho[m].norm() * rep.rho[k].norm();
      const CMatrix diff = rep.rho[m] * rep.rho[k] - std::exp(-rep.log_scale) * rep.rho[wrap(m + k, rep.n)];
      worst = std::max(worst, diff.norm() / std::max(scale, 1e-300));
    }
  return worst;
}

// Frame transport dX = -(α dz₁ + β dz₂)X along a sampled path, RK4 on each segment.
inline CMatrix parallel_transport_ode(const QuiverPoint& q, const std::vector<C2>& path) {
  require_flat(q);
  if (path.size() < 2) throw invalid_argument("transport path needs at least two points");
  auto [A, B] = embed_matrices(q);
  const int n = q.n;
  CMatrix X = CMatrix::Identity(n, n);
  for (std::size_t k = 1; k < path.size(); ++k) {
    const C2 dz = path[k] - path[k - 1];
    const CMatrix M = -(A * dz(0) + B * dz(1));  // constant along a straight segment, s in [0,1]
    const CMatrix k1 = M * X;
    const CMatrix k2 = M * (X + 0.5 * k1);
    const CMatrix k3 = M * (X + 0.5 * k2);
    const CMatrix k4 = M * (X + k3);
    X += (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
    if (!X.allFinite()) throw numeric_failure("transport integrator became unstable");
  }
  return X;
}

// ---------------------------------------------------------------------------

struct SpectrumReport {
  bool ok = true;
  int worst_element = -1;
  double max_eigen_error = 0.0;
  double max_trace_error = 0.0;
  bool extended_precision = false;
  std::string detail;
};

// Greedy nearest matching of eigenvalues to the roots {ω^{jm}}.
inline double match_roots(const std::vector<cplx>& eig, int n, int m) {
  std::vector<cplx> target;
  for (int j = 0; j < n; ++j) target.push_back(unit_root<double>(n, static_cast<long>(j) * m));
  auto angle = [](cplx z) {
    double a = std::arg(z);
    return a < -1e-9 ? a + 2 * pi : std::max(a, 0.0);
  };
  std::vector<cplx> e = eig;
  std::sort(e.begin(), e.end(), [&](cplx a, cplx b) { return angle(a) < angle(b); });
  std::vector<bool> used(target.size(), false);
  double worst = 0.0;
  for (const cplx& z : e) {
    int best = -1;
    double bd = 1e300;
    for (std::size_t k = 0; k < target.size(); ++k)
      if (!used[k] && std::abs(z - target[k]) < bd) {
        bd = std::abs(z - target[k]);
        best = static_cast<int>(k);
      }
    used[best] = true;
    worst = std::max(worst, bd);
  }
  return worst;
}

template <class Real>
std::pair<std::vector<cplx>, cplx> spectrum_as(const QuiverPoint& q, const BasePoint& b, int n, int m) {
  const CMat<Real> rho = holonomy_as<Real>(q, b, n, m);
  Eigen::ComplexEigenSolver<CMat<Real>> es(rho, false);
  if (es.info() != Eigen::Success) throw numeric_failure("eigenvalue solver failed");
  std::vector<cplx> ev;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    ev.emplace_back(to_double(es.eigenvalues()(i).real()), to_double(es.eigenvalues()(i).imag()));
  const std::complex<Real> tr = rho.trace();
  return {ev, cplx(to_double(tr.real()), to_double(tr.imag()))};
}

// Every ρ(γ_m) must have the eigenvalues of R(γ_m) (tolerance eig_tol) and the
// same trace (tolerance trace_tol). Exponents with ‖E‖ above double_limit are
// evaluated in 100-digit arithmetic.
inline SpectrumReport spectrum_check(const QuiverPoint& q, const BasePoint& b, const CyclicGroup& g, double eig_tol = 1e-6,
                                     double trace_tol = 1e-8, double double_limit = 8.0) {
  require_flat(q);
  SpectrumReport rep;
  for (int m = 0; m < g.n; ++m) {
    const double enorm = holonomy_exponent(q, b, element(g, m)).norm();
    if (enorm > 50.0) throw invalid_argument("spectrum_check: exponent norm above 50; raw holonomy is not evaluated there");
    const bool hp = enorm > double_limit;
    rep.extended_precision = rep.extended_precision || hp;
    auto [ev, tr] = hp ? spectrum_as<hp_real>(q, b, g.n, m) : spectrum_as<double>(q, b, g.n, m);
    const double e_err = match_roots(ev, g.n, m);
    const double t_err = std::abs(tr - regular_rep(g, m).trace());
    rep.max_eigen_error = std::max(rep.max_eigen_error, e_err);
    rep.max_trace_error = std::max(rep.max_trace_error, t_err);
    if ((e_err > eig_tol || t_err > trace_tol) && rep.ok) {
      rep.ok = false;
      rep.worst_element = m;
      rep.detail = "element " + std::to_string(m) + ": eigenvalue error " + std::to_string(e_err) + ", trace error " +
                   std::to_string(t_err);
    }
  }
  return rep;
}

} // namespace mckay

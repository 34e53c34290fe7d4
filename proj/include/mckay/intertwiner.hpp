#pragma once

#include "mckay/fixed_points.hpp"
#include "mckay/flow.hpp"
#include "mckay/holonomy.hpp"
#include "mckay/parallel.hpp"

#include <Eigen/SVD>

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace mckay {

class no_intertwiner : public numeric_failure {
 public:
  using numeric_failure::numeric_failure;
};

class not_a_projector : public std::runtime_error {
 public:
  not_a_projector(const std::string& what, double ratio) : std::runtime_error(what), sigma_ratio(ratio) {}
  double sigma_ratio;
};

inline CMatrix random_seed_matrix(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd(0.0, 1.0);
  CMatrix s(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) s(r, c) = cplx(nd(rng), nd(rng));
  return s;
}

// (1/n)Σ_m ρ(γ_m)·seed·R(γ_m)⁻¹, in the scale of hol (no singularity check).
inline CMatrix schur_average(const HolonomyRep& hol, const CMatrix& seed) {
  const CyclicGroup g = make_group(hol.n);
  CMatrix P = CMatrix::Zero(hol.n, hol.n);
  for (int m = 0; m < hol.n; ++m) P += hol.rho[m] * seed * regular_rep(g, wrap(-m, hol.n));
  return P / static_cast<double>(hol.n);
}

inline double inverse_condition(const CMatrix& P) {
  Eigen::JacobiSVD<CMatrix> svd(P);
  const auto& s = svd.singularValues();
  return s(0) > 0 ? s(s.size() - 1) / s(0) : 0.0;
}

struct SchurResult {
  CMatrix P;
  CMatrix seed;
  int attempts = 0;
};

// Group average with a singularity check; singular averages are retried with
// seeds from next_seed (attempt index 1..4), up to five attempts in total.
inline SchurResult schur_intertwiner_ex(const HolonomyRep& hol, const CMatrix& seed,
                                        const std::function<CMatrix(int)>& next_seed, double singular_tol = 1e-12) {
  if (seed.rows() != hol.n || seed.cols() != hol.n) throw invalid_argument("seed must be n x n");
  CMatrix s = seed;
  for (int attempt = 1; attempt <= 5; ++attempt) {
    CMatrix P = schur_average(hol, s);
    if (P.allFinite() && inverse_condition(P) > singular_tol) return {P, s, attempt};
    if (attempt < 5) s = next_seed ? next_seed(attempt) : CMatrix::Zero(hol.n, hol.n);
  }
  throw no_intertwiner("no invertible intertwiner after 5 seeds; the holonomy representation may not be isomorphic to R");
}

inline CMatrix schur_intertwiner(const HolonomyRep& hol, const CMatrix& seed, std::uint64_t rng_seed = 1) {
  std::mt19937_64 rng(rng_seed);
  return schur_intertwiner_ex(hol, seed, [&](int) { return random_seed_matrix(rng, hol.n); }).P;
}

// max_m ‖ρ(γ_m)P − P R(γ_m)‖ / (‖ρ(γ_m)‖‖P‖); avoids P⁻¹, which is ill-conditioned late in a flow.
// hol.rho carries the factor e^{-log_scale}, so R is scaled to match.
inline double intertwining_residual(const HolonomyRep& hol, const CMatrix& P) {
  const CyclicGroup g = make_group(hol.n);
  const double rs = std::exp(-hol.log_scale);
  double worst = 0.0;
  for (int m = 0; m < hol.n; ++m) {
    const double scale = hol.rho[m].norm() * P.norm();
    if (scale == 0.0) continue;
    worst = std::max(worst, (hol.rho[m] * P - rs * P * regular_rep(g, m)).norm() / scale);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Closed-form intertwiners.

// ℤ₂, α-only point: the 2×2 matrix with entries √k cosh(θ/2), −√k sinh(θ/2),
// −sinh(θ/2)/√k, cosh(θ/2)/√k, where θ = 2v₁√(α₁α₂) and k = √(α₂/α₁).
// The common factor e^{Re θ/2} is moved into log_scale.
inline ScaledMatrix<double> closed_form_P_z2(const QuiverPoint& q, const BasePoint& b) {
  if (q.n != 2 || q.beta.cwiseAbs().maxCoeff() != 0.0 || q.alpha(0) == cplx(0.0) || q.alpha(1) == cplx(0.0))
    throw invalid_argument("closed_form_P_z2 needs a Z2 point with beta = 0 and both alpha nonzero");
  const cplx theta = 2.0 * b.v1 * std::sqrt(q.alpha(0) * q.alpha(1));
  const cplx sk = std::sqrt(std::sqrt(q.alpha(1) / q.alpha(0)));
  const cplx h = theta / 2.0;
  const double shift = std::abs(h.real());
  // cosh, sinh with e^{|Re h|} factored out
  const cplx ep = std::exp(h - shift), em = std::exp(-h - shift);
  const cplx ch = 0.5 * (ep + em), sh = 0.5 * (ep - em);
  CMatrix P(2, 2);
  P << sk * ch, -sk * sh, -sh / sk, ch / sk;
  return {P, shift};
}

struct DFunctions {
  cplx d0, d1, d2;  // scaled by e^{-shift}
  double shift = 0.0;
};

// d₀ = (e^λ + e^{ωλ} + e^{ω²λ})/3, d₁ = (e^λ + ω²e^{ωλ} + ωe^{ω²λ})/(3λ),
// d₂ = (e^λ + ωe^{ωλ} + ω²e^{ω²λ})/(3λ²).
inline DFunctions z3_d_functions(cplx lambda) {
  const CyclicGroup g = make_group(3);
  const cplx w = g.omega, w2 = g.root(2);
  DFunctions d;
  d.shift = std::max({lambda.real(), (w * lambda).real(), (w2 * lambda).real()});
  const cplx e0 = std::exp(lambda - d.shift), e1 = std::exp(w * lambda - d.shift), e2 = std::exp(w2 * lambda - d.shift);
  d.d0 = (e0 + e1 + e2) / 3.0;
  if (std::abs(lambda) < 1e-3) {
    // series form avoids the cancellation in the 1/λ, 1/λ² factors
    const cplx l3 = lambda * lambda * lambda;
    const double es = std::exp(-d.shift);
    d.d1 = es * (1.0 + l3 / 24.0 + l3 * l3 / 40320.0);
    d.d2 = es * (0.5 + l3 / 120.0 + l3 * l3 / 362880.0);
  } else {
    d.d1 = (e0 + w2 * e1 + w * e2) / (3.0 * lambda);
    d.d2 = (e0 + w * e1 + w2 * e2) / (3.0 * lambda * lambda);
  }
  return d;
}

// ℤ₃ closed forms: for an α-only point, P = exp(ωN) with N = v₁·α; for a β-only
// point, W = exp(ωM) with M = v₂·β. Both as d₀I + d₁ωX + d₂ω²X².
inline ScaledMatrix<double> closed_form_P_z3(const QuiverPoint& q, const BasePoint& b) {
  if (q.n != 3) throw invalid_argument("closed_form_P_z3 needs a Z3 point");
  const bool alpha_only = q.beta.cwiseAbs().maxCoeff() == 0.0 && q.alpha.cwiseAbs().minCoeff() > 0.0;
  const bool beta_only = q.alpha.cwiseAbs().maxCoeff() == 0.0 && q.beta.cwiseAbs().minCoeff() > 0.0;
  if (!alpha_only && !beta_only) throw invalid_argument("closed_form_P_z3 needs an alpha-only or beta-only point with no zero edges");
  auto [A, B] = embed_matrices(q);
  const CMatrix X = alpha_only ? CMatrix(b.v1 * A) : CMatrix(b.v2 * B);
  const CVector& e = alpha_only ? q.alpha : q.beta;
  const cplx vv = alpha_only ? b.v1 : b.v2;
  // λ = v·(Π edges)^{1/3}; the edges along a flow are positive reals, and the
  // cube root is taken so that X³ = λ³ I.
  const cplx lambda = vv * std::pow(e(0) * e(1) * e(2), 1.0 / 3.0);
  const DFunctions d = z3_d_functions(lambda);
  const cplx w = make_group(3).omega;
  CMatrix P = d.d0 * CMatrix::Identity(3, 3) + d.d1 * w * X + d.d2 * w * w * X * X;
  return {P, d.shift};
}

// Per-element closed forms C_m(t) = R(γ_m)exp(v₁(1−ω^m)N̂) for α-only points
// (and the β analogue), returned scaled.
inline ScaledMatrix<double> holonomy_scaled(const QuiverPoint& q, const BasePoint& b, const CyclicGroup& g, int m) {
  require_flat(q);
  auto [A, B] = embed_matrices_as<double>(q, true);
  auto [x, y] = holonomy_coefficients(b, element(g, m));
  auto e = split_exp_scaled<double>(A, B, x, y);
  return {CMatrix(regular_rep(g, m) * e.m), e.log_scale};
}

// ---------------------------------------------------------------------------

inline CMatrix renormalize(const CMatrix& M) {
  Eigen::Index r = 0, c = 0;
  const double top = M.cwiseAbs().maxCoeff(&r, &c);
  if (!(top > 0) || !std::isfinite(top)) throw invalid_argument("cannot renormalize a zero or non-finite matrix");
  CMatrix out = M / M(r, c);
  if (std::abs(out(0, 0)) > 1e-12) out *= std::conj(out(0, 0)) / std::abs(out(0, 0));
  return out;
}

inline double max_entry_distance(const CMatrix& a, const CMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

// Right multiplication by a diagonal matrix (the commutant of R): each column is
// scaled to unit length with its row-0 entry real positive (largest entry when
// row 0 vanishes).
inline CMatrix column_gauge(const CMatrix& P) {
  CMatrix out = P;
  for (Eigen::Index j = 0; j < P.cols(); ++j) {
    const double nrm = P.col(j).norm();
    if (!(nrm > 0)) continue;
    Eigen::Index r = 0;
    if (std::abs(P(0, j)) <= 1e-8 * nrm) P.col(j).cwiseAbs().maxCoeff(&r);
    const cplx phase = std::conj(P(r, j)) / std::abs(P(r, j));
    out.col(j) = P.col(j) * (phase / nrm);
  }
  return out;
}

struct LimitEstimate {
  CMatrix limit;
  bool converged = false;
  std::vector<double> differences;  // max-norm gaps between consecutive renormalized samples
  std::string diagnostics;
};

inline LimitEstimate limit_estimate(const std::vector<CMatrix>& samples, double tol = 1e-6, bool gauge_fix = false) {
  if (samples.size() < 2) throw invalid_argument("limit_estimate needs at least two samples");
  LimitEstimate out;
  std::vector<CMatrix> hat;
  for (const auto& s : samples) hat.push_back(renormalize(gauge_fix ? column_gauge(s) : s));
  for (std::size_t k = 1; k < hat.size(); ++k) out.differences.push_back(max_entry_distance(hat[k], hat[k - 1]));
  bool decreasing = true;
  for (std::size_t k = 1; k < out.differences.size(); ++k)
    decreasing = decreasing && out.differences[k] <= out.differences[k - 1] + 1e-12;
  out.limit = hat.back();
  out.converged = out.differences.back() <= tol && decreasing;
  if (!out.converged) {
    out.diagnostics = "differences:";
    for (double d : out.differences) out.diagnostics += " " + std::to_string(d);
  }
  return out;
}

struct IrrepMatch {
  int j = -1;
  double correlation = 0.0;
  double sigma_ratio = 0.0;      // σ₂/σ₁
  double entrywise_error = 0.0;  // secondary: renormalize(limit) vs renormalize(Π_j)
};

inline IrrepMatch match_irrep(const CMatrix& limit, const CyclicGroup& g, double rank_tol = 1e-4) {
  if (limit.rows() != g.n || limit.cols() != g.n) throw invalid_argument("limit has the wrong size");
  if (!(limit.cwiseAbs().maxCoeff() > 0)) throw invalid_argument("limit matrix is zero");
  Eigen::JacobiSVD<CMatrix> svd(limit, Eigen::ComputeFullU);
  const auto& s = svd.singularValues();
  IrrepMatch out;
  out.sigma_ratio = s.size() > 1 ? s(1) / s(0) : 0.0;
  if (out.sigma_ratio > rank_tol)
    throw not_a_projector("limit is not rank one: sigma2/sigma1 = " + std::to_string(out.sigma_ratio), out.sigma_ratio);
  const CVector u = svd.matrixU().col(0);
  for (int j = 0; j < g.n; ++j) {
    const double corr = std::abs(irrep_vector(g, j).dot(u)) / std::sqrt(static_cast<double>(g.n));
    if (corr > out.correlation) {
      out.correlation = corr;
      out.j = j;
    }
  }
  out.entrywise_error = max_entry_distance(renormalize(limit), renormalize(character_projector(g, out.j)));
  return out;
}

// ---------------------------------------------------------------------------

struct IntertwinerTrace {
  std::vector<double> times;
  std::vector<double> morse;
  std::vector<CMatrix> P;      // scaled so the largest entry is O(1)
  std::vector<CMatrix> P_hat;
  CMatrix limit;
  bool converged = false;
  std::vector<double> differences;
  std::string diagnostics;
  int matched_irrep = -1;
  double correlation = 0.0;
  double sigma_ratio = 0.0;
  double entrywise_error = 0.0;
  double max_identity_residual = 0.0;
  int seed_attempts = 0;
};

// Samples whose Morse values are closest below Φ_end·2^{-k}, k = count-1..0.
inline std::vector<std::size_t> late_sample_indices(const FlowTrajectory& traj, int count) {
  std::vector<std::size_t> idx;
  if (traj.samples.empty()) return idx;
  const double end = traj.samples.back().morse;
  std::size_t cursor = 0;
  for (int k = count - 1; k >= 0; --k) {
    const double target = end * std::ldexp(1.0, -k);
    while (cursor + 1 < traj.samples.size() && traj.samples[cursor + 1].morse <= target * (1 + 1e-9)) ++cursor;
    if (idx.empty() || idx.back() != cursor) idx.push_back(cursor);
  }
  return idx;
}

// Generic route: holonomy representation (generator powers) and group averaging.
inline IntertwinerTrace intertwiner_trace(const FlowTrajectory& traj, const std::vector<std::size_t>& idx,
                                          const BasePoint& base, std::mt19937_64& rng, double limit_tol = 1e-6) {
  if (idx.size() < 2) throw invalid_argument("intertwiner trace needs at least two samples");
  const int n = traj.samples.front().point.n;
  const CyclicGroup g = make_group(n);
  IntertwinerTrace tr;
  // The seed is validated at the first trajectory sample, where P is well conditioned;
  // late averages are close to rank one by design.
  const HolonomyRep early = holonomy_rep_scaled(traj.samples.front().point, base, g);
  auto res = schur_intertwiner_ex(early, random_seed_matrix(rng, n), [&](int) { return random_seed_matrix(rng, n); });
  const CMatrix seed = res.seed;
  tr.seed_attempts = res.attempts;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const FlowSample& smp = traj.samples.at(idx[k]);
    const HolonomyRep hol = holonomy_rep_scaled(smp.point, base, g);
    CMatrix P = schur_average(hol, seed);
    const double top = P.cwiseAbs().maxCoeff();
    if (!(top > 0) || !std::isfinite(top)) throw numeric_failure("intertwiner vanished or overflowed at t=" + std::to_string(smp.t));
    P /= top;
    tr.max_identity_residual = std::max(tr.max_identity_residual, intertwining_residual(hol, P));
    tr.times.push_back(smp.t);
    tr.morse.push_back(smp.morse);
    tr.P.push_back(P);
    tr.P_hat.push_back(renormalize(column_gauge(P)));
  }
  const LimitEstimate le = limit_estimate(tr.P, limit_tol, true);
  tr.limit = le.limit;
  tr.converged = le.converged;
  tr.differences = le.differences;
  tr.diagnostics = le.diagnostics;
  return tr;
}

// gauge_fixed: compare against the column-gauged projector (generic route).
inline void attach_match(IntertwinerTrace& tr, const CyclicGroup& g, double rank_tol = 1e-4, bool gauge_fixed = false) {
  const IrrepMatch m = match_irrep(tr.limit, g, rank_tol);
  tr.matched_irrep = m.j;
  tr.correlation = m.correlation;
  tr.sigma_ratio = m.sigma_ratio;
  tr.entrywise_error = gauge_fixed
      ? max_entry_distance(tr.limit, renormalize(column_gauge(character_projector(g, m.j))))
      : m.entrywise_error;
}

// Closed-form route for ℤ₂ / ℤ₃ trajectories that are α-only or β-only.
inline IntertwinerTrace closed_form_trace(const FlowTrajectory& traj, const std::vector<std::size_t>& idx,
                                          const BasePoint& base, double limit_tol = 1e-6) {
  IntertwinerTrace tr;
  for (std::size_t k : idx) {
    const FlowSample& smp = traj.samples.at(k);
    const ScaledMatrix<double> P = smp.point.n == 2 ? closed_form_P_z2(smp.point, base) : closed_form_P_z3(smp.point, base);
    tr.times.push_back(smp.t);
    tr.morse.push_back(smp.morse);
    tr.P.push_back(P.m);
    tr.P_hat.push_back(renormalize(P.m));
  }
  const LimitEstimate le = limit_estimate(tr.P, limit_tol);
  tr.limit = le.limit;
  tr.converged = le.converged;
  tr.differences = le.differences;
  tr.diagnostics = le.diagnostics;
  return tr;
}

struct ClosedFormLimit {
  FlowTrajectory trajectory;
  IntertwinerTrace trace;
  int extensions = 0;
};

// Closed-form trajectory sampled up to Morse value `target`, traced at Φ_end·2^{-k};
// the target is multiplied by `factor` (up to max_ext times) until the limit settles.
template <class MakeTraj>
ClosedFormLimit closed_form_limit_impl(MakeTraj make, double target, const BasePoint& base, int limit_samples,
                                       double limit_tol, int max_ext, double factor) {
  ClosedFormLimit out;
  for (;;) {
    out.trajectory = make(target);
    out.trace = closed_form_trace(out.trajectory, late_sample_indices(out.trajectory, limit_samples), base, limit_tol);
    if (out.trace.converged || out.extensions >= max_ext) return out;
    ++out.extensions;
    target *= factor;
  }
}

inline std::vector<double> closed_form_times(double t_start, double t_end, int count) {
  std::vector<double> ts;
  for (int k = 0; k <= count; ++k) ts.push_back(t_start + (t_end - t_start) * k / count);
  return ts;
}

// Sample times are uniform in t up to the target, with the late samples placed at
// Morse values target·2^{-k} so that limit traces use exact doublings.
inline std::vector<double> z3_limit_times(double a, double b, double C0, Z3Branch br, double target, int limit_samples) {
  auto ts = closed_form_times(C0 / 12.0 - 2.0, z3_time_at_morse(a, b, C0, br, target / std::ldexp(1.0, limit_samples)), 200);
  for (int k = limit_samples - 1; k >= 0; --k) ts.push_back(z3_time_at_morse(a, b, C0, br, target * std::ldexp(1.0, -k)));
  return ts;
}

inline std::vector<double> z2_limit_times(double a, double C0, double target, int limit_samples) {
  auto ts = closed_form_times(-2.0, z2_time_at_morse(a, C0, target / std::ldexp(1.0, limit_samples)), 200);
  for (int k = limit_samples - 1; k >= 0; --k) ts.push_back(z2_time_at_morse(a, C0, target * std::ldexp(1.0, -k)));
  return ts;
}

inline ClosedFormLimit z3_closed_form_limit(double a, double b, Z3Branch br, const BasePoint& base, double C0 = 0.0,
                                            int limit_samples = 8, double limit_tol = 1e-6, int max_ext = 3) {
  const double target = 1e6 * (a * a + b * b);
  return closed_form_limit_impl(
      [&](double tg) { return z3_closed_form_flow(a, b, C0, br, z3_limit_times(a, b, C0, br, tg, limit_samples)); }, target,
      base, limit_samples, limit_tol, max_ext, 4.0);
}

// α-only ℤ₂ flow from the family endpoint (r, s) = (a, 0).
inline ClosedFormLimit z2_closed_form_limit(double a, const BasePoint& base, double C0 = 1.0, int limit_samples = 8,
                                            double limit_tol = 1e-6, int max_ext = 3) {
  const double target = 1e6 * a * a;
  return closed_form_limit_impl(
      [&](double tg) { return z2_closed_form_flow(a, a, 0.0, C0, z2_limit_times(a, C0, tg, limit_samples)); }, target, base,
      limit_samples, limit_tol, max_ext, 4.0);
}

// ---------------------------------------------------------------------------

struct VerifyOptions {
  FlowOptions flow;
  int limit_samples = 8;
  double limit_tol = 1e-6;
  double match_tol = 1e-4;
  int max_extensions = 3;
  double extension_factor = 4.0;  // Morse target multiplier per extension (doubles the exponent scale)
  std::uint64_t rng_seed = 1;
};

struct ComponentReport {
  int component = 0;
  std::string kind;  // "isolated" or "family"
  FixedPointRecord source;
  std::string termination;
  double final_morse = 0.0;
  double final_time = 0.0;
  int extensions = 0;
  bool converged = false;
  std::vector<double> differences;
  int matched_irrep = -1;
  double correlation = 0.0;
  double sigma_ratio = 0.0;
  double entrywise_error = 0.0;
  double residual_real = 0.0;
  double residual_complex = 0.0;
  double identity_residual = 0.0;
  std::string status;  // "ok" or the reason the component fails
};

struct ConjectureReport {
  int n = 0;
  RVector zeta;
  BasePoint base;
  std::vector<ComponentReport> components;
  bool all_matched = false;
  bool injective = false;
  bool surjective = false;
  bool surjectivity_required = false;
  bool conjecture_holds = false;
  std::vector<std::string> violations;
};

// One component: flow to the horizon, extend while the limit has not settled.
inline ComponentReport verify_component(const CyclicGroup& g, const ZetaLevel& zeta, const FixedPointRecord& src,
                                        const BasePoint& base, const VerifyOptions& opt, int index) {
  ComponentReport rep;
  rep.component = index;
  rep.kind = src.is_family() ? "family" : "isolated";
  rep.source = src;
  std::mt19937_64 rng(opt.rng_seed + 7919ULL * static_cast<std::uint64_t>(index));
  FlowOptions fo = opt.flow;
  if (!(fo.morse_target > 0)) fo.morse_target = 1e6 * std::max(1.0, zeta_scale(zeta.values));
  FlowTrajectory traj = numeric_flow(g, zeta, src, fo);
  for (;;) {
    const TrajectoryCheck chk = check_trajectory(traj);
    rep.residual_real = chk.max_residual_real;
    rep.residual_complex = chk.max_residual_complex;
    rep.termination = traj.termination;
    rep.final_morse = traj.samples.back().morse;
    rep.final_time = traj.samples.back().t;
    if (traj.termination != "morse-target") {
      rep.status = "flow ended at " + traj.termination + " (t=" + std::to_string(rep.final_time) +
                   ", Morse value " + std::to_string(rep.final_morse) + ") instead of reaching infinity";
      return rep;
    }
    IntertwinerTrace tr = intertwiner_trace(traj, late_sample_indices(traj, opt.limit_samples), base, rng, opt.limit_tol);
    rep.converged = tr.converged;
    rep.differences = tr.differences;
    rep.identity_residual = tr.max_identity_residual;
    if (tr.converged || rep.extensions >= opt.max_extensions) {
      try {
        attach_match(tr, g, opt.match_tol, true);
        rep.matched_irrep = tr.matched_irrep;
        rep.correlation = tr.correlation;
        rep.sigma_ratio = tr.sigma_ratio;
        rep.entrywise_error = tr.entrywise_error;
      } catch (const not_a_projector& e) {
        rep.sigma_ratio = e.sigma_ratio;
        rep.status = e.what();
        return rep;
      }
      if (!tr.converged) rep.status = "limit did not converge; " + tr.diagnostics;
      else if (rep.matched_irrep == 0) rep.status = "limit matches the trivial representation";
      else if (rep.correlation < 1.0 - opt.match_tol) rep.status = "correlation below 1 - match tolerance";
      else rep.status = "ok";
      return rep;
    }
    // extend the horizon from the last state
    ++rep.extensions;
    FlowOptions ext = fo;
    ext.morse_target = rep.final_morse * opt.extension_factor;
    FlowTrajectory more = integrate_flow(zeta.values, traj.samples.back().point, ext, traj.samples.back().t);
    traj.samples.insert(traj.samples.end(), more.samples.begin() + 1, more.samples.end());
    traj.termination = more.termination;
  }
}

// H²-generating components: isolated index-2 points, and for even n the family.
inline std::vector<FixedPointRecord> conjecture_sources(const std::vector<FixedPointRecord>& recs) {
  std::vector<FixedPointRecord> out;
  for (const auto& r : recs)
    if (r.is_family() || r.morse_index == 2) out.push_back(r);
  return out;
}

inline ConjectureReport verify_conjecture(const CyclicGroup& g, const ZetaLevel& zeta, const BasePoint& base,
                                          const VerifyOptions& opt = {}) {
  if (g.n > 12) throw invalid_argument("verify_conjecture is capped at n <= 12");
  ConjectureReport rep;
  rep.n = g.n;
  rep.zeta = zeta.values;
  rep.base = base;
  const auto sources = conjecture_sources(enumerate_fixed_points(g, zeta));
  rep.components.resize(sources.size());
  parallel_for(sources.size(), [&](std::size_t i) {
    rep.components[i] = verify_component(g, zeta, sources[i], base, opt, static_cast<int>(i));
  });

  rep.all_matched = !rep.components.empty();
  std::vector<int> seen(g.n, 0);
  for (const auto& c : rep.components) {
    if (c.status != "ok") {
      rep.all_matched = false;
      rep.violations.push_back("component " + std::to_string(c.component) + " (" + pattern_string(c.source.pattern) +
                               "): " + c.status);
    }
    if (c.matched_irrep >= 0) ++seen[c.matched_irrep];
  }
  rep.injective = true;
  for (int j = 0; j < g.n; ++j)
    if (seen[j] > 1) {
      rep.injective = false;
      rep.violations.push_back("irrep " + std::to_string(j) + " is matched by " + std::to_string(seen[j]) + " components");
    }
  int isolated = 0;
  for (const auto& c : rep.components) isolated += c.kind == "isolated";
  rep.surjectivity_required = g.n % 2 == 1 && isolated == g.n - 1;
  rep.surjective = true;
  for (int j = 1; j < g.n; ++j) rep.surjective = rep.surjective && seen[j] > 0;
  if (rep.surjectivity_required && !rep.surjective) rep.violations.push_back("not every nontrivial irrep is reached");
  rep.conjecture_holds = rep.all_matched && rep.injective && (!rep.surjectivity_required || rep.surjective);
  return rep;
}

} // namespace mckay

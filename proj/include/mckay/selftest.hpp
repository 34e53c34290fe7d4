#pragma once

#include "mckay/intertwiner.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace mckay {

struct SuiteResult {
  std::string name;
  int checks = 0;
  int failures = 0;
  std::string first_failure;

  bool passed() const { return failures == 0; }
};

struct SelftestOptions {
  std::uint64_t seed = 1;
  bool flip_moment_sign = false;  // mutation smoke test: the suites must notice
};

namespace detail {

class Recorder {
 public:
  explicit Recorder(std::string name) { res_.name = std::move(name); }

  void check(bool ok, const std::string& what) {
    ++res_.checks;
    if (!ok && res_.failures++ == 0) res_.first_failure = what;
  }
  void within(double value, double tol, const std::string& what) {
    std::ostringstream os;
    os << what << ": " << value << " > " << tol;
    check(value <= tol, os.str());
  }
  SuiteResult result() const { return res_; }

 private:
  SuiteResult res_;
};

inline QuiverPoint random_point(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  QuiverPoint q(n);
  for (int i = 0; i < n; ++i) {
    q.alpha(i) = {nd(rng), nd(rng)};
    q.beta(i) = {nd(rng), nd(rng)};
  }
  return q;
}

inline RVector random_generic_zeta(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> ud(-3.0, 3.0);
  for (;;) {
    RVector z(n);
    for (int i = 0; i < n - 1; ++i) z(i) = ud(rng);
    z(n - 1) = -z.head(n - 1).sum();
    if (!vanishing_partial_sum(z, 1e-3)) return z;
  }
}

inline CMatrix random_shift(std::mt19937_64& rng, int n, bool lower) {
  std::normal_distribution<double> nd(0.0, 1.5);
  CMatrix M = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const cplx w(nd(rng), nd(rng));
    if (lower) M(wrap(i + 1, n), i) = w;
    else M(i, wrap(i + 1, n)) = w;
  }
  return M;
}

inline BasePoint random_base(std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  return normalized_base({nd(rng), nd(rng)}, {nd(rng), nd(rng)});
}

} // namespace detail

// Two record lists agree when patterns, indices and squared edge magnitudes match
// (phases are gauge); families are compared through their two endpoints.
inline bool records_equivalent(const std::vector<FixedPointRecord>& a, const std::vector<FixedPointRecord>& b,
                               double tol = 1e-9) {
  if (a.size() != b.size()) return false;
  auto mags = [](const QuiverPoint& q) {
    RVector m(2 * q.n);
    m << q.alpha.cwiseAbs2(), q.beta.cwiseAbs2();
    return m;
  };
  std::vector<bool> used(b.size(), false);
  for (const auto& r : a) {
    bool found = false;
    for (std::size_t k = 0; k < b.size() && !found; ++k) {
      const auto& s = b[k];
      if (used[k] || r.pattern != s.pattern || r.morse_index != s.morse_index || r.is_family() != s.is_family()) continue;
      double d = 0.0;
      if (r.is_family()) {
        for (double th : {0.0, pi / 2})
          d = std::max(d, (mags(family_point(r, th).point) - mags(family_point(s, th).point)).cwiseAbs().maxCoeff());
      } else {
        d = (mags(r.point) - mags(s.point)).cwiseAbs().maxCoeff();
      }
      if (d <= tol * std::max(1.0, mags(r.point).maxCoeff())) found = used[k] = true;
    }
    if (!found) return false;
  }
  return true;
}

inline SuiteResult suite_group_rep() {
  detail::Recorder rec("group_rep");
  for (int n = 2; n <= 8; ++n) {
    const CyclicGroup g = make_group(n);
    CMatrix sum = CMatrix::Zero(n, n);
    for (int j = 0; j < n; ++j) {
      const CMatrix Pj = character_projector(g, j);
      sum += Pj;
      rec.within((Pj * Pj - n * Pj).norm(), 1e-10, "projector idempotence n=" + std::to_string(n));
      for (int k = j + 1; k < n; ++k)
        rec.within((Pj * character_projector(g, k)).norm(), 1e-10, "projector orthogonality n=" + std::to_string(n));
    }
    rec.within((sum - n * CMatrix::Identity(n, n)).norm(), 1e-10, "projector sum n=" + std::to_string(n));
    for (int m = 0; m < n; ++m) {
      const CMatrix R = regular_rep(g, m);
      rec.within((R * R.adjoint() - CMatrix::Identity(n, n)).norm(), 1e-12, "regular representation unitary");
      rec.within((R - CMatrix(R.diagonal().asDiagonal())).norm(), 0.0, "regular representation diagonal");
      rec.within((R * regular_rep(g, wrap(m + 1, n)).adjoint() - regular_rep(g, n - 1)).norm(), 1e-12,
                 "regular representation homomorphism");
    }
  }
  return rec.result();
}

inline SuiteResult suite_quiver(const SelftestOptions& opt) {
  detail::Recorder rec("quiver");
  std::mt19937_64 rng(opt.seed);
  auto mm = [&](const QuiverPoint& q) -> RVector {
    return opt.flip_moment_sign ? RVector(-moment_map_real(q)) : moment_map_real(q);
  };
  std::uniform_real_distribution<double> ud(0.0, 2 * pi);
  for (int n = 2; n <= 6; ++n) {
    const CyclicGroup g = make_group(n);
    for (int trial = 0; trial < 20; ++trial) {
      const QuiverPoint q = detail::random_point(rng, n);
      auto [A, B] = embed_matrices(q);
      const CMatrix K = (A * A.adjoint() - A.adjoint() * A) + (B * B.adjoint() - B.adjoint() * B);
      // The real moment map is the negated diagonal of [A,A†] + [B,B†].
      rec.within((mm(q) + K.diagonal().real()).cwiseAbs().maxCoeff(), 1e-12, "real moment map vs commutator diagonal");
      rec.within((K - CMatrix(K.diagonal().asDiagonal())).cwiseAbs().maxCoeff(), 1e-12, "commutator off-diagonal");
      rec.within(std::abs(mm(q).sum()), 1e-12, "real moment map trace");
      CVector f(n);
      for (int j = 0; j < n; ++j) f(j) = std::polar(1.0, ud(rng));
      const QuiverPoint gq = gauge_act(q, f);
      const QuiverPoint cq = circle_act(q, ud(rng));
      rec.within((mm(gq) - mm(q)).cwiseAbs().maxCoeff(), 1e-10, "moment map gauge invariance");
      rec.within((mm(cq) - mm(q)).cwiseAbs().maxCoeff(), 1e-10, "moment map circle invariance");
      rec.within(std::abs(flatness_residual(gq) - flatness_residual(q)), 1e-10, "flatness gauge invariance");
      rec.within(std::abs(flatness_residual(cq) - flatness_residual(q)), 1e-10, "flatness circle invariance");
      const double phi = morse_value(q);
      for (const QuiverPoint& p : {gq, cq, j_action(q)})
        rec.within(std::abs(morse_value(p) - phi), 1e-10 * std::max(1.0, phi), "Morse value invariance");
      const CMatrix R = regular_rep(g, 1);
      rec.within((R * A * R.adjoint() - g.omega * A).norm(), 1e-12, "equivariance of A");
      rec.within((R * B * R.adjoint() - std::conj(g.omega) * B).norm(), 1e-12, "equivariance of B");
    }
  }
  return rec.result();
}

inline SuiteResult suite_fixed_points(const SelftestOptions& opt) {
  detail::Recorder rec("fixed_points");
  std::mt19937_64 rng(opt.seed + 1);
  auto mm = [&](const QuiverPoint& q) -> RVector {
    return opt.flip_moment_sign ? RVector(-moment_map_real(q)) : moment_map_real(q);
  };
  std::uniform_real_distribution<double> ud(0.0, 2 * pi);
  for (int n = 2; n <= 8; ++n) {
    const CyclicGroup g = make_group(n);
    for (int trial = 0; trial < 3; ++trial) {
      const ZetaLevel zeta = trial == 0 ? default_zeta(n) : make_zeta(detail::random_generic_zeta(rng, n));
      const auto recs = enumerate_fixed_points(g, zeta);
      int index2 = 0, families = 0;
      for (const auto& r : recs) {
        rec.within((mm(r.point) - zeta.values).cwiseAbs().maxCoeff(), 1e-10, "fixed point real moment map");
        rec.within(moment_map_complex(r.point).cwiseAbs().maxCoeff(), 0.0, "fixed point complex moment map");
        index2 += r.morse_index == 2 && !r.is_family();
        families += r.is_family();
        for (int k = 0; k < 3; ++k) {
          const double phi = ud(rng);
          CVector f(n);
          for (int j = 0; j < n; ++j) f(j) = std::polar(1.0, r.weights(j) * phi);
          rec.within(distance(circle_act(r.point, phi), gauge_act(r.point, f)), 1e-10, "circle action equals weight gauge");
        }
      }
      const std::string tag = " n=" + std::to_string(n);
      if (n % 2 == 1) {
        rec.check(recs.size() == static_cast<std::size_t>(n), "odd count" + tag);
        rec.check(index2 == n - 1, "odd index-2 count" + tag);
      } else {
        rec.check(recs.size() == static_cast<std::size_t>(n - 1) && families == 1, "even count" + tag);
        rec.check(index2 == n - 2, "even index-2 count" + tag);
      }
      if (n <= 6) rec.check(records_equivalent(recs, brute_force_fixed_points(g, zeta)), "brute force agreement" + tag);
    }
  }
  return rec.result();
}

inline SuiteResult suite_flow(const SelftestOptions& opt) {
  detail::Recorder rec("flow");
  (void)opt;
  for (int n = 2; n <= 5; ++n) {
    const CyclicGroup g = make_group(n);
    const ZetaLevel zeta = n == 2 ? zeta_from_ab(2, 1.0) : n == 3 ? zeta_from_ab(3, 1.0, 1.5) : default_zeta(n);
    const auto recs = enumerate_fixed_points(g, zeta);
    for (const auto& src : conjecture_sources(recs)) {
      FlowOptions fo;
      fo.morse_target = 1e4 * std::max(1.0, zeta_scale(zeta.values));
      fo.record_stride = 10;
      const FlowTrajectory traj = numeric_flow(g, zeta, src, fo);
      const TrajectoryCheck chk = check_trajectory(traj);
      const std::string tag = " n=" + std::to_string(n) + " " + pattern_string(src.pattern);
      rec.within(chk.max_residual_real, 1e-8, "real moment conservation" + tag);
      rec.within(chk.max_residual_complex, 1e-8, "complex moment conservation" + tag);
      rec.check(chk.monotone, "Morse monotonicity" + tag);
    }
  }
  // ℤ₂ conserved ratio along the closed form and agreement with the integrator.
  const double a = 1.0, r = 0.6, s = 0.8, C0 = 1.0;
  const FlowTrajectory cf = z2_closed_form_flow(a, r, s, C0, closed_form_times(-3.0, 3.0, 60));
  double k0 = 0.0, drift = 0.0;
  for (const auto& smp : cf.samples) {
    const double S = z2_S(a, C0, smp.t);
    const double ratio = (r * r * S / (a * a) + r * r) / (s * s * S / (a * a) + s * s);
    if (k0 == 0.0) k0 = ratio;
    drift = std::max(drift, std::abs(ratio / k0 - 1.0));
  }
  rec.within(drift, 1e-10, "Z2 conserved ratio");
  FlowOptions fo;
  fo.morse_target = 1e3;
  const FlowTrajectory num = integrate_flow(cf.zeta, cf.samples.front().point, fo, cf.samples.front().t);
  double dev = 0.0;
  for (std::size_t k = 0; k < num.samples.size(); k += 50) {
    const double phi = num.samples[k].morse;
    if (phi <= cf.samples.front().morse * 1.01) continue;
    const QuiverPoint ref = z2_point(a, r, s, 0.5 * (phi - a * a));
    dev = std::max(dev, (num.samples[k].point.alpha.cwiseAbs() - ref.alpha.cwiseAbs()).cwiseAbs().maxCoeff());
    dev = std::max(dev, (num.samples[k].point.beta.cwiseAbs() - ref.beta.cwiseAbs()).cwiseAbs().maxCoeff());
  }
  rec.within(dev, 1e-6, "Z2 numeric vs closed form");
  return rec.result();
}

inline SuiteResult suite_holonomy(const SelftestOptions& opt) {
  detail::Recorder rec("holonomy");
  std::mt19937_64 rng(opt.seed + 2);
  for (int n = 2; n <= 7; ++n)
    for (int k = 0; k < 40; ++k) {
      const CMatrix M = detail::random_shift(rng, n, k % 2 == 0);
      const CMatrix D = dense_matrix_exp(M);
      rec.within((cyclic_matrix_exp(M) - D).norm() / D.norm(), 1e-11, "cyclic vs dense exponential n=" + std::to_string(n));
    }
  for (int n = 2; n <= 5; ++n) {
    const CyclicGroup g = make_group(n);
    const ZetaLevel zeta = n == 2 ? zeta_from_ab(2, 1.0) : n == 3 ? zeta_from_ab(3, 1.0, 1.5) : default_zeta(n);
    const auto recs = enumerate_fixed_points(g, zeta);
    for (const auto& r : recs)
      for (int b = 0; b < 4; ++b) {
        const SpectrumReport sr = spectrum_check(r.point, detail::random_base(rng), g);
        rec.check(sr.ok, "spectrum at fixed point n=" + std::to_string(n) + ": " + sr.detail);
      }
    FlowOptions fo;
    fo.morse_target = 100.0;
    fo.record_stride = 25;
    const FlowTrajectory traj = numeric_flow(g, zeta, conjecture_sources(recs).front(), fo);
    const BasePoint base = make_base(0.6, 0.8);
    for (std::size_t k = 0; k < traj.samples.size(); k += 4) {
      const QuiverPoint& q = traj.samples[k].point;
      rec.within(representation_defect(holonomy_rep_scaled(q, base, g)), 1e-8, "representation property");
      const SpectrumReport sr = spectrum_check(q, base, g);
      rec.check(sr.ok, "spectrum along flow n=" + std::to_string(n) + ": " + sr.detail);
    }
    const QuiverPoint& q = traj.samples.back().point;
    const BasePoint gb = detail::random_base(rng);
    const GroupElement e = element(g, 1);
    const CMatrix X = parallel_transport_ode(q, transport_path(gb, e, 2000));
    const CMatrix H = holonomy(q, gb, g, 1);
    rec.within((regular_rep(g, 1) * X - H).norm() / H.norm(), 1e-6, "transport vs closed-form holonomy n=" + std::to_string(n));
  }
  return rec.result();
}

inline SuiteResult suite_intertwiner(const SelftestOptions& opt) {
  detail::Recorder rec("intertwiner");
  std::mt19937_64 rng(opt.seed + 3);
  const BasePoint base = make_base(0.6, 0.8);

  const ClosedFormLimit z2 = z2_closed_form_limit(1.0, base);
  CMatrix expect2(2, 2);
  expect2 << 1.0, -1.0, -1.0, 1.0;
  rec.check(z2.trace.converged, "Z2 closed-form limit converges");
  rec.within(max_entry_distance(z2.trace.limit, expect2), 1e-6, "Z2 closed-form limit");

  const CyclicGroup g3 = make_group(3);
  const FlowTrajectory t3 = z3_closed_form_flow(1.0, 1.5, 0.0, Z3Branch::x1, closed_form_times(-1.0, 0.5, 6));
  for (const auto& smp : t3.samples) {
    const HolonomyRep hol = holonomy_rep_scaled(smp.point, base, g3);
    const CMatrix P = schur_intertwiner(hol, random_seed_matrix(rng, 3));
    rec.within(intertwining_residual(hol, P), 1e-8, "intertwining identity");
    const ScaledMatrix<double> Pc = closed_form_P_z3(smp.point, base);
    const CMatrix G = P.fullPivLu().solve(Pc.m);
    const double off = (G - CMatrix(G.diagonal().asDiagonal())).norm() / G.norm();
    rec.within(off, 1e-8, "closed form equals Schur average up to diagonal gauge");
  }

  const CyclicGroup g2 = make_group(2);
  const ZetaLevel zeta2 = zeta_from_ab(2, 1.0);
  VerifyOptions vo;
  vo.rng_seed = opt.seed;
  // The matched irrep depends on the quadrant of (Re v1, Re v2): j = 1 when both
  // are positive, the trivial representation when both are negative.
  for (int k = 0; k < 3; ++k) {
    const BasePoint b = detail::random_base(rng);
    const BasePoint pos{{std::abs(b.v1.real()), b.v1.imag()}, {std::abs(b.v2.real()), b.v2.imag()}};
    const BasePoint neg{-pos.v1, -pos.v2};
    const ConjectureReport rp = verify_conjecture(g2, zeta2, pos, vo);
    rec.check(rp.conjecture_holds && rp.components.size() == 1 && rp.components[0].matched_irrep == 1,
              "Z2 verification, base point with Re v1, Re v2 > 0");
    const ConjectureReport rn = verify_conjecture(g2, zeta2, neg, vo);
    rec.check(!rn.conjecture_holds && rn.components.size() == 1 && rn.components[0].matched_irrep == 0,
              "Z2 verification, base point with Re v1, Re v2 < 0 matches the trivial irrep");
  }
  return rec.result();
}

inline std::vector<SuiteResult> run_selftest(const SelftestOptions& opt = {}) {
  std::vector<SuiteResult> out;
  out.push_back(suite_group_rep());
  out.push_back(suite_quiver(opt));
  out.push_back(suite_fixed_points(opt));
  out.push_back(suite_flow(opt));
  out.push_back(suite_holonomy(opt));
  out.push_back(suite_intertwiner(opt));
  return out;
}

} // namespace mckay

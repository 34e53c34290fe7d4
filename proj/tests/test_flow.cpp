#include "mckay/flow.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mckay;

namespace {

QuiverPoint random_point(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd(0.0, 1.0);
  QuiverPoint q(n);
  for (int i = 0; i < n; ++i) {
    q.alpha(i) = {nd(rng), nd(rng)};
    q.beta(i) = {nd(rng), nd(rng)};
  }
  return q;
}

ZetaLevel level_for(int n) {
  return n == 2 ? zeta_from_ab(2, 1.0) : n == 3 ? zeta_from_ab(3, 1.0, 1.5) : default_zeta(n);
}

// d/dt of the slot balances under flow_vector.
RVector balance_rate(const QuiverPoint& q, const RVector& xi) {
  auto [da, db] = flow_vector(q, xi);
  RVector r(q.n);
  for (int i = 0; i < q.n; ++i)
    r(i) = 2.0 * (std::conj(q.alpha(i)) * da(i)).real() - 2.0 * (std::conj(q.beta(i)) * db(i)).real();
  return r;
}

std::vector<double> linspace(double t0, double t1, int intervals) {
  std::vector<double> ts;
  for (int k = 0; k <= intervals; ++k) ts.push_back(t0 + (t1 - t0) * k / intervals);
  return ts;
}

double relerr(double x, double y) { return std::abs(x - y) / std::max(std::abs(y), 1e-300); }

} // namespace

TEST(FlowVector, ZeroGauge) {
  std::mt19937_64 rng(31);
  const QuiverPoint q = random_point(rng, 4);
  auto [da, db] = flow_vector(q, RVector::Zero(4));
  EXPECT_LT((da - 2.0 * q.alpha).norm() + (db - 2.0 * q.beta).norm(), 1e-15);
}

TEST(FlowVector, DenseCommutatorOracle) {
  std::mt19937_64 rng(32);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int n = 2; n <= 7; ++n)
    for (int trial = 0; trial < 10; ++trial) {
      const QuiverPoint q = random_point(rng, n);
      RVector xi(n);
      for (int j = 0; j < n; ++j) xi(j) = nd(rng);
      auto [A, B] = embed_matrices(q);
      const CMatrix X = xi.cast<cplx>().asDiagonal();
      auto [da, db] = flow_vector(q, xi);
      auto [dA, dB] = embed_matrices(QuiverPoint(da, db));
      EXPECT_LT((dA - (2.0 * A + X * A - A * X)).norm(), 1e-12);
      EXPECT_LT((dB - (2.0 * B + X * B - B * X)).norm(), 1e-12);
    }
}

// ξ keeps the real moment map fixed and sums to zero.
TEST(FlowVector, GaugeSolveConservesLevel) {
  std::mt19937_64 rng(33);
  for (int n = 2; n <= 8; ++n)
    for (int trial = 0; trial < 10; ++trial) {
      const QuiverPoint q = random_point(rng, n);
      const RVector xi = solve_xi(q);
      EXPECT_LT(std::abs(xi.sum()), 1e-12);
      const RVector s = balance_rate(q, xi);
      RVector dm(n);
      for (int v = 0; v < n; ++v) dm(v) = s(v) - s(wrap(v - 1, n));
      EXPECT_LT(dm.cwiseAbs().maxCoeff(), 1e-11 * std::max(1.0, morse_value(q)));
    }
}

// ---------------------------------------------------------------------------
// ℤ₂ closed form

TEST(Z2ClosedForm, Identities) {
  const double a = 1.0, C0 = 1.0;
  for (auto [r, s] : {std::pair{0.6, 0.8}, std::pair{1.0, 0.0}, std::pair{0.0, 1.0}}) {
    const FlowTrajectory tr = z2_closed_form_flow(a, r, s, C0, linspace(-3.0, 3.0, 99));
    ASSERT_EQ(tr.samples.size(), 100u);
    for (const auto& smp : tr.samples) {
      const double S = z2_S(a, C0, smp.t);
      EXPECT_LE(relerr(S * (S + a * a), C0 * std::exp(8.0 * smp.t)), 1e-10);
      EXPECT_LE(relerr(smp.morse, 2.0 * S + a * a), 1e-14);
      // u = 2 + ξ₁ - ξ₀ is the rate coefficient of the α₁ slot. ξ is O(1), so u carries an
      // absolute error of a few ulp of 2; the relative bound applies once u exceeds 1e-5.
      const double u = 2.0 + smp.xi(1) - smp.xi(0), u_exact = 4.0 * S / (2.0 * S + a * a);
      EXPECT_LE(std::abs(u - u_exact), 4e-15) << "t=" << smp.t << " r=" << r;
      if (u_exact > 1e-5) EXPECT_LE(relerr(u, u_exact), 1e-10) << "t=" << smp.t << " r=" << r;
      EXPECT_LE(smp.residual_real, 1e-12 * std::max(1.0, smp.morse));
      EXPECT_LE(smp.residual_complex, 1e-12 * std::max(1.0, smp.morse));
    }
    const TrajectoryCheck chk = check_trajectory(tr);
    EXPECT_TRUE(chk.monotone);
    EXPECT_TRUE(chk.times_increasing);
  }
}

TEST(Z2ClosedForm, ConservedRatio) {
  const double a = 1.0, r = 0.6, s = 0.8;
  const FlowTrajectory tr = z2_closed_form_flow(a, r, s, 1.0, linspace(-3.0, 3.0, 60));
  const double K = r * r / (s * s);
  for (const auto& smp : tr.samples) {
    const double num = std::norm(smp.point.alpha(0)), den = std::norm(smp.point.beta(1));
    EXPECT_LE(relerr(num / den, K), 1e-10);
  }
}

TEST(Z2ClosedForm, SourceLimit) {
  const double a = 1.0, r = 0.6, s = 0.8;
  const FlowTrajectory tr = z2_closed_form_flow(a, r, s, 1.0, {-10.0});
  QuiverPoint src(2);
  src.alpha(0) = r;
  src.beta(1) = s;
  EXPECT_LE(distance(tr.samples[0].point, src), 1e-6);
}

TEST(Z2ClosedForm, ParameterChecks) {
  EXPECT_THROW(z2_closed_form_flow(1.0, 0.5, 0.0, 1.0, {0.0}), invalid_argument);
  EXPECT_THROW(z2_closed_form_flow(1.0, 0.0, 0.0, 1.0, {0.0}), invalid_argument);
  EXPECT_THROW(z2_closed_form_flow(1.0, 0.6, 0.6, 1.0, {0.0}), invalid_argument);
  EXPECT_THROW(z2_closed_form_flow(1.0, 0.6, 0.8, -1.0, {0.0}), invalid_argument);
  EXPECT_THROW(z2_closed_form_flow(0.0, 0.0, 0.0, 1.0, {0.0}), invalid_argument);
}

// ---------------------------------------------------------------------------
// ℤ₃ closed form

TEST(Z3ClosedForm, ImplicitRelationX1) {
  const double a = 1.0, b = 1.5, C0 = 0.3;
  const FlowTrajectory tr = z3_closed_form_flow(a, b, C0, Z3Branch::x1, linspace(-3.0, 3.0, 99));
  for (const auto& smp : tr.samples) {
    const double c = z3_solve_c(12.0 * smp.t + C0, z3_offsets(a, b, Z3Branch::x1));
    const double ec = std::exp(c);
    EXPECT_LE(std::abs(12.0 * smp.t + C0 - (c + std::log(ec + a * a) + std::log(ec + a * a + b * b))), 1e-12);
    // the sample's third edge carries e^c
    EXPECT_LE(relerr(std::norm(smp.point.alpha(2)), ec), 1e-12);
    EXPECT_LE(smp.residual_real, 1e-12 * std::max(1.0, smp.morse));
    EXPECT_EQ(smp.residual_complex, 0.0);
  }
  // below t ≈ -2 consecutive Morse values agree to all 16 digits
  EXPECT_TRUE(check_trajectory(z3_closed_form_flow(a, b, C0, Z3Branch::x1, linspace(-1.5, 3.0, 99))).monotone);
}

// The β-only branch uses offsets (b², 0, a²+b²).
TEST(Z3ClosedForm, ImplicitRelationX2) {
  const double a = 1.0, b = 1.5, C0 = -0.4;
  const FlowTrajectory tr = z3_closed_form_flow(a, b, C0, Z3Branch::x2, linspace(-3.0, 3.0, 99));
  for (const auto& smp : tr.samples) {
    const double ec = std::norm(smp.point.beta(1));
    const double c = std::log(ec);
    EXPECT_LE(std::abs(12.0 * smp.t + C0 - (c + std::log(ec + b * b) + std::log(ec + a * a + b * b))), 1e-11);
    EXPECT_EQ(smp.point.alpha.norm(), 0.0);
    EXPECT_LE(smp.residual_real, 1e-12 * std::max(1.0, smp.morse));
  }
  EXPECT_TRUE(check_trajectory(z3_closed_form_flow(a, b, C0, Z3Branch::x2, linspace(-1.5, 3.0, 99))).monotone);
}

TEST(Z3ClosedForm, SourceLimitAndGauge) {
  const double a = 1.0, b = 1.5;
  const FlowTrajectory tr = z3_closed_form_flow(a, b, 0.0, Z3Branch::x1, {-10.0, -1.0, 0.0, 0.7, 2.0});
  QuiverPoint x1(3);
  x1.alpha << a, std::sqrt(a * a + b * b), 0.0;
  EXPECT_LE(distance(tr.samples[0].point, x1), 1e-6);
  const RVector p = z3_offsets(a, b, Z3Branch::x1);
  for (const auto& smp : tr.samples) {
    const double c = std::log(std::norm(smp.point.alpha(2)));
    const RVector xi = z3_xi_from_relations(c, a, b, Z3Branch::x1);
    EXPECT_LE(std::abs(xi.sum()), 1e-12);
    EXPECT_LE((xi - smp.xi).cwiseAbs().maxCoeff(), 1e-8);
    // ċ = 2(2 + ξ_head - ξ_tail) on the slot carrying e^c (vertex 2 → vertex 0)
    EXPECT_LE(relerr(z3_cdot(c, p), 2.0 * (2.0 + smp.xi(0) - smp.xi(2))), 1e-8);
    EXPECT_GT(z3_cdot(c, p), 0.0);
  }
}

TEST(Z3ClosedForm, RateMatchesFiniteDifference) {
  const double a = 1.0, b = 1.5, h = 1e-4;
  const RVector p = z3_offsets(a, b, Z3Branch::x1);
  for (double t : {-2.0, 0.0, 1.5}) {
    const double cm = z3_solve_c(12.0 * (t - h), p), cp = z3_solve_c(12.0 * (t + h), p), c = z3_solve_c(12.0 * t, p);
    EXPECT_LE(relerr((cp - cm) / (2 * h), z3_cdot(c, p)), 1e-7);
  }
}

TEST(Z3ClosedForm, ParameterChecks) {
  EXPECT_THROW(z3_closed_form_flow(1.0, 1.0, 0.0, Z3Branch::x1, {0.0}), invalid_argument);
  EXPECT_THROW(z3_closed_form_flow(-1.0, 1.5, 0.0, Z3Branch::x1, {0.0}), invalid_argument);
}

// ---------------------------------------------------------------------------
// numeric flow

TEST(NumericFlow, MatchesZ3ClosedForms) {
  const CyclicGroup g = make_group(3);
  const ZetaLevel zeta = zeta_from_ab(3, 1.0, 1.5);
  const auto recs = enumerate_fixed_points(g, zeta);
  for (int k = 0; k < 2; ++k) {
    FlowOptions fo;
    fo.morse_target = 1e6 * 3.25;
    const FlowTrajectory tr = numeric_flow(g, zeta, recs[k], fo);
    EXPECT_EQ(tr.termination, "morse-target");
    const Z3Branch br = k == 0 ? Z3Branch::x1 : Z3Branch::x2;
    EXPECT_LE(closed_form_deviation(tr, ClosedFormZ3{1.0, 1.5, 0.0, br}), 1e-6);
    // the numeric clock covers more than ten time units, like t ∈ [-5, 5] on the closed form
    EXPECT_GT(tr.samples.back().t - tr.samples.front().t, 1.0);
    const TrajectoryCheck chk = check_trajectory(tr);
    EXPECT_LE(chk.max_residual_real, 1e-8);
    EXPECT_LE(chk.max_residual_complex, 1e-8);
    EXPECT_TRUE(chk.monotone);
  }
}

TEST(NumericFlow, MatchesZ2ClosedForm) {
  const CyclicGroup g = make_group(2);
  const ZetaLevel zeta = zeta_from_ab(2, 1.0);
  const FixedPointRecord fam = enumerate_fixed_points(g, zeta)[0];
  for (double th : {pi / 4, 0.3}) {
    const FixedPointRecord src = family_point(fam, th);
    const double r = std::abs(src.point.alpha(0)), s = std::abs(src.point.beta(1));
    const FlowTrajectory tr = numeric_flow(g, zeta, src, FlowOptions{});
    EXPECT_EQ(tr.termination, "morse-target");
    EXPECT_LE(closed_form_deviation(tr, ClosedFormZ2{1.0, r, s, 1.0}), 1e-6);
    EXPECT_LE(check_trajectory(tr).max_residual_real, 1e-8);
    EXPECT_LE(check_trajectory(tr).max_residual_complex, 1e-8);
  }
}

TEST(NumericFlow, InvariantsAllSources) {
  for (int n = 2; n <= 7; ++n) {
    const CyclicGroup g = make_group(n);
    const ZetaLevel zeta = level_for(n);
    for (const auto& src : enumerate_fixed_points(g, zeta)) {
      if (!src.is_family() && src.morse_index == 0) continue;
      FlowOptions fo;
      fo.record_stride = 5;
      const FlowTrajectory tr = numeric_flow(g, zeta, src, fo);
      const TrajectoryCheck chk = check_trajectory(tr);
      EXPECT_LE(chk.max_residual_real, 1e-8) << n << " " << pattern_string(src.pattern);
      EXPECT_LE(chk.max_residual_complex, 1e-8) << n << " " << pattern_string(src.pattern);
      EXPECT_TRUE(chk.monotone);
      EXPECT_TRUE(chk.times_increasing);
    }
  }
}

// Φ grows like e^{4t} once the flow leaves the source region.
TEST(NumericFlow, LateGrowthRateN5) {
  const CyclicGroup g = make_group(5);
  const ZetaLevel zeta = default_zeta(5);
  int escaped = 0;
  for (const auto& src : enumerate_fixed_points(g, zeta)) {
    if (src.morse_index != 2) continue;
    const FlowTrajectory tr = numeric_flow(g, zeta, src, FlowOptions{});
    if (tr.termination != "morse-target") {
      // interior sources stop at another critical point (recorded finding)
      EXPECT_EQ(tr.termination, "critical-point");
      continue;
    }
    ++escaped;
    const auto& s1 = tr.samples[tr.samples.size() - 201];
    const auto& s2 = tr.samples.back();
    const double slope = (std::log(s2.morse) - std::log(s1.morse)) / (s2.t - s1.t);
    EXPECT_NEAR(slope, 4.0, 0.1) << pattern_string(src.pattern);
  }
  EXPECT_GE(escaped, 2);
}

TEST(NumericFlow, FiniteDifferenceVelocity) {
  const CyclicGroup g = make_group(4);
  const ZetaLevel zeta = default_zeta(4);
  const auto sources = enumerate_fixed_points(g, zeta);
  FlowOptions fo;
  fo.h = 1e-3;
  fo.morse_target = 1e4;
  const FlowTrajectory tr = numeric_flow(g, zeta, sources[0], fo);
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < tr.samples.size(); k += 37) {
    const auto& prev = tr.samples[k - 1];
    const auto& next = tr.samples[k + 1];
    const auto& mid = tr.samples[k];
    auto [da, db] = flow_vector(mid.point, mid.xi);
    const double dt = next.t - prev.t;
    const CVector fa = (next.point.alpha - prev.point.alpha) / dt;
    const CVector fb = (next.point.beta - prev.point.beta) / dt;
    const double scale = std::max(1.0, std::sqrt(mid.morse));
    worst = std::max(worst, ((fa - da).norm() + (fb - db).norm()) / scale);
  }
  // central differences are second order: error ~ h² times third derivatives
  EXPECT_LE(worst, 1e-4);
}

// Central-difference velocity residual at a fixed time, under h-halving. The log-coordinate
// RK4 step plus projection is accurate to roundoff here, so the residual is the O(h²)
// truncation of the difference quotient.
TEST(NumericFlow, ConvergenceOrder) {
  const CyclicGroup g = make_group(3);
  const ZetaLevel zeta = default_zeta(3);
  FlowOptions pre;
  pre.morse_target = 40.0;
  const QuiverPoint start = numeric_flow(g, zeta, enumerate_fixed_points(g, zeta)[0], pre).samples.back().point;
  auto residual = [&](double h) {
    FlowOptions fo;
    fo.h = h;
    fo.t_max = 1.0 + h;
    fo.morse_target = 1e12;
    const FlowTrajectory tr = integrate_flow(zeta.values, start, fo);
    const std::size_t k = static_cast<std::size_t>(std::lround(1.0 / h));
    const auto& prev = tr.samples.at(k - 1);
    const auto& next = tr.samples.at(k + 1);
    const auto& mid = tr.samples.at(k);
    EXPECT_NEAR(mid.t, 1.0, 1e-9);
    auto [da, db] = flow_vector(mid.point, mid.xi);
    const double dt = next.t - prev.t;
    return ((next.point.alpha - prev.point.alpha) / dt - da).norm() + ((next.point.beta - prev.point.beta) / dt - db).norm();
  };
  const double e1 = residual(0.02), e2 = residual(0.01), e3 = residual(0.005);
  EXPECT_GE(std::log2(e1 / e2), 1.9) << e1 << " " << e2;
  EXPECT_GE(std::log2(e2 / e3), 1.9) << e2 << " " << e3;
}

TEST(NumericFlow, Errors) {
  const CyclicGroup g = make_group(3);
  const ZetaLevel zeta = zeta_from_ab(3, 1.0, 1.5);
  const auto recs = enumerate_fixed_points(g, zeta);
  EXPECT_THROW(numeric_flow(g, zeta, recs[2], FlowOptions{}), invalid_argument);  // index-0 source
  FlowOptions bad;
  bad.eps = 0.1;
  EXPECT_THROW(numeric_flow(g, zeta, recs[0], bad), invalid_argument);
  bad.eps = 1e-3;
  bad.h = 0.0;
  EXPECT_THROW(numeric_flow(g, zeta, recs[0], bad), invalid_argument);
  EXPECT_THROW(numeric_flow(make_group(4), zeta, recs[0], FlowOptions{}), invalid_argument);
  FlowTrajectory tr;
  EXPECT_THROW(closed_form_deviation(tr, NumericForm{}), invalid_argument);
}

TEST(NumericFlow, Deterministic) {
  const CyclicGroup g = make_group(4);
  const ZetaLevel zeta = default_zeta(4);
  const auto src = enumerate_fixed_points(g, zeta)[0];
  const FlowTrajectory a = numeric_flow(g, zeta, src, FlowOptions{});
  const FlowTrajectory b = numeric_flow(g, zeta, src, FlowOptions{});
  ASSERT_EQ(a.samples.size(), b.samples.size());
  EXPECT_EQ(distance(a.samples.back().point, b.samples.back().point), 0.0);
}

// ---------------------------------------------------------------------------
// phase rotation

TEST(PhaseRotation, Invariance) {
  const FlowTrajectory tr = z3_closed_form_flow(1.0, 1.5, 0.0, Z3Branch::x1, linspace(-2.0, 2.0, 40));
  const FlowTrajectory same = phase_rotate_trajectory(tr, 0.0);
  for (std::size_t k = 0; k < tr.samples.size(); ++k) EXPECT_EQ(distance(same.samples[k].point, tr.samples[k].point), 0.0);
  const FlowTrajectory rot = phase_rotate_trajectory(tr, pi / 3);
  const TrajectoryCheck chk = check_trajectory(rot);
  EXPECT_LE(chk.max_residual_real, 1e-8);
  EXPECT_LE(chk.max_residual_complex, 1e-8);
  EXPECT_TRUE(chk.monotone);
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> ud(0.0, 2 * pi);
  const FlowTrajectory any = phase_rotate_trajectory(tr, ud(rng));
  for (std::size_t k = 0; k < tr.samples.size(); ++k)
    EXPECT_NEAR(morse_value(any.samples[k].point), morse_value(tr.samples[k].point), 1e-12 * tr.samples[k].morse);
}

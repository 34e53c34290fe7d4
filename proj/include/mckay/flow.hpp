#pragma once

#include "mckay/fixed_points.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace mckay {

struct FlowSample {
  double t = 0.0;
  QuiverPoint point;
  RVector xi;
  double morse = 0.0;
  double residual_real = 0.0;
  double residual_complex = 0.0;
};

struct ClosedFormZ2 {
  double a = 1.0, r = 1.0, s = 0.0, C0 = 1.0;
};

enum class Z3Branch { x1, x2 };

struct ClosedFormZ3 {
  double a = 1.0, b = 1.5, C0 = 0.0;
  Z3Branch branch = Z3Branch::x1;
};

struct NumericForm {
  double h = 1e-3, eps = 1e-3;
};

using FlowForm = std::variant<ClosedFormZ2, ClosedFormZ3, NumericForm>;

struct FlowTrajectory {
  std::vector<FlowSample> samples;
  FixedPointRecord source;
  RVector zeta;
  FlowForm form;
  std::string termination;  // "morse-target", "horizon", "critical-point", "closed-form"
};

// Edge-wise form of (2α + [ξ,α], 2β + [ξ,β]).
inline std::pair<CVector, CVector> flow_vector(const QuiverPoint& q, const RVector& xi) {
  const int n = q.n;
  CVector da(n), db(n);
  for (int i = 0; i < n; ++i) {
    const double d = xi(wrap(i + 1, n)) - xi(i);
    da(i) = (2.0 + d) * q.alpha(i);
    db(i) = (2.0 - d) * q.beta(i);
  }
  return {da, db};
}

namespace detail {

// Rows v: 2N_v(x_{v+1} - x_v) - 2N_{v-1}(x_v - x_{v-1}); last row: Σx. Rows are
// scaled by 1/max N so the trace row keeps its weight.
inline Eigen::MatrixXd weighted_cycle_system(const RVector& N, double& row_scale) {
  const int n = static_cast<int>(N.size());
  row_scale = 1.0 / std::max(N.maxCoeff(), std::numeric_limits<double>::min());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n + 1, n);
  for (int v = 0; v < n; ++v) {
    const int up = wrap(v + 1, n), down = wrap(v - 1, n);
    const double a = 2.0 * N(v) * row_scale, b = 2.0 * N(down) * row_scale;
    L(v, up) += a;
    L(v, v) -= a + b;
    L(v, down) += b;
  }
  L.row(n).setOnes();
  return L;
}

inline RVector solve_cycle(const RVector& N, const RVector& rhs) {
  const int n = static_cast<int>(N.size());
  double scale = 1.0;
  Eigen::MatrixXd L = weighted_cycle_system(N, scale);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
  b.head(n) = rhs * scale;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(L);
  return cod.solve(b);
}

} // namespace detail

// ξ making d/dt moment_map_real vanish under flow_vector, with Σξ = 0 and
// minimal norm when the system is rank deficient.
inline RVector solve_xi(const RVector& s, const RVector& N) {
  const int n = static_cast<int>(s.size());
  RVector rhs(n);
  for (int v = 0; v < n; ++v) rhs(v) = -4.0 * (s(v) - s(wrap(v - 1, n)));
  return detail::solve_cycle(N, rhs);
}

inline RVector solve_xi(const QuiverPoint& q) {
  return solve_xi(slot_balance(q), (q.alpha.cwiseAbs2() + q.beta.cwiseAbs2()).eval());
}

// Edge magnitudes in log form. When every slot carries both edges all products
// α_iβ_i share one modulus e^P, which the flow multiplies by e^{4t}; keeping P
// as a single number preserves the complex moment map exactly.
struct LogState {
  int n = 0;
  bool product_mode = false;
  std::vector<char> a_on, b_on;
  RVector la, lb, pa, pb;
  double P = 0.0;

  double log_beta(int i) const { return product_mode ? P - la(i) : lb(i); }

  RVector balance() const {
    RVector s(n);
    for (int i = 0; i < n; ++i)
      s(i) = (a_on[i] ? std::exp(2.0 * la(i)) : 0.0) - (b_on[i] ? std::exp(2.0 * log_beta(i)) : 0.0);
    return s;
  }

  RVector weights() const {
    RVector N(n);
    for (int i = 0; i < n; ++i)
      N(i) = (a_on[i] ? std::exp(2.0 * la(i)) : 0.0) + (b_on[i] ? std::exp(2.0 * log_beta(i)) : 0.0);
    return N;
  }

  QuiverPoint point() const {
    QuiverPoint q(n);
    for (int i = 0; i < n; ++i) {
      if (a_on[i]) q.alpha(i) = std::polar(std::exp(la(i)), pa(i));
      if (b_on[i]) q.beta(i) = std::polar(std::exp(log_beta(i)), pb(i));
    }
    return q;
  }

  static LogState from_point(const QuiverPoint& q) {
    LogState st;
    st.n = q.n;
    st.a_on.assign(q.n, 0);
    st.b_on.assign(q.n, 0);
    st.la = st.lb = st.pa = st.pb = RVector::Zero(q.n);
    int both = 0;
    for (int i = 0; i < q.n; ++i) {
      st.a_on[i] = q.alpha(i) != cplx(0.0);
      st.b_on[i] = q.beta(i) != cplx(0.0);
      if (st.a_on[i]) {
        st.la(i) = std::log(std::abs(q.alpha(i)));
        st.pa(i) = std::arg(q.alpha(i));
      }
      if (st.b_on[i]) {
        st.lb(i) = std::log(std::abs(q.beta(i)));
        st.pb(i) = std::arg(q.beta(i));
      }
      both += st.a_on[i] && st.b_on[i];
    }
    if (both == q.n) {
      st.product_mode = true;
      st.P = (st.la + st.lb).mean();
    } else if (both > 0) {
      throw invalid_argument("point is off the complex moment level: some but not all slots carry both edges");
    }
    return st;
  }
};

namespace detail {

inline int active_count(const LogState& st) {
  int k = 0;
  for (int i = 0; i < st.n; ++i) k += st.a_on[i] + (st.product_mode ? 0 : st.b_on[i]);
  return k;
}

inline RVector pack(const LogState& st) {
  RVector y(active_count(st));
  int k = 0;
  for (int i = 0; i < st.n; ++i)
    if (st.a_on[i]) y(k++) = st.la(i);
  if (!st.product_mode)
    for (int i = 0; i < st.n; ++i)
      if (st.b_on[i]) y(k++) = st.lb(i);
  return y;
}

inline void unpack(LogState& st, const RVector& y) {
  int k = 0;
  for (int i = 0; i < st.n; ++i)
    if (st.a_on[i]) st.la(i) = y(k++);
  if (!st.product_mode)
    for (int i = 0; i < st.n; ++i)
      if (st.b_on[i]) st.lb(i) = y(k++);
}

inline RVector log_velocity(const LogState& st, RVector* xi_out = nullptr) {
  RVector xi = solve_xi(st.balance(), st.weights());
  RVector v(active_count(st));
  int k = 0;
  for (int i = 0; i < st.n; ++i)
    if (st.a_on[i]) v(k++) = 2.0 + xi(wrap(i + 1, st.n)) - xi(i);
  if (!st.product_mode)
    for (int i = 0; i < st.n; ++i)
      if (st.b_on[i]) v(k++) = 2.0 - (xi(wrap(i + 1, st.n)) - xi(i));
  if (xi_out) *xi_out = xi;
  return v;
}

inline double morse_rate(const LogState& st, const RVector& v) {
  double phi = 0.0, dphi = 0.0;
  int k = 0;
  for (int i = 0; i < st.n; ++i)
    if (st.a_on[i]) {
      const double e = std::exp(2.0 * st.la(i));
      phi += e;
      dphi += 2.0 * e * v(k++);
    }
  if (st.product_mode) {
    for (int i = 0; i < st.n; ++i) {
      const double e = std::exp(2.0 * st.log_beta(i));
      phi += e;
      dphi += 2.0 * e * (4.0 - v(i));
    }
  } else {
    for (int i = 0; i < st.n; ++i)
      if (st.b_on[i]) {
        const double e = std::exp(2.0 * st.lb(i));
        phi += e;
        dphi += 2.0 * e * v(k++);
      }
  }
  return phi > 0 ? dphi / phi : 0.0;
}

} // namespace detail

// Newton iteration on a positive-real gauge g (Σg = 0) restoring moment_map_real = ζ.
inline void project_to_level(LogState& st, const RVector& zeta, int max_iter = 20) {
  const int n = st.n;
  auto residual = [&](RVector& F) {
    RVector s = st.balance();
    F.resize(n);
    for (int v = 0; v < n; ++v) F(v) = s(v) - s(wrap(v - 1, n)) - zeta(v);
    return F.cwiseAbs().maxCoeff();
  };
  RVector F;
  double res = residual(F);
  const double eps = std::numeric_limits<double>::epsilon();
  for (int it = 0; it <= max_iter; ++it) {
    const double floor_tol = std::max(1e-10, 32.0 * eps * st.weights().maxCoeff());
    if (res <= 1e-10) return;
    if (it == max_iter) {
      if (res <= floor_tol) return;
      throw numeric_failure("projection failure: Newton correction did not reach the moment level in " +
                            std::to_string(max_iter) + " iterations (residual " + std::to_string(res) + ")");
    }
    // δs_i = 2N_i(g_{i+1} - g_i): the Jacobian is the same weighted cycle matrix.
    RVector g = detail::solve_cycle(st.weights(), -F);
    LogState trial = st;
    for (int i = 0; i < n; ++i) {
      const double d = g(wrap(i + 1, n)) - g(i);
      trial.la(i) += d;
      if (!st.product_mode) trial.lb(i) -= d;
    }
    std::swap(trial, st);
    RVector F2;
    const double res2 = residual(F2);
    if (!(res2 < res) && res <= floor_tol) {
      std::swap(trial, st);  // rounding floor reached; keep the better iterate
      return;
    }
    F = F2;
    res = res2;
  }
}

inline FlowSample make_sample(double t, const QuiverPoint& q, const RVector& zeta, const RVector* xi = nullptr) {
  FlowSample smp;
  smp.t = t;
  smp.point = q;
  smp.xi = xi ? *xi : solve_xi(q);
  smp.morse = morse_value(q);
  smp.residual_real = (moment_map_real(q) - zeta).cwiseAbs().maxCoeff();
  smp.residual_complex = moment_map_complex(q).cwiseAbs().maxCoeff();
  return smp;
}

// Start point of the unstable manifold. At a single-cut point the cut slot gets
// the edge type of positive tangent weight; on the open even-n family every slot
// gets the complementary edge with a common product.
inline QuiverPoint seed_unstable(const FixedPointRecord& src, double eps) {
  QuiverPoint q = src.point;
  const int n = q.n;
  std::vector<int> zero_slots;
  for (int i = 0; i < n; ++i)
    if (q.alpha(i) == cplx(0.0) && q.beta(i) == cplx(0.0)) zero_slots.push_back(i);
  if (zero_slots.empty()) {
    double smallest = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) smallest = std::min(smallest, std::abs(q.alpha(i) + q.beta(i)));
    const cplx product = eps * smallest;
    for (int i = 0; i < n; ++i) {
      if (q.alpha(i) != cplx(0.0) && q.beta(i) != cplx(0.0))
        throw invalid_argument("source is not a fixed point: slot carries both edges");
      if (q.alpha(i) != cplx(0.0)) q.beta(i) = product / q.alpha(i);
      else q.alpha(i) = product / q.beta(i);
    }
    return q;
  }
  if (zero_slots.size() > 1) throw invalid_argument("source has more than one empty slot; no single unstable direction");
  int d = 0;
  for (int i = 0; i < n; ++i) d += q.alpha(i) != cplx(0.0) ? 1 : q.beta(i) != cplx(0.0) ? -1 : 0;
  const int c = zero_slots.front();
  if (d > 0) q.alpha(c) = eps;
  else if (d < 0) q.beta(c) = eps;
  else throw invalid_argument("source is a local minimum of the Morse function (no unstable direction)");
  return q;
}

struct FlowOptions {
  double eps = 1e-3;
  double h = 1e-3;
  double t_max = 40.0;
  double morse_target = 0.0;  // 0: 1e6·‖ζ‖∞
  int record_stride = 1;
  double critical_rate = 1e-9;
};

// Fourth-order Runge-Kutta in log-magnitude coordinates followed by projection.
inline FlowTrajectory integrate_flow(const RVector& zeta, const QuiverPoint& start, const FlowOptions& opt,
                                     double t0 = 0.0) {
  if (!(opt.h > 0)) throw invalid_argument("step size must be positive");
  if (start.n != zeta.size()) throw invalid_argument("point and zeta sizes differ");
  FlowTrajectory traj;
  traj.zeta = zeta;
  traj.form = NumericForm{opt.h, opt.eps};
  const double target = opt.morse_target > 0 ? opt.morse_target : 1e6 * std::max(1.0, zeta_scale(zeta));

  LogState st = LogState::from_point(start);
  project_to_level(st, zeta);
  double t = t0;
  RVector xi;
  detail::log_velocity(st, &xi);
  traj.samples.push_back(make_sample(t, st.point(), zeta, &xi));
  double phi = traj.samples.back().morse;
  const double h = opt.h;
  long step = 0;
  traj.termination = "horizon";
  while (t < t0 + opt.t_max - 1e-12 * opt.t_max) {
    RVector y = detail::pack(st);
    LogState stage = st;
    auto eval = [&](const RVector& yy, double dt) {
      stage = st;
      stage.P = st.P + 4.0 * dt;
      detail::unpack(stage, yy);
      return detail::log_velocity(stage);
    };
    const RVector k1 = eval(y, 0.0);
    const RVector k2 = eval(y + 0.5 * h * k1, 0.5 * h);
    const RVector k3 = eval(y + 0.5 * h * k2, 0.5 * h);
    const RVector k4 = eval(y + h * k3, h);
    LogState next = st;
    next.P = st.P + 4.0 * h;
    detail::unpack(next, y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    project_to_level(next, zeta);
    const RVector v = detail::log_velocity(next, &xi);
    const double rate = detail::morse_rate(next, v);
    const QuiverPoint q = next.point();
    const double phi_next = morse_value(q);
    t = t0 + (++step) * h;
    if (!(phi_next > phi)) {
      if (rate < 1e-6) {
        traj.termination = "critical-point";
        break;
      }
      throw numeric_failure("flow-direction error: Morse value decreased at t=" + std::to_string(t));
    }
    st = next;
    phi = phi_next;
    const bool done = phi >= target;
    const bool stalled = rate < opt.critical_rate;
    if (step % std::max(1, opt.record_stride) == 0 || done || stalled) traj.samples.push_back(make_sample(t, q, zeta, &xi));
    if (done) {
      traj.termination = "morse-target";
      break;
    }
    if (stalled) {
      traj.termination = "critical-point";
      break;
    }
  }
  return traj;
}

inline FlowTrajectory numeric_flow(const CyclicGroup& g, const ZetaLevel& zeta, const FixedPointRecord& source,
                                   const FlowOptions& opt) {
  if (source.point.n != g.n || zeta.n() != g.n) throw invalid_argument("size mismatch between group, zeta and source");
  if (!(opt.eps > 0 && opt.eps <= 1e-3)) throw invalid_argument("perturbation must lie in (0, 1e-3]");
  FlowTrajectory traj = integrate_flow(zeta.values, seed_unstable(source, opt.eps), opt);
  traj.source = source;
  return traj;
}

inline FlowTrajectory numeric_flow(const CyclicGroup& g, const ZetaLevel& zeta, const FixedPointRecord& source,
                                   double eps, double h, double t_max) {
  FlowOptions opt;
  opt.eps = eps;
  opt.h = h;
  opt.t_max = t_max;
  return numeric_flow(g, zeta, source, opt);
}

inline FlowTrajectory phase_rotate_trajectory(const FlowTrajectory& traj, double phi) {
  FlowTrajectory out = traj;
  for (auto& smp : out.samples) smp.point = circle_act(smp.point, phi);
  return out;
}

// ---------------------------------------------------------------------------
// ℤ₂ closed form.

// Stable root of S(S + a²) = C₀e^{8t}.
inline double z2_S(double a, double C0, double t) {
  const double rhs = C0 * std::exp(8.0 * t);
  const double a2 = a * a;
  return 2.0 * rhs / (a2 + std::sqrt(a2 * a2 + 4.0 * rhs));
}

inline QuiverPoint z2_point(double a, double r, double s, double S) {
  const double a2 = a * a;
  const double e1 = r * r * S / a2;  // e^{c₁} = KS/(K+1)
  const double e2 = s * s * S / a2;  // e^{c₂} = e^{c₃} = S/(K+1)
  QuiverPoint q(2);
  q.alpha << std::sqrt(e1 + r * r), std::sqrt(e1 + e2 - e2);
  q.beta << std::sqrt(e2), std::sqrt(e2 + s * s);
  return q;
}

inline void check_z2_params(double a, double r, double s, double C0) {
  if (!(a > 0) || r < 0 || s < 0 || !(C0 > 0)) throw invalid_argument("z2 closed form needs a > 0, r, s >= 0, C0 > 0");
  if (r == 0 && s == 0) throw invalid_argument("z2 closed form: r and s cannot both vanish");
  if (s == 0 && std::abs(r - a) > 1e-12 * a) throw invalid_argument("inconsistent parameters: s = 0 requires r = a");
  if (r == 0 && std::abs(s - a) > 1e-12 * a) throw invalid_argument("inconsistent parameters: r = 0 requires s = a");
  if (std::abs(r * r + s * s - a * a) > 1e-10 * a * a) throw invalid_argument("inconsistent parameters: r² + s² must equal a²");
}

inline FlowTrajectory z2_closed_form_flow(double a, double r, double s, double C0, const std::vector<double>& times) {
  check_z2_params(a, r, s, C0);
  RVector zeta(2);
  zeta << a * a, -a * a;
  FlowTrajectory traj;
  traj.zeta = zeta;
  traj.form = ClosedFormZ2{a, r, s, C0};
  traj.termination = "closed-form";
  FixedPointRecord src;
  src.point = QuiverPoint(2);
  src.point.alpha(0) = r;
  src.point.beta(1) = s;
  src.pattern = {EdgeTag::alpha, EdgeTag::beta};
  traj.source = src;
  for (double t : times) traj.samples.push_back(make_sample(t, z2_point(a, r, s, z2_S(a, C0, t)), zeta));
  return traj;
}

// ---------------------------------------------------------------------------
// ℤ₃ closed form: single-direction branches with squared edges e^c + p_j.

inline RVector z3_offsets(double a, double b, Z3Branch br) {
  RVector p(3);
  if (br == Z3Branch::x1) p << a * a, a * a + b * b, 0.0;
  else p << b * b, 0.0, a * a + b * b;
  return p;
}

// ln(e^c + p) without overflow or cancellation.
inline double log_sum_exp_offset(double c, double p) {
  if (p <= 0) return c;
  const double lp = std::log(p);
  return c > lp ? c + std::log1p(p * std::exp(-c)) : lp + std::log1p(std::exp(c - lp));
}

// Σ_j ln(e^c + p_j); for x₁ this is c + ln(e^c + a²) + ln(e^c + a² + b²).
inline double z3_implicit_rhs(double c, const RVector& p) {
  double s = 0.0;
  for (int j = 0; j < p.size(); ++j) s += log_sum_exp_offset(c, p(j));
  return s;
}

inline double z3_solve_c(double target, const RVector& p) {
  // The right side has slope in (1, 3], so |F(c0)| bounds the distance to the root.
  double guess = target;
  for (int j = 0; j < p.size(); ++j)
    if (p(j) > 0) guess -= std::log(p(j));
  auto F = [&](double c) { return z3_implicit_rhs(c, p) - target; };
  const double f0 = F(guess);
  double lo = guess - std::abs(f0) - 1.0, hi = guess + std::abs(f0) + 1.0;
  std::uintmax_t iters = 200;
  auto tol = boost::math::tools::eps_tolerance<double>(52);
  std::pair<double, double> br;
  try {
    br = boost::math::tools::toms748_solve(F, lo, hi, tol, iters);
  } catch (const std::exception& e) {
    throw numeric_failure(std::string("z3 root finder failed in bracket [") + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]: " + e.what());
  }
  double c = 0.5 * (br.first + br.second);
  // Newton polish: F'(c) = Σ e^c/(e^c + p_j).
  for (int k = 0; k < 3; ++k) {
    double dF = 0.0;
    for (int j = 0; j < p.size(); ++j) dF += 1.0 / (1.0 + p(j) * std::exp(-c));
    const double step = F(c) / dF;
    if (!std::isfinite(step)) break;
    c -= step;
  }
  if (std::abs(F(c)) > 1e-12) throw numeric_failure("z3 root finder did not converge (residual " + std::to_string(F(c)) + ")");
  return c;
}

inline QuiverPoint z3_point(double a, double b, Z3Branch br, double ec) {
  const RVector p = z3_offsets(a, b, br);
  QuiverPoint q(3);
  for (int j = 0; j < 3; ++j) {
    const double v = std::sqrt(ec + p(j));
    if (br == Z3Branch::x1) q.alpha(j) = v;
    else q.beta(j) = v;
  }
  return q;
}

// ċ = 12 / Σ_j 1/(1 + p_j e^{-c}).
inline double z3_cdot(double c, const RVector& p) {
  double s = 0.0;
  for (int j = 0; j < p.size(); ++j) s += 1.0 / (1.0 + p(j) * std::exp(-c));
  return 12.0 / s;
}

// Slot coefficients 2 ± (ξ_{i+1} - ξ_i) = ċe^c/(2(e^c + p_i)) and the ξ they determine (Σξ = 0).
inline RVector z3_xi_from_relations(double c, double a, double b, Z3Branch br) {
  const RVector p = z3_offsets(a, b, br);
  const double cd = z3_cdot(c, p);
  RVector d(3);
  for (int i = 0; i < 3; ++i) {
    const double coef = 0.5 * cd / (1.0 + p(i) * std::exp(-c));
    d(i) = br == Z3Branch::x1 ? coef - 2.0 : 2.0 - coef;
  }
  RVector xi(3);
  xi(0) = 0.0;
  xi(1) = d(0);
  xi(2) = d(0) + d(1);
  xi.array() -= xi.mean();
  return xi;
}

inline FlowTrajectory z3_closed_form_flow(double a, double b, double C0, Z3Branch br, const std::vector<double>& times) {
  if (!(a > 0 && b > 0)) throw invalid_argument("z3 closed form needs a, b > 0");
  if (std::abs(a - b) <= 1e-12 * std::max(a, b)) throw invalid_argument("z3 closed form needs |a| != |b|");
  RVector zeta(3);
  zeta << a * a, b * b, -a * a - b * b;
  const RVector p = z3_offsets(a, b, br);
  FlowTrajectory traj;
  traj.zeta = zeta;
  traj.form = ClosedFormZ3{a, b, C0, br};
  traj.termination = "closed-form";
  traj.source.point = z3_point(a, b, br, 0.0);
  traj.source.pattern = pattern_of(traj.source.point);
  traj.source.cut_slot = br == Z3Branch::x1 ? 2 : 1;
  for (double t : times) {
    const double c = z3_solve_c(12.0 * t + C0, p);
    traj.samples.push_back(make_sample(t, z3_point(a, b, br, std::exp(c)), zeta));
  }
  return traj;
}

// Closed-form time and point with a given Morse value (alignment by morse_value).
inline double z3_time_at_morse(double a, double b, double C0, Z3Branch br, double morse) {
  const RVector p = z3_offsets(a, b, br);
  const double ec = (morse - p.sum()) / 3.0;
  if (!(ec > 0)) throw invalid_argument("Morse value below the source level");
  return (z3_implicit_rhs(std::log(ec), p) - C0) / 12.0;
}

inline double z2_time_at_morse(double a, double C0, double morse) {
  const double S = 0.5 * (morse - a * a);
  if (!(S > 0)) throw invalid_argument("Morse value below the source level");
  return std::log(S * (S + a * a) / C0) / 8.0;
}

// Largest edge-magnitude deviation of a trajectory from the closed-form curve,
// with both aligned by Morse value. Samples at or below the source level are skipped.
inline double closed_form_deviation(const FlowTrajectory& traj, const FlowForm& form) {
  double dev = 0.0;
  auto compare = [&](const QuiverPoint& q, const QuiverPoint& ref) {
    dev = std::max(dev, (q.alpha.cwiseAbs() - ref.alpha.cwiseAbs()).cwiseAbs().maxCoeff());
    dev = std::max(dev, (q.beta.cwiseAbs() - ref.beta.cwiseAbs()).cwiseAbs().maxCoeff());
  };
  if (const auto* z2 = std::get_if<ClosedFormZ2>(&form)) {
    check_z2_params(z2->a, z2->r, z2->s, z2->C0);
    for (const auto& smp : traj.samples) {
      const double S = 0.5 * (smp.morse - z2->a * z2->a);
      if (S > 0) compare(smp.point, z2_point(z2->a, z2->r, z2->s, S));
    }
    return dev;
  }
  if (const auto* z3 = std::get_if<ClosedFormZ3>(&form)) {
    const RVector p = z3_offsets(z3->a, z3->b, z3->branch);
    for (const auto& smp : traj.samples) {
      const double ec = (smp.morse - p.sum()) / 3.0;
      if (ec > 0) compare(smp.point, z3_point(z3->a, z3->b, z3->branch, ec));
    }
    return dev;
  }
  throw invalid_argument("closed_form_deviation needs a closed-form description");
}

// ---------------------------------------------------------------------------

struct TrajectoryCheck {
  double max_residual_real = 0.0;
  double max_residual_complex = 0.0;
  bool monotone = true;
  bool times_increasing = true;
};

inline TrajectoryCheck check_trajectory(const FlowTrajectory& traj) {
  TrajectoryCheck c;
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    const auto& s = traj.samples[k];
    const double rr = (moment_map_real(s.point) - traj.zeta).cwiseAbs().maxCoeff();
    const double rc = moment_map_complex(s.point).cwiseAbs().maxCoeff();
    c.max_residual_real = std::max(c.max_residual_real, rr);
    c.max_residual_complex = std::max(c.max_residual_complex, rc);
    if (k > 0) {
      c.monotone = c.monotone && morse_value(s.point) > morse_value(traj.samples[k - 1].point);
      c.times_increasing = c.times_increasing && s.t > traj.samples[k - 1].t;
    }
  }
  return c;
}

} // namespace mckay

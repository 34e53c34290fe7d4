#pragma once

#include "mckay/quiver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace mckay {

enum class EdgeTag { alpha, beta, zero };

inline char tag_char(EdgeTag t) { return t == EdgeTag::alpha ? 'a' : t == EdgeTag::beta ? 'b' : '0'; }

using EdgePattern = std::vector<EdgeTag>;

inline std::string pattern_string(const EdgePattern& p) {
  std::string s;
  for (EdgeTag t : p) s += tag_char(t);
  return s;
}

// The even-n index-0 component: slot balances s = offsets + τ with
// τ in [tau_lo, tau_hi]. θ in [0, π/2] maps to τ = tau_lo + (tau_hi - tau_lo)cos²θ,
// which for n = 2 is r = a·cos θ, s = a·sin θ.
struct FamilyInfo {
  RVector offsets;
  double tau_lo = 0.0;
  double tau_hi = 0.0;
};

struct FixedPointRecord {
  EdgePattern pattern;
  QuiverPoint point;
  int morse_index = -1;
  std::optional<double> family_param;
  IVector weights;
  std::optional<int> cut_slot;  // storage index of the slot with α = β = 0
  std::optional<FamilyInfo> family;

  bool is_family() const { return family.has_value(); }
};

inline EdgePattern pattern_from_balance(const RVector& s, std::optional<int> cut) {
  EdgePattern p(s.size());
  for (int i = 0; i < s.size(); ++i)
    p[i] = (cut && *cut == i) ? EdgeTag::zero : (s(i) > 0 ? EdgeTag::alpha : EdgeTag::beta);
  return p;
}

inline QuiverPoint point_from_balance(const RVector& s, const EdgePattern& p) {
  QuiverPoint q(static_cast<int>(s.size()));
  for (int i = 0; i < q.n; ++i) {
    if (p[i] == EdgeTag::alpha) q.alpha(i) = std::sqrt(std::max(0.0, s(i)));
    if (p[i] == EdgeTag::beta) q.beta(i) = std::sqrt(std::max(0.0, -s(i)));
  }
  return q;
}

inline EdgePattern pattern_of(const QuiverPoint& q) {
  EdgePattern p(q.n);
  for (int i = 0; i < q.n; ++i) {
    const bool a = q.alpha(i) != cplx(0.0), b = q.beta(i) != cplx(0.0);
    if (a && b) throw invalid_argument("slot " + std::to_string(i + 1) + " carries both alpha and beta");
    p[i] = a ? EdgeTag::alpha : b ? EdgeTag::beta : EdgeTag::zero;
  }
  return p;
}

// Integer vertex weights with w_{i+1} - w_i = +1 across α slots and -1 across β
// slots; normalized to min 0.
inline IVector weight_vector(const EdgePattern& p) {
  const int n = static_cast<int>(p.size());
  if (std::all_of(p.begin(), p.end(), [](EdgeTag t) { return t == EdgeTag::zero; }))
    throw invalid_argument("no weight assignment: pattern has no nonzero edge");
  // Walk from the vertex after a zero slot (or vertex 0 when the cycle is closed).
  int start = 0;
  for (int i = 0; i < n; ++i)
    if (p[i] == EdgeTag::zero) {
      start = wrap(i + 1, n);
      break;
    }
  IVector w = IVector::Zero(n);
  std::vector<bool> seen(n, false);
  seen[start] = true;
  for (int k = 0; k < n; ++k) {
    const int i = wrap(start + k, n);
    const int next = wrap(i + 1, n);
    if (p[i] == EdgeTag::zero) {
      if (!seen[next]) {
        w(next) = w(i);
        seen[next] = true;
      }
      continue;
    }
    const int step = p[i] == EdgeTag::alpha ? 1 : -1;
    if (seen[next] && k == n - 1) {
      if (w(next) != w(i) + step)
        throw invalid_argument("no weight assignment: closed cycle " + pattern_string(p) + " is unbalanced");
      continue;
    }
    w(next) = w(i) + step;
    seen[next] = true;
  }
  return (w.array() - w.minCoeff()).matrix();
}

inline IVector weight_vector(const FixedPointRecord& r) { return weight_vector(r.pattern); }

// Tangent S¹-weights (1 + D, 1 - D) at a single-cut point, D = #α - #β.
inline std::pair<int, int> tangent_weights(const FixedPointRecord& r) {
  int d = 0;
  for (EdgeTag t : r.pattern) d += t == EdgeTag::alpha ? 1 : t == EdgeTag::beta ? -1 : 0;
  return {1 + d, 1 - d};
}

inline int alpha_beta_excess(const EdgePattern& p) {
  int d = 0;
  for (EdgeTag t : p) d += t == EdgeTag::alpha ? 1 : t == EdgeTag::beta ? -1 : 0;
  return d;
}

// Slot balances telescoped from s_cut = 0 using s_v - s_{v-1} = ζ_v.
inline RVector telescoped_balance(const RVector& zeta, int cut) {
  const int n = static_cast<int>(zeta.size());
  RVector s = RVector::Zero(n);
  for (int k = 1; k < n; ++k) {
    const int v = wrap(cut + k, n);
    s(v) = s(wrap(v - 1, n)) + zeta(v);
  }
  return s;
}

inline FixedPointRecord family_point(const FixedPointRecord& fam, double theta) {
  if (!fam.family) throw invalid_argument("record is not a family");
  const FamilyInfo& f = *fam.family;
  const double c = std::cos(theta);
  const double tau = f.tau_lo + (f.tau_hi - f.tau_lo) * c * c;
  RVector s = (f.offsets.array() + tau).matrix();
  FixedPointRecord r = fam;
  // Interior points keep the open pattern; endpoints lose one edge.
  const double tol = 1e-14 * std::max(1.0, s.cwiseAbs().maxCoeff());
  for (int i = 0; i < s.size(); ++i)
    if (std::abs(s(i)) <= tol) s(i) = 0.0;
  r.point = point_from_balance(s, fam.pattern);
  r.family_param = theta;
  return r;
}

inline void classify_index(std::vector<FixedPointRecord>& recs) {
  if (recs.empty()) return;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : recs) best = std::min(best, morse_value(r.point));
  const double tol = 1e-10 * std::max(1.0, best);
  int minima = 0;
  for (auto& r : recs) {
    const bool low = morse_value(r.point) <= best + tol;
    r.morse_index = low ? 0 : 2;
    minima += low ? 1 : 0;
  }
  if (minima > 1) throw degenerate_input("ambiguous index classification: several records attain the minimal Morse value");
}

inline std::vector<FixedPointRecord> enumerate_fixed_points(const CyclicGroup& g, const ZetaLevel& zeta) {
  const int n = g.n;
  if (zeta.n() != n) throw invalid_argument("zeta length does not match group order");
  const RVector& z = zeta.values;
  const double tol = 1e-12 * std::max(1.0, zeta_scale(z));
  std::vector<FixedPointRecord> out;
  // Descending cut order lists the ℤ₃ points as x₁, x₂, x₃.
  for (int cut = n - 1; cut >= 0; --cut) {
    RVector s = telescoped_balance(z, cut);
    for (int k = 1; k < n; ++k) {
      const int v = wrap(cut + k, n);
      if (std::abs(s(v)) <= tol)
        throw degenerate_input("degenerate zeta: partial sum of zeta over vertices " + std::to_string(wrap(cut + 1, n)) +
                               ".." + std::to_string(v) + " (cyclic) vanishes");
    }
    FixedPointRecord r;
    r.pattern = pattern_from_balance(s, cut);
    const int d = alpha_beta_excess(r.pattern);
    if (n % 2 == 0 && std::abs(d) == 1) continue;  // endpoint of the index-0 family
    r.point = point_from_balance(s, r.pattern);
    r.weights = weight_vector(r.pattern);
    r.cut_slot = cut;
    out.push_back(std::move(r));
  }
  if (n % 2 == 0) {
    RVector p = telescoped_balance(z, 0);
    std::vector<double> sorted(p.data(), p.data() + n);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    FamilyInfo f{p, -sorted[n / 2 - 1], -sorted[n / 2]};
    if (!(f.tau_hi > f.tau_lo + tol)) throw degenerate_input("degenerate zeta: the index-0 family collapses");
    FixedPointRecord r;
    const double mid = 0.5 * (f.tau_lo + f.tau_hi);
    r.pattern = pattern_from_balance((p.array() + mid).matrix(), std::nullopt);
    r.weights = weight_vector(r.pattern);
    r.family = f;
    r = family_point(r, pi / 4);
    out.push_back(std::move(r));
  }
  classify_index(out);
  return out;
}

// Exhaustive search over 3^n edge patterns, solving the moment equations for the
// squared magnitudes with a generic least-squares solver.
inline std::vector<FixedPointRecord> brute_force_fixed_points(const CyclicGroup& g, const ZetaLevel& zeta) {
  const int n = g.n;
  if (n > 12) throw invalid_argument("brute force search is limited to n <= 12");
  if (zeta.n() != n) throw invalid_argument("zeta length does not match group order");
  const RVector& z = zeta.values;
  const double scale = std::max(1.0, zeta_scale(z));
  long total = 1;
  for (int i = 0; i < n; ++i) total *= 3;

  std::vector<FixedPointRecord> isolated, families;
  for (long code = 0; code < total; ++code) {
    EdgePattern p(n);
    long c = code;
    for (int i = 0; i < n; ++i, c /= 3) p[i] = static_cast<EdgeTag>(c % 3);
    std::vector<int> slots;
    for (int i = 0; i < n; ++i)
      if (p[i] != EdgeTag::zero) slots.push_back(i);
    const int k = static_cast<int>(slots.size());
    if (k == 0) continue;
    // S¹-fixed only if the weights close up around a zero-free cycle.
    IVector w;
    try {
      w = weight_vector(p);
    } catch (const invalid_argument&) {
      continue;
    }
    // Rows: vertices v, columns: unknown x_i = |edge_i|², s_i = σ_i x_i.
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, k);
    for (int col = 0; col < k; ++col) {
      const int i = slots[col];
      const double sigma = p[i] == EdgeTag::alpha ? 1.0 : -1.0;
      M(i, col) += sigma;
      M(wrap(i + 1, n), col) -= sigma;
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(M);
    Eigen::VectorXd x = cod.solve(z);
    if ((M * x - z).norm() > 1e-9 * scale) continue;
    const long rank = cod.rank();
    if (rank == k) {
      if ((x.array() <= 1e-12 * scale).any()) continue;
      RVector s = RVector::Zero(n);
      for (int col = 0; col < k; ++col) s(slots[col]) = (p[slots[col]] == EdgeTag::alpha ? 1 : -1) * x(col);
      FixedPointRecord r;
      r.pattern = p;
      r.point = point_from_balance(s, p);
      r.weights = w;
      for (int i = 0; i < n; ++i)
        if (p[i] == EdgeTag::zero) r.cut_slot = i;
      isolated.push_back(std::move(r));
    } else if (rank == k - 1) {
      // One-parameter solution set x + t·y; keep it if some t makes all x positive.
      Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
      Eigen::VectorXd y = lu.kernel().col(0);
      double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
      for (int col = 0; col < k; ++col) {
        if (std::abs(y(col)) < 1e-14) {
          if (x(col) <= 0) lo = hi = 0;
          continue;
        }
        const double t = -x(col) / y(col);
        if (y(col) > 0) lo = std::max(lo, t);
        else hi = std::min(hi, t);
      }
      if (!(hi > lo + 1e-12 * scale)) continue;
      // Express as balances s = offsets + τ with offsets at the midpoint.
      RVector s = RVector::Zero(n);
      const double tm = 0.5 * (lo + hi);
      for (int col = 0; col < k; ++col) s(slots[col]) = (p[slots[col]] == EdgeTag::alpha ? 1 : -1) * (x(col) + tm * y(col));
      // τ shift per unit t is σ_i y_i (identical for all slots).
      const int i0 = slots[0];
      const double dtau = (p[i0] == EdgeTag::alpha ? 1 : -1) * y(0);
      FamilyInfo f;
      f.offsets = s;
      const double a = (lo - tm) * dtau, b = (hi - tm) * dtau;
      f.tau_lo = std::min(a, b);
      f.tau_hi = std::max(a, b);
      FixedPointRecord r;
      r.pattern = p;
      r.weights = w;
      r.family = f;
      families.push_back(family_point(r, pi / 4));
    }
  }
  // Drop isolated solutions lying on the closure of a family.
  std::vector<FixedPointRecord> out;
  for (auto& r : isolated) {
    bool on_family = false;
    for (const auto& f : families)
      for (double th : {0.0, pi / 2})
        if (distance(family_point(f, th).point, r.point) <= 1e-9 * std::sqrt(scale)) on_family = true;
    if (!on_family) out.push_back(std::move(r));
  }
  for (auto& f : families) out.push_back(std::move(f));
  classify_index(out);
  return out;
}

} // namespace mckay

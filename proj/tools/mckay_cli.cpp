// mckay_cli: fixed points, flows, holonomy and the correspondence check for Z_n in SU(2).

#include "mckay/mckay.hpp"
#include "mckay/selftest.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace mckay;

namespace {

enum Exit { ok = 0, usage = 1, degenerate = 2, numeric = 3, conjecture_false = 4 };

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (...) {
    throw invalid_argument("not a number: '" + s + "'");
  }
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  if (pos != s.size()) throw invalid_argument("not a number: '" + s + "'");
  return v;
}

// "a=1,b=1.5" for n = 2, 3, or an explicit vector "1,2,-3" (brackets optional).
ZetaLevel parse_zeta(int n, const std::string& spec) {
  if (spec.empty()) {
    if (n == 2) return zeta_from_ab(2, 1.0);
    if (n == 3) return zeta_from_ab(3, 1.0, 1.5);
    return default_zeta(n);
  }
  if (spec.find('=') != std::string::npos) {
    std::optional<double> a, b;
    for (const auto& part : split(spec, ',')) {
      const auto eq = part.find('=');
      if (eq == std::string::npos) throw invalid_argument("zeta spec: expected key=value, got '" + part + "'");
      const std::string key = part.substr(0, eq);
      const double v = parse_double(part.substr(eq + 1));
      if (key == "a") a = v;
      else if (key == "b") b = v;
      else throw invalid_argument("zeta spec: unknown key '" + key + "'");
    }
    if (!a) throw invalid_argument("zeta spec: missing a");
    if (n == 2 && b) throw invalid_argument("zeta spec: n=2 takes only a");
    return zeta_from_ab(n, *a, b);
  }
  std::string body = spec;
  if (!body.empty() && body.front() == '[') body = body.substr(1);
  if (!body.empty() && body.back() == ']') body.pop_back();
  std::vector<double> vals;
  for (const auto& part : split(body, ',')) vals.push_back(parse_double(part));
  if (static_cast<int>(vals.size()) != n)
    throw invalid_argument("zeta has " + std::to_string(vals.size()) + " entries but n=" + std::to_string(n));
  return make_zeta(Eigen::Map<RVector>(vals.data(), n));
}

BasePoint parse_base(const std::string& spec) {
  const auto parts = split(spec, ',');
  if (parts.size() != 4) throw invalid_argument("base point is v1re,v1im,v2re,v2im");
  std::vector<double> v;
  for (const auto& p : parts) v.push_back(parse_double(p));
  return make_base({v[0], v[1]}, {v[2], v[3]});
}

void warn(const ZetaLevel& z) {
  for (const auto& w : z.warnings) std::cerr << "warning: " << w << '\n';
}

std::string read_point_arg(const std::string& arg) {
  if (!arg.empty() && arg.front() == '@') {
    std::ifstream in(arg.substr(1));
    if (!in) throw invalid_argument("cannot read point file " + arg.substr(1));
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  }
  return arg;
}

struct Common {
  int n = 0;
  std::string zeta;
};

int cmd_fixed_points(const Common& c) {
  const CyclicGroup g = make_group(c.n);
  const ZetaLevel zeta = parse_zeta(c.n, c.zeta);
  warn(zeta);
  const auto recs = enumerate_fixed_points(g, zeta);
  std::cout << fixed_points_json(zeta, recs).dump(2) << '\n';
  return ok;
}

struct FlowArgs {
  int source = -1;
  double eps = 1e-3, step = 1e-3, t_max = 40.0, morse_target = 0.0;
  std::optional<double> family_param;
  bool closed_form = false;
  int samples = 400, stride = 1;
  std::string output;
};

// Closed-form description for an enumerated source, when the level allows one.
std::optional<FlowForm> closed_form_for(const ZetaLevel& zeta, const FixedPointRecord& src) {
  const RVector& z = zeta.values;
  if (z.size() == 2 && z(0) > 0) {
    const double a = std::sqrt(z(0));
    const QuiverPoint& q = src.point;
    if (std::abs(q.alpha(1)) == 0.0 && std::abs(q.beta(0)) == 0.0)
      return ClosedFormZ2{a, std::abs(q.alpha(0)), std::abs(q.beta(1)), 1.0};
  }
  if (z.size() == 3 && z(0) > 0 && z(1) > 0) {
    const double a = std::sqrt(z(0)), b = std::sqrt(z(1));
    if (std::abs(a - b) <= 1e-12 * std::max(a, b)) return std::nullopt;
    for (Z3Branch br : {Z3Branch::x1, Z3Branch::x2})
      if (distance(z3_point(a, b, br, 0.0), src.point) <= 1e-9 * std::max(1.0, std::sqrt(morse_value(src.point))))
        return ClosedFormZ3{a, b, 0.0, br};
  }
  return std::nullopt;
}

FlowTrajectory closed_form_trajectory(const FlowForm& form, double target, int samples) {
  if (const auto* z2 = std::get_if<ClosedFormZ2>(&form)) {
    const double t1 = z2_time_at_morse(z2->a, z2->C0, target);
    return z2_closed_form_flow(z2->a, z2->r, z2->s, z2->C0, closed_form_times(t1 - 6.0, t1, samples));
  }
  const auto& z3 = std::get<ClosedFormZ3>(form);
  const double t1 = z3_time_at_morse(z3.a, z3.b, z3.C0, z3.branch, target);
  return z3_closed_form_flow(z3.a, z3.b, z3.C0, z3.branch, closed_form_times(t1 - 3.0, t1, samples));
}

int cmd_flow(const Common& c, const FlowArgs& f) {
  const CyclicGroup g = make_group(c.n);
  const ZetaLevel zeta = parse_zeta(c.n, c.zeta);
  warn(zeta);
  const auto recs = enumerate_fixed_points(g, zeta);
  if (f.source < 0 || f.source >= static_cast<int>(recs.size()))
    throw invalid_argument("source index " + std::to_string(f.source) + " does not name a fixed point (there are " +
                           std::to_string(recs.size()) + ")");
  FixedPointRecord src = recs[f.source];
  if (f.family_param) {
    if (!src.is_family()) throw invalid_argument("--family-param applies only to the family component");
    if (*f.family_param < 0 || *f.family_param > pi / 2) throw invalid_argument("family parameter must lie in [0, pi/2]");
    src = family_point(src, *f.family_param);
  }
  const double target = f.morse_target > 0 ? f.morse_target : 1e6 * std::max(1.0, zeta_scale(zeta.values));
  const auto form = closed_form_for(zeta, src);

  FlowTrajectory traj;
  if (f.closed_form) {
    if (!form) throw invalid_argument("no closed form for this source (closed forms exist for n=2 and for n=3 with a != b)");
    traj = closed_form_trajectory(*form, target, f.samples);
  } else {
    FlowOptions opt;
    opt.eps = f.eps;
    opt.h = f.step;
    opt.t_max = f.t_max;
    opt.morse_target = target;
    opt.record_stride = f.stride;
    traj = numeric_flow(g, zeta, src, opt);
  }

  if (f.output.empty()) {
    write_trajectory_csv(std::cout, traj);
  } else {
    std::ofstream out(f.output);
    if (!out) throw invalid_argument("cannot open output file " + f.output);
    write_trajectory_csv(out, traj);
  }

  const TrajectoryCheck chk = check_trajectory(traj);
  std::cerr << "termination: " << traj.termination << ", samples: " << traj.samples.size()
            << ", final Morse value: " << fmt_double(traj.samples.back().morse)
            << ", max residuals: " << fmt_double(chk.max_residual_real) << " (real) "
            << fmt_double(chk.max_residual_complex) << " (complex)\n";
  if (!f.closed_form && form)
    std::cerr << "closed-form deviation (aligned by Morse value): " << fmt_double(closed_form_deviation(traj, *form)) << '\n';
  if (chk.max_residual_real > 1e-8 || chk.max_residual_complex > 1e-8 || !chk.monotone) {
    std::cerr << "error: trajectory invariants violated\n";
    return numeric;
  }
  return ok;
}

struct HolonomyArgs {
  std::string point;
  std::string base = "0.6,0,0.8,0";
  int gamma = 1;
};

int cmd_holonomy(const Common& c, const HolonomyArgs& h) {
  const QuiverPoint q = point_from_string(read_point_arg(h.point));
  if (c.n != 0 && c.n != q.n) throw invalid_argument("--n does not match the point");
  const CyclicGroup g = make_group(q.n);
  const BasePoint b = parse_base(h.base);
  const CMatrix H = holonomy(q, b, g, h.gamma);
  json j;
  j["n"] = q.n;
  j["gamma"] = h.gamma;
  j["base"] = to_json(b);
  j["point"] = to_json(q);
  j["flatness_residual"] = flatness_residual(q);
  j["exponent_norm"] = holonomy_exponent(q, b, element(g, h.gamma)).norm();
  j["matrix"] = matrix_json(H);
  std::cout << j.dump(2) << '\n';
  return ok;
}

struct VerifyArgs {
  std::string base = "0.6,0,0.8,0";
  double tol = 1e-6, match_tol = 1e-4, t_max = 40.0, step = 1e-3;
  std::uint64_t seed = 1;
};

int cmd_verify(const Common& c, const VerifyArgs& v) {
  const CyclicGroup g = make_group(c.n);
  const ZetaLevel zeta = parse_zeta(c.n, c.zeta);
  warn(zeta);
  VerifyOptions opt;
  opt.limit_tol = v.tol;
  opt.match_tol = v.match_tol;
  opt.flow.t_max = v.t_max;
  opt.flow.h = v.step;
  opt.rng_seed = v.seed;
  const ConjectureReport rep = verify_conjecture(g, zeta, parse_base(v.base), opt);
  json j = to_json(rep);
  j["warnings"] = zeta.warnings;
  std::cout << j.dump(2) << '\n';
  return rep.conjecture_holds ? ok : conjecture_false;
}

int cmd_selftest(std::uint64_t seed, const std::string& fault) {
  SelftestOptions opt;
  opt.seed = seed;
  if (fault == "moment-sign") opt.flip_moment_sign = true;
  else if (!fault.empty()) throw invalid_argument("unknown fault '" + fault + "' (known: moment-sign)");
  int failed = 0;
  for (const SuiteResult& r : run_selftest(opt)) {
    std::cout << r.name << ": " << (r.passed() ? "PASS" : "FAIL") << " (" << r.checks << " checks";
    if (!r.passed()) std::cout << ", " << r.failures << " failed; first: " << r.first_failure;
    std::cout << ")\n";
    failed += !r.passed();
  }
  std::cout << (failed ? "selftest FAILED" : "selftest passed") << '\n';
  return failed ? numeric : ok;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixed points, gradient flows, holonomy and intertwiner limits on the Z_n quiver variety"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub, bool need_n) {
    auto* opt = sub->add_option("--n", common.n, "group order n >= 2");
    if (need_n) opt->required();
    sub->add_option("--zeta-spec,--zeta", common.zeta,
                    "level: \"a=1,b=1.5\" (n=2: a only) or an explicit vector \"z0,...,z(n-1)\" summing to 0");
  };

  auto* fp = app.add_subcommand("fixed-points", "enumerate circle-fixed points as JSON");
  add_common(fp, true);

  FlowArgs fa;
  auto* fl = app.add_subcommand("flow", "integrate the upward gradient flow from a fixed point; CSV output");
  add_common(fl, true);
  fl->add_option("--source-index", fa.source, "index into the fixed-points list")->required();
  fl->add_option("--eps", fa.eps, "unstable-direction perturbation, in (0, 1e-3]");
  fl->add_option("--step", fa.step, "RK4 step size");
  fl->add_option("--t-max", fa.t_max, "integration horizon");
  fl->add_option("--morse-target", fa.morse_target, "stop at this Morse value (default 1e6*max(1,|zeta|_inf))");
  fl->add_option("--stride", fa.stride, "record every k-th step");
  fl->add_option("--samples", fa.samples, "number of closed-form samples");
  fl->add_option("--family-param", fa.family_param, "point on the even-n index-0 family, theta in [0, pi/2]");
  auto* cf = fl->add_flag("--closed-form", fa.closed_form, "use the closed-form solution (n=2, or n=3 with a != b)");
  bool numeric_flag = false;
  fl->add_flag("--numeric", numeric_flag, "numeric integration (default)")->excludes(cf);
  fl->add_option("--output,-o", fa.output, "CSV file (default: standard output)");

  HolonomyArgs ha;
  auto* ho = app.add_subcommand("holonomy", "holonomy matrix of a flat point as JSON");
  ho->add_option("--n", common.n, "group order (checked against the point)");
  ho->add_option("--point", ha.point, "point JSON {\"n\":..,\"alpha\":[[re,im],..],\"beta\":[..]} or @file")->required();
  ho->add_option("--base", ha.base, "base point v1re,v1im,v2re,v2im on the unit sphere");
  ho->add_option("--gamma", ha.gamma, "group element exponent m");

  VerifyArgs va;
  auto* vc = app.add_subcommand("verify-conjecture", "flow every H2 component to infinity and match intertwiner limits to irreps");
  add_common(vc, true);
  vc->add_option("--base", va.base, "base point v1re,v1im,v2re,v2im on the unit sphere");
  vc->add_option("--tol", va.tol, "limit convergence tolerance");
  vc->add_option("--match-tol", va.match_tol, "irrep match tolerance");
  vc->add_option("--t-max", va.t_max, "integration horizon per component");
  vc->add_option("--step", va.step, "RK4 step size");
  vc->add_option("--seed", va.seed, "seed for the group-averaging seeds");

  std::uint64_t st_seed = 1;
  std::string fault;
  auto* st = app.add_subcommand("selftest", "run the invariant suites of all modules");
  st->add_option("--seed", st_seed, "random seed");
  st->add_option("--inject-fault", fault, "mutation smoke test: moment-sign");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return usage;
  }

  try {
    if (*fp) return cmd_fixed_points(common);
    if (*fl) return cmd_flow(common, fa);
    if (*ho) return cmd_holonomy(common, ha);
    if (*vc) return cmd_verify(common, va);
    if (*st) return cmd_selftest(st_seed, fault);
  } catch (const mckay::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usage;
  } catch (const degenerate_input& e) {
    std::cerr << "error: " << e.what() << '\n';
    return degenerate;
  } catch (const numeric_failure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return numeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return numeric;
  }
  return usage;
}

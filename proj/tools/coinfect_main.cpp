// Command-line front end: scenario classification, branch tracing, Hopf
// scanning, direct simulation, and an invariant-verification mode, all from
// a JSON parameter file. Outputs are deterministic for a fixed config+seed.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "coinfect/io.hpp"
#include "coinfect/parallel.hpp"
#include "coinfect/version.hpp"

namespace fs = std::filesystem;
using namespace coinfect;

namespace {

struct CommonOpts {
  std::string params_path;
  double K = -1.0;
  std::string K_range;  // min:max:steps
  std::string out_dir = ".";
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  std::uint64_t seed = 1;
  int jobs = 0;
  bool include_R = false;
  std::string initial;  // S:I1:I2:I12[:R]
  double t_end = 1000.0;
  int n_samples = 1001;
};

struct KRange {
  double lo = 0, hi = 0;
  int steps = 0;
};

KRange parse_k_range(const std::string& s) {
  KRange r;
  char c1 = 0, c2 = 0;
  std::istringstream is(s);
  if (!(is >> r.lo >> c1 >> r.hi >> c2 >> r.steps) || c1 != ':' || c2 != ':' ||
      !(0 < r.lo && r.lo < r.hi) || r.steps < 2) {
    throw ValidationError("bad --K-range, expected min:max:steps with 0 < min < max");
  }
  return r;
}

State parse_initial(const std::string& s) {
  State y;
  double v[5] = {0, 0, 0, 0, 0};
  std::istringstream is(s);
  int n = 0;
  char c = 0;
  while (n < 5 && (is >> v[n])) {
    ++n;
    if (!(is >> c)) break;
  }
  if (n < 4) throw ValidationError("bad --initial, expected S:I1:I2:I12[:R]");
  y.S = v[0];
  y.I1 = v[1];
  y.I2 = v[2];
  y.I12 = v[3];
  y.R = v[4];
  return y;
}

std::string config_string(const CommonOpts& o, const std::string& extra = "") {
  std::ostringstream os;
  os << "params=" << o.params_path << ";K=" << io::fmt(o.K) << ";K_range=" << o.K_range
     << ";rel_tol=" << io::fmt(o.rel_tol) << ";abs_tol=" << io::fmt(o.abs_tol)
     << ";include_R=" << (o.include_R ? 1 : 0) << ";" << extra;
  return os.str();
}

io::RunMeta make_meta(const std::string& command, const CommonOpts& o, const ModelParams& p,
                      const std::string& extra = "") {
  io::RunMeta m;
  m.command = command;
  m.params = p;
  m.seed = o.seed;
  m.config = config_string(o, extra);
  return m;
}

void emit(const CommonOpts& o, const std::string& name, const std::string& content) {
  fs::create_directories(o.out_dir);
  const std::string path = (fs::path(o.out_dir) / name).string();
  io::write_file(path, content);
  std::cout << "wrote " << path << "\n";
}

// All admissible equilibria (boundary + interior) at K.
std::vector<Equilibrium> all_equilibria(const ModelParams& p, double K) {
  std::vector<Equilibrium> eqs = boundary_equilibria(p, K);
  for (Equilibrium& g : solve_coexistence(p, K)) eqs.push_back(g);
  return eqs;
}

int cmd_derive(const CommonOpts& o, const ModelParams& p) {
  const DerivedQuantities d = derive(p);
  const auto checks = validate_standing_assumptions(p, d);
  emit(o, "derive.json", io::derived_to_json(d, checks, make_meta("derive", o, p)));
  return 0;
}

int cmd_equilibria(const CommonOpts& o, const ModelParams& p) {
  const double K = o.K > 0 ? o.K : p.K;
  const auto eqs = all_equilibria(p, K);
  std::vector<StabilityReport> reps;
  reps.reserve(eqs.size());
  for (const Equilibrium& e : eqs) reps.push_back(classify(e, p, K));
  emit(o, "equilibria.json",
       io::equilibria_to_json(eqs, reps, K, make_meta("equilibria", o, p)));
  return 0;
}

int cmd_scenario(const CommonOpts& o, const ModelParams& p) {
  const Scenario sc = classify_scenario(p);
  emit(o, "scenario.json", io::scenario_to_json(sc, make_meta("scenario", o, p)));
  return 0;
}

int cmd_branch(const CommonOpts& o, const ModelParams& p) {
  const KRange kr = parse_k_range(o.K_range.empty() ? "0.1:" + io::fmt(p.K) + ":2000" : o.K_range);
  StepPolicy pol;
  pol.n_steps = kr.steps;
  const Branch br = trace(p, kr.lo, kr.hi, pol);
  const io::RunMeta meta = make_meta("branch", o, p);
  emit(o, "branch.csv", io::branch_to_csv(br, meta));
  emit(o, "branch_events.json", io::events_to_json(br, meta));
  return 0;
}

int cmd_hopf(const CommonOpts& o, const ModelParams& p) {
  if (o.K_range.empty()) throw ValidationError("hopf requires --K-range");
  const KRange kr = parse_k_range(o.K_range);
  const HopfResult hr = hopf_scan(p, kr.lo, kr.hi, kr.steps);
  emit(o, "hopf.json", io::hopf_to_json(hr, make_meta("hopf", o, p)));
  return 0;
}

int cmd_simulate(CommonOpts& o, const ModelParams& p) {
  const double K = o.K > 0 ? o.K : p.K;
  const ModelParams pk = with_K(p, K);
  State y0;
  if (!o.initial.empty()) {
    y0 = parse_initial(o.initial);
  } else {
    // default start: the locally stable equilibrium at K, nudged by 1%
    const auto eqs = all_equilibria(pk, K);
    bool found = false;
    for (const Equilibrium& e : eqs) {
      if (classify(e, pk, K).classification == Stability::Stable) {
        y0 = e.point;
        found = true;
        break;
      }
    }
    if (!found) throw NumericalError("no stable equilibrium at K to seed the simulation");
    y0.S *= 1.01;
    y0.I1 *= 1.01;
    y0.I2 *= 1.01;
    y0.I12 *= 1.01;
    std::ostringstream os;
    os << io::fmt(y0.S) << ':' << io::fmt(y0.I1) << ':' << io::fmt(y0.I2) << ':'
       << io::fmt(y0.I12) << ':' << io::fmt(y0.R);
    o.initial = os.str();  // resolved default, recorded in the config
  }
  IntegrateOptions opts;
  opts.rel_tol = o.rel_tol;
  opts.abs_tol = o.abs_tol;
  opts.include_R = o.include_R;
  opts.n_samples = o.n_samples;
  const Trajectory tr = integrate(pk, y0, o.t_end, opts);
  const std::string extra = "initial=" + o.initial + ";t_end=" + io::fmt(o.t_end) +
                            ";n_samples=" + std::to_string(o.n_samples);
  emit(o, "trajectory.csv", io::trajectory_to_csv(tr, make_meta("simulate", o, pk, extra)));
  return 0;
}

// ---------------------------------------------------------------------------
// verify: run the invariant suite against the given parameter set.

struct Verifier {
  int failures = 0;
  void check(const std::string& name, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "[ok]   " : "[FAIL] ") << name;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << "\n";
    if (!ok) ++failures;
  }
};

bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

int cmd_verify(const CommonOpts& o, const ModelParams& p) {
  Verifier v;
  const DerivedQuantities d = derive(p);

  v.check("identity alpha2*A1 = alpha3*A3 + alpha1*A2",
          rel_close(p.alpha2 * d.A1, p.alpha3 * d.A3 + p.alpha1 * d.A2, 1e-12));
  v.check("identity eta1*-eta2* vs determinant form",
          rel_close(d.eta1star - d.eta2star,
                    (d.deltaAlpha * d.sigma3 - d.deltaMu) * p.alpha3 / (p.r * d.A1 * d.A2),
                    1e-10));
  v.check("deltaMu > sigma1*deltaAlpha and sigma2*deltaAlpha",
          d.deltaMu > d.sigma1 * d.deltaAlpha && d.deltaMu > d.sigma2 * d.deltaAlpha);
  v.check("sigma2*(deltaAlpha+gamma2*alpha3) < deltaMu+gamma2*mu3",
          d.sigma2 * (d.deltaAlpha + p.gamma2 * p.alpha3) < d.deltaMu + p.gamma2 * p.mu3);

  const Thresholds th = thresholds(p);
  if (th.Shat1 && th.Shat2) {
    const double lhs = *th.Shat1 - *th.Shat2;
    const double rhs = d.gammabar * p.r * d.A1 * d.A2 * (d.eta1star - d.eta2star) /
                       ((d.deltaAlpha - p.gamma1 * p.alpha3) * (d.deltaAlpha + p.gamma2 * p.alpha3));
    v.check("identity Shat1 - Shat2", rel_close(lhs, rhs, 1e-10));
  }

  const KRange kr = parse_k_range(o.K_range.empty() ? "0.2:" + io::fmt(std::max(2.0 * p.K, 1.0)) +
                                                          ":120"
                                                    : o.K_range);
  std::optional<Scenario> sc;
  try {
    sc = classify_scenario(p);
  } catch (const ValidationError& e) {
    v.check("scenario classification", false, e.what());
  }

  bool residuals_ok = true, detb_ok = true, unique_ok = true, windows_ok = true;
  std::vector<double> g8_S, g8_I12, g8_K;
  for (int i = 0; i <= kr.steps; ++i) {
    const double K = kr.lo + (kr.hi - kr.lo) * i / kr.steps;
    const auto eqs = all_equilibria(p, K);
    int stable_count = 0;
    bool near_threshold = false;
    if (sc) {
      for (const PredictedTransition& tr : sc->predicted) {
        if (std::abs(K - tr.K) <= 1e-6 * K) near_threshold = true;
      }
    }
    for (const Equilibrium& e : eqs) {
      const double norm = std::max({1.0, e.point.S, e.point.I1, e.point.I2, e.point.I12});
      if (e.residual > 1e-10 * norm) residuals_ok = false;
      const StabilityReport rep = classify(e, p, K);
      if (rep.classification == Stability::Stable) ++stable_count;
      if (rep.window_agrees && !*rep.window_agrees) windows_ok = false;
      if (e.type == EqType::G8) {
        const ModelParams pk = with_K(p, K);
        const double detB = interior_matrix_B(e.point, pk).determinant();
        if (!rel_close(detB * e.point.I12, dPdS_at(p, K, e.point.S), 1e-8)) detb_ok = false;
        g8_K.push_back(K);
        g8_S.push_back(e.point.S);
        g8_I12.push_back(e.point.I12);
      }
    }
    if (sc && !near_threshold && stable_count != 1) unique_ok = false;
  }
  v.check("equilibrium residuals <= 1e-10 over K grid", residuals_ok);
  v.check("det(B)*I12 = dP/dS at coexistence points", detb_ok);
  v.check("closed-form windows agree with eigenvalue verdicts", windows_ok);
  if (sc) v.check("exactly one locally stable equilibrium per K", unique_ok);
  bool monotone = true;
  for (std::size_t i = 1; i < g8_S.size(); ++i) {
    if (g8_K[i] > g8_K[i - 1] && !(g8_S[i] < g8_S[i - 1] && g8_I12[i] < g8_I12[i - 1])) {
      monotone = false;
    }
  }
  v.check("S and I12 strictly decreasing along the coexistence run", monotone);

  std::cout << (v.failures == 0 ? "verify: all invariants hold\n"
                                : "verify: " + std::to_string(v.failures) + " failure(s)\n");
  return v.failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"equilibrium-branch analysis of a two-strain coinfection model"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  CommonOpts o;
  auto add_common = [&](CLI::App* sub, bool needs_params = true) {
    auto* opt = sub->add_option("--params", o.params_path, "JSON parameter file");
    if (needs_params) opt->required();
    sub->add_option("--K", o.K, "carrying capacity override");
    sub->add_option("--K-range", o.K_range, "min:max:steps");
    sub->add_option("--out", o.out_dir, "output directory");
    sub->add_option("--rel-tol", o.rel_tol, "relative tolerance");
    sub->add_option("--abs-tol", o.abs_tol, "absolute tolerance");
    sub->add_option("--seed", o.seed, "RNG seed for sampling operations");
    sub->add_option("--jobs", o.jobs, "worker cap for parallel kernels (0 = default)");
    sub->add_flag("--include-R", o.include_R, "integrate the removed class too");
  };

  CLI::App* c_derive = app.add_subcommand("derive", "derived quantities + assumption report");
  add_common(c_derive);
  CLI::App* c_eq = app.add_subcommand("equilibria", "admissible equilibria at K");
  add_common(c_eq);
  CLI::App* c_scen = app.add_subcommand("scenario", "scenario tag and predicted transitions");
  add_common(c_scen);
  CLI::App* c_branch = app.add_subcommand("branch", "trace the stable branch over a K range");
  add_common(c_branch);
  CLI::App* c_hopf = app.add_subcommand("hopf", "locate a Hopf onset in a K range");
  add_common(c_hopf);
  CLI::App* c_sim = app.add_subcommand("simulate", "integrate the ODE system");
  add_common(c_sim);
  c_sim->add_option("--initial", o.initial, "initial state S:I1:I2:I12[:R]");
  c_sim->add_option("--t-end", o.t_end, "integration horizon");
  c_sim->add_option("--n-samples", o.n_samples, "output sample count");
  CLI::App* c_verify = app.add_subcommand("verify", "run the invariant suite");
  add_common(c_verify);

  CLI11_PARSE(app, argc, argv);

  try {
    par::set_jobs(o.jobs);
    const ModelParams p = params_from_json_file(o.params_path);
    if (c_derive->parsed()) return cmd_derive(o, p);
    if (c_eq->parsed()) return cmd_equilibria(o, p);
    if (c_scen->parsed()) return cmd_scenario(o, p);
    if (c_branch->parsed()) return cmd_branch(o, p);
    if (c_hopf->parsed()) return cmd_hopf(o, p);
    if (c_sim->parsed()) return cmd_simulate(o, p);
    if (c_verify->parsed()) return cmd_verify(o, p);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

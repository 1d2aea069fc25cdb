#include "coinfect/branch.hpp"

#include <algorithm>
#include <cmath>

#include "coinfect/parallel.hpp"

namespace coinfect {

const char* to_string(ScenarioTag t) {
  switch (t) {
    case ScenarioTag::I: return "i";
    case ScenarioTag::II: return "ii";
    case ScenarioTag::III: return "iii";
    case ScenarioTag::IV: return "iv";
  }
  return "?";
}

State boundary_point(EqType t, const ModelParams& p, double K) {
  const DerivedQuantities d = derive(p);
  switch (t) {
    case EqType::G1: return State{};
    case EqType::G2: return State{K, 0, 0, 0, 0};
    case EqType::G3: return State{d.sigma1, p.r * (K - d.sigma1) / (K * p.alpha1), 0, 0, 0};
    case EqType::G4: return State{d.sigma2, 0, p.r * (K - d.sigma2) / (K * p.alpha2), 0, 0};
    case EqType::G5: return State{d.sigma3, 0, 0, p.r * (K - d.sigma3) / (K * p.alpha3), 0};
    case EqType::G6: {
      const double Sstar = K * (1.0 - 1.0 / d.eta1star);
      return State{Sstar, p.alpha3 * (d.sigma3 - Sstar) / p.eta1, 0,
                   p.alpha1 * (Sstar - d.sigma1) / p.eta1, 0};
    }
    case EqType::G7: {
      const double Sstar = K * (1.0 - 1.0 / d.eta2star);
      return State{Sstar, 0, p.alpha3 * (d.sigma3 - Sstar) / p.eta2,
                   p.alpha2 * (Sstar - d.sigma2) / p.eta2, 0};
    }
    case EqType::G8: break;
  }
  throw ValidationError("boundary_point: interior type has no closed form");
}

Scenario classify_scenario(const ModelParams& p) {
  const DerivedQuantities d = derive(p);
  if (!(d.gammastar < 1.0)) {
    throw AssumptionViolation("gammastar_lt_1", "gamma* = " + std::to_string(d.gammastar));
  }
  const Thresholds th = thresholds(p);
  Scenario sc;
  if (d.eta1star <= 1.0) {
    sc.tag = ScenarioTag::I;
    sc.predicted = {{d.sigma1, EqType::G2, EqType::G3}};
    return sc;
  }
  if (d.eta2star >= d.eta1star) {
    sc.tag = ScenarioTag::II;
    const double f1 = d.eta1star / (d.eta1star - 1.0);
    sc.predicted = {{d.sigma1, EqType::G2, EqType::G3},
                    {*th.K_G3_to_G6, EqType::G3, EqType::G6},
                    {d.sigma3 * f1, EqType::G6, EqType::G5}};
    return sc;
  }
  // coexistence scenarios require the gamma1 bound and Assumption II
  if (!(p.gamma1 * p.alpha3 < d.deltaAlpha)) {
    throw AssumptionViolation("gamma1_lt_deltaAlpha_over_alpha3",
                              "gamma1*alpha3 = " + std::to_string(p.gamma1 * p.alpha3));
  }
  if (!th.Khat1) throw ValidationError("Khat1 undefined despite eta1* > 1");
  if (!(dPdS_at(p, *th.Khat1, *th.Shat1) > 0.0)) throw AssumptionIIFailure(*th.Khat1);
  sc.predicted = {{d.sigma1, EqType::G2, EqType::G3},
                  {*th.K_G3_to_G6, EqType::G3, EqType::G6},
                  {*th.Khat1, EqType::G6, EqType::G8}};
  if (d.eta2star > 1.0) {
    sc.tag = ScenarioTag::III;
    if (!th.Khat2) throw ValidationError("Khat2 undefined despite eta2* > 1");
    if (!(dPdS_at(p, *th.Khat2, *th.Shat2) > 0.0)) throw AssumptionIIFailure(*th.Khat2);
    sc.predicted.push_back({*th.Khat2, EqType::G8, EqType::G7});
    sc.predicted.push_back({*th.K_G7_to_G5, EqType::G7, EqType::G5});
  } else {
    sc.tag = ScenarioTag::IV;
  }
  return sc;
}

namespace {

EqType chain_type(const Scenario& sc, double K) {
  EqType t = EqType::G2;
  for (const PredictedTransition& tr : sc.predicted) {
    if (K > tr.K) {
      t = tr.to;
    } else {
      break;
    }
  }
  return t;
}

std::vector<double> build_grid(double K_min, double K_max, const StepPolicy& pol,
                               const std::vector<PredictedTransition>& predicted) {
  std::vector<double> g;
  const int n = std::max(2, pol.n_steps);
  g.reserve(static_cast<std::size_t>(n) + 64);
  for (int i = 0; i <= n; ++i) g.push_back(K_min + (K_max - K_min) * i / n);
  for (const PredictedTransition& tr : predicted) {
    if (tr.K <= K_min || tr.K >= K_max) continue;
    for (double side : {-1.0, 1.0}) {
      for (double dist = pol.floor_rel * tr.K; dist < pol.refine_radius * tr.K; dist *= 2.0) {
        const double k = tr.K + side * dist;
        if (k > K_min && k < K_max) g.push_back(k);
      }
    }
  }
  for (double k : pol.must_hit) {
    if (k >= K_min && k <= K_max) g.push_back(k);
  }
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end(),
                      [](double a, double b) { return std::abs(a - b) <= 1e-13 * std::max(a, b); }),
          g.end());
  return g;
}

// Admissibility interval of a boundary type (for clamping probe brackets).
std::pair<double, double> admissible_K(EqType t, const DerivedQuantities& d) {
  const double inf = std::numeric_limits<double>::infinity();
  switch (t) {
    case EqType::G2: return {0.0, inf};
    case EqType::G3: return {d.sigma1, inf};
    case EqType::G5: return {d.sigma3, inf};
    case EqType::G6: {
      const double f = d.eta1star / (d.eta1star - 1.0);
      return {d.sigma1 * f, d.sigma3 * f};
    }
    case EqType::G7: {
      const double f = d.eta2star / (d.eta2star - 1.0);
      return {d.sigma2 * f, d.sigma3 * f};
    }
    default: return {0.0, inf};
  }
}

// Empirical location of a stability exchange: bisection on the sign of the
// probe type's leading eigenvalue. Returns nullopt when no sign change is
// bracketed.
std::optional<double> refine_transition(const ModelParams& p, const DerivedQuantities& d,
                                        const PredictedTransition& tr) {
  EqType probe;
  bool incoming;  // probe becomes stable at the crossing
  if (tr.to == EqType::G5 || tr.from == EqType::G8) {
    probe = tr.to;
    incoming = true;
  } else {
    probe = tr.from;
    incoming = false;
  }
  auto g = [&](double K) {
    const double f = classify_state(boundary_point(probe, p, K), p, K).max_real_part;
    return incoming ? -f : f;
  };
  const auto [adm_lo, adm_hi] = admissible_K(probe, d);
  double lo = std::max(tr.K * (1.0 - 1e-3), adm_lo * (1.0 + 1e-9));
  double hi = tr.K * (1.0 + 1e-3);
  if (std::isfinite(adm_hi)) hi = std::min(hi, adm_hi * (1.0 - 1e-9));
  double glo = g(lo), ghi = g(hi);
  for (int expand = 0; (glo >= 0.0 || ghi <= 0.0) && expand < 8; ++expand) {
    lo = std::max(tr.K - 2.0 * (tr.K - lo), adm_lo * (1.0 + 1e-9));
    hi = tr.K + 2.0 * (hi - tr.K);
    if (std::isfinite(adm_hi)) hi = std::min(hi, adm_hi * (1.0 - 1e-9));
    glo = g(lo);
    ghi = g(hi);
  }
  if (glo >= 0.0 || ghi <= 0.0) return std::nullopt;
  for (int it = 0; it < 200 && (hi - lo) > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct G8Tracker {
  bool have = false;
  double K = 0;
  State x;

  void push(double k, const State& s) {
    x = s;
    K = k;
    have = true;
  }
};

}  // namespace

namespace {

// One continuation step K_from -> K_to starting at x (an interior point at
// K_from). Internal substepping with halving; nullopt when the step cannot
// be completed above the floor.
std::optional<State> continue_g8(const ModelParams& p, State x, double K_from, double K_to,
                                 double floor_rel) {
  double k = K_from;
  double h = K_to - K_from;
  int guard = 0;
  while (k != K_to) {
    if (std::abs(h) < floor_rel * std::max(std::abs(k), std::abs(K_to))) return std::nullopt;
    if (++guard > 4000) return std::nullopt;
    double k_next = k + h;
    if ((h > 0 && k_next > K_to) || (h < 0 && k_next < K_to)) k_next = K_to;
    // tangent predictor for S and I12; I1, I2 follow from the Newton corrector
    State pred = x;
    try {
      Equilibrium eq = make_equilibrium(x, p, k);
      if (eq.type == EqType::G8) {
        const CoexistenceDerivatives der = coexistence_derivatives(eq, p, k);
        pred.S += der.dSdK * (k_next - k);
        pred.I12 += der.dI12dK * (k_next - k);
      }
    } catch (const Error&) {
      // fall back to the trivial predictor
    }
    if (pred.I12 <= 0) pred.I12 = x.I12;
    auto corrected = newton_polish_interior(p, k_next, pred);
    if (corrected && corrected->S > 0 && corrected->I12 > 0) {
      x = *corrected;
      k = k_next;
      h = K_to - k;
    } else {
      h *= 0.5;
    }
  }
  return x;
}

}  // namespace

Branch trace(const ModelParams& p, double K_min, double K_max, const StepPolicy& policy) {
  if (!(K_min > 0 && K_min < K_max)) throw ValidationError("K range must satisfy 0 < min < max");
  const DerivedQuantities d = derive(p);
  const Scenario sc = classify_scenario(p);
  const std::vector<double> grid = build_grid(K_min, K_max, policy, sc.predicted);

  Branch br;
  br.samples.reserve(grid.size());
  G8Tracker g8;
  bool dpds_break_reported = false;

  for (double K : grid) {
    const EqType want = chain_type(sc, K);
    Equilibrium eq;
    if (want != EqType::G8) {
      eq = make_equilibrium(boundary_point(want, p, K), p, K);
      g8.have = false;
    } else {
      std::optional<State> x;
      if (g8.have) {
        x = continue_g8(p, g8.x, g8.K, K, policy.floor_rel);
      }
      if (!x) {
        auto direct = solve_coexistence(p, K);
        if (!direct.empty()) x = direct.front().point;
      }
      if (!x) {
        // right at a hand-off the interior point coincides with a boundary
        // point; emit that limit instead of stalling
        const double tol = 1e-6 * K;
        bool emitted = false;
        for (const PredictedTransition& tr : sc.predicted) {
          if (std::abs(K - tr.K) <= tol) {
            const EqType side = tr.from == EqType::G8 ? tr.to : tr.from;
            if (side != EqType::G8) {
              eq = make_equilibrium(boundary_point(side, p, K), p, K);
              emitted = true;
            }
            break;
          }
        }
        if (!emitted) throw ContinuationStall(g8.have ? g8.K : K);
        br.samples.push_back({K, eq, classify(eq, p, K)});
        continue;
      }
      eq = make_equilibrium(*x, p, K);
      eq.dpds_warning = !(dPdS_at(p, K, x->S) > 0.0);
      if (eq.dpds_warning && !dpds_break_reported) {
        br.events.push_back({BranchEvent::Kind::AssumptionBreak, K, EqType::G8, EqType::G8, 0,
                             "dPdS_nonpositive"});
        dpds_break_reported = true;
      }
      g8.push(K, *x);
    }
    br.samples.push_back({K, eq, classify(eq, p, K)});
  }

  for (const PredictedTransition& tr : sc.predicted) {
    if (tr.K <= K_min || tr.K >= K_max) continue;
    BranchEvent ev;
    ev.kind = BranchEvent::Kind::Transition;
    ev.from = tr.from;
    ev.to = tr.to;
    ev.K_predicted = tr.K;
    const auto detected = refine_transition(p, d, tr);
    ev.K = detected.value_or(tr.K);
    br.events.push_back(ev);
    if (!detected || std::abs(ev.K - tr.K) > 1e-5 * tr.K) {
      br.events.push_back({BranchEvent::Kind::AssumptionBreak, tr.K, tr.from, tr.to, tr.K,
                           "transition_mismatch"});
    }
  }

  // Hopf onset on the coexistence run: first stable -> unstable flip
  for (std::size_t i = 0; i + 1 < br.samples.size(); ++i) {
    const BranchSample& a = br.samples[i];
    const BranchSample& b = br.samples[i + 1];
    if (a.eq.type == EqType::G8 && b.eq.type == EqType::G8 &&
        a.stab.classification == Stability::Stable &&
        b.stab.classification == Stability::Unstable) {
      const HopfResult hr = hopf_scan(p, a.K, b.K, 8);
      if (hr.found) {
        br.events.push_back({BranchEvent::Kind::HopfOnset, hr.K_c, EqType::G8, EqType::G8, 0, ""});
      }
      break;
    }
  }

  std::stable_sort(br.events.begin(), br.events.end(),
                   [](const BranchEvent& a, const BranchEvent& b) { return a.K < b.K; });
  return br;
}

BifurcationSlopes bifurcation_slopes(const ModelParams& p) {
  const DerivedQuantities d = derive(p);
  const Thresholds th = thresholds(p);
  if (!th.Khat1) throw ValidationError("bifurcation_slopes requires eta1* > 1");
  BifurcationSlopes out;
  {
    const double K1 = *th.Khat1, S1 = *th.Shat1;
    const double I12 = p.alpha1 * (S1 - d.sigma1) / p.eta1;
    const double dP = dPdS_at(p, K1, S1);
    if (!(dP > 0)) throw AssumptionIIFailure(K1);
    out.dI2dK_at_Khat1 = p.eta1 * p.r * (d.deltaMu + p.gamma2 * p.mu3) * I12 / (dP * K1 * K1);
    out.theta1 = K1 * dP / (p.r * p.eta1 * p.eta1 * I12);
  }
  if (th.Khat2) {
    const double K2 = *th.Khat2, S2 = *th.Shat2;
    const double I12 = p.alpha2 * (S2 - d.sigma2) / p.eta2;
    const double dP = dPdS_at(p, K2, S2);
    if (!(dP > 0)) throw AssumptionIIFailure(K2);
    out.dI1dK_at_Khat2 = -p.eta2 * p.r * (d.deltaMu - p.gamma1 * p.mu3) * I12 / (dP * K2 * K2);
    out.theta2 = K2 * dP / (p.r * p.eta2 * p.eta2 * I12);
  }
  return out;
}

namespace {

double g8_max_real_at(const ModelParams& p, double K) {
  const auto pts = solve_coexistence(p, K);
  if (pts.empty()) return std::numeric_limits<double>::quiet_NaN();
  return classify_state(pts.front().point, p, K).max_real_part;
}

}  // namespace

std::vector<double> g8_max_real_sweep_serial(const ModelParams& p, const std::vector<double>& Ks) {
  std::vector<double> out(Ks.size());
  for (std::size_t i = 0; i < Ks.size(); ++i) out[i] = g8_max_real_at(p, Ks[i]);
  return out;
}

std::vector<double> g8_max_real_sweep_omp(const ModelParams& p, const std::vector<double>& Ks) {
  std::vector<double> out(Ks.size());
  const std::int64_t n = static_cast<std::int64_t>(Ks.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = g8_max_real_at(p, Ks[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::vector<double> g8_max_real_sweep(const ModelParams& p, const std::vector<double>& Ks) {
  return par::parallel_enabled() ? g8_max_real_sweep_omp(p, Ks) : g8_max_real_sweep_serial(p, Ks);
}

HopfResult hopf_scan(const ModelParams& p, double K_lo, double K_hi, int grid_n) {
  if (!(K_lo > 0 && K_lo < K_hi)) throw ValidationError("hopf_scan needs 0 < K_lo < K_hi");
  const int n = std::max(2, grid_n);
  std::vector<double> Ks(static_cast<std::size_t>(n) + 1);
  const double ratio = K_hi / K_lo;
  for (int i = 0; i <= n; ++i) {
    Ks[static_cast<std::size_t>(i)] = K_lo * std::pow(ratio, static_cast<double>(i) / n);
  }
  const std::vector<double> s = g8_max_real_sweep(p, Ks);

  HopfResult res;
  int bracket = -1;
  double best_rel = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (std::isnan(s[i])) continue;
    best_rel = std::max(best_rel, s[i]);
    if (i + 1 < s.size() && !std::isnan(s[i + 1]) && s[i] < 0.0 && s[i + 1] > 0.0) {
      bracket = static_cast<int>(i);
      break;
    }
  }
  if (bracket < 0) {
    res.found = false;
    res.marginal = std::isfinite(best_rel) && best_rel > -1e-6;
    return res;
  }

  auto eval = [&](double K) {
    const auto pts = solve_coexistence(p, K);
    if (pts.empty()) throw NumericalError("coexistence point lost during Hopf bisection");
    const StabilityReport rep = classify_state(pts.front().point, p, K);
    return std::pair<double, std::complex<double>>(rep.max_real_part, rep.eigenvalues[0]);
  };

  double lo = Ks[static_cast<std::size_t>(bracket)];
  double hi = Ks[static_cast<std::size_t>(bracket) + 1];
  double Kc = 0.5 * (lo + hi);
  std::complex<double> lead;
  for (int it = 0; it < 200; ++it) {
    Kc = 0.5 * (lo + hi);
    auto [re, z] = eval(Kc);
    lead = z;
    if (std::abs(re) < 1e-10 * std::abs(z)) break;
    (re < 0.0 ? lo : hi) = Kc;
  }
  res.found = true;
  res.K_c = Kc;
  auto [reKc, zKc] = eval(Kc);
  res.re_at_Kc = reKc;
  res.pair_im = std::abs(zKc.imag());
  res.fd_step = 1e-4 * Kc;
  res.transversality = (eval(Kc + res.fd_step).first - eval(Kc - res.fd_step).first) /
                       (2.0 * res.fd_step);
  return res;
}

CoexistenceDerivatives coexistence_derivatives(const Equilibrium& g8, const ModelParams& p,
                                               double K) {
  const State& s = g8.point;
  if (!(s.I12 > 0)) throw ValidationError("coexistence_derivatives requires I12 > 0");
  const double dP = dPdS_at(p, K, s.S);
  if (!(dP > 0)) throw ValidationError("coexistence_derivatives requires dP/dS > 0");
  const double gbar = p.gammabar();
  const double r1 = s.I1 / s.I12;
  const double r2 = s.I2 / s.I12;
  const double common = p.r * s.S * s.I12 / (K * K * dP);
  CoexistenceDerivatives out;
  out.dSdK = -common * (p.gamma1 * p.gamma2 * gbar * r1 * r2 +
                        p.gamma1 * p.eta2 * (p.eta1 + gbar * r2) +
                        p.eta1 * p.gamma2 * (p.eta2 + gbar * r1));
  out.dI12dK = -common * (p.alpha1 * p.gamma2 * (p.eta2 + gbar * r1) +
                          p.gamma1 * p.alpha2 * (p.eta1 + gbar * r2) +
                          p.gamma1 * p.gamma2 * p.alpha3);

  // cross-check against the first column of B^{-1}
  const ModelParams pk = with_K(p, K);
  const Eigen::Matrix4d B = interior_matrix_B(s, pk);
  const Eigen::Matrix4d Binv = B.inverse();
  const double lever = p.r * s.S / (K * K);
  const double dS_b = -Binv(0, 0) * lever;
  const double dI12_b = -Binv(3, 0) * lever;
  const double floor = 1e-12 * lever * Binv.cwiseAbs().maxCoeff();
  if (std::abs(out.dSdK - dS_b) > 1e-8 * std::max(std::abs(out.dSdK), std::abs(dS_b)) + floor ||
      std::abs(out.dI12dK - dI12_b) >
          1e-8 * std::max(std::abs(out.dI12dK), std::abs(dI12_b)) + floor) {
    throw NumericalError("coexistence derivative routes disagree");
  }
  return out;
}

}  // namespace coinfect

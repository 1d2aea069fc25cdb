#include "doctest.h"

#include "fixtures.hpp"

using namespace coinfect;
using testfix::rel_err;

namespace {

std::vector<EqType> type_chain(const Branch& br) {
  std::vector<EqType> chain;
  for (const BranchSample& s : br.samples) {
    if (chain.empty() || chain.back() != s.eq.type) chain.push_back(s.eq.type);
  }
  return chain;
}

std::vector<BranchEvent> transitions(const Branch& br) {
  std::vector<BranchEvent> out;
  for (const BranchEvent& e : br.events) {
    if (e.kind == BranchEvent::Kind::Transition) out.push_back(e);
  }
  return out;
}

const BranchSample& sample_at(const Branch& br, double K) {
  for (const BranchSample& s : br.samples) {
    if (std::abs(s.K - K) <= 1e-12 * std::max(1.0, K)) return s;
  }
  REQUIRE_MESSAGE(false, "no sample at K=", K);
  return br.samples.front();
}

}  // namespace

TEST_CASE("scenario classification") {
  SUBCASE("P1 follows the five-transition chain") {
    const Scenario sc = classify_scenario(testfix::p1());
    CHECK(sc.tag == ScenarioTag::III);
    REQUIRE(sc.predicted.size() == 5);
    const double want[5] = {0.5, 1.0, 2.0 * 25.04 / 8.01, 3.0 * 24.96 / 7.99, 12.0};
    const EqType from[5] = {EqType::G2, EqType::G3, EqType::G6, EqType::G8, EqType::G7};
    const EqType to[5] = {EqType::G3, EqType::G6, EqType::G8, EqType::G7, EqType::G5};
    for (int i = 0; i < 5; ++i) {
      CHECK(rel_err(sc.predicted[i].K, want[i]) < 1e-12);
      CHECK(sc.predicted[i].from == from[i]);
      CHECK(sc.predicted[i].to == to[i]);
    }
  }

  SUBCASE("P2 keeps the coexistence point forever") {
    const Scenario sc = classify_scenario(testfix::p2());
    CHECK(sc.tag == ScenarioTag::IV);
    REQUIRE(sc.predicted.size() == 3);
    CHECK(rel_err(sc.predicted[0].K, 0.5) < 1e-14);
    CHECK(rel_err(sc.predicted[1].K, 1.0) < 1e-14);
    CHECK(rel_err(sc.predicted[2].K, 2.0 * 27.04 / 12.01) < 1e-12);
    CHECK(sc.predicted[2].to == EqType::G8);
  }

  SUBCASE("eta1* <= 1 stops at the single-strain point") {
    ModelParams p = testfix::p1();
    p.eta1 = 5.0;  // eta1* = 5/7
    const Scenario sc = classify_scenario(p);
    CHECK(sc.tag == ScenarioTag::I);
    REQUIRE(sc.predicted.size() == 1);
    CHECK(sc.predicted[0].K == 0.5);
    CHECK(sc.predicted[0].to == EqType::G3);
  }

  SUBCASE("dominant eta2* hands over to the pure-coinfection point") {
    ModelParams p = testfix::p1();
    p.eta1 = 8.0;  // eta1* = 8/7 < eta2* = 1.5
    const Scenario sc = classify_scenario(p);
    CHECK(sc.tag == ScenarioTag::II);
    REQUIRE(sc.predicted.size() == 3);
    CHECK(rel_err(sc.predicted[1].K, 4.0) < 1e-12);   // sigma1 * 8
    CHECK(rel_err(sc.predicted[2].K, 32.0) < 1e-12);  // sigma3 * 8
    CHECK(sc.predicted[2].to == EqType::G5);
  }

  SUBCASE("standing assumptions are enforced") {
    ModelParams p = testfix::p1();
    p.gamma1 = 3.5;  // gamma* > 1
    CHECK_THROWS_AS(classify_scenario(p), AssumptionViolation);
  }
}

TEST_CASE("traced branch for fixture P1") {
  const ModelParams p = testfix::p1();
  const Thresholds th = thresholds(p);
  StepPolicy pol;
  pol.n_steps = 500;
  pol.must_hit = {*th.Khat1};
  const Branch br = trace(p, 0.1, 14.0, pol);

  SUBCASE("type chain") {
    CHECK(type_chain(br) == std::vector<EqType>{EqType::G2, EqType::G3, EqType::G6, EqType::G8,
                                                EqType::G7, EqType::G5});
  }

  SUBCASE("detected transitions match the closed forms") {
    const auto trs = transitions(br);
    REQUIRE(trs.size() == 5);
    for (const BranchEvent& e : trs) {
      CHECK(rel_err(e.K, e.K_predicted) < 1e-6);
    }
    for (const BranchEvent& e : br.events) {
      CHECK(e.kind != BranchEvent::Kind::AssumptionBreak);
      CHECK(e.kind != BranchEvent::Kind::HopfOnset);
    }
  }

  SUBCASE("exactly at the first hand-off the two branches coincide") {
    const BranchSample& s = sample_at(br, *th.Khat1);
    CHECK(s.eq.type == EqType::G6);  // I2 = 0 there
    CHECK(s.eq.point.I2 == 0.0);
    // continuity: the nearest coexistence samples stay close to it
    for (const BranchSample& t : br.samples) {
      if (t.eq.type == EqType::G8 && std::abs(t.K - s.K) < 1e-6 * s.K) {
        CHECK(std::abs(t.eq.point.S - s.eq.point.S) < 1e-5);
        CHECK(std::abs(t.eq.point.I2 - s.eq.point.I2) < 1e-5);
      }
    }
  }

  SUBCASE("coexistence run is monotone in S and I12") {
    double lastK = -1, lastS = 0, lastI12 = 0;
    for (const BranchSample& s : br.samples) {
      if (s.eq.type != EqType::G8) continue;
      if (lastK > 0) {
        CHECK(s.eq.point.S < lastS);
        CHECK(s.eq.point.I12 < lastI12);
      }
      lastK = s.K;
      lastS = s.eq.point.S;
      lastI12 = s.eq.point.I12;
    }
  }

  SUBCASE("stable everywhere except marginal deadbands at thresholds") {
    const Scenario sc = classify_scenario(p);
    for (const BranchSample& s : br.samples) {
      if (s.stab.classification == Stability::Stable) continue;
      double dist = 1e300;
      for (const PredictedTransition& tr : sc.predicted) {
        dist = std::min(dist, std::abs(s.K - tr.K));
      }
      CHECK(dist <= 1e-6 * s.K);
    }
  }
}

TEST_CASE("traced branch for fixture P2") {
  const ModelParams p = testfix::p2();
  StepPolicy pol;
  pol.n_steps = 500;
  const Branch br = trace(p, 0.1, 50.0, pol);
  CHECK(type_chain(br) ==
        std::vector<EqType>{EqType::G2, EqType::G3, EqType::G6, EqType::G8});
  CHECK(br.samples.back().eq.type == EqType::G8);

  const Thresholds th = thresholds(p);
  const double S_end = br.samples.back().eq.point.S;
  CHECK(*th.Shat2 < S_end);
  CHECK(S_end < *th.Shat1);
}

TEST_CASE("traced branch for fixture P3 detects its hand-offs too") {
  const ModelParams p = testfix::p3();
  const Thresholds th = thresholds(p);
  StepPolicy pol;
  pol.n_steps = 400;
  const Branch br = trace(p, 0.05, 600.0, pol);
  CHECK(type_chain(br) ==
        std::vector<EqType>{EqType::G2, EqType::G3, EqType::G6, EqType::G8});
  const auto trs = transitions(br);
  REQUIRE(trs.size() == 3);
  const double want[3] = {0.1, *th.K_G3_to_G6, *th.Khat1};
  for (int i = 0; i < 3; ++i) {
    CHECK(rel_err(trs[static_cast<std::size_t>(i)].K, want[i]) < 1e-6);
  }
  CHECK(rel_err(*th.K_G3_to_G6, 90.1) < 1e-12);
}

TEST_CASE("limits of the coexistence branch at its ends") {
  const ModelParams p = testfix::p1();
  const Thresholds th = thresholds(p);
  const DerivedQuantities d = derive(p);

  SUBCASE("emergence limit equals the strain-1 bifurcation point") {
    const double K = *th.Khat1 * (1.0 + 1e-10);
    const auto pts = solve_coexistence(p, K);
    REQUIRE(pts.size() == 1);
    const State g6 = boundary_point(EqType::G6, p, *th.Khat1);
    CHECK(std::abs(pts.front().point.S - g6.S) < 1e-8);
    CHECK(std::abs(pts.front().point.I1 - g6.I1) < 1e-8);
    CHECK(std::abs(pts.front().point.I2 - g6.I2) < 1e-8);
    CHECK(std::abs(pts.front().point.I12 - g6.I12) < 1e-8);
  }

  SUBCASE("termination limit equals the strain-2 bifurcation point") {
    const double K = *th.Khat2 * (1.0 - 1e-10);
    const auto pts = solve_coexistence(p, K);
    REQUIRE(pts.size() == 1);
    const State g7 = boundary_point(EqType::G7, p, *th.Khat2);
    CHECK(std::abs(pts.front().point.S - g7.S) < 1e-8);
    CHECK(std::abs(pts.front().point.I1 - g7.I1) < 1e-8);
    CHECK(std::abs(pts.front().point.I2 - g7.I2) < 1e-8);
    CHECK(std::abs(pts.front().point.I12 - g7.I12) < 1e-8);
  }

  SUBCASE("small-coupling asymptotics of the interior point") {
    // |S - deltaMu/deltaAlpha| and |I12 - r A3/deltaAlpha| scale linearly in
    // the total cross-infection rate
    double err_S[2], err_I12[2];
    const double gbars[2] = {1e-3, 1e-2};
    for (int g = 0; g < 2; ++g) {
      ModelParams q = p;
      q.gamma1 = q.gamma2 = gbars[g] / 2.0;
      const Thresholds tq = thresholds(q);
      err_S[g] = 0;
      err_I12[g] = 0;
      for (int i = 1; i <= 10; ++i) {
        const double K = *tq.Khat1 + (*tq.Khat2 - *tq.Khat1) * i / 11.0;
        const auto pts = solve_coexistence(q, K);
        REQUIRE(pts.size() == 1);
        err_S[g] = std::max(err_S[g], std::abs(pts.front().point.S - d.deltaMu / d.deltaAlpha));
        err_I12[g] = std::max(err_I12[g],
                              std::abs(pts.front().point.I12 - p.r * d.A3 / d.deltaAlpha));
      }
    }
    CHECK(err_S[1] / err_S[0] > 5.0);
    CHECK(err_S[1] / err_S[0] < 20.0);
    CHECK(err_I12[1] / err_I12[0] > 5.0);
    CHECK(err_I12[1] / err_I12[0] < 20.0);
  }
}

TEST_CASE("one-sided slopes at the hand-off points") {
  const ModelParams p = testfix::p1();
  const Thresholds th = thresholds(p);
  const BifurcationSlopes bs = bifurcation_slopes(p);
  REQUIRE(bs.dI1dK_at_Khat2);
  CHECK(bs.dI2dK_at_Khat1 > 0.0);
  CHECK(*bs.dI1dK_at_Khat2 < 0.0);
  CHECK(bs.theta1 > 0.0);
  REQUIRE(bs.theta2);
  CHECK(*bs.theta2 > 0.0);

  SUBCASE("match one-sided differences of the traced branch to 1%") {
    const double h1 = 1e-4 * *th.Khat1;
    const double h2 = 1e-4 * *th.Khat2;
    StepPolicy pol;
    pol.n_steps = 50;
    pol.must_hit = {*th.Khat1 + h1, *th.Khat2 - h2};
    const Branch br = trace(p, *th.Khat1 * 0.99, *th.Khat2 * 1.001, pol);
    const BranchSample& a = sample_at(br, *th.Khat1 + h1);
    REQUIRE(a.eq.type == EqType::G8);
    const double fd1 = a.eq.point.I2 / h1;  // I2 vanishes at Khat1
    CHECK(rel_err(fd1, bs.dI2dK_at_Khat1) < 0.01);
    const BranchSample& b = sample_at(br, *th.Khat2 - h2);
    REQUIRE(b.eq.type == EqType::G8);
    const double fd2 = (0.0 - b.eq.point.I1) / h2;  // I1 vanishes at Khat2
    CHECK(rel_err(fd2, *bs.dI1dK_at_Khat2) < 0.01);
  }

  SUBCASE("gamma = 0 keeps both slopes finite") {
    ModelParams q = p;
    q.gamma1 = q.gamma2 = 0.0;
    const DerivedQuantities d0 = derive(q);
    const Thresholds t0 = thresholds(q);
    CHECK(rel_err(*t0.Khat1, (d0.deltaMu / d0.deltaAlpha) * 2.0) < 1e-12);
    CHECK(rel_err(*t0.Khat2, (d0.deltaMu / d0.deltaAlpha) * 3.0) < 1e-12);
    const BifurcationSlopes b0 = bifurcation_slopes(q);
    CHECK(std::isfinite(b0.dI2dK_at_Khat1));
    REQUIRE(b0.dI1dK_at_Khat2);
    CHECK(std::isfinite(*b0.dI1dK_at_Khat2));
  }
}

TEST_CASE("drift of the interior point with K") {
  const ModelParams p = testfix::p1();

  SUBCASE("closed forms are negative and match differences of direct solves") {
    const double K = 7.0;
    const auto pts = solve_coexistence(p, K);
    REQUIRE(pts.size() == 1);
    const CoexistenceDerivatives der = coexistence_derivatives(pts.front(), p, K);
    CHECK(der.dSdK < 0.0);
    CHECK(der.dI12dK < 0.0);
    const double h = 1e-4 * K;
    const auto lo = solve_coexistence(p, K - h);
    const auto hi = solve_coexistence(p, K + h);
    REQUIRE(lo.size() == 1);
    REQUIRE(hi.size() == 1);
    CHECK(rel_err((hi.front().point.S - lo.front().point.S) / (2 * h), der.dSdK) < 0.01);
    CHECK(rel_err((hi.front().point.I12 - lo.front().point.I12) / (2 * h), der.dI12dK) < 0.01);
  }

  SUBCASE("gamma = 0 freezes S and I12") {
    ModelParams q = p;
    q.gamma1 = q.gamma2 = 0.0;
    const auto pts = solve_coexistence(q, 7.0);
    REQUIRE(pts.size() == 1);
    const CoexistenceDerivatives der = coexistence_derivatives(pts.front(), q, 7.0);
    CHECK(der.dSdK == 0.0);
    CHECK(der.dI12dK == 0.0);
  }
}

TEST_CASE("Hopf scan") {
  SUBCASE("no crossing on the stable mid-branch of P1") {
    const ModelParams p = testfix::p1();
    const Thresholds th = thresholds(p);
    const HopfResult hr = hopf_scan(p, *th.Khat1 * 1.001, *th.Khat2 * 0.999, 32);
    CHECK_FALSE(hr.found);
    CHECK_FALSE(hr.marginal);
  }

  SUBCASE("crossing on the slow-instability fixture") {
    const ModelParams p = testfix::p3();
    const HopfResult hr = hopf_scan(p, 500.0, 1e6, 64);
    REQUIRE(hr.found);
    CHECK(hr.K_c > 500.0);
    CHECK(hr.K_c < 1e6);
    CHECK(std::abs(hr.re_at_Kc) < 1e-10 * std::abs(std::complex<double>(hr.re_at_Kc, hr.pair_im)));
    CHECK(hr.pair_im > 0.0);
    CHECK(hr.transversality > 0.0);
  }

  SUBCASE("gamma = 0 pair never crosses but grazes the axis") {
    ModelParams p = testfix::p3();
    p.gamma1 = p.gamma2 = 0.0;
    const HopfResult hr = hopf_scan(p, 500.0, 1e6, 32);
    CHECK_FALSE(hr.found);
    CHECK(hr.marginal);
  }
}

TEST_CASE("exactly one locally stable equilibrium at every K") {
  auto stable_count_ok = [](const ModelParams& p, double K_lo, double K_hi, int n) {
    std::optional<Scenario> sc;
    try {
      sc = classify_scenario(p);
    } catch (const ValidationError&) {
      return true;  // outside the assumptions; nothing to check
    }
    for (int i = 0; i <= n; ++i) {
      const double K = K_lo + (K_hi - K_lo) * i / n;
      bool near = false;
      for (const PredictedTransition& tr : sc->predicted) {
        if (std::abs(K - tr.K) < 1e-3 * tr.K) near = true;
      }
      if (near) continue;
      int stable = 0;
      auto eqs = boundary_equilibria(p, K);
      for (const Equilibrium& g : solve_coexistence(p, K)) eqs.push_back(g);
      for (const Equilibrium& e : eqs) {
        if (classify(e, p, K).classification == Stability::Stable) ++stable;
      }
      if (stable != 1) return false;
    }
    return true;
  };

  CHECK(stable_count_ok(testfix::p1(), 0.2, 13.5, 40));
  CHECK(stable_count_ok(testfix::p2(), 0.2, 45.0, 40));
  testfix::ParamGen gen(77);
  for (int trial = 0; trial < 20; ++trial) {
    const int scenario = 2 + trial % 3;
    const ModelParams p = gen.next(scenario, 0.01);
    const DerivedQuantities d = derive(p);
    const double K_hi = 4.0 * d.sigma3 * std::max(2.0, d.eta1star / (d.eta1star - 1.0));
    CAPTURE(trial);
    CHECK(stable_count_ok(p, 0.3 * d.sigma1, K_hi, 25));
  }
}

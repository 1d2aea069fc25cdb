#pragma once

#include <cmath>

#include "coinfect/branch.hpp"
#include "coinfect/parallel.hpp"

namespace testfix {

inline coinfect::ModelParams p1() {
  coinfect::ModelParams p;
  p.r = 1.0;
  p.K = 7.0;
  p.alpha1 = 2.0;
  p.alpha2 = 1.0;
  p.alpha3 = 1.0;
  p.eta1 = 14.0;
  p.eta2 = 3.0;
  p.gamma1 = 0.01;
  p.gamma2 = 0.01;
  p.mu1 = 1.0;
  p.mu2 = 2.0;
  p.mu3 = 4.0;
  p.rho1 = 0.1;
  p.rho2 = 0.1;
  p.rho3 = 0.1;
  p.mu4p = 1.0;
  return p;
}

inline coinfect::ModelParams p2() {
  coinfect::ModelParams p = p1();
  p.K = 20.0;
  p.eta2 = 1.0;
  return p;
}

inline coinfect::ModelParams p3() {
  coinfect::ModelParams p;
  p.r = 1.0;
  p.K = 1e5;
  p.alpha1 = 10.0;
  p.alpha2 = 9.9;
  p.alpha3 = 1.0;
  p.eta1 = 9.01;
  p.eta2 = 8.899;
  p.gamma1 = 0.001;
  p.gamma2 = 0.001;
  p.mu1 = 1.0;
  p.mu2 = 1.0;
  p.mu3 = 1.0;
  p.rho1 = 0.2;
  p.rho2 = 0.2;
  p.rho3 = 0.2;
  p.mu4p = 1.0;
  return p;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

// Random parameter sets satisfying the field and ordering constraints.
// scenario: 0 = any eta layout, 2/3/4 = force the corresponding chain.
struct ParamGen {
  coinfect::par::Rng rng;
  explicit ParamGen(std::uint64_t seed) : rng(seed) {}

  coinfect::ModelParams next(int scenario = 0, double gamma_frac = 0.02) {
    using coinfect::ModelParams;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      ModelParams p;
      p.r = rng.uniform(0.5, 2.0);
      p.alpha1 = rng.uniform(0.5, 3.0);
      p.alpha2 = rng.uniform(0.5, 3.0);
      p.alpha3 = rng.uniform(0.5, 3.0);
      const double s1 = rng.uniform(0.3, 1.0);
      const double s2 = s1 * rng.uniform(1.5, 2.5);
      const double s3 = s2 * rng.uniform(1.5, 2.5);
      p.mu1 = s1 * p.alpha1;
      p.mu2 = s2 * p.alpha2;
      p.mu3 = s3 * p.alpha3;
      const double A1 = p.alpha1 * p.alpha3 * (s3 - s1) / p.r;
      const double A2 = p.alpha2 * p.alpha3 * (s3 - s2) / p.r;
      const double A3 = p.alpha1 * p.alpha2 * (s2 - s1) / p.r;
      double e1s, e2s;
      switch (scenario) {
        case 2:  // eta2* >= eta1* > 1
          e1s = rng.uniform(1.2, 2.5);
          e2s = e1s + rng.uniform(0.15, 1.0);
          break;
        case 3:  // eta1* > eta2* > 1
          e2s = rng.uniform(1.15, 2.0);
          e1s = e2s + rng.uniform(0.15, 1.0);
          break;
        case 4:  // eta1* > 1 > eta2*
          e1s = rng.uniform(1.2, 2.5);
          e2s = rng.uniform(0.3, 0.85);
          break;
        default:
          e1s = rng.uniform(0.3, 2.5);
          e2s = rng.uniform(0.3, 2.5);
      }
      p.eta1 = e1s * A1;
      p.eta2 = e2s * A2;
      const double gmax = gamma_frac * std::min({A1, A2, A3});
      p.gamma1 = rng.uniform(0.0, gmax);
      p.gamma2 = rng.uniform(0.0, gmax);
      p.rho1 = rng.uniform(0.0, 0.5) * p.mu1;
      p.rho2 = rng.uniform(0.0, 0.5) * p.mu2;
      p.rho3 = rng.uniform(0.0, 0.5) * p.mu3;
      p.mu4p = rng.uniform(0.5, 2.0);
      p.K = rng.uniform(1.0, 10.0);

      const double dAlpha = p.eta1 * p.alpha2 - p.eta2 * p.alpha1;
      if (std::abs(dAlpha) < 0.05 * (p.eta1 * p.alpha2 + p.eta2 * p.alpha1)) continue;
      if (std::abs(e1s - e2s) < 0.05) continue;
      if (scenario == 3 || scenario == 4) {
        // keep the coexistence thresholds comfortably defined
        if (!(p.gamma1 * p.alpha3 < 0.5 * dAlpha)) continue;
      }
      if (!(p.gamma1 / A3 < 0.9)) continue;
      return p;
    }
    throw std::runtime_error("parameter generator failed to find a valid set");
  }
};

}  // namespace testfix

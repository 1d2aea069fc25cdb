#include "coinfect/equilibria.hpp"

#include <algorithm>
#include <cmath>

namespace coinfect {

const char* to_string(EqType t) {
  switch (t) {
    case EqType::G1: return "G1";
    case EqType::G2: return "G2";
    case EqType::G3: return "G3";
    case EqType::G4: return "G4";
    case EqType::G5: return "G5";
    case EqType::G6: return "G6";
    case EqType::G7: return "G7";
    case EqType::G8: return "G8";
  }
  return "?";
}

std::optional<EqType> eqtype_from_string(const std::string& s) {
  for (EqType t : {EqType::G1, EqType::G2, EqType::G3, EqType::G4, EqType::G5, EqType::G6,
                   EqType::G7, EqType::G8}) {
    if (s == to_string(t)) return t;
  }
  return std::nullopt;
}

Equilibrium make_equilibrium(const State& s, const ModelParams& p, double K) {
  const ModelParams pk = with_K(p, K);
  Equilibrium eq;
  eq.point = s;
  eq.residual = equilibrium_residual(s, pk);
  const double norm = std::max({1.0, std::abs(s.S), std::abs(s.I1), std::abs(s.I2),
                                std::abs(s.I12)});
  if (!(eq.residual <= 1e-10 * norm)) {
    throw ValidationError("state is not an equilibrium: residual " +
                          std::to_string(eq.residual));
  }
  const bool bS = std::abs(s.S) > kZeroTol;
  const bool b1 = std::abs(s.I1) > kZeroTol;
  const bool b2 = std::abs(s.I2) > kZeroTol;
  const bool b3 = std::abs(s.I12) > kZeroTol;
  if (!bS && !b1 && !b2 && !b3) {
    eq.type = EqType::G1;
  } else if (bS && !b1 && !b2 && !b3) {
    eq.type = EqType::G2;
  } else if (bS && b1 && !b2 && !b3) {
    eq.type = EqType::G3;
  } else if (bS && !b1 && b2 && !b3) {
    eq.type = EqType::G4;
  } else if (bS && !b1 && !b2 && b3) {
    eq.type = EqType::G5;
  } else if (bS && b1 && !b2 && b3) {
    eq.type = EqType::G6;
  } else if (bS && !b1 && b2 && b3) {
    eq.type = EqType::G7;
  } else if (bS && b1 && b2 && b3) {
    eq.type = EqType::G8;
  } else {
    throw ValidationError("state zero pattern outside the equilibrium taxonomy");
  }
  return eq;
}

CoexistencePolynomial coexistence_polynomial(const ModelParams& p, double K) {
  const DerivedQuantities d = derive(p);
  CoexistencePolynomial c;
  c.rhoDet = d.rhoDet;
  c.thetaDet = d.thetaDet;
  c.p0 = p.r * (-d.A3 * d.deltaMu - d.thetaDet + p.gamma1 * p.mu2 * d.A1 + p.gamma2 * p.mu1 * d.A2);
  c.p1 = p.r * (d.A3 * d.deltaAlpha + d.thetaDet / K + d.rhoDet - p.gamma1 * p.alpha2 * d.A1 -
                p.gamma2 * p.alpha1 * d.A2);
  c.p2 = -p.r * d.rhoDet / K;
  return c;
}

double dPdS_at(const ModelParams& p, double K, double S) {
  return coexistence_polynomial(p, K).deriv(S);
}

std::vector<Equilibrium> boundary_equilibria(const ModelParams& p, double K) {
  const DerivedQuantities d = derive(p);
  std::vector<Equilibrium> out;
  auto push = [&](const State& s) { out.push_back(make_equilibrium(s, p, K)); };

  push(State{});                          // G1
  push(State{K, 0, 0, 0, 0});            // G2
  if (K > d.sigma1) {
    push(State{d.sigma1, p.r * (K - d.sigma1) / (K * p.alpha1), 0, 0, 0});  // G3
  }
  if (K > d.sigma2) {
    push(State{d.sigma2, 0, p.r * (K - d.sigma2) / (K * p.alpha2), 0, 0});  // G4
  }
  if (K > d.sigma3) {
    push(State{d.sigma3, 0, 0, p.r * (K - d.sigma3) / (K * p.alpha3), 0});  // G5
  }
  if (d.eta1star > 1.0) {
    const double Sstar = K * (1.0 - 1.0 / d.eta1star);
    if (Sstar > d.sigma1 && Sstar < d.sigma3) {
      push(State{Sstar, p.alpha3 * (d.sigma3 - Sstar) / p.eta1, 0,
                 p.alpha1 * (Sstar - d.sigma1) / p.eta1, 0});  // G6
    }
  }
  if (d.eta2star > 1.0) {
    const double Sstar = K * (1.0 - 1.0 / d.eta2star);
    if (Sstar > d.sigma2 && Sstar < d.sigma3) {
      push(State{Sstar, 0, p.alpha3 * (d.sigma3 - Sstar) / p.eta2,
                 p.alpha2 * (Sstar - d.sigma2) / p.eta2, 0});  // G7
    }
  }
  return out;
}

namespace {

// Roots of p2 x^2 + p1 x + p0 = 0. Cancellation-free q-form; falls back to
// the linear equation when |p2| is negligible against |p1|.
std::vector<double> quadratic_roots(double p2, double p1, double p0) {
  std::vector<double> roots;
  if (std::abs(p2) < 1e-14 * std::abs(p1)) {
    if (p1 != 0.0) roots.push_back(-p0 / p1);
    return roots;
  }
  const double disc = p1 * p1 - 4.0 * p2 * p0;
  if (disc < 0.0) return roots;
  const double sq = std::sqrt(disc);
  const double q = -(p1 + std::copysign(sq, p1)) / 2.0;
  if (q != 0.0) {
    roots.push_back(q / p2);
    roots.push_back(p0 / q);
  } else {
    roots.push_back(0.0);  // p1 = 0, disc = 0
  }
  return roots;
}

Eigen::Vector4d divided_system(const State& y, const ModelParams& p) {
  Eigen::Vector4d f;
  f(0) = p.r * (1.0 - y.S / p.K) - p.alpha1 * y.I1 - p.alpha2 * y.I2 - p.alpha3 * y.I12;
  f(1) = p.alpha1 * y.S - p.eta1 * y.I12 - p.gamma1 * y.I2 - p.mu1;
  f(2) = p.alpha2 * y.S - p.eta2 * y.I12 - p.gamma2 * y.I1 - p.mu2;
  f(3) = p.alpha3 * y.S + p.eta1 * y.I1 + p.eta2 * y.I2 - p.mu3 +
         p.gammabar() * y.I1 * y.I2 / y.I12;
  return f;
}

// Start for the interior back-solve at a given root S of P.
std::optional<State> back_solve(const ModelParams& p, const DerivedQuantities& d, double K,
                                double S) {
  State s;
  s.S = S;
  const double b1 = p.r * (1.0 - S / K);
  const double b2 = p.alpha1 * S - p.mu1;
  const double b3 = p.alpha2 * S - p.mu2;
  const double scale = std::max({p.alpha1, p.alpha2, p.alpha3, p.gamma1, p.gamma2, p.eta1, p.eta2});
  if (std::abs(d.rhoDet) > 1e-10 * scale * scale * scale) {
    // first three equilibrium equations, linear in (I1, I2, I12)
    Eigen::Matrix3d M;
    M << p.alpha1, p.alpha2, p.alpha3,  //
        0.0, p.gamma1, p.eta1,          //
        p.gamma2, 0.0, p.eta2;
    Eigen::Vector3d x = M.partialPivLu().solve(Eigen::Vector3d(b1, b2, b3));
    if (!x.allFinite()) return std::nullopt;
    s.I1 = x(0);
    s.I2 = x(1);
    s.I12 = x(2);
    return s;
  }
  // The 3x3 system degenerates when rho (its determinant) vanishes, e.g. at
  // gamma = 0. Use the strain-1 balance for I12 and the resource/coinfection
  // balances for (I1, I2), iterating the gamma coupling a few times.
  if (p.eta1 <= 0 && p.eta2 <= 0) return std::nullopt;
  const double det2 = p.alpha1 * p.eta2 - p.alpha2 * p.eta1;  // -deltaAlpha
  if (det2 == 0.0) return std::nullopt;
  double I1 = 0, I2 = 0, I12 = 0;
  for (int it = 0; it < 4; ++it) {
    I12 = p.eta1 > 0 ? (b2 - p.gamma1 * I2) / p.eta1 : (b3 - p.gamma2 * I1) / p.eta2;
    const double c1 = b1 - p.alpha3 * I12;
    double c2 = p.mu3 - p.alpha3 * S;
    if (I12 > 0) c2 -= p.gammabar() * I1 * I2 / I12;
    // alpha1 I1 + alpha2 I2 = c1 ; eta1 I1 + eta2 I2 = c2
    I1 = (c1 * p.eta2 - c2 * p.alpha2) / det2;
    I2 = (c2 * p.alpha1 - c1 * p.eta1) / det2;
  }
  if (!std::isfinite(I1) || !std::isfinite(I2) || !std::isfinite(I12)) return std::nullopt;
  s.I1 = I1;
  s.I2 = I2;
  s.I12 = I12;
  return s;
}

}  // namespace

std::optional<State> newton_polish_interior(const ModelParams& p, double K, State x) {
  const ModelParams pk = with_K(p, K);
  if (!(x.I12 > 0)) return std::nullopt;
  double fnorm = divided_system(x, pk).cwiseAbs().maxCoeff();
  for (int it = 0; it < 60; ++it) {
    if (fnorm <= 1e-13 * std::max(1.0, std::abs(x.S))) break;
    const Eigen::Matrix4d B = interior_matrix_B(x, pk);
    const Eigen::Vector4d f = divided_system(x, pk);
    Eigen::Vector4d step = B.partialPivLu().solve(-f);
    if (!step.allFinite()) return std::nullopt;
    double damp = 1.0;
    State xn = x;
    for (int h = 0; h < 12; ++h) {
      xn.S = x.S + damp * step(0);
      xn.I1 = x.I1 + damp * step(1);
      xn.I2 = x.I2 + damp * step(2);
      xn.I12 = x.I12 + damp * step(3);
      if (xn.I12 > 0) {
        const double fn = divided_system(xn, pk).cwiseAbs().maxCoeff();
        if (fn < fnorm || fn <= 1e-13 * std::max(1.0, std::abs(xn.S))) {
          x = xn;
          fnorm = fn;
          break;
        }
      }
      damp *= 0.5;
      if (h == 11) return std::nullopt;
    }
  }
  if (!(fnorm <= 1e-12 * std::max(1.0, std::abs(x.S)))) return std::nullopt;
  return x;
}

std::vector<Equilibrium> solve_coexistence(const ModelParams& p, double K,
                                           std::vector<std::string>* notes) {
  const DerivedQuantities d = derive(p);
  const CoexistencePolynomial cp = coexistence_polynomial(p, K);
  std::vector<Equilibrium> out;
  for (double S : quadratic_roots(cp.p2, cp.p1, cp.p0)) {
    if (!(S > 0.0) || !std::isfinite(S)) continue;
    auto start = back_solve(p, d, K, S);
    if (!start) {
      if (notes) notes->push_back("singular back-solve at S=" + std::to_string(S));
      continue;
    }
    if (!(start->I12 > 0)) continue;  // interior candidates only
    auto polished = newton_polish_interior(p, K, *start);
    if (!polished) {
      if (notes) notes->push_back("polish failed at S=" + std::to_string(S));
      continue;
    }
    const State& s = *polished;
    if (!(s.S > kZeroTol && s.I1 > kZeroTol && s.I2 > kZeroTol && s.I12 > kZeroTol)) continue;
    bool dup = false;
    for (const Equilibrium& e : out) {
      if (std::abs(e.point.S - s.S) < 1e-9 * std::max(1.0, std::abs(s.S))) dup = true;
    }
    if (dup) continue;
    Equilibrium eq = make_equilibrium(s, p, K);
    eq.dpds_warning = !(cp.deriv(s.S) > 0.0);
    out.push_back(eq);
  }
  return out;
}

Thresholds thresholds(const ModelParams& p) {
  const DerivedQuantities d = derive(p);
  Thresholds t;
  t.sigma1 = d.sigma1;
  if (d.eta1star > 1.0) {
    const double f1 = d.eta1star / (d.eta1star - 1.0);
    t.K_G3_to_G6 = d.sigma1 * f1;
    const double den1 = d.deltaAlpha + p.gamma2 * p.alpha3;
    if (den1 != 0.0) {
      t.Shat1 = (d.deltaMu + p.gamma2 * p.mu3) / den1;
      t.Khat1 = *t.Shat1 * f1;
    }
  }
  if (d.eta2star > 1.0) {
    const double f2 = d.eta2star / (d.eta2star - 1.0);
    t.K_G7_to_G5 = d.sigma3 * f2;
    const double den2 = d.deltaAlpha - p.gamma1 * p.alpha3;
    if (den2 == 0.0) {
      t.shat2_degenerate = true;
    } else {
      t.Shat2 = (d.deltaMu - p.gamma1 * p.mu3) / den2;
      t.Khat2 = *t.Shat2 * f2;
    }
  }
  return t;
}

}  // namespace coinfect

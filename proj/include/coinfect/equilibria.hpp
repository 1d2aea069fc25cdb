#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coinfect/model.hpp"

namespace coinfect {

enum class EqType { G1, G2, G3, G4, G5, G6, G7, G8 };

const char* to_string(EqType t);
std::optional<EqType> eqtype_from_string(const std::string& s);

// Absolute threshold below which a polished component counts as zero for
// type classification.
inline constexpr double kZeroTol = 1e-12;

struct Equilibrium {
  State point;
  EqType type = EqType::G1;
  double residual = 0.0;       // max-norm of the equilibrium system at point
  bool dpds_warning = false;   // dP/dS <= 0 at a coexistence point
};

// Classifies the zero pattern and evaluates the residual. Throws
// ValidationError for patterns outside the taxonomy (e.g. S = 0 with
// infections present).
Equilibrium make_equilibrium(const State& s, const ModelParams& p, double K);

// P(S) = p2 S^2 + p1 S + p0; its positive admissible roots are the S
// coordinates of coexistence equilibria.
struct CoexistencePolynomial {
  double p0 = 0, p1 = 0, p2 = 0;
  double rhoDet = 0, thetaDet = 0;
  double eval(double S) const { return (p2 * S + p1) * S + p0; }
  double deriv(double S) const { return 2.0 * p2 * S + p1; }
};

CoexistencePolynomial coexistence_polynomial(const ModelParams& p, double K);

// d/dS of the coexistence polynomial at S.
double dPdS_at(const ModelParams& p, double K, double S);

// Closed-form boundary equilibria whose listed components are all positive
// at this K (G1 and G2 are always present).
std::vector<Equilibrium> boundary_equilibria(const ModelParams& p, double K);

// Interior (all components positive) equilibria at this K. Roots of P(S)
// are back-solved and Newton-polished; roots whose back-solve matrix is
// rank-deficient beyond repair are reported in `notes` and skipped.
std::vector<Equilibrium> solve_coexistence(const ModelParams& p, double K,
                                           std::vector<std::string>* notes = nullptr);

// Bifurcation and hand-off thresholds in K. Each value is present only when
// its defining condition holds.
struct Thresholds {
  double sigma1 = 0;                    // G2 -> G3
  std::optional<double> K_G3_to_G6;     // sigma1*eta1^*/(eta1^*-1)
  std::optional<double> Shat1, Khat1;   // G6 -> G8
  std::optional<double> Shat2, Khat2;   // G8 -> G7
  std::optional<double> K_G7_to_G5;     // sigma3*eta2^*/(eta2^*-1)
  bool shat2_degenerate = false;        // deltaAlpha - gamma1*alpha3 == 0
};

Thresholds thresholds(const ModelParams& p);

// Newton iteration on the divided equilibrium system from a start with all
// components positive. Returns nullopt when it cannot reach the residual
// target (1e-12, measured on the divided system).
std::optional<State> newton_polish_interior(const ModelParams& p, double K, State start);

}  // namespace coinfect

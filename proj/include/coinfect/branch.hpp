#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coinfect/stability.hpp"

namespace coinfect {

enum class ScenarioTag { I, II, III, IV };

const char* to_string(ScenarioTag t);

struct PredictedTransition {
  double K = 0;
  EqType from = EqType::G2;
  EqType to = EqType::G2;
};

// Which chain of locally stable equilibrium types the branch follows as K
// grows, with the closed-form hand-off points.
struct Scenario {
  ScenarioTag tag = ScenarioTag::I;
  std::vector<PredictedTransition> predicted;
};

// Selects the chain from the eta* ordering and fills the predicted
// transitions from the thresholds. Throws AssumptionViolation when the
// required standing assumptions fail and AssumptionIIFailure when dP/dS is
// not positive at a bifurcation point the chain passes through.
Scenario classify_scenario(const ModelParams& p);

struct BranchSample {
  double K = 0;
  Equilibrium eq;
  StabilityReport stab;
};

struct BranchEvent {
  enum class Kind { Transition, HopfOnset, AssumptionBreak };
  Kind kind = Kind::Transition;
  double K = 0;            // detected location (K_c for Hopf)
  EqType from = EqType::G2, to = EqType::G2;  // Transition only
  double K_predicted = 0;  // Transition only
  std::string which;       // AssumptionBreak only
};

struct Branch {
  std::vector<BranchSample> samples;  // strictly increasing K
  std::vector<BranchEvent> events;
};

struct StepPolicy {
  int n_steps = 2000;          // base grid resolution
  double refine_radius = 0.01; // halve steps within this relative distance of a threshold
  double floor_rel = 1e-9;     // smallest step, relative to K
  std::vector<double> must_hit;  // extra K values the grid must contain
};

// Follows the locally stable branch over [K_min, K_max]: closed forms for the
// boundary types, natural-parameter continuation (predictor + Newton
// corrector) for the coexistence run. Events carry the empirically refined
// transition locations and any Hopf onset found on the coexistence run.
Branch trace(const ModelParams& p, double K_min, double K_max, const StepPolicy& policy = {});

struct BifurcationSlopes {
  double dI2dK_at_Khat1 = 0;
  std::optional<double> dI1dK_at_Khat2;
  double theta1 = 0;
  std::optional<double> theta2;
};

// Closed-form one-sided slopes of the vanishing compartment at the two
// transcritical points, plus the transversality constants.
BifurcationSlopes bifurcation_slopes(const ModelParams& p);

struct HopfResult {
  bool found = false;
  double K_c = 0;
  double re_at_Kc = 0;        // real part of the crossing pair at K_c
  double pair_im = 0;         // imaginary part of the crossing pair
  double transversality = 0;  // d(Re)/dK finite-difference estimate
  double fd_step = 0;
  bool marginal = false;      // no crossing, but the pair grazed the axis
};

// Bisection in K for the coexistence point's leading eigenvalue pair
// crossing the imaginary axis. found = false when the pair stays in the
// left half-plane over the whole range.
HopfResult hopf_scan(const ModelParams& p, double K_lo, double K_hi, int grid_n = 64);

struct CoexistenceDerivatives {
  double dSdK = 0;
  double dI12dK = 0;
};

// Closed-form dS/dK and dI12/dK on the coexistence branch, cross-checked
// against the first column of B^{-1}. Requires dP/dS > 0 at the point.
CoexistenceDerivatives coexistence_derivatives(const Equilibrium& g8, const ModelParams& p,
                                               double K);

// Closed-form state of a boundary type at this K (admissible or not).
State boundary_point(EqType t, const ModelParams& p, double K);

// max Re eigenvalue of the coexistence point over a K grid (NaN where no
// interior point exists). Serial reference and OpenMP kernel.
std::vector<double> g8_max_real_sweep_serial(const ModelParams& p, const std::vector<double>& Ks);
std::vector<double> g8_max_real_sweep_omp(const ModelParams& p, const std::vector<double>& Ks);
std::vector<double> g8_max_real_sweep(const ModelParams& p, const std::vector<double>& Ks);

}  // namespace coinfect

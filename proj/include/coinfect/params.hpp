#pragma once

#include <string>
#include <vector>

#include "coinfect/errors.hpp"

namespace coinfect {

// Raw rates of the two-strain coinfection system with logistic susceptible
// growth. mu_i = rho_i + d_i, so mu_i >= rho_i is required.
struct ModelParams {
  double r = 1.0;     // intrinsic growth rate of susceptibles
  double K = 1.0;     // carrying capacity
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  double alpha3 = 1.0;  // transmission rates (strain 1, strain 2, coinfection)
  double eta1 = 0.0;
  double eta2 = 0.0;  // single infection picking up the other strain from I12
  double gamma1 = 0.0;
  double gamma2 = 0.0;  // single infection picking up the other strain from I_j
  double mu1 = 1.0;
  double mu2 = 1.0;
  double mu3 = 1.0;  // removal rates
  double rho1 = 0.0;
  double rho2 = 0.0;
  double rho3 = 0.0;  // recovery rates
  double mu4p = 1.0;  // decay rate of the removed class

  double gammabar() const { return gamma1 + gamma2; }

  // Field-level invariants; throws ValidationError on the first violation.
  void validate() const;
};

inline ModelParams with_K(ModelParams p, double K) {
  p.K = K;
  return p;
}

// K-independent quantities controlling the equilibrium structure.
struct DerivedQuantities {
  double sigma1 = 0, sigma2 = 0, sigma3 = 0;  // sigma_i = mu_i / alpha_i
  double A1 = 0, A2 = 0, A3 = 0;
  double eta1star = 0, eta2star = 0;  // eta_i / A_i
  double gammastar = 0;               // gamma_1 / A_3
  double gammabar = 0;                // gamma_1 + gamma_2
  double deltaAlpha = 0;              // eta1*alpha2 - eta2*alpha1
  double deltaMu = 0;                 // eta1*mu2 - eta2*mu1
  double rhoDet = 0;                  // gamma1*alpha1*eta2 + gamma2*alpha2*eta1 - gamma1*gamma2*alpha3
  double thetaDet = 0;                // gamma1*mu1*eta2 + gamma2*mu2*eta1 - gamma1*gamma2*mu3
};

// Pure function of the parameters. Throws AssumptionViolation when the
// sigma-ordering fails, deltaAlpha vanishes, or some A_i is not positive.
DerivedQuantities derive(const ModelParams& p);

struct AssumptionCheck {
  std::string name;
  bool holds;
  double value;  // the quantity the check looks at
};

// Pure report; nothing is aborted here. Downstream operations that depend on
// one of these re-check it themselves.
std::vector<AssumptionCheck> validate_standing_assumptions(const ModelParams& p,
                                                           const DerivedQuantities& d);

// JSON ingestion. The document must contain exactly the ModelParams fields;
// unknown or missing fields are rejected.
ModelParams params_from_json_text(const std::string& text);
ModelParams params_from_json_file(const std::string& path);
std::string params_to_json(const ModelParams& p);

}  // namespace coinfect

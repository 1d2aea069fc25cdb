#include "coinfect/model.hpp"

#include <cmath>

namespace coinfect {

State vector_field(const State& y, const ModelParams& p, bool include_R) {
  const double gbar = p.gammabar();
  State d;
  d.S = (p.r * (1.0 - y.S / p.K) - p.alpha1 * y.I1 - p.alpha2 * y.I2 - p.alpha3 * y.I12) * y.S;
  d.I1 = (p.alpha1 * y.S - p.eta1 * y.I12 - p.gamma1 * y.I2 - p.mu1) * y.I1;
  d.I2 = (p.alpha2 * y.S - p.eta2 * y.I12 - p.gamma2 * y.I1 - p.mu2) * y.I2;
  d.I12 = (p.alpha3 * y.S + p.eta1 * y.I1 + p.eta2 * y.I2 - p.mu3) * y.I12 + gbar * y.I1 * y.I2;
  d.R = include_R ? p.rho1 * y.I1 + p.rho2 * y.I2 + p.rho3 * y.I12 - p.mu4p * y.R : 0.0;
  if (!std::isfinite(d.S) || !std::isfinite(d.I1) || !std::isfinite(d.I2) ||
      !std::isfinite(d.I12) || !std::isfinite(d.R)) {
    throw NonFinite("vector field overflowed");
  }
  return d;
}

Eigen::Matrix4d jacobian(const State& y, const ModelParams& p) {
  const double gbar = p.gammabar();
  Eigen::Matrix4d J;
  J(0, 0) = p.r - 2.0 * p.r * y.S / p.K - p.alpha1 * y.I1 - p.alpha2 * y.I2 - p.alpha3 * y.I12;
  J(0, 1) = -p.alpha1 * y.S;
  J(0, 2) = -p.alpha2 * y.S;
  J(0, 3) = -p.alpha3 * y.S;

  J(1, 0) = p.alpha1 * y.I1;
  J(1, 1) = p.alpha1 * y.S - p.eta1 * y.I12 - p.gamma1 * y.I2 - p.mu1;
  J(1, 2) = -p.gamma1 * y.I1;
  J(1, 3) = -p.eta1 * y.I1;

  J(2, 0) = p.alpha2 * y.I2;
  J(2, 1) = -p.gamma2 * y.I2;
  J(2, 2) = p.alpha2 * y.S - p.eta2 * y.I12 - p.gamma2 * y.I1 - p.mu2;
  J(2, 3) = -p.eta2 * y.I2;

  J(3, 0) = p.alpha3 * y.I12;
  J(3, 1) = p.eta1 * y.I12 + gbar * y.I2;
  J(3, 2) = p.eta2 * y.I12 + gbar * y.I1;
  J(3, 3) = p.alpha3 * y.S + p.eta1 * y.I1 + p.eta2 * y.I2 - p.mu3;
  return J;
}

Eigen::Matrix4d interior_matrix_B(const State& eq, const ModelParams& p) {
  if (!(eq.I12 > 0)) throw ValidationError("interior_matrix_B requires I12 > 0");
  const double gbar = p.gammabar();
  const double r1 = eq.I1 / eq.I12;
  const double r2 = eq.I2 / eq.I12;
  Eigen::Matrix4d B;
  B << -p.r / p.K, -p.alpha1, -p.alpha2, -p.alpha3,  //
      p.alpha1, 0.0, -p.gamma1, -p.eta1,             //
      p.alpha2, -p.gamma2, 0.0, -p.eta2,             //
      p.alpha3, p.eta1 + gbar * r2, p.eta2 + gbar * r1, -gbar * r1 * r2;
  return B;
}

double equilibrium_residual(const State& y, const ModelParams& p) {
  const State d = vector_field(y, p, false);
  return std::max(std::max(std::abs(d.S), std::abs(d.I1)),
                  std::max(std::abs(d.I2), std::abs(d.I12)));
}

}  // namespace coinfect

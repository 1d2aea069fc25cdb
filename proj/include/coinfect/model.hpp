#pragma once

#include <Eigen/Dense>

#include "coinfect/params.hpp"

namespace coinfect {

struct State {
  double S = 0;
  double I1 = 0;
  double I2 = 0;
  double I12 = 0;
  double R = 0;  // optional fifth compartment, ignored by the reduced system
};

// Right-hand side of the model. With include_R the fifth equation is
// evaluated too, otherwise dR = 0. Throws NonFinite on overflow.
State vector_field(const State& y, const ModelParams& p, bool include_R = false);

// Analytic Jacobian of the reduced 4-dimensional system at an arbitrary
// (not necessarily equilibrium) state. Row/column order: S, I1, I2, I12.
Eigen::Matrix4d jacobian(const State& y, const ModelParams& p);

// The matrix B in the factorization J = diag(S,I1,I2,I12) * B, valid at an
// interior equilibrium point. Requires I12 > 0 (it uses I1/I12, I2/I12).
Eigen::Matrix4d interior_matrix_B(const State& eq, const ModelParams& p);

// Max-norm of the equilibrium system (product form) at the given state.
double equilibrium_residual(const State& y, const ModelParams& p);

}  // namespace coinfect

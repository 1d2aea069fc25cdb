#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>

#include "coinfect/equilibria.hpp"

namespace coinfect {

enum class Stability { Stable, Unstable, Marginal };

const char* to_string(Stability s);

struct StabilityReport {
  // sorted by descending real part (ties: descending imaginary part)
  std::array<std::complex<double>, 4> eigenvalues{};
  Stability classification = Stability::Marginal;
  std::array<double, 5> char_poly{};  // monic, descending powers
  double max_real_part = 0.0;
  // For G6/G7 points: whether the closed-form stability window agrees with
  // the eigenvalue verdict. Unset near window endpoints or for other types.
  std::optional<bool> window_agrees;
};

// Monic characteristic polynomial by the Faddeev-LeVerrier trace recursion.
std::array<double, 5> char_poly4(const Eigen::Matrix4d& m);

// All four eigenvalues, residual-checked against char_poly4. Throws
// NoConvergence when the solve fails or the residual check does.
std::array<std::complex<double>, 4> eigenvalues4(const Eigen::Matrix4d& m);

// Classification of an arbitrary state of the reduced system at this K.
StabilityReport classify_state(const State& s, const ModelParams& p, double K);

// Classification of a computed equilibrium; also evaluates the closed-form
// window verdict for G6/G7 points.
StabilityReport classify(const Equilibrium& eq, const ModelParams& p, double K);

struct StabilityWindow {
  double lo = 0.0, hi = 0.0;
  bool excluded_by_assumption = false;  // case outside the standing gamma* < 1 bound
  bool has_interval() const { return !excluded_by_assumption && lo < hi; }
};

// K-interval on which G6 (resp. G7) is admissible and linearly stable.
// nullopt when the type is never admissible (eta* <= 1) or never stable.
std::optional<StabilityWindow> g6_window(const ModelParams& p);
std::optional<StabilityWindow> g7_window(const ModelParams& p);

// Coefficient of lambda^1 in det(J - lambda I)/(S I1 I2 I12) at an interior
// equilibrium, computed both from the characteristic polynomial and from the
// principal 3x3 minors; throws NumericalError if the routes disagree.
double lambda1_coefficient(const Equilibrium& g8, const ModelParams& p, double K);

// --- gamma-free comparison family -----------------------------------------
//
// diag(Y) * M with M built from r/K, alpha, eta only. The property under
// test: the three largest-modulus eigenvalues stay strictly in the left
// half-plane over the sample box.

struct MMatrixSample {
  std::array<double, 4> Y{};
  double K = 1.0;
};

struct MSampleBox {
  double q = 0.01;
  double Q = 100.0;
  double K_lo = 1.0;
  double K_hi = 2.0;
};

Eigen::Matrix4d comparison_matrix(const ModelParams& p, double K);

// Deterministic sample generator: depends only on (box, seed, index).
MMatrixSample mmatrix_sample(const MSampleBox& box, std::uint64_t seed, std::uint64_t index);

struct ComparisonScanResult {
  double max_top3_real = 0.0;     // max over samples of max Re among top-3 by modulus
  double min_abs_real_top3 = 0.0; // min over samples of min |Re| among top-3
  bool discarded_violation = false;  // a kept-out eigenvalue had Re > deadband
  int n = 0;
};

ComparisonScanResult comparison_spectrum_check(std::span<const MMatrixSample> samples, const ModelParams& p);

// Monte-Carlo scan over the box: serial reference and the OpenMP kernel.
// Identical results for identical (n, seed) regardless of the job count.
ComparisonScanResult comparison_scan_serial(const ModelParams& p, const MSampleBox& box, int n,
                                std::uint64_t seed);
ComparisonScanResult comparison_scan_omp(const ModelParams& p, const MSampleBox& box, int n,
                             std::uint64_t seed);
ComparisonScanResult comparison_scan(const ModelParams& p, const MSampleBox& box, int n, std::uint64_t seed);

}  // namespace coinfect

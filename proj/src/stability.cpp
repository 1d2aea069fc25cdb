#include "coinfect/stability.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "coinfect/parallel.hpp"

namespace coinfect {

const char* to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::Marginal: return "marginal";
  }
  return "?";
}

std::array<double, 5> char_poly4(const Eigen::Matrix4d& m) {
  const Eigen::Matrix4d I = Eigen::Matrix4d::Identity();
  Eigen::Matrix4d Mk = m;
  const double c3 = -Mk.trace();
  Mk = m * (Mk + c3 * I);
  const double c2 = -Mk.trace() / 2.0;
  Mk = m * (Mk + c2 * I);
  const double c1 = -Mk.trace() / 3.0;
  Mk = m * (Mk + c1 * I);
  const double c0 = -Mk.trace() / 4.0;
  return {1.0, c3, c2, c1, c0};
}

namespace {

// Backward-style residual of the monic quartic at z. The floor term keeps
// the check meaningful for (near-)zero roots at bifurcation points, where
// every |z|^k term vanishes and only coefficient rounding remains.
double poly_residual(const std::array<double, 5>& c, std::complex<double> z, double spec_scale) {
  std::complex<double> v = c[0];
  double at_z = std::abs(c[0]);
  double at_scale = std::abs(c[0]);
  const double az = std::abs(z);
  for (int k = 1; k < 5; ++k) {
    v = v * z + c[k];
    at_z = at_z * az + std::abs(c[k]);
    at_scale = at_scale * spec_scale + std::abs(c[k]);
  }
  return std::abs(v) / std::max(at_z + 1e-4 * at_scale, 1e-300);
}

void sort_eigs(std::array<std::complex<double>, 4>& e) {
  std::sort(e.begin(), e.end(), [](const std::complex<double>& a, const std::complex<double>& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
}

}  // namespace

std::array<std::complex<double>, 4> eigenvalues4(const Eigen::Matrix4d& m) {
  if (!m.allFinite()) throw NonFinite("matrix has non-finite entries");
  Eigen::EigenSolver<Eigen::Matrix4d> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NoConvergence("eigenvalue iteration did not converge");
  std::array<std::complex<double>, 4> out;
  for (int i = 0; i < 4; ++i) out[i] = es.eigenvalues()(i);
  sort_eigs(out);
  const auto cp = char_poly4(m);
  double spec_scale = 0.0;
  for (const auto& z : out) spec_scale = std::max(spec_scale, std::abs(z));
  for (const auto& z : out) {
    if (poly_residual(cp, z, spec_scale) > 1e-8) {
      throw NoConvergence("eigenvalue failed the characteristic-polynomial residual check");
    }
  }
  return out;
}

StabilityReport classify_state(const State& s, const ModelParams& p, double K) {
  const ModelParams pk = with_K(p, K);
  const Eigen::Matrix4d J = jacobian(s, pk);
  StabilityReport rep;
  rep.char_poly = char_poly4(J);
  rep.eigenvalues = eigenvalues4(J);
  rep.max_real_part = rep.eigenvalues[0].real();
  double scale = 0.0;
  for (const auto& z : rep.eigenvalues) scale = std::max(scale, std::abs(z));
  const double tol = 1e-9 * scale;
  if (rep.max_real_part < -tol) {
    rep.classification = Stability::Stable;
  } else if (rep.max_real_part > tol) {
    rep.classification = Stability::Unstable;
  } else {
    rep.classification = Stability::Marginal;
  }
  return rep;
}

StabilityReport classify(const Equilibrium& eq, const ModelParams& p, double K) {
  StabilityReport rep = classify_state(eq.point, p, K);
  std::optional<StabilityWindow> win;
  if (eq.type == EqType::G6) win = g6_window(p);
  if (eq.type == EqType::G7) win = g7_window(p);
  if (win && win->has_interval() && rep.classification != Stability::Marginal) {
    const bool near_edge =
        std::abs(K - win->lo) <= 1e-6 * K || std::abs(K - win->hi) <= 1e-6 * K;
    if (!near_edge) {
      const bool inside = win->lo < K && K < win->hi;
      rep.window_agrees = inside == (rep.classification == Stability::Stable);
    }
  }
  return rep;
}

std::optional<StabilityWindow> g6_window(const ModelParams& p) {
  const DerivedQuantities d = derive(p);
  if (!(d.eta1star > 1.0)) return std::nullopt;
  const double f = d.eta1star / (d.eta1star - 1.0);
  double Q = d.sigma3;
  if (d.eta2star < d.eta1star) {
    const double den = d.deltaAlpha + p.gamma2 * p.alpha3;
    if (den == 0.0) return std::nullopt;
    Q = (d.deltaMu + p.gamma2 * p.mu3) / den;
  }
  StabilityWindow w;
  w.lo = d.sigma1 * f;
  w.hi = Q * f;
  if (!(w.lo < w.hi)) return std::nullopt;
  return w;
}

std::optional<StabilityWindow> g7_window(const ModelParams& p) {
  const DerivedQuantities d = derive(p);
  if (!(d.eta2star > 1.0)) return std::nullopt;
  const double f = d.eta2star / (d.eta2star - 1.0);
  const double den = d.deltaAlpha - p.gamma1 * p.alpha3;
  const double num = d.deltaMu - p.gamma1 * p.mu3;
  const double den_scale = std::abs(d.deltaAlpha) + p.gamma1 * p.alpha3;
  if (std::abs(den) <= 1e-14 * den_scale) {
    // degenerate slope: stable on the whole admissibility window iff num < 0
    if (num < 0.0) return StabilityWindow{d.sigma2 * f, d.sigma3 * f, false};
    return std::nullopt;
  }
  if (den > 0.0) {
    const double Shat2 = num / den;
    StabilityWindow w;
    w.lo = std::max(Shat2, d.sigma2) * f;
    w.hi = d.sigma3 * f;
    if (!(w.lo < w.hi)) return std::nullopt;
    return w;
  }
  // den < 0 together with eta2* < gamma* is outside the standing assumptions;
  // report it as excluded instead of producing an interval.
  if (d.eta2star < d.gammastar) {
    StabilityWindow w;
    w.excluded_by_assumption = true;
    return w;
  }
  return std::nullopt;
}

namespace {

double det3(const Eigen::Matrix3d& m) { return m.determinant(); }

double det3_abs_bound(const Eigen::Matrix3d& m) {
  // permanent of |entries|: magnitude scale for the determinant's terms
  const Eigen::Matrix3d a = m.cwiseAbs();
  return a(0, 0) * (a(1, 1) * a(2, 2) + a(1, 2) * a(2, 1)) +
         a(0, 1) * (a(1, 0) * a(2, 2) + a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) + a(1, 1) * a(2, 0));
}

Eigen::Matrix3d principal_minor(const Eigen::Matrix4d& m, int drop) {
  Eigen::Matrix3d out;
  int ri = 0;
  for (int i = 0; i < 4; ++i) {
    if (i == drop) continue;
    int ci = 0;
    for (int j = 0; j < 4; ++j) {
      if (j == drop) continue;
      out(ri, ci++) = m(i, j);
    }
    ++ri;
  }
  return out;
}

}  // namespace

double lambda1_coefficient(const Equilibrium& g8, const ModelParams& p, double K) {
  const State& s = g8.point;
  if (!(s.S > 0 && s.I1 > 0 && s.I2 > 0 && s.I12 > 0)) {
    throw ValidationError("lambda1_coefficient requires an interior point");
  }
  const ModelParams pk = with_K(p, K);
  const double denom = s.S * s.I1 * s.I2 * s.I12;

  // (a) via the characteristic polynomial of the Jacobian
  const Eigen::Matrix4d J = jacobian(s, pk);
  const double via_charpoly = char_poly4(J)[3] / denom;

  // (b) via the principal 3x3 minors of B
  const Eigen::Matrix4d B = interior_matrix_B(s, pk);
  const double comps[4] = {s.S, s.I1, s.I2, s.I12};
  double via_minors = 0.0;
  double scale = 0.0;
  for (int i = 0; i < 4; ++i) {
    const Eigen::Matrix3d mi = principal_minor(B, i);
    via_minors -= det3(mi) / comps[i];
    scale += det3_abs_bound(mi) / comps[i];
  }
  const double tol = 1e-8 * std::max(std::abs(via_charpoly), std::abs(via_minors)) + 1e-12 * scale;
  if (std::abs(via_charpoly - via_minors) > tol) {
    throw NumericalError("lambda^1 coefficient routes disagree");
  }
  return via_charpoly;
}

Eigen::Matrix4d comparison_matrix(const ModelParams& p, double K) {
  Eigen::Matrix4d M;
  M << -p.r / K, -p.alpha1, -p.alpha2, -p.alpha3,  //
      p.alpha1, 0.0, 0.0, -p.eta1,                 //
      p.alpha2, 0.0, 0.0, -p.eta2,                 //
      p.alpha3, p.eta1, p.eta2, 0.0;
  return M;
}

MMatrixSample mmatrix_sample(const MSampleBox& box, std::uint64_t seed, std::uint64_t index) {
  par::Rng rng = par::stream(seed, index);
  MMatrixSample s;
  s.Y[0] = rng.uniform(box.q, box.Q);
  s.Y[3] = rng.uniform(box.q, box.Q);
  const double mode = rng.uniform();
  if (mode < 0.1) {
    s.Y[1] = 0.0;
    s.Y[2] = rng.uniform(box.q, box.Q);
  } else if (mode < 0.2) {
    s.Y[1] = rng.uniform(box.q, box.Q);
    s.Y[2] = 0.0;
  } else {
    do {
      s.Y[1] = rng.uniform(0.0, box.Q);
      s.Y[2] = rng.uniform(0.0, box.Q);
    } while (s.Y[1] + s.Y[2] < box.q);
  }
  s.K = rng.uniform(box.K_lo, box.K_hi);
  return s;
}

namespace {

// per-sample statistics: (max Re over top-3 by modulus, min |Re| over top-3,
// Re of the discarded eigenvalue)
struct SampleStat {
  double max_re = 0, min_abs_re = 0, discarded_re = 0;
  double scale = 0;
};

SampleStat comparison_sample_stats(const MMatrixSample& s, const ModelParams& p) {
  const Eigen::Matrix4d M = comparison_matrix(p, s.K);
  const Eigen::Vector4d Y(s.Y[0], s.Y[1], s.Y[2], s.Y[3]);
  const Eigen::Matrix4d MM = Y.asDiagonal() * M;
  auto eigs = eigenvalues4(MM);
  std::sort(eigs.begin(), eigs.end(),
            [](const std::complex<double>& a, const std::complex<double>& b) {
              return std::abs(a) > std::abs(b);
            });
  SampleStat st;
  st.scale = std::abs(eigs[0]);
  st.max_re = std::max({eigs[0].real(), eigs[1].real(), eigs[2].real()});
  st.min_abs_re = std::min(
      {std::abs(eigs[0].real()), std::abs(eigs[1].real()), std::abs(eigs[2].real())});
  st.discarded_re = eigs[3].real();
  return st;
}

ComparisonScanResult reduce_stats(const std::vector<SampleStat>& stats) {
  ComparisonScanResult res;
  res.n = static_cast<int>(stats.size());
  res.max_top3_real = -std::numeric_limits<double>::infinity();
  res.min_abs_real_top3 = std::numeric_limits<double>::infinity();
  for (const SampleStat& st : stats) {
    res.max_top3_real = std::max(res.max_top3_real, st.max_re);
    res.min_abs_real_top3 = std::min(res.min_abs_real_top3, st.min_abs_re);
    if (st.discarded_re > 1e-9 * st.scale) res.discarded_violation = true;
  }
  return res;
}

}  // namespace

ComparisonScanResult comparison_spectrum_check(std::span<const MMatrixSample> samples, const ModelParams& p) {
  std::vector<SampleStat> stats;
  stats.reserve(samples.size());
  for (const MMatrixSample& s : samples) stats.push_back(comparison_sample_stats(s, p));
  return reduce_stats(stats);
}

ComparisonScanResult comparison_scan_serial(const ModelParams& p, const MSampleBox& box, int n,
                                std::uint64_t seed) {
  std::vector<SampleStat> stats(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    stats[static_cast<std::size_t>(i)] =
        comparison_sample_stats(mmatrix_sample(box, seed, static_cast<std::uint64_t>(i)), p);
  }
  return reduce_stats(stats);
}

ComparisonScanResult comparison_scan_omp(const ModelParams& p, const MSampleBox& box, int n,
                             std::uint64_t seed) {
  std::vector<SampleStat> stats(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    stats[static_cast<std::size_t>(i)] =
        comparison_sample_stats(mmatrix_sample(box, seed, static_cast<std::uint64_t>(i)), p);
  }
  return reduce_stats(stats);
}

ComparisonScanResult comparison_scan(const ModelParams& p, const MSampleBox& box, int n, std::uint64_t seed) {
  return par::parallel_enabled() ? comparison_scan_omp(p, box, n, seed)
                                 : comparison_scan_serial(p, box, n, seed);
}

}  // namespace coinfect

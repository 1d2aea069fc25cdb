#include "coinfect/simulate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "coinfect/parallel.hpp"

namespace coinfect {

namespace {

// Dormand-Prince 5(4) tableau, FSAL form, with the dense-output weights.
constexpr double a21 = 0.2;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double safe = 0.9, facl = 0.2, facr = 10.0, beta = 0.04;
constexpr double expo1 = 0.2 - beta * 0.75;

using Vec = std::array<double, 5>;

Vec to_vec(const State& s) { return {s.S, s.I1, s.I2, s.I12, s.R}; }
State to_state(const Vec& v) { return {v[0], v[1], v[2], v[3], v[4]}; }

struct Dopri5 {
  const ModelParams& p;
  bool include_R;
  int dim;  // 4 or 5 components participate in the error norm

  Vec rhs(const Vec& y) const {
    const State d = vector_field(to_state(y), p, include_R);
    return to_vec(d);
  }

  static void axpy(Vec& out, const Vec& y, double h, const Vec& k) {
    for (int i = 0; i < 5; ++i) out[i] = y[i] + h * k[i];
  }
};

void clip_tiny_negative(Vec& y) {
  for (double& v : y) {
    if (v < 0.0 && v >= -1e-12) v = 0.0;
  }
}

struct DenseSeg {
  double t0 = 0, h = 0;
  Vec r1{}, r2{}, r3{}, r4{}, r5{};

  Vec eval(double t) const {
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    Vec out{};
    for (int i = 0; i < 5; ++i) {
      out[i] = r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
    }
    return out;
  }
};

// Core loop; seg_cb receives each accepted step's dense segment.
template <class SegCb>
StepStats run_dopri5(const ModelParams& p, const State& initial, double t_end,
                     const IntegrateOptions& opts, const SegCb& seg_cb) {
  if (!(initial.S >= 0 && initial.I1 >= 0 && initial.I2 >= 0 && initial.I12 >= 0)) {
    throw ValidationError("initial state must be componentwise nonnegative");
  }
  if (!(t_end > 0)) throw ValidationError("t_end must be positive");
  Dopri5 f{p, opts.include_R, opts.include_R ? 5 : 4};
  StepStats stats;
  double t = 0.0;
  Vec y = to_vec(initial);
  Vec k1 = f.rhs(y);

  // initial step from the right-hand-side magnitude
  double ynorm = 0, fnorm = 0;
  for (int i = 0; i < f.dim; ++i) {
    ynorm = std::max(ynorm, std::abs(y[i]));
    fnorm = std::max(fnorm, std::abs(k1[i]));
  }
  double h = 0.01 * std::max(ynorm, 1e-6) / std::max(fnorm, 1e-6);
  h = std::min(h, t_end);
  double facold = 1e-4;

  Vec k2, k3, k4, k5, k6, k7, y2, ynew;
  while (t < t_end) {
    if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0)) {
      throw StepUnderflow("step size underflow at t=" + std::to_string(t));
    }
    const bool last = t + h >= t_end;
    if (last) h = t_end - t;

    Dopri5::axpy(y2, y, h * a21, k1);
    k2 = f.rhs(y2);
    for (int i = 0; i < 5; ++i) y2[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    k3 = f.rhs(y2);
    for (int i = 0; i < 5; ++i) y2[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = f.rhs(y2);
    for (int i = 0; i < 5; ++i)
      y2[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = f.rhs(y2);
    for (int i = 0; i < 5; ++i)
      y2[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    k6 = f.rhs(y2);
    for (int i = 0; i < 5; ++i)
      ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    k7 = f.rhs(ynew);

    double err = 0.0;
    for (int i = 0; i < f.dim; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                            e7 * k7[i]);
      const double sc = opts.abs_tol + opts.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err += (e / sc) * (e / sc);
    }
    err = std::sqrt(err / f.dim);
    if (!std::isfinite(err)) throw NonFinite("integration produced non-finite values");

    const double fac11 = std::pow(err, expo1);
    if (err <= 1.0) {
      // accept
      stats.accepted++;
      stats.max_error = std::max(stats.max_error, err);
      facold = std::max(err, 1e-4);

      DenseSeg seg;
      seg.t0 = t;
      seg.h = h;
      for (int i = 0; i < 5; ++i) {
        const double ydiff = ynew[i] - y[i];
        const double bspl = h * k1[i] - ydiff;
        seg.r1[i] = y[i];
        seg.r2[i] = ydiff;
        seg.r3[i] = bspl;
        seg.r4[i] = ydiff - h * k7[i] - bspl;
        seg.r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                         d7 * k7[i]);
      }
      t += h;
      y = ynew;
      clip_tiny_negative(y);
      k1 = k7;  // FSAL
      if (!seg_cb(seg, t, y)) break;

      double fac = fac11 / std::pow(facold, beta);
      fac = std::max(1.0 / facr, std::min(1.0 / facl, fac / safe));
      h = h / fac;
    } else {
      stats.rejected++;
      h = h / std::min(1.0 / facl, fac11 / safe);
    }
  }
  return stats;
}

}  // namespace

Trajectory integrate(const ModelParams& p, const State& initial, double t_end,
                     const IntegrateOptions& opts) {
  std::vector<double> samples = opts.sample_times;
  if (samples.empty()) {
    const int n = std::max(2, opts.n_samples);
    samples.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) samples[static_cast<std::size_t>(i)] = t_end * i / (n - 1);
  }
  Trajectory traj;
  traj.times.reserve(samples.size());
  traj.states.reserve(samples.size());
  std::size_t next = 0;
  while (next < samples.size() && samples[next] <= 0.0) {
    traj.times.push_back(samples[next]);
    traj.states.push_back(initial);
    ++next;
  }
  traj.stats = run_dopri5(p, initial, t_end, opts, [&](const DenseSeg& seg, double t, const Vec&) {
    while (next < samples.size() && samples[next] <= t + 1e-14 * std::max(1.0, t)) {
      Vec v = seg.eval(std::min(samples[next], t));
      clip_tiny_negative(v);
      traj.times.push_back(samples[next]);
      traj.states.push_back(to_state(v));
      ++next;
    }
    return true;
  });
  return traj;
}

void integrate_observe(const ModelParams& p, const State& initial, double t_end,
                       const IntegrateOptions& opts, const StepObserver& obs) {
  run_dopri5(p, initial, t_end, opts,
             [&](const DenseSeg&, double t, const Vec& y) { return obs(t, to_state(y)); });
}

double r_limit(const ModelParams& p, const Equilibrium& eq) {
  return (p.rho1 * eq.point.I1 + p.rho2 * eq.point.I2 + p.rho3 * eq.point.I12) / p.mu4p;
}

namespace {

bool probe_one(const ModelParams& pk, const State& target, double radius, std::uint64_t seed,
               std::uint64_t index, const BasinProbeOptions& opts) {
  par::Rng rng = par::stream(seed, index);
  const double comps[4] = {target.S, target.I1, target.I2, target.I12};
  double scale0 = 0.0;
  for (double c : comps) scale0 = std::max(scale0, c);
  State y0 = target;
  double* fields[4] = {&y0.S, &y0.I1, &y0.I2, &y0.I12};
  for (int i = 0; i < 4; ++i) {
    if (comps[i] > 0) {
      *fields[i] = comps[i] * (1.0 + radius * rng.uniform(-1.0, 1.0));
    } else {
      // zero compartments get an absolute kick scaled by the point size,
      // otherwise invariant faces would never be probed transversally
      *fields[i] = radius * scale0 * rng.uniform();
    }
  }
  const double dist_scale = std::max(1.0, scale0);
  auto distance = [&](const State& y) {
    return std::max(std::max(std::abs(y.S - target.S), std::abs(y.I1 - target.I1)),
                    std::max(std::abs(y.I2 - target.I2), std::abs(y.I12 - target.I12))) /
           dist_scale;
  };
  if (distance(y0) < opts.distance_tol) return true;

  IntegrateOptions io;
  io.rel_tol = opts.rel_tol;
  io.abs_tol = opts.abs_tol;
  io.include_R = false;
  bool converged = false;
  double below_since = -1.0;
  try {
    integrate_observe(pk, y0, opts.t_end, io, [&](double t, const State& y) {
      if (distance(y) < opts.distance_tol) {
        if (below_since < 0) below_since = t;
        if (t - below_since >= 0.1 * t && t > 1.0) {
          converged = true;
          return false;
        }
      } else {
        below_since = -1.0;
      }
      return true;
    });
  } catch (const NumericalError&) {
    return false;
  }
  return converged;
}

}  // namespace

BasinProbeResult basin_probe_serial(const ModelParams& p, double K, const Equilibrium& point,
                                    int n_samples, double radius, std::uint64_t seed,
                                    const BasinProbeOptions& opts) {
  const ModelParams pk = with_K(p, K);
  BasinProbeResult res;
  res.total = n_samples;
  for (int i = 0; i < n_samples; ++i) {
    if (probe_one(pk, point.point, radius, seed, static_cast<std::uint64_t>(i), opts)) {
      res.converged++;
    }
  }
  res.fraction = n_samples > 0 ? static_cast<double>(res.converged) / n_samples : 1.0;
  return res;
}

BasinProbeResult basin_probe_omp(const ModelParams& p, double K, const Equilibrium& point,
                                 int n_samples, double radius, std::uint64_t seed,
                                 const BasinProbeOptions& opts) {
  const ModelParams pk = with_K(p, K);
  std::vector<char> ok(static_cast<std::size_t>(std::max(0, n_samples)), 0);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n_samples; ++i) {
    ok[static_cast<std::size_t>(i)] =
        probe_one(pk, point.point, radius, seed, static_cast<std::uint64_t>(i), opts) ? 1 : 0;
  }
  BasinProbeResult res;
  res.total = n_samples;
  for (char c : ok) res.converged += c;
  res.fraction = n_samples > 0 ? static_cast<double>(res.converged) / n_samples : 1.0;
  return res;
}

BasinProbeResult basin_probe(const ModelParams& p, double K, const Equilibrium& point,
                             int n_samples, double radius, std::uint64_t seed,
                             const BasinProbeOptions& opts) {
  return par::parallel_enabled() ? basin_probe_omp(p, K, point, n_samples, radius, seed, opts)
                                 : basin_probe_serial(p, K, point, n_samples, radius, seed, opts);
}

}  // namespace coinfect

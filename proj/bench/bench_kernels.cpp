// Timing comparison of the serial reference kernels against their OpenMP
// counterparts. Checks that both produce identical results while at it.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "coinfect/branch.hpp"
#include "coinfect/parallel.hpp"
#include "coinfect/simulate.hpp"

using namespace coinfect;
namespace chrono = std::chrono;

namespace {

ModelParams fixture_p1() {
  ModelParams p;
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

template <class F>
double time_ms(const F& f) {
  const auto t0 = chrono::high_resolution_clock::now();
  f();
  const auto t1 = chrono::high_resolution_clock::now();
  return chrono::duration<double, std::milli>(t1 - t0).count();
}

void row(const char* name, double serial_ms, double omp_ms, bool same) {
  std::printf("%-28s %10.1f ms %10.1f ms   x%.2f   results %s\n", name, serial_ms, omp_ms,
              serial_ms / omp_ms, same ? "identical" : "DIFFER");
}

}  // namespace

int main(int argc, char** argv) {
  const int scale = argc > 1 ? std::atoi(argv[1]) : 1;
  const ModelParams p1 = fixture_p1();
  const Thresholds th = thresholds(p1);
  par::set_jobs(0);

  std::printf("%-28s %13s %13s\n", "kernel", "serial", "openmp");

  {
    MSampleBox box{0.01, 100.0, *th.Khat1, *th.Khat2};
    const int n = 4000 * scale;
    ComparisonScanResult rs, ro;
    const double ts = time_ms([&] { rs = comparison_scan_serial(p1, box, n, 42); });
    const double to = time_ms([&] { ro = comparison_scan_omp(p1, box, n, 42); });
    row("comparison-matrix scan", ts, to, rs.max_top3_real == ro.max_top3_real);
  }
  {
    const double K = 0.5 * (*th.Khat1 + *th.Khat2);
    const Equilibrium g8 = solve_coexistence(p1, K).front();
    const int n = 64 * scale;
    BasinProbeResult rs, ro;
    const double ts = time_ms([&] { rs = basin_probe_serial(p1, K, g8, n, 0.01, 7); });
    const double to = time_ms([&] { ro = basin_probe_omp(p1, K, g8, n, 0.01, 7); });
    row("basin probe", ts, to, rs.converged == ro.converged);
  }
  {
    std::vector<double> Ks;
    const int n = 600 * scale;
    for (int i = 0; i < n; ++i) {
      Ks.push_back(*th.Khat1 + (*th.Khat2 - *th.Khat1) * (i + 1) / (n + 2));
    }
    std::vector<double> rs, ro;
    const double ts = time_ms([&] { rs = g8_max_real_sweep_serial(p1, Ks); });
    const double to = time_ms([&] { ro = g8_max_real_sweep_omp(p1, Ks); });
    row("coexistence eigen sweep", ts, to, rs == ro);
  }
  return 0;
}

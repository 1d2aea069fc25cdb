#include "doctest.h"

#include "fixtures.hpp"
#include "coinfect/simulate.hpp"

using namespace coinfect;

// The OpenMP kernels must reproduce the serial reference bit for bit: all
// per-sample randomness is derived from (seed, index), never from the
// thread schedule.

TEST_CASE("comparison-matrix scan: serial vs OpenMP") {
  const ModelParams p = testfix::p1();
  const Thresholds th = thresholds(p);
  const MSampleBox box{0.01, 100.0, *th.Khat1, *th.Khat2};
  const ComparisonScanResult a = comparison_scan_serial(p, box, 600, 12345);
  const ComparisonScanResult b = comparison_scan_omp(p, box, 600, 12345);
  CHECK(a.n == b.n);
  CHECK(a.max_top3_real == b.max_top3_real);
  CHECK(a.min_abs_real_top3 == b.min_abs_real_top3);
  CHECK(a.discarded_violation == b.discarded_violation);
}

TEST_CASE("basin probe: serial vs OpenMP") {
  const ModelParams p = testfix::p1();
  const auto pts = solve_coexistence(p, 7.0);
  REQUIRE(pts.size() == 1);
  const BasinProbeResult a = basin_probe_serial(p, 7.0, pts.front(), 24, 0.02, 777);
  const BasinProbeResult b = basin_probe_omp(p, 7.0, pts.front(), 24, 0.02, 777);
  CHECK(a.converged == b.converged);
  CHECK(a.total == b.total);
  CHECK(a.fraction == b.fraction);
}

TEST_CASE("coexistence eigen sweep: serial vs OpenMP") {
  const ModelParams p = testfix::p1();
  const Thresholds th = thresholds(p);
  std::vector<double> Ks;
  for (int i = 0; i < 80; ++i) {
    Ks.push_back(*th.Khat1 + (*th.Khat2 - *th.Khat1) * (i + 1) / 82.0);
  }
  Ks.push_back(0.7);  // no interior point here: NaN slot
  const std::vector<double> a = g8_max_real_sweep_serial(p, Ks);
  const std::vector<double> b = g8_max_real_sweep_omp(p, Ks);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isnan(a[i])) {
      CHECK(std::isnan(b[i]));
    } else {
      CHECK(a[i] == b[i]);
    }
  }
  CHECK(std::isnan(a.back()));
}

TEST_CASE("job cap does not change sampled results") {
  const ModelParams p = testfix::p1();
  const Thresholds th = thresholds(p);
  const MSampleBox box{0.01, 100.0, *th.Khat1, *th.Khat2};
  const int old_jobs = par::jobs();
  par::set_jobs(3);
  const ComparisonScanResult a = comparison_scan(p, box, 400, 9);
  par::set_jobs(1);
  const ComparisonScanResult b = comparison_scan(p, box, 400, 9);
  par::set_jobs(old_jobs);
  CHECK(a.max_top3_real == b.max_top3_real);
  CHECK(a.min_abs_real_top3 == b.min_abs_real_top3);
}

#include <cmath>

#include "doctest.h"
#include "qpinem/error.hpp"
#include "qpinem/experiment.hpp"

using namespace qpinem;

namespace {

PhotonicState coherent30() { return make_coherent(30.0, poisson_cutoff(900.0)); }

}  // namespace

TEST_CASE("counter rng") {
  const CounterRng a(7, 3), b(7, 3), c(7, 4);
  CHECK(a.bits(11) == b.bits(11));
  CHECK(a.bits(11) != c.bits(11));
  double s = 0.0, s2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = a.uniform(i);
    CHECK_UNARY(u >= 0.0);
    CHECK_UNARY(u < 1.0);
    s += u;
    const double z = a.normal(i);
    s2 += z * z;
  }
  CHECK(s / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("sampling") {
  const auto sp = spectrum_approx(statistics(coherent30()), Coupling(0.1));
  const auto one = sample_spectrum(sp, 1, 5);
  int nonzero = 0;
  for (double p : one.probs) nonzero += p > 0.0;
  CHECK(nonzero == 1);
  CHECK(one.total() == doctest::Approx(1.0));

  const auto big = sample_spectrum(sp, 1000000, 9);
  double tv = 0.0;
  for (int k = sp.k_min; k <= sp.k_max; ++k) tv += 0.5 * std::abs(big.at(k) - sp.at(k));
  CHECK(tv < 0.01);

  const auto r1 = sample_spectrum(sp, 500, 42, 3);
  const auto r2 = sample_spectrum(sp, 500, 42, 3);
  CHECK(r1.probs == r2.probs);
  CHECK(r1.probs != sample_spectrum(sp, 500, 42, 4).probs);
  CHECK_THROWS_AS(sample_spectrum(sp, 0, 1), ConfigError);
}

TEST_CASE("multinomial calibration") {
  const auto sp = spectrum_approx(statistics(coherent30()), Coupling(0.1));
  const int n = 1000, reps = 400;
  for (int k : {0, 2, 5}) {
    double s = 0.0, s2 = 0.0;
    for (int r = 0; r < reps; ++r) {
      const double v = sample_spectrum(sp, n, 77, substream(1, r)).at(k);
      s += v;
      s2 += v * v;
    }
    const double mean = s / reps;
    const double var = (s2 - reps * mean * mean) / (reps - 1);
    const double expected = sp.at(k) * (1.0 - sp.at(k)) / n;
    CHECK(std::abs(var - expected) < 3.0 * expected * std::sqrt(2.0 / (reps - 1)));
  }
}

TEST_CASE("precision curve") {
  ExperimentConfig cfg;
  cfg.g = Coupling(0.1);
  cfg.realizations = 100;
  cfg.seed = 1;
  const auto rep = precision_curve(coherent30(), cfg, {100, 1000, 10000}, 3);
  const auto& mid = rep.points[1];
  // Gaussian limit of the single-electron estimator sum_k d_1k 1[k]: E|dev| = sqrt(2/pi) sd.
  const auto sp = spectrum_approx(statistics(coherent30()), Coupling(0.1));
  double m1 = 0.0, m2 = 0.0;
  for (int k = 1; k <= sp.k_max; ++k) {
    const double d = kernel_d(1, k, 0.1);
    m1 += d * sp.at(k);
    m2 += d * d * sp.at(k);
  }
  const double expected = std::sqrt((m2 - m1 * m1) / 1000.0) / 900.0 * std::sqrt(2.0 / 3.141592653589793);
  CHECK(std::abs(mid.rel_error[0] - expected) < 4.0 * mid.rel_error_sem[0]);
  CHECK(mid.rel_error[0] > 0.03);
  CHECK(mid.rel_error[0] < 0.08);
  CHECK(mid.rel_error[0] < mid.rel_error[1]);
  CHECK(mid.rel_error[1] < mid.rel_error[2]);
  CHECK(rep.slopes[0] > -0.6);
  CHECK(rep.slopes[0] < -0.4);
  const auto again = precision_curve(coherent30(), cfg, {100, 1000, 10000}, 3);
  CHECK(again.points[1].rel_error == mid.rel_error);

  ExperimentConfig bad = cfg;
  bad.realizations = 0;
  CHECK_THROWS_AS(precision_curve(coherent30(), bad, {10}, 1), ConfigError);
}

TEST_CASE("coupling jitter") {
  const std::vector<double> grid{-0.05, -0.025, 0.0, 0.025, 0.05};
  const auto rep = jitter_sensitivity(coherent30(), Coupling(0.1), grid, 3);
  for (int m = 1; m <= 3; ++m) {
    CHECK(rep.slopes[m - 1] > 1.8 * m);
    CHECK(rep.slopes[m - 1] < 2.2 * m);
    CHECK(std::abs(rep.rel_deviation[m - 1][2]) < 1e-9);
    // A kernel built with too large |g| (true coupling smaller) underestimates.
    CHECK(rep.rel_deviation[m - 1][0] < 0.0);
  }
  CHECK_THROWS_AS(jitter_sensitivity(coherent30(), Coupling(0.1), {0.3}, 1), ConfigError);
}

TEST_CASE("single-shot budget") {
  SingleShotOptions o;
  o.max_drift_electrons = 40;
  const auto b = single_shot_budget(coherent30(), Coupling(0.1), 0.05, 1, o);
  CHECK(b.electrons_needed > 1000 / 3);
  CHECK(b.electrons_needed < 3000);
  CHECK(b.quadrature_growth == doctest::Approx(0.005 * b.electrons_needed));
  CHECK(b.state_variance == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(b.destructive);
  CHECK(b.regime_ok);
  CHECK(b.drift.size() == 40);
  CHECK(b.drift[39] < 2.0 * b.drift[19]);
  CHECK_THROWS_AS(single_shot_budget(coherent30(), Coupling(0.1), 0.0, 1), ConfigError);
}

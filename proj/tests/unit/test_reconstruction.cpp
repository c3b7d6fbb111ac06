#include <cmath>

#include "doctest.h"
#include "qpinem/error.hpp"
#include "qpinem/reconstruction.hpp"

using namespace qpinem;

namespace {

double raw_moment(const PhotonStatistics& st, int m) {
  double s = 0.0;
  for (int n = 0; n < st.size(); ++n) s += st.probs[n] * std::pow(n, m);
  return s;
}

}  // namespace

TEST_CASE("kernel coefficients") {
  CHECK(kernel_c(1, 1, 0.1) == doctest::Approx(0.01).epsilon(1e-14));
  // c_12 = -g^4 * 4!/(1! 3! 2! 2!) = -g^4
  CHECK(kernel_c(1, 2, 0.1) == doctest::Approx(-1e-4).epsilon(1e-13));
  CHECK(kernel_c(2, 2, 0.1) == doctest::Approx(1e-4 / 4.0).epsilon(1e-13));
  CHECK(kernel_c(3, 2, 0.1) == 0.0);
  CHECK(kernel_d(1, 1, 0.1) == doctest::Approx(100.0).epsilon(1e-13));
  CHECK(kernel_d(2, 1, 0.1) == 0.0);
  CHECK_THROWS_AS(kernel_c(1, 1, 0.0), ConfigError);
}

TEST_CASE("d inverts c") {
  const Coupling g(0.1);
  const auto kern = build_kernel(g, 6, 6);
  const Eigen::MatrixXd prod = kern.d * kern.c;
  CHECK((prod - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-8);

  const Eigen::MatrixXd numeric = kern.c.inverse();
  for (int m = 1; m <= 6; ++m) {
    for (int k = m; k <= 6; ++k) {
      CHECK(kern.d_at(m, k) == doctest::Approx(numeric(m - 1, k - 1)).epsilon(1e-6));
    }
  }
  // Larger truncation: d rows stay the same, c upper-triangular.
  const auto wide = build_kernel(g, 6, 12);
  for (int m = 1; m <= 6; ++m) CHECK(wide.d_at(m, 4) == kern.d_at(m, 4));
}

TEST_CASE("kernel overflow is reported") {
  CHECK_THROWS_AS(build_kernel(Coupling(1e-3), 80, 80), NumericalError);
  CHECK(max_feasible_order(1e-3, 80) < 80);
  CHECK(max_feasible_order(1e-3, 80) > 5);
}

TEST_CASE("vacuum inverts to zero moments") {
  const auto sp = spectrum_approx(statistics(make_fock(0, 2)), Coupling(0.1));
  const auto est = invert_spectrum(sp, Coupling(0.1), 3);
  for (int m = 1; m <= 3; ++m) CHECK(std::abs(est.moments(m)) < 1e-12);
}

TEST_CASE("noiseless roundtrip for coherent, thermal and squeezed light") {
  const Coupling g(0.1);
  const double r = std::asinh(std::sqrt(1000.0));
  for (const auto& st : {poisson_statistics(900.0, poisson_cutoff(900.0)),
                         statistics(make_thermal(1000.0, thermal_cutoff(1000.0, 1e-14))),
                         statistics(make_squeezed(0.0, r, 0.0, 80000, 1e-12))}) {
    const auto sp = spectrum_approx(st, g, std::nullopt, 1e-12);
    const auto est = invert_spectrum(sp, g, 3);
    for (int m = 1; m <= 3; ++m) {
      const double ref = raw_moment(st, m);
      CHECK(std::abs(est.moments(m) - ref) / ref < 1e-4);
      CHECK(std::abs(est.mirror_moments[m - 1] - est.moments(m)) / ref < 1e-6);
    }
    CHECK(est.status == MomentStatus::Ok);
  }
}

TEST_CASE("window too narrow for the kernel") {
  const auto sp = spectrum_approx(statistics(make_fock(4, 5)), Coupling(0.1), 3);
  CHECK_THROWS_AS(moments_from_spectrum(sp, build_kernel(Coupling(0.1), 2, 6)), ConfigError);
}

TEST_CASE("negative mean is flagged") {
  ElectronSpectrum sp;
  sp.k_min = -3;
  sp.k_max = 3;
  sp.probs = {0.0, 0.0, 0.0, 1.0, 0.0, -0.01, 0.0};
  const auto est = moments_from_spectrum(sp, build_kernel(Coupling(0.1), 1, 3));
  CHECK(est.status == MomentStatus::NoiseDominated);
  CHECK_FALSE(est.warnings.empty());
}

TEST_CASE("nnls") {
  Eigen::MatrixXd a(3, 2);
  a << 1, 0, 0, 1, 1, 1;
  Eigen::VectorXd b(3);
  b << 1, -1, 0;
  const auto x = nnls(a, b);
  CHECK(x(1) == 0.0);
  CHECK(x(0) == doctest::Approx(0.5));
}

TEST_CASE("statistics fit recovers a Fock state and a mixture") {
  const Coupling g(0.1);
  const auto sp = spectrum_approx(statistics(make_fock(400, 401)), g);
  std::vector<int> grid;
  for (int n = 0; n <= 800; n += 50) grid.push_back(n);
  const auto est = statistics_from_spectrum(sp, g, grid);
  CHECK(est.weights[8] == doctest::Approx(1.0).epsilon(1e-6));

  std::vector<double> p(801, 0.0);
  p[100] = 0.3;
  p[450] = 0.5;
  p[700] = 0.2;
  const auto sp2 = spectrum_approx(PhotonStatistics{p, 0.0}, g);
  const auto est2 = statistics_from_spectrum(sp2, g, grid);
  double tv = 0.0;
  for (int n = 0; n <= 800; ++n) tv += 0.5 * std::abs(est2.statistics.probs[n] - p[n]);
  CHECK(tv < 0.05);
  CHECK_THROWS_AS(statistics_from_spectrum(sp, g, {3, 2}), ConfigError);
}

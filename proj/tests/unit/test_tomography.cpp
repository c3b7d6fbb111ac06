#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "qpinem/error.hpp"
#include "qpinem/tomography.hpp"

using namespace qpinem;

namespace {

constexpr double kPi = std::numbers::pi;

double linf(const WignerGrid& a, const WignerGrid& b) {
  return (a.values - b.values).cwiseAbs().maxCoeff();
}

double max_diff(const ElectronSpectrum& a, const ElectronSpectrum& b) {
  double d = 0.0;
  for (int k = std::min(a.k_min, b.k_min); k <= std::max(a.k_max, b.k_max); ++k) {
    d = std::max(d, std::abs(a.at(k) - b.at(k)));
  }
  return d;
}

}  // namespace

TEST_CASE("angles and filter kernel") {
  const auto t = uniform_angles(4);
  CHECK(t[2] == doctest::Approx(kPi / 2));
  CHECK_THROWS_AS(uniform_angles(0), ConfigError);

  // Brute-force quadrature of 2 int_0^v nu (1 + cos(pi nu / v))/2 cos(2 pi nu s) d nu.
  const double dx = 0.05, v = 1.0 / (2.0 * dx);
  for (double s : {0.0, 0.05, 0.13, 1.0}) {
    const int n = 200000;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double nu = v * i / n;
      const double f = nu * 0.5 * (1.0 + std::cos(kPi * nu / v)) * std::cos(2.0 * kPi * nu * s);
      acc += (i == 0 || i == n ? 0.5 : 1.0) * f;
    }
    acc *= 2.0 * v / n;
    CHECK(ramp_hann_kernel(s, dx) == doctest::Approx(acc).epsilon(1e-6).scale(v * v));
  }
}

TEST_CASE("analytic marginals") {
  const auto x = linspace(-4.0, 4.0, 161);
  const auto vac = analytic_marginals(make_fock(0, 3), {0.0, 1.0}, x);
  for (std::size_t i = 0; i < x.size(); i += 20) {
    CHECK(vac[1].density[i] == doctest::Approx(std::sqrt(2.0 / kPi) * std::exp(-2.0 * x[i] * x[i])).epsilon(1e-12));
  }
  const auto sq = make_squeezed(cplx(0.3, 0.2), 0.5, 0.2, 80);
  const auto xs = linspace(-6.0, 6.0, 1201);
  for (double theta : {0.0, 0.7, 2.0}) {
    const auto d = analytic_marginals(sq, {theta}, xs)[0];
    CHECK(d.integral() == doctest::Approx(1.0).epsilon(1e-9));
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 1; i < xs.size(); ++i) {
      const double h = xs[i] - xs[i - 1];
      m1 += 0.5 * h * (xs[i] * d.density[i] + xs[i - 1] * d.density[i - 1]);
      m2 += 0.5 * h * (xs[i] * xs[i] * d.density[i] + xs[i - 1] * xs[i - 1] * d.density[i - 1]);
    }
    const auto ref = quadrature_moments(sq, theta, 2);
    CHECK(m1 == doctest::Approx(ref[0]).epsilon(1e-8));
    CHECK(m2 == doctest::Approx(ref[1]).epsilon(1e-8));
  }
}

TEST_CASE("inverse Radon recovers Gaussian Wigner functions") {
  const auto thetas = uniform_angles(40);
  const auto states = {make_fock(0, 3), make_coherent(cplx(1.0, -0.5), 40),
                       make_squeezed(0.0, 1.0, 0.0, 100), make_squeezed(0.0, 1.0, 0.6, 100)};
  for (const auto& s : states) {
    const auto x = linspace(-6.0, 6.0, 201);
    const auto axis = linspace(-5.0, 5.0, 101);
    const auto rec = inverse_radon(analytic_marginals(s, thetas, x), axis, axis);
    const auto ref = wigner(s, axis, axis);
    CHECK(linf(rec, ref) < 0.05 * ref.peak());
    CHECK(std::abs(rec.integral() - 1.0) < 2e-2);
  }
  CHECK_THROWS_AS(inverse_radon(analytic_marginals(make_fock(0, 2), uniform_angles(10), linspace(-3, 3, 31)),
                                {0.0}, {0.0}),
                  ConfigError);
}

TEST_CASE("inverse Radon shows cat fringes") {
  const double alpha = 2.0;
  const auto cat = make_cat(alpha, 1, 60);
  const auto x = linspace(-7.0, 7.0, 281);
  const std::vector<double> xs{0.0};
  const std::vector<double> ps{0.0, kPi / (4.0 * alpha), kPi / (2.0 * alpha)};
  const auto rec = inverse_radon(analytic_marginals(cat, uniform_angles(60), x), xs, ps);
  const auto ref = wigner(cat, xs, ps);
  CHECK(rec.values(0, 0) > 0.0);
  CHECK(rec.values(0, 1) < 0.0);
  CHECK(rec.values(0, 2) > 0.0);
  for (int j = 0; j < 3; ++j) CHECK(std::abs(rec.values(0, j) - ref.values(0, j)) < 0.1 * ref.peak());
}

TEST_CASE("density from moments") {
  const auto x = linspace(-5.0, 5.0, 401);
  const auto g = density_from_moments({0.5, 0.5 * 0.5 + 0.25}, x);
  CHECK(g.method == "gaussian");
  CHECK(g.integral() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(density_from_moments({1.0, 0.5}, x), NumericalError);
  // Mildly skewed input stays on the Gram-Charlier branch.
  const auto skew = density_from_moments({0.0, 0.25, 0.01, 3.0 * 0.0625}, x);
  CHECK(skew.method == "gram_charlier");
  // Strongly bimodal moments force the maximum-entropy fit.
  const double a = 1.5, v = 0.05;
  const std::vector<double> bimodal{0.0, a * a + v, 0.0, a * a * a * a + 6 * a * a * v + 3 * v * v};
  const auto me = density_from_moments(bimodal, x);
  CHECK(me.method == "max_entropy");
  double m2 = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double h = x[i] - x[i - 1];
    m2 += 0.5 * h * (x[i] * x[i] * me.density[i] + x[i - 1] * x[i - 1] * me.density[i - 1]);
  }
  CHECK(m2 == doctest::Approx(bimodal[1]).epsilon(1e-6));
}

TEST_CASE("homodyne scan recovers quadrature moments") {
  const Coupling g(0.1);
  const auto thetas = uniform_angles(6);
  const cplx alpha = std::polar(1.5, 0.4);
  const auto coh = make_coherent(alpha, 40);
  const auto scan = homodyne_scan(coh, 100.0, g, thetas);
  const auto mom = quadrature_moments_from_scan(scan, 2);
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    CHECK(mom[i][0] == doctest::Approx(std::abs(alpha) * std::cos(thetas[i] - std::arg(alpha))).epsilon(1e-6));
    CHECK(mom[i][1] - mom[i][0] * mom[i][0] == doctest::Approx(0.25).epsilon(1e-2));
  }

  const auto sq = make_squeezed(0.0, 1.0, 0.0, 100);
  const auto sscan = homodyne_scan(sq, 100.0, g, thetas);
  const auto smom = quadrature_moments_from_scan(sscan, 2);
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    CHECK(smom[i][1] - smom[i][0] * smom[i][0] ==
          doctest::Approx(quadrature_variance(sq, thetas[i])).epsilon(1e-2));
  }
  const auto dists = quadrature_from_scan(sscan);
  for (const auto& d : dists) CHECK(d.integral() == doctest::Approx(1.0).epsilon(1e-3));

  const auto vac = homodyne_scan(make_fock(0, 2), 100.0, g, thetas);
  for (std::size_t i = 1; i < thetas.size(); ++i) CHECK(max_diff(vac.spectra[i], vac.spectra[0]) < 1e-14);
  CHECK_THROWS_AS(homodyne_scan(coh, 5.0, g, thetas), ConfigError);
  ScanOptions one_sided;
  one_sided.opposite = false;
  CHECK_THROWS_AS(quadrature_moments_from_scan(homodyne_scan(coh, 100.0, g, thetas, one_sided), 2),
                  ConfigError);
}

TEST_CASE("exact scan engine agrees with the approximate one at small coupling") {
  const auto thetas = uniform_angles(3);
  const auto s = make_coherent(1.0, 30);
  ScanOptions ex;
  ex.engine = ScanEngine::Exact;
  const auto a = homodyne_scan(s, 100.0, Coupling(0.02), thetas);
  const auto b = homodyne_scan(s, 100.0, Coupling(0.02), thetas, ex);
  for (std::size_t i = 0; i < thetas.size(); ++i) CHECK(max_diff(a.spectra[i], b.spectra[i]) < 1e-3);
}

TEST_CASE("phase covariance of the scan") {
  const Coupling g(0.1);
  const auto thetas = uniform_angles(24);
  const auto s = make_coherent(1.0, 30);
  const double phi = 3.0 * kPi / 24.0;
  const auto m0 = quadrature_moments_from_scan(homodyne_scan(s, 100.0, g, thetas), 1);
  const auto m1 = quadrature_moments_from_scan(homodyne_scan(rotate(s, phi), 100.0, g, thetas), 1);
  auto argmax = [](const std::vector<std::vector<double>>& m) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(m.size()); ++i) {
      if (m[i][0] > m[best][0]) best = i;
    }
    return best;
  };
  CHECK(argmax(m1) - argmax(m0) == 3);
}

TEST_CASE("coherence endpoints and shapes") {
  const double n = 1000.0;
  std::vector<double> taus;
  for (int i = 0; i <= 60; ++i) taus.push_back(i * 1.0);
  CoherenceOptions quick;
  quick.with_spectra = false;
  const auto coh = coherence_scan(CoherenceSource::Coherent, n, 0.1, Coupling(0.01), taus, quick);
  const auto th = coherence_scan(CoherenceSource::Thermal, n, 0.1, Coupling(0.01), taus, quick);
  CHECK(coh.g2_mod.front() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(th.g2_mod.front() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(coh.g2_mod.back() - 2.0 * (1.0 - 1.0 / n)) < 1e-6);
  CHECK(std::abs(th.g2_mod.back() - 2.0 * (1.0 - 1.0 / n)) < 1e-6);
  CHECK(coh.g1_mod.front() == doctest::Approx(1.0));
  CHECK(coh.tilde_n.front() == doctest::Approx(n));
  double tv_c = 0.0, tv_t = 0.0;
  for (std::size_t i = 1; i < taus.size(); ++i) {
    tv_c += std::abs(coh.g2_mod[i] - coh.g2_mod[i - 1]);
    tv_t += std::abs(th.g2_mod[i] - th.g2_mod[i - 1]);
  }
  CHECK(*std::min_element(coh.g2_mod.begin(), coh.g2_mod.end()) < coh.g2_mod.back());
  CHECK(tv_t * 5.0 < tv_c);
  CHECK_THROWS_AS(parse_coherence_source("squeezed"), ConfigError);
  CHECK_THROWS_AS(coherence_scan(CoherenceSource::Thermal, n, 0.7, Coupling(0.01), taus), ConfigError);
}

TEST_CASE("coherence recovered from simulated spectra") {
  const double n = 400.0;
  const Coupling g(0.05);
  const std::vector<double> taus{0.0, 5.0, 10.0, 20.0, 40.0};
  for (auto src : {CoherenceSource::Coherent, CoherenceSource::Thermal}) {
    const auto r = coherence_scan(src, n, 0.1, g, taus);
    for (std::size_t i = 0; i < taus.size(); ++i) {
      const auto st = collective_statistics(src, n, r.g1[i]);
      CHECK(st.total() == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(st.mean() * (1.0 + r.g1[i]) / 2.0 == doctest::Approx(r.tilde_n[i]).epsilon(1e-8));
    }
    const auto est = coherence_from_spectra(r.spectra, r.spectra.front(), g);
    for (std::size_t i = 0; i < taus.size(); ++i) {
      CHECK(est.g1_mod[i] == doctest::Approx(r.g1_mod[i]).epsilon(1e-6));
      CHECK(est.g2_mod[i] == doctest::Approx(r.g2_mod[i]).epsilon(1e-5));
    }
  }
}

#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "qpinem/error.hpp"
#include "qpinem/interaction.hpp"
#include "qpinem/special.hpp"

using namespace qpinem;

namespace {

double max_diff(const ElectronSpectrum& a, const ElectronSpectrum& b) {
  double d = 0.0;
  for (int k = std::min(a.k_min, b.k_min); k <= std::max(a.k_max, b.k_max); ++k) {
    d = std::max(d, std::abs(a.at(k) - b.at(k)));
  }
  return d;
}

}  // namespace

TEST_CASE("amplitude identities") {
  const Coupling zero(0.0);
  CHECK(std::abs(amplitude_exact(5, 0, zero) - cplx(1.0)) < 1e-15);
  CHECK(std::abs(amplitude_exact(5, 2, zero)) == 0.0);

  const Coupling g(0.3, 0.4);
  CHECK(std::norm(amplitude_exact(0, -1, g)) == doctest::Approx(0.09 * std::exp(-0.09)).epsilon(1e-14));
  CHECK(std::abs(amplitude_exact(0, 1, g)) == 0.0);
  for (int n = 0; n < 30; ++n) {
    for (int k = -6; k <= std::min(n, 6); ++k) {
      CHECK(std::norm(amplitude_exact(n, k, g)) ==
            doctest::Approx(std::norm(amplitude_exact(n - k, -k, g))).epsilon(1e-12));
    }
  }
  // Columns of a unitary.
  const auto table = amplitude_table(20, -60, 60, Coupling(0.7));
  for (int n = 0; n < 20; ++n) CHECK(table.row(n).squaredNorm() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(std::abs(table(7, 60 + 3) - amplitude_exact(7, 3, Coupling(0.7))) < 1e-15);
}

TEST_CASE("exact spectrum basics") {
  const auto vac = spectrum_exact(make_fock(0, 4), Coupling(0.6));
  for (int k = 1; k <= vac.spectrum.k_max; ++k) CHECK(vac.spectrum.at(k) == 0.0);
  CHECK(vac.spectrum.total() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(vac.spectrum.at(-2) == doctest::Approx(std::pow(0.36, 2) / 2.0 * std::exp(-0.36)).epsilon(1e-13));
}

TEST_CASE("approximate engine tracks the exact engine at small coupling") {
  auto err = [](double g) {
    const double alpha = 3.0 / g;
    const auto s = make_coherent(alpha, poisson_cutoff(alpha * alpha));
    SpectrumOptions o;
    o.want_joint = false;
    o.want_post_state = false;
    const auto ex = spectrum_exact(s, Coupling(g), o).spectrum;
    const auto ap = spectrum_approx(statistics(s), Coupling(g));
    return max_diff(ex, ap);
  };
  const double e01 = err(0.1), e03 = err(0.3), e05 = err(0.5);
  CHECK(e01 < 1e-3);
  CHECK(e03 > e01);
  CHECK(e05 > e03);
  CHECK(e05 > 10.0 * e01);
}

TEST_CASE("approximate Fock spectrum equals the Bessel comb") {
  const auto st = statistics(make_fock(900, 901));
  const auto ap = spectrum_approx(st, Coupling(0.1));
  const auto cf = spectrum_closed_form(StateFamily::Fock, {0.0, 900}, Coupling(0.1));
  CHECK(max_diff(ap, cf) < 1e-14);
  const auto j = special::bessel_j_sequence(6.0, 2);
  CHECK(ap.at(-2) == doctest::Approx(j[2] * j[2]).epsilon(1e-13));
}

TEST_CASE("closed forms") {
  const auto th = spectrum_closed_form(StateFamily::Thermal, {1.0 / (0.1 * 0.1), 0}, Coupling(0.1));
  CHECK(th.at(0) == doctest::Approx(0.308508322553671).epsilon(1e-13));
  const auto sv = spectrum_closed_form(StateFamily::SqueezedVacuum, {1e-12, 0}, Coupling(0.1));
  CHECK(sv.at(0) == doctest::Approx(1.0).epsilon(1e-9));
  // Coherent closed form reduces to the Fock form as <n> grows at fixed beta.
  const auto big = spectrum_closed_form(StateFamily::Coherent, {1e10, 0}, Coupling(3e-5));
  const auto j = special::bessel_j_sequence(6.0, 3);
  CHECK(big.at(3) == doctest::Approx(j[3] * j[3]).epsilon(1e-8));
  CHECK(th.total() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sv.total() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(parse_family("laser"), ConfigError);
}

TEST_CASE("energy bookkeeping and postselection") {
  const auto s = make_coherent(cplx(2.0, 1.0), 60);
  const Coupling g(0.4, 0.2);
  const auto out = spectrum_exact(s, g);
  const double gain = out.spectrum.mean_k();
  const double dn = out.post_state->mean_photon_number() - s.mean_photon_number();
  CHECK(gain == doctest::Approx(-dn).epsilon(1e-8));

  const auto& joint = *out.joint;
  CHECK(joint.marginal_k().total() == doctest::Approx(1.0).epsilon(1e-8));
  const auto traced = statistics(*out.post_state);
  std::vector<double> mix(joint.n_count(), 0.0);
  for (int k = joint.k_min; k <= joint.k_max; ++k) {
    const double pk = out.spectrum.at(k);
    if (pk < 1e-300) continue;
    const auto cond = postselect_state(joint, k);
    for (int n = 0; n < joint.n_count(); ++n) mix[n] += pk * cond.probs[n];
  }
  for (int n = 0; n < traced.size(); ++n) CHECK(mix[n] == doctest::Approx(traced.probs[n]).epsilon(1e-9));
}

TEST_CASE("postselection special cases") {
  const auto fock = spectrum_exact(make_fock(5, 6), Coupling(0.3));
  const auto cond = postselect_state(*fock.joint, 1);
  CHECK(cond.probs[4] == doctest::Approx(1.0));
  const auto idle = spectrum_exact(make_thermal(1.0, 60), Coupling(0.0));
  const auto same = postselect_state(*idle.joint, 0);
  const auto orig = statistics(make_thermal(1.0, 60));
  for (int n = 0; n < 60; ++n) CHECK(same.probs[n] == doctest::Approx(orig.probs[n]).epsilon(1e-12));
  CHECK_THROWS_AS(postselect_state(*fock.joint, 6), ConfigError);
}

TEST_CASE("back-action") {
  const auto st = statistics(make_coherent(5.0, 80));
  const auto approx = traced_statistics_approx(st, Coupling(0.2));
  for (int n = 0; n < st.size(); ++n) CHECK(std::abs(approx.probs[n] - st.probs[n]) < 1e-12);

  const auto small = traced_back_action(make_coherent(5.0, 80), Coupling(0.1), 1);
  CHECK(small.deviation[0] < 0.01);
  const auto many = traced_back_action(make_coherent(5.0, 80), Coupling(0.1), 8);
  CHECK(many.deviation[7] < 2.0 * many.deviation[3]);
  CHECK(many.deviation[3] < 2.0 * many.deviation[1]);
}

TEST_CASE("quadrature variance growth") {
  const auto none = quadrature_growth(make_coherent(1.0, 40), Coupling(0.0), 2);
  CHECK(none.evolved == doctest::Approx(none.initial).epsilon(1e-12));
  const auto one = quadrature_growth(make_coherent(cplx(1.0, 0.5), 40), Coupling(0.1), 1);
  CHECK(one.evolved - one.initial == doctest::Approx(0.005).epsilon(1e-6));
  const auto sq = quadrature_growth(make_squeezed(0.0, 0.5, 0.0, 80), Coupling(0.1, 0.7), 3, 0.4);
  CHECK(sq.evolved - sq.initial == doctest::Approx(0.015).epsilon(1e-6));
}

TEST_CASE("multi-point composition") {
  CHECK(compose_interactions(Coupling(0.1), 1).coupling.magnitude == doctest::Approx(0.1));
  CHECK(compose_interactions(Coupling(0.1), 4).coupling.magnitude == doctest::Approx(0.2));
  CHECK_THROWS_AS(compose_interactions(Coupling(0.1), 0), ConfigError);
}

TEST_CASE("two-point spectrum") {
  const Coupling g(0.1);
  const cplx lo(10.0, 0.0);
  const auto vac = two_point_spectrum(make_fock(0, 2), lo, 0.3, g);
  const auto comb = classical_spectrum(lo, g);
  // With vacuum at the quantum stage only vacuum fluctuations broaden the comb slightly.
  CHECK(max_diff(vac, spectrum_exact(displace(make_fock(0, 2), lo * std::polar(1.0, 0.3)), g).spectrum) < 1e-10);

  TwoPointOptions lo_only;
  lo_only.lo_coupling = g;
  const auto a = two_point_spectrum(make_coherent(1.0, 40), lo, 0.0, Coupling(0.0), lo_only);
  const auto b = two_point_spectrum(make_coherent(1.0, 40), lo, 1.7, Coupling(0.0), lo_only);
  CHECK(max_diff(a, b) < 1e-14);
  CHECK(max_diff(a, comb) < 1e-14);

  const auto cat = make_cat(2.0, 1, 60);
  const auto mix = make_mixed_pair(2.0, 60);
  const cplx lo2(20.0, 0.0);
  for (double theta : {0.0, 0.6}) {
    const auto sc = two_point_spectrum(cat, lo2, theta, g);
    const auto ref = spectrum_exact(displace(cat, lo2 * std::polar(1.0, theta)), g).spectrum;
    CHECK(max_diff(sc, ref) < 1e-10);
    TwoPointOptions flipped;
    flipped.quantum_first = true;
    CHECK(max_diff(sc, two_point_spectrum(cat, lo2, theta, g, flipped)) < 1e-13);
    CHECK(max_diff(two_point_spectrum(mix, lo2, theta, g),
                   spectrum_exact(displace(mix, lo2 * std::polar(1.0, theta)), g).spectrum) < 1e-10);
  }
  const auto dc = two_point_spectrum(cat, lo2, std::numbers::pi / 2, g);
  const auto dm = two_point_spectrum(mix, lo2, std::numbers::pi / 2, g);
  CHECK(max_diff(dc, dm) > 1e-6);
}

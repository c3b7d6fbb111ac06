#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "qpinem/oracle.hpp"

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

TEST_CASE("oracle with zero coupling is the identity") {
  const auto s = make_coherent(1.0, 30);
  const auto out = oracle_spectrum(s, Coupling(0.0));
  CHECK(out.spectrum.at(0) == doctest::Approx(1.0).epsilon(1e-14));
  const auto p = out.post_state->diagonal();
  const auto q = s.diagonal();
  for (int n = 0; n < 20; ++n) CHECK(p[n] == doctest::Approx(q[n]).epsilon(1e-12));
}

TEST_CASE("oracle is unitary and matches the exact engine") {
  const auto s = make_coherent(3.0, 60);
  const auto ora = oracle_spectrum(s, Coupling(0.3));
  CHECK(ora.spectrum.total() == doctest::Approx(1.0).epsilon(1e-10));
  const auto ex = spectrum_exact(s, Coupling(0.3));
  CHECK(max_diff(ora.spectrum, ex.spectrum) < 1e-8);
}

TEST_CASE("oracle traced state matches the exact channel including coherences") {
  const auto s = make_squeezed(cplx(0.5, 0.2), 0.3, 0.1, 40);
  const Coupling g(0.4, 0.9);
  const auto ora = oracle_spectrum(s, g);
  const auto ex = spectrum_exact(s, g);
  const int n = std::min(ora.post_state->cutoff(), ex.post_state->cutoff());
  const CMatrix a = ora.post_state->dense().topLeftCorner(n, n);
  const CMatrix b = ex.post_state->dense().topLeftCorner(n, n);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("oracle laser stage reproduces the two-point engine") {
  const auto cat = make_cat(1.0, 1, 30);
  const Coupling g(0.2);
  const cplx field = std::polar(4.0, 0.8);
  OracleOptions o;
  o.lo_field = field;
  const auto ora = oracle_spectrum(cat, g, o);
  const auto tp = two_point_spectrum(cat, std::abs(field), std::arg(field), g);
  CHECK(max_diff(ora.spectrum, tp) < 1e-9);
}

TEST_CASE("two-mode oracle agrees with the composed coupling") {
  const cplx a1(1.0, 0.3), a2(0.4, -0.5);
  const Coupling g(0.3);
  const auto two = oracle_two_mode_spectrum(a1, a2, 16, g);
  const auto composed = compose_interactions(g, 2).coupling;
  const auto single = spectrum_exact(make_coherent((a1 + a2) / std::sqrt(2.0), 40), composed);
  CHECK(max_diff(two, single.spectrum) < 1e-8);
}

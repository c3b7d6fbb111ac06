#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qpinem/error.hpp"
#include "qpinem/experiment.hpp"
#include "qpinem/oracle.hpp"
#include "qpinem/reconstruction.hpp"
#include "qpinem/tomography.hpp"

namespace py = pybind11;
using namespace qpinem;

namespace {

py::dict spectrum_dict(const ElectronSpectrum& s) {
  std::vector<int> ks;
  for (int k = s.k_min; k <= s.k_max; ++k) ks.push_back(k);
  py::dict d;
  d["k"] = ks;
  d["probability"] = s.probs;
  d["leakage"] = s.leakage;
  d["engine"] = s.engine;
  return d;
}

ElectronSpectrum spectrum_from(const std::vector<int>& ks, const std::vector<double>& probs) {
  if (ks.empty() || ks.size() != probs.size()) throw ConfigError("k and probability must be non-empty and equal length");
  for (std::size_t i = 1; i < ks.size(); ++i) {
    if (ks[i] != ks[i - 1] + 1) throw ConfigError("k must be consecutive integers");
  }
  ElectronSpectrum s;
  s.k_min = ks.front();
  s.k_max = ks.back();
  s.probs = probs;
  s.engine = "input";
  return s;
}

std::optional<int> width(int half_width) { return half_width > 0 ? std::optional<int>(half_width) : std::nullopt; }

}  // namespace

PYBIND11_MODULE(_qpinem, m) {
  m.doc() = "Free-electron quantum optics core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<PhotonicState>(m, "PhotonicState")
      .def_property_readonly("cutoff", &PhotonicState::cutoff)
      .def_property_readonly("label", &PhotonicState::label)
      .def_property_readonly("tail_mass", &PhotonicState::tail_mass)
      .def("diagonal", &PhotonicState::diagonal)
      .def("dense", &PhotonicState::dense)
      .def("mean_photon_number", &PhotonicState::mean_photon_number)
      .def("__repr__", [](const PhotonicState& s) { return "<PhotonicState " + s.label() + ">"; });

  m.def("fock", &make_fock, py::arg("n"), py::arg("cutoff"));
  m.def("coherent", &make_coherent, py::arg("alpha"), py::arg("cutoff"), py::arg("tail_tol") = kDefaultTailTol);
  m.def("thermal", &make_thermal, py::arg("mean_n"), py::arg("cutoff"), py::arg("tail_tol") = kDefaultTailTol);
  m.def("squeezed", &make_squeezed, py::arg("alpha"), py::arg("r"), py::arg("phi"), py::arg("cutoff"),
        py::arg("tail_tol") = kDefaultTailTol);
  m.def("cat", &make_cat, py::arg("alpha"), py::arg("parity"), py::arg("cutoff"), py::arg("tail_tol") = kDefaultTailTol);
  m.def("mixed_pair", &make_mixed_pair, py::arg("alpha"), py::arg("cutoff"), py::arg("tail_tol") = kDefaultTailTol);
  m.def("poisson_cutoff", &poisson_cutoff);
  m.def("thermal_cutoff", &thermal_cutoff, py::arg("mean_n"), py::arg("tail_tol") = kDefaultTailTol);
  m.def("purity", &purity);
  m.def("quadrature_moments", &quadrature_moments, py::arg("state"), py::arg("theta"), py::arg("order"));
  m.def(
      "wigner",
      [](const PhotonicState& s, const std::vector<double>& x, const std::vector<double>& p) {
        return wigner(s, x, p).values;
      },
      py::arg("state"), py::arg("x"), py::arg("p"));

  m.def(
      "amplitude", [](int n, int k, double g, double phase) { return amplitude_exact(n, k, Coupling(g, phase)); },
      py::arg("n"), py::arg("k"), py::arg("g"), py::arg("phase") = 0.0);
  m.def(
      "spectrum",
      [](const PhotonicState& s, double g, const std::string& engine, int half_width) {
        const Coupling c(g);
        if (engine == "approx") return spectrum_dict(spectrum_approx(statistics(s), c, width(half_width)));
        if (engine == "oracle") {
          OracleOptions o;
          o.half_width = width(half_width);
          return spectrum_dict(oracle_spectrum(s, c, o).spectrum);
        }
        if (engine != "exact") throw ConfigError("engine must be exact, approx or oracle");
        SpectrumOptions o;
        o.half_width = width(half_width);
        o.want_joint = false;
        o.want_post_state = false;
        return spectrum_dict(spectrum_exact(s, c, o).spectrum);
      },
      py::arg("state"), py::arg("g"), py::arg("engine") = "approx", py::arg("half_width") = 0);
  m.def(
      "spectrum_closed_form",
      [](const std::string& family, double mean_n, int n, double g, int half_width) {
        return spectrum_dict(spectrum_closed_form(parse_family(family), {mean_n, n}, Coupling(g), width(half_width)));
      },
      py::arg("family"), py::arg("mean_n") = 0.0, py::arg("n") = 0, py::arg("g") = 0.1, py::arg("half_width") = 0);

  m.def("kernel_c", &kernel_c, py::arg("k"), py::arg("m"), py::arg("g"));
  m.def("kernel_d", &kernel_d, py::arg("m"), py::arg("k"), py::arg("g"));
  m.def(
      "invert_spectrum",
      [](const std::vector<int>& ks, const std::vector<double>& probs, double g, int order, double tol) {
        const auto est = invert_spectrum(spectrum_from(ks, probs), Coupling(g), order, PeakPolicy{tol, 0.0});
        py::dict d;
        d["moments"] = est.moments.values;
        d["errors_est"] = est.error_estimate;
        d["mirror_moments"] = est.mirror_moments;
        d["peaks"] = est.peaks;
        d["status"] = est.status == MomentStatus::Ok ? "ok" : "noise_dominated";
        d["warnings"] = est.warnings;
        return d;
      },
      py::arg("k"), py::arg("probability"), py::arg("g"), py::arg("order") = 3, py::arg("tol") = 1e-9);
  m.def(
      "sample_spectrum",
      [](const std::vector<int>& ks, const std::vector<double>& probs, int electrons, std::uint64_t seed) {
        return spectrum_dict(sample_spectrum(spectrum_from(ks, probs), electrons, seed));
      },
      py::arg("k"), py::arg("probability"), py::arg("electrons"), py::arg("seed") = 1);

  m.def(
      "coherence_scan",
      [](const std::string& source, double mean_n, double bandwidth, double g, const std::vector<double>& taus) {
        CoherenceOptions o;
        o.with_spectra = false;
        const auto r = coherence_scan(parse_coherence_source(source), mean_n, bandwidth, Coupling(g), taus, o);
        py::dict d;
        d["tau"] = r.taus;
        d["g1_mod"] = r.g1_mod;
        d["g2_mod"] = r.g2_mod;
        return d;
      },
      py::arg("source"), py::arg("mean_n"), py::arg("bandwidth"), py::arg("g"), py::arg("taus"));
  m.def(
      "homodyne_moments",
      [](const PhotonicState& s, double lo_ratio, double g, int angles, int order) {
        const auto thetas = uniform_angles(angles);
        py::dict d;
        d["theta"] = thetas;
        d["moments"] = quadrature_moments_from_scan(homodyne_scan(s, lo_ratio, Coupling(g), thetas), order);
        return d;
      },
      py::arg("state"), py::arg("lo_ratio") = 100.0, py::arg("g") = 0.1, py::arg("angles") = 40,
      py::arg("order") = 2);
  m.def(
      "precision_curve",
      [](const PhotonicState& s, double g, const std::vector<int>& electrons, int realizations, std::uint64_t seed,
         int order) {
        ExperimentConfig cfg;
        cfg.g = Coupling(g);
        cfg.realizations = realizations;
        cfg.seed = seed;
        const auto rep = precision_curve(s, cfg, electrons, order);
        std::vector<std::vector<double>> rel;
        for (const auto& p : rep.points) rel.push_back(p.rel_error);
        py::dict d;
        d["electrons"] = electrons;
        d["rel_error"] = rel;
        d["slopes"] = rep.slopes;
        return d;
      },
      py::arg("state"), py::arg("g"), py::arg("electrons"), py::arg("realizations") = 100, py::arg("seed") = 1,
      py::arg("order") = 1);
}

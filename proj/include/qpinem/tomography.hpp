#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qpinem/fockspace.hpp"
#include "qpinem/interaction.hpp"
#include "qpinem/reconstruction.hpp"

namespace qpinem {

// count angles uniformly over [0, pi).
std::vector<double> uniform_angles(int count);

enum class ScanEngine { Approx, Exact };
ScanEngine parse_scan_engine(const std::string& name);
std::string scan_engine_name(ScanEngine engine);

struct ScanOptions {
  // Approx: Bessel-regime spectrum of the statistics of D(alpha) rho D(alpha)^dagger.
  // Exact: coherent ladder sum of the two interaction stages.
  ScanEngine engine = ScanEngine::Approx;
  std::optional<int> half_width;
  double spec_tol = kDefaultSpecTol;
  bool quantum_first = false;
  // Also record spectra at theta + pi, needed to separate odd and even quadrature terms.
  bool opposite = true;
  double tail_tol = kDefaultTailTol;
};

struct HomodyneScan {
  std::vector<double> thetas;
  std::vector<ElectronSpectrum> spectra;
  std::vector<ElectronSpectrum> spectra_opposite;
  ElectronSpectrum lo_only;
  ElectronSpectrum quantum_only;
  cplx lo_amplitude;
  Coupling g;
  ScanEngine engine = ScanEngine::Approx;
};

// |alpha_LO|^2 = lo_ratio * max(<n>, 1).
double lo_amplitude_for(const PhotonicState& state, double lo_ratio);

HomodyneScan homodyne_scan(const PhotonicState& state, double lo_ratio, Coupling g,
                           const std::vector<double>& thetas, const ScanOptions& opts = {});

struct QuadratureDistribution {
  double theta = 0.0;
  std::vector<double> x_grid;
  std::vector<double> density;
  // <X(theta)^m>, m = 1 .. order; empty for analytic marginals.
  std::vector<double> moments;
  std::string method;
  std::vector<std::string> warnings;

  // Trapezoid integral of the density.
  double integral() const;
};

struct QuadratureOptions {
  int order = 2;
  // Shared evaluation grid; chosen from the recovered moments when empty.
  std::vector<double> x_grid;
  int grid_points = 201;
  PeakPolicy policy;
};

// Per-angle quadrature moments <X(theta)^m>, m = 1..order, from the scan spectra.
std::vector<std::vector<double>> quadrature_moments_from_scan(const HomodyneScan& scan, int order,
                                                              const PeakPolicy& policy = {});

std::vector<QuadratureDistribution> quadrature_from_scan(const HomodyneScan& scan,
                                                         const QuadratureOptions& opts = {});

// Density on x_grid matching the given raw moments (Gram-Charlier, maximum-entropy fallback).
QuadratureDistribution density_from_moments(const std::vector<double>& moments,
                                            const std::vector<double>& x_grid);

// pr(x | theta) = <x_theta| rho |x_theta> evaluated directly from the density matrix.
std::vector<QuadratureDistribution> analytic_marginals(const PhotonicState& state,
                                                       const std::vector<double>& thetas,
                                                       const std::vector<double>& x_grid);

// Filtered back-projection with a Hann-apodized ramp filter.
WignerGrid inverse_radon(const std::vector<QuadratureDistribution>& distributions,
                         const std::vector<double>& x_axis, const std::vector<double>& p_axis);

// Spatial ramp-Hann kernel h(s) for sample spacing dx.
double ramp_hann_kernel(double s, double dx);

enum class CoherenceSource { Coherent, Thermal };
CoherenceSource parse_coherence_source(const std::string& name);
std::string coherence_source_name(CoherenceSource source);

struct CoherenceOptions {
  bool with_spectra = true;
  std::optional<int> half_width;
  double spec_tol = kDefaultSpecTol;
};

struct CoherenceResult {
  CoherenceSource source = CoherenceSource::Coherent;
  double mean_n = 0.0;
  double bandwidth = 0.0;
  std::vector<double> taus;
  // First-order coherence of the delayed pair, exp(-(bandwidth tau)^2 / 2).
  std::vector<double> g1;
  std::vector<double> g1_mod;
  std::vector<double> g2_mod;
  std::vector<double> tilde_n;
  std::vector<double> tilde_n2;
  // Electron spectra after both interaction points, one per tau.
  std::vector<ElectronSpectrum> spectra;
  Coupling g;
};

// <n~> and <n~^2> of the delayed pair at first-order coherence gamma.
std::pair<double, double> tilde_moments(CoherenceSource source, double mean_n, double gamma);

// Photon statistics of the collective mode (a(0) + a(tau)) / sqrt(2 + 2 gamma).
PhotonStatistics collective_statistics(CoherenceSource source, double mean_n, double gamma);

CoherenceResult coherence_scan(CoherenceSource source, double mean_n, double bandwidth, Coupling g,
                               const std::vector<double>& taus, const CoherenceOptions& opts = {});

struct CoherenceEstimate {
  std::vector<double> g1_mod;
  std::vector<double> g2_mod;
  std::vector<double> tilde_n;
  std::vector<double> tilde_n2;
};

// Recovers g~(1), g~(2) from measured spectra by kernel inversion with coupling 2g;
// reference is the spectrum at zero delay.
CoherenceEstimate coherence_from_spectra(const std::vector<ElectronSpectrum>& spectra,
                                         const ElectronSpectrum& reference, Coupling g,
                                         const PeakPolicy& policy = {});

}  // namespace qpinem

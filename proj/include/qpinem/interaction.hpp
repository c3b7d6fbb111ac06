#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qpinem/fockspace.hpp"

namespace qpinem {

inline constexpr double kDefaultSpecTol = 1e-8;

// Single-point electron-photon coupling g = magnitude * e^{i phase}.
struct Coupling {
  double magnitude = 0.0;
  double phase = 0.0;

  Coupling() = default;
  Coupling(double mag, double ph = 0.0);
  static Coupling from_complex(cplx g);

  cplx value() const;
  // Classical interaction strength |g| sqrt(<n>).
  double beta(double mean_n) const;
};

// Probabilities over the electron energy-ladder index k (photons absorbed, k > 0,
// or emitted, k < 0) on the window [k_min, k_max].
struct ElectronSpectrum {
  int k_min = 0;
  int k_max = 0;
  std::vector<double> probs{1.0};
  // Probability mass that fell outside the window.
  double leakage = 0.0;
  std::string engine;

  int size() const { return static_cast<int>(probs.size()); }
  double at(int k) const {
    return k >= k_min && k <= k_max ? probs[static_cast<std::size_t>(k - k_min)] : 0.0;
  }
  double total() const;
  double mean_k() const;
};

// P(n, k) indexed by the photon number after the interaction (rows 0..n_count-1)
// and the electron index k (columns k_min..k_max).
struct JointDistribution {
  int k_min = 0;
  int k_max = 0;
  Eigen::MatrixXd probs;

  int n_count() const { return static_cast<int>(probs.rows()); }
  double at(int n, int k) const;
  ElectronSpectrum marginal_k() const;
  PhotonStatistics marginal_n() const;
};

struct InteractionOutcome {
  ElectronSpectrum spectrum;
  // Photonic state after tracing out the electron; empty when not requested.
  std::optional<PhotonicState> post_state;
  std::optional<JointDistribution> joint;
};

struct SpectrumOptions {
  // Half-width K of the symmetric window [-K, K]; chosen automatically when unset.
  std::optional<int> half_width;
  double spec_tol = kDefaultSpecTol;
  bool want_joint = true;
  bool want_post_state = true;
};

// ceil(2 beta + 10 sqrt(beta + 1)).
int default_half_width(double beta);

// <n - k| D(g) |n>: amplitude for an electron to gain k quanta from n photons.
cplx amplitude_exact(int n, int k, Coupling g);

// amplitudes(n, k - k_min) = amplitude_exact(n, k, g) for n < n_count.
Eigen::MatrixXcd amplitude_table(int n_count, int k_min, int k_max, Coupling g);

InteractionOutcome spectrum_exact(const PhotonicState& state, Coupling g,
                                  const SpectrumOptions& opts = {});

// P_k = sum_n p_n J_k(2|g| sqrt(n))^2.
ElectronSpectrum spectrum_approx(const PhotonStatistics& stats, Coupling g,
                                 std::optional<int> half_width = std::nullopt,
                                 double spec_tol = kDefaultSpecTol);

enum class StateFamily { Fock, Coherent, Thermal, SqueezedVacuum };
StateFamily parse_family(const std::string& name);
std::string family_name(StateFamily family);

struct ClosedFormParams {
  double mean_n = 0.0;  // coherent, thermal, squeezed vacuum
  int n = 0;            // Fock
};

// Large-<n> spectra: Fock J_k^2, coherent J_k^2 + F/<n>, thermal e^{-2b^2} I_k(2b^2),
// squeezed vacuum via 2F2.
ElectronSpectrum spectrum_closed_form(StateFamily family, const ClosedFormParams& params,
                                      Coupling g, std::optional<int> half_width = std::nullopt);

// Coherent-state O(1/<n>) correction F(beta) at index k.
double coherent_correction(int k, double beta);

// Photon statistics conditioned on the electron having gained k quanta.
PhotonStatistics postselect_state(const JointDistribution& joint, int k);

// Photon statistics after tracing out one electron in the Bessel regime:
// p'_n = p_n sum_k J_k(2|g| sqrt(n))^2.
PhotonStatistics traced_statistics_approx(const PhotonStatistics& stats, Coupling g);

struct BackActionTrace {
  // steps[0] is the input; steps[j] follows j electrons.
  std::vector<PhotonStatistics> steps;
  // deviation[j-1] = max_n |p^(j)_n - p^(0)_n|.
  std::vector<double> deviation;
  std::vector<double> leakage;
};

// Electrons interact one after another; each is traced out with the exact engine.
BackActionTrace traced_back_action(const PhotonicState& state, Coupling g, int electrons,
                                   double spec_tol = kDefaultSpecTol);

// Exact traced-out channel on a full density matrix (coherences included).
PhotonicState traced_post_state(const PhotonicState& state, Coupling g,
                                double spec_tol = kDefaultSpecTol);

struct QuadratureGrowth {
  double initial = 0.0;
  // initial + N_e |g|^2 / 2
  double predicted = 0.0;
  // Variance after N_e exact traced-out interactions.
  double evolved = 0.0;
  std::vector<double> per_electron;
};

QuadratureGrowth quadrature_growth(const PhotonicState& state, Coupling g, int electrons,
                                   double theta = 0.0, double spec_tol = kDefaultSpecTol);

struct ComposedCoupling {
  Coupling coupling;
  int points = 1;
  // Describes the collective mode (a_1 + ... + a_N) / sqrt(N).
  std::string mode;
};

ComposedCoupling compose_interactions(Coupling g, int points);

struct TwoPointOptions {
  std::optional<int> half_width;
  double spec_tol = kDefaultSpecTol;
  // Quantum stage before the laser stage; the stages commute, so the spectrum is unchanged.
  bool quantum_first = false;
  // Coupling of the laser stage when it differs from the quantum stage.
  std::optional<Coupling> lo_coupling;
};

// Laser-only PINEM comb P_k = J_k(2|g||alpha|)^2.
ElectronSpectrum classical_spectrum(cplx lo_field, Coupling g,
                                    std::optional<int> half_width = std::nullopt,
                                    double spec_tol = kDefaultSpecTol);

// Electron driven first by a classical field lo_amplitude e^{i theta} and then by the
// quantum light. Ladder amplitudes are summed before squaring.
ElectronSpectrum two_point_spectrum(const PhotonicState& state, cplx lo_amplitude, double theta,
                                    Coupling g, const TwoPointOptions& opts = {});

}  // namespace qpinem

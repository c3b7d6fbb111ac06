#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qpinem/fockspace.hpp"
#include "qpinem/interaction.hpp"
#include "qpinem/reconstruction.hpp"

namespace qpinem {

// Counter-based generator: every (seed, stream, counter) triple maps to a fixed value,
// so draws do not depend on evaluation order.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t bits(std::uint64_t counter) const;
  // Uniform on [0, 1) with 53 random bits.
  double uniform(std::uint64_t counter) const;
  // Standard normal from two counters (Box-Muller).
  double normal(std::uint64_t counter) const;

 private:
  std::uint64_t key_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Stream id for realization r at a sweep point (precision sweeps use the electron count).
std::uint64_t substream(std::uint64_t point, std::uint64_t realization);

struct ExperimentConfig {
  int electrons = 1000;
  int realizations = 100;
  Coupling g{0.1};
  // Relative standard deviation of |g| between realizations.
  double g_jitter = 0.0;
  std::uint64_t seed = 1;
};

void validate(const ExperimentConfig& config);

// Normalized histogram of n_electrons categorical draws from the spectrum.
ElectronSpectrum sample_spectrum(const ElectronSpectrum& spectrum, int n_electrons,
                                 std::uint64_t seed, std::uint64_t stream = 0);

// Moments from a sampled spectrum; the kernel spans every observed positive peak.
MomentEstimate invert_sampled(const ElectronSpectrum& sampled, Coupling g, int order);

struct PrecisionPoint {
  int electrons = 0;
  // Mean over realizations of |<n^m>_est - <n^m>| / <n^m>, m = 1..M.
  std::vector<double> rel_error;
  // Standard error of that mean.
  std::vector<double> rel_error_sem;
  int failures = 0;
};

struct PrecisionReport {
  int order = 0;
  int realizations = 0;
  std::uint64_t seed = 0;
  Coupling g;
  std::vector<double> true_moments;
  std::vector<PrecisionPoint> points;
  // Log-log slope of rel_error against N for each m (needs >= 2 sweep points).
  std::vector<double> slopes;
  std::vector<std::string> warnings;
};

PrecisionReport precision_curve(const PhotonicState& state, const ExperimentConfig& config,
                                const std::vector<int>& electron_grid, int order);

struct JitterReport {
  std::vector<double> jitters;
  // rel_deviation[m-1][j] = (<n^m>(g (1 + jitter_j)) - <n^m>) / <n^m> with the nominal kernel.
  std::vector<std::vector<double>> rel_deviation;
  std::vector<double> slopes;
};

JitterReport jitter_sensitivity(const PhotonicState& state, Coupling g,
                                const std::vector<double>& jitters, int order);

struct SingleShotOptions {
  // Calibration point of the N^{-1/2} precision model.
  int calibration_electrons = 1000;
  int realizations = 100;
  std::uint64_t seed = 1;
  // Exact sequential trace-out is evaluated for at most this many electrons.
  int max_drift_electrons = 1000;
};

struct SingleShotBudget {
  int electrons_needed = 0;
  double target = 0.0;
  double calibration_error = 0.0;
  // |g| sqrt(<n>), reported against the |g| sqrt(<n>) ~ 1 regime.
  double beta = 0.0;
  bool regime_ok = true;
  // N_e |g|^2 / 2 and the state's smallest quadrature variance.
  double quadrature_growth = 0.0;
  double state_variance = 0.0;
  bool destructive = false;
  // Statistics drift max_n |p_n - p_n^(0)| after each electron (truncated at max_drift_electrons).
  std::vector<double> drift;
  std::vector<std::string> warnings;
};

SingleShotBudget single_shot_budget(const PhotonicState& state, Coupling g, double target, int order,
                                    const SingleShotOptions& opts = {});

}  // namespace qpinem

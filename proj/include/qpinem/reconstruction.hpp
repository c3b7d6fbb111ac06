#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qpinem/fockspace.hpp"
#include "qpinem/interaction.hpp"

namespace qpinem {

// Linear map between photon-number moments and positive-k electron peaks:
//   P_k = sum_{m>=k} c_km <n^m>,   <n^m> = sum_{k>=m} d_mk P_k.
struct MomentKernel {
  double g_magnitude = 0.0;
  int order = 0;  // M
  int peaks = 0;  // K
  // c(k-1, m-1) for k = 1..K, m = 1..M.
  Eigen::MatrixXd c;
  // d(m-1, k-1) for m = 1..M, k = 1..K.
  Eigen::MatrixXd d;

  double c_at(int k, int m) const { return c(k - 1, m - 1); }
  double d_at(int m, int k) const { return d(m - 1, k - 1); }
};

// Single coefficients evaluated in log space with exact signs. Throw NumericalError
// when the value is not representable in double precision.
double kernel_c(int k, int m, double g_magnitude);
double kernel_d(int m, int k, double g_magnitude);

// Largest order M whose coefficients up to K peaks stay finite.
int max_feasible_order(double g_magnitude, int peaks);

MomentKernel build_kernel(Coupling g, int order, int peaks);

struct PeakPolicy {
  // Stop once the remaining peaks change every moment by less than this fraction.
  double tolerance = 1e-9;
  // Peaks at or below this probability are treated as noise.
  double noise_floor = 0.0;
};

// Smallest K >= M whose remainder sum_{k>K} d_mk P_k is below tolerance times the
// running estimate for every m, capped at the largest peak above the noise floor.
int choose_peak_count(const ElectronSpectrum& spectrum, Coupling g, int order,
                      const PeakPolicy& policy = {});

enum class MomentStatus { Ok, NoiseDominated };

struct MomentEstimate {
  MomentVector moments;
  // Truncation remainder estimate per moment.
  std::vector<double> error_estimate;
  // Same inversion applied to the mirror peaks P_{-k}; a consistency check.
  std::vector<double> mirror_moments;
  MomentStatus status = MomentStatus::Ok;
  std::vector<std::string> warnings;
  int peaks = 0;
};

MomentEstimate moments_from_spectrum(const ElectronSpectrum& spectrum, const MomentKernel& kernel);

// Convenience: kernel of the given order with policy-selected peak count.
MomentEstimate invert_spectrum(const ElectronSpectrum& spectrum, Coupling g, int order,
                               const PeakPolicy& policy = {});

struct StatisticsEstimate {
  std::vector<int> support;
  std::vector<double> weights;
  // weights spread onto 0..max(support).
  PhotonStatistics statistics;
  double residual = 0.0;
  bool regularized = false;
  double regularization = 0.0;
  std::vector<std::string> warnings;
};

// Non-negative least squares (Lawson-Hanson active set).
Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int max_iterations = 0);

// Fits p_n on the support grid to P_k = sum_n J_k(2|g| sqrt(n))^2 p_n with p >= 0 and
// sum p = 1; Tikhonov damping is engaged when the kernel submatrix is rank deficient.
StatisticsEstimate statistics_from_spectrum(const ElectronSpectrum& spectrum, Coupling g,
                                            const std::vector<int>& support);

}  // namespace qpinem

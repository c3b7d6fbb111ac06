#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qpinem {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kDefaultTailTol = 1e-10;

// Density matrix on a truncated Fock basis {|0>, ..., |cutoff-1>}.
//
// Three storage layouts share one interface: diagonal (photon statistics
// only, enough for every approximate-regime pipeline), pure (a state vector),
// and dense. Instances are immutable.
class PhotonicState {
 public:
  enum class Storage { Diagonal, Pure, Dense };

  static PhotonicState from_diagonal(std::vector<double> probs, std::string label,
                                     double tail_mass = 0.0);
  static PhotonicState from_vector(CVector psi, std::string label,
                                   double tail_mass = 0.0);
  // Symmetrizes, checks trace and positivity.
  static PhotonicState from_matrix(CMatrix rho, std::string label,
                                   double tail_mass = 0.0);

  int cutoff() const { return cutoff_; }
  Storage storage() const { return storage_; }
  const std::string& label() const { return label_; }
  // Probability mass discarded beyond the cutoff at construction.
  double tail_mass() const { return tail_mass_; }

  cplx element(int m, int n) const;
  std::vector<double> diagonal() const;
  CMatrix dense() const;
  // Only valid for Storage::Pure.
  const CVector& vector() const;
  double mean_photon_number() const;

  PhotonicState relabeled(std::string label) const;

 private:
  PhotonicState() = default;
  int cutoff_ = 0;
  Storage storage_ = Storage::Diagonal;
  std::vector<double> diag_;
  CVector psi_;
  CMatrix rho_;
  std::string label_;
  double tail_mass_ = 0.0;
};

struct PhotonStatistics {
  std::vector<double> probs;
  double tail_mass = 0.0;

  int size() const { return static_cast<int>(probs.size()); }
  double at(int n) const { return n >= 0 && n < size() ? probs[n] : 0.0; }
  double total() const;
  double mean() const;
};

// <n^m> for m = 1 .. order; values[m-1] holds the m-th moment.
struct MomentVector {
  std::vector<double> values;

  int order() const { return static_cast<int>(values.size()); }
  double operator()(int m) const { return values.at(m - 1); }
};

// W(x, p) sampled on x_axis (rows) by p_axis (columns).
struct WignerGrid {
  std::vector<double> x_axis;
  std::vector<double> p_axis;
  Eigen::MatrixXd values;
  std::vector<std::string> warnings;

  double integral() const;
  double peak() const;
};

// Cutoff heuristics that keep the discarded tail below tail_tol.
int poisson_cutoff(double mean_n);
int thermal_cutoff(double mean_n, double tail_tol = kDefaultTailTol);

PhotonicState make_coherent(cplx alpha, int cutoff, double tail_tol = kDefaultTailTol);
PhotonicState make_fock(int n, int cutoff);
PhotonicState make_thermal(double mean_n, int cutoff, double tail_tol = kDefaultTailTol);
// D(alpha) S(xi)|0> with xi = r e^{2i phi}; phi = 0 squeezes X = (a + a^dagger)/2.
PhotonicState make_squeezed(cplx alpha, double r, double phi, int cutoff,
                            double tail_tol = kDefaultTailTol);
// (|alpha> + parity |-alpha>) / norm, parity = +1 or -1.
PhotonicState make_cat(cplx alpha, int parity, int cutoff,
                       double tail_tol = kDefaultTailTol);
// (|alpha><alpha| + |-alpha><-alpha|) / 2.
PhotonicState make_mixed_pair(cplx alpha, int cutoff, double tail_tol = kDefaultTailTol);

// Coherent-state photon statistics without building amplitudes.
PhotonStatistics poisson_statistics(double mean_n, int cutoff);

PhotonStatistics statistics(const PhotonicState& state);
MomentVector moments(const PhotonStatistics& stats, int order);

double purity(const PhotonicState& state);

// Raw moments <X(theta)^m>, m = 1 .. order, X(theta) = (a e^{-i theta} + h.c.)/2.
std::vector<double> quadrature_moments(const PhotonicState& state, double theta, int order);
double quadrature_variance(const PhotonicState& state, double theta);

// Elements <m|D(xi)|n> for m < rows, n < cols.
CMatrix displacement_matrix(cplx xi, int rows, int cols);
// D(alpha) rho D(alpha)^dagger on a cutoff enlarged enough to hold the shift.
PhotonicState displace(const PhotonicState& state, cplx alpha,
                       double tail_tol = kDefaultTailTol);
// exp(i phi a^dagger a) rho exp(-i phi a^dagger a); maps |alpha> to |alpha e^{i phi}>.
PhotonicState rotate(const PhotonicState& state, double phi);

std::vector<double> linspace(double lo, double hi, int count);
// Square grid covering the state's phase-space support.
std::vector<double> default_phase_axis(const PhotonicState& state, int count = 121);

WignerGrid wigner(const PhotonicState& state, const std::vector<double>& x_axis,
                  const std::vector<double>& p_axis);

}  // namespace qpinem

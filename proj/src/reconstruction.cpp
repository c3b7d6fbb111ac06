#include "qpinem/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qpinem/error.hpp"
#include "qpinem/special.hpp"

namespace qpinem {

namespace {

constexpr double kMaxLog = 700.0;

double log_c(int k, int m, double g) {
  return 2.0 * m * std::log(g) + std::lgamma(2.0 * m + 1.0) - std::lgamma(m - k + 1.0) -
         std::lgamma(m + k + 1.0) - 2.0 * std::lgamma(m + 1.0);
}

double log_d(int m, int k, double g) {
  const int f = (k - m + 1) / 2;
  const int e = (k - m) / 2;
  return f * std::log(2.0) + std::log(static_cast<double>(k)) + std::lgamma(m + 1.0) -
         2.0 * m * std::log(g) + std::lgamma(static_cast<double>(m + f)) +
         special::log_odd_double_factorial(2 * m + 2 * e - 1) - std::lgamma(k - m + 1.0) -
         special::log_odd_double_factorial(2 * m - 1);
}

void check_args(double g, int m, int k) {
  if (!(g > 0.0)) throw ConfigError("moment kernel needs |g| > 0");
  if (m < 1 || k < 1) throw ConfigError("moment kernel indices start at 1");
}

}  // namespace

double kernel_c(int k, int m, double g_magnitude) {
  check_args(g_magnitude, m, k);
  if (k > m) return 0.0;
  const double lg = log_c(k, m, g_magnitude);
  if (lg > kMaxLog) throw NumericalError("kernel coefficient c overflows double precision");
  return (((m - k) % 2) ? -1.0 : 1.0) * std::exp(lg);
}

double kernel_d(int m, int k, double g_magnitude) {
  check_args(g_magnitude, m, k);
  if (k < m) return 0.0;
  const double lg = log_d(m, k, g_magnitude);
  if (lg > kMaxLog) throw NumericalError("kernel coefficient d overflows double precision");
  return std::exp(lg);
}

int max_feasible_order(double g_magnitude, int peaks) {
  int best = 0;
  for (int m = 1; m <= peaks; ++m) {
    bool ok = true;
    for (int k = 1; k <= peaks && ok; ++k) {
      if (k <= m && log_c(k, m, g_magnitude) > kMaxLog) ok = false;
      if (k >= m && log_d(m, k, g_magnitude) > kMaxLog) ok = false;
    }
    if (!ok) break;
    best = m;
  }
  return best;
}

MomentKernel build_kernel(Coupling g, int order, int peaks) {
  if (order < 1) throw ConfigError("kernel order M must be >= 1");
  if (peaks < order) throw ConfigError("kernel needs peaks K >= order M");
  if (!(g.magnitude > 0.0)) throw ConfigError("moment kernel needs |g| > 0");
  MomentKernel kern;
  kern.g_magnitude = g.magnitude;
  kern.order = order;
  kern.peaks = peaks;
  kern.c = Eigen::MatrixXd::Zero(peaks, order);
  kern.d = Eigen::MatrixXd::Zero(order, peaks);
  try {
    for (int m = 1; m <= order; ++m) {
      for (int k = 1; k <= peaks; ++k) {
        kern.c(k - 1, m - 1) = kernel_c(k, m, g.magnitude);
        kern.d(m - 1, k - 1) = kernel_d(m, k, g.magnitude);
      }
    }
  } catch (const NumericalError&) {
    std::ostringstream os;
    os << "moment kernel (M=" << order << ", K=" << peaks << ", |g|=" << g.magnitude
       << ") overflows double precision; max feasible order is "
       << max_feasible_order(g.magnitude, peaks);
    throw NumericalError(os.str());
  }
  return kern;
}

int choose_peak_count(const ElectronSpectrum& spectrum, Coupling g, int order,
                      const PeakPolicy& policy) {
  if (order < 1) throw ConfigError("moment order must be >= 1");
  int cap = 0;
  for (int k = 1; k <= spectrum.k_max; ++k) {
    if (spectrum.at(k) > policy.noise_floor) cap = k;
  }
  cap = std::max(cap, order);
  if (cap > spectrum.k_max) return cap;
  // terms(m-1, k-1) = d_mk P_k
  Eigen::MatrixXd terms = Eigen::MatrixXd::Zero(order, cap);
  for (int m = 1; m <= order; ++m) {
    for (int k = m; k <= cap; ++k) terms(m - 1, k - 1) = kernel_d(m, k, g.magnitude) * spectrum.at(k);
  }
  std::vector<double> remainder(order, 0.0);
  std::vector<double> running(order, 0.0);
  for (int m = 1; m <= order; ++m) {
    for (int k = cap; k >= m; --k) running[m - 1] += terms(m - 1, k - 1);
  }
  // Walk K downward from the cap; the answer is the smallest K that still passes.
  int best = cap;
  for (int kk = cap; kk >= order; --kk) {
    bool ok = true;
    for (int m = 1; m <= order; ++m) {
      const double head = running[m - 1] - remainder[m - 1];
      if (std::abs(remainder[m - 1]) > policy.tolerance * std::abs(head)) ok = false;
    }
    if (!ok) break;
    best = kk;
    for (int m = 1; m <= order; ++m) {
      if (kk >= m) remainder[m - 1] += terms(m - 1, kk - 1);
    }
  }
  return best;
}

MomentEstimate moments_from_spectrum(const ElectronSpectrum& spectrum, const MomentKernel& kernel) {
  if (spectrum.k_max < kernel.peaks) {
    std::ostringstream os;
    os << "spectrum window ends at k = " << spectrum.k_max << " but the kernel needs "
       << kernel.peaks << " positive peaks";
    throw ConfigError(os.str());
  }
  MomentEstimate est;
  est.peaks = kernel.peaks;
  est.moments.values.assign(kernel.order, 0.0);
  est.error_estimate.assign(kernel.order, 0.0);
  est.mirror_moments.assign(kernel.order, 0.0);
  for (int m = 1; m <= kernel.order; ++m) {
    double s = 0.0, mirror = 0.0;
    for (int k = kernel.peaks; k >= m; --k) {
      s += kernel.d_at(m, k) * spectrum.at(k);
      mirror += kernel.d_at(m, k) * spectrum.at(-k);
    }
    est.moments.values[m - 1] = s;
    est.mirror_moments[m - 1] = mirror;
    double rem = 0.0;
    if (spectrum.k_max > kernel.peaks) {
      for (int k = spectrum.k_max; k > kernel.peaks; --k) {
        rem += kernel_d(m, k, kernel.g_magnitude) * spectrum.at(k);
      }
    } else {
      rem = kernel.d_at(m, kernel.peaks) * spectrum.at(kernel.peaks);
    }
    est.error_estimate[m - 1] = std::abs(rem);
  }
  if (est.moments.values[0] < 0.0) {
    est.status = MomentStatus::NoiseDominated;
    est.warnings.push_back("reconstructed <n> is negative: spectrum is noise dominated");
  }
  for (int m = 2; m <= kernel.order; ++m) {
    if (est.moments.values[m - 1] < 0.0) {
      est.warnings.push_back("reconstructed <n^" + std::to_string(m) + "> is negative");
    }
  }
  return est;
}

MomentEstimate invert_spectrum(const ElectronSpectrum& spectrum, Coupling g, int order,
                               const PeakPolicy& policy) {
  const int peaks = choose_peak_count(spectrum, g, order, policy);
  return moments_from_spectrum(spectrum, build_kernel(g, order, peaks));
}

Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int max_iterations) {
  const int n = static_cast<int>(a.cols());
  if (a.rows() != b.size()) throw ConfigError("nnls: dimension mismatch");
  if (max_iterations <= 0) max_iterations = 3 * n + 10;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(n, false);
  const double tol = 1e-15 * std::max(1e-300, (a.transpose() * b).cwiseAbs().maxCoeff());

  auto solve_passive = [&](Eigen::VectorXd& z) {
    std::vector<int> idx;
    for (int j = 0; j < n; ++j) {
      if (passive[j]) idx.push_back(j);
    }
    Eigen::MatrixXd ap(a.rows(), idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) ap.col(i) = a.col(idx[i]);
    const Eigen::VectorXd zp = ap.colPivHouseholderQr().solve(b);
    z = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < idx.size(); ++i) z(idx[i]) = zp(i);
  };

  for (int iter = 0; iter < max_iterations; ++iter) {
    const Eigen::VectorXd w = a.transpose() * (b - a * x);
    int best = -1;
    double wmax = tol;
    for (int j = 0; j < n; ++j) {
      if (!passive[j] && w(j) > wmax) {
        wmax = w(j);
        best = j;
      }
    }
    if (best < 0) break;
    passive[best] = true;
    for (int inner = 0; inner < 3 * n + 10; ++inner) {
      Eigen::VectorXd z;
      solve_passive(z);
      bool feasible = true;
      for (int j = 0; j < n; ++j) {
        if (passive[j] && z(j) <= 0.0) feasible = false;
      }
      if (feasible) {
        x = z;
        break;
      }
      double step = 1.0;
      for (int j = 0; j < n; ++j) {
        if (passive[j] && z(j) <= 0.0) step = std::min(step, x(j) / (x(j) - z(j)));
      }
      x += step * (z - x);
      for (int j = 0; j < n; ++j) {
        if (passive[j] && x(j) <= 1e-15) {
          passive[j] = false;
          x(j) = 0.0;
        }
      }
    }
  }
  return x;
}

StatisticsEstimate statistics_from_spectrum(const ElectronSpectrum& spectrum, Coupling g,
                                            const std::vector<int>& support) {
  if (support.empty()) throw ConfigError("statistics support grid is empty");
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i] < 0) throw ConfigError("support grid must hold photon numbers >= 0");
    if (i > 0 && support[i] <= support[i - 1]) {
      throw ConfigError("support grid must be strictly increasing");
    }
  }
  const int ns = static_cast<int>(support.size());
  const int nk = spectrum.size();
  // Extra row enforcing sum p = 1.
  const double sum_weight = 1e3;
  Eigen::MatrixXd a(nk + 1, ns);
  Eigen::VectorXd b(nk + 1);
  int kmax_abs = std::max(std::abs(spectrum.k_min), std::abs(spectrum.k_max));
  for (int s = 0; s < ns; ++s) {
    const auto j = special::bessel_j_sequence(2.0 * g.magnitude * std::sqrt(support[s] * 1.0), kmax_abs);
    for (int r = 0; r < nk; ++r) {
      const int k = std::abs(spectrum.k_min + r);
      a(r, s) = j[k] * j[k];
    }
    a(nk, s) = sum_weight;
  }
  for (int r = 0; r < nk; ++r) b(r) = spectrum.probs[r];
  b(nk) = sum_weight;

  StatisticsEstimate est;
  est.support = support;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.topRows(nk));
  const auto sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  const double smin = sv.size() ? sv(sv.size() - 1) : 0.0;
  Eigen::MatrixXd fit_a = a;
  Eigen::VectorXd fit_b = b;
  if (ns > nk || smin <= 1e-10 * smax) {
    est.regularized = true;
    est.regularization = 1e-10 * smax;
    fit_a.conservativeResize(nk + 1 + ns, ns);
    fit_b.conservativeResize(nk + 1 + ns);
    fit_a.bottomRows(ns) = est.regularization * Eigen::MatrixXd::Identity(ns, ns);
    fit_b.tail(ns).setZero();
    std::ostringstream os;
    os << "kernel submatrix is ill-posed (condition " << (smin > 0 ? smax / smin : INFINITY)
       << "); Tikhonov damping " << est.regularization << " engaged";
    est.warnings.push_back(os.str());
  }
  Eigen::VectorXd x = nnls(fit_a, fit_b);
  const double total = x.sum();
  if (!(total > 0.0)) throw NumericalError("statistics fit collapsed to zero mass");
  x /= total;
  est.weights.assign(x.data(), x.data() + ns);
  est.residual = (a.topRows(nk) * x - b.head(nk)).norm();
  est.statistics.probs.assign(support.back() + 1, 0.0);
  for (int s = 0; s < ns; ++s) est.statistics.probs[support[s]] = x(s);
  return est;
}

}  // namespace qpinem

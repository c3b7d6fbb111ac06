#include "qpinem/fockspace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "qpinem/error.hpp"
#include "qpinem/special.hpp"

namespace qpinem {

namespace {

constexpr double kPsdTol = 1e-9;
constexpr int kMaxPsdCheckCutoff = 400;

std::string required_cutoff_message(const std::string& what, double tail, double tail_tol,
                                    int cutoff, int hint) {
  std::ostringstream os;
  os << what << ": tail mass " << tail << " beyond cutoff " << cutoff
     << " exceeds tail_tol " << tail_tol << "; use cutoff >= " << hint;
  return os.str();
}

// Mass of a Poisson law at n >= cutoff, summed directly to avoid 1 - sum cancellation.
double poisson_tail(double mean_n, int cutoff) {
  if (mean_n == 0.0) return cutoff > 0 ? 0.0 : 1.0;
  if (cutoff <= 0) return 1.0;
  if (cutoff < mean_n) {
    double head = 0.0;
    for (int n = 0; n < cutoff; ++n) {
      head += std::exp(-mean_n + n * std::log(mean_n) - std::lgamma(n + 1.0));
    }
    return std::max(0.0, 1.0 - head);
  }
  double tail = 0.0;
  for (int n = cutoff;; ++n) {
    const double term = std::exp(-mean_n + n * std::log(mean_n) - std::lgamma(n + 1.0));
    tail += term;
    if (term < 1e-18 * std::max(tail, 1e-300) || term == 0.0) break;
  }
  return tail;
}

int poisson_required_cutoff(double mean_n, double tail_tol) {
  int c = 1;
  while (poisson_tail(mean_n, c) >= tail_tol) c += std::max(1, c / 16);
  return c;
}

// Amplitudes of D(alpha) S(r e^{i theta})|0> for n < cutoff, and the mass of the
// infinite-basis norm that falls outside.
CVector squeezed_amplitudes(cplx alpha, double r, double theta, int cutoff, double& tail) {
  const double ch = std::cosh(r);
  const double th = std::tanh(r);
  const cplx rot = std::polar(1.0, theta);
  const cplx gamma = alpha * ch + std::conj(alpha) * rot * std::sinh(r);
  const cplx c = -0.5 * std::norm(alpha) - 0.5 * std::conj(alpha) * std::conj(alpha) * rot * th;
  const double log_mag = c.real() - 0.5 * std::log(ch);
  const cplx phase = std::polar(1.0, c.imag());

  CVector psi(cutoff);
  cplx prev = 0.0;
  cplx cur = 1.0;
  double scale = 0.0;
  for (int n = 0; n < cutoff; ++n) {
    const double a = std::abs(cur);
    if (a == 0.0) {
      psi(n) = 0.0;
    } else {
      const double lg = std::log(a) + scale + log_mag;
      psi(n) = lg < -745.0 ? cplx(0.0) : std::exp(lg) * (cur / a) * phase;
    }
    const cplx next =
        ((gamma / ch) * cur - rot * th * std::sqrt(static_cast<double>(n)) * prev) /
        std::sqrt(n + 1.0);
    prev = cur;
    cur = next;
    if (std::abs(cur) > 1e200) {
      cur /= 1e200;
      prev /= 1e200;
      scale += std::log(1e200);
    }
  }
  tail = std::max(0.0, 1.0 - psi.squaredNorm());
  return psi;
}

void check_cutoff(int cutoff) {
  if (cutoff < 1) throw ConfigError("cutoff must be >= 1");
}

// Applies X(theta) = (a e^{-i theta} + a^dagger e^{i theta}) / 2 to the rows of m.
CMatrix apply_quadrature(const CMatrix& m, double theta) {
  const int d = static_cast<int>(m.rows());
  CMatrix out = CMatrix::Zero(d, m.cols());
  const cplx em = std::polar(0.5, -theta);
  const cplx ep = std::polar(0.5, theta);
  for (int i = 0; i < d; ++i) {
    if (i + 1 < d) out.row(i) += em * std::sqrt(i + 1.0) * m.row(i + 1);
    if (i > 0) out.row(i) += ep * std::sqrt(static_cast<double>(i)) * m.row(i - 1);
  }
  return out;
}

}  // namespace

PhotonicState PhotonicState::from_diagonal(std::vector<double> probs, std::string label,
                                           double tail_mass) {
  if (probs.empty()) throw ConfigError("state needs at least one Fock level");
  double sum = 0.0;
  for (double& p : probs) {
    if (!std::isfinite(p)) throw NumericalError("non-finite photon probability");
    if (p < -1e-12) throw ConfigError("negative photon probability");
    p = std::max(p, 0.0);
    sum += p;
  }
  if (sum <= 0.0) throw ConfigError("photon statistics have zero mass");
  for (double& p : probs) p /= sum;
  PhotonicState s;
  s.cutoff_ = static_cast<int>(probs.size());
  s.storage_ = Storage::Diagonal;
  s.diag_ = std::move(probs);
  s.label_ = std::move(label);
  s.tail_mass_ = tail_mass;
  return s;
}

PhotonicState PhotonicState::from_vector(CVector psi, std::string label, double tail_mass) {
  if (psi.size() == 0) throw ConfigError("state needs at least one Fock level");
  const double nrm = psi.norm();
  if (!std::isfinite(nrm)) throw NumericalError("non-finite state amplitude");
  if (nrm == 0.0) throw ConfigError("state vector has zero norm");
  PhotonicState s;
  s.cutoff_ = static_cast<int>(psi.size());
  s.storage_ = Storage::Pure;
  s.psi_ = psi / nrm;
  s.label_ = std::move(label);
  s.tail_mass_ = tail_mass;
  return s;
}

PhotonicState PhotonicState::from_matrix(CMatrix rho, std::string label, double tail_mass) {
  if (rho.rows() == 0 || rho.rows() != rho.cols()) {
    throw ConfigError("density matrix must be square and non-empty");
  }
  if (!rho.allFinite()) throw NumericalError("non-finite density-matrix element");
  CMatrix h = 0.5 * (rho + rho.adjoint());
  const double tr = h.trace().real();
  if (tr <= 0.0) throw ConfigError("density matrix has non-positive trace");
  h /= tr;
  if (h.rows() <= kMaxPsdCheckCutoff) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kPsdTol) {
      throw ConfigError("density matrix is not positive semidefinite");
    }
  }
  PhotonicState s;
  s.cutoff_ = static_cast<int>(h.rows());
  s.storage_ = Storage::Dense;
  s.rho_ = std::move(h);
  s.label_ = std::move(label);
  s.tail_mass_ = tail_mass;
  return s;
}

cplx PhotonicState::element(int m, int n) const {
  if (m < 0 || n < 0 || m >= cutoff_ || n >= cutoff_) return 0.0;
  switch (storage_) {
    case Storage::Diagonal:
      return m == n ? cplx(diag_[m]) : cplx(0.0);
    case Storage::Pure:
      return psi_(m) * std::conj(psi_(n));
    case Storage::Dense:
      break;
  }
  return rho_(m, n);
}

std::vector<double> PhotonicState::diagonal() const {
  switch (storage_) {
    case Storage::Diagonal:
      return diag_;
    case Storage::Pure: {
      std::vector<double> p(cutoff_);
      for (int n = 0; n < cutoff_; ++n) p[n] = std::norm(psi_(n));
      return p;
    }
    case Storage::Dense:
      break;
  }
  std::vector<double> p(cutoff_);
  for (int n = 0; n < cutoff_; ++n) p[n] = rho_(n, n).real();
  return p;
}

CMatrix PhotonicState::dense() const {
  switch (storage_) {
    case Storage::Diagonal: {
      CMatrix m = CMatrix::Zero(cutoff_, cutoff_);
      for (int n = 0; n < cutoff_; ++n) m(n, n) = diag_[n];
      return m;
    }
    case Storage::Pure:
      return psi_ * psi_.adjoint();
    case Storage::Dense:
      break;
  }
  return rho_;
}

const CVector& PhotonicState::vector() const {
  if (storage_ != Storage::Pure) throw ConfigError("state is not stored as a pure vector");
  return psi_;
}

double PhotonicState::mean_photon_number() const {
  const auto p = diagonal();
  double s = 0.0;
  for (int n = 0; n < cutoff_; ++n) s += n * p[n];
  return s;
}

PhotonicState PhotonicState::relabeled(std::string label) const {
  PhotonicState s = *this;
  s.label_ = std::move(label);
  return s;
}

double PhotonStatistics::total() const {
  double s = 0.0;
  for (double p : probs) s += p;
  return s;
}

double PhotonStatistics::mean() const {
  double s = 0.0;
  for (int n = 0; n < size(); ++n) s += n * probs[n];
  return s;
}

double WignerGrid::integral() const {
  if (x_axis.size() < 2 || p_axis.size() < 2) return 0.0;
  // Trapezoid rule on a possibly non-uniform tensor grid.
  auto weights = [](const std::vector<double>& ax) {
    std::vector<double> w(ax.size(), 0.0);
    for (std::size_t i = 0; i + 1 < ax.size(); ++i) {
      const double h = ax[i + 1] - ax[i];
      w[i] += 0.5 * h;
      w[i + 1] += 0.5 * h;
    }
    return w;
  };
  const auto wx = weights(x_axis);
  const auto wp = weights(p_axis);
  double s = 0.0;
  for (std::size_t i = 0; i < x_axis.size(); ++i) {
    for (std::size_t j = 0; j < p_axis.size(); ++j) s += wx[i] * wp[j] * values(i, j);
  }
  return s;
}

double WignerGrid::peak() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }

int poisson_cutoff(double mean_n) {
  if (mean_n < 0) throw ConfigError("mean photon number must be >= 0");
  return static_cast<int>(std::ceil(mean_n + 8.0 * std::sqrt(mean_n) + 16.0));
}

int thermal_cutoff(double mean_n, double tail_tol) {
  if (mean_n < 0) throw ConfigError("mean photon number must be >= 0");
  if (mean_n == 0.0) return 1;
  const double q = mean_n / (mean_n + 1.0);
  return static_cast<int>(std::ceil(std::log(tail_tol) / std::log(q))) + 1;
}

PhotonicState make_coherent(cplx alpha, int cutoff, double tail_tol) {
  check_cutoff(cutoff);
  const double mean = std::norm(alpha);
  const double tail = poisson_tail(mean, cutoff);
  if (tail >= tail_tol) {
    throw ConfigError(required_cutoff_message("coherent state", tail, tail_tol, cutoff,
                                              poisson_required_cutoff(mean, tail_tol)));
  }
  double t = 0.0;
  CVector psi = squeezed_amplitudes(alpha, 0.0, 0.0, cutoff, t);
  std::ostringstream label;
  label << "coherent(alpha=" << alpha.real() << (alpha.imag() < 0 ? "" : "+")
        << alpha.imag() << "i)";
  return PhotonicState::from_vector(std::move(psi), label.str(), tail);
}

PhotonicState make_fock(int n, int cutoff) {
  check_cutoff(cutoff);
  if (n < 0) throw ConfigError("Fock photon number must be >= 0");
  if (n >= cutoff) {
    throw ConfigError("Fock state |" + std::to_string(n) + "> needs cutoff >= " +
                      std::to_string(n + 1));
  }
  CVector psi = CVector::Zero(cutoff);
  psi(n) = 1.0;
  return PhotonicState::from_vector(std::move(psi), "fock(n=" + std::to_string(n) + ")");
}

PhotonicState make_thermal(double mean_n, int cutoff, double tail_tol) {
  check_cutoff(cutoff);
  if (!(mean_n >= 0.0)) throw ConfigError("thermal mean photon number must be >= 0");
  std::vector<double> p(cutoff, 0.0);
  double tail = 0.0;
  if (mean_n == 0.0) {
    p[0] = 1.0;
  } else {
    const double lq = std::log(mean_n / (mean_n + 1.0));
    const double l0 = -std::log1p(mean_n);
    for (int n = 0; n < cutoff; ++n) p[n] = std::exp(l0 + n * lq);
    tail = std::exp(cutoff * lq);
    if (tail >= tail_tol) {
      throw ConfigError(required_cutoff_message("thermal state", tail, tail_tol, cutoff,
                                                thermal_cutoff(mean_n, tail_tol)));
    }
  }
  std::ostringstream label;
  label << "thermal(mean_n=" << mean_n << ")";
  return PhotonicState::from_diagonal(std::move(p), label.str(), tail);
}

PhotonicState make_squeezed(cplx alpha, double r, double phi, int cutoff, double tail_tol) {
  check_cutoff(cutoff);
  if (!(r >= 0.0)) throw ConfigError("squeezing parameter r must be >= 0");
  double tail = 0.0;
  CVector psi = squeezed_amplitudes(alpha, r, 2.0 * phi, cutoff, tail);
  if (tail >= tail_tol) {
    int hint = cutoff;
    double t = tail;
    while (t >= tail_tol && hint < (1 << 20)) {
      hint *= 2;
      squeezed_amplitudes(alpha, r, 2.0 * phi, hint, t);
    }
    throw ConfigError(required_cutoff_message("squeezed state", tail, tail_tol, cutoff, hint));
  }
  std::ostringstream label;
  label << "squeezed(alpha=" << alpha.real() << (alpha.imag() < 0 ? "" : "+") << alpha.imag()
        << "i,r=" << r << ",phi=" << phi << ")";
  return PhotonicState::from_vector(std::move(psi), label.str(), tail);
}

PhotonicState make_cat(cplx alpha, int parity, int cutoff, double tail_tol) {
  if (parity != 1 && parity != -1) throw ConfigError("cat parity must be +1 or -1");
  if (alpha == cplx(0.0) && parity == -1) {
    throw ConfigError("odd cat state with alpha = 0 has zero norm");
  }
  const auto plus = make_coherent(alpha, cutoff, tail_tol);
  const auto minus = make_coherent(-alpha, cutoff, tail_tol);
  CVector psi = plus.vector() + static_cast<double>(parity) * minus.vector();
  if (psi.norm() < 1e-12) throw ConfigError("cat state has zero norm");
  std::ostringstream label;
  label << (parity > 0 ? "cat_even" : "cat_odd") << "(alpha=" << alpha.real()
        << (alpha.imag() < 0 ? "" : "+") << alpha.imag() << "i)";
  return PhotonicState::from_vector(std::move(psi), label.str(), plus.tail_mass());
}

PhotonicState make_mixed_pair(cplx alpha, int cutoff, double tail_tol) {
  const auto plus = make_coherent(alpha, cutoff, tail_tol);
  const auto minus = make_coherent(-alpha, cutoff, tail_tol);
  CMatrix rho = 0.5 * (plus.dense() + minus.dense());
  std::ostringstream label;
  label << "mixed_pair(alpha=" << alpha.real() << (alpha.imag() < 0 ? "" : "+")
        << alpha.imag() << "i)";
  return PhotonicState::from_matrix(std::move(rho), label.str(), plus.tail_mass());
}

PhotonStatistics poisson_statistics(double mean_n, int cutoff) {
  check_cutoff(cutoff);
  if (mean_n < 0) throw ConfigError("mean photon number must be >= 0");
  PhotonStatistics s;
  s.probs.assign(cutoff, 0.0);
  if (mean_n == 0.0) {
    s.probs[0] = 1.0;
    return s;
  }
  double sum = 0.0;
  for (int n = 0; n < cutoff; ++n) {
    s.probs[n] = std::exp(-mean_n + n * std::log(mean_n) - std::lgamma(n + 1.0));
    sum += s.probs[n];
  }
  for (double& p : s.probs) p /= sum;
  s.tail_mass = poisson_tail(mean_n, cutoff);
  return s;
}

PhotonStatistics statistics(const PhotonicState& state) {
  return PhotonStatistics{state.diagonal(), state.tail_mass()};
}

MomentVector moments(const PhotonStatistics& stats, int order) {
  if (order < 1) throw ConfigError("moment order must be >= 1");
  MomentVector mv;
  mv.values.assign(order, 0.0);
  for (int n = 1; n < stats.size(); ++n) {
    double pw = stats.probs[n];
    for (int m = 0; m < order; ++m) {
      pw *= n;
      mv.values[m] += pw;
    }
  }
  return mv;
}

double purity(const PhotonicState& state) {
  switch (state.storage()) {
    case PhotonicState::Storage::Diagonal: {
      double s = 0.0;
      for (double p : state.diagonal()) s += p * p;
      return s;
    }
    case PhotonicState::Storage::Pure: {
      const double n2 = state.vector().squaredNorm();
      return n2 * n2;
    }
    case PhotonicState::Storage::Dense:
      break;
  }
  return state.dense().squaredNorm();
}

std::vector<double> quadrature_moments(const PhotonicState& state, double theta, int order) {
  if (order < 1) throw ConfigError("quadrature moment order must be >= 1");
  const int d = state.cutoff() + order + 1;
  std::vector<double> out(order, 0.0);
  if (state.storage() == PhotonicState::Storage::Pure) {
    CMatrix v = CMatrix::Zero(d, 1);
    v.topRows(state.cutoff()) = state.vector();
    std::vector<CMatrix> powers{v};
    for (int j = 1; j <= (order + 1) / 2; ++j) {
      powers.push_back(apply_quadrature(powers.back(), theta));
    }
    for (int m = 1; m <= order; ++m) {
      const int lo = m / 2;
      const int hi = m - lo;
      out[m - 1] = (powers[hi].adjoint() * powers[lo])(0, 0).real();
    }
    return out;
  }
  CMatrix work = CMatrix::Zero(d, d);
  work.topLeftCorner(state.cutoff(), state.cutoff()) = state.dense();
  for (int m = 1; m <= order; ++m) {
    work = apply_quadrature(work, theta);
    out[m - 1] = work.trace().real();
  }
  return out;
}

double quadrature_variance(const PhotonicState& state, double theta) {
  const auto mom = quadrature_moments(state, theta, 2);
  return mom[1] - mom[0] * mom[0];
}

CMatrix displacement_matrix(cplx xi, int rows, int cols) {
  CMatrix d = CMatrix::Zero(rows, cols);
  const double x = std::norm(xi);
  const double arg = std::arg(xi);
  const int top = std::max(rows, cols);
  for (int order = 0; order < top; ++order) {
    // Lower part: m = n + order.
    const int lower_count = std::min(rows - order, cols);
    // Upper part: n = m + order.
    const int upper_count = order > 0 ? std::min(cols - order, rows) : 0;
    const int count = std::max(lower_count, upper_count);
    if (count <= 0) continue;
    const auto chain = special::laguerre_chain(order, x, count);
    const cplx lower_phase = std::polar(1.0, order * arg);
    const cplx upper_phase =
        std::polar(1.0, -order * arg) * ((order % 2 == 0) ? 1.0 : -1.0);
    for (int n = 0; n < lower_count; ++n) d(n + order, n) = chain[n] * lower_phase;
    for (int m = 0; m < upper_count; ++m) d(m, m + order) = chain[m] * upper_phase;
  }
  return d;
}

PhotonicState displace(const PhotonicState& state, cplx alpha, double tail_tol) {
  if (alpha == cplx(0.0)) return state;
  const double reach = std::sqrt(static_cast<double>(state.cutoff())) + std::abs(alpha);
  int out = static_cast<int>(std::ceil(reach * reach + 8.0 * reach + 16.0));
  for (int attempt = 0; attempt < 6; ++attempt, out *= 2) {
    const CMatrix dm = displacement_matrix(alpha, out, state.cutoff());
    std::string label = state.label() + "|displaced";
    if (state.storage() == PhotonicState::Storage::Pure) {
      CVector psi = dm * state.vector();
      const double tail = 1.0 - psi.squaredNorm();
      if (tail < tail_tol) {
        return PhotonicState::from_vector(std::move(psi), label, state.tail_mass() + std::max(tail, 0.0));
      }
      continue;
    }
    CMatrix rho = dm * state.dense() * dm.adjoint();
    const double tail = 1.0 - rho.trace().real();
    if (tail < tail_tol) {
      return PhotonicState::from_matrix(std::move(rho), label,
                                        state.tail_mass() + std::max(tail, 0.0));
    }
  }
  throw NumericalError("displace: could not contain displaced state within tail tolerance");
}

PhotonicState rotate(const PhotonicState& state, double phi) {
  const std::string label = state.label() + "|rotated";
  switch (state.storage()) {
    case PhotonicState::Storage::Diagonal:
      return state.relabeled(label);
    case PhotonicState::Storage::Pure: {
      CVector psi = state.vector();
      for (int n = 0; n < psi.size(); ++n) psi(n) *= std::polar(1.0, phi * n);
      return PhotonicState::from_vector(std::move(psi), label, state.tail_mass());
    }
    case PhotonicState::Storage::Dense:
      break;
  }
  CMatrix rho = state.dense();
  for (int m = 0; m < rho.rows(); ++m) {
    for (int n = 0; n < rho.cols(); ++n) rho(m, n) *= std::polar(1.0, phi * (m - n));
  }
  return PhotonicState::from_matrix(std::move(rho), label, state.tail_mass());
}

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 1) throw ConfigError("linspace needs count >= 1");
  std::vector<double> v(count);
  if (count == 1) {
    v[0] = lo;
    return v;
  }
  const double h = (hi - lo) / (count - 1);
  for (int i = 0; i < count; ++i) v[i] = lo + h * i;
  v.back() = hi;
  return v;
}

std::vector<double> default_phase_axis(const PhotonicState& state, int count) {
  const double half = std::sqrt(state.mean_photon_number()) + 4.0;
  return linspace(-half, half, count);
}

WignerGrid wigner(const PhotonicState& state, const std::vector<double>& x_axis,
                  const std::vector<double>& p_axis) {
  if (x_axis.empty() || p_axis.empty()) throw ConfigError("Wigner grid axes are empty");
  const int nc = state.cutoff();
  const bool diagonal = state.storage() == PhotonicState::Storage::Diagonal;
  const CMatrix rho = diagonal ? CMatrix() : state.dense();
  const auto diag = state.diagonal();

  WignerGrid grid;
  grid.x_axis = x_axis;
  grid.p_axis = p_axis;
  grid.values.resize(x_axis.size(), p_axis.size());
  const int max_order = diagonal ? 0 : nc - 1;
  for (std::size_t i = 0; i < x_axis.size(); ++i) {
    for (std::size_t j = 0; j < p_axis.size(); ++j) {
      const cplx xi = 2.0 * cplx(x_axis[i], p_axis[j]);
      const double x = std::norm(xi);
      const double arg = std::arg(xi);
      double w = 0.0;
      for (int d = 0; d <= max_order; ++d) {
        const auto chain = special::laguerre_chain(d, x, nc - d);
        if (d == 0) {
          for (int m = 0; m < nc; ++m) w += ((m % 2) ? -1.0 : 1.0) * diag[m] * chain[m];
        } else {
          const cplx ph = std::polar(1.0, d * arg);
          double s = 0.0;
          for (int m = 0; m + d < nc; ++m) {
            s += ((m % 2) ? -1.0 : 1.0) * chain[m] * (rho(m, m + d) * ph).real();
          }
          w += 2.0 * s;
        }
      }
      grid.values(i, j) = (2.0 / std::numbers::pi) * w;
    }
  }
  if (x_axis.size() >= 2 && p_axis.size() >= 2) {
    const double integral = grid.integral();
    if (std::abs(integral - 1.0) > 1e-3) {
      std::ostringstream os;
      os << "Wigner grid integrates to " << integral
         << "; grid is too coarse or does not cover the state's support";
      grid.warnings.push_back(os.str());
    }
  }
  return grid;
}

}  // namespace qpinem

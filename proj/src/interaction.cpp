#include "qpinem/interaction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qpinem/error.hpp"
#include "qpinem/special.hpp"

namespace qpinem {

namespace {

constexpr int kMaxHalfWidth = 1 << 16;
constexpr double kTrimThreshold = 1e-18;

std::string leakage_message(const std::string& what, double leakage, int half_width,
                            double tol) {
  std::ostringstream os;
  os << what << ": ladder window [-" << half_width << ", " << half_width
     << "] leaks probability " << leakage << " > spec_tol " << tol
     << "; enlarge the k range";
  return os.str();
}

double sum_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

ElectronSpectrum make_spectrum(int half_width, std::vector<double> probs, std::string engine,
                               double input_mass = 1.0) {
  ElectronSpectrum s;
  s.k_min = -half_width;
  s.k_max = half_width;
  s.leakage = std::max(0.0, input_mass - sum_of(probs));
  s.probs = std::move(probs);
  s.engine = std::move(engine);
  return s;
}

// Ladder amplitudes c_l = J_l(2|gamma|) (-gamma^* / |gamma|)^l of a classical drive.
std::vector<cplx> classical_ladder(cplx gamma, int half_width) {
  std::vector<cplx> c(2 * half_width + 1, 0.0);
  const double mag = std::abs(gamma);
  if (mag == 0.0) {
    c[half_width] = 1.0;
    return c;
  }
  const auto j = special::bessel_j_sequence(2.0 * mag, half_width);
  const cplx u = -std::conj(gamma) / mag;
  for (int l = 0; l <= half_width; ++l) {
    const cplx ul = std::pow(u, l);
    c[half_width + l] = j[l] * ul;
    if (l > 0) c[half_width - l] = ((l % 2) ? -1.0 : 1.0) * j[l] / ul;
  }
  return c;
}

// Drops trailing Fock levels whose population is negligible.
int trimmed_size(const std::vector<double>& p) {
  int n = static_cast<int>(p.size());
  while (n > 1 && p[n - 1] < kTrimThreshold) --n;
  return n;
}

}  // namespace

Coupling::Coupling(double mag, double ph) : magnitude(mag), phase(ph) {
  if (!(mag >= 0.0) || !std::isfinite(mag)) throw ConfigError("coupling magnitude must be >= 0");
  if (!std::isfinite(ph)) throw ConfigError("coupling phase must be finite");
}

Coupling Coupling::from_complex(cplx g) { return Coupling(std::abs(g), std::arg(g)); }

cplx Coupling::value() const { return std::polar(magnitude, phase); }

double Coupling::beta(double mean_n) const { return magnitude * std::sqrt(std::max(mean_n, 0.0)); }

double ElectronSpectrum::total() const { return sum_of(probs); }

double ElectronSpectrum::mean_k() const {
  double s = 0.0;
  for (int i = 0; i < size(); ++i) s += (k_min + i) * probs[i];
  return s;
}

double JointDistribution::at(int n, int k) const {
  if (n < 0 || n >= n_count() || k < k_min || k > k_max) return 0.0;
  return probs(n, k - k_min);
}

ElectronSpectrum JointDistribution::marginal_k() const {
  ElectronSpectrum s;
  s.k_min = k_min;
  s.k_max = k_max;
  s.probs.assign(k_max - k_min + 1, 0.0);
  for (int c = 0; c < probs.cols(); ++c) {
    for (int n = 0; n < probs.rows(); ++n) s.probs[c] += probs(n, c);
  }
  s.leakage = std::max(0.0, 1.0 - s.total());
  s.engine = "joint_marginal";
  return s;
}

PhotonStatistics JointDistribution::marginal_n() const {
  PhotonStatistics st;
  st.probs.assign(n_count(), 0.0);
  for (int n = 0; n < probs.rows(); ++n) {
    for (int c = 0; c < probs.cols(); ++c) st.probs[n] += probs(n, c);
  }
  return st;
}

int default_half_width(double beta) {
  return static_cast<int>(std::ceil(2.0 * beta + 10.0 * std::sqrt(beta + 1.0)));
}

cplx amplitude_exact(int n, int k, Coupling g) {
  if (n < 0 || n - k < 0) return 0.0;
  const double x = g.magnitude * g.magnitude;
  const double arg = g.phase;
  if (k <= 0) {
    const int order = -k;
    const double l = special::laguerre_normalized(n, order, x);
    const cplx out = l * std::polar(1.0, order * arg);
    if (!std::isfinite(out.real()) || !std::isfinite(out.imag())) {
      throw NumericalError("amplitude_exact produced a non-finite value");
    }
    return out;
  }
  const double l = special::laguerre_normalized(n - k, k, x);
  const cplx out = l * std::polar(1.0, -k * arg) * ((k % 2) ? -1.0 : 1.0);
  if (!std::isfinite(out.real()) || !std::isfinite(out.imag())) {
    throw NumericalError("amplitude_exact produced a non-finite value");
  }
  return out;
}

Eigen::MatrixXcd amplitude_table(int n_count, int k_min, int k_max, Coupling g) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n_count, k_max - k_min + 1);
  const double x = g.magnitude * g.magnitude;
  for (int k = k_min; k <= k_max; ++k) {
    const int col = k - k_min;
    if (k <= 0) {
      const auto chain = special::laguerre_chain(-k, x, n_count);
      const cplx ph = std::polar(1.0, -k * g.phase);
      for (int n = 0; n < n_count; ++n) a(n, col) = chain[n] * ph;
    } else if (n_count > k) {
      const auto chain = special::laguerre_chain(k, x, n_count - k);
      const cplx ph = std::polar(1.0, -k * g.phase) * ((k % 2) ? -1.0 : 1.0);
      for (int n = k; n < n_count; ++n) a(n, col) = chain[n - k] * ph;
    }
  }
  if (!a.allFinite()) throw NumericalError("amplitude table contains non-finite values");
  return a;
}

InteractionOutcome spectrum_exact(const PhotonicState& state, Coupling g,
                                  const SpectrumOptions& opts) {
  const int nc = state.cutoff();
  const auto p = state.diagonal();
  int kw = opts.half_width.value_or(default_half_width(g.beta(state.mean_photon_number())));
  if (kw < 0) throw ConfigError("k half-width must be >= 0");

  for (;;) {
    const Eigen::MatrixXcd amp = amplitude_table(nc, -kw, kw, g);
    std::vector<double> pk(2 * kw + 1, 0.0);
    for (int c = 0; c < 2 * kw + 1; ++c) {
      double s = 0.0;
      for (int n = 0; n < nc; ++n) s += p[n] * std::norm(amp(n, c));
      pk[c] = s;
    }
    ElectronSpectrum spec = make_spectrum(kw, std::move(pk), "exact");
    if (spec.leakage > opts.spec_tol) {
      if (opts.half_width || kw > kMaxHalfWidth) {
        throw NumericalError(leakage_message("spectrum_exact", spec.leakage, kw, opts.spec_tol));
      }
      kw *= 2;
      continue;
    }

    InteractionOutcome out{spec, std::nullopt, std::nullopt};
    const int n_out = nc + kw;
    if (opts.want_joint) {
      JointDistribution joint;
      joint.k_min = -kw;
      joint.k_max = kw;
      joint.probs = Eigen::MatrixXd::Zero(n_out, 2 * kw + 1);
      for (int c = 0; c < 2 * kw + 1; ++c) {
        const int k = c - kw;
        for (int n = std::max(0, k); n < nc; ++n) {
          joint.probs(n - k, c) = p[n] * std::norm(amp(n, c));
        }
      }
      out.joint = std::move(joint);
    }
    if (opts.want_post_state) {
      const std::string label = state.label() + "|traced";
      const double tail = state.tail_mass() + spec.leakage;
      if (state.storage() == PhotonicState::Storage::Diagonal) {
        std::vector<double> q(n_out, 0.0);
        for (int c = 0; c < 2 * kw + 1; ++c) {
          const int k = c - kw;
          for (int n = std::max(0, k); n < nc; ++n) q[n - k] += p[n] * std::norm(amp(n, c));
        }
        q.resize(trimmed_size(q));
        out.post_state = PhotonicState::from_diagonal(std::move(q), label, tail);
      } else {
        CMatrix rho = CMatrix::Zero(n_out, n_out);
        const CMatrix in = state.dense();
        const bool pure = state.storage() == PhotonicState::Storage::Pure;
        for (int c = 0; c < 2 * kw + 1; ++c) {
          const int k = c - kw;
          const int lo = std::max(0, k);
          if (lo >= nc) continue;
          if (pure) {
            CVector phi = CVector::Zero(n_out);
            for (int n = lo; n < nc; ++n) phi(n - k) = amp(n, c) * state.vector()(n);
            rho.noalias() += phi * phi.adjoint();
          } else {
            const int len = nc - lo;
            const CVector a = amp.col(c).segment(lo, len);
            rho.block(lo - k, lo - k, len, len).noalias() +=
                a.asDiagonal() * in.block(lo, lo, len, len) * a.conjugate().asDiagonal();
          }
        }
        std::vector<double> q(n_out);
        for (int n = 0; n < n_out; ++n) q[n] = rho(n, n).real();
        const int keep = trimmed_size(q);
        CMatrix trimmed = rho.topLeftCorner(keep, keep);
        out.post_state = PhotonicState::from_matrix(std::move(trimmed), label, tail);
      }
    }
    return out;
  }
}

ElectronSpectrum spectrum_approx(const PhotonStatistics& stats, Coupling g,
                                 std::optional<int> half_width, double spec_tol) {
  int kw = half_width.value_or(default_half_width(g.beta(stats.mean())));
  if (kw < 0) throw ConfigError("k half-width must be >= 0");
  const double input_mass = stats.total();
  for (;;) {
    std::vector<double> pk(2 * kw + 1, 0.0);
    for (int n = 0; n < stats.size(); ++n) {
      const double pn = stats.probs[n];
      if (pn == 0.0) continue;
      const auto j = special::bessel_j_sequence(2.0 * g.magnitude * std::sqrt(n * 1.0), kw);
      for (int k = 0; k <= kw; ++k) {
        const double w = pn * j[k] * j[k];
        pk[kw + k] += w;
        if (k > 0) pk[kw - k] += w;
      }
    }
    ElectronSpectrum spec = make_spectrum(kw, std::move(pk), "approx", input_mass);
    if (spec.leakage > spec_tol) {
      if (half_width || kw > kMaxHalfWidth) {
        throw NumericalError(leakage_message("spectrum_approx", spec.leakage, kw, spec_tol));
      }
      kw *= 2;
      continue;
    }
    return spec;
  }
}

StateFamily parse_family(const std::string& name) {
  if (name == "fock") return StateFamily::Fock;
  if (name == "coherent") return StateFamily::Coherent;
  if (name == "thermal") return StateFamily::Thermal;
  if (name == "squeezed_vacuum" || name == "squeezed-vacuum") return StateFamily::SqueezedVacuum;
  throw ConfigError("unknown closed-form family '" + name +
                    "' (expected fock, coherent, thermal, squeezed_vacuum)");
}

std::string family_name(StateFamily family) {
  switch (family) {
    case StateFamily::Fock:
      return "fock";
    case StateFamily::Coherent:
      return "coherent";
    case StateFamily::Thermal:
      return "thermal";
    case StateFamily::SqueezedVacuum:
      break;
  }
  return "squeezed_vacuum";
}

double coherent_correction(int k, double beta) {
  const int a = std::abs(k);
  const auto j = special::bessel_j_sequence(2.0 * beta, a + 1);
  const double ja = j[a];
  const double j1 = j[a + 1];
  return beta * beta * j1 * j1 + (0.5 * a * (a - 1.0) - beta * beta) * ja * ja -
         beta * (a - 1.0) * ja * j1;
}

ElectronSpectrum spectrum_closed_form(StateFamily family, const ClosedFormParams& params,
                                      Coupling g, std::optional<int> half_width) {
  const double mean = family == StateFamily::Fock ? params.n : params.mean_n;
  if (family == StateFamily::Fock && params.n < 0) throw ConfigError("Fock n must be >= 0");
  if (!(mean >= 0.0)) throw ConfigError("mean photon number must be >= 0");
  if (family == StateFamily::Coherent && mean == 0.0) {
    throw ConfigError("coherent closed form needs mean_n > 0");
  }
  const double beta = g.beta(mean);
  const int kw = half_width.value_or(default_half_width(beta) *
                                     (family == StateFamily::SqueezedVacuum ? 2 : 1));
  std::vector<double> pk(2 * kw + 1, 0.0);
  auto put = [&](int k, double v) {
    pk[kw + k] = v;
    if (k > 0) pk[kw - k] = v;
  };
  switch (family) {
    case StateFamily::Fock: {
      const auto j = special::bessel_j_sequence(2.0 * beta, kw);
      for (int k = 0; k <= kw; ++k) put(k, j[k] * j[k]);
      break;
    }
    case StateFamily::Coherent: {
      const auto j = special::bessel_j_sequence(2.0 * beta, kw + 1);
      for (int k = 0; k <= kw; ++k) {
        const double a = k;
        const double f = beta * beta * j[k + 1] * j[k + 1] +
                         (0.5 * a * (a - 1.0) - beta * beta) * j[k] * j[k] -
                         beta * (a - 1.0) * j[k] * j[k + 1];
        put(k, j[k] * j[k] + f / mean);
      }
      break;
    }
    case StateFamily::Thermal: {
      const auto i = special::bessel_i_scaled_sequence(2.0 * beta * beta, kw);
      for (int k = 0; k <= kw; ++k) put(k, i[k]);
      break;
    }
    case StateFamily::SqueezedVacuum: {
      if (beta == 0.0) {
        put(0, 1.0);
        break;
      }
      for (int k = 0; k <= kw; ++k) {
        const double a = k;
        const double log_pref = a * std::log(2.0) + 2.0 * a * std::log(beta) +
                                std::lgamma(0.5 + a) - 0.5 * std::log(std::numbers::pi) -
                                2.0 * std::lgamma(a + 1.0);
        put(k, special::hypergeometric_2f2_scaled(0.5 + a, 0.5 + a, 1.0 + a, 1.0 + 2.0 * a,
                                                  -8.0 * beta * beta, log_pref));
      }
      break;
    }
  }
  return make_spectrum(kw, std::move(pk), "closed_form:" + family_name(family));
}

PhotonStatistics postselect_state(const JointDistribution& joint, int k) {
  if (k < joint.k_min || k > joint.k_max) {
    throw ConfigError("postselection index k outside the joint distribution window");
  }
  PhotonStatistics st;
  st.probs.assign(joint.n_count(), 0.0);
  double total = 0.0;
  for (int n = 0; n < joint.n_count(); ++n) {
    st.probs[n] = joint.probs(n, k - joint.k_min);
    total += st.probs[n];
  }
  if (!(total > 0.0)) {
    throw ConfigError("cannot postselect on k = " + std::to_string(k) +
                      ": outcome has zero probability");
  }
  for (double& v : st.probs) v /= total;
  return st;
}

PhotonStatistics traced_statistics_approx(const PhotonStatistics& stats, Coupling g) {
  PhotonStatistics out = stats;
  for (int n = 0; n < stats.size(); ++n) {
    if (stats.probs[n] == 0.0) continue;
    const double x = 2.0 * g.magnitude * std::sqrt(n * 1.0);
    const int kw = 2 * default_half_width(0.5 * x);
    const auto j = special::bessel_j_sequence(x, kw);
    // Sum small terms first.
    double s = 0.0;
    for (int k = kw; k >= 1; --k) s += 2.0 * j[k] * j[k];
    s += j[0] * j[0];
    out.probs[n] = stats.probs[n] * s;
  }
  return out;
}

BackActionTrace traced_back_action(const PhotonicState& state, Coupling g, int electrons,
                                   double spec_tol) {
  if (electrons < 1) throw ConfigError("number of electrons must be >= 1");
  BackActionTrace trace;
  trace.steps.push_back(statistics(state));
  PhotonicState current = PhotonicState::from_diagonal(state.diagonal(), state.label(),
                                                       state.tail_mass());
  SpectrumOptions opts;
  opts.spec_tol = spec_tol;
  opts.want_joint = false;
  for (int e = 0; e < electrons; ++e) {
    auto outcome = spectrum_exact(current, g, opts);
    current = *outcome.post_state;
    trace.steps.push_back(statistics(current));
    trace.leakage.push_back(outcome.spectrum.leakage);
    const auto& p0 = trace.steps.front();
    const auto& pj = trace.steps.back();
    double dev = 0.0;
    for (int n = 0; n < std::max(p0.size(), pj.size()); ++n) {
      dev = std::max(dev, std::abs(pj.at(n) - p0.at(n)));
    }
    trace.deviation.push_back(dev);
  }
  return trace;
}

PhotonicState traced_post_state(const PhotonicState& state, Coupling g, double spec_tol) {
  SpectrumOptions opts;
  opts.spec_tol = spec_tol;
  opts.want_joint = false;
  return *spectrum_exact(state, g, opts).post_state;
}

QuadratureGrowth quadrature_growth(const PhotonicState& state, Coupling g, int electrons,
                                   double theta, double spec_tol) {
  if (electrons < 0) throw ConfigError("number of electrons must be >= 0");
  QuadratureGrowth r;
  r.initial = quadrature_variance(state, theta);
  r.predicted = r.initial + 0.5 * electrons * g.magnitude * g.magnitude;
  r.evolved = r.initial;
  PhotonicState current = state;
  for (int e = 0; e < electrons; ++e) {
    current = traced_post_state(current, g, spec_tol);
    r.evolved = quadrature_variance(current, theta);
    r.per_electron.push_back(r.evolved);
  }
  return r;
}

ComposedCoupling compose_interactions(Coupling g, int points) {
  if (points < 1) throw ConfigError("number of interaction points must be >= 1");
  ComposedCoupling c;
  c.coupling = Coupling(std::sqrt(static_cast<double>(points)) * g.magnitude, g.phase);
  c.points = points;
  c.mode = points == 1 ? "a" : "(a_1+...+a_" + std::to_string(points) + ")/sqrt(" +
                                   std::to_string(points) + ")";
  return c;
}

ElectronSpectrum classical_spectrum(cplx lo_field, Coupling g, std::optional<int> half_width,
                                    double spec_tol) {
  const double mag = g.magnitude * std::abs(lo_field);
  int kw = half_width.value_or(default_half_width(mag));
  for (;;) {
    const auto j = special::bessel_j_sequence(2.0 * mag, kw);
    std::vector<double> pk(2 * kw + 1, 0.0);
    for (int k = 0; k <= kw; ++k) {
      pk[kw + k] = j[k] * j[k];
      pk[kw - k] = j[k] * j[k];
    }
    ElectronSpectrum spec = make_spectrum(kw, std::move(pk), "classical");
    if (spec.leakage > spec_tol) {
      if (half_width || kw > kMaxHalfWidth) {
        throw NumericalError(leakage_message("classical_spectrum", spec.leakage, kw, spec_tol));
      }
      kw *= 2;
      continue;
    }
    return spec;
  }
}

ElectronSpectrum two_point_spectrum(const PhotonicState& state, cplx lo_amplitude, double theta,
                                    Coupling g, const TwoPointOptions& opts) {
  const cplx field = lo_amplitude * std::polar(1.0, theta);
  const cplx gamma = opts.lo_coupling.value_or(g).value() * std::conj(field);
  int lw = default_half_width(std::abs(gamma));
  int qw = default_half_width(g.beta(state.mean_photon_number()));
  if (opts.half_width) {
    if (*opts.half_width < 0) throw ConfigError("k half-width must be >= 0");
    qw = std::max(1, *opts.half_width / 2);
    lw = std::max(1, *opts.half_width - qw);
  }
  const int nc = state.cutoff();
  const auto storage = state.storage();
  for (;;) {
    const int kw = qw + lw;
    const auto c = classical_ladder(gamma, lw);
    const Eigen::MatrixXcd amp = amplitude_table(nc, -qw, qw, g);
    const CMatrix rho = storage == PhotonicState::Storage::Dense ? state.dense() : CMatrix();
    const auto p = state.diagonal();
    std::vector<double> pk(2 * kw + 1, 0.0);
    std::vector<cplx> v;
    std::vector<int> idx;
    for (int k = -kw; k <= kw; ++k) {
      double total = 0.0;
      for (int m = 0; m < nc + qw; ++m) {
        v.clear();
        idx.clear();
        // Intermediate ladder steps: the laser contributes l, the quantum light j = k - l.
        const int j_lo = std::max(-qw, k - lw);
        const int j_hi = std::min(qw, k + lw);
        for (int t = j_lo; t <= j_hi; ++t) {
          const int j = opts.quantum_first ? t : j_hi - (t - j_lo);
          const int n = m + j;
          if (n < 0 || n >= nc) continue;
          const int l = k - j;
          v.push_back(c[lw + l] * amp(n, j + qw));
          idx.push_back(n);
        }
        if (v.empty()) continue;
        switch (storage) {
          case PhotonicState::Storage::Pure: {
            cplx a = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) a += v[i] * state.vector()(idx[i]);
            total += std::norm(a);
            break;
          }
          case PhotonicState::Storage::Diagonal:
            for (std::size_t i = 0; i < v.size(); ++i) total += std::norm(v[i]) * p[idx[i]];
            break;
          case PhotonicState::Storage::Dense: {
            cplx s = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) {
              cplx row = 0.0;
              for (std::size_t i2 = 0; i2 < v.size(); ++i2) {
                row += rho(idx[i], idx[i2]) * std::conj(v[i2]);
              }
              s += v[i] * row;
            }
            total += s.real();
            break;
          }
        }
      }
      pk[k + kw] = total;
    }
    ElectronSpectrum spec = make_spectrum(kw, std::move(pk), "two_point");
    if (spec.leakage > opts.spec_tol) {
      if (opts.half_width || kw > kMaxHalfWidth) {
        throw NumericalError(
            leakage_message("two_point_spectrum", spec.leakage, kw, opts.spec_tol));
      }
      qw *= 2;
      lw *= 2;
      continue;
    }
    return spec;
  }
}

}  // namespace qpinem

#include "qpinem/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qpinem/error.hpp"
#include "qpinem/special.hpp"

namespace qpinem {

namespace {

constexpr double kPi = std::numbers::pi;

double binomial(int n, int k) {
  return std::exp(special::log_factorial(n) - special::log_factorial(k) -
                  special::log_factorial(n - k));
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

std::vector<double> moments_of(const ElectronSpectrum& spectrum, Coupling g, int order,
                               const PeakPolicy& policy) {
  return invert_spectrum(spectrum, g, order, policy).moments.values;
}

// Probabilists' Hermite polynomial coefficients He_j(z) = sum_i h[j][i] z^i.
std::vector<std::vector<double>> hermite_coefficients(int order) {
  std::vector<std::vector<double>> h(order + 1, std::vector<double>(order + 1, 0.0));
  h[0][0] = 1.0;
  if (order >= 1) h[1][1] = 1.0;
  for (int j = 1; j < order; ++j) {
    for (int i = 0; i <= order; ++i) {
      double v = -j * h[j - 1][i];
      if (i > 0) v += h[j][i - 1];
      h[j + 1][i] = v;
    }
  }
  return h;
}

// E[Z^j] for the standardized variable, j = 0..order.
std::vector<double> standardized_moments(const std::vector<double>& raw, double mu, double sigma) {
  const int order = static_cast<int>(raw.size());
  std::vector<double> full(order + 1, 1.0);
  for (int m = 1; m <= order; ++m) full[m] = raw[m - 1];
  std::vector<double> s(order + 1, 0.0);
  for (int j = 0; j <= order; ++j) {
    double c = 0.0;
    for (int i = 0; i <= j; ++i) c += binomial(j, i) * full[i] * std::pow(-mu, j - i);
    s[j] = c / std::pow(sigma, j);
  }
  return s;
}

void check_hankel(const std::vector<double>& raw) {
  const int order = static_cast<int>(raw.size());
  std::vector<double> full(order + 1, 1.0);
  for (int m = 1; m <= order; ++m) full[m] = raw[m - 1];
  for (int size = 2; 2 * (size - 1) <= order; ++size) {
    Eigen::MatrixXd h(size, size);
    for (int i = 0; i < size; ++i) {
      for (int j = 0; j < size; ++j) h(i, j) = full[i + j];
    }
    const double det = h.determinant();
    if (!(det > 0.0)) {
      std::ostringstream os;
      os << "quadrature moments are inconsistent with any density: Hankel determinant of size "
         << size << " is " << det;
      if (size == 2) os << " (variance " << full[2] - full[1] * full[1] << ")";
      throw NumericalError(os.str());
    }
  }
}

bool max_entropy(const std::vector<double>& z, const std::vector<double>& target,
                 std::vector<double>& density) {
  const int order = static_cast<int>(target.size()) - 1;
  const int n = static_cast<int>(z.size());
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(order);
  if (order >= 2) lambda(1) = -0.5;
  std::vector<double> w(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double left = i > 0 ? z[i] - z[i - 1] : 0.0;
    const double right = i + 1 < n ? z[i + 1] - z[i] : 0.0;
    w[i] = 0.5 * (left + right);
  }
  auto evaluate = [&](const Eigen::VectorXd& lam, Eigen::VectorXd* grad, Eigen::MatrixXd* hess) {
    std::vector<double> expo(n);
    double top = -INFINITY;
    for (int i = 0; i < n; ++i) {
      double e = 0.0, p = 1.0;
      for (int j = 0; j < order; ++j) {
        p *= z[i];
        e += lam(j) * p;
      }
      expo[i] = e;
      top = std::max(top, e);
    }
    double zsum = 0.0;
    Eigen::VectorXd mom = Eigen::VectorXd::Zero(2 * order + 1);
    for (int i = 0; i < n; ++i) {
      const double q = w[i] * std::exp(expo[i] - top);
      zsum += q;
      double p = 1.0;
      for (int j = 0; j <= 2 * order; ++j) {
        mom(j) += q * p;
        p *= z[i];
      }
    }
    mom /= zsum;
    double dual = std::log(zsum) + top;
    for (int j = 0; j < order; ++j) dual -= lam(j) * target[j + 1];
    if (grad) {
      grad->resize(order);
      for (int j = 0; j < order; ++j) (*grad)(j) = mom(j + 1) - target[j + 1];
    }
    if (hess) {
      hess->resize(order, order);
      for (int a = 0; a < order; ++a) {
        for (int b = 0; b < order; ++b) (*hess)(a, b) = mom(a + b + 2) - mom(a + 1) * mom(b + 1);
      }
    }
    return dual;
  };
  for (int iter = 0; iter < 200; ++iter) {
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
    const double f0 = evaluate(lambda, &grad, &hess);
    if (grad.cwiseAbs().maxCoeff() < 1e-11) {
      density.assign(n, 0.0);
      double top = -INFINITY;
      std::vector<double> expo(n);
      for (int i = 0; i < n; ++i) {
        double e = 0.0, p = 1.0;
        for (int j = 0; j < order; ++j) {
          p *= z[i];
          e += lambda(j) * p;
        }
        expo[i] = e;
        top = std::max(top, e);
      }
      for (int i = 0; i < n; ++i) density[i] = std::exp(expo[i] - top);
      return true;
    }
    const Eigen::VectorXd step = hess.ldlt().solve(grad);
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls) {
      const Eigen::VectorXd trial = lambda - t * step;
      const double f1 = evaluate(trial, nullptr, nullptr);
      if (std::isfinite(f1) && f1 <= f0 - 1e-4 * t * grad.dot(step)) {
        lambda = trial;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) return false;
  }
  return false;
}

std::vector<double> default_x_grid(const std::vector<std::vector<double>>& moments, int points) {
  double reach = 3.0;
  for (const auto& m : moments) {
    const double var = m.size() >= 2 ? std::max(m[1] - m[0] * m[0], 0.0) : 0.25;
    reach = std::max(reach, std::abs(m[0]) + 7.0 * std::sqrt(var));
  }
  return linspace(-reach, reach, points);
}

}  // namespace

std::vector<double> uniform_angles(int count) {
  if (count < 1) throw ConfigError("angle count must be >= 1");
  std::vector<double> t(count);
  for (int i = 0; i < count; ++i) t[i] = kPi * i / count;
  return t;
}

ScanEngine parse_scan_engine(const std::string& name) {
  if (name == "approx") return ScanEngine::Approx;
  if (name == "exact") return ScanEngine::Exact;
  throw ConfigError("unknown scan engine '" + name + "' (expected approx or exact)");
}

std::string scan_engine_name(ScanEngine engine) {
  return engine == ScanEngine::Approx ? "approx" : "exact";
}

double lo_amplitude_for(const PhotonicState& state, double lo_ratio) {
  return std::sqrt(lo_ratio * std::max(state.mean_photon_number(), 1.0));
}

HomodyneScan homodyne_scan(const PhotonicState& state, double lo_ratio, Coupling g,
                           const std::vector<double>& thetas, const ScanOptions& opts) {
  if (!(lo_ratio >= 10.0)) throw ConfigError("lo_ratio must be >= 10 for local-oscillator dominance");
  if (thetas.empty()) throw ConfigError("homodyne scan needs at least one LO phase");
  HomodyneScan scan;
  scan.thetas = thetas;
  scan.g = g;
  scan.engine = opts.engine;
  scan.lo_amplitude = lo_amplitude_for(state, lo_ratio);

  auto run = [&](double theta) {
    if (opts.engine == ScanEngine::Exact) {
      TwoPointOptions tp;
      tp.half_width = opts.half_width;
      tp.spec_tol = opts.spec_tol;
      tp.quantum_first = opts.quantum_first;
      return two_point_spectrum(state, scan.lo_amplitude, theta, g, tp);
    }
    const auto shifted = displace(state, scan.lo_amplitude * std::polar(1.0, theta), opts.tail_tol);
    return spectrum_approx(statistics(shifted), g, opts.half_width, opts.spec_tol);
  };
  for (double t : thetas) {
    scan.spectra.push_back(run(t));
    if (opts.opposite) scan.spectra_opposite.push_back(run(t + kPi));
  }
  scan.lo_only = classical_spectrum(scan.lo_amplitude, g, opts.half_width, opts.spec_tol);
  if (opts.engine == ScanEngine::Exact) {
    SpectrumOptions so;
    so.half_width = opts.half_width;
    so.spec_tol = opts.spec_tol;
    so.want_joint = false;
    so.want_post_state = false;
    scan.quantum_only = spectrum_exact(state, g, so).spectrum;
  } else {
    scan.quantum_only = spectrum_approx(statistics(state), g, opts.half_width, opts.spec_tol);
  }
  return scan;
}

double QuadratureDistribution::integral() const { return trapezoid(x_grid, density); }

std::vector<std::vector<double>> quadrature_moments_from_scan(const HomodyneScan& scan, int order,
                                                              const PeakPolicy& policy) {
  if (order < 1) throw ConfigError("quadrature order must be >= 1");
  if (scan.spectra_opposite.size() != scan.spectra.size()) {
    throw ConfigError("quadrature extraction needs the theta + pi spectra (scan option opposite)");
  }
  const double a2 = moments_of(scan.lo_only, scan.g, 1, policy)[0];
  if (!(a2 > 0.0)) throw NumericalError("LO-only spectrum gives a non-positive LO intensity");
  const double a = std::sqrt(a2);
  // Quantum-only <n^j>; vacuum has no positive peaks at all.
  std::vector<double> qn(order + 1, 0.0);
  qn[0] = 1.0;
  bool has_quantum = false;
  for (int k = 1; k <= scan.quantum_only.k_max; ++k) has_quantum |= scan.quantum_only.at(k) > 0.0;
  if (has_quantum) {
    const auto q = moments_of(scan.quantum_only, scan.g, order, policy);
    for (int j = 1; j <= order; ++j) qn[j] = q[j - 1];
  }

  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < scan.spectra.size(); ++i) {
    auto np = moments_of(scan.spectra[i], scan.g, order, policy);
    auto nm = moments_of(scan.spectra_opposite[i], scan.g, order, policy);
    np.insert(np.begin(), 1.0);
    nm.insert(nm.begin(), 1.0);
    // Y(+) = (N - a^2)/(2a) = X + n/(2a) and Y(-) = X - n/(2a) on average.
    std::vector<double> x(order + 1, 0.0);
    x[0] = 1.0;
    for (int m = 1; m <= order; ++m) {
      double yp = 0.0, ym = 0.0;
      for (int j = 0; j <= m; ++j) {
        const double c = binomial(m, j) * std::pow(-a2, m - j);
        yp += c * np[j];
        ym += c * nm[j];
      }
      const double scale = std::pow(2.0 * a, m);
      const double s = 0.5 * (yp + ((m % 2) ? -ym : ym)) / scale;
      double corr = 0.0;
      for (int j = 1; 2 * j <= m; ++j) {
        corr += binomial(m, 2 * j) * x[m - 2 * j] * qn[2 * j] / std::pow(2.0 * a, 2 * j);
      }
      x[m] = s - corr;
    }
    out.emplace_back(x.begin() + 1, x.end());
  }
  return out;
}

QuadratureDistribution density_from_moments(const std::vector<double>& moments,
                                            const std::vector<double>& x_grid) {
  const int order = static_cast<int>(moments.size());
  if (order < 2) throw ConfigError("a quadrature density needs at least two moments");
  if (x_grid.size() < 3) throw ConfigError("quadrature grid needs at least 3 points");
  check_hankel(moments);
  const double mu = moments[0];
  const double sigma = std::sqrt(moments[1] - mu * mu);
  const auto s = standardized_moments(moments, mu, sigma);
  const auto herm = hermite_coefficients(order);

  QuadratureDistribution out;
  out.x_grid = x_grid;
  out.moments = moments;
  std::vector<double> coef(order + 1, 0.0);
  for (int j = 3; j <= order; ++j) {
    double e = 0.0;
    for (int i = 0; i <= j; ++i) e += herm[j][i] * s[i];
    coef[j] = e / std::exp(special::log_factorial(j));
  }
  std::vector<double> dens(x_grid.size());
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    const double z = (x_grid[i] - mu) / sigma;
    double series = 1.0;
    for (int j = 3; j <= order; ++j) {
      double he = 0.0, p = 1.0;
      for (int t = 0; t <= j; ++t) {
        he += herm[j][t] * p;
        p *= z;
      }
      series += coef[j] * he;
    }
    dens[i] = std::exp(-0.5 * z * z) / (std::sqrt(2.0 * kPi) * sigma) * series;
    lo = std::min(lo, dens[i]);
    hi = std::max(hi, dens[i]);
  }
  if (lo < -1e-3 * hi) {
    std::vector<double> z(x_grid.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = (x_grid[i] - mu) / sigma;
    if (!max_entropy(z, s, dens)) {
      throw NumericalError("maximum-entropy quadrature fit did not converge");
    }
    out.method = "max_entropy";
    out.warnings.push_back("Gram-Charlier density went negative; used maximum-entropy fit");
  } else {
    for (double& d : dens) d = std::max(d, 0.0);
    out.method = order == 2 ? "gaussian" : "gram_charlier";
  }
  const double norm = trapezoid(x_grid, dens);
  if (!(norm > 0.0)) throw NumericalError("quadrature density has zero mass on the grid");
  for (double& d : dens) d /= norm;
  out.density = std::move(dens);
  return out;
}

std::vector<QuadratureDistribution> quadrature_from_scan(const HomodyneScan& scan,
                                                         const QuadratureOptions& opts) {
  const auto mom = quadrature_moments_from_scan(scan, opts.order, opts.policy);
  const auto grid = opts.x_grid.empty() ? default_x_grid(mom, opts.grid_points) : opts.x_grid;
  std::vector<QuadratureDistribution> out;
  for (std::size_t i = 0; i < mom.size(); ++i) {
    auto d = density_from_moments(mom[i], grid);
    d.theta = scan.thetas[i];
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<QuadratureDistribution> analytic_marginals(const PhotonicState& state,
                                                       const std::vector<double>& thetas,
                                                       const std::vector<double>& x_grid) {
  const int n = state.cutoff();
  const CMatrix rho = state.dense();
  std::vector<std::vector<double>> psi(x_grid.size());
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    psi[i] = special::quadrature_eigenfunctions(x_grid[i], n);
  }
  std::vector<QuadratureDistribution> out;
  for (double theta : thetas) {
    QuadratureDistribution d;
    d.theta = theta;
    d.x_grid = x_grid;
    d.method = "analytic";
    d.density.resize(x_grid.size());
    CVector phase(n);
    for (int m = 0; m < n; ++m) phase(m) = std::polar(1.0, -m * theta);
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
      CVector u(n);
      for (int m = 0; m < n; ++m) u(m) = psi[i][m] * phase(m);
      d.density[i] = std::max(0.0, (u.transpose() * rho * u.conjugate())(0).real());
    }
    out.push_back(std::move(d));
  }
  return out;
}

double ramp_hann_kernel(double s, double dx) {
  const double v = 1.0 / (2.0 * dx);
  const double b = kPi / v;
  // I(a) = int_0^v nu cos(a nu) d nu
  auto integral = [v](double a) {
    if (std::abs(a * v) < 1e-4) {
      const double a2 = a * a;
      return v * v / 2.0 - a2 * std::pow(v, 4) / 8.0 + a2 * a2 * std::pow(v, 6) / 144.0;
    }
    return v * std::sin(a * v) / a + (std::cos(a * v) - 1.0) / (a * a);
  };
  const double a = 2.0 * kPi * s;
  return 2.0 * (0.5 * integral(a) + 0.25 * integral(a + b) + 0.25 * integral(a - b));
}

WignerGrid inverse_radon(const std::vector<QuadratureDistribution>& distributions,
                         const std::vector<double>& x_axis, const std::vector<double>& p_axis) {
  if (distributions.size() < 20) {
    throw ConfigError("inverse Radon needs at least 20 angles over [0, pi), got " +
                      std::to_string(distributions.size()));
  }
  const auto& grid = distributions.front().x_grid;
  const int nx = static_cast<int>(grid.size());
  if (nx < 3) throw ConfigError("quadrature grid needs at least 3 points");
  const double dx = (grid.back() - grid.front()) / (nx - 1);
  for (int i = 1; i < nx; ++i) {
    if (std::abs(grid[i] - grid[i - 1] - dx) > 1e-9 * std::max(1.0, std::abs(dx))) {
      throw ConfigError("inverse Radon needs a uniform quadrature grid");
    }
  }
  for (const auto& d : distributions) {
    if (d.x_grid.size() != grid.size() || d.density.size() != grid.size()) {
      throw ConfigError("all quadrature distributions must share one grid");
    }
    for (int i = 0; i < nx; ++i) {
      if (std::abs(d.x_grid[i] - grid[i]) > 1e-12 * std::max(1.0, std::abs(grid[i]))) {
        throw ConfigError("all quadrature distributions must share one grid");
      }
    }
  }
  std::vector<double> h(2 * nx - 1);
  for (int j = -(nx - 1); j <= nx - 1; ++j) h[j + nx - 1] = ramp_hann_kernel(j * dx, dx);

  WignerGrid w;
  w.x_axis = x_axis;
  w.p_axis = p_axis;
  w.values = Eigen::MatrixXd::Zero(x_axis.size(), p_axis.size());
  const double weight = kPi / static_cast<double>(distributions.size());
  std::vector<double> filtered(nx);
  for (const auto& d : distributions) {
    for (int i = 0; i < nx; ++i) {
      double s = 0.0;
      for (int j = 0; j < nx; ++j) s += d.density[j] * h[i - j + nx - 1];
      filtered[i] = s * dx;
    }
    const double c = std::cos(d.theta), sn = std::sin(d.theta);
    for (std::size_t ix = 0; ix < x_axis.size(); ++ix) {
      for (std::size_t ip = 0; ip < p_axis.size(); ++ip) {
        const double t = (x_axis[ix] * c + p_axis[ip] * sn - grid.front()) / dx;
        if (t < 0.0 || t > nx - 1) continue;
        const int i0 = std::min(static_cast<int>(t), nx - 2);
        const double f = t - i0;
        w.values(ix, ip) += weight * ((1.0 - f) * filtered[i0] + f * filtered[i0 + 1]);
      }
    }
  }
  const double integral = w.integral();
  if (std::abs(integral - 1.0) > 2e-2) {
    std::ostringstream os;
    os << "reconstructed Wigner integrates to " << integral << " on this grid";
    w.warnings.push_back(os.str());
  }
  return w;
}

CoherenceSource parse_coherence_source(const std::string& name) {
  if (name == "coherent") return CoherenceSource::Coherent;
  if (name == "thermal") return CoherenceSource::Thermal;
  throw ConfigError("unsupported coherence source '" + name + "' (expected coherent or thermal)");
}

std::string coherence_source_name(CoherenceSource source) {
  return source == CoherenceSource::Coherent ? "coherent" : "thermal";
}

std::pair<double, double> tilde_moments(CoherenceSource source, double mean_n, double gamma) {
  const double first = mean_n * (1.0 + gamma) / 2.0;
  const double h = (1.0 + gamma) * (1.0 + gamma) / 4.0;
  if (source == CoherenceSource::Thermal) return {first, h * (2.0 * mean_n * mean_n + mean_n)};
  const double cos2 = (1.0 + std::pow(gamma, 4)) / 2.0;
  return {first, mean_n * mean_n * (1.0 + 2.0 * gamma + cos2) / 4.0 + h * mean_n};
}

PhotonStatistics collective_statistics(CoherenceSource source, double mean_n, double gamma) {
  if (!(mean_n > 0.0)) throw ConfigError("mean photon number must be > 0");
  if (source == CoherenceSource::Thermal) {
    return statistics(make_thermal(mean_n, thermal_cutoff(mean_n)));
  }
  const double lambda_max = 2.0 * mean_n / (1.0 + gamma);
  const double sigma = std::sqrt(std::max(0.0, -2.0 * std::log(gamma)));
  if (sigma < 3e-3) return poisson_statistics(lambda_max, poisson_cutoff(lambda_max));
  const int cutoff = poisson_cutoff(lambda_max);
  const int q = std::clamp(static_cast<int>(std::ceil(4.0 * kPi / sigma)), 64, 4096);
  std::vector<double> lg(cutoff);
  for (int n = 0; n < cutoff; ++n) lg[n] = std::lgamma(n + 1.0);
  PhotonStatistics st;
  st.probs.assign(cutoff, 0.0);
  double wsum = 0.0;
  for (int i = 0; i < q; ++i) {
    const double phi = -kPi + 2.0 * kPi * i / q;
    double f = 0.0;
    if (sigma < 2.0) {
      for (int w = -3; w <= 3; ++w) {
        const double u = (phi + 2.0 * kPi * w) / sigma;
        f += std::exp(-0.5 * u * u);
      }
      f /= sigma * std::sqrt(2.0 * kPi);
    } else {
      f = 1.0;
      for (int k = 1; k <= 40; ++k) f += 2.0 * std::exp(-0.5 * k * k * sigma * sigma) * std::cos(k * phi);
      f /= 2.0 * kPi;
    }
    wsum += f;
    const double lambda = lambda_max * (1.0 + std::cos(phi)) / 2.0;
    if (lambda <= 0.0) {
      st.probs[0] += f;
      continue;
    }
    const double ll = std::log(lambda);
    for (int n = 0; n < cutoff; ++n) {
      const double lp = n * ll - lambda - lg[n];
      if (lp > -745.0) st.probs[n] += f * std::exp(lp);
    }
  }
  for (double& p : st.probs) p /= wsum;
  st.tail_mass = std::max(0.0, 1.0 - st.total());
  return st;
}

CoherenceResult coherence_scan(CoherenceSource source, double mean_n, double bandwidth, Coupling g,
                               const std::vector<double>& taus, const CoherenceOptions& opts) {
  if (!(bandwidth > 0.0 && bandwidth <= 0.5)) throw ConfigError("bandwidth must lie in (0, 0.5]");
  if (!(mean_n > 0.0)) throw ConfigError("mean photon number must be > 0");
  CoherenceResult r;
  r.source = source;
  r.mean_n = mean_n;
  r.bandwidth = bandwidth;
  r.taus = taus;
  r.g = g;
  const auto zero = tilde_moments(source, mean_n, 1.0);
  const double x0 = (zero.second - zero.first) / (zero.first * zero.first);
  for (double tau : taus) {
    const double gamma = std::exp(-0.5 * std::pow(bandwidth * tau, 2));
    const auto [m1, m2] = tilde_moments(source, mean_n, gamma);
    const double x = (m2 - m1) / (m1 * m1);
    r.g1.push_back(gamma);
    r.g1_mod.push_back((2.0 * m1 - zero.first) / zero.first);
    r.g2_mod.push_back(2.0 * x - x0);
    r.tilde_n.push_back(m1);
    r.tilde_n2.push_back(m2);
    if (opts.with_spectra) {
      const Coupling geff(g.magnitude * std::sqrt(2.0 + 2.0 * gamma), g.phase);
      r.spectra.push_back(spectrum_approx(collective_statistics(source, mean_n, gamma), geff,
                                          opts.half_width, opts.spec_tol));
    }
  }
  return r;
}

CoherenceEstimate coherence_from_spectra(const std::vector<ElectronSpectrum>& spectra,
                                         const ElectronSpectrum& reference, Coupling g,
                                         const PeakPolicy& policy) {
  const Coupling doubled(2.0 * g.magnitude, g.phase);
  const auto ref = moments_of(reference, doubled, 2, policy);
  if (!(ref[0] > 0.0)) throw NumericalError("zero-delay spectrum gives <n~> <= 0");
  const double x0 = (ref[1] - ref[0]) / (ref[0] * ref[0]);
  CoherenceEstimate out;
  for (const auto& sp : spectra) {
    const auto m = moments_of(sp, doubled, 2, policy);
    out.tilde_n.push_back(m[0]);
    out.tilde_n2.push_back(m[1]);
    out.g1_mod.push_back((2.0 * m[0] - ref[0]) / ref[0]);
    out.g2_mod.push_back(2.0 * (m[1] - m[0]) / (m[0] * m[0]) - x0);
  }
  return out;
}

}  // namespace qpinem

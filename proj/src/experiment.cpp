#include "qpinem/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qpinem/error.hpp"

namespace qpinem {

namespace {

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

std::vector<double> true_moments(const PhotonicState& state, int order) {
  return moments(statistics(state), order).values;
}

ElectronSpectrum forward(const PhotonicState& state, Coupling g) {
  return spectrum_approx(statistics(state), g);
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL))) {}

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
  return splitmix64(key_ ^ splitmix64(counter));
}

double CounterRng::uniform(std::uint64_t counter) const {
  return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t counter) const {
  const double u1 = 1.0 - uniform(2 * counter);
  const double u2 = uniform(2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t substream(std::uint64_t point, std::uint64_t realization) {
  return (point << 32) ^ realization;
}

void validate(const ExperimentConfig& config) {
  if (config.electrons < 1) throw ConfigError("electrons must be >= 1");
  if (config.realizations < 1) throw ConfigError("realizations must be >= 1");
  if (!(config.g_jitter >= 0.0)) throw ConfigError("g_jitter must be >= 0");
}

ElectronSpectrum sample_spectrum(const ElectronSpectrum& spectrum, int n_electrons,
                                 std::uint64_t seed, std::uint64_t stream) {
  if (n_electrons < 1) throw ConfigError("number of electrons must be >= 1");
  std::vector<double> cdf(spectrum.probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    if (spectrum.probs[i] < 0.0) throw ConfigError("cannot sample a spectrum with negative entries");
    acc += spectrum.probs[i];
    cdf[i] = acc;
  }
  if (!(acc > 0.0)) throw ConfigError("cannot sample an empty spectrum");
  const CounterRng rng(seed, stream);
  std::vector<double> counts(cdf.size(), 0.0);
  for (int e = 0; e < n_electrons; ++e) {
    const double u = rng.uniform(static_cast<std::uint64_t>(e)) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    counts[static_cast<std::size_t>(it - cdf.begin())] += 1.0;
  }
  ElectronSpectrum out;
  out.k_min = spectrum.k_min;
  out.k_max = spectrum.k_max;
  out.engine = "sampled";
  out.probs.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) out.probs[i] = counts[i] / n_electrons;
  return out;
}

MomentEstimate invert_sampled(const ElectronSpectrum& sampled, Coupling g, int order) {
  int top = 0;
  for (int k = 1; k <= sampled.k_max; ++k) {
    if (sampled.at(k) > 0.0) top = k;
  }
  if (top < order) {
    std::ostringstream os;
    os << "no positive peak beyond k = " << top << "; order " << order << " is not resolvable";
    throw NumericalError(os.str());
  }
  return moments_from_spectrum(sampled, build_kernel(g, order, top));
}

PrecisionReport precision_curve(const PhotonicState& state, const ExperimentConfig& config,
                                const std::vector<int>& electron_grid, int order) {
  validate(config);
  if (order < 1) throw ConfigError("moment order must be >= 1");
  if (electron_grid.empty()) throw ConfigError("electron sweep is empty");
  PrecisionReport rep;
  rep.order = order;
  rep.realizations = config.realizations;
  rep.seed = config.seed;
  rep.g = config.g;
  rep.true_moments = true_moments(state, order);
  for (double m : rep.true_moments) {
    if (!(m > 0.0)) throw ConfigError("relative precision needs a state with <n> > 0");
  }
  const auto nominal = forward(state, config.g);
  const CounterRng jitter_rng(config.seed, 0xffffffffULL);

  for (std::size_t i = 0; i < electron_grid.size(); ++i) {
    const int n = electron_grid[i];
    if (n < 1) throw ConfigError("electron counts must be >= 1");
    PrecisionPoint pt;
    pt.electrons = n;
    std::vector<double> sum(order, 0.0), sum2(order, 0.0);
    int ok = 0;
    for (int r = 0; r < config.realizations; ++r) {
      const auto stream = substream(static_cast<std::uint64_t>(n), r);
      ElectronSpectrum truth = nominal;
      if (config.g_jitter > 0.0) {
        const double f = 1.0 + config.g_jitter * jitter_rng.normal(stream);
        truth = forward(state, Coupling(config.g.magnitude * std::max(f, 0.0), config.g.phase));
      }
      const auto sampled = sample_spectrum(truth, n, config.seed, stream);
      try {
        const auto est = invert_sampled(sampled, config.g, order);
        if (est.status != MomentStatus::Ok) {
          ++pt.failures;
          continue;
        }
        for (int m = 0; m < order; ++m) {
          const double e = std::abs(est.moments.values[m] - rep.true_moments[m]) / rep.true_moments[m];
          sum[m] += e;
          sum2[m] += e * e;
        }
        ++ok;
      } catch (const NumericalError&) {
        ++pt.failures;
      }
    }
    for (int m = 0; m < order; ++m) {
      const double mean = ok ? sum[m] / ok : NAN;
      const double var = ok > 1 ? std::max(0.0, (sum2[m] - ok * mean * mean) / (ok - 1)) : 0.0;
      pt.rel_error.push_back(mean);
      pt.rel_error_sem.push_back(ok ? std::sqrt(var / ok) : NAN);
    }
    if (pt.failures > 0) {
      rep.warnings.push_back(std::to_string(pt.failures) + " of " + std::to_string(config.realizations) +
                             " inversions failed at N = " + std::to_string(n));
    }
    rep.points.push_back(std::move(pt));
  }
  if (rep.points.size() >= 2) {
    for (int m = 0; m < order; ++m) {
      std::vector<double> x, y;
      for (const auto& p : rep.points) {
        if (std::isfinite(p.rel_error[m]) && p.rel_error[m] > 0.0) {
          x.push_back(std::log(static_cast<double>(p.electrons)));
          y.push_back(std::log(p.rel_error[m]));
        }
      }
      rep.slopes.push_back(x.size() >= 2 ? fit_slope(x, y) : NAN);
    }
  }
  return rep;
}

JitterReport jitter_sensitivity(const PhotonicState& state, Coupling g,
                                const std::vector<double>& jitters, int order) {
  if (order < 1) throw ConfigError("moment order must be >= 1");
  if (jitters.empty()) throw ConfigError("jitter grid is empty");
  for (double j : jitters) {
    if (std::abs(j) > 0.2) throw ConfigError("jitter must stay within 20%");
  }
  const auto truth = true_moments(state, order);
  JitterReport rep;
  rep.jitters = jitters;
  rep.rel_deviation.assign(order, {});
  for (double j : jitters) {
    const auto sp = forward(state, Coupling(g.magnitude * (1.0 + j), g.phase));
    const auto est = invert_spectrum(sp, g, order);
    for (int m = 0; m < order; ++m) {
      rep.rel_deviation[m].push_back((est.moments.values[m] - truth[m]) / truth[m]);
    }
  }
  for (int m = 0; m < order; ++m) rep.slopes.push_back(fit_slope(jitters, rep.rel_deviation[m]));
  return rep;
}

SingleShotBudget single_shot_budget(const PhotonicState& state, Coupling g, double target, int order,
                                    const SingleShotOptions& opts) {
  if (!(target > 0.0)) throw ConfigError("target moment error must be > 0");
  SingleShotBudget b;
  b.target = target;
  b.beta = g.beta(state.mean_photon_number());
  if (b.beta < 0.3 || b.beta > 10.0 || g.magnitude > 0.3) {
    b.regime_ok = false;
    std::ostringstream os;
    os << "|g| sqrt(<n>) = " << b.beta << " with |g| = " << g.magnitude
       << " is outside the |g| sqrt(<n>) ~ 1, |g| << 1 regime";
    b.warnings.push_back(os.str());
  }
  ExperimentConfig cfg;
  cfg.g = g;
  cfg.realizations = opts.realizations;
  cfg.seed = opts.seed;
  const auto rep = precision_curve(state, cfg, {opts.calibration_electrons}, order);
  double needed = 1.0;
  b.calibration_error = 0.0;
  for (double e : rep.points.front().rel_error) {
    if (!std::isfinite(e)) throw NumericalError("precision calibration failed for every realization");
    b.calibration_error = std::max(b.calibration_error, e);
    needed = std::max(needed, opts.calibration_electrons * (e / target) * (e / target));
  }
  b.electrons_needed = static_cast<int>(std::ceil(needed));
  b.quadrature_growth = 0.5 * b.electrons_needed * g.magnitude * g.magnitude;
  // V(theta) = A + B cos 2theta + C sin 2theta.
  const double v0 = quadrature_variance(state, 0.0);
  const double v1 = quadrature_variance(state, std::numbers::pi / 4.0);
  const double v2 = quadrature_variance(state, std::numbers::pi / 2.0);
  const double a = 0.5 * (v0 + v2);
  b.state_variance = a - std::hypot(0.5 * (v0 - v2), v1 - a);
  b.destructive = b.quadrature_growth > b.state_variance;
  if (b.destructive) {
    b.warnings.push_back("back-action exceeds the state's quadrature variance before the target "
                         "precision is reached: destructive measurement only");
  }
  const int drift_n = std::min(b.electrons_needed, opts.max_drift_electrons);
  if (drift_n < b.electrons_needed) {
    b.warnings.push_back("statistics drift evaluated for the first " + std::to_string(drift_n) +
                         " electrons only");
  }
  b.drift = traced_back_action(state, g, drift_n).deviation;
  return b;
}

}  // namespace qpinem

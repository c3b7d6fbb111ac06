#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qpinem/error.hpp"
#include "qpinem/experiment.hpp"
#include "qpinem/io.hpp"
#include "qpinem/oracle.hpp"
#include "qpinem/reconstruction.hpp"
#include "qpinem/svg.hpp"
#include "qpinem/tomography.hpp"

using namespace qpinem;
using io::json;

namespace {

constexpr const char* kVersion = "1.0.0";

struct StateArgs {
  std::string kind = "coherent";
  double mean_n = 100.0;
  int n = 0;
  std::vector<double> alpha;  // re, im
  double phase = 0.0;
  double r = 0.5;
  double phi = 0.0;
  int parity = 1;
  int cutoff = 0;
  double tail_tol = kDefaultTailTol;
  std::string file;
};

struct Common {
  std::string out_dir;
  std::string format = "csv";
  bool svg = false;
  std::string config;
};

void add_state_options(CLI::App* app, StateArgs& s) {
  app->add_option("--state", s.kind, "vacuum|fock|coherent|thermal|squeezed|squeezed_vacuum|cat|mixed|file")
      ->check(CLI::IsMember({"vacuum", "fock", "coherent", "thermal", "squeezed", "squeezed_vacuum", "cat",
                             "mixed", "file"}));
  app->add_option("--mean-n", s.mean_n, "mean photon number (coherent, thermal, squeezed_vacuum, cat, mixed)");
  app->add_option("--n", s.n, "Fock photon number");
  app->add_option("--alpha", s.alpha, "complex amplitude as RE IM (overrides --mean-n)")->expected(2);
  app->add_option("--phase", s.phase, "phase of alpha when built from --mean-n");
  app->add_option("--r", s.r, "squeezing parameter");
  app->add_option("--phi", s.phi, "squeezing angle (xi = r e^{2i phi})");
  app->add_option("--parity", s.parity, "cat parity +1 or -1")->check(CLI::IsMember({1, -1}));
  app->add_option("--cutoff", s.cutoff, "Fock cutoff (automatic when 0)");
  app->add_option("--tail-tol", s.tail_tol, "allowed probability beyond the cutoff");
  app->add_option("--state-file", s.file, "state JSON for --state file");
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--out-dir", c.out_dir, "output directory (default $QPINEM_OUT_DIR or ./qpinem_out)");
  app->add_option("--format", c.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  app->add_flag("--svg", c.svg, "also render SVG plots");
  app->add_option("--config", c.config, "JSON config file; command-line flags take precedence");
}

cplx state_alpha(const StateArgs& s) {
  if (s.alpha.size() == 2) return {s.alpha[0], s.alpha[1]};
  if (s.mean_n < 0) throw ConfigError("--mean-n must be >= 0");
  return std::polar(std::sqrt(s.mean_n), s.phase);
}

// Smallest power-of-two cutoff the constructor accepts.
template <class F>
PhotonicState with_auto_cutoff(int start, F build) {
  for (int c = std::max(start, 8);; c *= 2) {
    try {
      return build(c);
    } catch (const ConfigError&) {
      if (c > (1 << 20)) throw;
    }
  }
}

PhotonicState build_state(const StateArgs& s) {
  const int fixed = s.cutoff;
  const double tol = s.tail_tol;
  if (s.kind == "vacuum") return make_fock(0, fixed > 0 ? fixed : 1);
  if (s.kind == "fock") {
    if (s.n < 0) throw ConfigError("--n must be >= 0");
    return make_fock(s.n, fixed > 0 ? fixed : s.n + 1);
  }
  if (s.kind == "coherent") {
    const cplx a = state_alpha(s);
    return make_coherent(a, fixed > 0 ? fixed : poisson_cutoff(std::norm(a)), tol);
  }
  if (s.kind == "thermal") {
    if (!(s.mean_n > 0)) throw ConfigError("thermal state needs --mean-n > 0");
    return make_thermal(s.mean_n, fixed > 0 ? fixed : thermal_cutoff(s.mean_n, tol), tol);
  }
  if (s.kind == "squeezed" || s.kind == "squeezed_vacuum") {
    cplx a = 0.0;
    double r = s.r;
    if (s.kind == "squeezed_vacuum") {
      if (!(s.mean_n >= 0)) throw ConfigError("--mean-n must be >= 0");
      r = std::asinh(std::sqrt(s.mean_n));
    } else if (s.alpha.size() == 2) {
      a = state_alpha(s);
    }
    if (fixed > 0) return make_squeezed(a, r, s.phi, fixed, tol);
    const int start = poisson_cutoff(std::norm(a) + std::pow(std::sinh(r), 2));
    return with_auto_cutoff(start, [&](int c) { return make_squeezed(a, r, s.phi, c, tol); });
  }
  if (s.kind == "cat" || s.kind == "mixed") {
    const cplx a = state_alpha(s);
    const int c = fixed > 0 ? fixed : poisson_cutoff(std::norm(a));
    return s.kind == "cat" ? make_cat(a, s.parity, c, tol) : make_mixed_pair(a, c, tol);
  }
  if (s.file.empty()) throw ConfigError("--state file needs --state-file PATH");
  return io::state_from_json(io::read_json(s.file));
}

std::string resolve_out_dir(const Common& c) {
  if (!c.out_dir.empty()) return c.out_dir;
  if (const char* env = std::getenv("QPINEM_OUT_DIR"); env && *env) return env;
  return "qpinem_out";
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Run {
 public:
  Run(CLI::App* app, const Common& c) : app_(app), dir_(resolve_out_dir(c)), format_(c.format), svg_(c.svg) {}

  std::string path(const std::string& name) const { return (std::filesystem::path(dir_) / name).string(); }
  bool json_format() const { return format_ == "json"; }
  bool svg() const { return svg_; }

  void csv(const std::string& name, const io::Table& t) {
    io::write_csv(path(name), t);
    outputs_.push_back(name);
  }
  void write_json(const std::string& name, const json& j) {
    io::write_json(path(name), j);
    outputs_.push_back(name);
  }
  void text(const std::string& name, const std::string& s) {
    io::write_text(path(name), s);
    outputs_.push_back(name);
  }

  void manifest() {
    json cfg = json::object();
    for (const CLI::Option* opt : app_->get_options()) {
      const std::string name = opt->get_single_name();
      if (name.empty() || name == "help" || name == "config") continue;
      const auto& res = opt->results();
      if (!res.empty()) {
        cfg[name] = res.size() == 1 ? json(res.front()) : json(res);
      } else {
        cfg[name] = opt->get_default_str();
      }
    }
    json m{{"tool", "qpinem"},
           {"version", kVersion},
           {"subcommand", app_->get_name()},
           {"config", cfg},
           {"outputs", outputs_},
           {"created_utc", utc_now()}};
    io::write_json(path("manifest.json"), m);
  }

 private:
  CLI::App* app_;
  std::string dir_;
  std::string format_;
  bool svg_;
  std::vector<std::string> outputs_;
};

Coupling coupling(double g, double phase) {
  if (!(g >= 0.0)) throw ConfigError("--g must be >= 0");
  return Coupling(g, phase);
}

svg::Series spectrum_series(const std::string& name, const ElectronSpectrum& s) {
  svg::Series out{name, {}, {}};
  for (int k = s.k_min; k <= s.k_max; ++k) {
    out.x.push_back(k);
    out.y.push_back(s.at(k));
  }
  return out;
}

// ---------------------------------------------------------------- spectrum

struct SpectrumArgs {
  StateArgs state;
  Common common;
  double g = 0.1;
  double g_phase = 0.0;
  std::string engine = "approx";
  int half_width = 0;
  double spec_tol = kDefaultSpecTol;
  std::vector<double> sweep;
  bool post_state = false;
};

ElectronSpectrum run_engine(const std::string& engine, const StateArgs& sa, const PhotonicState* state, Coupling g,
                            std::optional<int> hw, double tol, std::optional<PhotonicState>* post) {
  if (engine == "closed") {
    std::string fam = sa.kind;
    if (fam == "vacuum") return spectrum_closed_form(StateFamily::Fock, {0.0, 0}, g, hw);
    const auto family = parse_family(fam);
    return spectrum_closed_form(family, {sa.mean_n, sa.n}, g, hw);
  }
  if (engine == "approx") return spectrum_approx(statistics(*state), g, hw, tol);
  if (engine == "exact") {
    SpectrumOptions o;
    o.half_width = hw;
    o.spec_tol = tol;
    o.want_joint = false;
    o.want_post_state = post != nullptr;
    auto out = spectrum_exact(*state, g, o);
    if (post) *post = out.post_state;
    return out.spectrum;
  }
  OracleOptions o;
  o.half_width = hw;
  auto out = oracle_spectrum(*state, g, o);
  if (post) *post = out.post_state;
  return out.spectrum;
}

int cmd_spectrum(CLI::App* app, const SpectrumArgs& a) {
  Run run(app, a.common);
  const Coupling g = coupling(a.g, a.g_phase);
  const std::optional<int> hw = a.half_width > 0 ? std::optional<int>(a.half_width) : std::nullopt;
  std::optional<PhotonicState> state;
  if (a.engine != "closed") state = build_state(a.state);
  std::optional<PhotonicState> post;
  const auto sp = run_engine(a.engine, a.state, state ? &*state : nullptr, g, hw, a.spec_tol,
                             a.post_state ? &post : nullptr);
  const std::string label = state ? state->label() : a.state.kind;
  if (run.json_format()) {
    run.write_json("spectrum.json", io::spectrum_json(sp, g, label));
  } else {
    run.csv("spectrum.csv", io::spectrum_table(sp));
  }
  if (post) run.write_json("post_state.json", io::state_json(*post));
  if (!a.sweep.empty()) {
    std::vector<ElectronSpectrum> maps;
    for (double mn : a.sweep) {
      StateArgs s = a.state;
      s.mean_n = mn;
      s.alpha.clear();
      std::optional<PhotonicState> st;
      if (a.engine != "closed") st = build_state(s);
      maps.push_back(run_engine(a.engine, s, st ? &*st : nullptr, g, hw, a.spec_tol, nullptr));
    }
    // Common window so the long table is rectangular.
    int kw = 0;
    for (const auto& m : maps) kw = std::max({kw, -m.k_min, m.k_max});
    for (auto& m : maps) {
      std::vector<double> p(2 * kw + 1, 0.0);
      for (int k = m.k_min; k <= m.k_max; ++k) p[k + kw] = m.at(k);
      m.k_min = -kw;
      m.k_max = kw;
      m.probs = std::move(p);
    }
    run.csv("map.csv", io::spectrum_map_table(a.sweep, maps));
    if (run.svg()) {
      Eigen::MatrixXd v(a.sweep.size(), 2 * kw + 1);
      std::vector<double> ks;
      for (int k = -kw; k <= kw; ++k) ks.push_back(k);
      for (std::size_t i = 0; i < maps.size(); ++i) {
        for (int k = -kw; k <= kw; ++k) v(i, k + kw) = maps[i].at(k);
      }
      run.text("map.svg", svg::heatmap("electron spectra vs <n>", "<n>", "k", a.sweep, ks, v));
    }
  }
  if (run.svg()) run.text("spectrum.svg", svg::line_plot("electron spectrum", "k", "P_k", {spectrum_series(label, sp)}));
  run.manifest();
  std::cout << "spectrum: engine " << sp.engine << ", window [" << sp.k_min << ", " << sp.k_max
            << "], leakage " << sp.leakage << "\n";
  return 0;
}

// ---------------------------------------------------------------- reconstruct

struct ReconstructArgs {
  StateArgs state;
  Common common;
  std::string input;
  double g = 0.1;
  double g_phase = 0.0;
  std::string engine = "approx";
  int order = 3;
  int peaks = 0;
  double tol = 1e-9;
  double noise_floor = 0.0;
  int electrons = 0;
  std::uint64_t seed = 1;
  std::vector<int> support;
};

int cmd_reconstruct(CLI::App* app, const ReconstructArgs& a) {
  Run run(app, a.common);
  const Coupling g = coupling(a.g, a.g_phase);
  if (!(g.magnitude > 0)) throw ConfigError("reconstruction needs --g > 0");
  ElectronSpectrum sp;
  if (!a.input.empty()) {
    sp = io::read_spectrum(a.input);
  } else {
    const auto st = build_state(a.state);
    sp = a.engine == "exact" ? run_engine("exact", a.state, &st, g, std::nullopt, kDefaultSpecTol, nullptr)
                             : spectrum_approx(statistics(st), g);
  }
  std::string method = "kernel";
  MomentEstimate est;
  if (a.electrons > 0) {
    sp = sample_spectrum(sp, a.electrons, a.seed);
    method = "kernel_sampled";
    est = a.peaks > 0 ? moments_from_spectrum(sp, build_kernel(g, a.order, a.peaks))
                      : invert_sampled(sp, g, a.order);
  } else if (a.peaks > 0) {
    est = moments_from_spectrum(sp, build_kernel(g, a.order, a.peaks));
  } else {
    est = invert_spectrum(sp, g, a.order, PeakPolicy{a.tol, a.noise_floor});
  }
  run.write_json("moments.json", io::moments_json(est, g, method));
  if (!a.support.empty()) {
    if (a.support.size() != 3 || a.support[2] <= 0 || a.support[1] < a.support[0]) {
      throw ConfigError("--support expects LO HI STEP with STEP > 0");
    }
    std::vector<int> grid;
    for (int n = a.support[0]; n <= a.support[1]; n += a.support[2]) grid.push_back(n);
    const auto fit = statistics_from_spectrum(sp, g, grid);
    io::Table t{{"n", "p"}, {}};
    for (std::size_t i = 0; i < grid.size(); ++i) t.rows.push_back({double(grid[i]), fit.weights[i]});
    run.csv("statistics.csv", t);
    run.write_json("statistics_fit.json", json{{"residual", fit.residual},
                                               {"regularized", fit.regularized},
                                               {"regularization", fit.regularization},
                                               {"warnings", fit.warnings}});
  }
  run.manifest();
  std::cout << "reconstruct: K = " << est.peaks << ", <n> = " << est.moments(1) << "\n";
  for (const auto& w : est.warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

// ---------------------------------------------------------------- tomography

struct TomographyArgs {
  StateArgs state;
  Common common;
  double g = 0.1;
  int angles = 40;
  double lo_ratio = 100.0;
  std::string engine = "approx";
  int order = 2;
  int grid_points = 201;
  int wigner_points = 81;
  std::string marginals = "scan";
  std::string difference_with;
  bool quantum_first = false;
};

int cmd_tomography(CLI::App* app, const TomographyArgs& a) {
  Run run(app, a.common);
  const Coupling g = coupling(a.g, 0.0);
  const auto state = build_state(a.state);
  const auto thetas = uniform_angles(a.angles);
  ScanOptions so;
  so.engine = parse_scan_engine(a.engine);
  so.quantum_first = a.quantum_first;
  const auto scan = homodyne_scan(state, a.lo_ratio, g, thetas, so);
  run.csv("scan.csv", io::scan_table(thetas, scan.spectra));
  run.csv("references.csv", io::scan_table({0.0, 1.0}, {scan.lo_only, scan.quantum_only}));

  // Grid sized from the quadrature spread: the narrowest marginal sets the resolution.
  std::vector<std::vector<double>> qmom;
  if (a.marginals == "scan") {
    qmom = quadrature_moments_from_scan(scan, std::max(a.order, 2));
  } else {
    for (double t : thetas) qmom.push_back(quadrature_moments(state, t, 2));
  }
  double x_reach = 3.0, w_reach = 3.0;
  for (const auto& m : qmom) {
    const double sd = std::sqrt(std::max(m[1] - m[0] * m[0], 0.0));
    x_reach = std::max(x_reach, std::abs(m[0]) + 5.0 * sd);
    w_reach = std::max(w_reach, std::abs(m[0]) + 3.5 * sd);
  }
  const auto x_grid = linspace(-x_reach, x_reach, a.grid_points);
  std::vector<QuadratureDistribution> dists;
  json summary{{"lo_amplitude", std::abs(scan.lo_amplitude)}, {"angles", a.angles}, {"engine", a.engine}};
  if (a.marginals == "scan") {
    QuadratureOptions qo;
    qo.order = a.order;
    qo.grid_points = a.grid_points;
    qo.x_grid = x_grid;
    dists = quadrature_from_scan(scan, qo);
    double worst = 0.0;
    json rows = json::array();
    for (std::size_t i = 0; i < dists.size(); ++i) {
      const auto direct = quadrature_moments(state, thetas[i], a.order);
      const double sd = std::sqrt(std::max(direct[1] - direct[0] * direct[0], 1e-300));
      double err = 0.0;
      for (int m = 0; m < a.order; ++m) {
        const double scale = std::max(std::abs(direct[m]), std::pow(sd, m + 1));
        err = std::max(err, std::abs(dists[i].moments[m] - direct[m]) / scale);
      }
      worst = std::max(worst, err);
      rows.push_back({{"theta", thetas[i]}, {"moments", dists[i].moments}, {"direct", direct}, {"method", dists[i].method}});
    }
    summary["quadrature_moments"] = rows;
    summary["max_relative_moment_error"] = worst;
  } else {
    dists = analytic_marginals(state, thetas, x_grid);
  }
  run.csv("quadratures.csv", io::quadrature_table(dists));
  const auto axis = linspace(-w_reach, w_reach, a.wigner_points);
  const auto rec = inverse_radon(dists, axis, axis);
  const auto ref = wigner(state, axis, axis);
  run.csv("wigner.csv", io::wigner_table(rec));
  const double linf = (rec.values - ref.values).cwiseAbs().maxCoeff();
  run.write_json("wigner.json", json{{"x_axis", axis},
                                     {"p_axis", axis},
                                     {"integral", rec.integral()},
                                     {"peak", rec.peak()},
                                     {"marginals", a.marginals},
                                     {"warnings", rec.warnings}});
  summary["wigner_linf_error"] = linf;
  summary["wigner_linf_relative"] = linf / ref.peak();
  if (!a.difference_with.empty()) {
    StateArgs other = a.state;
    other.kind = a.difference_with;
    const auto scan2 = homodyne_scan(build_state(other), a.lo_ratio, g, thetas, so);
    io::Table t{{"theta", "k", "delta"}, {}};
    double dmax = 0.0;
    for (std::size_t i = 0; i < thetas.size(); ++i) {
      const auto& s1 = scan.spectra[i];
      const auto& s2 = scan2.spectra[i];
      for (int k = std::min(s1.k_min, s2.k_min); k <= std::max(s1.k_max, s2.k_max); ++k) {
        const double d = s1.at(k) - s2.at(k);
        dmax = std::max(dmax, std::abs(d));
        t.rows.push_back({thetas[i], double(k), d});
      }
    }
    run.csv("difference.csv", t);
    summary["difference_with"] = a.difference_with;
    summary["difference_max_abs"] = dmax;
  }
  run.write_json("summary.json", summary);
  if (run.svg()) {
    run.text("wigner.svg", svg::heatmap("reconstructed Wigner function", "x", "p", axis, axis, rec.values, true));
    std::vector<svg::Series> ss;
    for (std::size_t i = 0; i < thetas.size(); i += std::max<std::size_t>(1, thetas.size() / 4)) {
      ss.push_back(spectrum_series("theta=" + io::format_number(thetas[i]), scan.spectra[i]));
    }
    run.text("scan.svg", svg::line_plot("homodyne scan", "k", "P_k", ss));
  }
  run.manifest();
  std::cout << "tomography: Wigner L-inf error " << linf / ref.peak() << " of peak\n";
  return 0;
}

// ---------------------------------------------------------------- hbt

struct HbtArgs {
  Common common;
  std::string source = "coherent";
  double mean_n = 1000.0;
  double bandwidth = 0.1;
  double g = 0.01;
  double tau_max = 60.0;
  int tau_count = 121;
};

int cmd_hbt(CLI::App* app, const HbtArgs& a) {
  Run run(app, a.common);
  if (a.tau_count < 2) throw ConfigError("--tau-count must be >= 2");
  const auto taus = linspace(0.0, a.tau_max, a.tau_count);
  const auto res = coherence_scan(parse_coherence_source(a.source), a.mean_n, a.bandwidth, coupling(a.g, 0.0), taus);
  int kw = 0;
  for (const auto& s : res.spectra) kw = std::max({kw, -s.k_min, s.k_max});
  io::Table map{{"tau", "k", "probability"}, {}};
  for (std::size_t i = 0; i < taus.size(); ++i) {
    for (int k = -kw; k <= kw; ++k) map.rows.push_back({taus[i], double(k), res.spectra[i].at(k)});
  }
  run.csv("map.csv", map);
  run.csv("coherence.csv", io::coherence_table(res));
  const auto est = coherence_from_spectra(res.spectra, res.spectra.front(), coupling(a.g, 0.0));
  CoherenceResult measured = res;
  measured.g1_mod = est.g1_mod;
  measured.g2_mod = est.g2_mod;
  run.csv("coherence_measured.csv", io::coherence_table(measured));
  if (run.svg()) {
    run.text("coherence.svg", svg::line_plot("modified coherence", "tau", "g~", {{"g1_mod", taus, res.g1_mod},
                                                                                {"g2_mod", taus, res.g2_mod}}));
    Eigen::MatrixXd v(taus.size(), 2 * kw + 1);
    std::vector<double> ks;
    for (int k = -kw; k <= kw; ++k) ks.push_back(k);
    for (std::size_t i = 0; i < taus.size(); ++i) {
      for (int k = -kw; k <= kw; ++k) v(i, k + kw) = res.spectra[i].at(k);
    }
    run.text("map.svg", svg::heatmap("electron spectra vs delay", "tau", "k", taus, ks, v));
  }
  run.manifest();
  std::cout << "hbt: g2_mod(0) = " << res.g2_mod.front() << ", g2_mod(tau_max) = " << res.g2_mod.back() << "\n";
  return 0;
}

// ---------------------------------------------------------------- experiment

struct ExperimentArgs {
  StateArgs state;
  Common common;
  std::string mode = "precision";
  double g = 0.1;
  std::vector<int> electrons{10, 100, 1000, 10000, 100000};
  int realizations = 100;
  std::uint64_t seed = 1;
  int order = 3;
  double g_jitter = 0.0;
  std::vector<double> jitters{-0.05, -0.025, 0.0, 0.025, 0.05};
  double target = 0.05;
  int max_drift_electrons = 1000;
  bool order_given = false;
};

int cmd_experiment(CLI::App* app, const ExperimentArgs& a) {
  Run run(app, a.common);
  const auto state = build_state(a.state);
  const Coupling g = coupling(a.g, 0.0);
  if (a.mode == "precision") {
    ExperimentConfig cfg;
    cfg.g = g;
    cfg.realizations = a.realizations;
    cfg.seed = a.seed;
    cfg.g_jitter = a.g_jitter;
    const auto rep = precision_curve(state, cfg, a.electrons, a.order);
    run.csv("precision.csv", io::precision_table(rep));
    run.write_json("precision.json", io::precision_json(rep));
    if (run.svg()) {
      std::vector<svg::Series> ss;
      for (int m = 1; m <= a.order; ++m) {
        svg::Series s{"m=" + std::to_string(m), {}, {}};
        for (const auto& p : rep.points) {
          s.x.push_back(std::log10(p.electrons));
          s.y.push_back(std::log10(p.rel_error[m - 1]));
        }
        ss.push_back(s);
      }
      run.text("precision.svg", svg::line_plot("relative deviation vs electrons", "log10 N", "log10 error", ss));
    }
    std::cout << "experiment precision: slope(m=1) = " << (rep.slopes.empty() ? NAN : rep.slopes[0]) << "\n";
  } else if (a.mode == "jitter") {
    const auto rep = jitter_sensitivity(state, g, a.jitters, a.order);
    run.csv("jitter.csv", io::jitter_table(rep));
    run.write_json("jitter.json", io::jitter_json(rep));
    std::cout << "experiment jitter: slopes";
    for (double s : rep.slopes) std::cout << " " << s;
    std::cout << "\n";
  } else {
    SingleShotOptions o;
    o.realizations = a.realizations;
    o.seed = a.seed;
    o.max_drift_electrons = a.max_drift_electrons;
    const auto b = single_shot_budget(state, g, a.target, a.order_given ? a.order : 1, o);
    run.write_json("single_shot.json", io::single_shot_json(b));
    std::cout << "experiment single-shot: N_e = " << b.electrons_needed << (b.destructive ? " (destructive)" : "")
              << "\n";
  }
  run.manifest();
  return 0;
}

// Injects config-file values for options not given on the command line.
std::vector<std::string> merge_config(const std::vector<std::string>& args, const CLI::App& app) {
  std::string path;
  const CLI::App* sub = nullptr;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (!sub) sub = app.get_subcommand_no_throw(args[i]);
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || !sub) return args;
  const json cfg = io::read_json(path);
  if (!cfg.is_object()) throw ConfigError("config file must hold a JSON object");
  auto norm = [](std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return key;
  };
  auto known = [&](const std::string& key) { return sub->get_option_no_throw("--" + key) != nullptr; };
  // Top-level keys apply where the subcommand has the option; a subcommand section must match exactly.
  json flat = json::object();
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    if (!it.value().is_object() && known(norm(it.key()))) flat[norm(it.key())] = it.value();
  }
  if (cfg.contains(sub->get_name())) {
    const json& section = cfg[sub->get_name()];
    if (!section.is_object()) throw ConfigError("config section '" + sub->get_name() + "' must be an object");
    for (auto it = section.begin(); it != section.end(); ++it) {
      if (!known(norm(it.key()))) throw ConfigError("unknown option '" + it.key() + "' in config section '" + sub->get_name() + "'");
      flat[norm(it.key())] = it.value();
    }
  }
  std::set<std::string> given;
  for (const auto& s : args) {
    if (s.rfind("--", 0) == 0) given.insert(s.substr(2, s.find('=') == std::string::npos ? std::string::npos : s.find('=') - 2));
  }
  std::vector<std::string> out = args;
  auto scalar = [](const json& x) { return x.is_string() ? x.get<std::string>() : x.dump(); };
  for (auto it = flat.begin(); it != flat.end(); ++it) {
    const std::string& key = it.key();
    if (key == "config" || given.count(key)) continue;
    const json& v = it.value();
    if (v.is_boolean()) {
      if (v.get<bool>()) out.push_back("--" + key);
    } else if (v.is_array()) {
      out.push_back("--" + key);
      for (const auto& e : v) out.push_back(scalar(e));
    } else {
      out.push_back("--" + key);
      out.push_back(scalar(v));
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Free-electron quantum optics: spectra, reconstruction, tomography, coherence, experiments"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  SpectrumArgs sa;
  auto* spectrum = app.add_subcommand("spectrum", "electron spectrum of a photonic state");
  add_state_options(spectrum, sa.state);
  add_common(spectrum, sa.common);
  spectrum->add_option("--g", sa.g, "coupling magnitude |g|");
  spectrum->add_option("--g-phase", sa.g_phase, "coupling phase");
  spectrum->add_option("--engine", sa.engine, "exact|approx|oracle|closed")
      ->check(CLI::IsMember({"exact", "approx", "oracle", "closed"}));
  spectrum->add_option("--half-width", sa.half_width, "k window half-width (automatic when 0)");
  spectrum->add_option("--spec-tol", sa.spec_tol, "allowed window leakage");
  spectrum->add_option("--sweep-mean-n", sa.sweep, "also write a map over these <n> values");
  spectrum->add_flag("--post-state", sa.post_state, "write the traced-out photonic state (exact, oracle)");

  ReconstructArgs ra;
  auto* reconstruct = app.add_subcommand("reconstruct", "photon-number moments and statistics from a spectrum");
  add_state_options(reconstruct, ra.state);
  add_common(reconstruct, ra.common);
  reconstruct->add_option("--input", ra.input, "spectrum file (.csv or .json); otherwise a forward model is used");
  reconstruct->add_option("--g", ra.g, "coupling magnitude |g|");
  reconstruct->add_option("--g-phase", ra.g_phase, "coupling phase");
  reconstruct->add_option("--engine", ra.engine, "forward model: approx|exact")->check(CLI::IsMember({"approx", "exact"}));
  reconstruct->add_option("--order", ra.order, "highest moment M")->check(CLI::Range(1, 40));
  reconstruct->add_option("--peaks", ra.peaks, "fixed peak count K (policy when 0)");
  reconstruct->add_option("--tol", ra.tol, "peak policy remainder tolerance");
  reconstruct->add_option("--noise-floor", ra.noise_floor, "peaks at or below this are ignored");
  reconstruct->add_option("--electrons", ra.electrons, "sample this many electrons first (0 = noiseless)");
  reconstruct->add_option("--seed", ra.seed, "sampling seed");
  reconstruct->add_option("--support", ra.support, "photon-number grid LO HI STEP for statistics")->expected(3);

  TomographyArgs ta;
  auto* tomography = app.add_subcommand("tomography", "free-electron homodyne tomography");
  add_state_options(tomography, ta.state);
  add_common(tomography, ta.common);
  tomography->add_option("--g", ta.g, "coupling magnitude |g|");
  tomography->add_option("--angles", ta.angles, "LO phases over [0, pi)")->check(CLI::PositiveNumber);
  tomography->add_option("--lo-ratio", ta.lo_ratio, "|alpha_LO|^2 / max(<n>, 1)");
  tomography->add_option("--engine", ta.engine, "approx|exact")->check(CLI::IsMember({"approx", "exact"}));
  tomography->add_option("--order", ta.order, "quadrature moments used for the densities")->check(CLI::Range(2, 12));
  tomography->add_option("--grid-points", ta.grid_points, "quadrature grid points");
  tomography->add_option("--wigner-points", ta.wigner_points, "Wigner grid points per axis");
  tomography->add_option("--marginals", ta.marginals, "scan|analytic")->check(CLI::IsMember({"scan", "analytic"}));
  tomography->add_option("--difference-with", ta.difference_with, "second state kind for a scan difference map")
      ->check(CLI::IsMember({"vacuum", "fock", "coherent", "thermal", "squeezed", "squeezed_vacuum", "cat", "mixed"}));
  tomography->add_flag("--quantum-first", ta.quantum_first, "quantum light before the laser stage");

  HbtArgs ha;
  auto* hbt = app.add_subcommand("hbt", "delayed two-point coherence measurement");
  add_common(hbt, ha.common);
  hbt->add_option("--source", ha.source, "coherent|thermal")->check(CLI::IsMember({"coherent", "thermal"}));
  hbt->add_option("--mean-n", ha.mean_n, "mean photon number");
  hbt->add_option("--bandwidth", ha.bandwidth, "bandwidth as a fraction of the carrier frequency");
  hbt->add_option("--g", ha.g, "coupling magnitude |g| per interaction point");
  hbt->add_option("--tau-max", ha.tau_max, "largest delay (units of 1/omega)");
  hbt->add_option("--tau-count", ha.tau_count, "number of delays");

  ExperimentArgs ea;
  auto* experiment = app.add_subcommand("experiment", "finite-electron Monte-Carlo studies");
  add_state_options(experiment, ea.state);
  add_common(experiment, ea.common);
  experiment->add_option("--mode", ea.mode, "precision|jitter|single-shot")
      ->check(CLI::IsMember({"precision", "jitter", "single-shot"}));
  experiment->add_option("--g", ea.g, "coupling magnitude |g|");
  experiment->add_option("--electrons", ea.electrons, "electron counts to sweep");
  experiment->add_option("--realizations", ea.realizations, "realizations per point");
  experiment->add_option("--seed", ea.seed, "random seed");
  experiment->add_option("--order", ea.order, "highest moment M (single-shot defaults to 1)")->check(CLI::Range(1, 12));
  experiment->add_option("--g-jitter", ea.g_jitter, "relative std of |g| between realizations");
  experiment->add_option("--jitters", ea.jitters, "relative |g| offsets for the jitter study");
  experiment->add_option("--target", ea.target, "target relative error of the moments (single-shot)");
  experiment->add_option("--max-drift-electrons", ea.max_drift_electrons, "cap on the exact back-action trace");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = merge_config(args, app);
    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
    if (spectrum->parsed()) return cmd_spectrum(spectrum, sa);
    if (reconstruct->parsed()) return cmd_reconstruct(reconstruct, ra);
    if (tomography->parsed()) return cmd_tomography(tomography, ta);
    if (hbt->parsed()) return cmd_hbt(hbt, ha);
    ea.order_given = experiment->count("--order") > 0;
    return cmd_experiment(experiment, ea);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "qpinem/experiment.hpp"
#include "qpinem/fockspace.hpp"
#include "qpinem/interaction.hpp"
#include "qpinem/reconstruction.hpp"
#include "qpinem/tomography.hpp"

namespace qpinem::io {

using nlohmann::json;

// Shortest decimal that round-trips to the same double; platform independent.
std::string format_number(double v);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;
};

std::string to_csv(const Table& table);
Table parse_csv(const std::string& text);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

void write_csv(const std::string& path, const Table& table);
Table read_csv(const std::string& path);
// Writes JSON with two-space indentation and a trailing newline.
void write_json(const std::string& path, const json& value);
json read_json(const std::string& path);

// k,probability
Table spectrum_table(const ElectronSpectrum& spectrum);
ElectronSpectrum spectrum_from_table(const Table& table);
// {k_min, k_max, probs, leakage, engine, g, state_label}
json spectrum_json(const ElectronSpectrum& spectrum, Coupling g, const std::string& state_label);
ElectronSpectrum spectrum_from_json(const json& j);
// Reads .csv or .json by extension.
ElectronSpectrum read_spectrum(const std::string& path);

// mean_n,k,probability
Table spectrum_map_table(const std::vector<double>& mean_n, const std::vector<ElectronSpectrum>& spectra);

// n,p
Table statistics_table(const PhotonStatistics& stats);
PhotonStatistics statistics_from_table(const Table& table);

// {moments, errors_est, mirror_moments, method, kernel: {g, M, K}, status, warnings}
json moments_json(const MomentEstimate& est, Coupling g, const std::string& method);

// theta,k,probability
Table scan_table(const std::vector<double>& thetas, const std::vector<ElectronSpectrum>& spectra);
// theta,x,density
Table quadrature_table(const std::vector<QuadratureDistribution>& dists);
// x,p,w
Table wigner_table(const WignerGrid& grid);
WignerGrid wigner_from_table(const Table& table);
// tau,g1_mod,g2_mod
Table coherence_table(const CoherenceResult& result);
// N,m,rel_error
Table precision_table(const PrecisionReport& report);
json precision_json(const PrecisionReport& report);
// jitter,m,rel_deviation
Table jitter_table(const JitterReport& report);
json jitter_json(const JitterReport& report);
json single_shot_json(const SingleShotBudget& budget);

// {cutoff, storage, label, tail_mass, real, imag} with the dense density matrix.
json state_json(const PhotonicState& state);
PhotonicState state_from_json(const json& j);

}  // namespace qpinem::io

#include "qpinem/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qpinem/error.hpp"

namespace qpinem::io {

namespace {

double parse_number(const std::string& field, int line) {
  if (field == "nan") return NAN;
  if (field == "inf") return INFINITY;
  if (field == "-inf") return -INFINITY;
  double v = 0.0;
  const char* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw IoError("CSV line " + std::to_string(line) + ": cannot parse number '" + field + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

const json& need(const json& j, const char* key) {
  if (!j.contains(key)) throw IoError(std::string("JSON document lacks field '") + key + "'");
  return j.at(key);
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

int Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  throw IoError("CSV table has no column '" + name + "'");
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out += ',';
    out += table.header[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_number(row[i]);
    }
    out += '\n';
  }
  return out;
}

Table parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Table t;
  if (!std::getline(in, line)) throw IoError("CSV input is empty");
  t.header = split(line);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto fields = split(line);
    if (fields.size() != t.header.size()) {
      throw IoError("CSV line " + std::to_string(lineno) + " has " + std::to_string(fields.size()) +
                    " fields, expected " + std::to_string(t.header.size()));
    }
    std::vector<double> row;
    for (const auto& f : fields) row.push_back(parse_number(f, lineno));
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_text(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  if (ec) throw IoError("cannot create directory " + parent.string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("write to " + path + " failed");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_csv(const std::string& path, const Table& table) { write_text(path, to_csv(table)); }

Table read_csv(const std::string& path) { return parse_csv(read_text(path)); }

void write_json(const std::string& path, const json& value) { write_text(path, value.dump(2) + "\n"); }

json read_json(const std::string& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw IoError("malformed JSON in " + path + ": " + e.what());
  }
}

Table spectrum_table(const ElectronSpectrum& spectrum) {
  Table t{{"k", "probability"}, {}};
  for (int k = spectrum.k_min; k <= spectrum.k_max; ++k) t.rows.push_back({double(k), spectrum.at(k)});
  return t;
}

ElectronSpectrum spectrum_from_table(const Table& table) {
  const int ck = table.column("k"), cp = table.column("probability");
  if (table.rows.empty()) throw IoError("spectrum table is empty");
  ElectronSpectrum s;
  s.k_min = static_cast<int>(table.rows.front()[ck]);
  s.k_max = s.k_min + static_cast<int>(table.rows.size()) - 1;
  s.probs.clear();
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (static_cast<int>(table.rows[i][ck]) != s.k_min + static_cast<int>(i)) {
      throw IoError("spectrum table must list consecutive k values");
    }
    s.probs.push_back(table.rows[i][cp]);
  }
  s.engine = "file";
  return s;
}

json spectrum_json(const ElectronSpectrum& spectrum, Coupling g, const std::string& state_label) {
  return json{{"k_min", spectrum.k_min},
              {"k_max", spectrum.k_max},
              {"probs", spectrum.probs},
              {"leakage", spectrum.leakage},
              {"engine", spectrum.engine},
              {"g", {{"magnitude", g.magnitude}, {"phase", g.phase}}},
              {"state_label", state_label}};
}

ElectronSpectrum spectrum_from_json(const json& j) {
  try {
    ElectronSpectrum s;
    s.k_min = need(j, "k_min").get<int>();
    s.k_max = need(j, "k_max").get<int>();
    s.probs = need(j, "probs").get<std::vector<double>>();
    s.leakage = j.value("leakage", 0.0);
    s.engine = j.value("engine", std::string("file"));
    if (static_cast<int>(s.probs.size()) != s.k_max - s.k_min + 1) {
      throw IoError("spectrum JSON: probs length does not match [k_min, k_max]");
    }
    return s;
  } catch (const json::exception& e) {
    throw IoError(std::string("spectrum JSON: ") + e.what());
  }
}

ElectronSpectrum read_spectrum(const std::string& path) {
  const auto ext = std::filesystem::path(path).extension().string();
  if (ext == ".json") return spectrum_from_json(read_json(path));
  return spectrum_from_table(read_csv(path));
}

Table spectrum_map_table(const std::vector<double>& mean_n, const std::vector<ElectronSpectrum>& spectra) {
  Table t{{"mean_n", "k", "probability"}, {}};
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    for (int k = spectra[i].k_min; k <= spectra[i].k_max; ++k) {
      t.rows.push_back({mean_n[i], double(k), spectra[i].at(k)});
    }
  }
  return t;
}

Table statistics_table(const PhotonStatistics& stats) {
  Table t{{"n", "p"}, {}};
  for (int n = 0; n < stats.size(); ++n) t.rows.push_back({double(n), stats.probs[n]});
  return t;
}

PhotonStatistics statistics_from_table(const Table& table) {
  const int cn = table.column("n"), cp = table.column("p");
  PhotonStatistics s;
  for (const auto& row : table.rows) {
    const int n = static_cast<int>(row[cn]);
    if (n < 0) throw IoError("statistics table has negative n");
    if (n >= s.size()) s.probs.resize(n + 1, 0.0);
    s.probs[n] = row[cp];
  }
  return s;
}

json moments_json(const MomentEstimate& est, Coupling g, const std::string& method) {
  return json{{"moments", est.moments.values},
              {"errors_est", est.error_estimate},
              {"mirror_moments", est.mirror_moments},
              {"method", method},
              {"kernel", {{"g", g.magnitude}, {"M", est.moments.order()}, {"K", est.peaks}}},
              {"status", est.status == MomentStatus::Ok ? "ok" : "noise_dominated"},
              {"warnings", est.warnings}};
}

Table scan_table(const std::vector<double>& thetas, const std::vector<ElectronSpectrum>& spectra) {
  Table t{{"theta", "k", "probability"}, {}};
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    for (int k = spectra[i].k_min; k <= spectra[i].k_max; ++k) {
      t.rows.push_back({thetas[i], double(k), spectra[i].at(k)});
    }
  }
  return t;
}

Table quadrature_table(const std::vector<QuadratureDistribution>& dists) {
  Table t{{"theta", "x", "density"}, {}};
  for (const auto& d : dists) {
    for (std::size_t i = 0; i < d.x_grid.size(); ++i) t.rows.push_back({d.theta, d.x_grid[i], d.density[i]});
  }
  return t;
}

Table wigner_table(const WignerGrid& grid) {
  Table t{{"x", "p", "w"}, {}};
  for (std::size_t i = 0; i < grid.x_axis.size(); ++i) {
    for (std::size_t j = 0; j < grid.p_axis.size(); ++j) {
      t.rows.push_back({grid.x_axis[i], grid.p_axis[j], grid.values(i, j)});
    }
  }
  return t;
}

WignerGrid wigner_from_table(const Table& table) {
  const int cx = table.column("x"), cp = table.column("p"), cw = table.column("w");
  WignerGrid g;
  for (const auto& row : table.rows) {
    if (g.x_axis.empty() || row[cx] != g.x_axis.back()) g.x_axis.push_back(row[cx]);
    if (g.x_axis.size() == 1) g.p_axis.push_back(row[cp]);
  }
  if (g.x_axis.size() * g.p_axis.size() != table.rows.size()) {
    throw IoError("Wigner table is not a full x-major grid");
  }
  g.values.resize(g.x_axis.size(), g.p_axis.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    g.values(r / g.p_axis.size(), r % g.p_axis.size()) = table.rows[r][cw];
  }
  return g;
}

Table coherence_table(const CoherenceResult& result) {
  Table t{{"tau", "g1_mod", "g2_mod"}, {}};
  for (std::size_t i = 0; i < result.taus.size(); ++i) {
    t.rows.push_back({result.taus[i], result.g1_mod[i], result.g2_mod[i]});
  }
  return t;
}

Table precision_table(const PrecisionReport& report) {
  Table t{{"N", "m", "rel_error"}, {}};
  for (const auto& p : report.points) {
    for (int m = 1; m <= report.order; ++m) t.rows.push_back({double(p.electrons), double(m), p.rel_error[m - 1]});
  }
  return t;
}

json precision_json(const PrecisionReport& report) {
  json points = json::array();
  for (const auto& p : report.points) {
    points.push_back({{"N", p.electrons},
                      {"rel_error", p.rel_error},
                      {"rel_error_sem", p.rel_error_sem},
                      {"failures", p.failures}});
  }
  return json{{"order", report.order},
              {"realizations", report.realizations},
              {"seed", report.seed},
              {"g", report.g.magnitude},
              {"true_moments", report.true_moments},
              {"points", points},
              {"slopes", report.slopes},
              {"warnings", report.warnings}};
}

Table jitter_table(const JitterReport& report) {
  Table t{{"jitter", "m", "rel_deviation"}, {}};
  for (std::size_t j = 0; j < report.jitters.size(); ++j) {
    for (std::size_t m = 0; m < report.rel_deviation.size(); ++m) {
      t.rows.push_back({report.jitters[j], double(m + 1), report.rel_deviation[m][j]});
    }
  }
  return t;
}

json jitter_json(const JitterReport& report) {
  return json{{"jitters", report.jitters}, {"rel_deviation", report.rel_deviation}, {"slopes", report.slopes}};
}

json single_shot_json(const SingleShotBudget& b) {
  return json{{"electrons_needed", b.electrons_needed},
              {"target", b.target},
              {"calibration_error", b.calibration_error},
              {"beta", b.beta},
              {"regime_ok", b.regime_ok},
              {"quadrature_growth", b.quadrature_growth},
              {"state_variance", b.state_variance},
              {"destructive", b.destructive},
              {"drift", b.drift},
              {"warnings", b.warnings}};
}

json state_json(const PhotonicState& state) {
  json j{{"cutoff", state.cutoff()}, {"label", state.label()}, {"tail_mass", state.tail_mass()}};
  switch (state.storage()) {
    case PhotonicState::Storage::Diagonal:
      j["storage"] = "diagonal";
      j["probs"] = state.diagonal();
      break;
    case PhotonicState::Storage::Pure: {
      j["storage"] = "pure";
      std::vector<double> re, im;
      for (int n = 0; n < state.cutoff(); ++n) {
        re.push_back(state.vector()(n).real());
        im.push_back(state.vector()(n).imag());
      }
      j["real"] = re;
      j["imag"] = im;
      break;
    }
    case PhotonicState::Storage::Dense: {
      j["storage"] = "dense";
      const CMatrix rho = state.dense();
      json re = json::array(), im = json::array();
      for (int m = 0; m < state.cutoff(); ++m) {
        std::vector<double> r, i;
        for (int n = 0; n < state.cutoff(); ++n) {
          r.push_back(rho(m, n).real());
          i.push_back(rho(m, n).imag());
        }
        re.push_back(r);
        im.push_back(i);
      }
      j["real"] = re;
      j["imag"] = im;
      break;
    }
  }
  return j;
}

PhotonicState state_from_json(const json& j) {
  try {
    const auto storage = need(j, "storage").get<std::string>();
    const auto label = j.value("label", std::string("file"));
    const double tail = j.value("tail_mass", 0.0);
    if (storage == "diagonal") {
      return PhotonicState::from_diagonal(need(j, "probs").get<std::vector<double>>(), label, tail);
    }
    if (storage == "pure") {
      const auto re = need(j, "real").get<std::vector<double>>();
      const auto im = need(j, "imag").get<std::vector<double>>();
      if (re.size() != im.size()) throw IoError("state JSON: real/imag length mismatch");
      CVector psi(re.size());
      for (std::size_t n = 0; n < re.size(); ++n) psi(n) = cplx(re[n], im[n]);
      return PhotonicState::from_vector(psi, label, tail);
    }
    if (storage == "dense") {
      const auto re = need(j, "real").get<std::vector<std::vector<double>>>();
      const auto im = need(j, "imag").get<std::vector<std::vector<double>>>();
      const std::size_t n = re.size();
      CMatrix rho(n, n);
      for (std::size_t a = 0; a < n; ++a) {
        if (re[a].size() != n || im.size() != n || im[a].size() != n) {
          throw IoError("state JSON: density matrix is not square");
        }
        for (std::size_t b = 0; b < n; ++b) rho(a, b) = cplx(re[a][b], im[a][b]);
      }
      return PhotonicState::from_matrix(rho, label, tail);
    }
    throw IoError("state JSON: unknown storage '" + storage + "'");
  } catch (const json::exception& e) {
    throw IoError(std::string("state JSON: ") + e.what());
  }
}

}  // namespace qpinem::io

#include <filesystem>

#include "doctest.h"
#include "qpinem/error.hpp"
#include "qpinem/io.hpp"
#include "qpinem/svg.hpp"

using namespace qpinem;

namespace {

std::string tmp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "qpinem_test_io";
  return (dir / name).string();
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(io::format_number(0.0) == "0");
  CHECK(io::format_number(-0.0) == "0");
  CHECK(io::format_number(1.0) == "1");
  CHECK(io::format_number(0.1) == "0.1");
  CHECK(io::format_number(-2.5e-12) == "-2.5e-12");
  for (double v : {1.0 / 3.0, 6.02214076e23, 9.999999999999999e-5, -123.456}) {
    CHECK(std::stod(io::format_number(v)) == v);
  }
}

TEST_CASE("csv roundtrip") {
  io::Table t{{"a", "b"}, {{1.0, 0.5}, {-3.0, 1.0 / 7.0}}};
  const auto back = io::parse_csv(io::to_csv(t));
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  CHECK(back.column("b") == 1);
  CHECK_THROWS_AS(back.column("c"), IoError);
  CHECK_THROWS_AS(io::parse_csv("a,b\n1\n"), IoError);
  CHECK_THROWS_AS(io::parse_csv("a\nx\n"), IoError);
  CHECK_THROWS_AS(io::read_csv(tmp_path("missing/none.csv")), IoError);
}

TEST_CASE("spectrum files") {
  const auto sp = spectrum_approx(statistics(make_coherent(3.0, 40)), Coupling(0.2));
  const auto csv = tmp_path("spectrum.csv");
  const auto js = tmp_path("spectrum.json");
  io::write_csv(csv, io::spectrum_table(sp));
  io::write_json(js, io::spectrum_json(sp, Coupling(0.2), "coherent"));
  for (const auto& path : {csv, js}) {
    const auto back = io::read_spectrum(path);
    CHECK(back.k_min == sp.k_min);
    CHECK(back.k_max == sp.k_max);
    CHECK(back.probs == sp.probs);
  }
  CHECK_THROWS_AS(io::read_spectrum(tmp_path("spectrum.txt")), IoError);
}

TEST_CASE("statistics and wigner tables") {
  const auto stats = statistics(make_thermal(2.0, 80));
  const auto back = io::statistics_from_table(io::parse_csv(io::to_csv(io::statistics_table(stats))));
  CHECK(back.probs == stats.probs);

  const auto axis = linspace(-2.0, 2.0, 9);
  const auto w = wigner(make_fock(1, 2), axis, axis);
  const auto wb = io::wigner_from_table(io::parse_csv(io::to_csv(io::wigner_table(w))));
  CHECK(wb.x_axis == w.x_axis);
  CHECK(wb.p_axis == w.p_axis);
  CHECK((wb.values - w.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("state json") {
  const auto cat = make_cat(cplx(1.0, 0.5), -1, 30);
  const auto back = io::state_from_json(io::state_json(cat));
  CHECK(back.cutoff() == cat.cutoff());
  CHECK((back.dense() - cat.dense()).cwiseAbs().maxCoeff() < 1e-15);
  auto bad = io::state_json(cat);
  bad["real"] = io::json::array();
  CHECK_THROWS(io::state_from_json(bad));
}

TEST_CASE("svg output is deterministic") {
  const svg::Series s{"line", {0.0, 1.0, 2.0}, {1.0, 0.5, 0.25}};
  const auto a = svg::line_plot("t", "x", "y", {s});
  CHECK(a == svg::line_plot("t", "x", "y", {s}));
  CHECK(a.rfind("<svg", 0) == 0);
  CHECK(a.find("</svg>") != std::string::npos);
  Eigen::MatrixXd v(2, 3);
  v << 1, 2, 3, 4, 5, 6;
  const auto h = svg::heatmap("h", "x", "y", {0.0, 1.0}, {0.0, 1.0, 2.0}, v);
  CHECK(h == svg::heatmap("h", "x", "y", {0.0, 1.0}, {0.0, 1.0, 2.0}, v));
  CHECK_THROWS_AS(svg::heatmap("h", "x", "y", {0.0}, {0.0}, v), ConfigError);
}

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "doctest.h"
#include "qpinem/io.hpp"

using namespace qpinem;
namespace fs = std::filesystem;

namespace {

const fs::path root = fs::temp_directory_path() / ("qpinem_test_cli_" + std::to_string(::getpid()));

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + QPINEM_CLI + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string dir(const std::string& name) { return (root / name).string(); }

}  // namespace

TEST_CASE("every emitted file parses back") {
  REQUIRE(run("spectrum --state coherent --mean-n 50 --sweep-mean-n 10 50 --svg --out-dir " + dir("s")) == 0);
  REQUIRE(run("reconstruct --state thermal --mean-n 20 --support 0 200 2 --out-dir " + dir("r")) == 0);
  REQUIRE(run("tomography --state coherent --mean-n 2 --angles 20 --difference-with mixed --out-dir " + dir("t")) == 0);
  REQUIRE(run("hbt --tau-count 5 --out-dir " + dir("h")) == 0);
  REQUIRE(run("experiment --electrons 100 1000 --realizations 10 --out-dir " + dir("e")) == 0);
  int csv = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    const auto ext = entry.path().extension();
    if (ext == ".csv") {
      const auto t = io::read_csv(entry.path().string());
      CHECK(!t.rows.empty());
      for (const auto& row : t.rows) CHECK(row.size() == t.header.size());
      ++csv;
    } else if (ext == ".json") {
      CHECK_NOTHROW(io::read_json(entry.path().string()));
    }
  }
  CHECK(csv >= 10);
  const auto sp = io::read_spectrum(dir("s") + "/spectrum.csv");
  CHECK(sp.total() == doctest::Approx(1.0).epsilon(1e-8));
  const auto w = io::wigner_from_table(io::read_csv(dir("t") + "/wigner.csv"));
  CHECK(w.x_axis.size() == 81);
  const auto manifest = io::read_json(dir("s") + "/manifest.json");
  CHECK(manifest["subcommand"] == "spectrum");
  CHECK(manifest["config"]["mean-n"] == "50");
}

TEST_CASE("config precedence and exit codes") {
  io::write_json(dir("cfg.json"), io::json{{"g", 0.2}, {"spectrum", {{"state", "fock"}, {"n", 4}}}});
  REQUIRE(run("spectrum --config " + dir("cfg.json") + " --g 0.3 --out-dir " + dir("c")) == 0);
  const auto cfg = io::read_json(dir("c") + "/manifest.json")["config"];
  CHECK(cfg["g"] == "0.3");
  CHECK(cfg["state"] == "fock");
  CHECK(cfg["n"] == "4");

  setenv("QPINEM_OUT_DIR", dir("env").c_str(), 1);
  CHECK(run("hbt --tau-count 3") == 0);
  unsetenv("QPINEM_OUT_DIR");
  CHECK(fs::exists(dir("env") + "/coherence.csv"));

  CHECK(run("spectrum --state fock --n -1 --out-dir " + dir("x")) == 2);
  CHECK(run("spectrum --bogus") == 2);
  CHECK(run("hbt --bandwidth 0.9 --out-dir " + dir("x")) == 2);
  CHECK(run("reconstruct --input " + dir("missing.csv") + " --out-dir " + dir("x")) == 4);
  CHECK(run("spectrum --config " + dir("missing.json")) == 4);
  // Window pinned too narrow for the requested leakage.
  CHECK(run("spectrum --state coherent --mean-n 400 --half-width 3 --out-dir " + dir("x")) == 3);
  fs::remove_all(root);
}

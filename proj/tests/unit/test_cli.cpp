#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <regex>
#include <string>
#include <sys/wait.h>

#include "qgeom/tomography.hpp"

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI binary named by QGEOM_CLI; stderr is folded into `out` when asked.
Run cli(const std::string& args, bool with_stderr = false) {
  const char* exe = std::getenv("QGEOM_CLI");
  REQUIRE_MESSAGE(exe != nullptr, "QGEOM_CLI is not set");
  const std::string cmd = std::string(exe) + " " + args + (with_stderr ? " 2>&1" : " 2>/dev/null");
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string tmp(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("qgeom_cli_" + name)).string();
}

}  // namespace

TEST_CASE("dry run prints the resolved configuration") {
  const Run r = cli("geometry --model veronese --param n=1 --grid 4x4 --dry-run");
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["command"] == "geometry");
  CHECK(j["model"] == "veronese");
  CHECK(j["grid"] == "4x4");
}

TEST_CASE("input errors exit with 2 and a JSON message") {
  for (const std::string args :
       {"geometry --model spin_one --grid 0x0", "invariants --model lll --param bogus=1 --points '0,0;1,1'",
        "invariants --model lll --points '0,0;1'", "band polarization --grid-file /nonexistent/grid",
        "geometry --model nope", "geometry --model spin_one --tol nope=1", "invariants --model spin_half"}) {
    CAPTURE(args);
    const Run r = cli(args, true);
    CHECK(r.code == 2);
    const auto j = nlohmann::json::parse(r.out.substr(r.out.find('{')), nullptr, false);
    REQUIRE(!j.is_discarded());
    CHECK(j.contains("error"));
    CHECK(j.contains("message"));
  }
}

TEST_CASE("invariants to tomography round trip") {
  const std::string inv = tmp("inv.json"), st = tmp("states.json");
  REQUIRE(cli("invariants --model spin_one --random 7 --seed 11 --out " + inv).code == 0);
  const Run r = cli("tomography --in " + inv + " --out " + st);
  CHECK(r.code == 0);
  const auto summary = nlohmann::json::parse(r.out);
  CHECK(summary["max_dP2"].get<double>() < 1e-10);
  CHECK(summary["max_dPhi"].get<double>() < 1e-10);
  CHECK(summary["rank"] == 3);
  std::ifstream is(st);
  CHECK(qgeom::states_from_json(nlohmann::json::parse(is)["states"]).size() == 7);
  std::filesystem::remove(inv);
  std::filesystem::remove(st);
}

TEST_CASE("corrupted invariant files are rejected") {
  const std::string inv = tmp("bad.json");
  REQUIRE(cli("invariants --model spin_one --random 5 --seed 2 --out " + inv).code == 0);
  nlohmann::json j;
  {
    std::ifstream is(inv);
    j = nlohmann::json::parse(is);
  }
  j["three_point"].back()["im"] = j["three_point"].back()["im"].get<double>() + 0.3;
  {
    std::ofstream os(inv);
    os << j.dump();
  }
  const Run r = cli("tomography --in " + inv);
  CHECK(r.code != 0);
  std::filesystem::remove(inv);
}

TEST_CASE("CSV carries round-trip precision") {
  const Run r = cli("geometry --model spin_one --grid 3x3 --which g --format csv");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("k0,k1,g_00", 0) == 0);
  // 0.5 sin^2 theta at the first node is not a short decimal
  CHECK(std::regex_search(r.out, std::regex(R"(\d\.\d{15,}(e-?\d+)?)")));
}

TEST_CASE("runs are deterministic for a fixed seed") {
  const Run a = cli("invariants --model veronese --random 5 --seed 9");
  const Run b = cli("invariants --model veronese --random 5 --seed 9");
  const Run c = cli("invariants --model veronese --random 5 --seed 10");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out != c.out);
}

TEST_CASE("band polarization and conductivity") {
  const Run p = cli("band polarization --model veronese --param n=1 --param m=2 --grid 16x16 --format json");
  CHECK(p.code == 0);
  const auto j = nlohmann::json::parse(p.out);
  CHECK(j["command"] == "band");
  CHECK(!j["rows"].empty());
  const Run s = cli("band conductivity --model qwz --grid 16x16 --q 0,0.1");
  CHECK(s.code == 0);
  CHECK(s.out.find("expansion_tensor") != std::string::npos);
}

TEST_CASE("berry and curve commands") {
  CHECK(cli("berry --model spin_half --radius 0.3 --k 128").code == 0);
  const Run c = cli("curve --curve circle --r 0.5 --samples 256 --format json");
  CHECK(c.code == 0);
  const auto j = nlohmann::json::parse(c.out);
  CHECK(j["rows"].size() > 0);
}

#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome run(const std::string& args) {
  const std::string cmd = std::string(QFRIC_CLI) + " " + args + " 2>&1";
  Outcome o;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) o.out.append(buf.data(), n);
  const int status = pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qfric_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::vector<std::string>> rows_of(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    if (line.back() == ',') cells.emplace_back();
    out.push_back(cells);
  }
  return out;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("check at the fixture point matches the golden file") {
    const fs::path dir = scratch("check");
    const auto o = run("check --n 8 --L 1 --Ti 3 --hi 1.5 --dh 2 --tau 1 --out " + (dir / "check.csv").string());
    INFO(o.out);
    CHECK(o.code == 0);
    int residual_lines = 0;
    std::istringstream in(o.out);
    for (std::string line; std::getline(in, line);) {
      if (line.find("residual=") == std::string::npos) continue;
      ++residual_lines;
      CHECK(line.substr(line.size() - 2) == "ok");
      const double value = std::stod(line.substr(line.find("residual=") + 9));
      CHECK(std::abs(value) < 1e-8);
    }
    CHECK(residual_lines == 6);

    const auto golden = rows_of(slurp(fs::path(QFRIC_GOLDEN_DIR) / "check.csv"));
    const auto actual = rows_of(slurp(dir / "check.csv"));
    REQUIRE(golden.size() == 2);
    REQUIRE(actual.size() == 2);
    CHECK(actual[0] == golden[0]);
    // Residuals and integrator defects are rounding noise.
    const std::set<std::string> noise{"identity_residual", "unitarity_defect"};
    for (std::size_t i = 0; i < golden[0].size(); ++i) {
      const std::string& col = golden[0][i];
      if (noise.count(col)) continue;
      const std::string& g = golden[1][i];
      const std::string& a = actual[1][i];
      if (g == "nan" || g == "inf" || g == "-inf" || g.empty() || col == "halvings" || col == "inf_flag" ||
          col == "reordered_levels") {
        CHECK_MESSAGE(a == g, col);
        continue;
      }
      const double gv = std::stod(g), av = std::stod(a);
      CHECK_MESSAGE(std::abs(av - gv) <= 1e-9 * std::max(1.0, std::abs(gv)), col << " " << a << " vs " << g);
    }
    fs::remove_all(dir);
  }

  TEST_CASE("exit codes") {
    CHECK(run("check --n 20").code == 2);
    CHECK(run("figure fig9").code == 2);
    CHECK(run("frobnicate").code == 2);
    CHECK(run("").code == 2);
    CHECK(run("--help").code == 0);
    CHECK(run("check --n 4 --Ti -1").code == 2);
    CHECK(run("modes --n 8 --tau 1 --Ti 0").code == 2);

    const fs::path dir = scratch("bad");
    std::ofstream(dir / "bad.ini") << "[chain]\nspin = 3\n";
    const auto bad = run("sweep " + (dir / "bad.ini").string() + " --out " + dir.string());
    CHECK(bad.code == 2);
    CHECK(bad.out.find("spin") != std::string::npos);
    fs::remove_all(dir);
  }

  TEST_CASE("sweep writes a CSV and a plot, independent of workers") {
    const fs::path dir = scratch("sweep");
    std::ofstream(dir / "small.ini") << "[chain]\nn = 5\nL = 1\n[evolution]\nadiabatic_tau = 20\n"
                                        "[sweep]\naxis = tau\ngrid_start = 0.1\ngrid_stop = 3\n"
                                        "grid_points = 6\ngrid_scale = log\n";
    const auto one = run("sweep " + (dir / "small.ini").string() + " --workers 1 --out " + (dir / "a").string());
    const auto four = run("sweep " + (dir / "small.ini").string() + " --workers 4 --out " + (dir / "b").string());
    INFO(one.out);
    CHECK(one.code == 0);
    CHECK(four.code == 0);
    const std::string csv = slurp(dir / "a" / "small.csv");
    CHECK(csv == slurp(dir / "b" / "small.csv"));
    CHECK(rows_of(csv).size() == 7);
    const auto plot = nlohmann::json::parse(slurp(dir / "a" / "small.plot.json"));
    CHECK(plot["sources"][0]["file"] == "small.csv");
    CHECK(csv.find(plot["sources"][0]["config_hash"].get<std::string>()) != std::string::npos);
    fs::remove_all(dir);
  }

  TEST_CASE("figure output is deterministic") {
    const fs::path dir = scratch("figure");
    CHECK(run("figure fig4c --out " + (dir / "a").string()).code == 0);
    CHECK(run("figure fig4c --out " + (dir / "b").string()).code == 0);
    const std::string a = slurp(dir / "a" / "fig4c_modes.csv");
    CHECK(!a.empty());
    CHECK(a == slurp(dir / "b" / "fig4c_modes.csv"));
    CHECK(slurp(dir / "a" / "fig4c.plot.json") == slurp(dir / "b" / "fig4c.plot.json"));
    fs::remove_all(dir);
  }

  TEST_CASE("modes reports the appreciable temperature range") {
    const auto o = run("modes --n 5000");
    CHECK(o.code == 0);
    CHECK(o.out.find("appreciable") != std::string::npos);
    CHECK(o.out.find("T_A_j in [") != std::string::npos);
  }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string err;
};

class Workspace {
 public:
  Workspace() : dir_(fs::temp_directory_path() / ("wheelflat_cli_" + std::to_string(::getpid()))) {
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Workspace() { fs::remove_all(dir_); }

  Run run(const std::string& args) const {
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd = "cd '" + dir_.string() + "' && '" WHEELFLAT_CLI "' " + args +
                            " 2> '" + err.string() + "' > /dev/null";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  static std::size_t lines(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) ++n;
    return n;
  }

 private:
  fs::path dir_;
};

std::string last_line(const std::string& text) {
  auto end = text.find_last_not_of('\n');
  auto start = text.rfind('\n', end);
  return text.substr(start == std::string::npos ? 0 : start + 1, end - (start == std::string::npos ? 0 : start + 1) + 1);
}

}  // namespace

TEST_CASE("version flag") {
  Workspace ws;
  const auto r = ws.run("--version");
  CHECK(r.code == 0);
}

TEST_CASE("simulate: single height, deterministic files") {
  Workspace ws;
  auto r = ws.run("simulate --heights 1e-1 --out a");
  REQUIRE(r.code == 0);
  CHECK(r.err.rfind("wheelflat ", 0) == 0);
  CHECK(r.err.find("\nconfig {") != std::string::npos);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(ws.path("a"))) {
    ++files;
    CHECK(Workspace::lines(e.path()) == 10001);
  }
  CHECK(files == 4);
  REQUIRE(ws.run("simulate --heights 1e-1 --out b").code == 0);
  for (const char* pos : {"FL", "FR", "RL", "RR"}) {
    const std::string name = std::string("aba_h1e-1_") + pos + ".csv";
    CHECK(Workspace::slurp(ws.path("a") / name) == Workspace::slurp(ws.path("b") / name));
  }
}

TEST_CASE("pipeline stages hand off through files") {
  Workspace ws;
  REQUIRE(ws.run("simulate --out sig").code == 0);
  CHECK(Workspace::lines(ws.path("sig/aba_h1e-4_RR.csv")) == 10001);

  REQUIRE(ws.run("extract --out sig --level 0").code == 0);
  const auto features = ws.path("sig/features_L0.csv");
  CHECK(Workspace::lines(features) == 501);
  {
    std::ifstream in(features);
    std::string header;
    std::getline(in, header);
    CHECK(header == "s0,s1,s2,s3,FL,FR,RL,RR");
  }
  REQUIRE(ws.run("extract --out sig --level 6").code == 0);
  {
    std::ifstream in(ws.path("sig/features_L6.csv"));
    std::string header;
    std::getline(in, header);
    CHECK(std::count(header.begin(), header.end(), ',') + 1 == 260);
  }

  REQUIRE(ws.run("augment --out sig --level 0").code == 0);
  CHECK(Workspace::lines(ws.path("sig/augmented_L0.csv")) == 60001);

  REQUIRE(ws.run("train --out sig --level 0 --max-iterations 5").code == 0);
  CHECK(fs::exists(ws.path("sig/model_L0.json")));
  CHECK(fs::exists(ws.path("sig/train_report_L0.json")));

  const auto eval = ws.run("evaluate --out sig --level 0");
  REQUIRE(eval.code == 0);
  CHECK(eval.err.find("evaluating 12000 validation columns") != std::string::npos);
  const auto metrics = Workspace::slurp(ws.path("sig/metrics_L0.csv"));
  CHECK(metrics.rfind("detection_height_mm,L0\n", 0) == 0);
  std::istringstream rows(metrics);
  for (std::string line; std::getline(rows, line);) {
    const auto comma = line.find(',');
    const std::string value = line.substr(comma + 1);
    if (value.empty() || value[0] == 'L') continue;
    const double v = std::stod(value);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }

  REQUIRE(ws.run("predict --out sig --level 0").code == 0);
  CHECK(Workspace::lines(ws.path("sig/predictions_L0.csv")) == 60001);

  // Same inputs, same seed: byte-identical model.
  const auto model = Workspace::slurp(ws.path("sig/model_L0.json"));
  REQUIRE(ws.run("train --out sig --level 0 --max-iterations 5").code == 0);
  CHECK(Workspace::slurp(ws.path("sig/model_L0.json")) == model);
}

TEST_CASE("errors are single-line json with a nonzero exit") {
  Workspace ws;
  REQUIRE(ws.run("simulate --heights 1e-2 --out sig").code == 0);
  {
    std::ofstream out(ws.path("sig/aba_h1e-2_FR.csv"), std::ios::app);
    out << "5,1,oops,2,3\n";
  }
  auto r = ws.run("extract --out sig --heights 1e-2 --level 1");
  CHECK(r.code == 1);
  auto j = nlohmann::json::parse(last_line(r.err));
  CHECK(j["error"] == "format");
  CHECK(j["file"].get<std::string>().find("aba_h1e-2_FR.csv") != std::string::npos);
  CHECK(j["line"] == 10002);

  fs::remove(ws.path("sig/aba_h1e-2_FR.csv"));
  r = ws.run("extract --out sig --heights 1e-2 --level 1");
  CHECK(r.code == 1);
  j = nlohmann::json::parse(last_line(r.err));
  CHECK(j["file"].get<std::string>().find("aba_h1e-2_FR.csv") != std::string::npos);

  {
    std::ofstream cfg(ws.path("bad.json"));
    cfg << R"({"training": {"iterations": 3}})";
  }
  r = ws.run("sweep --config bad.json");
  CHECK(r.code == 1);
  j = nlohmann::json::parse(last_line(r.err));
  CHECK(j["message"].get<std::string>().find("training.iterations") != std::string::npos);

  r = ws.run("frobnicate");
  CHECK(r.code == 1);
  CHECK(nlohmann::json::parse(last_line(r.err))["error"] == "usage");
}

TEST_CASE("length-mismatched records are rejected") {
  Workspace ws;
  REQUIRE(ws.run("simulate --heights 1e-3 --out sig").code == 0);
  {
    std::ofstream cfg(ws.path("long.json"));
    cfg << R"({"heights_mm": [0.001], "simulation": {"duration_s": 6}, "paths": {"out": "sig"}})";
  }
  REQUIRE(ws.run("simulate --config long.json --out tmp").code == 0);
  fs::copy_file(ws.path("tmp/aba_h1e-3_RL.csv"), ws.path("sig/aba_h1e-3_RL.csv"),
                fs::copy_options::overwrite_existing);
  const auto r = ws.run("extract --out sig --heights 1e-3");
  CHECK(r.code == 1);
  CHECK(r.err.find("differs from") != std::string::npos);
}

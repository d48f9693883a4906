#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

namespace {

namespace fs = std::filesystem;

const fs::path& workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "fdirw_test_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome fdirw(const std::string& args) {
  const auto out = workdir() / "stdout.txt", err = workdir() / "stderr.txt";
  const std::string cmd = std::string("\"") + FDIRW_CLI + "\" " + args + " >\"" + out.string() +
                          "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  return {status, slurp(out), slurp(err)};
}

std::string config(const char* name) { return std::string(FDIRW_CONFIG_DIR) + "/" + name; }

std::string path(const std::string& name) { return (workdir() / name).string(); }

const std::string kGen = "gen-geometry --size 32 --rp 8 --pores 10 --pore-radius 1.5:2.5 --seed 7";

}  // namespace

TEST_CASE("gen-geometry") {
  auto r = fdirw(kGen + " --out " + path("g.bin"));
  REQUIRE(r.code == 0);
  CHECK(fs::exists(path("g.bin")));
  CHECK(r.out.find("N_S ") != std::string::npos);
  CHECK(r.out.find("porosity ") != std::string::npos);

  r = fdirw(kGen + " --out " + path("g2.bin"));
  REQUIRE(r.code == 0);
  CHECK(slurp(path("g.bin")) == slurp(path("g2.bin")));

  r = fdirw("gen-geometry --size 32 --pores 10 --out " + path("bad.bin"));
  CHECK(r.code != 0);
  CHECK(r.err.find("--rp") != std::string::npos);
  CHECK_FALSE(fs::exists(path("bad.bin")));

  r = fdirw("gen-geometry --size 20 --rp 8 --out " + path("bad.bin"));
  CHECK(r.code != 0);
  CHECK(r.err.find("margin") != std::string::npos);

  r = fdirw("--version");
  CHECK(r.code == 0);
  CHECK(r.out.find("FDIRW-MAT v1") != std::string::npos);
}

TEST_CASE("precondition, run, compare, plot") {
  REQUIRE(fdirw(kGen + " --out " + path("p.bin")).code == 0);
  const std::string base = " --geometry " + path("p.bin") + " --config " + config("desk.cfg");

  auto r = fdirw("precondition" + base + " --workers 1 --out " + path("m1.mat"));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("max row-sum residual") != std::string::npos);
  r = fdirw("precondition" + base + " --workers 8 --out " + path("m8.mat"));
  REQUIRE(r.code == 0);
  CHECK(slurp(path("m1.mat")) == slurp(path("m8.mat")));

  r = fdirw("run --solver fdirw --precision mixed" + base + " --matrix " + path("m1.mat") +
            " --t-end 0.005 --out " + path("run_mixed"));
  REQUIRE(r.code == 0);
  CHECK(fs::exists(path("run_mixed/kinetics.csv")));
  CHECK(fs::exists(path("run_mixed/report.txt")));
  CHECK(fs::exists(path("run_mixed/fields/final.txt")));
  CHECK(slurp(path("run_mixed/report.txt")).find("steps 10\n") != std::string::npos);

  // same run again, more workers: primary outputs identical
  r = fdirw("run --solver fdirw --precision mixed" + base + " --matrix " + path("m1.mat") +
            " --t-end 0.005 --workers 4 --out " + path("run_mixed4"));
  REQUIRE(r.code == 0);
  CHECK(slurp(path("run_mixed/kinetics.csv")) == slurp(path("run_mixed4/kinetics.csv")));
  CHECK(slurp(path("run_mixed/report.txt")) == slurp(path("run_mixed4/report.txt")));

  r = fdirw("run --solver fd" + base + " --t-end 0.002 --out " + path("run_fd"));
  REQUIRE(r.code == 0);
  CHECK(fs::exists(path("run_fd/kinetics.csv")));

  r = fdirw("compare" + base + " --matrix " + path("m1.mat") + " --t-end 0.005 --out " +
            path("cmp"));
  REQUIRE(r.code == 0);
  for (const char* mode : {"full", "fp32", "mixed", "fp16"}) {
    CHECK(fs::exists(path(std::string("cmp/") + mode + "/kinetics.csv")));
  }
  CHECK(fs::exists(path("cmp/plots/rel_error.svg")));
  CHECK(fs::exists(path("cmp/compare.csv")));

  r = fdirw("plot " + path("run_mixed/kinetics.csv") + " " + path("run_fd/kinetics.csv") +
            " --out " + path("k.svg"));
  REQUIRE(r.code == 0);
  CHECK(slurp(path("k.svg")).find("run_fd") != std::string::npos);

  SUBCASE("matrix from another geometry is refused") {
    REQUIRE(fdirw("gen-geometry --size 32 --rp 8 --pores 10 --pore-radius 1.5:2.5 --seed 8 --out " +
                  path("q.bin")).code == 0);
    r = fdirw("run --solver fdirw --geometry " + path("q.bin") + " --config " +
              config("desk.cfg") + " --matrix " + path("m1.mat") + " --t-end 0.001 --out " +
              path("run_q"));
    CHECK(r.code != 0);
    CHECK(r.err.find("geometry") != std::string::npos);
  }
}

TEST_CASE("bench") {
  const auto r = fdirw("bench --sizes 6,7,8 --repeats 1 --config " + config("reference.cfg") +
                       " --out " + path("bench"));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("slope ") != std::string::npos);
  CHECK(fs::exists(path("bench/scaling.csv")));
  CHECK(fs::exists(path("bench/plots/scaling.svg")));

  CHECK(fdirw("bench --sizes 6,7 --config " + config("reference.cfg")).code != 0);
  CHECK(fdirw("bench --sizes 6,x,8 --config " + config("reference.cfg")).code != 0);
}

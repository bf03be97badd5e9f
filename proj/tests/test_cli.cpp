#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "symstab/system_io.hpp"

using namespace symstab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("symstab_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::string write_builtin(const TempDir& dir, const std::string& name) {
  fs::path p = dir.path / (name + ".sys");
  std::ofstream f(p);
  f << builtin_system_text(name);
  return p.string();
}

// The installed binary, when the test driver provides it.
const char* binary_path() { return std::getenv("SYMSTAB_BIN"); }

int run_binary(const std::string& args, const fs::path& workdir) {
  std::string cmd = "cd " + workdir.string() + " && " + binary_path() + " " + args +
                    " >cli_stdout.txt 2>cli_stderr.txt";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("cmd_validate exit codes") {
  TempDir dir;
  std::ostringstream out, err;
  SUBCASE("bundled file passes") {
    CHECK(cli::cmd_validate(write_builtin(dir, "EX16"), out, err) == cli::kExitOk);
    CHECK(err.str().find("\"ok\":true") != std::string::npos);
  }
  SUBCASE("corrupted structure constant fails with the Jacobi check named") {
    std::string text = builtin_system_text("SO3-oscillator");
    text.insert(text.find("  2 3 1 1"), "  1 2 2 0.5\n");
    fs::path p = dir.path / "corrupt.sys";
    std::ofstream(p) << text;
    CHECK(cli::cmd_validate(p.string(), out, err) == cli::kExitInvalid);
    CHECK(err.str().find("jacobi_identity") != std::string::npos);
  }
  SUBCASE("empty file is a parse error") {
    fs::path p = dir.path / "empty.sys";
    std::ofstream(p) << "";
    CHECK(cli::cmd_validate(p.string(), out, err) == cli::kExitParse);
  }
  SUBCASE("missing file is a parse-level error") {
    CHECK(cli::cmd_validate((dir.path / "nope.sys").string(), out, err) == cli::kExitParse);
  }
}

TEST_CASE("cmd_analyze exit codes and report") {
  TempDir dir;
  std::string ex16 = write_builtin(dir, "EX16");
  std::string so3 = write_builtin(dir, "SO3-oscillator");

  SUBCASE("EX16 equilibrium: inconclusive, exit 3") {
    std::ostringstream out, err;
    cli::AnalyzeArgs args;
    args.path = ex16;
    args.point = {0, 0, 0, 0, 0, 0};
    args.json_path = (dir.path / "r.json").string();
    CHECK(cli::cmd_analyze(args, out, err) == cli::kExitInconclusive);
    std::string json = slurp(dir.path / "r.json");
    CHECK(json.find("\"verdict\": \"INCONCLUSIVE_INDEFINITE\"") != std::string::npos);
    CHECK(json.find("\"schema\": 1") != std::string::npos);
  }
  SUBCASE("so(3) oscillator: certified, exit 0") {
    std::ostringstream out, err;
    cli::AnalyzeArgs args;
    args.path = so3;
    args.point = {1, 0, 0, 0, 1, 0};
    CHECK(cli::cmd_analyze(args, out, err) == cli::kExitOk);
    CHECK(out.str().find("STABLE_CERTIFIED") != std::string::npos);
  }
  SUBCASE("non-equilibrium point: exit 1") {
    std::ostringstream out, err;
    cli::AnalyzeArgs args;
    args.path = ex16;
    args.point = {1, 0, 0, 0, 0, 0};
    CHECK(cli::cmd_analyze(args, out, err) == cli::kExitInvalid);
    CHECK(err.str().find("not_a_relative_equilibrium") != std::string::npos);
  }
  SUBCASE("explicit xi is accepted") {
    std::ostringstream out, err;
    cli::AnalyzeArgs args;
    args.path = so3;
    args.point = {1, 0, 0, 0, 1, 0};
    args.xi = std::vector<double>{0, 0, 1};
    CHECK(cli::cmd_analyze(args, out, err) == cli::kExitOk);
  }
  SUBCASE("wrong point dimension: exit 2") {
    std::ostringstream out, err;
    cli::AnalyzeArgs args;
    args.path = ex16;
    args.point = {0, 0};
    CHECK(cli::cmd_analyze(args, out, err) == cli::kExitParse);
  }
}

TEST_CASE("cmd_analyze reports are byte-identical across runs") {
  TempDir dir;
  std::string so3 = write_builtin(dir, "SO3-oscillator");
  cli::AnalyzeArgs args;
  args.path = so3;
  args.point = {1, 0, 0, 0, 1, 0};
  for (const char* name : {"a.json", "b.json"}) {
    std::ostringstream out, err;
    args.json_path = (dir.path / name).string();
    CHECK(cli::cmd_analyze(args, out, err) == cli::kExitOk);
  }
  CHECK(slurp(dir.path / "a.json") == slurp(dir.path / "b.json"));
}

TEST_CASE("cmd_probe: empty radius list exits 0 with an empty result") {
  TempDir dir;
  cli::ProbeArgs args;
  args.analyze.path = write_builtin(dir, "EX16");
  args.analyze.point = {0, 0, 0, 0, 0, 0};
  std::ostringstream out, err;
  CHECK(cli::cmd_probe(args, out, err) == cli::kExitOk);
}

TEST_CASE("cmd_probe writes CSVs and a deterministic report") {
  TempDir dir;
  cli::ProbeArgs args;
  args.analyze.path = write_builtin(dir, "SO3-oscillator");
  args.analyze.point = {1, 0, 0, 0, 1, 0};
  args.analyze.seed = 9;
  args.radii = {1e-3};
  args.horizon = 2.0;
  args.dt = 1e-2;
  args.samples_per_radius = 3;
  args.csv_dir = (dir.path / "csv").string();
  args.analyze.json_path = (dir.path / "p1.json").string();
  std::ostringstream out1, err1;
  CHECK(cli::cmd_probe(args, out1, err1) == cli::kExitOk);
  CHECK(fs::exists(dir.path / "csv" / "sample_0.csv"));
  CHECK(fs::exists(dir.path / "csv" / "sample_2.csv"));
  std::string csv = slurp(dir.path / "csv" / "sample_0.csv");
  CHECK(csv.rfind("t, q1, q2, q3, p1, p2, p3, h, phi_1, phi_2, phi_3, phi_norm_sq\n", 0) == 0);

  args.analyze.json_path = (dir.path / "p2.json").string();
  args.csv_dir.clear();
  std::ostringstream out2, err2;
  CHECK(cli::cmd_probe(args, out2, err2) == cli::kExitOk);
  CHECK(slurp(dir.path / "p1.json") == slurp(dir.path / "p2.json"));
}

TEST_CASE("cmd_examples") {
  TempDir dir;
  SUBCASE("one example validates after writing") {
    std::ostringstream out, err;
    CHECK(cli::cmd_examples("EX16", dir.path.string(), out, err) == cli::kExitOk);
    std::ostringstream out2, err2;
    CHECK(cli::cmd_validate((dir.path / "EX16.sys").string(), out2, err2) == cli::kExitOk);
  }
  SUBCASE("'all' writes three files") {
    std::ostringstream out, err;
    CHECK(cli::cmd_examples("all", dir.path.string(), out, err) == cli::kExitOk);
    int count = 0;
    for (auto const& e : fs::directory_iterator(dir.path))
      if (e.path().extension() == ".sys") ++count;
    CHECK(count == 3);
  }
  SUBCASE("unknown name lists the choices and exits 2") {
    std::ostringstream out, err;
    CHECK(cli::cmd_examples("nope", dir.path.string(), out, err) == cli::kExitParse);
    CHECK(err.str().find("EX16") != std::string::npos);
  }
}

TEST_CASE("installed binary honors the exit-code contract" *
          doctest::skip(binary_path() == nullptr)) {
  TempDir dir;
  REQUIRE(run_binary("examples all --outdir .", dir.path) == 0);

  CHECK(run_binary("validate EX16.sys", dir.path) == 0);
  CHECK(run_binary("analyze EX16.sys --point 0,0,0,0,0,0", dir.path) == 3);
  CHECK(run_binary("analyze SO3-oscillator.sys --point 1,0,0,0,1,0", dir.path) == 0);
  CHECK(run_binary("analyze EX16.sys --point 1,0,0,0,0,0", dir.path) == 1);
  CHECK(run_binary("examples frisbee", dir.path) == 2);
  CHECK(run_binary("validate missing.sys", dir.path) == 2);

  std::ofstream(dir.path / "empty.sys") << "";
  CHECK(run_binary("validate empty.sys", dir.path) == 2);

  CHECK(run_binary("probe SO3-oscillator.sys --point 1,0,0,0,1,0 --radii 1e-3 "
                   "--horizon 1 --dt 1e-2 --samples 2 --csv csvout",
                   dir.path) == 0);
  CHECK(fs::exists(dir.path / "csvout" / "sample_0.csv"));
  CHECK(fs::exists(dir.path / "csvout" / "sample_1.csv"));

  CHECK(run_binary("probe EX16.sys --point 0,0,0,0,0,0 --radii '' --horizon 1", dir.path) == 0);
}

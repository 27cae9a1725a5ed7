#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"

#include "rmprod/csv.hpp"
#include "rmprod/runner.hpp"

using namespace rmprod;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "rmprod_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(RMPROD_BIN) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

const char* kProductConfig =
    "# tiny product batch\n"
    "pipeline = product\n"
    "d1 = 1\n"
    "n = 100\n"
    "replicas = 3\n"
    "seed = 42\n";

const char* kOverflowConfig =
    "pipeline = strip-spectrum\n"
    "d = 1\n"
    "n = 7000\n"  // n d above the dense eigensolver cap
    "lambda = 0.1\n"
    "window = 10\n"
    "replicas = 2\n";

}  // namespace

TEST_CASE("format_double: shortest decimal that round-trips exactly") {
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(2.0) == "2");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-1.5) == "-1.5");
  CounterRng rng(derive_key({0x666d74726f756e64ull}));
  for (int k = 0; k < 200; ++k) {
    const double x = (rng.next_normal() + 1e-3) * std::pow(10.0, (k % 13) - 6);
    const std::string s = format_double(x);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
  }
}

TEST_CASE("csv table: exact byte layout and header discipline") {
  CsvTable t;
  t.header = {"a", "b"};
  t.add_row({"1", "2"});
  t.add_row({"x", "0.5"});
  CHECK(t.serialize() == "a,b\n1,2\nx,0.5\n");
  CHECK_THROWS_AS(t.add_row({"only-one"}), ValidationError);
}

TEST_CASE("fnv1a64: published vectors and hex rendering") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
  CHECK(hex64(0) == "0000000000000000");
  CHECK(hex64(0xcbf29ce484222325ull) == "cbf29ce484222325");
}

TEST_CASE("config: the key = value grammar") {
  SUBCASE("comments, blanks, lists, and booleans parse") {
    ExperimentConfig cfg = parse_config_text(
        "# header comment\n"
        "pipeline = strip-spectrum\n"
        "\n"
        "d = 2   # inline comment\n"
        "E = -1.5\n"
        "n = 100\n"
        "lambda = 0.25\n"
        "method = banded\n"
        "z_star_phases = 0.5\n"
        "recenter = false\n"
        "seed = 9\n");
    CHECK(cfg.pipeline == Pipeline::strip_spectrum);
    CHECK(cfg.d == 2);
    CHECK(cfg.E == -1.5);
    CHECK(cfg.lambda == 0.25);
    CHECK(cfg.method == "banded");
    REQUIRE(cfg.z_star_phases.size() == 1);
    CHECK(cfg.z_star_phases[0] == 0.5);
    CHECK(!cfg.recenter);
    CHECK(cfg.seed == 9);
    CHECK(cfg.echo.at("d") == "2");
    cfg.validate();
  }

  SUBCASE("rejections name the offence") {
    CHECK_THROWS_AS(parse_config_text("d = 2\n"), ValidationError);  // no pipeline
    CHECK_THROWS_AS(parse_config_text("pipeline = product\nd = 2\nd = 3\n"),
                    ValidationError);  // duplicate
    CHECK_THROWS_AS(parse_config_text("pipeline = product\nbogus_key = 1\n"),
                    ValidationError);
    CHECK_THROWS_AS(parse_config_text("pipeline = product\nlambda = -0.5\n"),
                    ValidationError);
    CHECK_THROWS_AS(parse_config_text("pipeline = product\nn : 5\n"),
                    ValidationError);  // not key = value
    CHECK_THROWS_AS(parse_config_text("pipeline = product\nn =\n"),
                    ValidationError);  // empty value
    CHECK_THROWS_AS(parse_config_text("pipeline = nonsense\n"),
                    ValidationError);
    CHECK_THROWS_AS(parse_config_text("pipeline = product\nn = five\n"),
                    ValidationError);
    CHECK_THROWS_AS(parse_config_text("pipeline = sde\nphases = 0.1,,0.2\n"),
                    ValidationError);
  }

  SUBCASE("pipeline names round-trip") {
    for (Pipeline p :
         {Pipeline::product, Pipeline::coefficients, Pipeline::sde,
          Pipeline::strip_spectrum, Pipeline::sde_spectrum,
          Pipeline::goe_compare, Pipeline::flag, Pipeline::band_edge})
      CHECK(pipeline_from_name(pipeline_name(p)) == p);
  }
}

TEST_CASE("config: cross-field validation per pipeline") {
  auto base = [](const std::string& extra) {
    return parse_config_text("pipeline = " + extra);
  };
  CHECK_THROWS_AS(base("product\nd1 = 1\n").validate(), ValidationError);  // n
  CHECK_THROWS_AS(base("product\nn = 10\n").validate(), ValidationError);  // dims
  CHECK_THROWS_AS(base("product\nd1 = 1\nn = 10\ngamma0 = 1.5\n").validate(),
                  ValidationError);
  CHECK_THROWS_AS(base("strip-spectrum\nn = 10\nwindow = 5\n").validate(),
                  ValidationError);  // d
  CHECK_THROWS_AS(
      base("strip-spectrum\nd = 1\nn = 10\nmethod = magic\n").validate(),
      ValidationError);
  CHECK_THROWS_AS(base("sde-spectrum\nd = 1\ndt = 0\n").validate(),
                  ValidationError);
  CHECK_THROWS_AS(base("flag\nmagnitudes = 2\nn = 5\n").validate(),
                  ValidationError);
  CHECK_THROWS_AS(base("band-edge\nd = 1\nv_var = -1\n").validate(),
                  ValidationError);
  CHECK_THROWS_AS(base("product\nd1 = 1\nn = 5\nworkers = 0\n").validate(),
                  ValidationError);
  CHECK_THROWS_AS(
      base("product\nd1 = 1\nn = 5\npotential = cauchy\n").validate(),
      ValidationError);
  CHECK_THROWS_AS(
      base("sde-spectrum\nd = 1\neps_points = 5\neps_min = 2\neps_max = 1\n")
          .validate(),
      ValidationError);

  SUBCASE("effective lambda") {
    ExperimentConfig cfg = base("product\nd1 = 1\nn = 400\nsigma = 0.5\n");
    CHECK(cfg.effective_lambda() == 0.5 / 20.0);
    cfg.lambda = 0.125;
    CHECK(cfg.effective_lambda() == 0.125);
    ExperimentConfig no_n = base("coefficients\nd1 = 1\nsigma = 1\n");
    CHECK_THROWS_AS(no_n.effective_lambda(), ValidationError);
  }

  SUBCASE("boundary diagonal") {
    ExperimentConfig cfg = base("sde-spectrum\nd = 2\n");
    CVector ones = cfg.z_star(3);
    CHECK(ones.size() == 3);
    CHECK(ones(2) == cplx(1.0, 0.0));
    cfg.z_star_phases = {3.14159265358979323846};
    CHECK(std::abs(cfg.z_star(1)(0) - cplx(-1.0, 0.0)) < 1e-12);
    CHECK_THROWS_AS(cfg.z_star(2), ValidationError);
  }
}

TEST_CASE("describe: resolved-model reports") {
  SUBCASE("channel table with hyperbolic drift scalar") {
    ExperimentConfig cfg = parse_config_text(
        "pipeline = strip-spectrum\nd = 2\nE = -1.5\nn = 100\n");
    const std::string s = describe_report(cfg);
    CHECK(s.find("d_h = 1") != std::string::npos);
    CHECK(s.find("d_e = 1") != std::string::npos);
    CHECK(s.find("q = -0.2222222222") != std::string::npos);
    CHECK(s.find("hyperbolic") != std::string::npos);
    CHECK(s.find("elliptic") != std::string::npos);
  }

  SUBCASE("band-center channel at the threshold is reported, not computed") {
    ExperimentConfig cfg =
        parse_config_text("pipeline = strip-spectrum\nd = 1\nE = 2\nn = 10\n");
    const std::string s = describe_report(cfg);
    CHECK(s.find("parabolic") != std::string::npos);
  }

  SUBCASE("block spectrum report") {
    ExperimentConfig cfg = parse_config_text(
        "pipeline = product\nd0 = 1\nd1 = 1\nd2 = 1\nn = 10\n"
        "gamma0 = 0.5\nphases = 0.7\n");
    const std::string s = describe_report(cfg);
    CHECK(s.find("radius_gamma0 = 0.5") != std::string::npos);
    CHECK(s.find("gamma = 0.6931471805") != std::string::npos);
    CHECK(s.find("u_phase_0 = 0.7") != std::string::npos);
  }

  SUBCASE("flag report carries contraction rates") {
    ExperimentConfig cfg = parse_config_text(
        "pipeline = flag\nmagnitudes = 0.5,1,2\nn = 100\n");
    const std::string s = describe_report(cfg);
    CHECK(s.find("contraction_rate_0 = 0.5") != std::string::npos);
    CHECK(s.find("flag_sizes = 1,2") != std::string::npos);
  }

  SUBCASE("invalid configs are rejected before reporting") {
    ExperimentConfig cfg = parse_config_text("pipeline = strip-spectrum\n");
    CHECK_THROWS_AS(describe_report(cfg), ValidationError);
  }
}

TEST_CASE("run: product artifacts are complete, digested, and reproducible") {
  ExperimentConfig cfg = parse_config_text(kProductConfig);
  const fs::path dir_a = fresh_dir("prod_a");
  cfg.output_dir = dir_a.string();
  const RunManifest man = run_experiment(cfg);

  CHECK(man.pipeline == "product");
  CHECK(!man.partial_failure);
  REQUIRE(man.replicas.size() == 3);
  for (const auto& st : man.replicas) {
    CHECK(st.ok);
    CHECK(st.seed == replica_seed(42, st.index));
  }

  // every listed artifact exists and hashes to its manifest digest
  REQUIRE(man.outputs.count("samples.csv") == 1);
  REQUIRE(man.outputs.count("summary.txt") == 1);
  for (const auto& [name, digest] : man.outputs) {
    const std::string bytes = slurp(dir_a / name);
    CHECK(hex64(fnv1a64(bytes)) == digest);
  }

  const std::string csv = slurp(dir_a / "samples.csv");
  CHECK(csv.rfind("replica,seed,log_abs_det_x,z_norm,cond\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + 3 rows

  const auto manifest = nlohmann::json::parse(slurp(dir_a / "manifest.json"));
  CHECK(manifest["pipeline"] == "product");
  CHECK(manifest["partial_failure"] == false);
  CHECK(manifest["config"]["n"] == "100");
  REQUIRE(manifest["replicas"].size() == 3);
  CHECK(manifest["replicas"][1]["ok"] == true);

  SUBCASE("worker count never changes the bytes") {
    ExperimentConfig wide = parse_config_text(kProductConfig);
    const fs::path dir_b = fresh_dir("prod_b");
    wide.output_dir = dir_b.string();
    wide.workers = 3;
    const RunManifest man_b = run_experiment(wide);
    CHECK(man_b.outputs == man.outputs);
    CHECK(slurp(dir_b / "samples.csv") == csv);
  }

  SUBCASE("the master seed changes them") {
    ExperimentConfig other = parse_config_text(kProductConfig);
    const fs::path dir_c = fresh_dir("prod_c");
    other.output_dir = dir_c.string();
    other.seed = 43;
    const RunManifest man_c = run_experiment(other);
    CHECK(man_c.outputs.at("samples.csv") != man.outputs.at("samples.csv"));
  }
}

TEST_CASE("run: replica failures are recorded without aborting the batch") {
  ExperimentConfig cfg = parse_config_text(kOverflowConfig);
  const fs::path dir = fresh_dir("partial");
  cfg.output_dir = dir.string();
  const RunManifest man = run_experiment(cfg);
  CHECK(man.partial_failure);
  REQUIRE(man.replicas.size() == 2);
  for (const auto& st : man.replicas) {
    CHECK(!st.ok);
    CHECK(st.error.find("dense cap") != std::string::npos);
  }
  // artifacts still exist: an empty table plus the manifest trail
  CHECK(fs::exists(dir / "points.csv"));
  CHECK(fs::exists(dir / "manifest.json"));
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["partial_failure"] == true);
  CHECK(manifest["replicas"][0]["ok"] == false);
}

TEST_CASE("cli: exit codes and option overrides") {
  const fs::path dir = fresh_dir("cli");
  const fs::path good = dir / "product.cfg";
  const fs::path bad = dir / "bad.cfg";
  const fs::path overflow = dir / "overflow.cfg";
  write_file(good.string(), kProductConfig);
  write_file(bad.string(), "pipeline = product\nwat = 1\n");
  write_file(overflow.string(), kOverflowConfig);

  CHECK(run_cli("--version") == 0);
  CHECK(run_cli("") == 2);             // a subcommand is required
  CHECK(run_cli("describe") == 2);     // missing config path
  CHECK(run_cli("summon " + good.string()) == 2);

  CHECK(run_cli("describe " + good.string()) == 0);
  CHECK(run_cli("describe " + bad.string()) == 2);
  CHECK(run_cli("describe " + (dir / "missing.cfg").string()) == 2);

  const fs::path out = dir / "out";
  CHECK(run_cli("run " + good.string() + " --seed 7 --workers 2 --out " +
                out.string()) == 0);
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["config"]["seed"] == "7");
  CHECK(manifest["config"]["workers"] == "2");
  CHECK(manifest["replicas"][0]["seed"] ==
        nlohmann::json(replica_seed(7, 0)));

  CHECK(run_cli("run " + bad.string()) == 2);
  CHECK(run_cli("run " + overflow.string() + " --out " +
                (dir / "pout").string()) == 3);
}

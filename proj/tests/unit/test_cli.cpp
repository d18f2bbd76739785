#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <unistd.h>

#include <json.hpp>

#include "app.hpp"
#include "ilcshape/errors.hpp"
#include "ilcshape/lti.hpp"
#include "ilcshape/persistence.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("ilcshape_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

json fast_config() {
  return json::parse(R"({
    "sample_rate_hz": 10000,
    "plant": {"num": [0.2, -0.12], "den": [1, -1.1, 0.24]},
    "desired_loop_gain": {"num": [0.3, -0.27], "den": [1, -1.699, 0.6993]},
    "horizon": 400,
    "loopshape": {"frequency_weighting": true, "probe_length": 64},
    "inverse_learning": {"filter_half_length": 200, "total_iterations": 40},
    "reduction": {"energy_fraction": 0.9999},
    "output_dir": "out"
  })");
}

fs::path write_config(const std::string& name, const json& j) {
  const fs::path p = scratch_dir() / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ILCSHAPE_CLI_EXE) + " " + args + " > " +
                          (scratch_dir() / "last.log").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = slurp(e.path());
  return files;
}

}  // namespace

TEST_CASE("configuration errors exit with code 4") {
  CHECK(run_cli("probe --config " + (scratch_dir() / "missing.json").string()) == 4);

  json unknown = fast_config();
  unknown["horizon_typo"] = 3;
  CHECK(run_cli("probe --config " + write_config("unknown.json", unknown).string()) == 4);

  json two = fast_config();
  two["plant"]["command"] = {"cat"};
  CHECK(run_cli("probe --config " + write_config("two.json", two).string()) == 4);

  json odd = fast_config();
  odd["horizon"] = 401;
  CHECK(run_cli("shape --config " + write_config("odd.json", odd).string()) == 4);

  std::ofstream(scratch_dir() / "broken.json") << "{ not json";
  CHECK(run_cli("probe --config " + (scratch_dir() / "broken.json").string()) == 4);

  const std::string ok = write_config("seed.json", fast_config()).string();
  CHECK(run_cli("probe --seedless=1 --config " + ok) == 4);
  CHECK(run_cli("probe --seedless --config " + ok) == 0);
  CHECK(run_cli("--config " + ok) == 4);
}

TEST_CASE("probe reports the plant relative order") {
  json d3 = fast_config();
  d3["plant"] = {{"num", {1.0}}, {"den", {1.0, 0.0, 0.0, 0.0}}};
  d3["output_dir"] = "d3";
  REQUIRE(run_cli("probe --config " + write_config("d3.json", d3).string()) == 0);
  CHECK(json::parse(slurp(scratch_dir() / "d3" / "probe.json")).at("relative_order") == 3);

  json servo = fast_config();
  servo["plant"] = {{"num", {-0.1, 0.1985, -0.098505}}, {"den", {1, -2.398, 1.7972, -0.3992}}};
  servo["output_dir"] = "servo";
  REQUIRE(run_cli("probe --config " + write_config("servo.json", servo).string()) == 0);
  CHECK(json::parse(slurp(scratch_dir() / "servo" / "probe.json")).at("relative_order") == 1);

  json zero = fast_config();
  zero["plant"] = {{"num", {0.0}}, {"den", {1.0, 0.5}}};
  CHECK(run_cli("probe --config " + write_config("zero.json", zero).string()) == 3);
}

TEST_CASE("learn-inverse on a delay plant converges within three trials") {
  json d1 = fast_config();
  d1["plant"] = {{"num", {1.0}}, {"den", {1.0, 0.0}}};
  d1["inverse_learning"] = {{"filter_half_length", 16}, {"total_iterations", 3}, {"cross_update_period", 1},
                            {"initial_gain_alpha", 1.0}};
  d1["output_dir"] = "d1";
  REQUIRE(run_cli("learn-inverse --config " + write_config("d1.json", d1).string()) == 0);
  const json inv = json::parse(slurp(scratch_dir() / "d1" / "inverse.json"));
  CHECK(inv.at("iterations").get<int>() <= 3);
  CHECK(inv.at("final_rms_error").get<double>() < 1e-12);
}

TEST_CASE("full run is deterministic and its manifest matches the files") {
  const fs::path cfg = write_config("fast.json", fast_config());
  REQUIRE(run_cli("full --config " + cfg.string()) == 0);
  const auto first = snapshot(scratch_dir() / "out");
  REQUIRE(run_cli("full --config " + cfg.string()) == 0);
  const auto second = snapshot(scratch_dir() / "out");
  CHECK(first == second);

  const json manifest = json::parse(first.at("manifest_full.json"));
  CHECK(manifest.at("config_sha256") == ilcshape::app::sha256_hex(slurp(cfg)));
  REQUIRE(manifest.at("outputs").size() >= 10);
  for (const auto& o : manifest.at("outputs")) {
    const std::string& data = first.at(o.at("file").get<std::string>());
    CHECK(o.at("sha256") == ilcshape::app::sha256_hex(data));
    CHECK(o.at("bytes") == data.size());
  }
  for (const char* cmd : {"probe", "learn-inverse", "shape", "reduce", "validate"}) {
    CHECK(run_cli(std::string(cmd) + " --config " + cfg.string()) == 0);
    CHECK(fs::exists(scratch_dir() / "out" / (std::string("manifest_") + cmd + ".json")));
  }
}

TEST_CASE("output directory and horizon overrides") {
  const fs::path cfg = write_config("fast_override.json", fast_config());
  const fs::path out = scratch_dir() / "override";
  REQUIRE(run_cli("shape --config " + cfg.string() + " --out " + out.string() + " --horizon 200") == 0);
  const json shape = json::parse(slurp(out / "shape.json"));
  CHECK(shape.at("controller_taps").get<int>() <= 200 + 8);
  CHECK(run_cli("shape --config " + cfg.string() + " --horizon 0") == 4);
}

TEST_CASE("an impossible specification exits with code 2") {
  json tight = fast_config();
  tight["validation"] = {{"spec", {{"rise_time_max_s", 1e-9}}}};
  tight["output_dir"] = "tight";
  CHECK(run_cli("full --config " + write_config("tight.json", tight).string()) == 2);
  const json report = json::parse(slurp(scratch_dir() / "tight" / "report.json"));
  CHECK(report.at("iir").at("spec").at("pass") == false);
}

TEST_CASE("known first-order plant reproduces the division oracle") {
  json first = fast_config();
  first["plant"] = {{"num", {1.0}}, {"den", {1.0, -0.5}}};
  first["desired_loop_gain"] = {{"num", {0.1}}, {"den", {1.0, -0.7, 0.1}}};
  first["horizon"] = 200;
  first["inverse_learning"] = {{"filter_half_length", 64}, {"total_iterations", 60}};
  first["output_dir"] = "first";
  const int code = run_cli("shape --config " + write_config("first.json", first).string());
  REQUIRE(code == 0);
  std::ifstream is(scratch_dir() / "first" / "controller_fir.csv");
  const ilcshape::TwoSidedFir c = ilcshape::read_fir_csv(is);
  // (0.1 / ((z - 0.5)(z - 0.2))) / (1 / (z - 0.5)) = 0.1 / (z - 0.2)
  const auto oracle = ilcshape::impulse_response(ilcshape::RationalTf({0.1}, {1.0, -0.2}), 100);
  double err = 0.0;
  for (ilcshape::Index k = 0; k < 100; ++k) err = std::max(err, std::abs(c.at_lag(k) - oracle[static_cast<std::size_t>(k)]));
  CHECK(err < 1e-8);
}

TEST_CASE("identity plant with a one-step target") {
  json id = fast_config();
  id["plant"] = {{"num", {1.0}}, {"den", {1.0}}};
  id["desired_loop_gain"] = {{"num", {1.0}}, {"den", {1.0, 0.0}}};
  id["horizon"] = 64;
  id["inverse_learning"] = {{"filter_half_length", 32}, {"total_iterations", 10}};
  id["output_dir"] = "identity";
  REQUIRE(run_cli("shape --config " + write_config("identity.json", id).string()) == 0);
  std::ifstream is(scratch_dir() / "identity" / "controller_fir.csv");
  const ilcshape::TwoSidedFir c = ilcshape::read_fir_csv(is);
  CHECK(c.at_lag(1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(c.at_lag(0)) < 1e-12);
}

TEST_CASE("external plant process drives the pipeline") {
  json ext = fast_config();
  ext["plant"] = {{"command", {ILCSHAPE_PLANT_EXE, "--tf", R"({"num":[0.2,-0.12],"den":[1,-1.1,0.24],"fs_hz":10000})"}}};
  ext["output_dir"] = "external";
  REQUIRE(run_cli("shape --config " + write_config("external.json", ext).string()) == 0);
  json sim = fast_config();
  sim["output_dir"] = "simulated";
  REQUIRE(run_cli("shape --config " + write_config("simulated.json", sim).string()) == 0);
  CHECK(slurp(scratch_dir() / "external" / "controller_fir.csv") ==
        slurp(scratch_dir() / "simulated" / "controller_fir.csv"));

  json dead = fast_config();
  dead["plant"] = {{"command", {"/bin/false"}}};
  CHECK(run_cli("probe --config " + write_config("dead.json", dead).string()) == 3);
}

TEST_CASE("config parsing in process") {
  const auto cfg = ilcshape::app::parse_config(fast_config(), scratch_dir());
  CHECK(cfg.loopshape.horizon == 400);
  CHECK(cfg.plant.model.has_value());
  CHECK(cfg.output_dir == scratch_dir() / "out");
  json bad = fast_config();
  bad["sample_rate_hz"] = -1;
  CHECK_THROWS_AS(ilcshape::app::parse_config(bad, scratch_dir()), ilcshape::ConfigError);
  CHECK(ilcshape::app::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

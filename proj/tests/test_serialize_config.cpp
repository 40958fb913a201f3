#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "lgspdc/config.hpp"
#include "lgspdc/errors.hpp"
#include "lgspdc/serialize.hpp"

using namespace lgspdc;

namespace {

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::filesystem::path scratch_dir() {
  const auto p = std::filesystem::temp_directory_path() / "lgspdc_unit";
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST_SUITE("serialize") {
  TEST_CASE("numbers round-trip through their text form") {
    for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-17, 24.3, 1e300}) CHECK(std::stod(format_number(v)) == v);
    CHECK(format_number(0.0) == "0");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(format_number(-INFINITY) == "-inf");
    CHECK(format_number(42) == "42");
  }

  TEST_CASE("CSV quoting and line endings") {
    CsvTable t({"a", "b"});
    t.add_row({"1,5", "say \"hi\""});
    t.add_row({"x", "y"});
    CHECK(t.str() == "a,b\n\"1,5\",\"say \"\"hi\"\"\"\nx,y\n");
    CHECK_THROWS_AS(t.add_row({"only one"}), ContractViolation);
  }

  TEST_CASE("git blob hashes") {
    CHECK(git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
    CHECK(git_blob_sha1("hello world\n") == "3b18e512dba79e4c8300dd08aeb37f8e728b8dad");
  }

  TEST_CASE("dispersion model JSON") {
    const DispersionModel& d = DispersionModel::ktp_default();
    const Json j = model_to_json(d);
    CHECK(model_to_json(model_from_json(j, "model")) == j);
    const DispersionModel shipped = load_model(std::string(LGSPDC_DATA_DIR) + "/ktp_default.json");
    CHECK(model_to_json(shipped) == j);
    CHECK(refractive_index(shipped, 810e-9, 30.0) == refractive_index(d, 810e-9, 30.0));
    Json bad = j;
    bad["extra"] = 1;
    CHECK(message_of([&] { model_from_json(bad, "model"); }) == "unknown key 'model.extra'");
    bad = j;
    bad.erase("thermo_optic");
    CHECK(message_of([&] { model_from_json(bad, "model"); }) == "missing key 'model.thermo_optic'");
  }
}

TEST_SUITE("config") {
  TEST_CASE("round trip and defaults") {
    RunConfig c;
    c.crystal.temperature_C = 27.5;
    c.waist_surface.fixed_w_p = 20e-6;
    c.normalization = Normalization::Raw;
    c.optimizer.f_si = {0.1, 15.0};
    const RunConfig back = config_from_json(config_to_json(c));
    CHECK(back == c);
    CHECK(back.waist_surface.fixed_w_p.has_value());
    CHECK(*back.waist_surface.fixed_w_p == doctest::Approx(20e-6).epsilon(1e-15));
    CHECK(config_from_json(Json::object()) == RunConfig{});
    CHECK_NOTHROW(RunConfig{}.validate(DispersionModel::ktp_default()));
  }

  TEST_CASE("partial sections override field by field") {
    const RunConfig c = config_from_json(Json::parse(R"({"crystal": {"temperature_C": 30}})"));
    CHECK(c.crystal.temperature_C == 30.0);
    CHECK(c.crystal.length_m == RunConfig{}.crystal.length_m);
  }

  TEST_CASE("error messages name the problem") {
    CHECK(message_of([] { config_from_json(Json::parse(R"({"optimizer": {"f_p_low": 1}})")); }) ==
          "unknown key 'optimizer.f_p_low'");
    CHECK(message_of([] { config_from_json(Json::parse(R"({"spectrum": {"points": "many"}})")); }) ==
          "key 'spectrum.points' has the wrong type");
    const auto dir = scratch_dir();
    write_file(dir / "broken.json", "{\"crystal\": ");
    CHECK(message_of([&] { load_config((dir / "broken.json").string()); }).rfind("malformed JSON in config", 0) == 0);
    const std::string missing = (dir / "absent.json").string();
    CHECK(message_of([&] { load_config(missing); }) == "cannot open file '" + missing + "'");
    RunConfig hot;
    hot.crystal.temperature_C = 500;
    const std::string m = message_of([&] { hot.validate(DispersionModel::ktp_default()); });
    CHECK(m.find("crystal.temperature_C") != std::string::npos);
    CHECK(m.find("[10, 80]") != std::string::npos);
    RunConfig q;
    q.quadrature.base_nodes = 2;
    CHECK(message_of([&] { q.validate(DispersionModel::ktp_default()); }).rfind("config section 'quadrature'", 0) == 0);
  }

  TEST_CASE("config hash depends on config and request only") {
    RunConfig a, b;
    const Json req = {{"command", "optimize"}, {"l", 1}};
    CHECK(config_hash(a, req) == config_hash(b, req));
    b.crystal.temperature_C = 25.0;
    CHECK(config_hash(a, req) != config_hash(b, req));
    CHECK(config_hash(a, req) != config_hash(a, {{"command", "optimize"}, {"l", 2}}));
    CHECK(config_hash(a, req).size() == 40);
  }
}

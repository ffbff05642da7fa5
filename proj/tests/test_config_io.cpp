#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "finopt/config.hpp"
#include "finopt/io.hpp"
#include "generators.hpp"
#include "json.hpp"

using namespace finopt;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in, "test.ini");
}

std::string error_of(const std::string& text) {
    try {
        validate(parse(text));
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

fs::path scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("finopt_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("config converts millimetres and reads the physics") {
    const auto cfg = parse(R"(
[geometry]
a0_mm = 1
length_mm = 100
[physics]
k = 10
h_kind = affine
h_start = 20
h_end = 5
T_d = 30
T_inf = 20
[constraint]
S0_mm2 = 300
M_mm = 6.25, 12.5
[numerics]
n_cells = 64
)");
    validate(cfg);
    CHECK(cfg.a0 == doctest::Approx(1e-3));
    CHECK(cfg.length == doctest::Approx(0.1));
    CHECK(cfg.S0 == doctest::Approx(3e-4));
    REQUIRE(cfg.M_list.size() == 2);
    CHECK(cfg.M_list[1] == doctest::Approx(12.5e-3));
    CHECK(cfg.params.h(0.0) == 20.0);
    CHECK(cfg.params.h(0.1) == doctest::Approx(5.0));
    CHECK(cfg.params.h_r == doctest::Approx(5.0));  // default h_r = h(l)
    CHECK(cfg.params.delta_T() == 10.0);
    CHECK(cfg.n_cells == 64);
}

TEST_CASE("caption budget readings") {
    CHECK(parse("[constraint]\ncaption_factor = 6\n").S0 == doctest::Approx(6e-4));
    CHECK(parse("[constraint]\ncaption_factor = 6\ncaption_reading = area\n").S0 == doctest::Approx(3e-4));
}

TEST_CASE("config errors name the line or field") {
    CHECK(error_of("[geometry]\na0_mm = abc\n").find("[geometry] a0_mm") != std::string::npos);
    CHECK(error_of("[bogus]\nx = 1\n").find("unknown section [bogus]") != std::string::npos);
    CHECK(error_of("[physics]\nwat = 1\n").find("[physics] wat: unknown key") != std::string::npos);
    CHECK(error_of("[physics]\nh_kind = wavy\n").find("h_kind") != std::string::npos);
    CHECK(error_of("[physics]\nh = -1\n").find("[physics] h") != std::string::npos);
    CHECK(error_of("[constraint]\nS0_mm2 = 300\ncaption_factor = 6\n").find("S0_mm2") != std::string::npos);
    CHECK(error_of("[constraint]\nM_mm = 12.5, 6.25\n").find("M_mm") != std::string::npos);
    CHECK(error_of("[numerics]\nn_cells = 1\n").find("n_cells") != std::string::npos);
    CHECK(error_of("[numerics]\nconvergence_cells = 102\n").find("convergence_cells") != std::string::npos);
    CHECK(error_of("[output]\nformat = xml\n").find("format") != std::string::npos);
    CHECK(error_of("[geometry\n").find("test.ini:1") != std::string::npos);
    CHECK(error_of("[profile]\nkind = asm\n").find("S_mm2") != std::string::npos);
}

TEST_CASE("format_double round-trips bit-exactly") {
    gen::Rng r(12);
    for (int k = 0; k < 1000; ++k) {
        const double v = r.uniform(-1.0, 1.0) * std::pow(10.0, r.integer(-300, 300));
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(std::stod(format_double(0.1)) == 0.1);
}

TEST_CASE("CSV tables round-trip") {
    const fs::path dir = scratch_dir("csv");
    Table t;
    t.add("x_m", std::vector<double>{0.0, 0.05, 0.1});
    t.add("a_m", std::vector<double>{1e-3, 1.0000000000000002e-3, 2e-3 / 3.0});
    const fs::path path = write_table(dir / "profile", t, OutputFormat::Csv);
    CHECK(path.extension() == ".csv");
    const Table back = read_csv(path);
    CHECK(back.headers == t.headers);
    CHECK(back.columns == t.columns);
    CHECK_THROWS_AS(t.add("short", std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("JSON tables use null for non-finite values and carry the schema version") {
    const fs::path dir = scratch_dir("json");
    Table t;
    t.add("b_m", std::vector<double>{1e-3, std::numeric_limits<double>::quiet_NaN()});
    const fs::path path = write_table(dir / "b", t, OutputFormat::Json);
    std::ifstream in(path);
    const auto doc = nlohmann::json::parse(in);
    CHECK(doc["schema_version"] == schema_version);
    CHECK(doc["columns"]["b_m"][0] == 1e-3);
    CHECK(doc["columns"]["b_m"][1].is_null());
}

TEST_CASE("profile CSV reader checks the grid") {
    const fs::path dir = scratch_dir("profile");
    Table ok;
    ok.add("x_m", std::vector<double>{0.0, 0.05, 0.1});
    ok.add("a_m", std::vector<double>{2e-3, 1.5e-3, 1e-3});
    const auto a = read_profile_csv(write_table(dir / "ok", ok, OutputFormat::Csv), 1e-3);
    CHECK(a.grid.n_cells() == 2);
    CHECK(a.grid.length() == 0.1);
    CHECK(a.values[1] == 1.5e-3);

    Table uneven;
    uneven.add("x_m", std::vector<double>{0.0, 0.02, 0.1});
    uneven.add("a_m", std::vector<double>{2e-3, 1.5e-3, 1e-3});
    CHECK_THROWS_AS(read_profile_csv(write_table(dir / "uneven", uneven, OutputFormat::Csv), 1e-3), std::invalid_argument);

    std::ofstream(dir / "bad.csv") << "x_m,a_m\n0,1e-3\n0.1,oops\n";
    try {
        read_profile_csv(dir / "bad.csv", 1e-3);
        FAIL("expected a parse error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }
}

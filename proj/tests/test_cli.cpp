#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "commands.hpp"
#include "eqfree/errors.hpp"

using nlohmann::json;
namespace fs = std::filesystem;
using namespace eqfree::cli;

namespace {

/// Fresh empty directory under the system temporary directory.
std::string scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("eqfree_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const std::string& path) { return json::parse(slurp(path)); }

int run(const std::vector<std::string>& args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return code;
}

std::vector<std::string> csv_row(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

}  // namespace

TEST_CASE("configuration merging") {
    const json base{{"a", 1.0}, {"s", "x"}, {"n", nullptr}, {"free", json::object()}};
    CHECK(merge_config(base, {{"a", 2}}).at("a") == 2);
    CHECK(merge_config(base, {{"n", {1, 2}}}).at("n").size() == 2);
    CHECK(merge_config(base, {{"free", {{"k", 1}}}}).at("free").at("k") == 1);
    CHECK(merge_config(base, {{"config", {{"s", "y"}}}, {"command", "ignored"}}).at("s") == "y");
    CHECK(merge_config(base, nullptr) == base);
    try {
        merge_config(base, {{"zzz", 1}});
        FAIL("expected ConfigError");
    } catch (const eqfree::ConfigError& e) {
        CHECK(e.field() == "zzz");
    }
    CHECK_THROWS_AS(merge_config(base, {{"a", "text"}}), eqfree::ConfigError);
    CHECK_THROWS_AS(merge_config(base, json::array()), eqfree::ConfigError);
}

TEST_CASE("simulate writes trajectory, plot script and manifest") {
    const std::string dir = scratch("simulate");
    std::string out;
    REQUIRE(run({"--out", dir, "simulate", "burgers1d", "--seed", "5", "--t-end", "0.1", "--samples", "11"}, &out) == 0);
    CHECK(fs::exists(dir + "/burgers1d.csv"));
    CHECK(fs::exists(dir + "/burgers1d_plot.py"));
    CHECK(fs::exists(dir + "/burgers1d_manifest.json"));
    CHECK(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}) == 3);
    const json m = read_json(dir + "/burgers1d_manifest.json");
    CHECK(m.at("command") == "simulate");
    CHECK(m.at("seed") == 5);
    CHECK(m.at("config").at("overrides").at("t_end") == 0.1);
    CHECK(m.at("outputs").size() == 3);
    CHECK(m.at("versions").contains("eigen"));
    CHECK(m.at("noise_generator").get<std::string>().find("mt19937_64") != std::string::npos);
    const std::string csv = slurp(dir + "/burgers1d.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 12);
    CHECK(out.find("wrote") != std::string::npos);

    // Same seed, same bytes; a different seed changes the data.
    const std::string again = scratch("simulate_again");
    REQUIRE(run({"--out", again, "simulate", "burgers1d", "--seed", "5", "--t-end", "0.1", "--samples", "11"}) == 0);
    CHECK(slurp(again + "/burgers1d.csv") == csv);
    const std::string other = scratch("simulate_other");
    REQUIRE(run({"--out", other, "simulate", "burgers1d", "--seed", "6", "--t-end", "0.1", "--samples", "11"}) == 0);
    CHECK(slurp(other + "/burgers1d.csv") != csv);

    // Re-running from the manifest reproduces the trajectory bit for bit.
    const std::string rerun = scratch("simulate_rerun");
    REQUIRE(run({"--out", rerun, "--config", dir + "/burgers1d_manifest.json", "simulate"}) == 0);
    CHECK(slurp(rerun + "/burgers1d.csv") == csv);
}

TEST_CASE("simulate projective and one-patch examples") {
    const std::string dir = scratch("simulate_burst");
    REQUIRE(run({"--out", dir, "simulate", "mm_kinetics", "--t-end", "4"}) == 0);
    CHECK(fs::exists(dir + "/mm_kinetics.csv"));
    CHECK(fs::exists(dir + "/mm_kinetics_bursts.csv"));
    CHECK(fs::exists(dir + "/mm_kinetics.json"));
    CHECK(fs::exists(dir + "/mm_kinetics_plot.py"));
    const json m = read_json(dir + "/mm_kinetics_manifest.json");
    CHECK(m.at("outputs").size() == 5);
    const json run_json = read_json(dir + "/mm_kinetics.json");
    CHECK(run_json.dump().find("4") != std::string::npos);

    const std::string pig = scratch("simulate_pig");
    REQUIRE(run({"--out", pig, "simulate", "singpert_pig", "--t-end", "1"}) == 0);
    const std::string one = scratch("simulate_one");
    REQUIRE(run({"--out", one, "simulate", "one_patch_nonlinear", "--set", "U0=0.5"}) == 0);
    CHECK(read_json(one + "/one_patch_nonlinear_manifest.json").at("config").at("overrides").at("U0") == 0.5);
}

TEST_CASE("spectrum command") {
    const std::string dir = scratch("spectrum");
    std::string out;
    REQUIRE(run({"--out", dir, "spectrum", "-N", "8", "--ordCC", "4", "--ratio", "0.1"}, &out) == 0);
    const std::string csv = slurp(dir + "/spectrum.csv");
    std::stringstream ss(csv);
    std::string line;
    std::getline(ss, line);
    CHECK(line == "re,im,residual,certificate,cluster");
    std::getline(ss, line);
    CHECK(std::abs(std::stod(csv_row(line)[0])) < 1e-9);  // conserved total
    std::getline(ss, line);
    CHECK(std::stod(csv_row(line)[0]) == doctest::Approx(-0.996).epsilon(1e-3));
    const json gap = read_json(dir + "/spectrum_gap.json");
    CHECK(gap.at("n_slow") == 8);
    CHECK(gap.at("gap").get<double>() > 50.0);
    CHECK(out.find("slow 8") != std::string::npos);

    const std::string mat = scratch("spectrum_matrix");
    std::ofstream(mat + "/cfg.json") << R"({"matrix": [[-1, 0], [0, -100]]})";
    REQUIRE(run({"--out", mat, "--config", mat + "/cfg.json", "spectrum"}) == 0);
    const json g = read_json(mat + "/spectrum_gap.json");
    CHECK(g.at("gap").get<double>() == doctest::Approx(100.0));

    const std::string het = scratch("spectrum_hetero");
    REQUIRE(run({"--out", het, "spectrum", "--example", "heterodiff1d", "--ratio", "0.1", "--normalise"}) == 0);
    const json hm = read_json(het + "/spectrum_manifest.json");
    CHECK(hm.at("resolved_parameters").at("normalise") == true);
    CHECK(run({"--out", het, "spectrum", "--example", "mm_kinetics"}) == 2);
}

TEST_CASE("homogenise command") {
    const std::string dir = scratch("homogenise");
    std::string out;
    REQUIRE(run({"--out", dir, "homogenise", "--a", "1", "--b", "3"}, &out) == 0);
    const json h = read_json(dir + "/homogenise.json");
    CHECK(h.at("D") == 1.5);
    CHECK(h.at("s1") == -0.25);
    CHECK(h.at("theta") == 0.25);
    CHECK(h.at("T")[0][0] == -3.0);
    CHECK(h.at("det_T").get<double>() == doctest::Approx(1.0));
    CHECK(h.at("one_patch").size() == 8);
    CHECK(h.at("one_patch")[2].at("formula").get<double>() == doctest::Approx(54.0 / 35.0));
    CHECK(out.find("D = 1.5") != std::string::npos);
    CHECK(run({"--out", dir, "homogenise", "--a", "-1"}) == 2);
}

TEST_CASE("pi-errors command") {
    const std::string dir = scratch("pi_errors");
    REQUIRE(run({"--out", dir, "pi-errors", "--deltas", "0.5,0.25", "--epsilon", "1e-3"}) == 0);
    const std::string csv = slurp(dir + "/pi_errors.csv");
    CHECK(csv.rfind("delta,burst_length,pirk2_error,pirk4_error\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(fs::exists(dir + "/pi_errors_slopes.json"));

    const std::string empty = scratch("pi_errors_empty");
    REQUIRE(run({"--out", empty, "pi-errors", "--deltas", ""}) == 0);
    CHECK(slurp(empty + "/pi_errors.csv") == "delta,burst_length,pirk2_error,pirk4_error\n");

    CHECK(run({"--out", dir, "pi-errors", "--deltas", "0.3"}) == 2);  // does not divide T
    CHECK(run({"--out", dir, "pi-errors", "--derivative", "psychic"}) == 2);
}

TEST_CASE("stability command") {
    const std::string dir = scratch("stability");
    std::string out;
    REQUIRE(run({"--out", dir, "stability", "--samples", "31"}, &out) == 0);
    const std::string csv = slurp(dir + "/stability.csv");
    CHECK(csv.rfind("lambda_dt,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 32);
    CHECK(out.find("0.2178") != std::string::npos);
    const json m = read_json(dir + "/stability_manifest.json");
    CHECK(m.at("r_star").get<double>() == doctest::Approx(0.2178117057).epsilon(1e-9));
}

TEST_CASE("exit codes and output directory override") {
    std::string err;
    CHECK(run({"bogus-command"}, nullptr, &err) == 2);
    CHECK(run({"simulate", "no_such_example", "--out", scratch("bad")}, nullptr, &err) == 2);
    CHECK(err.find("example") != std::string::npos);
    CHECK(run({"--help"}) == 0);
    const std::string bad = scratch("bad_config");
    std::ofstream(bad + "/cfg.json") << R"({"no_such_key": 1})";
    CHECK(run({"--out", bad, "--config", bad + "/cfg.json", "homogenise"}, nullptr, &err) == 2);
    CHECK(err.find("no_such_key") != std::string::npos);
    std::ofstream(bad + "/broken.json") << "{ not json";
    CHECK(run({"--out", bad, "--config", bad + "/broken.json", "homogenise"}) == 2);

    // A blow-up is a numerical failure.
    const std::string blow = scratch("blowup");
    CHECK(run({"--out", blow, "simulate", "one_patch_nonlinear", "--set", "U0=-50", "--t-end", "5"}, nullptr, &err) == 3);

    const std::string env = scratch("env");
    ::setenv(kOutDirEnv, env.c_str(), 1);
    const int code = run({"--out", scratch("ignored"), "homogenise"});
    ::unsetenv(kOutDirEnv);
    CHECK(code == 0);
    CHECK(fs::exists(env + "/homogenise.json"));
    CHECK(!fs::exists(fs::temp_directory_path() / "eqfree_cli_test_ignored" / "homogenise.json"));
}

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "accelgates/rotation.hpp"
#include "cli.hpp"

using namespace accelgates;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "accelgates");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string write_config(const json& j, const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("accelgates_" + name + ".json");
    std::ofstream(p) << j.dump();
    return p.string();
}

// Data lines (without '#') of a CSV document.
std::vector<std::string> data_lines(const std::string& csv) {
    std::vector<std::string> lines;
    std::istringstream in(csv);
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line[0] != '#') lines.push_back(line);
    }
    return lines;
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string f; std::getline(in, f, ',');) out.push_back(f);
    return out;
}

json metadata_config(const std::string& csv) {
    const std::string key = "# config: ";
    const auto pos = csv.find(key);
    REQUIRE(pos != std::string::npos);
    const auto end = csv.find('\n', pos);
    return json::parse(csv.substr(pos + key.size(), end - pos - key.size()));
}

}  // namespace

TEST_CASE("units") {
    const auto r = invoke({"units", "--gap-hz", "1e9", "--a", "1"});
    CHECK(r.code == 0);
    const auto lines = data_lines(r.out);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == "gap_hz,omega_si,a_natural,m_per_s2,g");
    const double g = std::stod(split(lines[1])[4]);
    CHECK(std::abs(std::log10(g) - 16.0) <= 1.0);
    CHECK(r.out.rfind("# tool: accelgates ", 0) == 0);
}

TEST_CASE("configuration errors exit with 1") {
    const auto unknown = invoke({"integrals", "--config", write_config({{"cavity", {{"lenght", 3.0}}}}, "typo")});
    CHECK(unknown.code == 1);
    CHECK(unknown.err.find("cavity.lenght") != std::string::npos);
    const auto bad_type = invoke({"integrals", "--config", write_config({{"cavity", {{"n_modes", "three"}}}}, "type")});
    CHECK(bad_type.code == 1);
    const auto path = (fs::temp_directory_path() / "accelgates_broken.json").string();
    std::ofstream(path) << "{ not json";
    CHECK(invoke({"integrals", "--config", path}).code == 1);
    CHECK(invoke({"integrals", "--config", "/nonexistent/config.json"}).code == 1);
    CHECK(invoke({"integrals", "--jobs", "0"}).code == 1);
    CHECK(invoke({"frobnicate"}).code == 1);
    CHECK(invoke({}).code == 1);
    const auto outside = invoke({"integrals", "--config", write_config({{"trajectory", {{"x0", 4.0}}}}, "outside")});
    CHECK(outside.code == 1);
    CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("planning failures exit with 3") {
    const auto r = invoke({"synthesize", "--config", write_config({{"synthesis", {{"a_max", 0.0}}}}, "amax")});
    CHECK(r.code == 3);
    CHECK_FALSE(r.err.empty());
    json budget = {{"synthesis", {{"max_segments", 2}}}};
    const auto best = invoke({"synthesize", "--config", write_config(budget, "budget")});
    CHECK(best.code == 3);
    const auto doc = json::parse(best.out);
    CHECK(doc["method"] == "best-effort");
    CHECK(doc["segments"].size() <= 2);
}

TEST_CASE("evaluation budget from the environment exits with 2") {
    ::setenv("ACCELGATES_MAX_EVALS", "10", 1);
    const auto r = invoke({"integrals"});
    ::unsetenv("ACCELGATES_MAX_EVALS");
    CHECK(r.code == 2);
    CHECK(r.err.find("accuracy error") != std::string::npos);
}

TEST_CASE("integrals table") {
    SUBCASE("zero interaction time") {
        const auto r = invoke({"integrals", "--config", write_config({{"trajectory", {{"duration", 0.0}}}}, "t0")});
        REQUIRE(r.code == 0);
        const auto lines = data_lines(r.out);
        REQUIRE(lines.size() == 3);
        CHECK(lines[0] == "j,sign,T,re,im,err,evals");
        for (int i = 1; i < 3; ++i) {
            const auto f = split(lines[i]);
            CHECK(std::stod(f[3]) == 0.0);
            CHECK(std::stod(f[4]) == 0.0);
        }
    }
    SUBCASE("resonant inertial detector") {
        // Omega = omega_1 and sin(k x0) = sin(1.0): I_- = T sin(x0).
        json cfg = {{"trajectory", {{"kind", "inertial"}, {"x0", 1.0}, {"duration", 7.0}}}};
        const auto r = invoke({"integrals", "--config", write_config(cfg, "resonant")});
        REQUIRE(r.code == 0);
        const auto lines = data_lines(r.out);
        const auto minus = split(lines[2]);
        CHECK(minus[1] == "-");
        CHECK(std::abs(std::stod(minus[3]) - 7.0 * std::sin(1.0)) <= 1e-9);
        CHECK(std::abs(std::stod(minus[4])) <= 1e-9);
    }
    SUBCASE("nested rows and metadata") {
        json cfg = {{"integrals", {{"nested", true}}}, {"cavity", {{"n_modes", 2}}}};
        const auto r = invoke({"integrals", "--config", write_config(cfg, "nested"), "--tol", "1e-9"});
        REQUIRE(r.code == 0);
        CHECK(r.out.find("1,M++,") != std::string::npos);
        CHECK(r.out.find("2,M--,") != std::string::npos);
        const json meta = metadata_config(r.out);
        CHECK(meta["cavity"]["n_modes"] == 2);
        CHECK(meta["tolerances"]["quadrature"] == 1e-9);
        CHECK(r.out.find("# command: integrals") != std::string::npos);
    }
}

TEST_CASE("runs are deterministic") {
    const auto a = invoke({"integrals", "--jobs", "1"});
    const auto b = invoke({"integrals", "--jobs", "3"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("emitted config round trips") {
    json cfg = {{"cavity", {{"n_modes", 4}, {"lambda", 0.02}}}, {"scan", {{"parameter", "T"}, {"range", {{"start", 0.5}, {"stop", 2.0}, {"count", 4}}}}}};
    const auto first = invoke({"scan", "--config", write_config(cfg, "emit"), "--emit-config"});
    REQUIRE(first.code == 0);
    const json resolved = json::parse(first.out);
    CHECK(resolved["scan"]["values"].size() == 4);
    const auto second = invoke({"scan", "--config", write_config(resolved, "emit2"), "--emit-config"});
    CHECK(json::parse(second.out) == resolved);
}

TEST_CASE("single-point scan equals the library") {
    json cfg = {{"scan", {{"parameter", "a"}, {"values", {0.8}}}}, {"field", {{"alpha_arg", 0.3}}}};
    const auto r = invoke({"scan", "--config", write_config(cfg, "single")});
    REQUIRE(r.code == 0);
    const auto lines = data_lines(r.out);
    REQUIRE(lines.size() == 2);
    const auto f = split(lines[1]);
    const CavityConfig cav{std::numbers::pi, 1, 1.0, 0.01};
    const auto seg = TrajectorySegment::accelerated(0.8, 0.0, 2.0);
    const auto ip = phase_integral(seg, cav, 1, Sign::Plus, 2.0);
    const auto im = phase_integral(seg, cav, 1, Sign::Minus, 2.0);
    const auto rot = extract_rotation(ip.value, im.value, CoherentPrep::polar(1, 1.0, 0.3), 0.01);
    CHECK(std::stod(f[1]) == rot.azimuth);
    CHECK(std::stod(f[3]) == rot.angle);
    CHECK(f[8] == "ok");
    CHECK(r.out.find("# valid_rows=1 failed_rows=0") != std::string::npos);
    const auto vacuum = invoke({"scan", "--config", write_config({{"field", {{"kind", "vacuum"}}}}, "vacscan")});
    CHECK(vacuum.code == 1);
}

TEST_CASE("synthesis plans") {
    SUBCASE("identity") {
        json cfg = {{"synthesis", {{"target", {{"axis", {1.0, 0.0, 0.0}}, {"angle", 0.0}}}}}};
        const auto r = invoke({"synthesize", "--config", write_config(cfg, "identity")});
        REQUIRE(r.code == 0);
        const auto doc = json::parse(r.out);
        CHECK(doc["method"] == "identity");
        CHECK(doc["segments"].empty());
    }
    SUBCASE("unitary target") {
        const double s = 1.0 / std::sqrt(2.0);
        json u = {{{s, 0.0}, {s, 0.0}}, {{s, 0.0}, {-s, 0.0}}};
        json cfg = {{"synthesis", {{"target", {{"unitary", u}}}}}};
        const auto path = (fs::temp_directory_path() / "accelgates_plan.json").string();
        const auto r = invoke({"synthesize", "--config", write_config(cfg, "hadamard"), "--out", path});
        REQUIRE(r.code == 0);
        CHECK(r.out.empty());
        std::ifstream in(path);
        const json doc = json::parse(in);
        CHECK(doc["success"] == true);
        CHECK(doc["fidelity"].get<double>() >= 1.0 - 1e-3);
        CHECK(doc["meta"]["tool"] == "accelgates");
        CHECK(doc["meta"]["version"] == cli::tool_version());
        std::vector<GateSegment> segs;
        for (const auto& s : doc["segments"]) {
            CHECK(s["x0"].get<double>() == (s["a"].get<double>() >= 0.0 ? 0.0 : std::numbers::pi));
            segs.push_back({s["a"], s["T"], std::polar(s["alpha_abs"].get<double>(), s["alpha_arg"].get<double>()),
                            s["mode"], CavityConfig{std::numbers::pi, 1, 1.0, 0.01}});
        }
        Mat2 h;
        h << s, s, s, -s;
        CHECK(gate_fidelity(NetRotation::from_unitary(h), simulate_sequence(segs)) >= 1.0 - 1e-3);
    }
    SUBCASE("non-unitary target") {
        json u = {{{1.0, 0.0}, {1.0, 0.0}}, {{0.0, 0.0}, {1.0, 0.0}}};
        json cfg = {{"synthesis", {{"target", {{"unitary", u}}}}}};
        CHECK(invoke({"synthesize", "--config", write_config(cfg, "nonunitary")}).code == 1);
    }
}

TEST_CASE("oracle verification report") {
    json cfg = {{"oracle", {{"vacuum_band", {12.0, 20.0}}}}};
    const auto r = invoke({"oracle-verify", "--config", write_config(cfg, "oracle")});
    const auto doc = json::parse(r.out);
    CHECK(r.code == 0);
    CHECK(doc["passed"] == true);
    for (const auto& c : doc["checks"]) {
        INFO(c.dump());
        CHECK(c["passed"] == true);
    }
    CHECK(doc["checks"].size() == 5);
    for (const auto& run : doc["runs"]) {
        CHECK(run["diagnostics"]["norm_drift"].get<double>() <= 1e-9);
        if (run["lambda"].get<double>() > 0.0) {
            CHECK(run["diagnostics"]["max_step"].get<double>() <= run["diagnostics"]["step_bound"].get<double>() * (1.0 + 1e-12));
        }
    }
}

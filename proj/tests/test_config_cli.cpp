#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "gridcert/cli.hpp"
#include "gridcert/config.hpp"
#include "json.hpp"
#include "networks.hpp"
#include "support.hpp"

using namespace gridcert;
namespace fs = std::filesystem;

namespace {

const fs::path kData = GRIDCERT_TEST_DATA;

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "gridcert");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// Writes text into a fresh file under the temp directory and returns its path.
fs::path scratch(const std::string& name, const std::string& text) {
    const fs::path dir = fs::temp_directory_path() / "gridcert_tests";
    fs::create_directories(dir);
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p;
}

std::string designed_text() { return slurp(kData / "two_bus_designed.json"); }

// Designed network with every susceptance scaled.
fs::path scaled_designed(double factor) {
    auto doc = nlohmann::json::parse(designed_text());
    for (auto& l : doc["lines"]) l["B"] = l["B"].get<double>() * factor;
    return scratch("designed_x" + std::to_string(static_cast<int>(factor)) + ".json", doc.dump());
}

}  // namespace

// ---------------------------------------------------------------------------
// Config parsing

TEST_CASE("parse the designed two-bus file") {
    const ConfigBundle cfg = parse_config(kData / "two_bus_designed.json");
    Eigen::Matrix2d want;
    want << 1, -1, -1, 1;
    CHECK(laplacian(cfg.network).isApprox(want));
    CHECK(cfg.omega0 == 30.0);
    REQUIRE(cfg.network.size() == 2);
    CHECK(cfg.network.buses()[0].model == nets::designed_bus());
    CHECK(cfg.network.buses()[0].first_order == nets::kDesignedFit);
    REQUIRE(cfg.sim);
    CHECK(cfg.sim->dt == 0.01);
    CHECK(cfg.sim->disturbance.at("2") == -0.5);
}

TEST_CASE("config validation") {
    auto kind_of = [](const std::string& text) { return thrown_kind([&] { (void)parse_config_text(text); }); };
    auto message_of = [](const std::string& text) {
        try {
            (void)parse_config_text(text);
        } catch (const Error& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    SUBCASE("zero damping") {
        const std::string t = R"({"buses": [{"id": "a", "M": 1, "D": 0}], "lines": []})";
        CHECK(kind_of(t) == ErrorKind::ValidationError);
        CHECK(message_of(t).find("buses[0].D") != std::string::npos);
    }
    SUBCASE("unknown bus in a line") {
        const std::string t = R"({"buses": [{"id": "a", "M": 1, "D": 1}], "lines": [{"from": "a", "to": "z", "B": 1}]})";
        CHECK(kind_of(t) == ErrorKind::ValidationError);
        CHECK(message_of(t).find("lines[0]") != std::string::npos);
    }
    SUBCASE("syntax error carries the line") {
        const std::string t = "{\n  \"buses\": [\n    {\"id\": \"a\",, \"M\": 1}\n  ]\n}";
        CHECK(kind_of(t) == ErrorKind::ParseError);
        CHECK(message_of(t).find("line 3") != std::string::npos);
    }
    SUBCASE("unknown key carries the path") {
        const std::string t = R"({"buses": [{"id": "a", "M": 1, "D": 1, "Dx": 2}], "lines": []})";
        CHECK(kind_of(t) == ErrorKind::ParseError);
        CHECK(message_of(t).find("buses[0].Dx") != std::string::npos);
    }
    SUBCASE("bad controller type") {
        const std::string t = R"({"buses": [{"id": "a", "M": 1, "D": 1, "controller": {"type": "pid"}}], "lines": []})";
        CHECK(kind_of(t).has_value());
    }
    SUBCASE("missing file") {
        CHECK(thrown_kind([] { (void)parse_config("/nonexistent/net.json"); }) == ErrorKind::ParseError);
    }
    SUBCASE("defaults") {
        const ConfigBundle c = parse_config_text(R"({"buses": [{"id": 1, "M": 1, "D": 1}], "lines": []})");
        CHECK(c.network.buses()[0].id == "1");
        CHECK(c.network.buses()[0].model.tau == 0.0);
        CHECK(c.network.buses()[0].model.controller.kind == ControllerKind::None);
        CHECK_FALSE(c.omega0);
    }
}

TEST_CASE("emit and parse round trip") {
    SUBCASE("data files") {
        for (const char* name : {"two_bus_designed.json", "two_bus_aggressive.json", "two_bus_droop.json"}) {
            const ConfigBundle a = parse_config(kData / name);
            const ConfigBundle b = parse_config_text(emit_config(a));
            CHECK(a == b);
            CHECK(emit_config(b) == emit_config(a));
        }
    }
    SUBCASE("random networks with awkward numbers") {
        std::mt19937_64 rng(61);
        for (int k = 0; k < 50; ++k) {
            const NetworkModel net = nets::random_delay_free(rng, 2, 6);
            std::vector<Bus> buses = net.buses();
            for (Bus& b : buses) {
                b.model.tau = std::uniform_real_distribution<double>(0, 1)(rng) < 0.5 ? 0.0 : oracle::log_uniform(rng, 1e-3, 1.0);
                if (std::uniform_real_distribution<double>(0, 1)(rng) < 0.3)
                    b.first_order = FirstOrderFit{oracle::log_uniform(rng, 0.1, 3), oracle::log_uniform(rng, 0.1, 3), 0.1 / 3.0};
            }
            SimConfig sc;
            sc.dt = 1.0 / 3000.0;
            sc.t_end = 12.5;
            sc.disturbance[buses[0].id] = -std::numbers::pi;
            const ConfigBundle a{NetworkModel(buses, net.lines()), oracle::log_uniform(rng, 1, 100), sc};
            CHECK(parse_config_text(emit_config(a)) == a);
        }
    }
}

TEST_CASE("default step") {
    const ConfigBundle c = parse_config(kData / "two_bus_designed.json");
    // τ/20 = 0.025 and 0.1/Kδ = 0.0125 are both above the 1e−2 cap
    CHECK(default_dt(c.network) == doctest::Approx(0.01));
    const NetworkModel agg = nets::two_bus(nets::aggressive_bus());
    CHECK(default_dt(agg) <= 0.05 / 20.0);
}

// ---------------------------------------------------------------------------
// CLI

TEST_CASE("certify") {
    SUBCASE("designed network is certified") {
        const fs::path report = fs::temp_directory_path() / "gridcert_tests_report.json";
        const Run r = run({"certify", (kData / "two_bus_designed.json").string(), "--report", report.string()});
        CHECK(r.code == 0);
        CHECK(r.out.find("verdict: certified") != std::string::npos);
        const auto doc = nlohmann::json::parse(slurp(report));
        CHECK(doc["tool"]["version"] == kToolVersion);
        for (const auto& b : doc["buses"]) CHECK(b["susceptance_budget"].get<double>() >= 1.0);
    }
    SUBCASE("ten times the susceptance") {
        const Run r = run({"certify", scaled_designed(10.0).string()});
        CHECK(r.code == 2);
        CHECK(r.out.find("budget_exceeded") != std::string::npos);
    }
    SUBCASE("unstable bus") {
        const Run r = run({"certify", (kData / "two_bus_aggressive.json").string()});
        CHECK(r.code == 2);
        CHECK(r.out.find("assumption_violated") != std::string::npos);
    }
    SUBCASE("fixed gamma") {
        CHECK(run({"certify", (kData / "two_bus_designed.json").string(), "--gamma", "0.5"}).code == 0);
        CHECK(run({"certify", (kData / "two_bus_designed.json").string(), "--gamma", "0.01"}).code == 2);
    }
    SUBCASE("bad input") {
        CHECK(run({"certify", "/nonexistent.json"}).code == 3);
        const fs::path bad = scratch("bad_damping.json", R"({"buses": [{"id": "a", "M": 1, "D": -1}], "lines": []})");
        const Run r = run({"certify", bad.string()});
        CHECK(r.code == 3);
        CHECK(r.err.find("buses[0].D") != std::string::npos);
        CHECK(run({"certify"}).code == 3);
        CHECK(run({"nonsense"}).code == 3);
    }
}

TEST_CASE("grid density from the environment") {
    const std::string path = (kData / "two_bus_droop.json").string();
    ::setenv("GRIDCERT_GRID_POINTS", "500", 1);
    const Run a = run({"certify", path});
    ::setenv("GRIDCERT_GRID_POINTS", "x", 1);
    const Run bad = run({"certify", path});
    ::unsetenv("GRIDCERT_GRID_POINTS");
    const Run b = run({"certify", path});
    CHECK(a.code == 0);
    CHECK(a.out.find("x 500") != std::string::npos);
    CHECK(b.out.find("x 2000") != std::string::npos);
    CHECK(bad.code == 3);
    // explicit flag wins
    ::setenv("GRIDCERT_GRID_POINTS", "500", 1);
    const Run c = run({"certify", path, "--points", "800"});
    ::unsetenv("GRIDCERT_GRID_POINTS");
    CHECK(c.out.find("x 800") != std::string::npos);
}

TEST_CASE("simulate") {
    SUBCASE("designed decays") {
        const fs::path csv = fs::temp_directory_path() / "gridcert_tests_traj.csv";
        const Run r = run({"simulate", (kData / "two_bus_designed.json").string(), "--out", csv.string()});
        CHECK(r.code == 0);
        std::ifstream f(csv);
        std::string header;
        std::getline(f, header);
        CHECK(header == "t,theta_1,omega_1,x_1,theta_2,omega_2,x_2");
    }
    SUBCASE("aggressive grows") {
        const Run r = run({"simulate", (kData / "two_bus_aggressive.json").string()});
        CHECK(r.code == 2);
        CHECK(r.out.find("growing") != std::string::npos);
    }
    SUBCASE("droop settles with metrics") {
        const Run r = run({"simulate", (kData / "two_bus_droop.json").string()});
        CHECK(r.code == 0);
        CHECK(r.out.find("nadir") != std::string::npos);
    }
    SUBCASE("step too large") {
        CHECK(run({"simulate", (kData / "two_bus_designed.json").string(), "--dt", "0.1"}).code == 3);
    }
}

TEST_CASE("freqresp") {
    const fs::path csv = fs::temp_directory_path() / "gridcert_tests_bode.csv";
    const Run r = run({"freqresp", (kData / "two_bus_designed.json").string(), "--bus", "1", "--out", csv.string(), "--points", "300"});
    CHECK(r.code == 0);
    CHECK(r.out.find("envelope: inside") == std::string::npos);  // grazes: worst ratio just above 1
    CHECK(r.out.find("worst ratio 1.00") != std::string::npos);
    std::ifstream f(csv);
    std::string line;
    std::getline(f, line);
    CHECK(line == "omega,re,im,mag,phase");
    int rows = 0;
    while (std::getline(f, line)) {
        std::stringstream ss(line);
        std::vector<double> v;
        for (std::string cell; std::getline(ss, cell, ',');) v.push_back(std::stod(cell));
        REQUIRE(v.size() == 5);
        const Complex p = bus_eval(nets::designed_bus(), Complex(0.0, v[0]));
        CHECK(v[1] == doctest::Approx(p.real()).epsilon(1e-9));
        CHECK(v[3] == doctest::Approx(std::abs(p)).epsilon(1e-9));
        ++rows;
    }
    CHECK(rows == 300);
    CHECK(run({"freqresp", (kData / "two_bus_designed.json").string(), "--bus", "9"}).code == 3);
}

TEST_CASE("global-check") {
    CHECK(run({"global-check", (kData / "two_bus_designed.json").string()}).code == 0);
    const Run agg = run({"global-check", (kData / "two_bus_aggressive.json").string()});
    CHECK(agg.code == 2);
    CHECK(agg.out.find("winding verdict: unstable") != std::string::npos);
    const Run droop = run({"global-check", (kData / "two_bus_droop.json").string()});
    CHECK(droop.code == 0);
    CHECK(droop.out.find("spectral verdict: stable") != std::string::npos);
}

TEST_CASE("min-gamma is finite and reproducible") {
    const Run a = run({"min-gamma", (kData / "two_bus_droop.json").string(), "--bus", "1"});
    const Run b = run({"min-gamma", (kData / "two_bus_droop.json").string(), "--bus", "1"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find("gamma_min = ") != std::string::npos);
    CHECK(run({"min-gamma", (kData / "two_bus_aggressive.json").string(), "--bus", "1"}).code == 2);
}

TEST_CASE("first-order") {
    const Run r = run({"first-order", "1.37", "1", "0.08", "30"});
    CHECK(r.code == 0);
    CHECK(r.out.find("gamma_min = 0.18") != std::string::npos);
    CHECK(run({"first-order", "--a", "1.37", "--b", "1", "--eps", "0.08", "--omega0", "30"}).out == r.out);
    CHECK(run({"first-order", "1.37", "1", "0.08", "30", "--gamma", "0.2"}).code == 0);
    CHECK(run({"first-order", "1.37", "1", "0.08", "30", "--gamma", "0.1"}).code == 2);
    CHECK(run({"first-order", "0.05", "1", "0.08", "30"}).code == 2);
    CHECK(run({"first-order", "-1", "1", "0.08", "30"}).code == 3);
}

TEST_CASE("reports are deterministic") {
    const fs::path r1 = fs::temp_directory_path() / "gridcert_tests_det1.json";
    const fs::path r2 = fs::temp_directory_path() / "gridcert_tests_det2.json";
    const std::string cfg = (kData / "two_bus_designed.json").string();
    const Run a = run({"certify", cfg, "--report", r1.string()});
    const Run b = run({"certify", cfg, "--report", r2.string()});
    CHECK(a.out == b.out);
    CHECK(slurp(r1) == slurp(r2));
    CHECK(run({"--version"}).out.find(kToolVersion) != std::string::npos);
}

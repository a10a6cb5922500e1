#include "gridcert/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "gridcert/config.hpp"
#include "gridcert/error.hpp"
#include "gridcert/network.hpp"
#include "gridcert/sim.hpp"
#include "gridcert/spr.hpp"
#include "json.hpp"

namespace gridcert {

using nlohmann::json;

namespace {

struct GridFlags {
    double min = FrequencyGrid::kDefaultMin;
    double max = FrequencyGrid::kDefaultMax;
    std::optional<std::size_t> points;

    void attach(CLI::App* cmd) {
        cmd->add_option("--grid-min", min, "lowest grid frequency, rad/s")->capture_default_str();
        cmd->add_option("--grid-max", max, "highest grid frequency, rad/s")->capture_default_str();
        cmd->add_option("--points", points, "log-spaced grid points (default 2000 or GRIDCERT_GRID_POINTS)");
    }

    FrequencyGrid build() const {
        std::size_t n = FrequencyGrid::kDefaultPoints;
        if (points) {
            n = *points;
        } else if (const char* env = std::getenv("GRIDCERT_GRID_POINTS"); env && *env) {
            char* end = nullptr;
            const long v = std::strtol(env, &end, 10);
            if (*end != '\0' || v < 2) fail(ErrorKind::InvalidGrid, "GRIDCERT_GRID_POINTS must be an integer >= 2");
            n = static_cast<std::size_t>(v);
        }
        return FrequencyGrid::log_spaced(min, max, n);
    }
};

json grid_json(const FrequencyGrid& g) { return {{"min", g.min()}, {"max", g.max()}, {"points", g.size()}, {"spacing", "log"}}; }

json report_header(const std::string& command) {
    return {{"tool", {{"name", "gridcert"}, {"version", kToolVersion}}}, {"command", command}};
}

void write_report(const std::string& path, const json& doc) {
    if (path.empty()) return;
    std::ofstream f(path);
    if (!f) fail(ErrorKind::ParseError, "cannot write report " + path);
    f << doc.dump(2) << "\n";
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) fail(ErrorKind::ParseError, "cannot write " + path);
    f << std::setprecision(17);
    return f;
}

json certificate_json(const Certificate& c) {
    json j = {{"bus", c.bus_id},
              {"status", std::string(to_string(c.status))},
              {"route", std::string(to_string(c.route))},
              {"gamma_min", c.gamma_min},
              {"gamma_rel_tol", c.gamma_rel_tol},
              {"margin", c.margin},
              {"margin_tol", c.margin_tol},
              {"susceptance_budget", c.susceptance_budget},
              {"diag_susceptance", c.diag_susceptance},
              {"admitted", c.admitted},
              {"admission_tol", 1e-12},
              {"message", c.message}};
    if (c.first_order_gamma) j["first_order_gamma"] = *c.first_order_gamma;
    if (c.envelope)
        j["envelope"] = {{"passed", c.envelope->passed}, {"worst_ratio", c.envelope->worst_ratio}, {"worst_omega", c.envelope->worst_omega}};
    return j;
}

double require_omega0(const ConfigBundle& cfg) {
    if (!cfg.omega0) fail(ErrorKind::ValidationError, "h.omega0: missing (needed for certification)");
    return *cfg.omega0;
}

const Bus& find_bus(const NetworkModel& net, const std::string& id) { return net.buses()[net.index_of(id)]; }

int verdict_exit(Verdict v) {
    switch (v) {
        case Verdict::Stable: return kExitOk;
        case Verdict::Unstable: return kExitNegative;
        case Verdict::Inconclusive: return kExitInconclusive;
    }
    return kExitInconclusive;
}

// ---------------------------------------------------------------------------

int cmd_certify(const std::string& path, std::optional<double> gamma, const GridFlags& gf, const std::string& report,
                std::ostream& out) {
    const ConfigBundle cfg = parse_config(path);
    const FrequencyGrid grid = gf.build();
    const HFilter h = HFilter::canonical(require_omega0(cfg));
    if (gamma && !(*gamma > 0.0)) fail(ErrorKind::InvalidParameter, "--gamma must be > 0");

    NetworkCertificate nc;
    nc.omega0 = h.omega0();
    if (!gamma) {
        nc = protocol_certify_network(cfg.network, h, grid);
    } else {
        nc.certified = true;
        for (const Bus& b : cfg.network.buses()) {
            Certificate c;
            c.bus_id = b.id;
            c.diag_susceptance = diag_susceptance(cfg.network, b.id);
            c.gamma_min = *gamma;
            c.susceptance_budget = 1.0 / *gamma;
            try {
                const MarginResult m = certify_bus(h, b.model, *gamma, grid);
                c.margin = m.margin;
                c.margin_tol = m.tol;
                c.admitted = m.valid && admit(*gamma, c.diag_susceptance);
                c.status = !m.valid ? CertStatus::NoCertificate
                                    : c.admitted ? CertStatus::Admitted : CertStatus::BudgetExceeded;
            } catch (const Error& e) {
                c.status = e.kind() == ErrorKind::AssumptionViolated ? CertStatus::AssumptionViolated : CertStatus::NumericalFailure;
                c.message = e.what();
            }
            nc.certified = nc.certified && c.admitted;
            nc.buses.push_back(c);
        }
    }

    out << "omega0 " << h.omega0() << ", grid [" << grid.min() << ", " << grid.max() << "] x " << grid.size()
        << (gamma ? ", fixed gamma" : "") << "\n";
    out << std::left << std::setw(10) << "bus" << std::setw(21) << "status" << std::setw(22) << "route" << std::setw(13)
        << (gamma ? "gamma" : "gamma_min") << std::setw(13) << "budget" << std::setw(13) << "L_ii" << "margin\n";
    bool numerical = false;
    json doc = report_header("certify");
    doc["grid"] = grid_json(grid);
    doc["omega0"] = h.omega0();
    doc["buses"] = json::array();
    for (const Certificate& c : nc.buses) {
        out << std::left << std::setw(10) << c.bus_id << std::setw(21) << to_string(c.status) << std::setw(22)
            << to_string(c.route) << std::setw(13) << c.gamma_min << std::setw(13) << c.susceptance_budget << std::setw(13)
            << c.diag_susceptance << c.margin << "\n";
        if (!c.message.empty()) out << "  " << c.message << "\n";
        numerical = numerical || c.status == CertStatus::NumericalFailure;
        doc["buses"].push_back(certificate_json(c));
    }
    doc["certified"] = nc.certified;
    out << "verdict: " << (nc.certified ? "certified" : "not certified") << "\n";
    write_report(report, doc);
    if (numerical) return kExitNumerical;
    return nc.certified ? kExitOk : kExitNegative;
}

int cmd_simulate(const std::string& path, std::optional<double> dt, std::optional<double> t_end, const std::string& csv,
                 const std::string& report, std::ostream& out) {
    const ConfigBundle cfg = parse_config(path);
    SimConfig sc = cfg.sim.value_or(SimConfig{});
    if (!cfg.sim) sc.dt = default_dt(cfg.network, sc.derivative_filter_eta);
    if (dt) sc.dt = *dt;
    if (t_end) sc.t_end = *t_end;

    const Trajectory tr = simulate(cfg.network, sc);
    if (!csv.empty()) {
        std::ofstream f = open_out(csv);
        f << "t";
        for (const BusTrace& b : tr.buses) f << ",theta_" << b.id << ",omega_" << b.id << ",x_" << b.id;
        f << "\n";
        for (std::size_t k = 0; k < tr.samples(); ++k) {
            f << tr.times[k];
            for (const BusTrace& b : tr.buses) f << "," << b.theta[k] << "," << b.omega[k] << "," << b.x[k];
            f << "\n";
        }
    }
    const TrendReport trend = detect_stability(tr);
    json doc = report_header("simulate");
    doc["sim"] = {{"dt", sc.dt}, {"t_end", sc.t_end}, {"derivative_filter_eta", sc.derivative_filter_eta}, {"samples", tr.samples()}};
    doc["truncated"] = tr.truncated;
    doc["verdict"] = {{"trend", std::string(to_string(trend.trend))},
                      {"ratio", std::isfinite(trend.ratio) ? json(trend.ratio) : json("inf")},
                      {"growing_above", 2.0},
                      {"decaying_below", 0.5}};
    out << "dt " << sc.dt << ", t_end " << sc.t_end << ", samples " << tr.samples() << "\n";
    if (tr.truncated) out << "truncated: " << tr.reason << "\n";
    out << "verdict: " << to_string(trend.trend) << " (amplitude ratio " << trend.ratio << ")\n";
    if (trend.trend == Trend::Decaying) {
        try {
            const FrequencyMetrics fm = frequency_metrics(tr);
            doc["metrics"] = json::array();
            for (const BusMetrics& m : fm.buses) {
                out << "bus " << m.id << ": nadir " << m.nadir << ", offset " << m.offset << ", max rocof " << m.max_rocof << "\n";
                doc["metrics"].push_back({{"bus", m.id},
                                          {"nadir", m.nadir},
                                          {"offset", m.offset},
                                          {"max_rocof", m.max_rocof},
                                          {"settle_tol", fm.settle_tol}});
            }
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NotSettled) throw;
            out << "metrics unavailable: " << e.what() << "\n";
            doc["metrics_error"] = e.what();
        }
    }
    write_report(report, doc);
    switch (trend.trend) {
        case Trend::Decaying: return kExitOk;
        case Trend::Growing: return kExitNegative;
        case Trend::Inconclusive: return kExitInconclusive;
    }
    return kExitInconclusive;
}

int cmd_freqresp(const std::string& path, const std::string& bus_id, const GridFlags& gf, const std::string& csv,
                 std::ostream& out) {
    const ConfigBundle cfg = parse_config(path);
    const Bus& bus = find_bus(cfg.network, bus_id);
    const FrequencyGrid grid = gf.build();

    std::optional<std::ofstream> file;
    if (!csv.empty()) file = open_out(csv);
    std::ostream& dst = file ? static_cast<std::ostream&>(*file) : out;
    const auto precision = dst.precision();
    dst << std::setprecision(17) << "omega,re,im,mag,phase\n";
    double prev = 0.0;
    double offset = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const Complex p = bus_eval(bus.model, Complex(0.0, grid[k]));
        const double raw = std::arg(p) * 180.0 / std::numbers::pi;
        if (k > 0) {
            while (raw + offset - prev > 180.0) offset -= 360.0;
            while (raw + offset - prev < -180.0) offset += 360.0;
        }
        prev = raw + offset;
        dst << grid[k] << "," << p.real() << "," << p.imag() << "," << std::abs(p) << "," << prev << "\n";
    }
    dst.precision(precision);
    if (file) {
        out << "wrote " << grid.size() << " points for bus " << bus.id << " to " << csv << "\n";
        if (bus.first_order && cfg.omega0) {
            const EnvelopeResult env = envelope_check(bus.model, bus.first_order->with_omega0(*cfg.omega0), grid);
            out << "envelope: " << (env.passed ? "inside" : "outside") << " (worst ratio " << env.worst_ratio << " at omega "
                << env.worst_omega << ")\n";
        }
    }
    return kExitOk;
}

int cmd_global_check(const std::string& path, const GridFlags& gf, std::ostream& out) {
    const ConfigBundle cfg = parse_config(path);
    const FrequencyGrid grid = gf.build();
    const GlobalReport g = nyquist_global_check(cfg.network, grid);
    out << "winding verdict: " << to_string(g.verdict) << " (rhp zeros " << g.rhp_zeros << ")\n";
    if (!g.detail.empty()) out << "  " << g.detail << "\n";
    if (cfg.network.delay_free()) {
        const SpectralReport s = spectral_stability(cfg.network);
        out << "spectral verdict: " << to_string(s.verdict) << " (abscissa " << s.abscissa << ", tol " << s.tol << ")\n";
    }
    return verdict_exit(g.verdict);
}

int cmd_min_gamma(const std::string& path, const std::string& bus_id, const GridFlags& gf, std::ostream& out) {
    const ConfigBundle cfg = parse_config(path);
    const Bus& bus = find_bus(cfg.network, bus_id);
    const FrequencyGrid grid = gf.build();
    const HFilter h = HFilter::canonical(require_omega0(cfg));
    try {
        const MinGammaResult r = min_gamma(h, bus.model, grid);
        out << std::setprecision(10) << "gamma_min = " << r.gamma_min << " (rel tol " << r.rel_tol << ")\n"
            << "budget = " << 1.0 / r.gamma_min << "\n"
            << "margin = " << r.at_gamma_min.margin << " (tol " << r.at_gamma_min.tol << ")\n";
        return kExitOk;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoCertificate && e.kind() != ErrorKind::AssumptionViolated) throw;
        out << e.what() << "\n";
        return kExitNegative;
    }
}

int cmd_first_order(double a, double b, double eps, double omega0, std::optional<double> gamma, std::ostream& out) {
    const FirstOrderDesign d{a, b, eps, omega0};
    d.validate();
    int code = kExitOk;
    try {
        const double g = min_gamma_first_order(d);
        out << std::setprecision(6) << "gamma_min = " << g << "\n";
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoCertificate) throw;
        out << "gamma_min: none (" << e.what() << ")\n";
        code = kExitNegative;
    }
    if (gamma) {
        const bool ok = first_order_protocol(d, *gamma);
        out << "gamma = " << *gamma << ": " << (ok ? "pass" : "fail") << "\n";
        code = ok ? kExitOk : kExitNegative;
    }
    return code;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Decentralized stability certificates for inverter-based power networks", "gridcert"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    std::string config, report, csv, bus;
    std::optional<double> gamma, dt, t_end;
    GridFlags grid;

    auto* certify = app.add_subcommand("certify", "run the plug-and-play protocol on every bus");
    certify->add_option("config", config, "network configuration file")->required();
    certify->add_option("--gamma", gamma, "check this gamma instead of searching gamma_min");
    certify->add_option("--report", report, "write a JSON report");
    grid.attach(certify);

    auto* simulate_cmd = app.add_subcommand("simulate", "integrate the network and classify the transient");
    simulate_cmd->add_option("config", config, "network configuration file")->required();
    simulate_cmd->add_option("--out", csv, "trajectory CSV");
    simulate_cmd->add_option("--dt", dt, "step, s");
    simulate_cmd->add_option("--t-end", t_end, "horizon, s");
    simulate_cmd->add_option("--report", report, "write a JSON report");

    auto* freqresp = app.add_subcommand("freqresp", "bus frequency response p(jw) as CSV");
    freqresp->add_option("config", config, "network configuration file")->required();
    freqresp->add_option("--bus", bus, "bus id")->required();
    freqresp->add_option("--out", csv, "CSV file (stdout when omitted)");
    grid.attach(freqresp);

    auto* global = app.add_subcommand("global-check", "closed-loop winding-number stability check");
    global->add_option("config", config, "network configuration file")->required();
    grid.attach(global);

    auto* mingamma = app.add_subcommand("min-gamma", "smallest certifiable gamma of one bus");
    mingamma->add_option("config", config, "network configuration file")->required();
    mingamma->add_option("--bus", bus, "bus id")->required();
    grid.attach(mingamma);

    double a = 0, b = 0, eps = 0, omega0 = 0;
    auto* first = app.add_subcommand("first-order", "closed-form test for p ~ a/(s+b) with envelope eps");
    first->add_option("a,--a", a, "first-order gain")->required();
    first->add_option("b,--b", b, "first-order pole")->required();
    first->add_option("eps,--eps", eps, "envelope size")->required();
    first->add_option("omega0,--omega0", omega0, "filter corner, rad/s")->required();
    first->add_option("--gamma", gamma, "check this gamma");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInvalidInput;
    }

    try {
        if (certify->parsed()) return cmd_certify(config, gamma, grid, report, out);
        if (simulate_cmd->parsed()) return cmd_simulate(config, dt, t_end, csv, report, out);
        if (freqresp->parsed()) return cmd_freqresp(config, bus, grid, csv, out);
        if (global->parsed()) return cmd_global_check(config, grid, out);
        if (mingamma->parsed()) return cmd_min_gamma(config, bus, grid, out);
        if (first->parsed()) return cmd_first_order(a, b, eps, omega0, gamma, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        if (is_input_error(e.kind())) return kExitInvalidInput;
        if (e.kind() == ErrorKind::Inconclusive) return kExitInconclusive;
        return kExitNumerical;
    }
    return kExitInvalidInput;
}

}  // namespace gridcert

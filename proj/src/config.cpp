#include "gridcert/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "gridcert/error.hpp"
#include "json.hpp"

namespace gridcert {

using nlohmann::json;

namespace {

[[noreturn]] void bad_key(const std::string& path, const std::string& what) {
    fail(ErrorKind::ParseError, path + ": " + what);
}

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
    fail(ErrorKind::ValidationError, path + ": " + what);
}

void expect_object(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) bad_key(path, "expected an object");
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) bad_key(path + "." + key, "unknown key");
    }
}

double number(const json& obj, const std::string& key, const std::string& path, std::optional<double> fallback = {}) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        if (fallback) return *fallback;
        bad_key(path + "." + key, "missing");
    }
    if (!it->is_number()) bad_key(path + "." + key, "expected a number");
    const double v = it->get<double>();
    if (!std::isfinite(v)) invalid(path + "." + key, "must be finite");
    return v;
}

double nonneg(const json& obj, const std::string& key, const std::string& path, std::optional<double> fallback = {}) {
    const double v = number(obj, key, path, fallback);
    if (v < 0.0) invalid(path + "." + key, "must be >= 0");
    return v;
}

double positive(const json& obj, const std::string& key, const std::string& path, std::optional<double> fallback = {}) {
    const double v = number(obj, key, path, fallback);
    if (!(v > 0.0)) invalid(path + "." + key, "must be > 0");
    return v;
}

std::string bus_id(const json& j, const std::string& path) {
    if (j.is_string()) {
        auto s = j.get<std::string>();
        if (s.empty()) invalid(path, "must not be empty");
        return s;
    }
    if (j.is_number_integer()) return std::to_string(j.get<long long>());
    bad_key(path, "expected a string or integer id");
}

Controller parse_controller(const json& j, const std::string& path) {
    expect_object(j, path, {"type", "K", "Knu", "Kdelta"});
    const auto it = j.find("type");
    if (it == j.end()) bad_key(path + ".type", "missing");
    if (!it->is_string()) bad_key(path + ".type", "expected a string");
    const std::string type = it->get<std::string>();
    if (type == "none") return Controller::none();
    if (type == "droop") return Controller::droop(nonneg(j, "K", path));
    if (type == "virtual_inertia") return Controller::virtual_inertia(nonneg(j, "K", path), nonneg(j, "Knu", path));
    if (type == "idroop") {
        const double K = nonneg(j, "K", path);
        const double Knu = nonneg(j, "Knu", path);
        const double Kdelta = positive(j, "Kdelta", path);
        return Controller::idroop(K, Knu, Kdelta);
    }
    invalid(path + ".type", "unknown controller type '" + type + "'");
}

Bus parse_bus(const json& j, const std::string& path) {
    expect_object(j, path, {"id", "M", "D", "tau", "controller", "first_order"});
    if (!j.contains("id")) bad_key(path + ".id", "missing");
    Bus b;
    b.id = bus_id(j.at("id"), path + ".id");
    b.model.M = nonneg(j, "M", path);
    b.model.D = positive(j, "D", path);
    b.model.tau = nonneg(j, "tau", path, 0.0);
    if (j.contains("controller")) b.model.controller = parse_controller(j.at("controller"), path + ".controller");
    if (j.contains("first_order")) {
        const json& f = j.at("first_order");
        const std::string fp = path + ".first_order";
        expect_object(f, fp, {"a", "b", "eps"});
        b.first_order = FirstOrderFit{positive(f, "a", fp), positive(f, "b", fp), nonneg(f, "eps", fp)};
    }
    return b;
}

Line parse_line(const json& j, const std::string& path) {
    expect_object(j, path, {"from", "to", "B"});
    if (!j.contains("from")) bad_key(path + ".from", "missing");
    if (!j.contains("to")) bad_key(path + ".to", "missing");
    return {bus_id(j.at("from"), path + ".from"), bus_id(j.at("to"), path + ".to"), positive(j, "B", path)};
}

std::size_t line_of(std::string_view text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace

double default_dt(const NetworkModel& net, double eta) {
    double dt = 1e-2;
    for (const Bus& b : net.buses())
        if (b.model.delayed()) dt = std::min(dt, b.model.tau / 20.0);
    SimConfig probe;
    probe.derivative_filter_eta = eta;
    const double w = natural_frequency_estimate(net, probe);
    if (w > 0.0) dt = std::min(dt, 0.1 / w);
    return dt;
}

ConfigBundle parse_config_text(std::string_view text) {
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        std::ostringstream os;
        os << "line " << line_of(text, e.byte == 0 ? 0 : e.byte - 1) << ": " << e.what();
        fail(ErrorKind::ParseError, os.str());
    }
    expect_object(root, "$", {"buses", "lines", "h", "sim"});
    if (!root.contains("buses")) bad_key("$.buses", "missing");
    if (!root.at("buses").is_array()) bad_key("$.buses", "expected a list");

    std::vector<Bus> buses;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < root.at("buses").size(); ++i) {
        const std::string path = "buses[" + std::to_string(i) + "]";
        buses.push_back(parse_bus(root.at("buses")[i], path));
        if (!ids.insert(buses.back().id).second) invalid(path + ".id", "duplicate id '" + buses.back().id + "'");
    }
    if (buses.empty()) invalid("buses", "at least one bus is required");

    std::vector<Line> lines;
    if (root.contains("lines")) {
        if (!root.at("lines").is_array()) bad_key("$.lines", "expected a list");
        for (std::size_t i = 0; i < root.at("lines").size(); ++i) {
            const std::string path = "lines[" + std::to_string(i) + "]";
            Line l = parse_line(root.at("lines")[i], path);
            if (!ids.contains(l.from)) invalid(path + ".from", "unknown bus '" + l.from + "'");
            if (!ids.contains(l.to)) invalid(path + ".to", "unknown bus '" + l.to + "'");
            if (l.from == l.to) invalid(path, "self loop at bus '" + l.from + "'");
            lines.push_back(std::move(l));
        }
    }

    std::optional<double> omega0;
    if (root.contains("h")) {
        expect_object(root.at("h"), "h", {"omega0"});
        omega0 = positive(root.at("h"), "omega0", "h");
    }

    std::optional<NetworkModel> net;
    try {
        net.emplace(std::move(buses), std::move(lines));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ParseError) throw;
        fail(ErrorKind::ValidationError, e.what());
    }

    std::optional<SimConfig> sim;
    if (root.contains("sim")) {
        const json& s = root.at("sim");
        expect_object(s, "sim", {"dt", "t_end", "disturbance", "derivative_filter_eta"});
        SimConfig c;
        c.derivative_filter_eta = positive(s, "derivative_filter_eta", "sim", 0.01);
        c.dt = s.contains("dt") ? positive(s, "dt", "sim") : default_dt(*net, c.derivative_filter_eta);
        c.t_end = positive(s, "t_end", "sim", 20.0);
        if (s.contains("disturbance")) {
            const json& d = s.at("disturbance");
            if (!d.is_object()) bad_key("sim.disturbance", "expected an object keyed by bus id");
            for (const auto& [key, value] : d.items()) {
                const std::string path = "sim.disturbance." + key;
                if (!ids.contains(key)) invalid(path, "unknown bus '" + key + "'");
                if (!value.is_number()) bad_key(path, "expected a number");
                c.disturbance[key] = value.get<double>();
                if (!std::isfinite(c.disturbance[key])) invalid(path, "must be finite");
            }
        }
        sim = c;
    }
    return {std::move(*net), omega0, sim};
}

ConfigBundle parse_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::ParseError, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string emit_config(const ConfigBundle& cfg) {
    json root;
    root["buses"] = json::array();
    for (const Bus& b : cfg.network.buses()) {
        json jb;
        jb["id"] = b.id;
        jb["M"] = b.model.M;
        jb["D"] = b.model.D;
        jb["tau"] = b.model.tau;
        const Controller& c = b.model.controller;
        json jc;
        jc["type"] = std::string(to_string(c.kind));
        switch (c.kind) {
            case ControllerKind::None: break;
            case ControllerKind::Droop: jc["K"] = c.K; break;
            case ControllerKind::VirtualInertia:
                jc["K"] = c.K;
                jc["Knu"] = c.Knu;
                break;
            case ControllerKind::IDroop:
                jc["K"] = c.K;
                jc["Knu"] = c.Knu;
                jc["Kdelta"] = c.Kdelta;
                break;
        }
        jb["controller"] = jc;
        if (b.first_order) jb["first_order"] = {{"a", b.first_order->a}, {"b", b.first_order->b}, {"eps", b.first_order->eps}};
        root["buses"].push_back(jb);
    }
    root["lines"] = json::array();
    for (const Line& l : cfg.network.lines()) root["lines"].push_back({{"from", l.from}, {"to", l.to}, {"B", l.B}});
    if (cfg.omega0) root["h"] = {{"omega0", *cfg.omega0}};
    if (cfg.sim) {
        json d = json::object();
        for (const auto& [id, p] : cfg.sim->disturbance) d[id] = p;
        root["sim"] = {{"dt", cfg.sim->dt},
                       {"t_end", cfg.sim->t_end},
                       {"disturbance", d},
                       {"derivative_filter_eta", cfg.sim->derivative_filter_eta}};
    }
    return root.dump(2) + "\n";
}

}  // namespace gridcert

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "gridcert/network.hpp"
#include "gridcert/sim.hpp"

namespace gridcert {

/// Contents of a network configuration file.
///
/// Top-level keys: `buses` (list of {id, M, D, tau, controller{type, K, Knu, Kdelta},
/// optional first_order{a, b, eps}}), `lines` (list of {from, to, B}), `h` ({omega0}) and
/// optional `sim` ({dt, t_end, disturbance{bus_id: power}, derivative_filter_eta}).
struct ConfigBundle {
    NetworkModel network;
    std::optional<double> omega0;
    std::optional<SimConfig> sim;

    friend bool operator==(const ConfigBundle&, const ConfigBundle&) = default;
};

/// Throws ParseError (with line number for syntax errors, key path for schema errors) and
/// ValidationError naming the offending field.
ConfigBundle parse_config_text(std::string_view text);
ConfigBundle parse_config(const std::filesystem::path& path);

/// JSON text that parses back to an identical bundle.
std::string emit_config(const ConfigBundle& cfg);

/// Step used when the file gives none: min(1e−2, τ_min/20, 0.1/ω_nat).
double default_dt(const NetworkModel& net, double derivative_filter_eta = 0.01);

}  // namespace gridcert

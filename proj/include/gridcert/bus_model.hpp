#pragma once

#include <string>

#include "gridcert/argument_principle.hpp"
#include "gridcert/frequency_grid.hpp"
#include "gridcert/rational_tf.hpp"

namespace gridcert {

enum class ControllerKind { None, Droop, VirtualInertia, IDroop };

std::string_view to_string(ControllerKind kind);

/// Local frequency controller x = −c(s)·ω.
///
/// Droop: c = K. Virtual inertia: c = K + Knu·s. iDroop: c = (Knu·s + Kdelta·K)/(s + Kdelta).
struct Controller {
    ControllerKind kind = ControllerKind::None;
    double K = 0.0;
    double Knu = 0.0;
    double Kdelta = 0.0;

    static Controller none() { return {}; }
    static Controller droop(double K) { return {ControllerKind::Droop, K, 0.0, 0.0}; }
    static Controller virtual_inertia(double K, double Knu) { return {ControllerKind::VirtualInertia, K, Knu, 0.0}; }
    static Controller idroop(double K, double Knu, double Kdelta) { return {ControllerKind::IDroop, K, Knu, Kdelta}; }

    /// Throws InvalidParameter on negative or non-finite gains and on iDroop with Kdelta ≤ 0.
    void validate() const;
    /// c(0).
    double dc_gain() const noexcept { return kind == ControllerKind::None ? 0.0 : K; }

    friend bool operator==(const Controller&, const Controller&) = default;
};

RationalTF controller_tf(const Controller& c);

/// Swing-equation bus M·ω̇ = −D·ω + x + u with x = −e^{−sτ}c(s)·ω.
struct BusModel {
    double M = 0.0;
    double D = 1.0;
    Controller controller;
    double tau = 0.0;

    /// Throws InvalidParameter when D ≤ 0, M < 0, tau < 0 or the controller is invalid.
    void validate() const;
    bool delayed() const noexcept { return tau > 0.0; }
    /// Inertia seen by the swing equation once delay-free virtual inertia is absorbed.
    double effective_inertia() const noexcept;

    friend bool operator==(const BusModel&, const BusModel&) = default;
};

/// p(s) = 1/(Ms + D + c(s)) for a delay-free bus. Throws DelayPresent when tau > 0 and
/// InternallyUnstable when p has a pole with Re ≥ 0.
RationalTF bus_rational(const BusModel& bus);

/// p(s) = 1/(Ms + D + e^{−sτ}c(s)), delay on the controller path only.
Complex bus_eval(const BusModel& bus, Complex s);

/// G(s) = d_c(s)(Ms + D) + e^{−sτ}n_c(s) where c = n_c/d_c; the zeros of G are the
/// poles of p (d_c is Hurwitz for every valid controller).
QuasiPolynomial bus_characteristic(const BusModel& bus);

enum class Verdict { Stable, Unstable, Inconclusive };

std::string_view to_string(Verdict v);

struct StabilityReport {
    Verdict verdict = Verdict::Inconclusive;
    int rhp_roots = 0;
    std::string detail;
};

/// Checks p ∈ H: pole check for tau = 0, argument-principle scan of G(jω) otherwise.
/// The grid must span at least [1e−4, 1e4] rad/s.
StabilityReport bus_internal_stability(const BusModel& bus, const FrequencyGrid& grid);

/// Upper bound on sup_{ω ≥ Ω} |p(jω)|, or +inf when no bound can be derived.
double bus_tail_gain_bound(const BusModel& bus, double omega);

}  // namespace gridcert

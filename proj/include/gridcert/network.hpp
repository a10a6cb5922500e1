#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gridcert/argument_principle.hpp"
#include "gridcert/bus_model.hpp"
#include "gridcert/spr.hpp"

namespace gridcert {

/// Coarse first-order fit p ≈ a/(s+b) with envelope ε; ω0 comes from the network's h.
struct FirstOrderFit {
    double a = 0.0;
    double b = 0.0;
    double eps = 0.0;

    FirstOrderDesign with_omega0(double omega0) const { return {a, b, eps, omega0}; }
    friend bool operator==(const FirstOrderFit&, const FirstOrderFit&) = default;
};

struct Bus {
    std::string id;
    BusModel model;
    std::optional<FirstOrderFit> first_order;

    friend bool operator==(const Bus&, const Bus&) = default;
};

struct Line {
    std::string from;
    std::string to;
    double B = 0.0;

    friend bool operator==(const Line&, const Line&) = default;
};

/// Buses joined by lossless lines (DC power-flow coupling). Validated on construction:
/// unique bus ids, valid bus parameters, B > 0, no self loops, no duplicate unordered pairs,
/// and every endpoint names an existing bus.
class NetworkModel {
public:
    NetworkModel(std::vector<Bus> buses, std::vector<Line> lines);

    const std::vector<Bus>& buses() const noexcept { return buses_; }
    const std::vector<Line>& lines() const noexcept { return lines_; }
    std::size_t size() const noexcept { return buses_.size(); }

    /// Throws UnknownBus.
    std::size_t index_of(std::string_view id) const;
    /// Connected components as lists of bus indices, in first-appearance order.
    std::vector<std::vector<std::size_t>> components() const;
    bool connected() const { return components().size() == 1; }
    bool delay_free() const;

    /// Network restricted to the given buses and the lines among them.
    NetworkModel subnetwork(const std::vector<std::size_t>& indices) const;

    friend bool operator==(const NetworkModel&, const NetworkModel&) = default;

private:
    std::vector<Bus> buses_;
    std::vector<Line> lines_;
};

using LaplacianMatrix = Eigen::MatrixXd;

/// [L]_ij = −B_ij for each line; diagonal = sum of incident susceptances.
LaplacianMatrix laplacian(const NetworkModel& net);
/// [L]_ii for the named bus. Throws UnknownBus.
double diag_susceptance(const NetworkModel& net, std::string_view id);

/// ẋ = A x + B d for the delay-free swing network.
///
/// States: θ for every bus, ω for every bus with nonzero effective inertia (load buses with
/// M_eff = 0 are eliminated algebraically), then one filter state z per iDroop bus with
/// x = −Knu·ω − z and ż = Kdelta((K − Knu)ω − z).
struct StateSpace {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    std::vector<std::string> labels;
    /// Row i expresses ω_i as C_omega.row(i)·x + D_omega.row(i)·d.
    Eigen::MatrixXd C_omega;
    Eigen::MatrixXd D_omega;
};

/// Throws DelayPresent when any bus has τ > 0 and SingularMassMatrix when an algebraic
/// bus has no damping to solve for ω.
StateSpace assemble_state_space(const NetworkModel& net);

struct SpectralReport {
    Verdict verdict = Verdict::Inconclusive;
    double abscissa = 0.0;   ///< max Re over eigenvalues excluding the angle mode
    int zero_modes = 0;
    double tol = 0.0;
    std::vector<Complex> eigenvalues;
    std::string detail;
};

/// Stable iff exactly one eigenvalue lies within tol of 0 (uniform angle translation) and
/// all others have Re < −tol, with tol = 1e−7·(1 + spectral radius) unless given.
/// Throws DisconnectedNetwork when more than one zero mode is present.
SpectralReport spectral_stability(const Eigen::MatrixXd& A, std::optional<double> tol = std::nullopt);

/// Per-component spectral analysis; the verdict is the worst over components.
SpectralReport spectral_stability(const NetworkModel& net);

struct GlobalReport {
    Verdict verdict = Verdict::Inconclusive;
    int rhp_zeros = 0;
    RhpZeroCount scan;
    double indentation = 0.0;
    std::string detail;
};

/// Closed-loop stability of the delayed network by the argument principle applied to
/// det(s·diag(G_i) + diag(d_c,i)·L)/s along the imaginary axis (G_i the bus characteristic
/// quasi-polynomials, d_c,i the controller denominators). The angle mode is divided out
/// exactly in the basis [1/√n, 1⊥]; the scan starts at ρ = grid.min()/10.
/// Throws DisconnectedNetwork, IndentationAmbiguous or GridTooCoarse.
GlobalReport nyquist_global_check(const NetworkModel& net, const FrequencyGrid& grid);

/// Value of the scanned function at s (exposed for tests).
Complex network_characteristic(const NetworkModel& net, Complex s);

enum class CertStatus { Admitted, BudgetExceeded, AssumptionViolated, NoCertificate, NumericalFailure };
enum class CertRoute { Direct, FirstOrderEnvelope, FirstOrderVerified };

std::string_view to_string(CertStatus s);
std::string_view to_string(CertRoute r);

struct Certificate {
    std::string bus_id;
    CertStatus status = CertStatus::NumericalFailure;
    CertRoute route = CertRoute::Direct;
    double gamma_min = 0.0;
    double gamma_rel_tol = GammaSearch::kRelTol;
    double margin = 0.0;
    double margin_tol = 0.0;
    double susceptance_budget = 0.0;  ///< 1/γ_min
    double diag_susceptance = 0.0;    ///< [L_B]_ii
    bool admitted = false;
    std::optional<double> first_order_gamma;
    std::optional<EnvelopeResult> envelope;
    double grid_min = 0.0;
    double grid_max = 0.0;
    std::size_t grid_points = 0;
    std::string message;
};

struct NetworkCertificate {
    std::vector<Certificate> buses;
    bool certified = false;
    double omega0 = 0.0;
};

/// Per-bus certificate (own parameters and own [L_B]_ii only).
Certificate certify_bus_in_network(const Bus& bus, double diag_susceptance, const HFilter& h,
                                   const FrequencyGrid& grid);

/// Decentralized protocol: every bus computes its γ_min and is admitted when
/// γ_min·[L_B]_ii ≤ 1. Buses are processed in parallel. A bus carrying a first-order fit
/// uses γ from the closed form when either its envelope holds or the direct margin at that
/// γ is positive; otherwise the direct bisection route is used.
NetworkCertificate protocol_certify_network(const NetworkModel& net, const HFilter& h, const FrequencyGrid& grid);

}  // namespace gridcert

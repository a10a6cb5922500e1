#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gridcert/bus_model.hpp"
#include "gridcert/frequency_grid.hpp"
#include "gridcert/rational_tf.hpp"

namespace gridcert {

/// Multiplier h(s) of the decentralized test. Only the canonical first-order family
/// h = 1/(s/ω0 + 1) is constructed; s·h is verified positive real on construction.
class HFilter {
public:
    static HFilter canonical(double omega0);

    const RationalTF& tf() const noexcept { return h_; }
    double omega0() const noexcept { return omega0_; }
    Complex operator()(Complex s) const { return h_.eval(s); }

private:
    HFilter(RationalTF h, double omega0) : h_(std::move(h)), omega0_(omega0) {}
    RationalTF h_;
    double omega0_;
};

// ---------------------------------------------------------------------------
// Positive realness

struct PrCheck {
    bool holds = false;
    bool inconclusive = false;
    double min_real = 0.0;      ///< min over the grid (refined) of Re g(jω)
    double omega_at_min = 0.0;
    std::string reason;          ///< why it fails, empty when it holds
};

/// Positive realness of a real-rational g: no open-RHP poles, imaginary-axis poles simple
/// with positive residue, Re g(jω) ≥ −tol on the grid, and a nonnegative asymptote.
PrCheck is_pr(const RationalTF& g, const FrequencyGrid& grid, double tol);

inline constexpr double kDefaultSprShift = 1e-6;

/// g is SPR when every pole satisfies Re p < −shift and g(s − shift) is PR.
PrCheck is_spr(const RationalTF& g, const FrequencyGrid& grid, double tol, double shift = kDefaultSprShift);

// ---------------------------------------------------------------------------
// Decentralized certificate

/// Frequency response of a bus plant p(jω) together with a high-frequency tail bound.
class PlantResponse {
public:
    static PlantResponse from_bus(const BusModel& bus);
    static PlantResponse from_tf(const RationalTF& p);

    Complex operator()(double omega) const { return eval_(omega); }
    /// Upper bound on sup_{ω ≥ Ω} |p(jω) − p∞|; +inf when unavailable.
    double tail_gain_bound(double omega) const { return tail_(omega); }
    /// Real high-frequency limit p∞ (0 for strictly proper plants).
    double feedthrough() const { return feedthrough_; }

private:
    std::function<Complex(double)> eval_;
    std::function<double(double)> tail_;
    double feedthrough_ = 0.0;
};

struct MarginResult {
    double margin = 0.0;        ///< min over ω of Re{h(jω)((γ/2)jω + p(jω))}
    double omega_at_min = 0.0;
    double tol = 0.0;           ///< strictness threshold 1e−6·(1 + max|h·p|) used for `valid`
    double tail_omega = 0.0;    ///< beyond this frequency the tail bound certifies positivity
    double tail_bound = 0.0;    ///< lower bound on the real part for ω ≥ tail_omega
    bool valid = false;         ///< margin > tol and tail certified
};

/// Pointwise Re{h(jω)((γ/2)jω + p(jω))}.
double certificate_real_part(const HFilter& h, Complex p_jw, double gamma, double omega);

/// Margin for an arbitrary plant response; no internal stability check.
MarginResult certify_response(const HFilter& h, const PlantResponse& p, double gamma, const FrequencyGrid& grid);

/// Margin of the decentralized test for a bus. Throws AssumptionViolated when the bus is
/// not internally stable and TailUnbounded when positivity beyond the grid cannot be shown.
MarginResult certify_bus(const HFilter& h, const BusModel& bus, double gamma, const FrequencyGrid& grid);

struct GammaSearch {
    static constexpr double kLower = 1e-6;
    static constexpr double kCap = 1e6;
    static constexpr int kMaxIterations = 60;
    static constexpr double kRelTol = 1e-4;
};

struct MinGammaResult {
    double gamma_min = 0.0;
    MarginResult at_gamma_min;
    int iterations = 0;
    double rel_tol = GammaSearch::kRelTol;
};

/// Smallest γ passing the test (bisection in log γ, monotone since s·h is PR).
/// Throws NoCertificate when even γ = 1e6 fails.
MinGammaResult min_gamma_response(const HFilter& h, const PlantResponse& p, const FrequencyGrid& grid,
                                  double rel_tol = GammaSearch::kRelTol);
MinGammaResult min_gamma(const HFilter& h, const BusModel& bus, const FrequencyGrid& grid,
                         double rel_tol = GammaSearch::kRelTol);

/// Plug-and-play admission: γ_min · Σ B ≤ 1.
bool admit(double gamma_min, double susceptance_sum);

// ---------------------------------------------------------------------------
// First-order relaxation p ≈ a/(s + b) with envelope ε

struct FirstOrderDesign {
    double a = 0.0;
    double b = 0.0;
    double eps = 0.0;
    double omega0 = 0.0;

    /// Throws InvalidDesign on nonpositive a, b, omega0 or negative eps.
    void validate() const;
    friend bool operator==(const FirstOrderDesign&, const FirstOrderDesign&) = default;
};

/// Closed-form test of h((γ/2)s + a/(s+b)) − ε ∈ PR:
///   a − εb ≥ 0  and  b(γω0/2 − ε) − εω0 ≥ ω0/(b+ω0)·(√(a − εb) − √(b(γω0/2 − ε)))².
/// Returns false when γω0/2 < ε.
bool first_order_protocol(const FirstOrderDesign& d, double gamma);

/// h((γ/2)s + a/(s+b)) − ε as a rational function (the object the closed form certifies).
RationalTF first_order_relaxation(const FirstOrderDesign& d, double gamma);

/// Smallest γ passing first_order_protocol. Throws NoCertificate when a − εb < 0 or
/// nothing up to the cap passes.
double min_gamma_first_order(const FirstOrderDesign& d, double rel_tol = GammaSearch::kRelTol);

struct EnvelopeResult {
    bool passed = false;
    double worst_ratio = 0.0;   ///< max over ω of |p(jω) − a/(jω+b)| / (ε√(1+ω²/ω0²))
    double worst_omega = 0.0;
};

EnvelopeResult envelope_check(const BusModel& bus, const FirstOrderDesign& d, const FrequencyGrid& grid);

/// Picks ω0 from the candidates maximizing the worst certificate margin at γ = 1 over the
/// expected models; ties go to the smaller ω0. Throws NoFeasibleH when no candidate works.
HFilter choose_h(const std::vector<RationalTF>& expected_models, std::vector<double> candidate_omega0s,
                 const FrequencyGrid& grid);

}  // namespace gridcert

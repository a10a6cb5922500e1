#pragma once

#include <algorithm>
#include <functional>
#include <string>

#include "gridcert/frequency_grid.hpp"
#include "gridcert/polynomial.hpp"

namespace gridcert {

/// base(s) + e^{−sτ}·delayed(s): characteristic functions of delayed feedback loops.
struct QuasiPolynomial {
    Polynomial base;
    Polynomial delayed;
    double tau = 0.0;

    Complex operator()(Complex s) const { return base(s) + std::exp(-s * tau) * delayed(s); }

    int degree() const noexcept { return std::max(base.degree(), delayed.degree()); }
    /// Coefficient of s^degree() in the undelayed part (zero for advanced type).
    double lead() const noexcept { return base[static_cast<std::size_t>(degree())]; }
    /// |delayed lead / undelayed lead| at the top degree; > 0 means neutral type.
    double neutral_ratio() const noexcept;
};

enum class ZeroCountStatus { Ok, NearAxisZero, TailUnresolved, NonInteger };

/// Outcome of an argument-principle scan over the closed right half-plane.
struct RhpZeroCount {
    ZeroCountStatus status = ZeroCountStatus::Ok;
    int zeros = 0;               ///< rounded count (valid when status == Ok)
    double raw = 0.0;            ///< unrounded winding estimate
    double min_rel_modulus = 0;  ///< min over the scan of |f| / scale
    double omega_at_min = 0.0;
    double tail_omega = 0.0;     ///< frequency beyond which the leading term dominates
    std::string detail;
};

struct ScanOptions {
    double max_phase_step = 0.7853981633974483;  // π/4
    int max_refine_depth = 40;
    double tail_limit = 1e9;
    double zero_tol = 1e-9;
};

/// Counts zeros with Re s ≥ 0 of an entire function f that is real on the real axis and
/// asymptotic to lead·s^degree (up to a bounded relative deviation `neutral_dev` < 1).
///
/// `f_of_omega(ω)` must return f(jω). The scan starts at `start_omega` (0, or a small
/// indentation radius when f is only defined away from the origin) and continues over the
/// grid, bisecting any interval whose phase step exceeds `max_phase_step`. Throws
/// GridTooCoarse when bisection cannot resolve a step and IndentationAmbiguous when the
/// value at a nonzero start is not essentially real.
RhpZeroCount count_rhp_zeros(const std::function<Complex(double)>& f_of_omega, int degree, double lead,
                             double neutral_dev, const FrequencyGrid& grid, double start_omega,
                             const ScanOptions& opts = {});

}  // namespace gridcert

#pragma once

#include <map>
#include <string>
#include <vector>

#include "gridcert/network.hpp"

namespace gridcert {

struct SimConfig {
    double dt = 1e-3;
    double t_end = 20.0;
    /// Step power d_P per bus id, applied from t = 0.
    std::map<std::string, double> disturbance;
    /// Time constant of the filtered derivative s/(ηs + 1) used for delayed virtual inertia.
    double derivative_filter_eta = 0.01;

    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct BusTrace {
    std::string id;
    std::vector<double> theta;
    std::vector<double> omega;
    std::vector<double> x;
    /// Controller internal states by name ("z" for iDroop, "q" for the derivative filter).
    std::map<std::string, std::vector<double>> internal;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<BusTrace> buses;
    bool truncated = false;
    std::string reason;

    std::size_t samples() const noexcept { return times.size(); }
};

/// Fixed-step RK4 from a flat start with zero pre-history. Delayed buses read ω(t − τ)
/// from a ring buffer with linear interpolation. Delay-free buses use the same equations
/// as assemble_state_space, so both agree up to integration error.
///
/// Throws StepTooLarge when dt > τ/20 for a delayed bus or dt > 0.1/ω_nat for the fastest
/// natural-frequency estimate, UnknownBus for a disturbance on a missing bus and
/// SingularMassMatrix for an algebraic bus with no damping. A state beyond 1e12 (or
/// nonfinite) stops the run with `truncated` set.
Trajectory simulate(const NetworkModel& net, const SimConfig& cfg);

/// Upper estimate of the fastest natural frequency (rad/s) the step must resolve.
double natural_frequency_estimate(const NetworkModel& net, const SimConfig& cfg);

/// Ring buffer of uniformly sampled values with zero history before t = 0.
class DelayLine {
public:
    DelayLine(double dt, double max_delay);

    /// Appends the sample at time samples()·dt.
    void push(double value);
    /// Linear interpolation at time t; 0 for t < 0. Throws InvalidParameter when t lies
    /// outside the retained window or beyond the newest sample.
    double at(double t) const;
    std::size_t samples() const noexcept { return count_; }

private:
    double dt_;
    std::vector<double> ring_;
    std::size_t count_ = 0;
};

enum class Trend { Decaying, Growing, Inconclusive };
std::string_view to_string(Trend t);

struct TrendReport {
    Trend trend = Trend::Inconclusive;
    double ratio = 0.0;            ///< trailing amplitude / leading amplitude
    double leading_amplitude = 0.0;
    double trailing_amplitude = 0.0;
};

/// Compares the oscillation amplitude max|ω − window mean| of the trailing (1 − split)
/// part of the run with the leading part, taking the worst bus. The window mean removes the
/// steady frequency offset a step disturbance leaves behind. Ratio > 2 is growing, < 0.5
/// decaying. A truncated (diverged) run is growing. Throws TooShort below 100 samples.
TrendReport detect_stability(const Trajectory& traj, double split = 0.5);

struct BusMetrics {
    std::string id;
    double nadir = 0.0;       ///< min ω
    double offset = 0.0;      ///< mean ω over the final 10% of the horizon
    double max_rocof = 0.0;   ///< max |Δω/Δt|
    double trailing_variance = 0.0;
};

struct FrequencyMetrics {
    std::vector<BusMetrics> buses;
    double settle_tol = 0.0;
};

/// Throws NotSettled when the ω variance over the final 10% exceeds settle_tol on any bus.
FrequencyMetrics frequency_metrics(const Trajectory& traj, double settle_tol = 1e-6);

/// Decay rate σ > 0 of |ω_bus(t) − reference| fitted by least squares on the logarithm of its
/// local maxima inside [t_from, t_to]. Throws TooShort with fewer than three usable peaks.
double dominant_decay_rate(const Trajectory& traj, std::size_t bus, double t_from, double t_to, double reference);

}  // namespace gridcert

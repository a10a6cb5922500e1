#include "gridcert/bus_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gridcert/error.hpp"

namespace gridcert {

namespace {

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

// |c(jω)| ≤ bounded + slope·ω for all ω.
struct ControllerBound {
    double bounded = 0.0;
    double slope = 0.0;
};

ControllerBound controller_bound(const Controller& c) {
    switch (c.kind) {
        case ControllerKind::None: return {};
        case ControllerKind::Droop: return {c.K, 0.0};
        case ControllerKind::VirtualInertia: return {c.K, c.Knu};
        case ControllerKind::IDroop: return {std::max(c.K, c.Knu), 0.0};
    }
    return {};
}

}  // namespace

std::string_view to_string(ControllerKind kind) {
    switch (kind) {
        case ControllerKind::None: return "none";
        case ControllerKind::Droop: return "droop";
        case ControllerKind::VirtualInertia: return "virtual_inertia";
        case ControllerKind::IDroop: return "idroop";
    }
    return "unknown";
}

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::Stable: return "stable";
        case Verdict::Unstable: return "unstable";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

void Controller::validate() const {
    if (!finite_nonneg(K) || !finite_nonneg(Knu) || !finite_nonneg(Kdelta))
        fail(ErrorKind::InvalidParameter, "controller gains must be finite and nonnegative");
    if (kind == ControllerKind::IDroop && !(Kdelta > 0.0))
        fail(ErrorKind::InvalidParameter, "iDroop requires Kdelta > 0");
}

RationalTF controller_tf(const Controller& c) {
    c.validate();
    switch (c.kind) {
        case ControllerKind::None: return RationalTF();
        case ControllerKind::Droop: return RationalTF::constant(c.K);
        case ControllerKind::VirtualInertia: return {Polynomial{c.K, c.Knu}, Polynomial::constant(1.0)};
        case ControllerKind::IDroop: return {Polynomial{c.Kdelta * c.K, c.Knu}, Polynomial{c.Kdelta, 1.0}};
    }
    return RationalTF();
}

void BusModel::validate() const {
    if (!finite_nonneg(M)) fail(ErrorKind::InvalidParameter, "inertia M must be finite and >= 0");
    if (!std::isfinite(D) || !(D > 0.0)) fail(ErrorKind::InvalidParameter, "damping D must be > 0");
    if (!finite_nonneg(tau)) fail(ErrorKind::InvalidParameter, "delay tau must be finite and >= 0");
    controller.validate();
}

double BusModel::effective_inertia() const noexcept {
    if (controller.kind == ControllerKind::VirtualInertia && !delayed()) return M + controller.Knu;
    return M;
}

RationalTF bus_rational(const BusModel& bus) {
    bus.validate();
    if (bus.delayed()) fail(ErrorKind::DelayPresent, "bus has a delay; no rational representation");
    // p = d_c/(d_c(Ms + D) + n_c), formed directly so that absorbed virtual inertia gives
    // bit-identical coefficients to the equivalent droop bus.
    const RationalTF c = controller_tf(bus.controller);
    RationalTF p(c.den(), c.den() * Polynomial{bus.D, bus.M} + c.num());
    for (Complex pole : p.poles()) {
        if (pole.real() > -1e-12 * (1.0 + std::abs(pole))) {
            std::ostringstream os;
            os << "pole at " << pole.real() << (pole.imag() < 0 ? "-" : "+") << std::abs(pole.imag()) << "j";
            fail(ErrorKind::InternallyUnstable, os.str());
        }
    }
    return p;
}

QuasiPolynomial bus_characteristic(const BusModel& bus) {
    bus.validate();
    const RationalTF c = controller_tf(bus.controller);
    QuasiPolynomial q;
    q.base = c.den() * Polynomial{bus.D, bus.M};
    if (bus.delayed()) {
        q.delayed = c.num();
        q.tau = bus.tau;
    } else {
        q.base = q.base + c.num();
    }
    return q;
}

Complex bus_eval(const BusModel& bus, Complex s) {
    const QuasiPolynomial g = bus_characteristic(bus);
    const RationalTF c = controller_tf(bus.controller);
    const Complex value = g(s);
    const double r = std::abs(s);
    const double scale = g.base.abs_sum(r) + std::abs(std::exp(-s * g.tau)) * g.delayed.abs_sum(r);
    if (std::abs(value) <= 1e-12 * scale) {
        std::ostringstream os;
        os << "bus characteristic vanishes at s = " << s.real() << (s.imag() < 0 ? "-" : "+") << std::abs(s.imag()) << "j";
        fail(ErrorKind::EvaluationAtPole, os.str());
    }
    return c.den()(s) / value;
}

StabilityReport bus_internal_stability(const BusModel& bus, const FrequencyGrid& grid) {
    bus.validate();
    if (grid.min() > 1e-4 || grid.max() < 1e4)
        fail(ErrorKind::InvalidGrid, "internal stability scan needs a grid spanning [1e-4, 1e4] rad/s");

    StabilityReport rep;
    if (!bus.delayed()) {
        try {
            (void)bus_rational(bus);
            rep.verdict = Verdict::Stable;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::InternallyUnstable) throw;
            const QuasiPolynomial g = bus_characteristic(bus);
            for (Complex r : g.base.roots())
                if (r.real() >= 0.0) ++rep.rhp_roots;
            rep.verdict = Verdict::Unstable;
            rep.detail = e.what();
        }
        return rep;
    }

    const QuasiPolynomial g = bus_characteristic(bus);
    const double ratio = g.neutral_ratio();
    if (ratio > 1.0 + 1e-9) {
        rep.verdict = Verdict::Unstable;
        rep.rhp_roots = -1;
        rep.detail = "neutral-type characteristic with delayed leading coefficient dominating: infinitely many RHP roots";
        return rep;
    }
    if (ratio >= 1.0 - 1e-9) {
        rep.verdict = Verdict::Inconclusive;
        rep.detail = "neutral-type characteristic on the stability boundary";
        return rep;
    }

    const RhpZeroCount count = count_rhp_zeros([&](double w) { return g(Complex(0.0, w)); }, g.degree(), g.lead(),
                                               ratio, grid, 0.0);
    if (count.status != ZeroCountStatus::Ok) {
        rep.verdict = Verdict::Inconclusive;
        rep.detail = count.detail;
        return rep;
    }
    rep.rhp_roots = count.zeros;
    rep.verdict = count.zeros == 0 ? Verdict::Stable : Verdict::Unstable;
    std::ostringstream os;
    os << "winding count " << count.raw << ", min |G|/scale " << count.min_rel_modulus << " at omega "
       << count.omega_at_min;
    rep.detail = os.str();
    return rep;
}

double bus_tail_gain_bound(const BusModel& bus, double omega) {
    const auto& c = bus.controller;
    const ControllerBound cb = controller_bound(c);
    const bool vi = c.kind == ControllerKind::VirtualInertia;
    constexpr double inf = std::numeric_limits<double>::infinity();

    // |F(jω)| ≥ α·ω − β for F = Mjω + D + e^{−jωτ}c(jω).
    double alpha = bus.M;
    double beta = bus.D + cb.bounded;
    if (vi) alpha += bus.delayed() ? -cb.slope : cb.slope;

    if (alpha > 0.0) {
        const double lower = alpha * omega - beta;
        return lower > 0.0 ? 1.0 / lower : inf;
    }
    if (alpha < 0.0) return inf;
    // M_eff = 0: delay-free controllers here have Re c(jω) ≥ 0, so |F| ≥ Re F ≥ D.
    if (!bus.delayed()) return 1.0 / bus.D;
    return bus.D > cb.bounded ? 1.0 / (bus.D - cb.bounded) : inf;
}

}  // namespace gridcert

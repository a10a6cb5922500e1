#include "gridcert/spr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "gridcert/error.hpp"

namespace gridcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Minimum {
    double value = kInf;
    double omega = 0.0;
};

// Golden-section search for a local minimum of fn over [lo, hi] in log-frequency.
Minimum golden_refine(const std::function<double(double)>& fn, double lo, double hi, int iters = 60) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = std::log(lo);
    double b = std::log(hi);
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = fn(std::exp(c));
    double fd = fn(std::exp(d));
    for (int i = 0; i < iters && (b - a) > 1e-12; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = fn(std::exp(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = fn(std::exp(d));
        }
    }
    return fc < fd ? Minimum{fc, std::exp(c)} : Minimum{fd, std::exp(d)};
}

// Grid minimum of fn, refined around the few lowest local minima.
Minimum refined_grid_min(const std::function<double(double)>& fn, const std::vector<double>& omegas,
                         const std::vector<double>& values) {
    Minimum best;
    std::vector<std::size_t> local;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] < best.value) best = {values[i], omegas[i]};
        const bool left = i == 0 || values[i] <= values[i - 1];
        const bool right = i + 1 == values.size() || values[i] <= values[i + 1];
        if (left && right) local.push_back(i);
    }
    std::sort(local.begin(), local.end(), [&](auto x, auto y) { return values[x] < values[y]; });
    if (local.size() > 5) local.resize(5);
    for (std::size_t i : local) {
        const double lo = omegas[i == 0 ? 0 : i - 1];
        const double hi = omegas[std::min(i + 1, omegas.size() - 1)];
        if (!(hi > lo)) continue;
        const Minimum m = golden_refine(fn, lo, hi);
        if (m.value < best.value) best = m;
    }
    return best;
}

bool on_imag_axis(Complex p) { return std::abs(p.real()) <= 1e-9 * (1.0 + std::abs(p)); }

}  // namespace

// ---------------------------------------------------------------------------

HFilter HFilter::canonical(double omega0) {
    if (!std::isfinite(omega0) || !(omega0 > 0.0)) fail(ErrorKind::InvalidParameter, "omega0 must be > 0");
    RationalTF h(Polynomial::constant(omega0), Polynomial{omega0, 1.0});
    // s·h = ω0 s/(s + ω0) has Re = ω0ω²/(ω0² + ω²) ≥ 0 and a stable pole: PR for every ω0 > 0.
    const RationalTF sh = RationalTF::s() * h;
    const PrCheck chk = is_pr(sh, FrequencyGrid::default_grid(200), 1e-12);
    if (!chk.holds) fail(ErrorKind::InvalidParameter, "s*h is not positive real: " + chk.reason);
    return HFilter(std::move(h), omega0);
}

PrCheck is_pr(const RationalTF& g, const FrequencyGrid& grid, double tol) {
    PrCheck out;
    const std::vector<Complex> poles = g.poles();
    std::vector<double> axis_freqs;
    for (Complex p : poles) {
        if (on_imag_axis(p)) {
            int mult = 0;
            for (Complex q : poles)
                if (std::abs(q - p) <= 1e-6 * (1.0 + std::abs(p))) ++mult;
            if (mult > 1) {
                out.reason = "repeated imaginary-axis pole";
                return out;
            }
            const Complex pj(0.0, p.imag());
            const Complex residue = g.num()(pj) / g.den().derivative()(pj);
            if (std::abs(residue.imag()) > 1e-6 * std::abs(residue)) {
                out.inconclusive = true;
                out.reason = "imaginary-axis pole with non-real residue";
                return out;
            }
            if (!(residue.real() > 0.0)) {
                out.reason = "imaginary-axis pole with nonpositive residue";
                return out;
            }
            axis_freqs.push_back(std::abs(p.imag()));
        } else if (p.real() > 0.0) {
            out.reason = "pole in the open right half-plane";
            return out;
        }
    }

    auto near_axis_pole = [&](double w) {
        for (double wp : axis_freqs)
            if (std::abs(w - wp) <= 1e-6 * (1.0 + wp)) return true;
        return false;
    };
    auto re = [&](double w) { return g.eval(Complex(0.0, w)).real(); };

    std::vector<double> ws;
    std::vector<double> vals;
    for (double w : grid) {
        if (near_axis_pole(w)) continue;
        ws.push_back(w);
        vals.push_back(re(w));
    }
    Minimum m = ws.empty() ? Minimum{} : refined_grid_min(re, ws, vals);
    if (!near_axis_pole(0.0)) {
        const double at0 = g.eval(Complex(0.0)).real();
        if (at0 < m.value) m = {at0, 0.0};
    }
    out.min_real = m.value;
    out.omega_at_min = m.omega;

    // Behaviour as ω → ∞ from the polynomial part of g.
    const int r = g.relative_degree();
    double asymptote = 0.0;
    if (r == 0) {
        asymptote = g.num().leading() / g.den().leading();
    } else if (r == -1) {
        const Polynomial quotient = divmod(g.num(), g.den()).first;
        if (!(quotient[1] > 0.0)) {
            out.reason = "improper part with nonpositive s coefficient";
            return out;
        }
        asymptote = quotient[0];
    } else if (r < -1) {
        out.reason = "relative degree below -1";
        return out;
    }
    if (asymptote < -tol) {
        out.reason = "negative real part as omega -> infinity";
        return out;
    }
    if (out.min_real < -tol) {
        std::ostringstream os;
        os << "Re g(j omega) = " << out.min_real << " at omega = " << out.omega_at_min;
        out.reason = os.str();
        return out;
    }
    out.holds = true;
    return out;
}

PrCheck is_spr(const RationalTF& g, const FrequencyGrid& grid, double tol, double shift) {
    for (Complex p : g.poles()) {
        if (!(p.real() < -shift)) {
            PrCheck out;
            out.reason = "pole not strictly inside Re s < -shift";
            return out;
        }
    }
    return is_pr(g.shifted(shift), grid, tol);
}

// ---------------------------------------------------------------------------

PlantResponse PlantResponse::from_bus(const BusModel& bus) {
    bus.validate();
    PlantResponse r;
    r.eval_ = [bus](double w) { return bus_eval(bus, Complex(0.0, w)); };
    r.tail_ = [bus](double w) { return bus_tail_gain_bound(bus, w); };
    return r;
}

PlantResponse PlantResponse::from_tf(const RationalTF& p) {
    PlantResponse r;
    r.eval_ = [p](double w) { return p.eval(Complex(0.0, w)); };
    const int m = p.den().degree();
    Polynomial rem = p.num();
    if (p.num().degree() == m) {
        // split off the constant part: p = p∞ + rem/den with deg rem < m
        r.feedthrough_ = p.num().leading() / p.den().leading();
        rem = p.num() - Polynomial::constant(r.feedthrough_) * p.den();
    }
    r.tail_ = [rem, den = p.den(), m](double w) {
        // For ω ≥ Ω: |rem| ≤ Σ|r_k|ω^k and |den| ≥ |d_m|ω^m − Σ_{k<m}|d_k|ω^k; the ratio
        // bound is nonincreasing in ω when deg rem ≤ m.
        if (rem.degree() > m) return kInf;
        double num = 0.0;
        for (int k = 0; k <= rem.degree(); ++k) num += std::abs(rem[k]) * std::pow(w, k - m);
        double d = std::abs(den.leading());
        for (int k = 0; k < m; ++k) d -= std::abs(den[k]) * std::pow(w, k - m);
        return d > 0.0 ? num / d : kInf;
    };
    return r;
}

double certificate_real_part(const HFilter& h, Complex p_jw, double gamma, double omega) {
    const Complex s(0.0, omega);
    return (h(s) * (0.5 * gamma * s + p_jw)).real();
}

MarginResult certify_response(const HFilter& h, const PlantResponse& p, double gamma, const FrequencyGrid& grid) {
    if (!std::isfinite(gamma) || !(gamma > 0.0)) fail(ErrorKind::InvalidParameter, "gamma must be > 0");
    auto value = [&](double w) { return certificate_real_part(h, p(w), gamma, w); };

    std::vector<double> ws(grid.begin(), grid.end());
    std::vector<double> vals(ws.size());
    // Strictness threshold scales with the plant part only, so it does not depend on γ and
    // validity stays monotone in γ.
    double max_mag = std::abs(p(0.0));  // h(0) = 1
    for (std::size_t i = 0; i < ws.size(); ++i) {
        const Complex s(0.0, ws[i]);
        const Complex hp = h(s) * p(ws[i]);
        vals[i] = (h(s) * 0.5 * gamma * s + hp).real();
        max_mag = std::max(max_mag, std::abs(hp));
    }
    Minimum m = refined_grid_min(value, ws, vals);
    const double at0 = p(0.0).real();
    if (at0 < m.value) m = {at0, 0.0};

    MarginResult out;
    out.tol = 1e-6 * (1.0 + max_mag);
    out.margin = m.value;
    out.omega_at_min = m.omega;
    if (!(out.margin > out.tol)) return out;  // already failing; the tail cannot rescue it

    // Beyond Ω: Re ≥ (γ/2)ω0Ω²/(ω0²+Ω²) + Re{h p∞} − (ω0/Ω)·sup|p − p∞|, all monotone in Ω.
    // Re{h p∞} = p∞ω0²/(ω0²+ω²) is ≥ 0 for p∞ ≥ 0 and ≥ p∞ω0/Ω otherwise.
    const double w0 = h.omega0();
    const double pinf = p.feedthrough();
    auto tail_lower = [&](double big) {
        return 0.5 * gamma * w0 * big * big / (w0 * w0 + big * big) -
               (w0 / big) * (p.tail_gain_bound(big) + std::max(-pinf, 0.0));
    };
    double big = grid.max();
    while (!(tail_lower(big) > out.tol)) {
        if (big * 10.0 > 1e9) {
            std::ostringstream os;
            os << "tail positivity not established up to omega = " << big;
            fail(ErrorKind::TailUnbounded, os.str());
        }
        const FrequencyGrid ext = FrequencyGrid::log_spaced(big, big * 10.0, 200);
        std::vector<double> ev(ext.size());
        for (std::size_t i = 0; i < ext.size(); ++i) ev[i] = value(ext[i]);
        const Minimum me = refined_grid_min(value, ext.omegas(), ev);
        if (me.value < out.margin) {
            out.margin = me.value;
            out.omega_at_min = me.omega;
        }
        big *= 10.0;
        if (!(out.margin > out.tol)) return out;
    }
    out.tail_omega = big;
    out.tail_bound = tail_lower(big);
    out.valid = true;
    return out;
}

namespace {

void require_internally_stable(const BusModel& bus, const FrequencyGrid& grid) {
    const FrequencyGrid& scan = (grid.min() <= 1e-4 && grid.max() >= 1e4) ? grid : FrequencyGrid::default_grid();
    const StabilityReport rep = bus_internal_stability(bus, scan);
    if (rep.verdict != Verdict::Stable)
        fail(ErrorKind::AssumptionViolated, "bus is not internally stable (" + std::string(to_string(rep.verdict)) +
                                                (rep.detail.empty() ? "" : ": " + rep.detail) + ")");
}

}  // namespace

MarginResult certify_bus(const HFilter& h, const BusModel& bus, double gamma, const FrequencyGrid& grid) {
    require_internally_stable(bus, grid);
    return certify_response(h, PlantResponse::from_bus(bus), gamma, grid);
}

MinGammaResult min_gamma_response(const HFilter& h, const PlantResponse& p, const FrequencyGrid& grid,
                                  double rel_tol) {
    MinGammaResult out;
    out.rel_tol = rel_tol;
    MarginResult at_cap = certify_response(h, p, GammaSearch::kCap, grid);
    if (!at_cap.valid) fail(ErrorKind::NoCertificate, "test fails even at gamma = 1e6");
    MarginResult at_low = certify_response(h, p, GammaSearch::kLower, grid);
    if (at_low.valid) {
        out.gamma_min = GammaSearch::kLower;
        out.at_gamma_min = at_low;
        return out;
    }
    double lo = GammaSearch::kLower;
    double hi = GammaSearch::kCap;
    MarginResult at_hi = at_cap;
    while (hi / lo > 1.0 + rel_tol && out.iterations < GammaSearch::kMaxIterations) {
        const double mid = std::sqrt(lo * hi);
        MarginResult r = certify_response(h, p, mid, grid);
        if (r.valid) {
            hi = mid;
            at_hi = r;
        } else {
            lo = mid;
        }
        ++out.iterations;
    }
    out.gamma_min = hi;
    out.at_gamma_min = at_hi;
    return out;
}

MinGammaResult min_gamma(const HFilter& h, const BusModel& bus, const FrequencyGrid& grid, double rel_tol) {
    require_internally_stable(bus, grid);
    return min_gamma_response(h, PlantResponse::from_bus(bus), grid, rel_tol);
}

bool admit(double gamma_min, double susceptance_sum) {
    if (!(gamma_min > 0.0) || !(susceptance_sum >= 0.0))
        fail(ErrorKind::InvalidParameter, "admission needs gamma_min > 0 and a nonnegative susceptance sum");
    return gamma_min * susceptance_sum <= 1.0 + 1e-12;
}

// ---------------------------------------------------------------------------

void FirstOrderDesign::validate() const {
    auto pos = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!pos(a) || !pos(b) || !pos(omega0)) fail(ErrorKind::InvalidDesign, "a, b and omega0 must be > 0");
    if (!std::isfinite(eps) || eps < 0.0) fail(ErrorKind::InvalidDesign, "eps must be >= 0");
}

bool first_order_protocol(const FirstOrderDesign& d, double gamma) {
    d.validate();
    const double x = d.a - d.eps * d.b;
    const double y = 0.5 * gamma * d.omega0 - d.eps;
    if (x < 0.0 || y < 0.0) return false;
    const double z = d.b * y;
    const double gap = std::sqrt(x) - std::sqrt(z);
    return z - d.eps * d.omega0 >= d.omega0 / (d.b + d.omega0) * gap * gap;
}

RationalTF first_order_relaxation(const FirstOrderDesign& d, double gamma) {
    d.validate();
    const HFilter h = HFilter::canonical(d.omega0);
    const RationalTF inner = 0.5 * gamma * RationalTF::s() + RationalTF(Polynomial::constant(d.a), Polynomial{d.b, 1.0});
    return h.tf() * inner - RationalTF::constant(d.eps);
}

double min_gamma_first_order(const FirstOrderDesign& d, double rel_tol) {
    d.validate();
    if (d.a - d.eps * d.b < 0.0) fail(ErrorKind::NoCertificate, "a - eps*b < 0: no gamma satisfies the protocol");
    if (!first_order_protocol(d, GammaSearch::kCap)) fail(ErrorKind::NoCertificate, "protocol fails even at gamma = 1e6");
    double lo = std::max(GammaSearch::kLower, 2.0 * d.eps / d.omega0);
    if (first_order_protocol(d, lo)) return lo;
    double hi = GammaSearch::kCap;
    for (int it = 0; it < 200 && hi / lo > 1.0 + rel_tol; ++it) {
        const double mid = std::sqrt(lo * hi);
        (first_order_protocol(d, mid) ? hi : lo) = mid;
    }
    return hi;
}

EnvelopeResult envelope_check(const BusModel& bus, const FirstOrderDesign& d, const FrequencyGrid& grid) {
    d.validate();
    EnvelopeResult out;
    for (double w : grid) {
        const Complex s(0.0, w);
        const Complex delta = bus_eval(bus, s) - d.a / (s + d.b);
        const double ratio = std::abs(delta) / (d.eps * std::sqrt(1.0 + w * w / (d.omega0 * d.omega0)));
        if (ratio > out.worst_ratio || out.worst_omega == 0.0) {
            out.worst_ratio = ratio;
            out.worst_omega = w;
        }
    }
    out.passed = out.worst_ratio < 1.0;
    return out;
}

HFilter choose_h(const std::vector<RationalTF>& expected_models, std::vector<double> candidate_omega0s,
                 const FrequencyGrid& grid) {
    if (candidate_omega0s.empty()) fail(ErrorKind::NoFeasibleH, "empty candidate list");
    for (const RationalTF& p : expected_models)
        for (Complex pole : p.poles())
            if (!(pole.real() < 0.0)) fail(ErrorKind::AssumptionViolated, "expected model is not stable");

    std::sort(candidate_omega0s.begin(), candidate_omega0s.end());
    std::optional<double> best_w0;
    double best_margin = -kInf;
    for (double w0 : candidate_omega0s) {
        const HFilter h = HFilter::canonical(w0);
        double worst = kInf;
        bool feasible = true;
        for (const RationalTF& p : expected_models) {
            MarginResult r;
            try {
                r = certify_response(h, PlantResponse::from_tf(p), 1.0, grid);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::TailUnbounded) throw;
                feasible = false;
                break;
            }
            if (!r.valid) {
                feasible = false;
                break;
            }
            worst = std::min(worst, r.margin);
        }
        if (feasible && worst > best_margin) {
            best_margin = worst;
            best_w0 = w0;
        }
    }
    if (!best_w0) fail(ErrorKind::NoFeasibleH, "every candidate omega0 fails some expected model");
    return HFilter::canonical(*best_w0);
}

}  // namespace gridcert

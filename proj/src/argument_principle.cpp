#include "gridcert/argument_principle.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "gridcert/error.hpp"

namespace gridcert {

double QuasiPolynomial::neutral_ratio() const noexcept {
    const auto m = static_cast<std::size_t>(degree());
    const double l0 = base[m];
    const double l1 = delayed[m];
    if (l1 == 0.0) return 0.0;
    if (l0 == 0.0) return std::numeric_limits<double>::infinity();
    return std::abs(l1 / l0);
}

namespace {

struct Scanner {
    const std::function<Complex(double)>& f;
    int degree;
    double lead;
    double f0_scale;
    const ScanOptions& opts;
    double unwrapped = 0.0;
    double min_rel = std::numeric_limits<double>::infinity();
    double omega_at_min = 0.0;
    bool jump_at_zero = false;  // unresolved jump where |f| is essentially zero

    double scale(double w) const { return std::abs(lead) * std::pow(w, degree) + f0_scale; }

    Complex sample(double w) {
        Complex v = f(w);
        double rel = std::abs(v) / scale(w);
        if (rel < min_rel) {
            min_rel = rel;
            omega_at_min = w;
        }
        return v;
    }

    void step(double wa, Complex fa, double wb, Complex fb, int depth) {
        const double d = std::arg(fb / fa);
        if (std::abs(d) <= opts.max_phase_step) {
            unwrapped += d;
            return;
        }
        if (depth >= opts.max_refine_depth) {
            // A jump that refinement cannot split, sitting on a near-zero of f, is a zero on
            // (or indistinguishably close to) the axis rather than a coarse grid.
            const double rel = std::min(std::abs(fa) / scale(wa), std::abs(fb) / scale(wb));
            if (rel < std::sqrt(opts.zero_tol)) {
                jump_at_zero = true;
                unwrapped += d;
                return;
            }
            std::ostringstream os;
            os << "phase jump " << d << " rad between omega = " << wa << " and " << wb << " not resolved";
            fail(ErrorKind::GridTooCoarse, os.str());
        }
        const double wm = wa > 0.0 ? std::sqrt(wa * wb) : 0.5 * (wa + wb);
        const Complex fm = sample(wm);
        step(wa, fa, wm, fm, depth + 1);
        step(wm, fm, wb, fb, depth + 1);
    }
};

Complex leading_term(double lead, int degree, double w) {
    return lead * std::pow(Complex(0.0, w), degree);
}

}  // namespace

RhpZeroCount count_rhp_zeros(const std::function<Complex(double)>& f_of_omega, int degree, double lead,
                             double neutral_dev, const FrequencyGrid& grid, double start_omega,
                             const ScanOptions& opts) {
    RhpZeroCount out;
    const Complex f_start = f_of_omega(start_omega);
    Scanner sc{f_of_omega, degree, lead, std::abs(f_start), opts};

    if (std::abs(f_start) == 0.0 || !std::isfinite(std::abs(f_start))) {
        if (start_omega > 0.0) fail(ErrorKind::IndentationAmbiguous, "characteristic function vanishes at the indentation");
        out.status = ZeroCountStatus::NearAxisZero;
        out.detail = "zero at s = 0";
        return out;
    }
    // f is real on the real axis; at a nonzero indentation it must still be essentially real.
    if (start_omega > 0.0 && std::abs(f_start.imag()) > 0.1 * std::abs(f_start.real()))
        fail(ErrorKind::IndentationAmbiguous, "value at the indentation radius is not close to the real axis");
    const double sign0 = f_start.real() >= 0.0 ? 1.0 : -1.0;
    const double start_offset = std::arg(f_start * sign0);

    double w_prev = start_omega;
    Complex f_prev = f_start;
    auto advance_to = [&](double w) {
        if (w <= w_prev) return;
        Complex fw = sc.sample(w);
        sc.step(w_prev, f_prev, w, fw, 0);
        w_prev = w;
        f_prev = fw;
    };
    for (double w : grid) advance_to(w);

    // Extend until the leading term dominates: |f/(lead (jω)^m) − 1| must stay inside
    // the disk that excludes the origin, leaving room for the neutral oscillation.
    const double allowed = neutral_dev + 0.5 * (1.0 - neutral_dev);
    auto tail_ok = [&](double w) {
        for (double k : {1.0, 1.7, 3.1, 10.0, 100.0}) {
            const double wk = w * k;
            const Complex u = f_of_omega(wk) / leading_term(lead, degree, wk);
            if (!(std::abs(u - 1.0) < allowed)) return false;
        }
        return true;
    };
    while (!tail_ok(w_prev)) {
        if (w_prev * 10.0 > opts.tail_limit) {
            out.status = ZeroCountStatus::TailUnresolved;
            out.detail = "leading term never dominates below the tail limit";
            return out;
        }
        for (int i = 0; i < 200; ++i) advance_to(w_prev * std::pow(10.0, 1.0 / 200.0));
    }
    out.tail_omega = w_prev;

    const Complex u_end = f_prev / leading_term(lead, degree, w_prev);
    const double total = sc.unwrapped + start_offset - std::arg(u_end);
    out.raw = (degree * std::numbers::pi / 2.0 - total) / std::numbers::pi;
    out.min_rel_modulus = sc.min_rel;
    out.omega_at_min = sc.omega_at_min;

    if (sc.min_rel < opts.zero_tol || sc.jump_at_zero) {
        out.status = ZeroCountStatus::NearAxisZero;
        std::ostringstream os;
        os << "|f(j omega)| nearly vanishes at omega = " << sc.omega_at_min;
        out.detail = os.str();
        return out;
    }
    const double rounded = std::round(out.raw);
    if (std::abs(out.raw - rounded) > 0.25) {
        out.status = ZeroCountStatus::NonInteger;
        std::ostringstream os;
        os << "winding estimate " << out.raw << " is not close to an integer";
        out.detail = os.str();
        return out;
    }
    out.zeros = static_cast<int>(rounded);
    return out;
}

}  // namespace gridcert

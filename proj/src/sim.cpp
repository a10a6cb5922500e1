#include "gridcert/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "gridcert/error.hpp"

namespace gridcert {

namespace {

constexpr double kOverflow = 1e12;

// Per-bus layout and constants for the right-hand side.
struct BusRt {
    BusModel m;
    bool delayed = false;
    double inertia = 0.0;    // M, or M + Knu for delay-free virtual inertia
    double feedthrough = 0;  // instantaneous gain of a delay-free controller
    int w = -1;              // ω state index, −1 when algebraic
    int z = -1;              // iDroop filter state
    int q = -1;              // derivative filter state (delayed virtual inertia)
};

double instantaneous_gain(const Controller& c) {
    switch (c.kind) {
        case ControllerKind::None: return 0.0;
        case ControllerKind::Droop:
        case ControllerKind::VirtualInertia: return c.K;
        case ControllerKind::IDroop: return c.Knu;
    }
    return 0.0;
}

class Rhs {
public:
    Rhs(const NetworkModel& net, const SimConfig& cfg) : L_(laplacian(net)), eta_(cfg.derivative_filter_eta) {
        const std::size_t n = net.size();
        int next = static_cast<int>(n);
        d_.assign(n, 0.0);
        for (const auto& [id, power] : cfg.disturbance) d_[net.index_of(id)] = power;
        for (const Bus& b : net.buses()) {
            BusRt r;
            r.m = b.model;
            r.delayed = b.model.delayed();
            r.inertia = b.model.effective_inertia();
            r.feedthrough = instantaneous_gain(b.model.controller);
            if (r.inertia > 0.0) r.w = next++;
            if (b.model.controller.kind == ControllerKind::IDroop) r.z = next++;
            if (r.delayed && b.model.controller.kind == ControllerKind::VirtualInertia) r.q = next++;
            if (r.w < 0) {
                const double damping = r.delayed ? r.m.D : r.m.D + r.feedthrough;
                if (!(damping > 0.0)) fail(ErrorKind::SingularMassMatrix, "algebraic bus '" + b.id + "' has no damping");
            }
            buses_.push_back(r);
        }
        dim_ = static_cast<std::size_t>(next);
    }

    std::size_t dim() const noexcept { return dim_; }
    const std::vector<BusRt>& buses() const noexcept { return buses_; }

    // dy = f(t, y); also returns ω and controller output x per bus.
    void operator()(double t, const std::vector<double>& y, const std::vector<DelayLine>& lines, std::vector<double>& dy,
                    std::vector<double>& omega, std::vector<double>& x) const {
        const std::size_t n = buses_.size();
        dy.assign(dim_, 0.0);
        omega.assign(n, 0.0);
        x.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const BusRt& b = buses_[i];
            const Controller& c = b.m.controller;
            double p = d_[i];
            for (std::size_t j = 0; j < n; ++j) p -= L_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * y[j];
            const double z = b.z >= 0 ? y[static_cast<std::size_t>(b.z)] : 0.0;

            double wd = 0.0;
            double xd = 0.0;
            if (b.delayed) {
                wd = lines[i].at(t - b.m.tau);
                switch (c.kind) {
                    case ControllerKind::None: break;
                    case ControllerKind::Droop: xd = -c.K * wd; break;
                    case ControllerKind::IDroop: xd = -c.Knu * wd - z; break;
                    case ControllerKind::VirtualInertia:
                        xd = -c.K * wd - c.Knu * (wd - y[static_cast<std::size_t>(b.q)]) / eta_;
                        break;
                }
            }

            double w;
            if (b.w >= 0)
                w = y[static_cast<std::size_t>(b.w)];
            else if (b.delayed)
                w = (p + xd) / b.m.D;
            else
                w = (p - z) / (b.m.D + b.feedthrough);

            double xi = b.delayed ? xd : -b.feedthrough * w - z;
            dy[i] = w;
            if (b.w >= 0) {
                const double wdot = (-b.m.D * w + xi + p) / b.inertia;
                dy[static_cast<std::size_t>(b.w)] = wdot;
                // Absorbed virtual inertia still injects −Knu·ω̇.
                if (!b.delayed && c.kind == ControllerKind::VirtualInertia) xi -= c.Knu * wdot;
            }
            if (b.z >= 0) dy[static_cast<std::size_t>(b.z)] = c.Kdelta * ((c.K - c.Knu) * (b.delayed ? wd : w) - z);
            if (b.q >= 0) dy[static_cast<std::size_t>(b.q)] = (wd - y[static_cast<std::size_t>(b.q)]) / eta_;
            omega[i] = w;
            x[i] = xi;
        }
    }

private:
    Eigen::MatrixXd L_;
    std::vector<double> d_;
    std::vector<BusRt> buses_;
    std::size_t dim_ = 0;
    double eta_;
};

double max_delay(const NetworkModel& net) {
    double tau = 0.0;
    for (const Bus& b : net.buses()) tau = std::max(tau, b.model.tau);
    return tau;
}

}  // namespace

// ---------------------------------------------------------------------------

DelayLine::DelayLine(double dt, double max_delay) : dt_(dt) {
    const auto cap = static_cast<std::size_t>(std::ceil(max_delay / dt)) + 4;
    ring_.assign(cap, 0.0);
}

void DelayLine::push(double value) {
    ring_[count_ % ring_.size()] = value;
    ++count_;
}

double DelayLine::at(double t) const {
    if (t < 0.0) return 0.0;
    double u = t / dt_;
    const double newest = static_cast<double>(count_) - 1.0;
    if (u > newest) {
        if (u > newest + 1e-9) fail(ErrorKind::InvalidParameter, "delay line read ahead of the newest sample");
        u = newest;
    }
    const auto k = static_cast<std::size_t>(std::floor(u));
    if (count_ > ring_.size() && k + ring_.size() < count_)
        fail(ErrorKind::InvalidParameter, "delay line read beyond the retained history");
    const double frac = u - static_cast<double>(k);
    const double a = ring_[k % ring_.size()];
    if (frac == 0.0 || k + 1 >= count_) return a;
    const double b = ring_[(k + 1) % ring_.size()];
    return a + frac * (b - a);
}

double natural_frequency_estimate(const NetworkModel& net, const SimConfig& cfg) {
    const LaplacianMatrix L = laplacian(net);
    double w = 0.0;
    for (std::size_t i = 0; i < net.size(); ++i) {
        const BusModel& m = net.buses()[i].model;
        const Controller& c = m.controller;
        const double lii = L(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
        double cmax = 0.0;
        switch (c.kind) {
            case ControllerKind::None: break;
            case ControllerKind::Droop: cmax = c.K; break;
            case ControllerKind::IDroop: cmax = std::max(c.K, c.Knu); break;
            case ControllerKind::VirtualInertia: cmax = m.delayed() ? c.K + c.Knu / cfg.derivative_filter_eta : c.K; break;
        }
        const double inertia = m.effective_inertia();
        if (inertia > 0.0) {
            w = std::max({w, std::sqrt(lii / inertia), (m.D + cmax) / inertia});
        } else {
            const double damping = m.delayed() ? m.D : m.D + instantaneous_gain(c);
            if (damping > 0.0) w = std::max(w, lii / damping);
        }
        if (c.kind == ControllerKind::IDroop) w = std::max(w, c.Kdelta);
        if (c.kind == ControllerKind::VirtualInertia && m.delayed()) w = std::max(w, 1.0 / cfg.derivative_filter_eta);
    }
    return w;
}

Trajectory simulate(const NetworkModel& net, const SimConfig& cfg) {
    if (!std::isfinite(cfg.dt) || !(cfg.dt > 0.0)) fail(ErrorKind::InvalidParameter, "dt must be > 0");
    if (!std::isfinite(cfg.t_end) || !(cfg.t_end > 0.0)) fail(ErrorKind::InvalidParameter, "t_end must be > 0");
    if (!(cfg.derivative_filter_eta > 0.0)) fail(ErrorKind::InvalidParameter, "derivative filter eta must be > 0");
    for (const Bus& b : net.buses()) {
        if (b.model.delayed() && cfg.dt > b.model.tau / 20.0 * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "dt = " << cfg.dt << " exceeds tau/20 = " << b.model.tau / 20.0 << " at bus '" << b.id << "'";
            fail(ErrorKind::StepTooLarge, os.str());
        }
    }
    const double wnat = natural_frequency_estimate(net, cfg);
    if (wnat > 0.0 && cfg.dt > 0.1 / wnat * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "dt = " << cfg.dt << " exceeds 0.1/omega_nat = " << 0.1 / wnat;
        fail(ErrorKind::StepTooLarge, os.str());
    }

    const Rhs f(net, cfg);
    const std::size_t n = net.size();
    const double tau_max = max_delay(net);
    std::vector<DelayLine> lines(n, DelayLine(cfg.dt, tau_max));

    Trajectory traj;
    for (std::size_t i = 0; i < n; ++i) {
        BusTrace tr;
        tr.id = net.buses()[i].id;
        if (f.buses()[i].z >= 0) tr.internal["z"];
        if (f.buses()[i].q >= 0) tr.internal["q"];
        traj.buses.push_back(std::move(tr));
    }

    const auto steps = static_cast<std::size_t>(std::llround(std::ceil(cfg.t_end / cfg.dt - 1e-9)));
    std::vector<double> y(f.dim(), 0.0), k1, k2, k3, k4, tmp(f.dim()), omega, x;

    auto record = [&](double t) {
        std::vector<double> scratch;
        f(t, y, lines, scratch, omega, x);
        traj.times.push_back(t);
        for (std::size_t i = 0; i < n; ++i) {
            BusTrace& tr = traj.buses[i];
            tr.theta.push_back(y[i]);
            tr.omega.push_back(omega[i]);
            tr.x.push_back(x[i]);
            if (f.buses()[i].z >= 0) tr.internal["z"].push_back(y[static_cast<std::size_t>(f.buses()[i].z)]);
            if (f.buses()[i].q >= 0) tr.internal["q"].push_back(y[static_cast<std::size_t>(f.buses()[i].q)]);
            lines[i].push(omega[i]);
        }
    };

    record(0.0);
    const double h = cfg.dt;
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * h;
        f(t, y, lines, k1, omega, x);
        for (std::size_t j = 0; j < y.size(); ++j) tmp[j] = y[j] + 0.5 * h * k1[j];
        f(t + 0.5 * h, tmp, lines, k2, omega, x);
        for (std::size_t j = 0; j < y.size(); ++j) tmp[j] = y[j] + 0.5 * h * k2[j];
        f(t + 0.5 * h, tmp, lines, k3, omega, x);
        for (std::size_t j = 0; j < y.size(); ++j) tmp[j] = y[j] + h * k3[j];
        f(t + h, tmp, lines, k4, omega, x);
        for (std::size_t j = 0; j < y.size(); ++j) tmp[j] = y[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);

        const bool blown = std::any_of(tmp.begin(), tmp.end(), [](double v) { return !std::isfinite(v) || std::abs(v) > kOverflow; });
        if (blown) {
            traj.truncated = true;
            std::ostringstream os;
            os << "state exceeded " << kOverflow << " at t = " << t + h;
            traj.reason = os.str();
            break;
        }
        y.swap(tmp);
        record(static_cast<double>(k + 1) * h);
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Post-processing

std::string_view to_string(Trend t) {
    switch (t) {
        case Trend::Decaying: return "decaying";
        case Trend::Growing: return "growing";
        case Trend::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

namespace {

double swing_amplitude(const std::vector<double>& v, std::size_t from, std::size_t to) {
    if (to <= from) return 0.0;
    const double mean = std::accumulate(v.begin() + static_cast<std::ptrdiff_t>(from), v.begin() + static_cast<std::ptrdiff_t>(to), 0.0) /
                        static_cast<double>(to - from);
    double amp = 0.0;
    for (std::size_t k = from; k < to; ++k) amp = std::max(amp, std::abs(v[k] - mean));
    return amp;
}

}  // namespace

TrendReport detect_stability(const Trajectory& traj, double split) {
    if (!(split > 0.0 && split < 1.0)) fail(ErrorKind::InvalidParameter, "split must lie in (0, 1)");
    TrendReport rep;
    if (traj.truncated) {
        rep.trend = Trend::Growing;
        rep.ratio = std::numeric_limits<double>::infinity();
        return rep;
    }
    const std::size_t N = traj.samples();
    if (N < 100) fail(ErrorKind::TooShort, "stability detection needs at least 100 samples");
    const auto s = static_cast<std::size_t>(split * static_cast<double>(N));
    for (const BusTrace& b : traj.buses) {
        rep.leading_amplitude = std::max(rep.leading_amplitude, swing_amplitude(b.omega, 0, s));
        rep.trailing_amplitude = std::max(rep.trailing_amplitude, swing_amplitude(b.omega, s, N));
    }
    if (rep.leading_amplitude == 0.0) {
        rep.ratio = rep.trailing_amplitude == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
        rep.ratio = rep.trailing_amplitude / rep.leading_amplitude;
    }
    rep.trend = rep.ratio > 2.0 ? Trend::Growing : rep.ratio < 0.5 ? Trend::Decaying : Trend::Inconclusive;
    return rep;
}

FrequencyMetrics frequency_metrics(const Trajectory& traj, double settle_tol) {
    const std::size_t N = traj.samples();
    if (N < 10) fail(ErrorKind::TooShort, "metrics need at least 10 samples");
    FrequencyMetrics out;
    out.settle_tol = settle_tol;
    const std::size_t tail = std::min(N - 1, static_cast<std::size_t>(std::floor(0.9 * static_cast<double>(N))));
    for (const BusTrace& b : traj.buses) {
        BusMetrics m;
        m.id = b.id;
        m.nadir = *std::min_element(b.omega.begin(), b.omega.end());
        double sum = 0.0;
        for (std::size_t k = tail; k < N; ++k) sum += b.omega[k];
        m.offset = sum / static_cast<double>(N - tail);
        double var = 0.0;
        for (std::size_t k = tail; k < N; ++k) var += (b.omega[k] - m.offset) * (b.omega[k] - m.offset);
        m.trailing_variance = var / static_cast<double>(N - tail);
        for (std::size_t k = 1; k < N; ++k)
            m.max_rocof = std::max(m.max_rocof, std::abs(b.omega[k] - b.omega[k - 1]) / (traj.times[k] - traj.times[k - 1]));
        if (m.trailing_variance > settle_tol) {
            std::ostringstream os;
            os << "bus '" << b.id << "' not settled: trailing variance " << m.trailing_variance << " > " << settle_tol;
            fail(ErrorKind::NotSettled, os.str());
        }
        out.buses.push_back(m);
    }
    return out;
}

double dominant_decay_rate(const Trajectory& traj, std::size_t bus, double t_from, double t_to, double reference) {
    const std::vector<double>& w = traj.buses.at(bus).omega;
    std::vector<double> tk, lk;
    double peak_max = 0.0;
    std::vector<std::pair<double, double>> peaks;
    for (std::size_t k = 1; k + 1 < w.size(); ++k) {
        const double t = traj.times[k];
        if (t < t_from || t > t_to) continue;
        const double e = std::abs(w[k] - reference);
        if (e > std::abs(w[k - 1] - reference) && e >= std::abs(w[k + 1] - reference)) {
            peaks.emplace_back(t, e);
            peak_max = std::max(peak_max, e);
        }
    }
    for (const auto& [t, e] : peaks) {
        if (e > 1e-9 * peak_max) {
            tk.push_back(t);
            lk.push_back(std::log(e));
        }
    }
    if (tk.size() < 3) fail(ErrorKind::TooShort, "fewer than three peaks to fit a decay rate");
    const double n = static_cast<double>(tk.size());
    const double mt = std::accumulate(tk.begin(), tk.end(), 0.0) / n;
    const double ml = std::accumulate(lk.begin(), lk.end(), 0.0) / n;
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < tk.size(); ++k) {
        num += (tk[k] - mt) * (lk[k] - ml);
        den += (tk[k] - mt) * (tk[k] - mt);
    }
    return -num / den;
}

}  // namespace gridcert

#include "gridcert/network.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "gridcert/error.hpp"

namespace gridcert {

// ---------------------------------------------------------------------------
// Model

NetworkModel::NetworkModel(std::vector<Bus> buses, std::vector<Line> lines)
    : buses_(std::move(buses)), lines_(std::move(lines)) {
    std::set<std::string> ids;
    for (const Bus& b : buses_) {
        if (b.id.empty()) fail(ErrorKind::ValidationError, "bus with empty id");
        if (!ids.insert(b.id).second) fail(ErrorKind::ValidationError, "duplicate bus id '" + b.id + "'");
        b.model.validate();
    }
    std::set<std::pair<std::string, std::string>> pairs;
    for (const Line& l : lines_) {
        if (!ids.contains(l.from) || !ids.contains(l.to))
            fail(ErrorKind::DanglingEndpoint, "line " + l.from + "-" + l.to + " references an unknown bus");
        if (l.from == l.to) fail(ErrorKind::ValidationError, "line " + l.from + "-" + l.to + " is a self loop");
        if (!std::isfinite(l.B) || !(l.B > 0.0))
            fail(ErrorKind::ValidationError, "line " + l.from + "-" + l.to + " needs B > 0");
        auto key = std::minmax(l.from, l.to);
        if (!pairs.insert({key.first, key.second}).second)
            fail(ErrorKind::DuplicateLine, "duplicate line " + l.from + "-" + l.to);
    }
}

std::size_t NetworkModel::index_of(std::string_view id) const {
    for (std::size_t i = 0; i < buses_.size(); ++i)
        if (buses_[i].id == id) return i;
    fail(ErrorKind::UnknownBus, "no bus with id '" + std::string(id) + "'");
}

std::vector<std::vector<std::size_t>> NetworkModel::components() const {
    std::vector<std::size_t> parent(buses_.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const Line& l : lines_) parent[find(index_of(l.from))] = find(index_of(l.to));
    std::map<std::size_t, std::size_t> slot;
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < buses_.size(); ++i) {
        auto [it, fresh] = slot.try_emplace(find(i), out.size());
        if (fresh) out.emplace_back();
        out[it->second].push_back(i);
    }
    return out;
}

bool NetworkModel::delay_free() const {
    return std::none_of(buses_.begin(), buses_.end(), [](const Bus& b) { return b.model.delayed(); });
}

NetworkModel NetworkModel::subnetwork(const std::vector<std::size_t>& indices) const {
    std::vector<Bus> buses;
    std::set<std::string> keep;
    for (std::size_t i : indices) {
        buses.push_back(buses_.at(i));
        keep.insert(buses_[i].id);
    }
    std::vector<Line> lines;
    for (const Line& l : lines_)
        if (keep.contains(l.from) && keep.contains(l.to)) lines.push_back(l);
    return NetworkModel(std::move(buses), std::move(lines));
}

LaplacianMatrix laplacian(const NetworkModel& net) {
    const auto n = static_cast<Eigen::Index>(net.size());
    LaplacianMatrix L = LaplacianMatrix::Zero(n, n);
    for (const Line& l : net.lines()) {
        const auto i = static_cast<Eigen::Index>(net.index_of(l.from));
        const auto j = static_cast<Eigen::Index>(net.index_of(l.to));
        L(i, j) -= l.B;
        L(j, i) -= l.B;
        L(i, i) += l.B;
        L(j, j) += l.B;
    }
    return L;
}

double diag_susceptance(const NetworkModel& net, std::string_view id) {
    const std::size_t i = net.index_of(id);
    double sum = 0.0;
    for (const Line& l : net.lines())
        if (l.from == net.buses()[i].id || l.to == net.buses()[i].id) sum += l.B;
    return sum;
}

// ---------------------------------------------------------------------------
// Delay-free state space

namespace {

// Instantaneous feedthrough gain of x = −k·ω − z at zero delay.
double feedthrough(const Controller& c) {
    switch (c.kind) {
        case ControllerKind::None: return 0.0;
        case ControllerKind::Droop:
        case ControllerKind::VirtualInertia: return c.K;
        case ControllerKind::IDroop: return c.Knu;
    }
    return 0.0;
}

}  // namespace

StateSpace assemble_state_space(const NetworkModel& net) {
    if (!net.delay_free()) fail(ErrorKind::DelayPresent, "state-space assembly needs a delay-free network");
    const auto n = static_cast<Eigen::Index>(net.size());
    const LaplacianMatrix L = laplacian(net);

    std::vector<Eigen::Index> omega_state(net.size(), -1);
    std::vector<Eigen::Index> z_state(net.size(), -1);
    std::vector<std::string> labels;
    for (const Bus& b : net.buses()) labels.push_back("theta_" + b.id);
    Eigen::Index nx = n;
    for (std::size_t i = 0; i < net.size(); ++i) {
        if (net.buses()[i].model.effective_inertia() > 0.0) {
            omega_state[i] = nx++;
            labels.push_back("omega_" + net.buses()[i].id);
        }
    }
    for (std::size_t i = 0; i < net.size(); ++i) {
        if (net.buses()[i].model.controller.kind == ControllerKind::IDroop) {
            z_state[i] = nx++;
            labels.push_back("z_" + net.buses()[i].id);
        }
    }

    // ω = W x + Wd d.
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, nx);
    Eigen::MatrixXd Wd = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const BusModel& m = net.buses()[static_cast<std::size_t>(i)].model;
        if (omega_state[static_cast<std::size_t>(i)] >= 0) {
            W(i, omega_state[static_cast<std::size_t>(i)]) = 1.0;
            continue;
        }
        const double damping = m.D + feedthrough(m.controller);
        if (!(damping > 0.0))
            fail(ErrorKind::SingularMassMatrix, "algebraic bus '" + net.buses()[static_cast<std::size_t>(i)].id + "' has no damping");
        // 0 = −(D + k)ω − (Lθ)_i − z_i + d_i
        W.row(i).head(n) = -L.row(i) / damping;
        if (z_state[static_cast<std::size_t>(i)] >= 0) W(i, z_state[static_cast<std::size_t>(i)]) = -1.0 / damping;
        Wd(i, i) = 1.0 / damping;
    }

    StateSpace ss;
    ss.A = Eigen::MatrixXd::Zero(nx, nx);
    ss.B = Eigen::MatrixXd::Zero(nx, n);
    ss.A.topRows(n) = W;
    ss.B.topRows(n) = Wd;
    for (Eigen::Index i = 0; i < n; ++i) {
        const BusModel& m = net.buses()[static_cast<std::size_t>(i)].model;
        const Eigen::Index wi = omega_state[static_cast<std::size_t>(i)];
        const Eigen::Index zi = z_state[static_cast<std::size_t>(i)];
        if (wi >= 0) {
            const double inertia = m.effective_inertia();
            ss.A.row(wi) = -(m.D + feedthrough(m.controller)) / inertia * W.row(i);
            ss.A.row(wi).head(n) -= L.row(i) / inertia;
            if (zi >= 0) ss.A(wi, zi) -= 1.0 / inertia;
            ss.B(wi, i) = 1.0 / inertia;
        }
        if (zi >= 0) {
            const Controller& c = m.controller;
            ss.A.row(zi) = c.Kdelta * (c.K - c.Knu) * W.row(i);
            ss.A(zi, zi) -= c.Kdelta;
            ss.B.row(zi) = c.Kdelta * (c.K - c.Knu) * Wd.row(i);
        }
    }
    ss.labels = std::move(labels);
    ss.C_omega = W;
    ss.D_omega = Wd;
    return ss;
}

SpectralReport spectral_stability(const Eigen::MatrixXd& A, std::optional<double> tol) {
    SpectralReport rep;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(A, false);
    if (solver.info() != Eigen::Success) fail(ErrorKind::RootSolverFailure, "eigenvalue iteration did not converge");
    double radius = 0.0;
    for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
        rep.eigenvalues.push_back(solver.eigenvalues()[k]);
        radius = std::max(radius, std::abs(solver.eigenvalues()[k]));
    }
    rep.tol = tol.value_or(1e-7 * (1.0 + radius));
    rep.abscissa = -std::numeric_limits<double>::infinity();
    bool unstable = false;
    for (Complex ev : rep.eigenvalues) {
        if (std::abs(ev) <= rep.tol) {
            ++rep.zero_modes;
            continue;
        }
        rep.abscissa = std::max(rep.abscissa, ev.real());
        if (!(ev.real() < -rep.tol)) unstable = true;
    }
    if (rep.zero_modes > 1) {
        std::ostringstream os;
        os << rep.zero_modes << " zero eigenvalues: network has that many components";
        fail(ErrorKind::DisconnectedNetwork, os.str());
    }
    if (unstable || rep.zero_modes == 0) {
        rep.verdict = Verdict::Unstable;
        rep.detail = unstable ? "eigenvalue with Re >= -tol outside the angle mode" : "angle mode missing";
    } else {
        rep.verdict = Verdict::Stable;
    }
    return rep;
}

SpectralReport spectral_stability(const NetworkModel& net) {
    const auto comps = net.components();
    if (comps.size() == 1) return spectral_stability(assemble_state_space(net).A);
    SpectralReport worst;
    worst.verdict = Verdict::Stable;
    worst.abscissa = -std::numeric_limits<double>::infinity();
    std::ostringstream warn;
    warn << "network has " << comps.size() << " components; analyzed separately";
    for (const auto& comp : comps) {
        SpectralReport r = spectral_stability(assemble_state_space(net.subnetwork(comp)).A);
        worst.zero_modes += r.zero_modes;
        worst.abscissa = std::max(worst.abscissa, r.abscissa);
        worst.tol = std::max(worst.tol, r.tol);
        worst.eigenvalues.insert(worst.eigenvalues.end(), r.eigenvalues.begin(), r.eigenvalues.end());
        if (r.verdict == Verdict::Unstable) worst.verdict = Verdict::Unstable;
    }
    worst.detail = warn.str();
    return worst;
}

// ---------------------------------------------------------------------------
// Frequency-domain global check

namespace {

struct NetworkScanData {
    std::vector<QuasiPolynomial> G;
    std::vector<Polynomial> dc;
    Eigen::MatrixXd L;
    Eigen::MatrixXd V;  // orthonormal, first column 1/√n
};

NetworkScanData scan_data(const NetworkModel& net) {
    NetworkScanData d;
    for (const Bus& b : net.buses()) {
        d.G.push_back(bus_characteristic(b.model));
        d.dc.push_back(controller_tf(b.model.controller).den());
    }
    d.L = laplacian(net);
    const auto n = static_cast<Eigen::Index>(net.size());
    Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(n, 1);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(ones);
    d.V = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
    return d;
}

Complex scan_value(const NetworkScanData& d, Complex s) {
    const auto n = d.L.rows();
    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(n, n);
    Eigen::MatrixXcd DcL(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        G(i, i) = d.G[static_cast<std::size_t>(i)](s);
        DcL.row(i) = d.dc[static_cast<std::size_t>(i)](s) * d.L.row(i).cast<Complex>();
    }
    const Eigen::MatrixXcd Vc = d.V.cast<Complex>();
    // In the basis V the first column of Vᵀ(sG + D_c L)V is s·VᵀG v1 because L v1 = 0.
    Eigen::MatrixXcd M = Vc.transpose() * (s * G + DcL) * Vc;
    M.col(0) = Vc.transpose() * G * Vc.col(0);
    return M.partialPivLu().determinant();
}

}  // namespace

Complex network_characteristic(const NetworkModel& net, Complex s) { return scan_value(scan_data(net), s); }

GlobalReport nyquist_global_check(const NetworkModel& net, const FrequencyGrid& grid) {
    if (net.size() == 0) fail(ErrorKind::ValidationError, "empty network");
    if (!net.connected()) fail(ErrorKind::DisconnectedNetwork, "global check needs a connected network");
    const NetworkScanData data = scan_data(net);

    GlobalReport rep;
    rep.indentation = grid.min() / 10.0;
    int degree = 0;
    double lead = 1.0;
    double dev = 1.0;
    for (const QuasiPolynomial& g : data.G) {
        const double ratio = g.neutral_ratio();
        if (ratio > 1.0 + 1e-9) {
            rep.verdict = Verdict::Unstable;
            rep.rhp_zeros = -1;
            rep.detail = "neutral-type bus with dominant delayed leading coefficient";
            return rep;
        }
        if (ratio >= 1.0 - 1e-9) {
            rep.verdict = Verdict::Inconclusive;
            rep.detail = "neutral-type bus on the stability boundary";
            return rep;
        }
        degree += g.degree() + 1;
        lead *= g.lead();
        dev *= 1.0 + ratio;
    }
    degree -= 1;  // angle mode divided out
    dev -= 1.0;
    if (dev >= 1.0) {
        rep.verdict = Verdict::Inconclusive;
        rep.detail = "combined neutral deviation too large for the winding count";
        return rep;
    }

    rep.scan = count_rhp_zeros([&](double w) { return scan_value(data, Complex(0.0, w)); }, degree, lead, dev, grid,
                               rep.indentation);
    if (rep.scan.status != ZeroCountStatus::Ok) {
        rep.verdict = Verdict::Inconclusive;
        rep.detail = rep.scan.detail;
        return rep;
    }
    rep.rhp_zeros = rep.scan.zeros;
    rep.verdict = rep.scan.zeros == 0 ? Verdict::Stable : Verdict::Unstable;
    std::ostringstream os;
    os << "winding estimate " << rep.scan.raw << ", closest approach " << rep.scan.min_rel_modulus << " at omega "
       << rep.scan.omega_at_min;
    rep.detail = os.str();
    return rep;
}

// ---------------------------------------------------------------------------
// Protocol

std::string_view to_string(CertStatus s) {
    switch (s) {
        case CertStatus::Admitted: return "admitted";
        case CertStatus::BudgetExceeded: return "budget_exceeded";
        case CertStatus::AssumptionViolated: return "assumption_violated";
        case CertStatus::NoCertificate: return "no_certificate";
        case CertStatus::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

std::string_view to_string(CertRoute r) {
    switch (r) {
        case CertRoute::Direct: return "direct";
        case CertRoute::FirstOrderEnvelope: return "first_order_envelope";
        case CertRoute::FirstOrderVerified: return "first_order_verified";
    }
    return "unknown";
}

Certificate certify_bus_in_network(const Bus& bus, double diag_susc, const HFilter& h, const FrequencyGrid& grid) {
    Certificate c;
    c.bus_id = bus.id;
    c.diag_susceptance = diag_susc;
    c.grid_min = grid.min();
    c.grid_max = grid.max();
    c.grid_points = grid.size();
    try {
        const FrequencyGrid& scan =
            (grid.min() <= 1e-4 && grid.max() >= 1e4) ? grid : FrequencyGrid::default_grid();
        const StabilityReport st = bus_internal_stability(bus.model, scan);
        if (st.verdict != Verdict::Stable) {
            c.status = CertStatus::AssumptionViolated;
            c.message = "bus not internally stable (" + std::string(to_string(st.verdict)) + "): " + st.detail;
            return c;
        }
        const PlantResponse plant = PlantResponse::from_bus(bus.model);

        bool have_gamma = false;
        if (bus.first_order) {
            const FirstOrderDesign design = bus.first_order->with_omega0(h.omega0());
            try {
                const double g = min_gamma_first_order(design);
                c.first_order_gamma = g;
                c.envelope = envelope_check(bus.model, design, grid);
                const MarginResult m = certify_response(h, plant, g, grid);
                if (c.envelope->passed || m.valid) {
                    c.route = c.envelope->passed ? CertRoute::FirstOrderEnvelope : CertRoute::FirstOrderVerified;
                    c.gamma_min = g;
                    c.margin = m.margin;
                    c.margin_tol = m.tol;
                    have_gamma = true;
                }
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::NoCertificate) throw;
                c.message = std::string("first-order route unavailable: ") + e.what() + "; ";
            }
        }
        if (!have_gamma) {
            const MinGammaResult r = min_gamma_response(h, plant, grid);
            c.route = CertRoute::Direct;
            c.gamma_min = r.gamma_min;
            c.gamma_rel_tol = r.rel_tol;
            c.margin = r.at_gamma_min.margin;
            c.margin_tol = r.at_gamma_min.tol;
        }
        c.susceptance_budget = 1.0 / c.gamma_min;
        c.admitted = admit(c.gamma_min, diag_susc);
        c.status = c.admitted ? CertStatus::Admitted : CertStatus::BudgetExceeded;
    } catch (const Error& e) {
        c.status = e.kind() == ErrorKind::NoCertificate ? CertStatus::NoCertificate : CertStatus::NumericalFailure;
        c.message += e.what();
    }
    return c;
}

NetworkCertificate protocol_certify_network(const NetworkModel& net, const HFilter& h, const FrequencyGrid& grid) {
    NetworkCertificate out;
    out.omega0 = h.omega0();
    std::vector<std::future<Certificate>> jobs;
    for (const Bus& b : net.buses()) {
        const double susc = diag_susceptance(net, b.id);
        jobs.push_back(std::async(std::launch::async, [&b, susc, &h, &grid] {
            return certify_bus_in_network(b, susc, h, grid);
        }));
    }
    out.certified = true;
    for (auto& j : jobs) {
        out.buses.push_back(j.get());
        out.certified = out.certified && out.buses.back().admitted;
    }
    return out;
}

}  // namespace gridcert

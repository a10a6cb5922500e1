#include <cmath>
#include <random>

#include "doctest.h"
#include "gridcert/argument_principle.hpp"
#include "gridcert/bus_model.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace gridcert;

namespace {

const FrequencyGrid& grid() {
    static const FrequencyGrid g = FrequencyGrid::default_grid();
    return g;
}

BusModel designed() { return {1.0, 0.1, Controller::idroop(0.65, 1.3, 8.0), 0.5}; }
BusModel aggressive() { return {1.0, 0.1, Controller::idroop(30.0, 1.0, 5.0), 0.05}; }

}  // namespace

// ---------------------------------------------------------------------------
// Argument principle

TEST_CASE("zero count of plain polynomials") {
    auto count = [](const Polynomial& p) {
        return count_rhp_zeros([&](double w) { return p(Complex(0.0, w)); }, p.degree(), p.leading(), 0.0, grid(), 0.0);
    };
    SUBCASE("Hurwitz") {
        const RhpZeroCount r = count(Polynomial{2.0, 1.1, 1.0});
        CHECK(r.status == ZeroCountStatus::Ok);
        CHECK(r.zeros == 0);
    }
    SUBCASE("three right-half-plane roots") {
        // (s − 1)(s + 2)(s² − 0.2 s + 4)
        const Polynomial p = Polynomial{-1.0, 1.0} * Polynomial{2.0, 1.0} * Polynomial{4.0, -0.2, 1.0};
        const RhpZeroCount r = count(p);
        CHECK(r.status == ZeroCountStatus::Ok);
        CHECK(r.zeros == 3);
    }
    SUBCASE("root on the axis is not silently counted") {
        const RhpZeroCount r = count(Polynomial{1.0, 0.0, 1.0} * Polynomial{1.0, 1.0});
        CHECK(r.status != ZeroCountStatus::Ok);
    }
}

TEST_CASE("zero count of s + k e^{-s}") {
    // Stable iff k < π/2; just above the boundary one complex pair crosses.
    auto count = [](double k) {
        QuasiPolynomial q{Polynomial{0.0, 1.0}, Polynomial::constant(k), 1.0};
        return count_rhp_zeros([&](double w) { return q(Complex(0.0, w)); }, q.degree(), q.lead(), 0.0, grid(), 0.0);
    };
    CHECK(count(1.0).zeros == 0);
    CHECK(count(1.5).zeros == 0);
    CHECK(count(1.7).zeros == 2);
    CHECK(count(5.0).zeros == 2);
    // cross-check with the independent unwrapping oracle
    for (double k : {1.0, 1.5, 1.7, 5.0, 9.0}) {
        QuasiPolynomial q{Polynomial{0.0, 1.0}, Polynomial::constant(k), 1.0};
        const int ref = oracle::winding_zero_count([&](double w) { return q(Complex(0.0, w)); }, 1, 1e6, 400000);
        CHECK(count(k).zeros == ref);
    }
}

TEST_CASE("zero count rejects a coarse grid it cannot refine") {
    QuasiPolynomial q{Polynomial{0.0, 1.0}, Polynomial::constant(1.0), 1.0};
    ScanOptions opts;
    opts.max_refine_depth = 0;
    const FrequencyGrid coarse = FrequencyGrid::log_spaced(1e-4, 1e5, 5);
    CHECK(thrown_kind([&] {
              (void)count_rhp_zeros([&](double w) { return q(Complex(0.0, w)); }, 1, 1.0, 0.0, coarse, 0.0, opts);
          }) == ErrorKind::GridTooCoarse);
}

// ---------------------------------------------------------------------------
// Controllers

TEST_CASE("controller transfer functions") {
    SUBCASE("iDroop DC gain is K") {
        CHECK(controller_tf(Controller::idroop(0.65, 1.3, 8.0)).eval(0.0).real() == doctest::Approx(0.65));
    }
    SUBCASE("droop is a constant") {
        const RationalTF c = controller_tf(Controller::droop(30.0));
        CHECK(c == RationalTF::constant(30.0));
    }
    SUBCASE("iDroop partial fractions") {
        // Knu + Kdelta(K − Knu)/(s + Kdelta)
        std::mt19937_64 rng(3);
        for (int k = 0; k < 20; ++k) {
            const double K = oracle::log_uniform(rng, 0.05, 10), Kn = oracle::log_uniform(rng, 0.05, 10),
                         Kd = oracle::log_uniform(rng, 0.05, 10);
            const RationalTF c = controller_tf(Controller::idroop(K, Kn, Kd));
            for (double w : oracle::logspace(1e-3, 1e3, 50)) {
                const Complex s(0.0, w);
                const Complex ref = Kn + Kd * (K - Kn) / (s + Kd);
                CHECK(std::abs(c.eval(s) - ref) < 1e-12 * (1.0 + std::abs(ref)));
            }
        }
    }
    SUBCASE("invalid gains") {
        CHECK(thrown_kind([] { (void)controller_tf(Controller::droop(-1.0)); }) == ErrorKind::InvalidParameter);
        CHECK(thrown_kind([] { (void)controller_tf(Controller::idroop(1.0, 1.0, 0.0)); }) == ErrorKind::InvalidParameter);
    }
}

// ---------------------------------------------------------------------------
// Bus transfer functions

TEST_CASE("bus_rational") {
    SUBCASE("uncontrolled swing bus") {
        const RationalTF p = bus_rational({1.0, 0.1, Controller::none(), 0.0});
        CHECK(p.num() == Polynomial::constant(1.0));
        CHECK(p.den().coeffs()[0] == doctest::Approx(0.1));
        CHECK(p.den().coeffs()[1] == doctest::Approx(1.0));
    }
    SUBCASE("virtual inertia is absorbed") {
        // 1/((M + Knu)s + D + K) = 1/(3s + 1.1)
        const RationalTF p = bus_rational({1.0, 0.1, Controller::virtual_inertia(1.0, 2.0), 0.0});
        for (double w : oracle::logspace(1e-3, 1e3, 30)) {
            const Complex s(0.0, w);
            CHECK(std::abs(p.eval(s) - 1.0 / (3.0 * s + 1.1)) < 1e-14);
        }
    }
    SUBCASE("static load bus") {
        const RationalTF p = bus_rational({0.0, 1.0, Controller::droop(0.0), 0.0});
        CHECK(p == RationalTF::constant(1.0));
    }
    SUBCASE("delay rejected") {
        CHECK(thrown_kind([] { (void)bus_rational(designed()); }) == ErrorKind::DelayPresent);
    }
    SUBCASE("invalid parameters") {
        CHECK(thrown_kind([] { (void)bus_rational({1.0, 0.0, Controller::none(), 0.0}); }) == ErrorKind::InvalidParameter);
        CHECK(thrown_kind([] { (void)bus_rational({-1.0, 1.0, Controller::none(), 0.0}); }) == ErrorKind::InvalidParameter);
    }
}

TEST_CASE("bus_eval") {
    SUBCASE("delay-free agrees with the rational form") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        const BusModel buses[] = {{1.0, 0.1, Controller::droop(1.0), 0.0},
                                  {0.5, 0.3, Controller::virtual_inertia(2.0, 0.7), 0.0},
                                  {1.0, 0.1, Controller::idroop(0.65, 1.3, 8.0), 0.0},
                                  {0.0, 1.0, Controller::idroop(1.0, 0.5, 3.0), 0.0}};
        for (const BusModel& b : buses) {
            const RationalTF p = bus_rational(b);
            for (int k = 0; k < 50; ++k) {
                const Complex s(u(rng), 5.0 * u(rng));
                CHECK(std::abs(bus_eval(b, s) - p.eval(s)) < 1e-10 * (1.0 + std::abs(p.eval(s))));
            }
        }
    }
    SUBCASE("delayed bus matches the hand formula") {
        for (double w : oracle::logspace(1e-3, 1e3, 60)) {
            const Complex s(0.0, w);
            const Complex ref = oracle::plant(1.0, 0.1, 0.5, oracle::idroop(0.65, 1.3, 8.0, s), s);
            CHECK(std::abs(bus_eval(designed(), s) - ref) < 1e-12 * (1.0 + std::abs(ref)));
        }
    }
    SUBCASE("vanishes along the positive reals when M > 0") {
        double prev = INFINITY;
        for (double x : {1e1, 1e2, 1e3, 1e4, 1e6}) {
            const double m = std::abs(bus_eval(designed(), Complex(x, 0.0)));
            CHECK(m < prev);
            prev = m;
        }
        CHECK(prev < 1e-5);
    }
    SUBCASE("designed bus stays near 1.37/(s+1)") {
        double worst = 0.0;
        for (double w : oracle::logspace(1e-3, 1e3, 2000)) {
            const Complex s(0.0, w);
            worst = std::max(worst, std::abs(bus_eval(designed(), s) - 1.37 / (s + 1.0)));
        }
        CHECK(worst < 0.1);
    }
}

TEST_CASE("internal stability") {
    SUBCASE("uncontrolled bus is stable for any delay") {
        for (double tau : {0.0, 0.05, 0.5, 5.0})
            CHECK(bus_internal_stability({1.0, 0.1, Controller::none(), tau}, grid()).verdict == Verdict::Stable);
    }
    SUBCASE("designed bus is stable") {
        CHECK(bus_internal_stability(designed(), grid()).verdict == Verdict::Stable);
        const QuasiPolynomial g = bus_characteristic(designed());
        CHECK(oracle::winding_zero_count([&](double w) { return g(Complex(0.0, w)); }, g.degree(), 1e6, 400000) == 0);
    }
    SUBCASE("aggressive iDroop with delay has its own right-half-plane roots") {
        const StabilityReport r = bus_internal_stability(aggressive(), grid());
        CHECK(r.verdict == Verdict::Unstable);
        CHECK(r.rhp_roots == 2);
        // Newton on the hand-written characteristic finds the crossing pair.
        auto G = [](oracle::cd s) { return (s + 5.0) * (s + 0.1) + std::exp(-0.05 * s) * (s + 150.0); };
        auto dG = [](oracle::cd s) {
            return (s + 0.1) + (s + 5.0) + std::exp(-0.05 * s) * (1.0 - 0.05 * (s + 150.0));
        };
        const oracle::cd root = oracle::newton(G, dG, {0.5, 11.5});
        CHECK(std::abs(G(root)) < 1e-9);
        CHECK(root.real() > 0.0);
    }
    SUBCASE("grid must be wide enough") {
        CHECK(thrown_kind([] { (void)bus_internal_stability(designed(), FrequencyGrid::log_spaced(1e-2, 1e2, 100)); }) ==
              ErrorKind::InvalidGrid);
    }
    SUBCASE("neutral type with dominant delayed derivative") {
        // M < Knu with delay: infinitely many right-half-plane roots
        const BusModel b{0.5, 0.1, Controller::virtual_inertia(1.0, 1.0), 0.1};
        CHECK(bus_internal_stability(b, grid()).verdict == Verdict::Unstable);
    }
}

// ---------------------------------------------------------------------------
// Properties

TEST_CASE("DC gain is 1/(D + K)") {
    std::mt19937_64 rng(21);
    for (int k = 0; k < 100; ++k) {
        const double M = oracle::log_uniform(rng, 0.05, 10), D = oracle::log_uniform(rng, 0.05, 10),
                     K = oracle::log_uniform(rng, 0.05, 10), Kn = oracle::log_uniform(rng, 0.05, 10),
                     Kd = oracle::log_uniform(rng, 0.05, 10);
        const Controller cs[] = {Controller::droop(K), Controller::virtual_inertia(K, Kn), Controller::idroop(K, Kn, Kd)};
        for (const Controller& c : cs) {
            const BusModel b{M, D, c, 0.0};
            CHECK(bus_eval(b, 0.0).real() == doctest::Approx(1.0 / (D + K)).epsilon(1e-12));
        }
    }
}

TEST_CASE("virtual inertia equals droop with added inertia") {
    std::mt19937_64 rng(22);
    for (int k = 0; k < 50; ++k) {
        const double M = oracle::log_uniform(rng, 0.05, 10), D = oracle::log_uniform(rng, 0.05, 10),
                     K = oracle::log_uniform(rng, 0.05, 10), Kn = oracle::log_uniform(rng, 0.05, 10);
        CHECK(bus_rational({M, D, Controller::virtual_inertia(K, Kn), 0.0}) ==
              bus_rational({M + Kn, D, Controller::droop(K), 0.0}));
    }
}

TEST_CASE("strictly proper when M > 0") {
    std::mt19937_64 rng(23);
    for (int k = 0; k < 50; ++k) {
        const double M = oracle::log_uniform(rng, 0.05, 10), D = oracle::log_uniform(rng, 0.05, 10),
                     K = oracle::log_uniform(rng, 0.05, 10), Kn = oracle::log_uniform(rng, 0.05, 10),
                     Kd = oracle::log_uniform(rng, 0.05, 10);
        for (const Controller& c : {Controller::none(), Controller::droop(K), Controller::virtual_inertia(K, Kn),
                                    Controller::idroop(K, Kn, Kd)})
            CHECK(bus_rational({M, D, c, 0.0}).relative_degree() >= 1);
    }
}

TEST_CASE("tail gain bound dominates the response") {
    std::mt19937_64 rng(24);
    for (int k = 0; k < 50; ++k) {
        const double M = oracle::log_uniform(rng, 0.5, 10), D = oracle::log_uniform(rng, 0.05, 10),
                     K = oracle::log_uniform(rng, 0.05, 10), Kn = oracle::log_uniform(rng, 0.05, 0.4),
                     Kd = oracle::log_uniform(rng, 0.05, 10), tau = oracle::log_uniform(rng, 0.01, 1.0);
        for (const Controller& c : {Controller::droop(K), Controller::virtual_inertia(K, Kn), Controller::idroop(K, Kn, Kd)}) {
            const BusModel b{M, D, c, tau};
            const double big = 100.0;
            const double bound = bus_tail_gain_bound(b, big);
            for (double w : oracle::logspace(big, 1e6, 300))
                CHECK(std::abs(bus_eval(b, Complex(0.0, w))) <= bound * (1.0 + 1e-12));
        }
    }
}

#include "gridcert/rational_tf.hpp"

#include <cmath>
#include <sstream>

#include "gridcert/error.hpp"

namespace gridcert {

namespace {

constexpr double kCancelRelTol = 1e-8;
constexpr double kPoleRelTol = 1e-12;

// Removes common roots. A denominator root r is cancelled when the numerator's
// residual at r is negligible relative to its coefficient scale at |r|.
void cancel_common_roots(Polynomial& num, Polynomial& den) {
    for (;;) {
        if (num.degree() < 1 || den.degree() < 1) return;
        bool cancelled = false;
        for (Complex r : den.roots()) {
            const double scale = num.abs_sum(std::abs(r));
            if (std::abs(num(r)) > kCancelRelTol * scale) continue;
            const Polynomial factor = r.imag() == 0.0
                                          ? Polynomial{-r.real(), 1.0}
                                          : Polynomial{std::norm(r), -2.0 * r.real(), 1.0};
            if (factor.degree() > num.degree()) continue;
            num = divmod(num, factor).first;
            den = divmod(den, factor).first;
            cancelled = true;
            break;
        }
        if (!cancelled) return;
    }
}

}  // namespace

RationalTF::RationalTF(Polynomial num, Polynomial den) : num_(std::move(num)), den_(std::move(den)) {
    if (den_.is_zero()) fail(ErrorKind::NotInvertible, "transfer function with zero denominator");
    if (num_.is_zero()) {
        den_ = Polynomial::constant(1.0);
        return;
    }
    cancel_common_roots(num_, den_);
    const double lead = den_.leading();
    num_ = num_.scaled(1.0 / lead);
    den_ = den_.scaled(1.0 / lead);
}

Complex RationalTF::eval(Complex s) const {
    const Complex d = den_(s);
    if (std::abs(d) <= kPoleRelTol * den_.abs_sum(std::abs(s))) {
        std::ostringstream os;
        os << "s = " << s.real() << (s.imag() < 0 ? "-" : "+") << std::abs(s.imag()) << "j";
        fail(ErrorKind::EvaluationAtPole, os.str());
    }
    return num_(s) / d;
}

RationalTF operator+(const RationalTF& a, const RationalTF& b) {
    if (a.den() == b.den()) return {a.num() + b.num(), a.den()};
    return {a.num() * b.den() + b.num() * a.den(), a.den() * b.den()};
}

RationalTF operator-(const RationalTF& a, const RationalTF& b) { return a + (-1.0) * b; }

RationalTF operator*(const RationalTF& a, const RationalTF& b) {
    return {a.num() * b.num(), a.den() * b.den()};
}

RationalTF operator*(double c, const RationalTF& g) { return {g.num().scaled(c), g.den()}; }

RationalTF inverse(const RationalTF& g) {
    if (g.is_zero()) fail(ErrorKind::NotInvertible, "inverse of the zero transfer function");
    return {g.den(), g.num()};
}

RationalTF feedback(const RationalTF& a, const RationalTF& b) {
    // a/(1+ab) = na·da·db / (da·(da·db + na·nb)) -> reduced form na·db / (da·db + na·nb).
    const Polynomial loop = a.den() * b.den() + a.num() * b.num();
    if (loop.is_zero()) fail(ErrorKind::DegenerateFeedback, "1 + a·b vanishes identically");
    return {a.num() * b.den(), loop};
}

std::vector<Complex> freq_response(const RationalTF& g, const FrequencyGrid& grid) {
    std::vector<Complex> out;
    out.reserve(grid.size());
    for (double w : grid) {
        try {
            out.push_back(g.eval(Complex(0.0, w)));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::EvaluationAtPole) throw;
            std::ostringstream os;
            os << "imaginary-axis pole at omega = " << w << " rad/s";
            fail(ErrorKind::EvaluationAtPole, os.str());
        }
    }
    return out;
}

}  // namespace gridcert

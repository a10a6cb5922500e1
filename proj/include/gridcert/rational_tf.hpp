#pragma once

#include <vector>

#include "gridcert/frequency_grid.hpp"
#include "gridcert/polynomial.hpp"

namespace gridcert {

/// Real-rational transfer function num(s)/den(s).
///
/// Always stored reduced: common roots of numerator and denominator are cancelled
/// (within a relative residual of 1e-8) and the denominator is monic. The zero
/// function is 0/1.
class RationalTF {
public:
    RationalTF() : num_(), den_(Polynomial::constant(1.0)) {}
    RationalTF(Polynomial num, Polynomial den);

    static RationalTF constant(double c) { return {Polynomial::constant(c), Polynomial::constant(1.0)}; }
    /// The Laplace variable s itself.
    static RationalTF s() { return {Polynomial{0.0, 1.0}, Polynomial::constant(1.0)}; }

    const Polynomial& num() const noexcept { return num_; }
    const Polynomial& den() const noexcept { return den_; }
    bool is_zero() const noexcept { return num_.is_zero(); }

    /// Throws EvaluationAtPole when |den(s)| is negligible relative to its coefficient scale.
    Complex eval(Complex s) const;
    Complex operator()(Complex s) const { return eval(s); }

    std::vector<Complex> poles() const { return den_.roots(); }
    std::vector<Complex> zeros() const { return num_.roots(); }
    /// deg(den) − deg(num); negative for improper functions.
    int relative_degree() const noexcept { return den_.degree() - num_.degree(); }

    /// g(s − a), used for strict positive-realness shifts.
    RationalTF shifted(double a) const { return {num_.shifted(-a), den_.shifted(-a)}; }

    friend bool operator==(const RationalTF& a, const RationalTF& b) = default;

private:
    Polynomial num_;
    Polynomial den_;
};

RationalTF operator+(const RationalTF& a, const RationalTF& b);
RationalTF operator-(const RationalTF& a, const RationalTF& b);
RationalTF operator*(const RationalTF& a, const RationalTF& b);
RationalTF operator*(double c, const RationalTF& g);

/// 1/g. Throws NotInvertible when g ≡ 0.
RationalTF inverse(const RationalTF& g);
/// a / (1 + a·b). Throws DegenerateFeedback when 1 + a·b ≡ 0.
RationalTF feedback(const RationalTF& a, const RationalTF& b);

/// Pointwise g(jω) over the grid. EvaluationAtPole names the offending frequency.
std::vector<Complex> freq_response(const RationalTF& g, const FrequencyGrid& grid);

}  // namespace gridcert

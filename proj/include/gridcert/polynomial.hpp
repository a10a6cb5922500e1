#pragma once

#include <complex>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace gridcert {

using Complex = std::complex<double>;

/// Real polynomial with coefficients stored in ascending degree.
///
/// Trailing (highest-degree) coefficients that are exactly zero, or negligible
/// relative to the largest coefficient, are trimmed on construction; the zero
/// polynomial is stored as [0].
class Polynomial {
public:
    Polynomial() : coeffs_{0.0} {}
    Polynomial(std::initializer_list<double> ascending) : Polynomial(std::vector<double>(ascending)) {}
    explicit Polynomial(std::vector<double> ascending);

    static Polynomial constant(double c) { return Polynomial(std::vector<double>{c}); }
    static Polynomial monomial(int degree, double c = 1.0);
    /// Real polynomial lead·Π(s − r). Complex roots must appear in conjugate pairs.
    static Polynomial from_roots(std::span<const Complex> roots, double lead = 1.0);

    const std::vector<double>& coeffs() const noexcept { return coeffs_; }
    int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
    bool is_zero() const noexcept { return coeffs_.size() == 1 && coeffs_[0] == 0.0; }
    double leading() const noexcept { return coeffs_.back(); }
    /// Coefficient of s^k, zero beyond the degree.
    double operator[](std::size_t k) const noexcept { return k < coeffs_.size() ? coeffs_[k] : 0.0; }

    Complex operator()(Complex s) const noexcept;
    double operator()(double s) const noexcept;

    /// Σ |a_k| r^k, the natural magnitude scale for evaluation at |s| = r.
    double abs_sum(double r) const noexcept;
    double max_abs_coeff() const noexcept;

    Polynomial derivative() const;
    /// q(s) = p(s + a).
    Polynomial shifted(double a) const;
    Polynomial scaled(double c) const;

    /// Roots by companion-matrix eigenvalues, Newton-polished, conjugate pairs exact.
    std::vector<Complex> roots() const;

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(double c, const Polynomial& p) { return p.scaled(c); }
    Polynomial operator-() const { return scaled(-1.0); }

    friend bool operator==(const Polynomial& a, const Polynomial& b) = default;

private:
    std::vector<double> coeffs_;
};

/// Quotient and remainder of a / b. Throws NotInvertible when b is zero.
std::pair<Polynomial, Polynomial> divmod(const Polynomial& a, const Polynomial& b);

/// Snaps nearly-real roots onto the real axis and makes complex roots exact conjugate pairs.
std::vector<Complex> pair_conjugates(std::vector<Complex> roots);

}  // namespace gridcert

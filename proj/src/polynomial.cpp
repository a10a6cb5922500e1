#include "gridcert/polynomial.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "gridcert/error.hpp"

namespace gridcert {

namespace {

constexpr double kTrimRelTol = 1e-14;

void trim(std::vector<double>& c) {
    if (c.empty()) {
        c.push_back(0.0);
        return;
    }
    double scale = 0.0;
    for (double v : c) scale = std::max(scale, std::abs(v));
    while (c.size() > 1 && std::abs(c.back()) <= kTrimRelTol * scale) c.pop_back();
    if (c.size() == 1 && std::abs(c[0]) == 0.0) c[0] = 0.0;  // canonical +0
}

Complex polish(const Polynomial& p, const Polynomial& dp, Complex r) {
    for (int it = 0; it < 3; ++it) {
        Complex f = p(r);
        Complex df = dp(r);
        if (std::abs(df) == 0.0) break;
        Complex next = r - f / df;
        if (!(std::abs(p(next)) < std::abs(f))) break;
        r = next;
    }
    return r;
}

}  // namespace

Polynomial::Polynomial(std::vector<double> ascending) : coeffs_(std::move(ascending)) { trim(coeffs_); }

Polynomial Polynomial::monomial(int degree, double c) {
    std::vector<double> v(static_cast<std::size_t>(degree) + 1, 0.0);
    v.back() = c;
    return Polynomial(std::move(v));
}

Polynomial Polynomial::from_roots(std::span<const Complex> roots, double lead) {
    std::vector<Complex> acc{Complex(1.0)};
    for (Complex r : roots) {
        std::vector<Complex> next(acc.size() + 1, Complex(0.0));
        for (std::size_t k = 0; k < acc.size(); ++k) {
            next[k + 1] += acc[k];
            next[k] -= r * acc[k];
        }
        acc = std::move(next);
    }
    std::vector<double> real(acc.size());
    for (std::size_t k = 0; k < acc.size(); ++k) real[k] = lead * acc[k].real();
    return Polynomial(std::move(real));
}

Complex Polynomial::operator()(Complex s) const noexcept {
    Complex acc(0.0);
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * s + *it;
    return acc;
}

double Polynomial::operator()(double s) const noexcept {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * s + *it;
    return acc;
}

double Polynomial::abs_sum(double r) const noexcept {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * r + std::abs(*it);
    return acc;
}

double Polynomial::max_abs_coeff() const noexcept {
    double m = 0.0;
    for (double v : coeffs_) m = std::max(m, std::abs(v));
    return m;
}

Polynomial Polynomial::derivative() const {
    if (coeffs_.size() <= 1) return Polynomial();
    std::vector<double> d(coeffs_.size() - 1);
    for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = static_cast<double>(k) * coeffs_[k];
    return Polynomial(std::move(d));
}

Polynomial Polynomial::shifted(double a) const {
    // Horner in polynomial arithmetic: p(s + a) = (...(c_n (s+a) + c_{n-1})(s+a) ...).
    const Polynomial lin{a, 1.0};
    Polynomial acc;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * lin + constant(*it);
    return acc;
}

Polynomial Polynomial::scaled(double c) const {
    std::vector<double> v = coeffs_;
    for (double& x : v) x *= c;
    return Polynomial(std::move(v));
}

std::vector<Complex> Polynomial::roots() const {
    const int n = degree();
    if (n <= 0) return {};
    if (n == 1) return {Complex(-coeffs_[0] / coeffs_[1], 0.0)};

    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    const double lead = coeffs_.back();
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) companion(i, n - 1) = -coeffs_[static_cast<std::size_t>(i)] / lead;

    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) fail(ErrorKind::RootSolverFailure, "companion eigenvalue iteration did not converge");

    const Polynomial dp = derivative();
    std::vector<Complex> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(polish(*this, dp, solver.eigenvalues()[i]));

    // Clustered roots (numerical multiplicity) are replaced by their mean, which is far
    // more accurate than the individual perturbed estimates.
    std::vector<bool> used(out.size(), false);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (used[i]) continue;
        std::vector<std::size_t> cluster{i};
        for (std::size_t j = i + 1; j < out.size(); ++j)
            if (!used[j] && std::abs(out[j] - out[i]) <= 1e-6 * (1.0 + std::abs(out[i]))) cluster.push_back(j);
        if (cluster.size() > 1) {
            Complex mean(0.0);
            for (auto k : cluster) mean += out[k];
            mean /= static_cast<double>(cluster.size());
            for (auto k : cluster) {
                out[k] = mean;
                used[k] = true;
            }
        }
    }
    return pair_conjugates(std::move(out));
}

std::vector<Complex> pair_conjugates(std::vector<Complex> roots) {
    for (auto& r : roots)
        if (std::abs(r.imag()) <= 1e-10 * (1.0 + std::abs(r))) r = Complex(r.real(), 0.0);

    std::vector<bool> done(roots.size(), false);
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (done[i] || roots[i].imag() == 0.0) continue;
        std::size_t best = roots.size();
        double best_dist = 0.0;
        for (std::size_t j = 0; j < roots.size(); ++j) {
            if (j == i || done[j] || roots[j].imag() * roots[i].imag() >= 0.0) continue;
            double d = std::abs(roots[j] - std::conj(roots[i]));
            if (best == roots.size() || d < best_dist) {
                best = j;
                best_dist = d;
            }
        }
        if (best == roots.size()) continue;
        Complex upper = roots[i].imag() > 0 ? roots[i] : roots[best];
        Complex lower = roots[i].imag() > 0 ? roots[best] : roots[i];
        Complex avg = 0.5 * (upper + std::conj(lower));
        roots[i] = roots[i].imag() > 0 ? avg : std::conj(avg);
        roots[best] = std::conj(roots[i]);
        done[i] = done[best] = true;
    }
    std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return roots;
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<double> v(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = a[k] + b[k];
    return Polynomial(std::move(v));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) {
    std::vector<double> v(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = a[k] - b[k];
    return Polynomial(std::move(v));
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    std::vector<double> v(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
        for (std::size_t j = 0; j < b.coeffs_.size(); ++j) v[i + j] += a.coeffs_[i] * b.coeffs_[j];
    return Polynomial(std::move(v));
}

std::pair<Polynomial, Polynomial> divmod(const Polynomial& a, const Polynomial& b) {
    if (b.is_zero()) fail(ErrorKind::NotInvertible, "polynomial division by zero");
    const int na = a.degree();
    const int nb = b.degree();
    if (na < nb) return {Polynomial(), a};
    std::vector<double> rem = a.coeffs();
    std::vector<double> quo(static_cast<std::size_t>(na - nb) + 1, 0.0);
    for (int k = na - nb; k >= 0; --k) {
        const double q = rem[static_cast<std::size_t>(k + nb)] / b.leading();
        quo[static_cast<std::size_t>(k)] = q;
        for (int j = 0; j <= nb; ++j) rem[static_cast<std::size_t>(k + j)] -= q * b[static_cast<std::size_t>(j)];
    }
    rem.resize(static_cast<std::size_t>(std::max(nb, 1)));
    return {Polynomial(std::move(quo)), Polynomial(std::move(rem))};
}

}  // namespace gridcert

#include "hamiltonia/core.hpp"

namespace hamiltonia {

FrequencyVector golden_frequency() {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    return FrequencyVector({1.0, phi}, FrequencyVector::Diophantine{std::sqrt(5.0), 1.0});
}

namespace {

Complex phase(const HarmonicVector& nu, std::span<const double> angles) {
    double arg = 0.0;
    for (int i = 0; i < nu.dim(); ++i) arg += nu[i] * angles[static_cast<size_t>(i)];
    return std::polar(1.0, arg);
}

}  // namespace

template <class Coeff>
void BasicFourierSeries<Coeff>::add(const HarmonicVector& nu, const Coeff& value) {
    check_nu(nu);
    auto it = c_.find(nu);
    if (it == c_.end()) {
        if (!detail::coeff_is_zero(value)) c_.emplace(nu, value);
        return;
    }
    if constexpr (std::is_same_v<Coeff, Complex>) {
        it->second += value;
    } else {
        if (it->second.size() != value.size())
            throw PreconditionViolated("FourierSeries::add: coefficient size mismatch");
        for (size_t i = 0; i < value.size(); ++i) it->second[i] += value[i];
    }
    if (detail::coeff_is_zero(it->second)) c_.erase(it);
}

template <class Coeff>
Coeff BasicFourierSeries<Coeff>::at(const HarmonicVector& nu) const {
    auto it = c_.find(nu);
    if (it != c_.end()) return it->second;
    if constexpr (std::is_same_v<Coeff, Complex>) {
        return Complex(0.0, 0.0);
    } else {
        return Coeff();  // empty vector stands for zero
    }
}

template <class Coeff>
BasicFourierSeries<Coeff>& BasicFourierSeries<Coeff>::operator*=(Complex z) {
    if (detail::coeff_is_zero(z)) {
        c_.clear();
        return *this;
    }
    for (auto& [nu, c] : c_) {
        if constexpr (std::is_same_v<Coeff, Complex>) {
            c *= z;
        } else {
            for (auto& v : c) v *= z;
        }
    }
    return *this;
}

template <class Coeff>
BasicFourierSeries<Coeff>& BasicFourierSeries<Coeff>::operator+=(const BasicFourierSeries& o) {
    if (o.dim() != dim_) throw PreconditionViolated("FourierSeries: dimension mismatch");
    for (const auto& [nu, c] : o.coefficients()) add(nu, c);
    return *this;
}

template class BasicFourierSeries<Complex>;
template class BasicFourierSeries<std::vector<Complex>>;

Complex fourier_eval(const FourierSeries& f, std::span<const double> angles) {
    Complex s(0.0, 0.0);
    for (const auto& [nu, c] : f.coefficients()) s += c * phase(nu, angles);
    return s;
}

std::vector<Complex> fourier_eval(const VecFourierSeries& f, std::span<const double> angles) {
    std::vector<Complex> s;
    for (const auto& [nu, c] : f.coefficients()) {
        if (s.empty()) s.assign(c.size(), Complex(0.0, 0.0));
        const Complex ph = phase(nu, angles);
        for (size_t i = 0; i < c.size(); ++i) s[i] += c[i] * ph;
    }
    if (s.empty()) s.assign(static_cast<size_t>(f.dim()), Complex(0.0, 0.0));
    return s;
}

double fourier_eval_real(const FourierSeries& f, std::span<const double> angles) {
    const Complex v = fourier_eval(f, angles);
    if (std::abs(v.imag()) > 1e-12 * std::max(1e-300, f.abs_sum()))
        throw PreconditionViolated("fourier_eval_real: imaginary residue above tolerance");
    return v.real();
}

std::vector<double> fourier_eval_real(const VecFourierSeries& f, std::span<const double> angles) {
    const auto v = fourier_eval(f, angles);
    const double scale = std::max(1e-300, f.abs_sum());
    std::vector<double> r(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        if (std::abs(v[i].imag()) > 1e-12 * scale)
            throw PreconditionViolated("fourier_eval_real: imaginary residue above tolerance");
        r[i] = v[i].real();
    }
    return r;
}

FourierSeries product(const FourierSeries& a, const FourierSeries& b) {
    if (a.dim() != b.dim()) throw PreconditionViolated("product: dimension mismatch");
    FourierSeries r(a.dim());
    for (const auto& [nu1, c1] : a.coefficients())
        for (const auto& [nu2, c2] : b.coefficients()) r.add(nu1 + nu2, c1 * c2);
    return r;
}

VecFourierSeries vector_profile(const FourierSeries& scalar, const std::vector<Complex>& direction) {
    VecFourierSeries r(scalar.dim());
    for (const auto& [nu, c] : scalar.coefficients()) {
        std::vector<Complex> v(direction);
        for (auto& x : v) x *= c;
        r.add(nu, v);
    }
    return r;
}

VecFourierSeries directional_derivative(const VecFourierSeries& h, const FrequencyVector& omega) {
    if (h.dim() != omega.dim()) throw PreconditionViolated("directional_derivative: dimension mismatch");
    VecFourierSeries r(h.dim());
    for (const auto& [nu, c] : h.coefficients()) {
        const Complex factor(0.0, nu.dot(omega.omega()));
        std::vector<Complex> v(c);
        for (auto& x : v) x *= factor;
        r.add(nu, v);
    }
    return r;
}

FourierSeries directional_derivative(const FourierSeries& h, const FrequencyVector& omega) {
    if (h.dim() != omega.dim()) throw PreconditionViolated("directional_derivative: dimension mismatch");
    FourierSeries r(h.dim());
    for (const auto& [nu, c] : h.coefficients()) r.add(nu, c * Complex(0.0, nu.dot(omega.omega())));
    return r;
}

FourierSeries partial_derivative(const FourierSeries& h, int r) {
    FourierSeries out(h.dim());
    for (const auto& [nu, c] : h.coefficients()) out.add(nu, c * Complex(0.0, static_cast<double>(nu[r])));
    return out;
}

FourierSeries linear_combination(Complex a, const FourierSeries& f, Complex b, const FourierSeries& g) {
    if (f.dim() != g.dim()) throw PreconditionViolated("linear_combination: dimension mismatch");
    FourierSeries r(f.dim());
    for (const auto& [nu, c] : f.coefficients()) r.add(nu, a * c);
    for (const auto& [nu, c] : g.coefficients()) r.add(nu, b * c);
    return r;
}

FourierSeries cosine_series(const HarmonicVector& nu, double amp) {
    FourierSeries r(nu.dim());
    r.add(nu, Complex(amp / 2.0, 0.0));
    r.add(-nu, Complex(amp / 2.0, 0.0));
    r.set_real_flagged(true);
    return r;
}

FourierSeries dot_with(const VecFourierSeries& h, const HarmonicVector& nu0, Complex prefactor) {
    FourierSeries r(h.dim());
    for (const auto& [nu, c] : h.coefficients()) {
        Complex s(0.0, 0.0);
        for (size_t i = 0; i < c.size(); ++i) s += static_cast<double>(nu0[static_cast<int>(i)]) * c[i];
        r.add(nu, prefactor * s);
    }
    return r;
}

FourierSeries shifted(const FourierSeries& f, const HarmonicVector& nu0) {
    FourierSeries r(f.dim());
    for (const auto& [nu, c] : f.coefficients()) r.add(nu + nu0, c);
    return r;
}

bool satisfies_reality(const FourierSeries& f, double tol) {
    double scale = 0.0;
    for (const auto& [nu, c] : f.coefficients()) scale = std::max(scale, std::abs(c));
    if (scale == 0.0) return true;
    for (const auto& [nu, c] : f.coefficients())
        if (std::abs(f.at(-nu) - std::conj(c)) > tol * scale) return false;
    return true;
}

bool satisfies_reality(const VecFourierSeries& f, double tol) {
    double scale = 0.0;
    for (const auto& [nu, c] : f.coefficients())
        for (const auto& v : c) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return true;
    for (const auto& [nu, c] : f.coefficients()) {
        const auto mirror = f.at(-nu);
        if (mirror.size() != c.size()) return false;
        for (size_t i = 0; i < c.size(); ++i)
            if (std::abs(mirror[i] - std::conj(c[i])) > tol * scale) return false;
    }
    return true;
}

}  // namespace hamiltonia

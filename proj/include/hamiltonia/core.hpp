#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "hamiltonia/errors.hpp"

namespace hamiltonia {

using Complex = std::complex<double>;

/// Integer harmonic vector nu in Z^l.
class HarmonicVector {
public:
    HarmonicVector() = default;
    explicit HarmonicVector(std::vector<int> entries) : e_(std::move(entries)) {
        if (e_.empty()) throw PreconditionViolated("HarmonicVector: dimension must be >= 1");
    }
    HarmonicVector(std::initializer_list<int> entries) : HarmonicVector(std::vector<int>(entries)) {}

    static HarmonicVector zero(int dim) { return HarmonicVector(std::vector<int>(dim, 0)); }

    int dim() const { return static_cast<int>(e_.size()); }
    int operator[](int i) const { return e_[static_cast<size_t>(i)]; }
    const std::vector<int>& entries() const { return e_; }

    /// l1 norm |nu| = sum_i |nu_i|.
    int norm1() const {
        int n = 0;
        for (int v : e_) n += std::abs(v);
        return n;
    }
    bool is_zero() const {
        return std::all_of(e_.begin(), e_.end(), [](int v) { return v == 0; });
    }

    HarmonicVector operator+(const HarmonicVector& o) const {
        check_dim(o);
        std::vector<int> r(e_);
        for (size_t i = 0; i < r.size(); ++i) r[i] += o.e_[i];
        return HarmonicVector(std::move(r));
    }
    HarmonicVector operator-() const {
        std::vector<int> r(e_);
        for (int& v : r) v = -v;
        return HarmonicVector(std::move(r));
    }

    /// Integer dot product nu . mu.
    long long dot(const HarmonicVector& o) const {
        check_dim(o);
        long long s = 0;
        for (size_t i = 0; i < e_.size(); ++i) s += static_cast<long long>(e_[i]) * o.e_[i];
        return s;
    }
    /// Real dot product nu . x.
    double dot(std::span<const double> x) const {
        double s = 0.0;
        for (size_t i = 0; i < e_.size(); ++i) s += e_[i] * x[i];
        return s;
    }

    auto operator<=>(const HarmonicVector&) const = default;

private:
    void check_dim(const HarmonicVector& o) const {
        if (o.dim() != dim()) throw PreconditionViolated("HarmonicVector: dimension mismatch");
    }
    std::vector<int> e_;
};

/// Frequency vector omega in R^l with optional Diophantine constants (C, tau):
/// |omega . nu| >= 1 / (C |nu|^tau) for every nonzero nu. The bound is checked
/// lazily on every divisor evaluation; a violation signals bad (C, tau) input.
class FrequencyVector {
public:
    struct Diophantine {
        double C;
        double tau;
    };

    explicit FrequencyVector(std::vector<double> omega, std::optional<Diophantine> dio = {})
        : omega_(std::move(omega)), dio_(dio) {
        if (omega_.empty()) throw PreconditionViolated("FrequencyVector: dimension must be >= 1");
        if (dio_ && (dio_->C <= 0.0 || dio_->tau <= 0.0))
            throw PreconditionViolated("FrequencyVector: Diophantine constants must be positive");
    }

    int dim() const { return static_cast<int>(omega_.size()); }
    const std::vector<double>& omega() const { return omega_; }
    double operator[](int i) const { return omega_[static_cast<size_t>(i)]; }
    const std::optional<Diophantine>& diophantine() const { return dio_; }

    /// omega . nu for nu != 0, with the lazy Diophantine assertion.
    double small_divisor(const HarmonicVector& nu) const {
        if (nu.dim() != dim()) throw PreconditionViolated("small_divisor: dimension mismatch");
        if (nu.is_zero()) throw PreconditionViolated("small_divisor: nu must be nonzero");
        const double d = nu.dot(omega_);
        if (dio_) {
            const double bound = 1.0 / (dio_->C * std::pow(static_cast<double>(nu.norm1()), dio_->tau));
            if (std::abs(d) < bound * (1.0 - 1e-12))
                throw DiophantineViolation("small_divisor: |omega.nu| < 1/(C|nu|^tau), constants are wrong");
        }
        return d;
    }

private:
    std::vector<double> omega_;
    std::optional<Diophantine> dio_;
};

/// omega = (1, golden ratio) with tau = 1 and C = sqrt(5), the classical
/// Diophantine pair for a quadratic irrational.
FrequencyVector golden_frequency();

namespace detail {
inline double coeff_abs(const Complex& c) { return std::abs(c); }
inline double coeff_abs(const std::vector<Complex>& c) {
    double s = 0.0;
    for (const auto& v : c) s += std::abs(v);
    return s;
}
inline bool coeff_is_zero(const Complex& c) { return c == Complex(0.0, 0.0); }
inline bool coeff_is_zero(const std::vector<Complex>& c) {
    return std::all_of(c.begin(), c.end(), [](const Complex& v) { return v == Complex(0.0, 0.0); });
}
}  // namespace detail

/// Sparse Fourier series sum_nu c_nu e^{i nu.theta} on the l-torus.
///
/// Coeff is either Complex (scalar series) or std::vector<Complex>
/// (l-vector valued series, used for torus parametrizations). Coefficients
/// are stored sparsely, keyed and ordered lexicographically by nu. A declared
/// truncation degree is optional; inserting beyond it throws rather than
/// silently truncating.
template <class Coeff>
class BasicFourierSeries {
public:
    using Map = std::map<HarmonicVector, Coeff>;

    explicit BasicFourierSeries(int dim) : dim_(dim) {
        if (dim < 1) throw PreconditionViolated("FourierSeries: dimension must be >= 1");
    }

    int dim() const { return dim_; }
    bool real_flagged() const { return real_flag_; }
    void set_real_flagged(bool f) { real_flag_ = f; }
    std::optional<int> declared_truncation() const { return trunc_; }
    void declare_truncation(int n) {
        if (degree() > n) throw TruncationExceeded("declare_truncation: existing support exceeds degree");
        trunc_ = n;
    }

    const Map& coefficients() const { return c_; }
    bool empty() const { return c_.empty(); }
    size_t size() const { return c_.size(); }

    void set(const HarmonicVector& nu, Coeff value) {
        check_nu(nu);
        if (detail::coeff_is_zero(value))
            c_.erase(nu);
        else
            c_[nu] = std::move(value);
    }
    void add(const HarmonicVector& nu, const Coeff& value);

    /// Coefficient at nu (zero coefficient if absent).
    Coeff at(const HarmonicVector& nu) const;

    /// Max |nu| carrying a nonzero coefficient; -1 for the empty series.
    int degree() const {
        int d = -1;
        for (const auto& [nu, c] : c_) d = std::max(d, nu.norm1());
        return d;
    }

    double abs_sum() const {
        double s = 0.0;
        for (const auto& [nu, c] : c_) s += detail::coeff_abs(c);
        return s;
    }

    BasicFourierSeries& operator*=(Complex z);
    BasicFourierSeries& operator+=(const BasicFourierSeries& o);

private:
    void check_nu(const HarmonicVector& nu) const {
        if (nu.dim() != dim_) throw PreconditionViolated("FourierSeries: harmonic dimension mismatch");
        if (trunc_ && nu.norm1() > *trunc_)
            throw TruncationExceeded("FourierSeries: harmonic beyond declared truncation degree");
    }

    int dim_;
    Map c_;
    bool real_flag_ = false;
    std::optional<int> trunc_;
};

using FourierSeries = BasicFourierSeries<Complex>;
using VecFourierSeries = BasicFourierSeries<std::vector<Complex>>;

/// sum_nu c_nu e^{i nu.angles}.
Complex fourier_eval(const FourierSeries& f, std::span<const double> angles);
std::vector<Complex> fourier_eval(const VecFourierSeries& f, std::span<const double> angles);

/// Evaluation of a real-flagged series; throws if the imaginary residue
/// exceeds 1e-12 * sum|c|.
double fourier_eval_real(const FourierSeries& f, std::span<const double> angles);
std::vector<double> fourier_eval_real(const VecFourierSeries& f, std::span<const double> angles);

/// Convolution product of scalar series.
FourierSeries product(const FourierSeries& a, const FourierSeries& b);

/// Scalar series times a constant vector coefficient.
VecFourierSeries vector_profile(const FourierSeries& scalar, const std::vector<Complex>& direction);

/// d/dpsi along omega: multiplies c_nu by i(omega.nu).
VecFourierSeries directional_derivative(const VecFourierSeries& h, const FrequencyVector& omega);
FourierSeries directional_derivative(const FourierSeries& h, const FrequencyVector& omega);

/// d/dpsi_r: multiplies c_nu by i nu_r.
FourierSeries partial_derivative(const FourierSeries& h, int r);

/// a*F + b*G.
FourierSeries linear_combination(Complex a, const FourierSeries& f, Complex b, const FourierSeries& g);

/// Series of cos(nu.theta): coefficients amp/2 at +-nu. Real-flagged.
FourierSeries cosine_series(const HarmonicVector& nu, double amp = 1.0);

/// Scalar series i nu0.h for vector-valued h (used by composition recursions).
FourierSeries dot_with(const VecFourierSeries& h, const HarmonicVector& nu0, Complex prefactor);

/// Shift all harmonics by nu0 (multiplication by e^{i nu0.theta}).
FourierSeries shifted(const FourierSeries& f, const HarmonicVector& nu0);

/// Checks coeff(-nu) == conj(coeff(nu)) within tol * max|c|.
bool satisfies_reality(const FourierSeries& f, double tol = 1e-12);
bool satisfies_reality(const VecFourierSeries& f, double tol = 1e-12);

}  // namespace hamiltonia

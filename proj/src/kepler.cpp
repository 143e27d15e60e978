#include "hamiltonia/kepler.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "hamiltonia/numerics.hpp"

namespace hamiltonia::kepler {

namespace {

using boost::multiprecision::cpp_int;

Rational rat_pow2(int k) { return Rational(cpp_int(1) << k); }

cpp_int factorial_big(int k) {
    cpp_int r = 1;
    for (int i = 2; i <= k; ++i) r *= i;
    return r;
}

cpp_int binom_big(int n, int k) {
    cpp_int r = 1;
    for (int i = 0; i < k; ++i) {
        r *= (n - i);
        r /= (i + 1);
    }
    return r;
}

ImagSeries& add_term(ImagSeries& s, int nu, const Rational& q) {
    auto it = s.find(nu);
    if (it == s.end()) {
        if (q != 0) s.emplace(nu, q);
    } else {
        it->second += q;
        if (it->second == 0) s.erase(it);
    }
    return s;
}

// real-rational sparse series on the circle, used for the exp factors of the
// composition recursion
using RatSeries = std::map<int, Rational>;

RatSeries convolve(const RatSeries& a, const RatSeries& b) {
    RatSeries r;
    for (const auto& [n1, c1] : a)
        for (const auto& [n2, c2] : b) {
            auto it = r.find(n1 + n2);
            if (it == r.end())
                r.emplace(n1 + n2, c1 * c2);
            else {
                it->second += c1 * c2;
                if (it->second == 0) r.erase(it);
            }
        }
    return r;
}

// coefficients q^(1..K), computed through the identity h = e sin(lambda + h)
// written with the exp factor T+ = e^{i h}
std::vector<ImagSeries> recursion_orders(int K) {
    std::vector<ImagSeries> q(static_cast<size_t>(K) + 1);  // q[j], j = 1..K
    std::vector<RatSeries> Tp(static_cast<size_t>(K));      // Tp[m] = [e^{ih}]^(m), m = 0..K-1
    Tp[0] = RatSeries{{0, Rational(1)}};
    add_term(q[1], 1, Rational(-1, 2));
    add_term(q[1], -1, Rational(1, 2));
    for (int j = 2; j <= K; ++j) {
        // extend Tp to order m = j-1 via m T_m = sum_i i S_i T_{m-i},
        // S_i = -q^{(i)} (real rational, since h_nu = i q_nu)
        const int m = j - 1;
        RatSeries acc;
        for (int i = 1; i <= m; ++i) {
            RatSeries Si;
            for (const auto& [nu, c] : q[static_cast<size_t>(i)]) Si.emplace(nu, -c * i);
            const RatSeries piece = convolve(Si, Tp[static_cast<size_t>(m - i)]);
            for (const auto& [nu, c] : piece) {
                auto it = acc.find(nu);
                if (it == acc.end())
                    acc.emplace(nu, c);
                else {
                    it->second += c;
                    if (it->second == 0) acc.erase(it);
                }
            }
        }
        for (auto& [nu, c] : acc) c /= m;
        Tp[static_cast<size_t>(m)] = std::move(acc);

        // q^(j)(nu) = -sum_{nu0=+-1} nu0 (1/2) T_{nu0}[j-1](nu - nu0),
        // with T_-[m](nu) = T_+[m](-nu)
        for (const auto& [nu, c] : Tp[static_cast<size_t>(m)]) {
            add_term(q[static_cast<size_t>(j)], nu + 1, -c / 2);
            add_term(q[static_cast<size_t>(j)], -nu - 1, c / 2);
        }
    }
    return q;
}

}  // namespace

ImagSeries series_recursion(int k) {
    if (k < 1) throw PreconditionViolated("series_recursion: order must be >= 1");
    return recursion_orders(k)[static_cast<size_t>(k)];
}

ImagSeries series_trees(int k, const trees::EnumerationOptions& opts) {
    const std::vector<HarmonicVector> alphabet = {HarmonicVector{1}, HarmonicVector{-1}};
    ImagSeries out;
    trees::enumerate_trees(
        k, alphabet,
        [&](const trees::LabeledTree& t) {
            const Rational v = trees::kepler_tree_value(t);
            if (v == 0) return;
            const auto currents = trees::line_currents(t);
            add_term(out, currents[0][0], v * t.multiplicity);
        },
        opts);
    return out;
}

ImagSeries series_lagrange(int k) {
    if (k < 1) throw PreconditionViolated("series_lagrange: order must be >= 1");
    // sin^k psi = (2i)^{-k} sum_j C(k,j) (-1)^{k-j} e^{i(2j-k)psi};
    // (1/k!) d^{k-1} brings (i nu)^{k-1}; net coefficient i q with
    // q = -C(k,j) (-1)^{k-j} nu^{k-1} / (k! 2^k)
    ImagSeries out;
    const Rational denom = Rational(factorial_big(k)) * rat_pow2(k);
    for (int j = 0; j <= k; ++j) {
        const long long nu = 2LL * j - k;
        if (nu == 0) continue;
        cpp_int num = binom_big(k, j);
        if ((k - j) % 2 != 0) num = -num;
        cpp_int nupow = 1;
        for (int i = 0; i < k - 1; ++i) nupow *= nu;
        add_term(out, static_cast<int>(nu), Rational(-num * nupow) / denom);
    }
    return out;
}

double lagrange_coefficient(int k, double psi) {
    double s = 0.0;
    for (const auto& [nu, q] : series_lagrange(k))
        if (nu > 0) s += -2.0 * static_cast<double>(q) * std::sin(nu * psi);
    return s;
}

ImagSeries zero_current_tree_sum(int k, const trees::EnumerationOptions& opts) {
    const std::vector<HarmonicVector> alphabet = {HarmonicVector{1}, HarmonicVector{-1}};
    ImagSeries out;
    trees::enumerate_trees(
        k, alphabet,
        [&](const trees::LabeledTree& t) {
            const auto currents = trees::line_currents(t);
            const bool has_zero = std::any_of(currents.begin(), currents.end(),
                                              [](const HarmonicVector& c) { return c.is_zero(); });
            if (!has_zero) return;
            const Rational v = trees::kepler_tree_value(t);
            if (v == 0) return;
            auto it = out.find(currents[0][0]);
            if (it == out.end())
                out.emplace(currents[0][0], v * t.multiplicity);
            else
                it->second += v * t.multiplicity;
        },
        opts);
    for (auto it = out.begin(); it != out.end();)
        it = (it->second == 0) ? out.erase(it) : std::next(it);
    return out;
}

Rational abs_coefficient_sum(const ImagSeries& s) {
    Rational sum = 0;
    for (const auto& [nu, q] : s) sum += abs(q);
    return sum;
}

double solve_kepler(double e, double lambda, SolveMethod method) {
    if (e < 0.0 || e >= 1.0) throw PreconditionViolated("solve_kepler: need 0 <= e < 1");
    const auto F = [&](double xi) { return xi - e * std::sin(xi) - lambda; };
    if (method == SolveMethod::bisection)
        return num::find_root_bisect(F, lambda - e - 1e-9, lambda + e + 1e-9, 1e-16);
    double xi = lambda + e * std::sin(lambda);
    for (int it = 0; it < 200; ++it) {
        const double f = F(xi);
        if (std::abs(f) <= 1e-13) return xi;
        xi -= f / (1.0 - e * std::cos(xi));
    }
    throw NoConvergence("solve_kepler: Newton failed in 200 iterations; use bisection");
}

double series_eval(double e, double psi, int K) {
    double total = 0.0;
    double epow = 1.0;
    for (int j = 1; j <= K; ++j) {
        epow *= e;
        total += epow * lagrange_coefficient(j, psi);
    }
    return total;
}

namespace {

// dense trigonometric polynomial, coefficients c[nu + M] for |nu| <= M
struct TrigPoly {
    int M;
    std::vector<Complex> c;
    explicit TrigPoly(int M_) : M(M_), c(static_cast<size_t>(2 * M_ + 1)) {}
    Complex& at(int nu) { return c[static_cast<size_t>(nu + M)]; }
    Complex get(int nu) const { return (std::abs(nu) <= M) ? c[static_cast<size_t>(nu + M)] : Complex(0); }
    TrigPoly times(const TrigPoly& o) const {
        TrigPoly r(M);
        for (int a = -M; a <= M; ++a) {
            const Complex ca = get(a);
            if (ca == Complex(0)) continue;
            for (int b = std::max(-M - a, -M); b <= std::min(M - a, M); ++b) r.at(a + b) += ca * o.get(b);
        }
        return r;
    }
    TrigPoly derivative() const {
        TrigPoly r(M);
        for (int nu = -M; nu <= M; ++nu) r.at(nu) = get(nu) * Complex(0.0, nu);
        return r;
    }
    double eval(double psi) const {
        Complex s(0.0);
        for (int nu = -M; nu <= M; ++nu) s += get(nu) * std::polar(1.0, nu * psi);
        return s.real();
    }
};

TrigPoly geometric_inverse(double e, int M) {
    // 1/(1 - e cos psi) = (1-e^2)^{-1/2} sum_nu beta^{|nu|} e^{i nu psi},
    // beta = (1 - sqrt(1-e^2))/e
    TrigPoly u(M);
    if (e == 0.0) {
        u.at(0) = 1.0;
        return u;
    }
    const double root = std::sqrt(1.0 - e * e);
    const double beta = (1.0 - root) / e;
    for (int nu = -M; nu <= M; ++nu) u.at(nu) = std::pow(beta, std::abs(nu)) / root;
    return u;
}

double levi_civita_eval(double e, double psi, int K) {
    const int M = 96;
    const TrigPoly u = geometric_inverse(e, M);
    TrigPoly esin(M);  // e sin psi
    esin.at(1) = Complex(0.0, -e / 2.0);
    esin.at(-1) = Complex(0.0, e / 2.0);
    TrigPoly g = u;        // (u d/dpsi)^k applied to psi; k = 1 gives u itself
    TrigPoly spow = esin;  // (e sin psi)^k
    double fact = 1.0;
    double total = 0.0;
    for (int k = 1; k <= K; ++k) {
        fact *= k;
        const TrigPoly term = spow.times(g);
        total += term.eval(psi) / fact;
        if (k == K) break;
        g = u.times(g.derivative());
        spow = spow.times(esin);
    }
    return total;
}

double no_simple_node_eval(double e, double psi, int K) {
    const std::vector<HarmonicVector> alphabet = {HarmonicVector{1}, HarmonicVector{-1}};
    const double w = e / (1.0 - e * std::cos(psi));
    double total = 0.0;
    for (int k = 1; k <= K; ++k) {
        std::map<int, Rational> per_nu;
        trees::enumerate_trees(k, alphabet, [&](const trees::LabeledTree& t) {
            // drop trees with a simple node (exactly one entering line)
            std::vector<int> child_count(static_cast<size_t>(k), 0);
            for (int v = 1; v < k; ++v) ++child_count[static_cast<size_t>(t.parent[v])];
            for (int v = 0; v < k; ++v)
                if (child_count[static_cast<size_t>(v)] == 1) return;
            const Rational q = trees::kepler_tree_value(t);
            if (q == 0) return;
            const auto currents = trees::line_currents(t);
            add_term(per_nu, currents[0][0], q * t.multiplicity);
        });
        double hk = 0.0;
        for (const auto& [nu, q] : per_nu)
            if (nu > 0) hk += -2.0 * static_cast<double>(q) * std::sin(nu * psi);
        total += std::pow(w, k) * hk;
    }
    return total;
}

}  // namespace

double resummed_series_eval(double e, double psi, int K, ResummationRoute route) {
    if (e < 0.0) throw PreconditionViolated("resummed_series_eval: e must be nonnegative");
    if (route == ResummationRoute::power_series && e >= laplace_radius())
        throw PreconditionViolated("resummed_series_eval: e beyond the series convergence radius");
    if (K < 1 || K > 40) throw OrderTooLarge("resummed_series_eval: truncation out of range");
    switch (route) {
        case ResummationRoute::power_series:
            return series_eval(e, psi, K);
        case ResummationRoute::levi_civita:
            return levi_civita_eval(e, psi, K);
        case ResummationRoute::no_simple_node:
            return no_simple_node_eval(e, psi, K);
    }
    throw PreconditionViolated("resummed_series_eval: unknown route");
}

double laplace_radius() {
    const auto f = [](double x) {
        const double r = std::sqrt(1.0 + x * x);
        return std::log(x) + r - std::log1p(r);
    };
    return num::find_root(f, 0.3, 0.9);
}

double eta_parameter(double e) {
    if (e < 0.0 || e > 1.0) throw PreconditionViolated("eta_parameter: need 0 <= e <= 1");
    const double r = std::sqrt(1.0 - e * e);
    return e * std::exp(r) / (1.0 + r);
}

double eta_parameter_imag_axis(double x) {
    const double r = std::sqrt(1.0 + x * x);
    return x * std::exp(r) / (1.0 + r);
}

AnomalyTriple anomalies(double e, double lambda) {
    const double xi = solve_kepler(e, lambda);
    // principal branch for the half-angle formula, preserving the winding
    const double k = std::floor((xi + M_PI) / (2.0 * M_PI));
    const double xr = xi - 2.0 * M_PI * k;
    const double theta =
        2.0 * std::atan2(std::sqrt(1.0 + e) * std::sin(xr / 2.0), std::sqrt(1.0 - e) * std::cos(xr / 2.0)) +
        2.0 * M_PI * k;
    AnomalyTriple a{lambda, xi, theta, 1.0 - e * std::cos(xi)};
    const double id1 = std::abs(a.lambda - (a.xi - e * std::sin(a.xi)));
    const double id2 = std::abs((1.0 - e * std::cos(a.xi)) * (1.0 + e * std::cos(a.theta)) - (1.0 - e * e));
    const double id3 = std::abs(a.rho_over_a - (1.0 - e * e) / (1.0 + e * std::cos(a.theta)));
    if (id1 > 1e-12 || id2 > 1e-12 || id3 > 1e-12)
        throw Error("anomalies: anomaly identities violated beyond 1e-12");
    return a;
}

OrbitElements elements_from_actions(double L, double G, double k, double m) {
    if (L <= 0.0) throw PreconditionViolated("elements_from_actions: L must be positive");
    if (std::abs(G) > L) throw DomainViolation("elements_from_actions: |G| <= L required for bound orbits");
    OrbitElements el;
    el.L = L;
    el.G = G;
    el.e = std::sqrt(std::max(0.0, 1.0 - (G / L) * (G / L)));
    el.a = L * L / (k * m * m);
    return el;
}

FgCoefficients fg_leading_coefficients(int max_degree) {
    std::vector<std::pair<int, int>> basis;  // (a, b): x^a y^b with a odd
    for (int a = 1; a <= max_degree; a += 2)
        for (int b = 0; a + b <= max_degree; ++b) basis.emplace_back(a, b);
    const std::vector<double> es = {0.02, 0.04, 0.06, 0.08, 0.10, 0.12};
    const int nlam = 48;
    const int rows = static_cast<int>(es.size()) * nlam;
    Eigen::MatrixXd A(rows, static_cast<int>(basis.size()));
    Eigen::VectorXd bg(rows), bf(rows);
    int r = 0;
    for (double e : es) {
        for (int i = 0; i < nlam; ++i) {
            const double lam = num::kTwoPi * (i + 0.5) / nlam;
            const auto an = anomalies(e, lam);
            const double x = e * std::sin(lam), y = e * std::cos(lam);
            for (size_t j = 0; j < basis.size(); ++j)
                A(r, static_cast<int>(j)) = std::pow(x, basis[j].first) * std::pow(y, basis[j].second);
            bg(r) = an.xi - lam;
            bf(r) = an.theta - lam;
            ++r;
        }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < static_cast<int>(basis.size()))
        throw FitIllConditioned("fg_leading_coefficients: rank-deficient design matrix");
    const Eigen::VectorXd cg = qr.solve(bg);
    const Eigen::VectorXd cf = qr.solve(bf);
    FgCoefficients out{};
    for (size_t j = 0; j < basis.size(); ++j) {
        if (basis[j] == std::pair<int, int>(1, 0)) {
            out.g_linear = cg(static_cast<int>(j));
            out.f_linear = cf(static_cast<int>(j));
        }
        if (basis[j] == std::pair<int, int>(1, 1)) {
            out.g_xy = cg(static_cast<int>(j));
            out.f_xy = cf(static_cast<int>(j));
        }
    }
    return out;
}

namespace {
double delta_eps(const R3bpParams& par, double G0) {
    const double quartic = G0 * G0 * G0 * G0 / (par.g * par.g * par.R * par.R);
    return -(std::sqrt(1.0 + par.eps) - 1.0) * par.omega * G0 - (par.eps * par.g / (2.0 * par.R)) * quartic;
}
}  // namespace

double r3bp_hamiltonian_elements(const R3bpParams& par, double L0, double lambda0, double G0,
                                 double gamma0) {
    if (L0 <= 0.0) throw PreconditionViolated("r3bp_hamiltonian_elements: L0 must be positive");
    if (std::abs(G0) > L0) throw DomainViolation("r3bp_hamiltonian_elements: |G0| <= L0 required");
    const double e = std::sqrt(std::max(0.0, 1.0 - (G0 / L0) * (G0 / L0)));
    const double angular = 3.0 * std::cos(2.0 * (lambda0 + gamma0)) - e * std::cos(lambda0) -
                           4.5 * e * std::cos(lambda0 + 2.0 * gamma0) +
                           1.5 * e * std::cos(3.0 * lambda0 + 2.0 * gamma0);
    const double quartic = G0 * G0 * G0 * G0 / (par.g * par.g * par.R * par.R);
    return -par.g * par.g / (2.0 * L0 * L0) - par.omega * G0 + delta_eps(par, G0) -
           (par.eps * par.g / (2.0 * par.R)) * quartic * angular;
}

double regularized_r3bp_hamiltonian(const R3bpParams& par, double L, double lambda, double p, double q) {
    if (L <= 0.0) throw PreconditionViolated("regularized_r3bp_hamiltonian: L must be positive");
    const double G = 0.5 * (p * p + q * q);
    if (p * p + q * q >= 2.0 * L)
        throw DomainViolation("regularized_r3bp_hamiltonian: p^2 + q^2 < 2L required");
    const double G0 = L - G;
    // e cos gamma0 = p s / sqrt(L), e sin gamma0 = -q s / sqrt(L) with
    // s = sqrt(1 - G/(2L)): analytic through p = q = 0
    const double s = std::sqrt(1.0 - G / (2.0 * L));
    const double ecg = p * s / std::sqrt(L);
    const double esg = -q * s / std::sqrt(L);
    const double angular = 3.0 * std::cos(2.0 * lambda) +
                           0.5 * (-11.0 * std::cos(lambda) + 3.0 * std::cos(3.0 * lambda)) * ecg +
                           0.5 * (7.0 * std::sin(lambda) + 3.0 * std::sin(3.0 * lambda)) * esg;
    const double quartic = G0 * G0 * G0 * G0 / (par.g * par.g * par.R * par.R);
    return -par.g * par.g / (2.0 * L * L) - par.omega * L + par.omega * G + delta_eps(par, G0) -
           (par.eps * par.g / (2.0 * par.R)) * quartic * angular;
}

std::vector<std::pair<double, double>> levi_civita_map(double x, double y) {
    if (x == 0.0 && y == 0.0) return {{0.0, 0.0}};
    const Complex w = std::sqrt(Complex(x, y));
    return {{w.real(), w.imag()}, {-w.real(), -w.imag()}};
}

}  // namespace hamiltonia::kepler

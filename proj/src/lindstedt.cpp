#include "hamiltonia/lindstedt.hpp"

#include <cmath>

#include "hamiltonia/numerics.hpp"

namespace hamiltonia::lindstedt {

namespace {

FourierSeries component(const VecFourierSeries& v, int r) {
    FourierSeries out(v.dim());
    for (const auto& [nu, c] : v.coefficients()) out.add(nu, c[static_cast<size_t>(r)]);
    return out;
}

double vec_abs_sum(const std::vector<Complex>& v) {
    double s = 0.0;
    for (const auto& x : v) s += std::abs(x);
    return s;
}

void check_f(const FourierSeries& f) {
    if (!satisfies_reality(f)) throw PreconditionViolated("lindstedt: f must be real");
    if (std::abs(f.at(HarmonicVector::zero(f.dim()))) > 0.0)
        throw PreconditionViolated("lindstedt: f must have zero mean");
    if (f.empty()) throw PreconditionViolated("lindstedt: f must be a nonzero trigonometric polynomial");
}

}  // namespace

FourierSeries default_thirring_f() {
    auto f = cosine_series(HarmonicVector{1, 1});
    f += cosine_series(HarmonicVector{1, 0});
    f.set_real_flagged(true);
    return f;
}

VectorXd grad_at(const FourierSeries& f, std::span<const double> alpha) {
    VectorXd g = VectorXd::Zero(f.dim());
    for (const auto& [nu, c] : f.coefficients()) {
        double arg = 0.0;
        for (int i = 0; i < f.dim(); ++i) arg += nu[i] * alpha[static_cast<size_t>(i)];
        const Complex e = std::polar(1.0, arg);
        for (int i = 0; i < f.dim(); ++i) g[i] += (c * Complex(0.0, nu[i]) * e).real();
    }
    return g;
}

VecFourierSeries TorusSeries::h_eps(double eps) const {
    VecFourierSeries sum(omega.dim());
    double ep = 1.0;
    for (const auto& hk : orders) {
        ep *= eps;
        for (const auto& [nu, c] : hk.coefficients()) {
            std::vector<Complex> v(c);
            for (auto& x : v) x *= ep;
            sum.add(nu, v);
        }
    }
    return sum;
}

std::vector<double> TorusSeries::eval_h(double eps, std::span<const double> psi) const {
    const auto v = fourier_eval(h_eps(eps), psi);
    std::vector<double> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = v[i].real();
    return out;
}

std::vector<double> TorusSeries::eval_H(double eps, std::span<const double> psi) const {
    const auto v = fourier_eval(directional_derivative(h_eps(eps), omega), psi);
    std::vector<double> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = v[i].real();
    return out;
}

namespace {

TorusSeries series_by_recursion(const FourierSeries& f, const FrequencyVector& omega, int K) {
    const int ell = omega.dim();
    const int N = f.degree();
    TorusSeries T{omega, K, {}};
    // exp factors E[j][m] = [e^{i nu_j . h}]^(m) per f-harmonic j
    std::vector<HarmonicVector> harmonics;
    std::vector<Complex> fcoef;
    for (const auto& [nu0, c] : f.coefficients()) {
        harmonics.push_back(nu0);
        fcoef.push_back(c);
    }
    std::vector<std::vector<FourierSeries>> expf(harmonics.size());
    for (size_t j = 0; j < harmonics.size(); ++j) {
        FourierSeries one(ell);
        one.add(HarmonicVector::zero(ell), Complex(1.0, 0.0));
        expf[j].push_back(one);
    }
    for (int k = 1; k <= K; ++k) {
        // order k-1 of d_alpha f(psi + h), vector valued
        VecFourierSeries F(ell);
        for (size_t j = 0; j < harmonics.size(); ++j) {
            const auto& nu0 = harmonics[j];
            const FourierSeries piece = shifted(expf[j][static_cast<size_t>(k - 1)], nu0);
            std::vector<Complex> dir(static_cast<size_t>(ell));
            for (int r = 0; r < ell; ++r) dir[static_cast<size_t>(r)] = fcoef[j] * Complex(0.0, nu0[r]);
            for (const auto& [nu, c] : piece.coefficients()) {
                std::vector<Complex> v(dir);
                for (auto& x : v) x *= c;
                F.add(nu, v);
            }
        }
        // zero mode must cancel identically (formal solvability)
        const auto zero_mode = F.at(HarmonicVector::zero(ell));
        if (!zero_mode.empty() && vec_abs_sum(zero_mode) > 1e-12 * std::max(1e-300, F.abs_sum()))
            throw ZeroMeanObstruction("lindstedt_series: nonzero mean at order " + std::to_string(k));
        VecFourierSeries hk(ell);
        hk.declare_truncation(k * N);
        for (const auto& [nu, c] : F.coefficients()) {
            if (nu.is_zero()) continue;
            const double d = omega.small_divisor(nu);
            std::vector<Complex> v(c);
            for (auto& x : v) x /= d * d;
            hk.add(nu, v);
        }
        T.orders.push_back(hk);
        if (k == K) break;
        // extend the exp factors to order k: m E_m = sum_j j S_j E_{m-j},
        // S_j = i nu0 . h^(j)
        for (size_t j = 0; j < harmonics.size(); ++j) {
            FourierSeries acc(ell);
            for (int i = 1; i <= k; ++i) {
                const FourierSeries Si =
                    dot_with(T.orders[static_cast<size_t>(i - 1)], harmonics[j], Complex(0.0, 1.0));
                FourierSeries scaled = Si;
                scaled *= Complex(static_cast<double>(i), 0.0);
                acc += product(scaled, expf[j][static_cast<size_t>(k - i)]);
            }
            acc *= Complex(1.0 / k, 0.0);
            expf[j].push_back(acc);
        }
    }
    return T;
}

TorusSeries series_by_trees(const FourierSeries& f, const FrequencyVector& omega, int K,
                            const trees::EnumerationOptions& opts) {
    const int ell = omega.dim();
    std::vector<HarmonicVector> alphabet;
    for (const auto& [nu, c] : f.coefficients()) alphabet.push_back(nu);
    TorusSeries T{omega, K, {}};
    for (int k = 1; k <= K; ++k) {
        VecFourierSeries hk(ell);
        hk.declare_truncation(k * f.degree());
        trees::enumerate_trees(
            k, alphabet,
            [&](const trees::LabeledTree& t) {
                const auto currents = trees::line_currents(t);
                for (const auto& cur : currents)
                    if (cur.is_zero()) return;  // Lindstedt sums skip zero-current trees
                std::vector<Complex> val(static_cast<size_t>(ell));
                bool nonzero = false;
                for (int r = 0; r < ell; ++r) {
                    std::vector<double> u(static_cast<size_t>(ell), 0.0);
                    u[static_cast<size_t>(r)] = 1.0;
                    const Complex vr =
                        trees::lindstedt_tree_value(t, omega, f, u) * static_cast<double>(t.multiplicity);
                    val[static_cast<size_t>(r)] = vr;
                    nonzero = nonzero || (vr != Complex(0.0, 0.0));
                }
                if (nonzero) hk.add(currents[0], val);
            },
            opts);
        T.orders.push_back(hk);
    }
    return T;
}

}  // namespace

TorusSeries lindstedt_series(const FourierSeries& f, const FrequencyVector& omega, int K, Method method,
                             const trees::EnumerationOptions& opts) {
    check_f(f);
    if (f.dim() != omega.dim()) throw PreconditionViolated("lindstedt_series: dimension mismatch");
    if (K < 1) throw PreconditionViolated("lindstedt_series: order must be >= 1");
    return method == Method::recursion ? series_by_recursion(f, omega, K)
                                       : series_by_trees(f, omega, K, opts);
}

VecFourierSeries lindstedt_coefficient(const FourierSeries& f, const FrequencyVector& omega, int k,
                                       Method method) {
    return lindstedt_series(f, omega, k, method).orders.back();
}

double torus_residual(const TorusSeries& T, const FourierSeries& f, double eps, int grid_n) {
    const int ell = T.ell();
    const VecFourierSeries h = T.h_eps(eps);
    VecFourierSeries lhs(ell);  // (omega . d)^2 h: multiply by -(omega.nu)^2
    for (const auto& [nu, c] : h.coefficients()) {
        const double d = nu.dot(T.omega.omega());
        std::vector<Complex> v(c);
        for (auto& x : v) x *= -d * d;
        lhs.add(nu, v);
    }
    double worst = 0.0;
    std::vector<double> psi(static_cast<size_t>(ell));
    std::vector<int> idx(static_cast<size_t>(ell), 0);
    const auto sweep = [&](auto&& self, int pos) -> void {
        if (pos == ell) {
            const auto lv = fourier_eval(lhs, psi);
            const auto hv = fourier_eval(h, psi);
            std::vector<double> alpha(static_cast<size_t>(ell));
            for (int i = 0; i < ell; ++i) alpha[static_cast<size_t>(i)] = psi[static_cast<size_t>(i)] + hv[static_cast<size_t>(i)].real();
            const VectorXd g = grad_at(f, alpha);
            for (int i = 0; i < ell; ++i)
                worst = std::max(worst, std::abs(lv[static_cast<size_t>(i)].real() + eps * g[i]));
            return;
        }
        for (idx[static_cast<size_t>(pos)] = 0; idx[static_cast<size_t>(pos)] < grid_n; ++idx[static_cast<size_t>(pos)]) {
            psi[static_cast<size_t>(pos)] = num::kTwoPi * (idx[static_cast<size_t>(pos)] + 0.37) / grid_n;
            self(self, pos + 1);
        }
    };
    sweep(sweep, 0);
    return worst;
}

FlowDeviation verify_torus_flow(const TorusSeries& T, const FourierSeries& f, double eps,
                                std::span<const double> psi0, double t_final, double tol) {
    const int ell = T.ell();
    const auto h0 = T.eval_h(eps, psi0);
    const auto H0 = T.eval_H(eps, psi0);
    std::vector<double> y(2 * static_cast<size_t>(ell));  // [A, alpha]
    for (int i = 0; i < ell; ++i) {
        y[static_cast<size_t>(i)] = T.omega[i] + H0[static_cast<size_t>(i)];
        y[static_cast<size_t>(ell + i)] = psi0[static_cast<size_t>(i)] + h0[static_cast<size_t>(i)];
    }
    const auto rhs = [&](const std::vector<double>& s, std::vector<double>& d, double) {
        d.assign(2 * static_cast<size_t>(ell), 0.0);
        std::vector<double> alpha(s.begin() + ell, s.end());
        const VectorXd g = grad_at(f, alpha);
        for (int i = 0; i < ell; ++i) {
            d[static_cast<size_t>(i)] = -eps * g[i];
            d[static_cast<size_t>(ell + i)] = s[static_cast<size_t>(i)];
        }
    };
    FlowDeviation dev{0.0, 0.0};
    std::vector<double> times;
    for (int i = 1; i <= 50; ++i) times.push_back(t_final * i / 50.0);
    num::integrate_ode_sampled(
        rhs, y, 0.0, times,
        [&](double t, const std::vector<double>& s) {
            std::vector<double> psi(static_cast<size_t>(ell));
            for (int i = 0; i < ell; ++i) psi[static_cast<size_t>(i)] = psi0[static_cast<size_t>(i)] + T.omega[i] * t;
            const auto hr = T.eval_h(eps, psi);
            const auto Hr = T.eval_H(eps, psi);
            for (int i = 0; i < ell; ++i) {
                dev.max_action_dev = std::max(
                    dev.max_action_dev, std::abs(s[static_cast<size_t>(i)] - (T.omega[i] + Hr[static_cast<size_t>(i)])));
                dev.max_angle_dev =
                    std::max(dev.max_angle_dev,
                             std::abs(s[static_cast<size_t>(ell + i)] -
                                      (psi[static_cast<size_t>(i)] + hr[static_cast<size_t>(i)])));
            }
        },
        tol);
    return dev;
}

BirkhoffSeries birkhoff_series(const FourierSeries& f, const FrequencyVector& omega0, int K, double eps) {
    // f = 0 is legitimate here: Phi = 0 and the new Hamiltonian is already linear
    if (!f.empty()) check_f(f);
    if (omega0.dim() != 2 || f.dim() != 2)
        throw PreconditionViolated("birkhoff_series: the isochronous model lives on l = 2");
    BirkhoffSeries out{FourierSeries(2), {}, eps};
    for (int k = 0; k < K; ++k) out.orders.emplace_back(2);
    for (const auto& [nu, c] : f.coefficients()) {
        const double d = nu.dot(omega0.omega());
        const double deff = d + eps * nu[1];
        if (std::abs(deff) < 1e-14)
            throw ResonantDenominator("birkhoff_series: omega01 nu1 + (omega02 + eps) nu2 = 0");
        out.closed.add(nu, -eps * c / (Complex(0.0, 1.0) * deff));
        // orders from the order-by-order solve: i d Phi^(k) = -i nu2 Phi^(k-1) - delta_{k1} f
        Complex prev = -c / (Complex(0.0, 1.0) * d);
        out.orders[0].add(nu, prev);
        for (int k = 2; k <= K; ++k) {
            prev *= -static_cast<double>(nu[1]) / d;
            out.orders[static_cast<size_t>(k - 1)].add(nu, prev);
        }
    }
    // closed-form Taylor route: Phi^(k)_nu = -f_nu (-nu2)^{k-1} / (i d^k);
    // must coincide with the recursion above
    for (const auto& [nu, c] : f.coefficients()) {
        const double d = nu.dot(omega0.omega());
        double pw = 1.0;
        for (int k = 1; k <= K; ++k) {
            const Complex taylor = -c * pw / (Complex(0.0, 1.0) * std::pow(d, k));
            const Complex rec = out.orders[static_cast<size_t>(k - 1)].at(nu);
            if (std::abs(taylor - rec) > 1e-12 * std::max(1.0, std::abs(taylor)))
                throw Error("birkhoff_series: order expansion mismatch with the closed form");
            pw *= -static_cast<double>(nu[1]);
        }
    }
    return out;
}

double birkhoff_conjugacy_error(const FourierSeries& f, const FrequencyVector& omega0, double eps,
                                const VectorXd& A0, const VectorXd& alpha0, double t_final, double tol) {
    const BirkhoffSeries B = birkhoff_series(f, omega0, 1, eps);
    const auto grad_phi = [&](const VectorXd& alpha) {
        return grad_at(B.closed, std::span<const double>(alpha.data(), 2));
    };
    const double w1 = omega0[0], w2 = omega0[1] + eps;
    std::vector<double> y(4);
    const VectorXd g0 = grad_phi(alpha0);
    y[0] = A0[0] + g0[0];
    y[1] = A0[1] + g0[1];
    y[2] = alpha0[0];
    y[3] = alpha0[1];
    const auto rhs = [&](const std::vector<double>& s, std::vector<double>& d, double) {
        std::vector<double> alpha = {s[2], s[3]};
        const VectorXd g = grad_at(f, alpha);
        d = {-eps * g[0], -eps * g[1], w1, w2};
    };
    double worst = 0.0;
    std::vector<double> times;
    for (int i = 1; i <= 40; ++i) times.push_back(t_final * i / 40.0);
    num::integrate_ode_sampled(
        rhs, y, 0.0, times,
        [&](double t, const std::vector<double>& s) {
            VectorXd alpha_ref(2);
            alpha_ref << alpha0[0] + w1 * t, alpha0[1] + w2 * t;
            const VectorXd g = grad_phi(alpha_ref);
            worst = std::max(worst, std::abs(s[0] - (A0[0] + g[0])));
            worst = std::max(worst, std::abs(s[1] - (A0[1] + g[1])));
            worst = std::max(worst, std::abs(s[2] - alpha_ref[0]));
            worst = std::max(worst, std::abs(s[3] - alpha_ref[1]));
        },
        tol);
    return worst;
}

std::vector<Obstruction> poincare_obstruction_scan(
    const FourierSeries& f, const std::function<VectorXd(const VectorXd&)>& omega_of_A, const VectorXd& lo,
    const VectorXd& hi, int max_norm, int grid_n) {
    const int dim = static_cast<int>(lo.size());
    std::vector<Obstruction> out;
    for (const auto& [nu, c] : f.coefficients()) {
        if (nu.is_zero() || nu.norm1() > max_norm) continue;
        const auto s_of = [&](const VectorXd& A) {
            const VectorXd w = omega_of_A(A);
            double s = 0.0;
            for (int i = 0; i < dim; ++i) s += w[i] * nu[i];
            return s;
        };
        // grid scan along each axis direction for sign changes
        bool found = false;
        std::vector<int> idx(static_cast<size_t>(dim), 0);
        const auto corner = [&](const std::vector<int>& ix) {
            VectorXd A(dim);
            for (int i = 0; i < dim; ++i)
                A[i] = lo[i] + (hi[i] - lo[i]) * ix[static_cast<size_t>(i)] / (grid_n - 1);
            return A;
        };
        const auto rec = [&](auto&& self, int pos) -> void {
            if (found) return;
            if (pos == dim) {
                const VectorXd A = corner(idx);
                const double sa = s_of(A);
                for (int axis = 0; axis < dim && !found; ++axis) {
                    if (idx[static_cast<size_t>(axis)] + 1 >= grid_n) continue;
                    auto jdx = idx;
                    ++jdx[static_cast<size_t>(axis)];
                    const VectorXd B = corner(jdx);
                    const double sb = s_of(B);
                    if (sa == 0.0 || sa * sb < 0.0) {
                        // bisection along the edge
                        VectorXd x0 = A, x1 = B;
                        for (int it = 0; it < 80; ++it) {
                            const VectorXd mid = 0.5 * (x0 + x1);
                            if (s_of(x0) * s_of(mid) <= 0.0)
                                x1 = mid;
                            else
                                x0 = mid;
                        }
                        out.push_back({nu, 0.5 * (x0 + x1)});
                        found = true;
                    }
                }
                return;
            }
            for (idx[static_cast<size_t>(pos)] = 0; idx[static_cast<size_t>(pos)] < grid_n && !found;
                 ++idx[static_cast<size_t>(pos)])
                self(self, pos + 1);
        };
        rec(rec, 0);
    }
    return out;
}

namespace {

HarmonicVector fast_part(const HarmonicVector& nu, int r) {
    std::vector<int> v(static_cast<size_t>(r));
    for (int i = 0; i < r; ++i) v[static_cast<size_t>(i)] = nu[i];
    return HarmonicVector(std::move(v));
}

}  // namespace

ResonantSeries resonant_lindstedt(const FourierSeries& f, int r, const FrequencyVector& omega,
                                  const VectorXd& beta0) {
    check_f(f);
    const int s = f.dim() - r;
    if (r < 1 || s < 1) throw PreconditionViolated("resonant_lindstedt: need r >= 1 fast and s >= 1 slow");
    if (omega.dim() != r) throw PreconditionViolated("resonant_lindstedt: omega must have the fast dimension");
    // stationarity and nondegeneracy of the fast-angle average at beta0
    VectorXd grad = VectorXd::Zero(s);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(s, s);
    for (const auto& [nu, c] : f.coefficients()) {
        if (!fast_part(nu, r).is_zero()) continue;
        double arg = 0.0;
        for (int i = 0; i < s; ++i) arg += nu[r + i] * beta0[i];
        const Complex e = std::polar(1.0, arg);
        for (int a = 0; a < s; ++a) {
            grad[a] += (c * Complex(0.0, nu[r + a]) * e).real();
            for (int b = 0; b < s; ++b)
                hess(a, b) += (-c * static_cast<double>(nu[r + a]) * static_cast<double>(nu[r + b]) * e).real();
        }
    }
    if (grad.cwiseAbs().maxCoeff() > 1e-10)
        throw StationarityViolated("resonant_lindstedt: beta0 is not a stationary point of fbar");
    if (std::abs(hess.determinant()) < 1e-8)
        throw DegenerateHessian("resonant_lindstedt: Hessian of fbar at beta0 is degenerate");

    // phi_nu(beta0 + k) structure: group f by fast harmonic; at this order only
    // values and first beta-derivatives at beta0 enter
    ResonantSeries sol{r, s, VecFourierSeries(r), VecFourierSeries(r), VecFourierSeries(r),
                       VecFourierSeries(r), VectorXd::Zero(s), hess};

    // order 1
    for (const auto& [nu, c] : f.coefficients()) {
        const HarmonicVector nf = fast_part(nu, r);
        if (nf.is_zero()) continue;
        double arg = 0.0;
        for (int i = 0; i < s; ++i) arg += nu[r + i] * beta0[i];
        const Complex ephase = c * std::polar(1.0, arg);
        const double d = omega.small_divisor(nf);
        std::vector<Complex> hv(static_cast<size_t>(r)), kv(static_cast<size_t>(s));
        for (int i = 0; i < r; ++i) hv[static_cast<size_t>(i)] = Complex(0.0, nf[i]) * ephase / (d * d);
        for (int i = 0; i < s; ++i) kv[static_cast<size_t>(i)] = Complex(0.0, nu[r + i]) * ephase / (d * d);
        sol.h1.add(nf, hv);
        sol.k1.add(nf, kv);
    }

    // order 2: RHS = -[ d2f . (h1, k1 + c1) ] expanded in fast Fourier modes;
    // the beta-equation zero mode fixes c1 through the Hessian
    const auto assemble = [&](const VectorXd& c1, VecFourierSeries& rhs_h, VecFourierSeries& rhs_k) {
        rhs_h = VecFourierSeries(r);
        rhs_k = VecFourierSeries(r);
        for (const auto& [nu0, c] : f.coefficients()) {
            const HarmonicVector nf0 = fast_part(nu0, r);
            double arg = 0.0;
            for (int i = 0; i < s; ++i) arg += nu0[r + i] * beta0[i];
            const Complex base = c * std::polar(1.0, arg);
            // scalar series s(psi) = i nu0 . h1 + i mu0 . (k1 + c1)
            FourierSeries sser(r);
            for (const auto& [nh, hv] : sol.h1.coefficients()) {
                Complex dot(0.0, 0.0);
                for (int i = 0; i < r; ++i) dot += Complex(0.0, nf0[i]) * hv[static_cast<size_t>(i)];
                sser.add(nh, dot);
            }
            for (const auto& [nh, kv] : sol.k1.coefficients()) {
                Complex dot(0.0, 0.0);
                for (int i = 0; i < s; ++i) dot += Complex(0.0, nu0[r + i]) * kv[static_cast<size_t>(i)];
                sser.add(nh, dot);
            }
            Complex cdot(0.0, 0.0);
            for (int i = 0; i < s; ++i) cdot += Complex(0.0, nu0[r + i]) * c1[i];
            sser.add(HarmonicVector::zero(r), cdot);
            // contribution: base e^{i nf0 psi} (i nu0_fast/slow) s(psi)
            for (const auto& [nh, sv] : sser.coefficients()) {
                const HarmonicVector key = nh + nf0;
                std::vector<Complex> hv(static_cast<size_t>(r)), kv(static_cast<size_t>(s));
                for (int i = 0; i < r; ++i) hv[static_cast<size_t>(i)] = base * Complex(0.0, nf0[i]) * sv;
                for (int i = 0; i < s; ++i) kv[static_cast<size_t>(i)] = base * Complex(0.0, nu0[r + i]) * sv;
                rhs_h.add(key, hv);
                rhs_k.add(key, kv);
            }
        }
    };
    VecFourierSeries rhs_h(r), rhs_k(r);
    assemble(VectorXd::Zero(s), rhs_h, rhs_k);
    // zero mode of the beta equation: mean + Hess c1 = 0
    const auto mean_k = rhs_k.at(HarmonicVector::zero(r));
    VectorXd mean(s);
    for (int i = 0; i < s; ++i)
        mean[i] = mean_k.empty() ? 0.0 : mean_k[static_cast<size_t>(i)].real();
    sol.c1 = hess.fullPivLu().solve(-mean);
    assemble(sol.c1, rhs_h, rhs_k);
    const auto hz = rhs_h.at(HarmonicVector::zero(r));
    if (!hz.empty() && vec_abs_sum(hz) > 1e-12 * std::max(1e-300, rhs_h.abs_sum()))
        throw ZeroMeanObstruction("resonant_lindstedt: fast equation has a nonzero mean at order 2");
    const auto kz = rhs_k.at(HarmonicVector::zero(r));
    if (!kz.empty() && vec_abs_sum(kz) > 1e-10 * std::max(1e-300, rhs_k.abs_sum()))
        throw ZeroMeanObstruction("resonant_lindstedt: slow equation mean not absorbed by the Hessian");
    for (const auto& [nu, c] : rhs_h.coefficients()) {
        if (nu.is_zero()) continue;
        const double d = omega.small_divisor(nu);
        std::vector<Complex> v(c);
        for (auto& x : v) x /= d * d;
        sol.h2.add(nu, v);
    }
    for (const auto& [nu, c] : rhs_k.coefficients()) {
        if (nu.is_zero()) continue;
        const double d = omega.small_divisor(nu);
        std::vector<Complex> v(c);
        for (auto& x : v) x /= d * d;
        sol.k2.add(nu, v);
    }
    return sol;
}

double resonant_residual(const ResonantSeries& sol, const FourierSeries& f, const FrequencyVector& omega,
                         const VectorXd& beta0, int grid_n) {
    const int r = sol.r, s = sol.s;
    // pointwise partials of f at (psi, beta0)
    const auto partials = [&](std::span<const double> psi) {
        VectorXd d_fast = VectorXd::Zero(r), d_slow = VectorXd::Zero(s);
        Eigen::MatrixXd dd_ff = Eigen::MatrixXd::Zero(r, r), dd_fs = Eigen::MatrixXd::Zero(r, s),
                        dd_ss = Eigen::MatrixXd::Zero(s, s);
        for (const auto& [nu, c] : f.coefficients()) {
            double arg = 0.0;
            for (int i = 0; i < r; ++i) arg += nu[i] * psi[static_cast<size_t>(i)];
            for (int i = 0; i < s; ++i) arg += nu[r + i] * beta0[i];
            const Complex e = c * std::polar(1.0, arg);
            for (int a = 0; a < r; ++a) {
                d_fast[a] += (Complex(0.0, nu[a]) * e).real();
                for (int b = 0; b < r; ++b) dd_ff(a, b) += (-static_cast<double>(nu[a]) * static_cast<double>(nu[b]) * e).real();
                for (int b = 0; b < s; ++b) dd_fs(a, b) += (-static_cast<double>(nu[a]) * static_cast<double>(nu[r + b]) * e).real();
            }
            for (int a = 0; a < s; ++a) {
                d_slow[a] += (Complex(0.0, nu[r + a]) * e).real();
                for (int b = 0; b < s; ++b) dd_ss(a, b) += (-static_cast<double>(nu[r + a]) * static_cast<double>(nu[r + b]) * e).real();
            }
        }
        return std::make_tuple(d_fast, d_slow, dd_ff, dd_fs, dd_ss);
    };
    const auto second_deriv_apply = [&](const VecFourierSeries& series, std::span<const double> psi) {
        // (omega.d)^2 series evaluated at psi (real part)
        VectorXd out = VectorXd::Zero(static_cast<int>(series.at(HarmonicVector::zero(r)).size()));
        std::vector<double> vals;
        VecFourierSeries tmp(r);
        for (const auto& [nu, c] : series.coefficients()) {
            const double d = nu.dot(omega.omega());
            std::vector<Complex> v(c);
            for (auto& x : v) x *= -d * d;
            tmp.add(nu, v);
        }
        const auto ev = fourier_eval(tmp, psi);
        VectorXd res(static_cast<int>(ev.size()));
        for (size_t i = 0; i < ev.size(); ++i) res[static_cast<int>(i)] = ev[i].real();
        return res;
    };
    double worst = 0.0;
    std::vector<double> psi(static_cast<size_t>(r));
    std::vector<int> idx(static_cast<size_t>(r), 0);
    const auto sweep = [&](auto&& self, int pos) -> void {
        if (pos == r) {
            const auto [d_fast, d_slow, dd_ff, dd_fs, dd_ss] = partials(psi);
            // order 1: (omega.d)^2 h1 = -d_fast, (omega.d)^2 k1 = -d_slow
            const VectorXd lhs_h1 = second_deriv_apply(sol.h1, psi);
            const VectorXd lhs_k1 = second_deriv_apply(sol.k1, psi);
            for (int i = 0; i < r; ++i) worst = std::max(worst, std::abs(lhs_h1[i] + d_fast[i]));
            for (int i = 0; i < s; ++i) worst = std::max(worst, std::abs(lhs_k1[i] + d_slow[i]));
            // order 2: (omega.d)^2 h2 = -[dd_ff h1 + dd_fs (k1 + c1)]
            const auto h1v = fourier_eval(sol.h1, psi);
            const auto k1v = fourier_eval(sol.k1, psi);
            VectorXd h1r(r), k1r(s);
            for (int i = 0; i < r; ++i) h1r[i] = h1v[static_cast<size_t>(i)].real();
            for (int i = 0; i < s; ++i) k1r[i] = k1v[static_cast<size_t>(i)].real() + sol.c1[i];
            const VectorXd lhs_h2 = second_deriv_apply(sol.h2, psi);
            const VectorXd lhs_k2 = second_deriv_apply(sol.k2, psi);
            const VectorXd rhs_h2 = -(dd_ff * h1r + dd_fs * k1r);
            const VectorXd rhs_k2 = -(dd_fs.transpose() * h1r + dd_ss * k1r);
            for (int i = 0; i < r; ++i) worst = std::max(worst, std::abs(lhs_h2[i] - rhs_h2[i]));
            for (int i = 0; i < s; ++i) worst = std::max(worst, std::abs(lhs_k2[i] - rhs_k2[i]));
            return;
        }
        for (idx[static_cast<size_t>(pos)] = 0; idx[static_cast<size_t>(pos)] < grid_n; ++idx[static_cast<size_t>(pos)]) {
            psi[static_cast<size_t>(pos)] = num::kTwoPi * (idx[static_cast<size_t>(pos)] + 0.21) / grid_n;
            self(self, pos + 1);
        }
    };
    sweep(sweep, 0);
    return worst;
}

MatrixXcd ClusterMatrix::eval(double eps) const {
    const int ell = nu.dim();
    MatrixXcd M = MatrixXcd::Zero(ell, ell);
    double ep = 1.0;
    for (const auto& c : order_coeff) {
        ep *= eps;
        M += ep * c;
    }
    return M;
}

namespace {

// labeled free trees on m nodes via Pruefer sequences; returns parent arrays
// with the root fixed at node m-1
std::vector<std::vector<int>> rooted_labeled_trees(int m) {
    std::vector<std::vector<int>> out;
    if (m == 1) {
        out.push_back({-1});
        return out;
    }
    if (m == 2) {
        out.push_back({1, -1});
        return out;
    }
    std::vector<int> seq(static_cast<size_t>(m - 2), 0);
    const auto decode = [&]() {
        std::vector<int> degree(static_cast<size_t>(m), 1);
        for (int v : seq) ++degree[static_cast<size_t>(v)];
        std::vector<std::pair<int, int>> edges;
        std::vector<bool> used(static_cast<size_t>(m), false);
        std::vector<int> work(seq);
        for (int v : work) {
            for (int leaf = 0; leaf < m; ++leaf) {
                if (degree[static_cast<size_t>(leaf)] == 1 && !used[static_cast<size_t>(leaf)]) {
                    edges.emplace_back(leaf, v);
                    used[static_cast<size_t>(leaf)] = true;
                    --degree[static_cast<size_t>(v)];
                    break;
                }
            }
        }
        std::vector<int> last;
        for (int v = 0; v < m; ++v)
            if (!used[static_cast<size_t>(v)] && degree[static_cast<size_t>(v)] >= 1) last.push_back(v);
        edges.emplace_back(last[0], last[1]);
        // orient toward the root m-1
        std::vector<std::vector<int>> adj(static_cast<size_t>(m));
        for (const auto& [a, b] : edges) {
            adj[static_cast<size_t>(a)].push_back(b);
            adj[static_cast<size_t>(b)].push_back(a);
        }
        std::vector<int> parent(static_cast<size_t>(m), -2);
        std::vector<int> stack = {m - 1};
        parent[static_cast<size_t>(m - 1)] = -1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int w : adj[static_cast<size_t>(v)]) {
                if (parent[static_cast<size_t>(w)] == -2) {
                    parent[static_cast<size_t>(w)] = v;
                    stack.push_back(w);
                }
            }
        }
        return parent;
    };
    while (true) {
        out.push_back(decode());
        int pos = m - 3;
        while (pos >= 0 && seq[static_cast<size_t>(pos)] == m - 1) {
            seq[static_cast<size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++seq[static_cast<size_t>(pos)];
    }
    return out;
}

long long factorial_ll(int k) {
    long long r = 1;
    for (int i = 2; i <= k; ++i) r *= i;
    return r;
}

}  // namespace

ClusterMatrix cluster_matrix(const FourierSeries& f, const FrequencyVector& omega, const HarmonicVector& nu,
                             int k_max) {
    check_f(f);
    const int ell = omega.dim();
    if (k_max < 1 || k_max > 6) throw BudgetExceeded("cluster_matrix: order out of the supported range");
    if (!omega.diophantine())
        throw PreconditionViolated("cluster_matrix: omega must carry Diophantine constants for the scales");
    const double C = omega.diophantine()->C;
    std::vector<HarmonicVector> supp;
    std::vector<Complex> fc;
    for (const auto& [mu, c] : f.coefficients()) {
        supp.push_back(mu);
        fc.push_back(c);
    }
    ClusterMatrix out{nu, k_max, {}};
    for (int m = 1; m <= k_max; ++m) {
        MatrixXcd M = MatrixXcd::Zero(ell, ell);
        const auto trees_m = rooted_labeled_trees(m);
        const double pref = 1.0 / static_cast<double>(factorial_ll(m - 1));
        std::vector<int> choice(static_cast<size_t>(m), 0);
        for (const auto& parent : trees_m) {
            // children lists and a post-order for subtree sums
            const auto assign = [&](auto&& self, int pos) -> void {
                if (pos < m) {
                    for (choice[static_cast<size_t>(pos)] = 0;
                         choice[static_cast<size_t>(pos)] < static_cast<int>(supp.size());
                         ++choice[static_cast<size_t>(pos)])
                        self(self, pos + 1);
                    return;
                }
                // zero total harmonic required
                std::vector<int> total(static_cast<size_t>(ell), 0);
                for (int v = 0; v < m; ++v)
                    for (int i = 0; i < ell; ++i)
                        total[static_cast<size_t>(i)] += supp[static_cast<size_t>(choice[static_cast<size_t>(v)])][i];
                for (int i = 0; i < ell; ++i)
                    if (total[static_cast<size_t>(i)] != 0) return;
                // node factors prod(-f)
                Complex nodes(1.0, 0.0);
                for (int v = 0; v < m; ++v) nodes *= -fc[static_cast<size_t>(choice[static_cast<size_t>(v)])];
                // subtree harmonic sums
                std::vector<std::vector<int>> sub(static_cast<size_t>(m), std::vector<int>(static_cast<size_t>(ell), 0));
                for (int v = 0; v < m; ++v)
                    for (int i = 0; i < ell; ++i)
                        sub[static_cast<size_t>(v)][static_cast<size_t>(i)] =
                            supp[static_cast<size_t>(choice[static_cast<size_t>(v)])][i];
                // accumulate towards the root (children have higher index only
                // in a topological pass; iterate until stable instead)
                {
                    std::vector<int> order;
                    std::vector<int> state(static_cast<size_t>(m), 0);
                    // simple DFS post-order from the root
                    std::vector<std::vector<int>> children(static_cast<size_t>(m));
                    for (int v = 0; v < m; ++v)
                        if (parent[static_cast<size_t>(v)] >= 0) children[static_cast<size_t>(parent[static_cast<size_t>(v)])].push_back(v);
                    std::vector<int> stack = {m - 1};
                    std::vector<int> post;
                    while (!stack.empty()) {
                        const int v = stack.back();
                        stack.pop_back();
                        post.push_back(v);
                        for (int w : children[static_cast<size_t>(v)]) stack.push_back(w);
                    }
                    for (auto it = post.rbegin(); it != post.rend(); ++it) {
                        const int v = *it;
                        const int p = parent[static_cast<size_t>(v)];
                        if (p >= 0)
                            for (int i = 0; i < ell; ++i)
                                sub[static_cast<size_t>(p)][static_cast<size_t>(i)] += sub[static_cast<size_t>(v)][static_cast<size_t>(i)];
                    }
                }
                for (int v_in = 0; v_in < m; ++v_in) {
                    // line currents: subtree sum plus nu when v_in lies below
                    // the line; all internal lines must be scale 0
                    Complex lines(1.0, 0.0);
                    bool ok = true;
                    for (int v = 0; v < m && ok; ++v) {
                        const int p = parent[static_cast<size_t>(v)];
                        if (p < 0) continue;
                        // does v_in lie in the subtree of v?
                        bool below = false;
                        for (int w = v_in; w >= 0; w = parent[static_cast<size_t>(w)])
                            if (w == v) {
                                below = true;
                                break;
                            }
                        std::vector<int> cur(sub[static_cast<size_t>(v)]);
                        if (below)
                            for (int i = 0; i < ell; ++i) cur[static_cast<size_t>(i)] += nu[i];
                        const HarmonicVector hcur((std::vector<int>(cur)));
                        if (hcur.is_zero()) {
                            ok = false;
                            break;
                        }
                        const double d = hcur.dot(omega.omega());
                        if (C * std::abs(d) <= 1.0) {  // not scale 0
                            ok = false;
                            break;
                        }
                        double dot = 0.0;
                        for (int i = 0; i < ell; ++i)
                            dot += static_cast<double>(supp[static_cast<size_t>(choice[static_cast<size_t>(p)])][i]) *
                                   supp[static_cast<size_t>(choice[static_cast<size_t>(v)])][i];
                        lines *= dot / (d * d);
                    }
                    if (!ok) continue;
                    const auto& mu_out = supp[static_cast<size_t>(choice[static_cast<size_t>(m - 1)])];
                    const auto& mu_in = supp[static_cast<size_t>(choice[static_cast<size_t>(v_in)])];
                    for (int rr = 0; rr < ell; ++rr)
                        for (int ss = 0; ss < ell; ++ss)
                            M(rr, ss) += pref * nodes * lines * static_cast<double>(mu_out[rr]) *
                                         static_cast<double>(mu_in[ss]);
                }
            };
            assign(assign, 0);
        }
        out.order_coeff.push_back(M);
    }
    return out;
}

MatrixXcd resummed_propagator(const HarmonicVector& nu, const MatrixXcd& M0, const FrequencyVector& omega) {
    const double d = omega.small_divisor(nu);
    const double d2 = d * d;
    if (M0.norm() / d2 >= 1.0)
        throw ResummationDiverges("resummed_propagator: ||M0|| >= (omega.nu)^2, geometric dominance fails");
    const int ell = static_cast<int>(M0.rows());
    return (d2 * MatrixXcd::Identity(ell, ell) - M0).inverse();
}

MatrixXcd propagator_partial_sum(const HarmonicVector& nu, const MatrixXcd& M0, const FrequencyVector& omega,
                                 int K) {
    const double d2 = std::pow(nu.dot(omega.omega()), 2);
    const int ell = static_cast<int>(M0.rows());
    MatrixXcd term = MatrixXcd::Identity(ell, ell);
    MatrixXcd sum = MatrixXcd::Zero(ell, ell);
    for (int j = 0; j <= K; ++j) {
        sum += term / d2;
        term = term * (M0 / d2);
    }
    return sum;
}

GenFunResult torus_generating_function(const TorusSeries& T, double eps, double closedness_tol) {
    const int ell = T.ell();
    const VecFourierSeries h = T.h_eps(eps);
    const VecFourierSeries Dh = directional_derivative(h, T.omega);
    // one-form w = -Dh + (d_psi Dh)^T h - a, with P_r = sum_s h_s d_r Dh_s
    std::vector<FourierSeries> w, P;
    VectorXd a = VectorXd::Zero(ell);
    for (int rcomp = 0; rcomp < ell; ++rcomp) {
        FourierSeries Pr(ell);
        for (int scomp = 0; scomp < ell; ++scomp)
            Pr += product(component(h, scomp), partial_derivative(component(Dh, scomp), rcomp));
        FourierSeries wr(ell);
        wr += component(Dh, rcomp);
        wr *= Complex(-1.0, 0.0);
        wr += Pr;
        const Complex mean = wr.at(HarmonicVector::zero(ell));
        a[rcomp] = mean.real();
        wr.add(HarmonicVector::zero(ell), -mean);  // remove the a component
        w.push_back(wr);
        P.push_back(Pr);
        // the mean of -Dh vanishes, so a_r is also the mean of P_r
        if (std::abs(Pr.at(HarmonicVector::zero(ell)).real() - a[rcomp]) > 1e-12 * std::max(1.0, std::abs(a[rcomp])))
            throw Error("torus_generating_function: the two published averages for a disagree");
    }
    GenFunResult res{FourierSeries(ell), a, 0.0, 0.0, 0.0};
    // closedness in Fourier space: nu_r w_s = nu_s w_r per harmonic
    std::map<HarmonicVector, int> support;
    for (const auto& wr : w)
        for (const auto& [nu, c] : wr.coefficients()) support[nu] = 1;
    for (const auto& [nu, one] : support) {
        for (int rcomp = 0; rcomp < ell; ++rcomp)
            for (int scomp = rcomp + 1; scomp < ell; ++scomp) {
                const Complex lhs = static_cast<double>(nu[rcomp]) * w[static_cast<size_t>(scomp)].at(nu);
                const Complex rhs = static_cast<double>(nu[scomp]) * w[static_cast<size_t>(rcomp)].at(nu);
                res.closedness_residual = std::max(res.closedness_residual, std::abs(lhs - rhs));
            }
    }
    if (res.closedness_residual > closedness_tol)
        throw NotClosed("torus_generating_function: the one-form is not closed at this truncation");
    // integrate: G_nu = w_r(nu) / (i nu_r) on the largest available component
    for (const auto& [nu, one] : support) {
        if (nu.is_zero()) continue;
        int best = 0;
        for (int i = 1; i < ell; ++i)
            if (std::abs(nu[i]) > std::abs(nu[best])) best = i;
        res.G.add(nu, w[static_cast<size_t>(best)].at(nu) / Complex(0.0, nu[best]));
    }
    // grid checks: FD curl of the evaluated one-form, and the map residual
    const int grid_n = 8;
    const double fd = 1e-5;
    std::vector<double> psi(static_cast<size_t>(ell));
    std::vector<int> idx(static_cast<size_t>(ell), 0);
    const auto weval = [&](int rcomp, std::span<const double> at) {
        return fourier_eval(w[static_cast<size_t>(rcomp)], at).real() + a[rcomp];
    };
    const auto sweep = [&](auto&& self, int pos) -> void {
        if (pos == ell) {
            for (int rcomp = 0; rcomp < ell; ++rcomp) {
                for (int scomp = rcomp + 1; scomp < ell; ++scomp) {
                    auto pp = psi;
                    pp[static_cast<size_t>(scomp)] += fd;
                    auto pm = psi;
                    pm[static_cast<size_t>(scomp)] -= fd;
                    const double drws = (weval(rcomp, pp) - weval(rcomp, pm)) / (2 * fd);
                    pp = psi;
                    pp[static_cast<size_t>(rcomp)] += fd;
                    pm = psi;
                    pm[static_cast<size_t>(rcomp)] -= fd;
                    const double dswr = (weval(scomp, pp) - weval(scomp, pm)) / (2 * fd);
                    res.grid_curl_residual = std::max(res.grid_curl_residual, std::abs(drws - dswr));
                }
            }
            // A' = A + d_psi Phi at A = omega + Dh(psi) must return omega;
            // d_r Phi = d_r G + a_r + (d_r h).(A - omega - Dh) - P_r
            const auto Dhv = fourier_eval(Dh, psi);
            for (int rcomp = 0; rcomp < ell; ++rcomp) {
                const double dG = fourier_eval(w[static_cast<size_t>(rcomp)], psi).real();
                const double Pr = fourier_eval(P[static_cast<size_t>(rcomp)], psi).real();
                const double dphi = dG + a[rcomp] - Pr;
                const double Ar = T.omega[rcomp] + Dhv[static_cast<size_t>(rcomp)].real();
                res.map_residual =
                    std::max(res.map_residual, std::abs(Ar + dphi - T.omega[rcomp]));
            }
            return;
        }
        for (idx[static_cast<size_t>(pos)] = 0; idx[static_cast<size_t>(pos)] < grid_n; ++idx[static_cast<size_t>(pos)]) {
            psi[static_cast<size_t>(pos)] = num::kTwoPi * (idx[static_cast<size_t>(pos)] + 0.13) / grid_n;
            self(self, pos + 1);
        }
    };
    sweep(sweep, 0);
    return res;
}

}  // namespace hamiltonia::lindstedt

#include "hamiltonia/quadrature.hpp"

#include <cmath>
#include <complex>

namespace hamiltonia::quadrature {

using Complex = std::complex<double>;

namespace {

constexpr double kTurningSlopeFloor = 1e-8;

// locate a bracket [a, b] with f(a) f(b) < 0 by geometric expansion from x0
// towards `direction` (+1 or -1), staying inside [lo, hi]
std::pair<double, double> expand_bracket(const std::function<double(double)>& f, double x0, int direction,
                                         double lo, double hi) {
    const double f0 = f(x0);
    double step = 1e-4 * std::max(1.0, std::abs(x0));
    double prev = x0;
    for (int it = 0; it < 200; ++it) {
        double x = x0 + direction * step;
        x = std::clamp(x, lo, hi);
        if (f(x) * f0 <= 0.0) return {std::min(prev, x), std::max(prev, x)};
        if (x == lo || x == hi) break;
        prev = x;
        step *= 1.7;
    }
    throw TurningPointDegenerate("turning point: no sign change found inside the declared domain");
}

}  // namespace

TurningPoints find_turning_points(const Potential1D& V, double E) {
    const auto f = [&](double q) { return E - V.V(q); };
    if (f(V.q_ref) <= 0.0)
        throw PreconditionViolated("find_turning_points: reference point is not inside the well");
    const auto [la, lb] = expand_bracket(f, V.q_ref, -1, V.q_lo, V.q_hi);
    const auto [ra, rb] = expand_bracket(f, V.q_ref, +1, V.q_lo, V.q_hi);
    TurningPoints tp;
    tp.q_minus = num::find_root_bisect(f, la, lb, 1e-15 * std::max(1.0, std::abs(la)));
    tp.q_plus = num::find_root_bisect(f, ra, rb, 1e-15 * std::max(1.0, std::abs(rb)));
    if (std::abs(V.dV(tp.q_minus)) < kTurningSlopeFloor || std::abs(V.dV(tp.q_plus)) < kTurningSlopeFloor)
        throw TurningPointDegenerate("find_turning_points: V' vanishes at a turning point (separatrix)");
    return tp;
}

namespace {

// Stable evaluation of W(s) = (E - V(q_end + sign s^2)) / s^2 near a turning
// point: the direct quotient suffers catastrophic cancellation for small s,
// so a midpoint-derivative Taylor form takes over there.
double endpoint_w(const Potential1D& V, double E, double q_end, int sign, double s, double range) {
    const double d = s * s;
    if (d < 1e-4 * range) return std::max(-sign * V.dV(q_end + sign * d / 2.0), 1e-300);
    return std::max((E - V.V(q_end + sign * d)) / d, 1e-300);
}

}  // namespace

double weighted_time_integral(const Potential1D& V, double E, const std::function<double(double)>& g) {
    const auto tp = find_turning_points(V, E);
    const double mid = 0.5 * (tp.q_minus + tp.q_plus);
    const double range = tp.q_plus - tp.q_minus;
    const double two_over_m = 2.0 / V.m;
    // x = q_- + s^2 on the left half, x = q_+ - s^2 on the right half;
    // E - V(x) = s^2 W(s) with W smooth and positive
    const auto half = [&](double q_end, int sign) {
        const double smax = std::sqrt(std::abs(mid - q_end));
        return num::integrate(
            [&](double s) {
                const double x = q_end + sign * s * s;
                const double W = endpoint_w(V, E, q_end, sign, s, range);
                return 2.0 * g(x) / std::sqrt(two_over_m * W);
            },
            0.0, smax, 1e-13);
    };
    return half(tp.q_minus, +1) + half(tp.q_plus, -1);
}

double period(const Potential1D& V, double E) {
    return 2.0 * weighted_time_integral(V, E, [](double) { return 1.0; });
}

double time_to_reach(const Potential1D& V, double E, double q) {
    const auto tp = find_turning_points(V, E);
    if (q < tp.q_minus - 1e-12 || q > tp.q_plus + 1e-12)
        throw PreconditionViolated("time_to_reach: q outside the oscillation range");
    const double two_over_m = 2.0 / V.m;
    const double range = tp.q_plus - tp.q_minus;
    const auto segment = [&](double q_end, int sign, double smax) {
        return num::integrate(
            [&](double s) {
                const double W = endpoint_w(V, E, q_end, sign, s, range);
                return 2.0 / std::sqrt(two_over_m * W);
            },
            0.0, smax, 1e-13);
    };
    const double mid = 0.5 * (tp.q_minus + tp.q_plus);
    if (q <= mid) return segment(tp.q_minus, +1, std::sqrt(std::max(0.0, q - tp.q_minus)));
    return 0.5 * period(V, E) - segment(tp.q_plus, -1, std::sqrt(std::max(0.0, tp.q_plus - q)));
}

double standard_solution(const Potential1D& V, double E, double t) {
    const auto tp = find_turning_points(V, E);
    const double T = period(V, E);
    double tr = std::fmod(t, T);
    if (tr < 0.0) tr += T;
    const bool second_half = tr > 0.5 * T;
    if (second_half) tr = T - tr;  // time symmetry about the turning points
    if (tr == 0.0) return tp.q_minus;
    const auto f = [&](double q) { return time_to_reach(V, E, q) - tr; };
    return num::find_root_bisect(f, tp.q_minus, tp.q_plus,
                                 1e-13 * std::max(1.0, std::abs(tp.q_plus - tp.q_minus)));
}

double action_of_energy(const Potential1D& V, double E) {
    const auto tp = find_turning_points(V, E);
    const double mid = 0.5 * (tp.q_minus + tp.q_plus);
    const double range = tp.q_plus - tp.q_minus;
    const auto half = [&](double q_end, int sign) {
        const double smax = std::sqrt(std::abs(mid - q_end));
        return num::integrate(
            [&](double s) {
                const double W = endpoint_w(V, E, q_end, sign, s, range);
                return 2.0 * s * s * std::sqrt(2.0 * V.m * W);  // sqrt(2m(E-V)) dx = 2 s^2 sqrt(2mW) ds
            },
            0.0, smax, 1e-13);
    };
    return (half(tp.q_minus, +1) + half(tp.q_plus, -1)) / M_PI;
}

double energy_of_action(const Potential1D& V, double A, double E_lo, double E_hi) {
    const auto f = [&](double E) { return action_of_energy(V, E) - A; };
    return num::find_root_bisect(f, E_lo, E_hi, 1e-12 * std::max(1.0, std::abs(E_hi)));
}

Potential1D CentralPotential::effective() const {
    Potential1D eff;
    eff.m = m;
    const double G2 = G * G;
    const double mm = m;
    const auto Vr = V;
    const auto dVr = dV;
    eff.V = [G2, mm, Vr](double r) { return G2 / (2.0 * mm * r * r) + Vr(r); };
    eff.dV = [G2, mm, dVr](double r) { return -G2 / (mm * r * r * r) + dVr(r); };
    eff.q_lo = 1e-12;
    eff.q_ref = rho_ref;
    return eff;
}

std::pair<double, double> central_frequencies(const CentralPotential& V, double E) {
    if (V.G == 0.0) throw PreconditionViolated("central_frequencies: G must be nonzero");
    const Potential1D eff = V.effective();
    const double T = period(eff, E);
    const double omega0 = num::kTwoPi / T;
    // chi_0 = (1/T) integral of G/(m R(t)^2) dt over one radial period
    const double chi0 =
        2.0 * weighted_time_integral(eff, E, [&](double r) { return V.G / (V.m * r * r); }) / T;
    return {omega0, chi0};
}

std::pair<double, double> central_actions(const CentralPotential& V, double E) {
    const Potential1D eff = V.effective();
    return {action_of_energy(eff, E), V.G};
}

NormalModes normal_modes(const VectorXd& masses, const MatrixXd& stiffness) {
    const int n = static_cast<int>(masses.size());
    if (stiffness.rows() != n || stiffness.cols() != n)
        throw PreconditionViolated("normal_modes: dimension mismatch");
    MatrixXd scaled(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            scaled(i, j) = stiffness(i, j) / std::sqrt(masses[i] * masses[j]);
    VectorXd evals;
    MatrixXd evecs;
    num::symmetric_eigen(scaled, evals, evecs);
    if (evals.minCoeff() <= 0.0)
        throw NotPositiveDefinite("normal_modes: mass-normalized stiffness is not positive definite");
    NormalModes nm;
    nm.omega = evals.cwiseSqrt();
    nm.modes = evecs;
    nm.masses = masses;
    return nm;
}

VectorXd NormalModes::actions(const VectorXd& x) const {
    const int n = static_cast<int>(masses.size());
    if (x.size() != 2 * n) throw PreconditionViolated("NormalModes::actions: bad phase point");
    VectorXd A(n);
    for (int b = 0; b < n; ++b) {
        double up = 0.0, uq = 0.0;
        for (int i = 0; i < n; ++i) {
            up += modes(i, b) * x[i] / std::sqrt(masses[i]);
            uq += modes(i, b) * x[n + i] * std::sqrt(masses[i]);
        }
        A[b] = (up * up + omega[b] * omega[b] * uq * uq) / (2.0 * omega[b]);
    }
    return A;
}

double NormalModes::energy(const VectorXd& x) const { return omega.dot(actions(x)); }

std::vector<double> free_rotator_flow(const std::vector<double>& J, const std::vector<double>& A,
                                      const std::vector<double>& alpha0, double t) {
    if (J.size() != A.size() || J.size() != alpha0.size())
        throw PreconditionViolated("free_rotator_flow: size mismatch");
    std::vector<double> out(J.size());
    for (size_t i = 0; i < J.size(); ++i) {
        if (J[i] <= 0.0) throw PreconditionViolated("free_rotator_flow: inertia must be positive");
        out[i] = std::fmod(alpha0[i] + A[i] / J[i] * t, num::kTwoPi);
        if (out[i] < 0.0) out[i] += num::kTwoPi;
    }
    return out;
}

double lattice_hamiltonian(const LatticeState& s) {
    const int n = s.n();
    double H = 0.0;
    for (int i = 0; i < n; ++i) H += s.p[static_cast<size_t>(i)] * s.p[static_cast<size_t>(i)] / (2.0 * s.m);
    switch (s.kind) {
        case LatticeKind::toda:
            for (int i = 0; i + 1 < n; ++i)
                H += s.g * std::exp(-s.kappa * (s.q[static_cast<size_t>(i + 1)] - s.q[static_cast<size_t>(i)]));
            break;
        case LatticeKind::calogero:
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    const double d = s.q[static_cast<size_t>(i)] - s.q[static_cast<size_t>(j)];
                    H += s.g / (d * d);
                }
            for (int i = 0; i < n; ++i)
                H += 0.5 * s.m * s.omega * s.omega * s.q[static_cast<size_t>(i)] * s.q[static_cast<size_t>(i)];
            break;
        case LatticeKind::sutherland:
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    const double sh = std::sinh(s.q[static_cast<size_t>(i)] - s.q[static_cast<size_t>(j)]);
                    H += s.g / (sh * sh);
                }
            break;
    }
    return H;
}

void lattice_rhs(const LatticeState& proto, const std::vector<double>& y, std::vector<double>& dydt) {
    const int n = proto.n();
    dydt.assign(2 * static_cast<size_t>(n), 0.0);
    // layout y = [p, q]
    for (int i = 0; i < n; ++i) dydt[static_cast<size_t>(n + i)] = y[static_cast<size_t>(i)] / proto.m;
    switch (proto.kind) {
        case LatticeKind::toda:
            for (int i = 0; i + 1 < n; ++i) {
                const double f =
                    proto.g * proto.kappa *
                    std::exp(-proto.kappa * (y[static_cast<size_t>(n + i + 1)] - y[static_cast<size_t>(n + i)]));
                dydt[static_cast<size_t>(i)] -= f;
                dydt[static_cast<size_t>(i + 1)] += f;
            }
            break;
        case LatticeKind::calogero:
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    const double d = y[static_cast<size_t>(n + i)] - y[static_cast<size_t>(n + j)];
                    const double f = 2.0 * proto.g / (d * d * d);
                    dydt[static_cast<size_t>(i)] += f;
                    dydt[static_cast<size_t>(j)] -= f;
                }
            for (int i = 0; i < n; ++i)
                dydt[static_cast<size_t>(i)] -= proto.m * proto.omega * proto.omega * y[static_cast<size_t>(n + i)];
            break;
        case LatticeKind::sutherland:
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    const double d = y[static_cast<size_t>(n + i)] - y[static_cast<size_t>(n + j)];
                    const double f = 2.0 * proto.g * std::cosh(d) / std::pow(std::sinh(d), 3);
                    dydt[static_cast<size_t>(i)] += f;
                    dydt[static_cast<size_t>(j)] -= f;
                }
            break;
    }
}

num::MatrixXcd lax_matrix(const LatticeState& s) {
    const int n = s.n();
    num::MatrixXcd M = num::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) M(i, i) = s.p[static_cast<size_t>(i)];
    switch (s.kind) {
        case LatticeKind::toda:
            for (int i = 0; i + 1 < n; ++i) {
                const double a = std::exp(-(s.q[static_cast<size_t>(i + 1)] - s.q[static_cast<size_t>(i)]));
                M(i, i + 1) = a;
                M(i + 1, i) = a;
            }
            break;
        case LatticeKind::calogero:
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (i != j)
                        M(i, j) = Complex(0.0, 1.0 / (s.q[static_cast<size_t>(i)] - s.q[static_cast<size_t>(j)]));
            break;
        case LatticeKind::sutherland:
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (i != j)
                        M(i, j) = Complex(
                            0.0, 1.0 / std::tanh(s.q[static_cast<size_t>(i)] - s.q[static_cast<size_t>(j)]));
            break;
    }
    return M;
}

num::MatrixXcd lax_partner(const LatticeState& s) {
    const int n = s.n();
    num::MatrixXcd N = num::MatrixXcd::Zero(n, n);
    switch (s.kind) {
        case LatticeKind::toda:
            for (int i = 0; i + 1 < n; ++i) {
                const double a = std::exp(-(s.q[static_cast<size_t>(i + 1)] - s.q[static_cast<size_t>(i)]));
                N(i, i + 1) = Complex(0.0, -a);
                N(i + 1, i) = Complex(0.0, a);
            }
            break;
        case LatticeKind::calogero:
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    if (i == j) continue;
                    const double d = s.q[static_cast<size_t>(i)] - s.q[static_cast<size_t>(j)];
                    N(i, j) = Complex(-1.0 / (d * d), 0.0);
                    N(i, i) += Complex(1.0 / (d * d), 0.0);
                }
            }
            break;
        case LatticeKind::sutherland:
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    if (i == j) continue;
                    const double sh = std::sinh(s.q[static_cast<size_t>(i)] - s.q[static_cast<size_t>(j)]);
                    N(i, j) = Complex(-1.0 / (sh * sh), 0.0);
                    N(i, i) += Complex(1.0 / (sh * sh), 0.0);
                }
            }
            break;
    }
    return N;
}

LaxDriftReport lax_eigenvalue_drift(const LatticeState& s0, double t_final, int samples) {
    const int n = s0.n();
    std::vector<double> y(2 * static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        y[static_cast<size_t>(i)] = s0.p[static_cast<size_t>(i)];
        y[static_cast<size_t>(n + i)] = s0.q[static_cast<size_t>(i)];
    }
    const auto rhs = [&s0](const std::vector<double>& yy, std::vector<double>& dydt, double) {
        lattice_rhs(s0, yy, dydt);
    };
    const num::VectorXd ev0 = num::hermitian_eigenvalues(lax_matrix(s0));
    num::MatrixXcd M0 = lax_matrix(s0);
    LaxDriftReport report{0.0, 0.0};
    std::vector<double> times(static_cast<size_t>(samples));
    for (int i = 0; i < samples; ++i) times[static_cast<size_t>(i)] = t_final * (i + 1) / samples;
    num::integrate_ode_sampled(
        rhs, y, 0.0, times,
        [&](double, const std::vector<double>& yy) {
            LatticeState s = s0;
            for (int i = 0; i < n; ++i) {
                s.p[static_cast<size_t>(i)] = yy[static_cast<size_t>(i)];
                s.q[static_cast<size_t>(i)] = yy[static_cast<size_t>(n + i)];
            }
            if (s.kind != LatticeKind::toda) {
                for (int i = 0; i < n; ++i)
                    for (int j = i + 1; j < n; ++j)
                        if (std::abs(s.q[static_cast<size_t>(i)] - s.q[static_cast<size_t>(j)]) < 1e-8)
                            throw CollisionDetected("lax_eigenvalue_drift: particle collision");
            }
            const num::MatrixXcd M = lax_matrix(s);
            const num::VectorXd ev = num::hermitian_eigenvalues(M);
            report.max_eigenvalue_drift =
                std::max(report.max_eigenvalue_drift, (ev - ev0).cwiseAbs().maxCoeff());
            report.max_entry_variation =
                std::max(report.max_entry_variation, (M - M0).cwiseAbs().maxCoeff());
        },
        1e-13);
    return report;
}

MelnikovResult melnikov_matrix(const std::function<double(const VectorXd&, double, double)>& f,
                               const VectorXd& alpha, const VectorXd& omega, double g) {
    if (g <= 0.0) throw PreconditionViolated("melnikov_matrix: g must be positive");
    const int ell = static_cast<int>(alpha.size());
    const double sg = std::sqrt(g);
    const auto qa = [&](double t) { return 4.0 * std::atan(std::exp(sg * t)); };
    const auto pa = [&](double t) { return 2.0 * sg / std::cosh(sg * t); };
    const double T = 40.0 / sg;
    MelnikovResult res;
    res.D.resize(ell, ell);
    double peak = 0.0;
    for (int i = 0; i < ell; ++i) {
        for (int j = i; j < ell; ++j) {
            const auto integrand = [&](double t) {
                const VectorXd phase = alpha + omega * t;
                const auto fa = [&](const VectorXd& a) { return f(a, pa(t), qa(t)); };
                return num::second_partial_richardson(fa, phase, i, j, 1e-2);
            };
            peak = std::max(peak, std::abs(integrand(0.0)));
            const double tail = std::max(std::abs(integrand(T)), std::abs(integrand(-T)));
            if (tail > 1e-12 * std::max(1.0, peak))
                throw TailNotDecaying("melnikov_matrix: integrand has not decayed by |t| = 40/sqrt(g)");
            const double v = num::integrate(integrand, -T, 0.0, 1e-11) + num::integrate(integrand, 0.0, T, 1e-11);
            res.D(i, j) = v;
            res.D(j, i) = v;
        }
    }
    res.abs_det = std::abs(res.D.determinant());
    return res;
}

}  // namespace hamiltonia::quadrature

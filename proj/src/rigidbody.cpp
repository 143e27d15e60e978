#include "hamiltonia/rigidbody.hpp"

#include <cmath>

namespace hamiltonia::rigidbody {

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

Mat3 rot_z(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return {{{c, -s, 0.0}, {s, c, 0.0}, {0.0, 0.0, 1.0}}};
}

Mat3 rot_x(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return {{{1.0, 0.0, 0.0}, {0.0, c, -s}, {0.0, s, c}}};
}

Mat3 mul(const Mat3& A, const Mat3& B) {
    Mat3 R{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += A[i][k] * B[k][j];
            R[i][j] = s;
        }
    return R;
}

Vec3 apply(const Mat3& A, const Vec3& v) {
    Vec3 r{};
    for (int i = 0; i < 3; ++i) r[i] = A[i][0] * v[0] + A[i][1] * v[1] + A[i][2] * v[2];
    return r;
}

// z-x-z extraction: R = R_z(phi) R_x(theta) R_z(psi)
void euler_from_matrix(const Mat3& R, double& phi, double& theta, double& psi) {
    const double c = std::clamp(R[2][2], -1.0, 1.0);
    theta = std::acos(c);
    if (std::abs(R[2][2]) > 1.0 - 1e-12)
        throw ChartSingular("euler_from_matrix: theta at a chart singularity");
    phi = std::atan2(R[0][2], -R[1][2]);
    psi = std::atan2(R[2][0], R[2][1]);
}

Mat3 quat_to_matrix(const std::array<double, 4>& q) {
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    Mat3 R;
    R[0] = {1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)};
    R[1] = {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)};
    R[2] = {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)};
    return R;
}

double u_of_psi(const InertiaTriple& I, double psi) {
    const double s = std::sin(psi), c = std::cos(psi);
    return s * s / I.I1 + c * c / I.I2;
}

// integral of f(x) / sqrt(P(x)) over [a, b] where P has simple zeros exactly
// at a and b; quadratic substitution at both ends with the stable
// midpoint-derivative form of P(x)/(x - root) near the roots
double sqrt_endpoint_integral(const std::function<double(double)>& f, const std::function<double(double)>& P,
                              const std::function<double(double)>& dP, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double range = b - a;
    const auto half = [&](double root, int sign) {
        const double smax = std::sqrt(std::abs(mid - root));
        return num::integrate(
            [&](double s) {
                const double d = s * s;
                const double x = root + sign * d;
                double W;
                if (d < 1e-4 * range)
                    W = sign * dP(root + sign * d / 2.0);
                else
                    W = P(x) / d;
                W = std::max(W, 1e-300);
                return 2.0 * f(x) / std::sqrt(W);
            },
            0.0, smax, 1e-13);
    };
    return half(a, +1) + half(b, -1);
}

}  // namespace

Vec3 euler_rhs(const InertiaTriple& I, const Vec3& w) {
    return {(I.I2 - I.I3) * w[1] * w[2] / I.I1, (I.I3 - I.I1) * w[2] * w[0] / I.I2,
            (I.I1 - I.I2) * w[0] * w[1] / I.I3};
}

double kinetic_energy(const InertiaTriple& I, const Vec3& w) {
    return 0.5 * (I.I1 * w[0] * w[0] + I.I2 * w[1] * w[1] + I.I3 * w[2] * w[2]);
}

double momentum_squared(const InertiaTriple& I, const Vec3& w) {
    return I.I1 * I.I1 * w[0] * w[0] + I.I2 * I.I2 * w[1] * w[1] + I.I3 * I.I3 * w[2] * w[2];
}

FreeBodyResult integrate_free_body(const InertiaTriple& I, const Vec3& omega0, double t_final, int samples,
                                   double tol) {
    // state: (omega_1..3, quaternion w x y z), orientation body -> lab
    std::vector<double> y = {omega0[0], omega0[1], omega0[2], 1.0, 0.0, 0.0, 0.0};
    const auto rhs = [&I](const std::vector<double>& s, std::vector<double>& d, double) {
        const Vec3 w = {s[0], s[1], s[2]};
        const Vec3 dw = euler_rhs(I, w);
        d.resize(7);
        d[0] = dw[0];
        d[1] = dw[1];
        d[2] = dw[2];
        // qdot = (1/2) q * (0, omega_body)
        const double qw = s[3], qx = s[4], qy = s[5], qz = s[6];
        d[3] = 0.5 * (-qx * w[0] - qy * w[1] - qz * w[2]);
        d[4] = 0.5 * (qw * w[0] + qy * w[2] - qz * w[1]);
        d[5] = 0.5 * (qw * w[1] + qz * w[0] - qx * w[2]);
        d[6] = 0.5 * (qw * w[2] + qx * w[1] - qy * w[0]);
    };
    const double E0 = kinetic_energy(I, omega0);
    const double G20 = momentum_squared(I, omega0);
    FreeBodyResult res;
    res.max_energy_drift = 0.0;
    res.max_momentum_drift = 0.0;
    std::vector<double> times(static_cast<size_t>(samples));
    for (int i = 0; i < samples; ++i) times[static_cast<size_t>(i)] = t_final * (i + 1) / samples;
    res.samples.push_back({0.0, omega0, {1.0, 0.0, 0.0, 0.0}});
    num::integrate_ode_sampled(
        rhs, y, 0.0, times,
        [&](double t, const std::vector<double>& s) {
            const Vec3 w = {s[0], s[1], s[2]};
            res.samples.push_back({t, w, {s[3], s[4], s[5], s[6]}});
            res.max_energy_drift =
                std::max(res.max_energy_drift, std::abs(kinetic_energy(I, w) - E0) / std::abs(E0));
            res.max_momentum_drift =
                std::max(res.max_momentum_drift, std::abs(momentum_squared(I, w) - G20) / std::abs(G20));
        },
        tol);
    return res;
}

Vec3 momentum_from_chart(double L, double G, double psi) {
    if (std::abs(L) > G) throw DomainViolation("momentum_from_chart: |L| <= G required");
    const double perp = std::sqrt(std::max(0.0, G * G - L * L));
    return {perp * std::sin(psi), perp * std::cos(psi), L};
}

Vec3 omega_from_chart(const InertiaTriple& I, double L, double G, double psi) {
    const Vec3 M = momentum_from_chart(L, G, psi);
    return {M[0] / I.I1, M[1] / I.I2, M[2] / I.I3};
}

void chart_from_omega(const InertiaTriple& I, const Vec3& w, double& L, double& G, double& psi) {
    const Vec3 M = {I.I1 * w[0], I.I2 * w[1], I.I3 * w[2]};
    G = std::sqrt(M[0] * M[0] + M[1] * M[1] + M[2] * M[2]);
    L = M[2];
    psi = std::atan2(M[0], M[1]);
}

double deprit_hamiltonian(const InertiaTriple& I, double L, double G, double psi) {
    if (std::abs(L) > G) throw DomainViolation("deprit_hamiltonian: |L| <= G required");
    return 0.5 * (L * L / I.I3 + (G * G - L * L) * u_of_psi(I, psi));
}

EulerChartPoint deprit_to_euler_chart(const DepritPoint& d) {
    if (d.G <= 0.0) throw DomainViolation("deprit_to_euler_chart: G must be positive");
    if (std::abs(d.M3) > d.G || std::abs(d.L) > d.G)
        throw DomainViolation("deprit_to_euler_chart: |M3|, |L| <= G required");
    const double zeta = std::acos(std::clamp(d.M3 / d.G, -1.0, 1.0));
    const double theta = std::acos(std::clamp(d.L / d.G, -1.0, 1.0));
    if (std::sin(zeta) < 1e-9 || std::sin(theta) < 1e-9)
        throw ChartSingular("deprit_to_euler_chart: zeta or theta at a chart singularity");
    const Mat3 RM = mul(rot_z(d.gamma), rot_x(zeta));
    const Mat3 Rrel = mul(mul(rot_z(d.phi), rot_x(theta)), rot_z(d.psi));
    const Mat3 R = mul(RM, Rrel);
    EulerChartPoint e;
    euler_from_matrix(R, e.phi0, e.theta0, e.psi0);
    const Vec3 M = apply(RM, {0.0, 0.0, d.G});
    const Vec3 n0 = {std::cos(e.phi0), std::sin(e.phi0), 0.0};
    const Vec3 i3 = {R[0][2], R[1][2], R[2][2]};
    e.p_theta0 = M[0] * n0[0] + M[1] * n0[1];
    e.p_phi0 = M[2];
    e.p_psi0 = M[0] * i3[0] + M[1] * i3[1] + M[2] * i3[2];
    return e;
}

canonical::PhaseMap deprit_chart_map() {
    canonical::PhaseMap map;
    map.ell = 3;
    map.forward = [](const VectorXd& x) -> VectorXd {
        const DepritPoint d{x[0], x[3], x[1], x[4], x[2], x[5]};
        const EulerChartPoint e = deprit_to_euler_chart(d);
        VectorXd out(6);
        out << e.p_theta0, e.p_phi0, e.p_psi0, e.theta0, e.phi0, e.psi0;
        return out;
    };
    return map;
}

double verify_deprit_canonicity(const DepritPoint& d) {
    VectorXd x(6);
    x << d.M3, d.L, d.G, d.gamma, d.psi, d.phi;
    return canonical::symplectic_residual(deprit_chart_map(), x);
}

double psi_rate(const InertiaTriple& I, double E, double G, double psi, int branch) {
    const double u = u_of_psi(I, psi);
    const double c = 1.0 / I.I3 - u;
    if (std::abs(c) < 1e-13 / I.I3) return 0.0;  // spherical degeneracy: psi frozen
    const double rad = (2.0 * E - G * G * u) / c;
    if (rad < 0.0) throw ForbiddenRegion("psi_rate: radicand is negative");
    return (branch >= 0 ? 1.0 : -1.0) * c * std::sqrt(rad);
}

double phi_rate(const InertiaTriple& I, double G, double psi) { return u_of_psi(I, psi) * G; }

BodyPeriods body_periods(const InertiaTriple& I, double E, double G) {
    // |psi_dot|^2 = (2E - G^2 u)(1/I3 - u) =: P(psi)
    const auto P = [&](double psi) {
        const double u = u_of_psi(I, psi);
        return (2.0 * E - G * G * u) * (1.0 / I.I3 - u);
    };
    const auto dP = [&](double psi) {
        const double u = u_of_psi(I, psi);
        const double du = (1.0 / I.I1 - 1.0 / I.I2) * std::sin(2.0 * psi);
        return -G * G * du * (1.0 / I.I3 - u) + (2.0 * E - G * G * u) * (-du);
    };
    BodyPeriods bp{};
    const double u_target = 2.0 * E / (G * G);
    const double ratio = (u_target - 1.0 / I.I2) / (1.0 / I.I1 - 1.0 / I.I2);  // sin^2(psi*)
    if (ratio <= 0.0 || ratio >= 1.0) {
        // u never meets 2E/G^2: psi circulates
        bp.librating = false;
        if (P(0.0) <= 0.0 || P(M_PI / 2.0) <= 0.0)
            throw ForbiddenRegion("body_periods: motion region is empty");
        bp.T_L = num::integrate([&](double psi) { return 1.0 / std::sqrt(P(psi)); }, 0.0, num::kTwoPi, 1e-13);
        const double dphi = G * num::integrate([&](double psi) { return u_of_psi(I, psi) / std::sqrt(P(psi)); },
                                               0.0, num::kTwoPi, 1e-13);
        bp.T_G = num::kTwoPi * bp.T_L / dphi;
        return bp;
    }
    // libration between turning points around psi = 0 or psi = pi/2
    const double psi_star = std::asin(std::sqrt(ratio));
    double a, b;
    if (P(0.0) > 0.0) {
        a = -psi_star;
        b = psi_star;
    } else if (P(M_PI / 2.0) > 0.0) {
        a = psi_star;
        b = M_PI - psi_star;
    } else {
        throw ForbiddenRegion("body_periods: no accessible psi interval");
    }
    bp.librating = true;
    bp.T_L = 2.0 * sqrt_endpoint_integral([](double) { return 1.0; }, P, dP, a, b);
    const double dphi =
        2.0 * G * sqrt_endpoint_integral([&](double psi) { return u_of_psi(I, psi); }, P, dP, a, b);
    bp.T_G = num::kTwoPi * bp.T_L / dphi;
    return bp;
}

BodyPeriods body_periods_from_integration(const InertiaTriple& I, const Vec3& omega0, double horizon,
                                          double tol) {
    const auto run = integrate_free_body(I, omega0, horizon, 4000, tol);
    // psi(t) = atan2(M1, M2) and L(t) = M3, directly from the body momenta
    std::vector<double> t, psi_unwrapped, L;
    double prev = 0.0, offset = 0.0;
    for (const auto& s : run.samples) {
        const double m1 = I.I1 * s.omega[0], m2 = I.I2 * s.omega[1];
        const double p = std::atan2(m1, m2);
        if (!t.empty()) {
            while (p + offset - prev > M_PI) offset -= num::kTwoPi;
            while (p + offset - prev < -M_PI) offset += num::kTwoPi;
        }
        prev = p + offset;
        t.push_back(s.t);
        psi_unwrapped.push_back(prev);
        L.push_back(I.I3 * s.omega[2]);
    }
    BodyPeriods bp{};
    const auto [mn, mx] = std::minmax_element(psi_unwrapped.begin(), psi_unwrapped.end());
    bp.librating = (*mx - *mn) < num::kTwoPi;
    std::vector<double> events;  // 2 pi advances, or L zero crossings when librating
    if (!bp.librating) {
        const double base = psi_unwrapped.front();
        const double dir = psi_unwrapped.back() > base ? 1.0 : -1.0;
        int wind = 1;
        for (size_t i = 1; i < t.size(); ++i) {
            const double target = base + dir * num::kTwoPi * wind;
            const bool crossed = dir > 0 ? (psi_unwrapped[i] >= target) : (psi_unwrapped[i] <= target);
            if (crossed) {
                const double frac =
                    (target - psi_unwrapped[i - 1]) / (psi_unwrapped[i] - psi_unwrapped[i - 1]);
                events.push_back(t[i - 1] + frac * (t[i] - t[i - 1]));
                ++wind;
            }
        }
    } else {
        for (size_t i = 1; i < t.size(); ++i) {
            if (L[i - 1] == 0.0) continue;
            if (L[i - 1] * L[i] < 0.0) {
                const double frac = -L[i - 1] / (L[i] - L[i - 1]);
                events.push_back(t[i - 1] + frac * (t[i] - t[i - 1]));
            }
        }
    }
    if (events.size() < 3)
        throw PreconditionViolated("body_periods_from_integration: horizon too short to see a period");
    const double span = events.back() - events.front();
    const double spacing = span / static_cast<double>(events.size() - 1);
    bp.T_L = bp.librating ? 2.0 * spacing : spacing;

    // phi(t) in the fixed momentum frame, from the orientation history
    const auto& first = run.samples.front();
    const Mat3 R0 = quat_to_matrix(first.quat);
    const Vec3 M_body0 = {I.I1 * first.omega[0], I.I2 * first.omega[1], I.I3 * first.omega[2]};
    const Vec3 M_lab = apply(R0, M_body0);
    const double G = std::sqrt(M_lab[0] * M_lab[0] + M_lab[1] * M_lab[1] + M_lab[2] * M_lab[2]);
    const Vec3 zM = {M_lab[0] / G, M_lab[1] / G, M_lab[2] / G};
    Vec3 xM = {-zM[1], zM[0], 0.0};  // node line z_lab x z_M
    const double nn = std::hypot(xM[0], xM[1]);
    if (nn < 1e-12) throw ChartSingular("body_periods_from_integration: momentum along the lab z axis");
    xM = {xM[0] / nn, xM[1] / nn, 0.0};
    const Vec3 yM = {zM[1] * xM[2] - zM[2] * xM[1], zM[2] * xM[0] - zM[0] * xM[2],
                     zM[0] * xM[1] - zM[1] * xM[0]};
    double phi_prev = 0.0, phi_offset = 0.0;
    std::vector<double> phi_series;
    for (const auto& s : run.samples) {
        const Mat3 R = quat_to_matrix(s.quat);
        Mat3 Rrel{};  // R in the momentum frame: rows of the basis times R
        const std::array<Vec3, 3> basis = {xM, yM, zM};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                Rrel[i][j] = basis[static_cast<size_t>(i)][0] * R[0][j] +
                             basis[static_cast<size_t>(i)][1] * R[1][j] +
                             basis[static_cast<size_t>(i)][2] * R[2][j];
        double phi, theta, psi;
        euler_from_matrix(Rrel, phi, theta, psi);
        if (!phi_series.empty()) {
            while (phi + phi_offset - phi_prev > M_PI) phi_offset -= num::kTwoPi;
            while (phi + phi_offset - phi_prev < -M_PI) phi_offset += num::kTwoPi;
        }
        phi_prev = phi + phi_offset;
        phi_series.push_back(phi_prev);
    }
    // mean rotation rate over an integer number of (L, psi) periods, using
    // the event times found above (phi interpolated linearly)
    const auto phi_at = [&](double tev) {
        const auto it = std::upper_bound(t.begin(), t.end(), tev);
        const size_t i = static_cast<size_t>(std::distance(t.begin(), it));
        const double frac = (tev - t[i - 1]) / (t[i] - t[i - 1]);
        return phi_series[i - 1] + frac * (phi_series[i] - phi_series[i - 1]);
    };
    const double mean_rate =
        (phi_at(events.back()) - phi_at(events.front())) / (events.back() - events.front());
    bp.T_G = num::kTwoPi / std::abs(mean_rate);
    return bp;
}

double gyroscope_hamiltonian(const Gyroscope& gy, const DepritPoint& d) {
    if (d.G <= 0.0 || std::abs(d.L) > d.G || std::abs(d.M3) > d.G)
        throw DomainViolation("gyroscope_hamiltonian: need G > 0 and |L|, |M3| <= G");
    const double wz = std::sqrt(std::max(0.0, 1.0 - d.M3 * d.M3 / (d.G * d.G)));
    const double wl = std::sqrt(std::max(0.0, 1.0 - d.L * d.L / (d.G * d.G)));
    const double cos_theta0 = d.M3 * d.L / (d.G * d.G) - wz * wl * std::cos(d.phi);
    return 0.5 * d.L * d.L / gy.I3 + 0.5 * (d.G * d.G - d.L * d.L) / gy.I -
           gy.m * gy.g * gy.h * cos_theta0;
}

void gyroscope_rhs(const Gyroscope& gy, const std::vector<double>& y, std::vector<double>& dydt) {
    // state (M3, gamma, L, psi, G, phi); gamma and psi are cyclic
    const double M3 = y[0], L = y[2], G = y[4], phi = y[5];
    const double G2 = G * G;
    const double wz = std::sqrt(std::max(1e-14, 1.0 - M3 * M3 / G2));
    const double wl = std::sqrt(std::max(1e-14, 1.0 - L * L / G2));
    const double mgh = gy.m * gy.g * gy.h;
    const double cphi = std::cos(phi), sphi = std::sin(phi);
    // partials of cos(theta0) = M3 L / G^2 - wz wl cos(phi)
    const double dc_dM3 = L / G2 + (M3 / G2) / wz * wl * cphi;
    const double dc_dL = M3 / G2 + (L / G2) / wl * wz * cphi;
    const double dc_dG =
        -2.0 * M3 * L / (G2 * G) -
        (M3 * M3 / (G2 * G) / wz * wl + L * L / (G2 * G) / wl * wz) * cphi;
    const double dc_dphi = wz * wl * sphi;
    dydt.assign(6, 0.0);
    dydt[1] = -mgh * dc_dM3;                       // gamma_dot = dH/dM3
    dydt[3] = L / gy.I3 - L / gy.I - mgh * dc_dL;  // psi_dot = dH/dL
    dydt[5] = G / gy.I - mgh * dc_dG;              // phi_dot = dH/dG
    dydt[4] = mgh * dc_dphi;                       // G_dot = -dH/dphi
}

GyroscopeRun integrate_gyroscope(const Gyroscope& gy, const DepritPoint& d0, double t_final, double tol) {
    std::vector<double> y = {d0.M3, d0.gamma, d0.L, d0.psi, d0.G, d0.phi};
    const double H0 = gyroscope_hamiltonian(gy, d0);
    GyroscopeRun run{0.0, 0.0, 0.0, d0};
    std::vector<double> times;
    for (int i = 1; i <= 100; ++i) times.push_back(t_final * i / 100.0);
    num::integrate_ode_sampled(
        [&](const std::vector<double>& s, std::vector<double>& d, double) { gyroscope_rhs(gy, s, d); }, y,
        0.0, times,
        [&](double, const std::vector<double>& s) {
            const DepritPoint d{s[0], s[1], s[2], s[3], s[4], s[5]};
            run.max_H_drift = std::max(run.max_H_drift, std::abs(gyroscope_hamiltonian(gy, d) - H0));
            run.max_M3_drift = std::max(run.max_M3_drift, std::abs(s[0] - d0.M3));
            run.max_L_drift = std::max(run.max_L_drift, std::abs(s[2] - d0.L));
        },
        tol);
    run.final_point = DepritPoint{y[0], y[1], y[2], y[3], y[4], y[5]};
    return run;
}

}  // namespace hamiltonia::rigidbody

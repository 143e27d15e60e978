#pragma once

#include <array>

#include "hamiltonia/canonical.hpp"
#include "hamiltonia/numerics.hpp"

namespace hamiltonia::rigidbody {

using Vec3 = std::array<double, 3>;
using num::VectorXd;

struct InertiaTriple {
    double I1, I2, I3;
};

/// Euler equations for the body-frame angular velocity.
Vec3 euler_rhs(const InertiaTriple& I, const Vec3& omega);

/// Kinetic energy (1/2) sum I_j omega_j^2.
double kinetic_energy(const InertiaTriple& I, const Vec3& omega);

/// Squared angular momentum sum I_j^2 omega_j^2.
double momentum_squared(const InertiaTriple& I, const Vec3& omega);

struct FreeBodySample {
    double t;
    Vec3 omega;
    std::array<double, 4> quat;  ///< orientation, body -> lab
};

struct FreeBodyResult {
    std::vector<FreeBodySample> samples;
    double max_energy_drift;    ///< relative
    double max_momentum_drift;  ///< relative, of G^2
};

/// Integrates the Euler equations with the orientation carried by a
/// quaternion; reports the relative drift of the two conserved quantities.
FreeBodyResult integrate_free_body(const InertiaTriple& I, const Vec3& omega0, double t_final,
                                   int samples = 200, double tol = 1e-13);

/// Body-frame angular momentum from the chart variables:
/// M_body = (sqrt(G^2-L^2) sin psi, sqrt(G^2-L^2) cos psi, L).
Vec3 momentum_from_chart(double L, double G, double psi);

/// omega reconstructed from (L, G, psi): omega_j = M_j / I_j.
Vec3 omega_from_chart(const InertiaTriple& I, double L, double G, double psi);

/// Chart variables (L, G, psi) of a body-frame angular velocity.
void chart_from_omega(const InertiaTriple& I, const Vec3& omega, double& L, double& G, double& psi);

/// K = (1/2)[L^2/I3 + (G^2 - L^2)(sin^2 psi / I1 + cos^2 psi / I2)].
double deprit_hamiltonian(const InertiaTriple& I, double L, double G, double psi);

/// Canonical chart point ((M3, gamma), (L, psi), (G, phi)).
struct DepritPoint {
    double M3, gamma, L, psi, G, phi;
};

/// Euler-chart point of the body frame in the laboratory frame, with the
/// conjugate momenta given by angular-momentum projections:
/// p_theta0 = M.n0, p_phi0 = M.z0, p_psi0 = M.i3.
struct EulerChartPoint {
    double p_theta0, p_phi0, p_psi0;
    double theta0, phi0, psi0;
};

/// The rotation geometry R = R_z(gamma) R_x(zeta) . R_z(phi) R_x(theta)
/// R_z(psi) with cos zeta = M3/G and cos theta = L/G; node lines are derived
/// from the composed matrix. ChartSingular near theta, zeta or theta0 in
/// {0, pi}.
EulerChartPoint deprit_to_euler_chart(const DepritPoint& d);

/// Canonical map for the symplectic probe: (M3, L, G | gamma, psi, phi) ->
/// (p_theta0, p_phi0, p_psi0 | theta0, phi0, psi0).
canonical::PhaseMap deprit_chart_map();

/// Symplectic residual of the Deprit chart at a point.
double verify_deprit_canonicity(const DepritPoint& d);

/// dpsi/dt from energy and momentum: +-(1/I3 - u) sqrt((2E - G^2 u)/(1/I3 - u))
/// with u(psi) = sin^2 psi / I1 + cos^2 psi / I2. ForbiddenRegion when the
/// radicand is negative.
double psi_rate(const InertiaTriple& I, double E, double G, double psi, int branch = +1);

/// dphi/dt = (sin^2 psi / I1 + cos^2 psi / I2) G.
double phi_rate(const InertiaTriple& I, double G, double psi);

struct BodyPeriods {
    double T_L;        ///< period of the (L, psi) motion
    double T_G;        ///< mean rotation period of phi
    bool librating;    ///< psi oscillates between turning points
};

/// Periods from the two quadratures.
BodyPeriods body_periods(const InertiaTriple& I, double E, double G);

/// Periods extracted from a direct Euler-equation integration (cross-oracle).
BodyPeriods body_periods_from_integration(const InertiaTriple& I, const Vec3& omega0, double horizon,
                                          double tol = 1e-12);

/// Symmetric heavy top in the canonical chart: I1 = I2 = I, center of mass on
/// the symmetry axis at distance h. H = L^2/(2 I3) + (G^2-L^2)/(2I)
/// - m g h cos(theta0) with cos(theta0) = M3 L / G^2
/// - sqrt(1 - M3^2/G^2) sqrt(1 - L^2/G^2) cos(phi).
struct Gyroscope {
    double I, I3, m, g, h;
};

double gyroscope_hamiltonian(const Gyroscope& gy, const DepritPoint& d);

/// Hamilton equations of the gyroscope (analytic partials); state layout
/// (M3, gamma, L, psi, G, phi).
void gyroscope_rhs(const Gyroscope& gy, const std::vector<double>& y, std::vector<double>& dydt);

struct GyroscopeRun {
    double max_H_drift;   ///< absolute
    double max_M3_drift;  ///< absolute
    double max_L_drift;   ///< absolute
    DepritPoint final_point;
};

GyroscopeRun integrate_gyroscope(const Gyroscope& gy, const DepritPoint& d0, double t_final,
                                 double tol = 1e-13);

}  // namespace hamiltonia::rigidbody

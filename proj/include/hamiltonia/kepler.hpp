#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <map>

#include "hamiltonia/core.hpp"
#include "hamiltonia/trees.hpp"

namespace hamiltonia::kepler {

using Rational = boost::multiprecision::cpp_rational;

/// Order-k coefficient of the eccentricity expansion of xi - lambda, as a
/// Fourier series in the mean anomaly. All coefficients are purely imaginary
/// rationals: h_nu = i q_nu with q_{-nu} = -q_nu. The map stores q_nu.
using ImagSeries = std::map<int, Rational>;

/// h^(k) from the composition recursion in Fourier space (production route).
ImagSeries series_recursion(int k);

/// h^(k) by summing labeled-tree values (validation route); exact match with
/// series_recursion is an acceptance criterion.
ImagSeries series_trees(int k, const trees::EnumerationOptions& opts = trees::default_enumeration_options());

/// h^(k) from the closed form (1/k!) d^{k-1}/dpsi^{k-1} sin^k(psi), expanded
/// exactly from the finite Fourier representation of sin^k.
ImagSeries series_lagrange(int k);

/// Real evaluation of the closed form at an angle.
double lagrange_coefficient(int k, double psi);

/// Sum of tree values (times multiplicity), restricted to trees of order k
/// that contain at least one zero-current line; identically zero by the
/// cancellation property. Keyed by root current.
ImagSeries zero_current_tree_sum(int k,
                                 const trees::EnumerationOptions& opts = trees::default_enumeration_options());

/// sum_nu |h^(k)_nu| as an exact rational.
Rational abs_coefficient_sum(const ImagSeries& s);

enum class SolveMethod { newton, bisection };

/// Solves lambda = xi - e sin(xi) for xi; residual below 1e-13.
double solve_kepler(double e, double lambda, SolveMethod method = SolveMethod::newton);

/// Sum_{j<=K} e^j h^(j)(psi), the truncated eccentricity series evaluated as
/// a real function.
double series_eval(double e, double psi, int K);

enum class ResummationRoute {
    power_series,   ///< plain truncated power series
    levi_civita,    ///< iterated-operator resummation
    no_simple_node  ///< tree sum with simple-node chains absorbed into line factors
};

/// h(psi) by the requested route, truncated at order K.
double resummed_series_eval(double e, double psi, int K, ResummationRoute route);

/// Positive root of  x e^{sqrt(1+x^2)} / (1 + sqrt(1+x^2)) = 1, the radius of
/// convergence of the eccentricity series (Laplace limit).
double laplace_radius();

/// eta(e) = e e^{sqrt(1-e^2)} / (1 + sqrt(1-e^2)), the resummation parameter;
/// |eta| = 1 marks the analyticity boundary. eta(1) = 1 on the real axis and
/// |eta(i rho)| = 1 at the Laplace radius rho.
double eta_parameter(double e);
double eta_parameter_imag_axis(double x);  ///< |eta(ix)|

struct AnomalyTriple {
    double lambda;      ///< mean anomaly
    double xi;          ///< eccentric anomaly
    double theta;       ///< true anomaly
    double rho_over_a;  ///< dimensionless radius
};

/// All three anomalies plus the radius; the defining identities are enforced
/// to 1e-12 after construction.
AnomalyTriple anomalies(double e, double lambda);

/// Actions-to-geometry bundle for a bound orbit.
struct OrbitElements {
    double L;  ///< action, E = -k^2 m^3 / (2 L^2)
    double G;  ///< angular momentum
    double e;  ///< eccentricity
    double a;  ///< major semiaxis
};

/// Elements from (L, G) for attraction constant k and mass m; checks
/// G = +- L sqrt(1-e^2) and a = L^2/(k m^2).
OrbitElements elements_from_actions(double L, double G, double k, double m);

struct FgCoefficients {
    double g_linear;  ///< coefficient of x in g(x,y)
    double g_xy;      ///< coefficient of x y in g
    double f_linear;  ///< coefficient of x in f(x,y)
    double f_xy;      ///< coefficient of x y in f
};

/// Fits xi - lambda and theta - lambda as polynomials in
/// (x, y) = (e sin lambda, e cos lambda) over a small-e grid and returns the
/// leading coefficients; expected (1, 1, 2, 5/2).
FgCoefficients fg_leading_coefficients(int max_degree = 5);

/// Parameters of the regularized restricted three-body Hamiltonian.
struct R3bpParams {
    double g;      ///< k m_S, attraction strength
    double R;      ///< primary separation
    double omega;  ///< rotation rate of the frame
    double eps;    ///< mass ratio of the perturber
};

/// Truncated interior Hamiltonian in Delaunay-type elements
/// (L0, lambda0, G0, gamma0) of the rotating-frame problem.
double r3bp_hamiltonian_elements(const R3bpParams& par, double L0, double lambda0, double G0, double gamma0);

/// The same Hamiltonian pushed through L = L0, G = L0 - G0,
/// lambda = lambda0 + gamma0, gamma = -gamma0 and the Cartesian chart
/// p = sqrt(2G) cos gamma, q = sqrt(2G) sin gamma; analytic through p = q = 0.
double regularized_r3bp_hamiltonian(const R3bpParams& par, double L, double lambda, double p, double q);

/// Both square roots (xi, eta) of x + i y = (xi + i eta)^2; the origin has a
/// single preimage.
std::vector<std::pair<double, double>> levi_civita_map(double x, double y);

}  // namespace hamiltonia::kepler

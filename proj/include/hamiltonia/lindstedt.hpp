#pragma once

#include <Eigen/Dense>

#include "hamiltonia/core.hpp"
#include "hamiltonia/trees.hpp"

namespace hamiltonia::lindstedt {

using Eigen::MatrixXcd;
using Eigen::VectorXd;

/// Truncated torus parametrization A = omega + H_eps(psi), alpha = psi +
/// h_eps(psi): orders h^(k) are vector-valued zero-mean Fourier series with
/// support |nu| <= k deg(f). H_eps is derived data, (omega . d_psi) h_eps.
struct TorusSeries {
    FrequencyVector omega;
    int K = 0;
    std::vector<VecFourierSeries> orders;  ///< orders[k-1] = h^(k)

    int ell() const { return omega.dim(); }

    /// Numeric series sum_k eps^k h^(k).
    VecFourierSeries h_eps(double eps) const;

    /// h_eps evaluated at an angle (real part).
    std::vector<double> eval_h(double eps, std::span<const double> psi) const;

    /// H_eps = (omega . d_psi) h_eps evaluated at an angle.
    std::vector<double> eval_H(double eps, std::span<const double> psi) const;
};

enum class Method { recursion, trees };

/// Orders 1..K of the torus parametrization for H = A^2/2 + eps f(alpha).
/// The recursion route divides the composed right-hand side by -(omega.nu)^2
/// order by order; the trees route sums tree values over nonzero-current
/// trees. ZeroMeanObstruction if a zero mode fails to cancel.
TorusSeries lindstedt_series(const FourierSeries& f, const FrequencyVector& omega, int K,
                             Method method = Method::recursion,
                             const trees::EnumerationOptions& opts = trees::default_enumeration_options());

/// Single order (computes the recursion up to k).
VecFourierSeries lindstedt_coefficient(const FourierSeries& f, const FrequencyVector& omega, int k,
                                       Method method = Method::recursion);

/// Max norm over a psi grid of (omega.d)^2 h_eps + eps d_alpha f(psi + h_eps).
double torus_residual(const TorusSeries& T, const FourierSeries& f, double eps, int grid_n = 24);

struct FlowDeviation {
    double max_angle_dev;
    double max_action_dev;
};

/// Integrates the rotator flow from the torus point over psi0 and compares
/// with the image of psi0 + omega t.
FlowDeviation verify_torus_flow(const TorusSeries& T, const FourierSeries& f, double eps,
                                std::span<const double> psi0, double t_final, double tol = 1e-13);

/// Generating-series data for the isochronous model
/// H = omega0 . A + eps (A_2 + f(alpha)) on l = 2.
struct BirkhoffSeries {
    FourierSeries closed;               ///< Phi_eps, closed form at the given eps
    std::vector<FourierSeries> orders;  ///< orders[k-1]: coefficient of eps^k
    double eps;
    /// u_eps(A') = eps A'_2 throughout (f has zero mean).
};

/// Closed form Phi_nu = -eps f_nu / (i (omega01 nu1 + (omega02 + eps) nu2))
/// together with its eps-expansion, Phi^(k)_nu = -f_nu (-nu2)^{k-1} /
/// (i (omega0.nu)^k). The two must agree term by term; ResonantDenominator
/// when a needed denominator vanishes within 1e-14.
BirkhoffSeries birkhoff_series(const FourierSeries& f, const FrequencyVector& omega0, int K, double eps);

/// Flow-conjugacy oracle: integrates the isochronous Hamiltonian from
/// (A0 + dPhi(alpha0), alpha0) and compares with A0 + dPhi(alpha0 + omega t),
/// alpha0 + omega t, where omega = (omega01, omega02 + eps).
double birkhoff_conjugacy_error(const FourierSeries& f, const FrequencyVector& omega0, double eps,
                                const VectorXd& A0, const VectorXd& alpha0, double t_final,
                                double tol = 1e-13);

struct Obstruction {
    HarmonicVector nu;
    VectorXd locus;  ///< a point with omega(A).nu = 0 and f_nu != 0
};

/// First-order obstructions to analytic integrability: nonzero f_nu whose
/// resonance surface omega(A).nu = 0 meets the action box (grid sign changes
/// refined by bisection).
std::vector<Obstruction> poincare_obstruction_scan(
    const FourierSeries& f, const std::function<VectorXd(const VectorXd&)>& omega_of_A, const VectorXd& lo,
    const VectorXd& hi, int max_norm, int grid_n = 24);

/// Resonant series data: fast angles psi in T^r, slow angles beta in T^s;
/// f lives on the product torus (dim r + s). Solution through order 2:
/// h = eps h1 + eps^2 h2 (fast components), k = eps (k1 + c1) + eps^2 k2.
struct ResonantSeries {
    int r, s;
    VecFourierSeries h1, h2;      ///< zero-mean, r-vector valued, keyed by fast harmonics
    VecFourierSeries k1, k2;      ///< zero-mean, s-vector valued
    VectorXd c1;                  ///< constant shift absorbed by the Hessian at order 2
    Eigen::MatrixXd hessian;      ///< d^2 fbar at beta0
};

/// Solves the resonant torus equations order by order at a nondegenerate
/// stationary point beta0 of the fast-angle average of f.
/// StationarityViolated / DegenerateHessian guard the hypotheses.
ResonantSeries resonant_lindstedt(const FourierSeries& f, int r, const FrequencyVector& omega,
                                  const VectorXd& beta0);

/// Pointwise residuals of the order-1 and order-2 equations on a fast-angle
/// grid (both equations, max norm).
double resonant_residual(const ResonantSeries& sol, const FourierSeries& f, const FrequencyVector& omega,
                         const VectorXd& beta0, int grid_n = 16);

/// Scale-0 cluster matrix M^(0)(nu; eps): sums the values of connected
/// scale-0 clusters with vanishing total harmonic, inserted on a line of
/// current nu, as matrix coefficients of powers of eps.
struct ClusterMatrix {
    HarmonicVector nu;
    int k_max;
    std::vector<MatrixXcd> order_coeff;  ///< order_coeff[m-1]: coefficient of eps^m

    MatrixXcd eval(double eps) const;
};

ClusterMatrix cluster_matrix(const FourierSeries& f, const FrequencyVector& omega, const HarmonicVector& nu,
                             int k_max);

/// ((omega.nu)^2 Id - M0)^{-1}; ResummationDiverges unless ||M0||/(omega.nu)^2 < 1.
MatrixXcd resummed_propagator(const HarmonicVector& nu, const MatrixXcd& M0, const FrequencyVector& omega);

/// K-term geometric partial sum sum_{j<=K} (M0/(omega.nu)^2)^j / (omega.nu)^2.
MatrixXcd propagator_partial_sum(const HarmonicVector& nu, const MatrixXcd& M0, const FrequencyVector& omega,
                                 int K);

/// Generating function of the truncated invariant torus:
/// Phi(A, psi) = G(psi) + a.psi + h(psi).(A - omega - Dh(psi)), D = omega.d_psi.
struct GenFunResult {
    FourierSeries G;
    VectorXd a;
    double closedness_residual;  ///< Fourier-space antisymmetry of the one-form
    double grid_curl_residual;   ///< finite-difference cross-partials on a grid
    double map_residual;         ///< sup |(A + dPsi Phi) - omega| on the torus
};

GenFunResult torus_generating_function(const TorusSeries& T, double eps, double closedness_tol = 1e-8);

/// The standard two-harmonic test perturbation cos(a1 + a2) + cos(a1).
FourierSeries default_thirring_f();

/// Pointwise gradient of a real trigonometric polynomial.
VectorXd grad_at(const FourierSeries& f, std::span<const double> alpha);

}  // namespace hamiltonia::lindstedt

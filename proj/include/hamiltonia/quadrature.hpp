#pragma once

#include <functional>

#include "hamiltonia/numerics.hpp"

namespace hamiltonia::quadrature {

using num::MatrixXd;
using num::VectorXd;

/// One-dimensional potential with derivative; H = p^2/(2m) + V(q).
struct Potential1D {
    std::function<double(double)> V;
    std::function<double(double)> dV;
    double m = 1.0;
    double q_lo = -1e6, q_hi = 1e6;  ///< declared domain
    double q_ref = 0.0;              ///< a point inside the well, used to bracket turning points
};

struct TurningPoints {
    double q_minus, q_plus;
};

/// The two simple turning points of V at energy E; throws
/// TurningPointDegenerate when V' (nearly) vanishes at either root.
TurningPoints find_turning_points(const Potential1D& V, double E);

/// Oscillation period T(E) = 2 int dx / sqrt(2/m (E - V)); the inverse
/// square-root endpoint singularities are removed exactly by the quadratic
/// substitution x = q_-+s^2 (resp. q_+ - s^2).
double period(const Potential1D& V, double E);

/// int_{q_-}^{q_+} g(x) dx / sqrt(2/m (E - V(x))) with the same substitution.
double weighted_time_integral(const Potential1D& V, double E, const std::function<double(double)>& g);

/// Time for the standard solution (started at q_- with zero velocity) to
/// reach q on the rising half period.
double time_to_reach(const Potential1D& V, double E, double q);

/// The standard solution Q(t): Q(0) = q_-(E), Qdot(0) = 0.
double standard_solution(const Potential1D& V, double E, double t);

/// A(E) = (1/2pi) closed-loop integral of p dq.
double action_of_energy(const Potential1D& V, double E);

/// Inverse of A(E) on a bracketing energy interval.
double energy_of_action(const Potential1D& V, double A, double E_lo, double E_hi);

/// Central-motion effective potential V_G = G^2/(2 m rho^2) + V(rho).
struct CentralPotential {
    std::function<double(double)> V;
    std::function<double(double)> dV;
    double G = 1.0;
    double m = 1.0;
    double rho_ref = 1.0;  ///< a radius inside the well

    Potential1D effective() const;
};

/// Radial and angular frequencies (omega_0, omega_1): omega_0 = 2 pi / T and
/// omega_1 the time average of G/(m R(t)^2) over a radial period.
std::pair<double, double> central_frequencies(const CentralPotential& V, double E);

/// Actions (A_1, A_2): A_1 = (1/pi) int sqrt(2m(E - V_G)) d rho, A_2 = G.
std::pair<double, double> central_actions(const CentralPotential& V, double E);

struct NormalModes {
    VectorXd omega;    ///< mode frequencies, ascending
    MatrixXd modes;    ///< columns: eigenvectors of m^{-1/2} c m^{-1/2}
    VectorXd masses;

    /// Mode actions A_beta of a phase point ([p; q] layout).
    VectorXd actions(const VectorXd& x) const;
    /// sum_beta omega_beta A_beta (equals the Hamiltonian).
    double energy(const VectorXd& x) const;
};

/// Harmonic chain diagonalization: omega^2 are the eigenvalues of
/// m_i^{-1/2} c_ij m_j^{-1/2}. Throws NotPositiveDefinite.
NormalModes normal_modes(const VectorXd& masses, const MatrixXd& stiffness);

/// alpha(t) = alpha0 + (A_i/J_i) t mod 2pi for free rotators.
std::vector<double> free_rotator_flow(const std::vector<double>& J, const std::vector<double>& A,
                                      const std::vector<double>& alpha0, double t);

enum class LatticeKind { toda, calogero, sutherland };

/// n interacting particles on a line.
struct LatticeState {
    LatticeKind kind = LatticeKind::toda;
    std::vector<double> p, q;
    double m = 1.0;
    double g = 1.0;
    double kappa = 2.0;  ///< Toda decay rate
    double omega = 0.0;  ///< Calogero trap frequency

    int n() const { return static_cast<int>(q.size()); }
};

double lattice_hamiltonian(const LatticeState& s);
void lattice_rhs(const LatticeState& s, const std::vector<double>& y, std::vector<double>& dydt);

/// The isospectral matrix M(p, q) whose eigenvalues are conserved
/// (Toda at m = g = 1, kappa = 2; Calogero at omega = 0, g = m = 1;
/// Sutherland at g = m = 1).
num::MatrixXcd lax_matrix(const LatticeState& s);

/// The partner N with dM/dt = i [M, N] along the flow.
num::MatrixXcd lax_partner(const LatticeState& s);

struct LaxDriftReport {
    double max_eigenvalue_drift;
    double max_entry_variation;  ///< non-triviality witness
};

/// Integrates the lattice to t_final, sampling the spectrum of M;
/// CollisionDetected if particles approach within 1e-8.
LaxDriftReport lax_eigenvalue_drift(const LatticeState& s, double t_final, int samples = 50);

/// Perturbation f(alpha, p, q) evaluated along the pendulum separatrix
/// q_a(t) = 4 atan(e^{sqrt(g) t}); D_ij = int d^2f/(d alpha_i d alpha_j) dt
/// with the phases advanced as alpha + omega t.
struct MelnikovResult {
    MatrixXd D;
    double abs_det;
};
MelnikovResult melnikov_matrix(const std::function<double(const VectorXd&, double, double)>& f,
                               const VectorXd& alpha, const VectorXd& omega, double g);

}  // namespace hamiltonia::quadrature

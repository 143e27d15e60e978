#pragma once

#include <functional>
#include <optional>

#include "hamiltonia/numerics.hpp"

namespace hamiltonia::canonical {

using num::MatrixXd;
using num::VectorXd;

/// Phase-space map on 2l variables, layout x = [p_1..p_l, q_1..q_l].
struct PhaseMap {
    int ell = 0;
    std::function<VectorXd(const VectorXd&)> forward;
    std::function<VectorXd(const VectorXd&)> inverse;  ///< optional

    bool has_inverse() const { return static_cast<bool>(inverse); }
};

/// Observable F(p, q) with an optional analytic gradient.
struct ObservableFn {
    std::function<double(const VectorXd&)> value;
    std::function<VectorXd(const VectorXd&)> gradient;  ///< optional; finite differences otherwise

    VectorXd grad(const VectorXd& x) const {
        if (gradient) return gradient(x);
        return num::gradient_richardson(value, x);
    }
};

/// The standard symplectic matrix E = [[0, I], [-I, 0]] in the [p; q] layout.
MatrixXd standard_symplectic(int ell);

/// || L E L^T - E ||_inf with the Jacobian L of the map at the point, built
/// from Richardson-refined central differences. Canonical maps give values at
/// the differentiation noise floor (<= 1e-6).
double symplectic_residual(const PhaseMap& map, const VectorXd& point);

/// Same probe, also reporting det L (canonical maps have det L = 1).
struct SymplecticProbe {
    double residual;
    double det;
};
SymplecticProbe symplectic_probe(const PhaseMap& map, const VectorXd& point);

/// {F, G} = sum_k (dF/dp_k dG/dq_k - dF/dq_k dG/dp_k). The ordering makes
/// {p, q} = +1; every bracket test in this repository uses this convention.
double poisson_bracket(const ObservableFn& F, const ObservableFn& G, const VectorXd& point);

/// Residual of Jacobi's identity {{F,G},Q} + {{G,Q},F} + {{Q,F},G} at a point
/// (inner brackets expanded by finite differences).
double jacobi_identity_residual(const ObservableFn& F, const ObservableFn& G, const ObservableFn& Q,
                                const VectorXd& point, double h = 1e-4);

/// The four classical generating-function families. The argument pair of the
/// generator determines how the map is reconstructed:
///   new_momentum_old_coordinate  Phi(p', q):  p = d_q Phi,   q' = d_{p'} Phi
///   old_coordinate_new_coordinate Gamma(q, q'): p = d_q Gamma, p' = -d_{q'} Gamma
///   old_momentum_new_coordinate  F(p, q'):   q = -d_p F,    p' = -d_{q'} F
///   old_momentum_new_momentum    G(p, p'):   q = -d_p G,    q' = d_{p'} G
enum class GeneratingFamily {
    new_momentum_old_coordinate,
    old_coordinate_new_coordinate,
    old_momentum_new_coordinate,
    old_momentum_new_momentum,
};

struct GeneratingFunction {
    GeneratingFamily family = GeneratingFamily::new_momentum_old_coordinate;
    int ell = 0;
    /// value(a, b) where (a, b) is the family's argument pair
    std::function<double(const VectorXd&, const VectorXd&)> value;
    /// optional analytic partials d/d a and d/d b; finite differences otherwise
    std::function<VectorXd(const VectorXd&, const VectorXd&)> grad_a;
    std::function<VectorXd(const VectorXd&, const VectorXd&)> grad_b;
};

struct DomainBox {
    VectorXd lo, hi;
    bool contains(const VectorXd& x) const {
        for (int i = 0; i < x.size(); ++i)
            if (x[i] < lo[i] || x[i] > hi[i]) return false;
        return true;
    }
};

/// Builds the forward map (p, q) -> (p', q') by solving the implicit
/// generating relations with Newton iteration; the unknown is kept inside the
/// box (ImplicitSolveFailed otherwise).
PhaseMap map_from_generating_function(const GeneratingFunction& gen, const DomainBox& box);

/// Cartesian-to-polar chart on l = 2: (p1, p2, q1, q2) -> (p_rho, p_theta, rho, theta).
PhaseMap polar_map();

/// Point transformation q' = R(q), p' = (dR/dq)^{-T} p.
PhaseMap point_transformation(int ell, const std::function<VectorXd(const VectorXd&)>& R);

}  // namespace hamiltonia::canonical

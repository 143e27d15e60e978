#include "hamiltonia/canonical.hpp"

#include <cmath>

namespace hamiltonia::canonical {

MatrixXd standard_symplectic(int ell) {
    MatrixXd E = MatrixXd::Zero(2 * ell, 2 * ell);
    for (int i = 0; i < ell; ++i) {
        E(i, ell + i) = 1.0;
        E(ell + i, i) = -1.0;
    }
    return E;
}

SymplecticProbe symplectic_probe(const PhaseMap& map, const VectorXd& point) {
    const int n = 2 * map.ell;
    if (point.size() != n) throw PreconditionViolated("symplectic_probe: point dimension mismatch");
    const MatrixXd L = num::jacobian_richardson(map.forward, point);
    const double det = L.determinant();
    if (std::abs(det) < 1e-12) throw JacobianSingular("symplectic_probe: Jacobian is singular");
    const MatrixXd E = standard_symplectic(map.ell);
    const MatrixXd R = L * E * L.transpose() - E;
    return SymplecticProbe{R.cwiseAbs().maxCoeff(), det};
}

double symplectic_residual(const PhaseMap& map, const VectorXd& point) {
    return symplectic_probe(map, point).residual;
}

double poisson_bracket(const ObservableFn& F, const ObservableFn& G, const VectorXd& point) {
    if (point.size() % 2 != 0) throw PreconditionViolated("poisson_bracket: odd phase dimension");
    const int ell = static_cast<int>(point.size()) / 2;
    const VectorXd gF = F.grad(point);
    const VectorXd gG = G.grad(point);
    double sum = 0.0;
    for (int k = 0; k < ell; ++k) sum += gF[k] * gG[ell + k] - gF[ell + k] * gG[k];
    return sum;
}

double jacobi_identity_residual(const ObservableFn& F, const ObservableFn& G, const ObservableFn& Q,
                                const VectorXd& point, double h) {
    const auto bracket_fn = [&](const ObservableFn& A, const ObservableFn& B) {
        return ObservableFn{[&A, &B](const VectorXd& x) { return poisson_bracket(A, B, x); },
                            [&A, &B, h](const VectorXd& x) {
                                return num::gradient_richardson(
                                    [&](const VectorXd& y) { return poisson_bracket(A, B, y); }, x, h);
                            }};
    };
    const auto FG = bracket_fn(F, G);
    const auto GQ = bracket_fn(G, Q);
    const auto QF = bracket_fn(Q, F);
    return poisson_bracket(FG, Q, point) + poisson_bracket(GQ, F, point) + poisson_bracket(QF, G, point);
}

namespace {

VectorXd grad_a_of(const GeneratingFunction& gen, const VectorXd& a, const VectorXd& b) {
    if (gen.grad_a) return gen.grad_a(a, b);
    return num::gradient_richardson([&](const VectorXd& x) { return gen.value(x, b); }, a);
}

VectorXd grad_b_of(const GeneratingFunction& gen, const VectorXd& a, const VectorXd& b) {
    if (gen.grad_b) return gen.grad_b(a, b);
    return num::gradient_richardson([&](const VectorXd& x) { return gen.value(a, x); }, b);
}

// Newton-solves g(u) = target for the unknown argument of the generator.
// Converges to round-off with analytic generator partials; with
// finite-difference partials the residual stalls near their noise floor,
// which is still accepted.
VectorXd implicit_solve(const std::function<VectorXd(const VectorXd&)>& g, const VectorXd& target,
                        VectorXd u, const DomainBox& box) {
    const double scale = std::max(1.0, target.cwiseAbs().maxCoeff());
    double best_res = std::numeric_limits<double>::infinity();
    VectorXd best_u = u;
    for (int it = 0; it < 60; ++it) {
        const VectorXd r = g(u) - target;
        const double res = r.cwiseAbs().maxCoeff();
        if (res < best_res) {
            best_res = res;
            best_u = u;
        }
        if (res < 1e-14 * scale) return u;
        const MatrixXd J = num::jacobian_richardson(g, u, 1e-6);
        const Eigen::FullPivLU<MatrixXd> lu(J);
        if (!lu.isInvertible())
            throw ImplicitSolveFailed("map_from_generating_function: singular implicit Jacobian");
        const VectorXd step = lu.solve(r);
        if (step.cwiseAbs().maxCoeff() < 1e-15 * scale) break;  // stagnated at the noise floor
        u -= step;
        if (!box.contains(u))
            throw ImplicitSolveFailed("map_from_generating_function: Newton iterate left the domain box");
    }
    if (best_res <= 1e-8 * scale) return best_u;
    throw ImplicitSolveFailed("map_from_generating_function: Newton did not converge");
}

}  // namespace

PhaseMap map_from_generating_function(const GeneratingFunction& gen, const DomainBox& box) {
    if (gen.ell <= 0) throw PreconditionViolated("map_from_generating_function: bad dimension");
    PhaseMap map;
    map.ell = gen.ell;
    const int ell = gen.ell;
    map.forward = [gen, box, ell](const VectorXd& x) -> VectorXd {
        const VectorXd p = x.head(ell), q = x.tail(ell);
        VectorXd out(2 * ell);
        switch (gen.family) {
            case GeneratingFamily::new_momentum_old_coordinate: {
                // p = d_q Phi(p', q); then q' = d_{p'} Phi(p', q)
                const auto g = [&](const VectorXd& pp) { return grad_b_of(gen, pp, q); };
                const VectorXd pp = implicit_solve(g, p, p, box);
                out << pp, grad_a_of(gen, pp, q);
                return out;
            }
            case GeneratingFamily::old_coordinate_new_coordinate: {
                // p = d_q Gamma(q, q'); then p' = -d_{q'} Gamma(q, q')
                const auto g = [&](const VectorXd& qp) { return grad_a_of(gen, q, qp); };
                const VectorXd qp = implicit_solve(g, p, q, box);
                out << -grad_b_of(gen, q, qp), qp;
                return out;
            }
            case GeneratingFamily::old_momentum_new_coordinate: {
                // q = -d_p F(p, q'); then p' = -d_{q'} F(p, q')
                const auto g = [&](const VectorXd& qp) { return VectorXd(-grad_a_of(gen, p, qp)); };
                const VectorXd qp = implicit_solve(g, q, q, box);
                out << -grad_b_of(gen, p, qp), qp;
                return out;
            }
            case GeneratingFamily::old_momentum_new_momentum: {
                // q = -d_p G(p, p'); then q' = d_{p'} G(p, p')
                const auto g = [&](const VectorXd& pp) { return VectorXd(-grad_a_of(gen, p, pp)); };
                const VectorXd pp = implicit_solve(g, q, p, box);
                out << pp, grad_b_of(gen, p, pp);
                return out;
            }
        }
        throw PreconditionViolated("map_from_generating_function: unknown family");
    };
    return map;
}

PhaseMap polar_map() {
    PhaseMap map;
    map.ell = 2;
    map.forward = [](const VectorXd& x) -> VectorXd {
        const double p1 = x[0], p2 = x[1], q1 = x[2], q2 = x[3];
        const double rho = std::hypot(q1, q2);
        if (rho == 0.0) throw ChartSingular("polar_map: origin");
        const double n1 = q1 / rho, n2 = q2 / rho;
        VectorXd out(4);
        out << p1 * n1 + p2 * n2, rho * (-p1 * n2 + p2 * n1), rho, std::atan2(q2, q1);
        return out;
    };
    map.inverse = [](const VectorXd& y) -> VectorXd {
        const double prho = y[0], ptheta = y[1], rho = y[2], theta = y[3];
        const double n1 = std::cos(theta), n2 = std::sin(theta);
        VectorXd out(4);
        out << prho * n1 - ptheta * n2 / rho, prho * n2 + ptheta * n1 / rho, rho * n1, rho * n2;
        return out;
    };
    return map;
}

PhaseMap point_transformation(int ell, const std::function<VectorXd(const VectorXd&)>& R) {
    PhaseMap map;
    map.ell = ell;
    map.forward = [R, ell](const VectorXd& x) -> VectorXd {
        const VectorXd p = x.head(ell), q = x.tail(ell);
        const MatrixXd dR = num::jacobian_richardson(R, q);
        VectorXd out(2 * ell);
        out << dR.transpose().fullPivLu().solve(p), R(q);
        return out;
    };
    return map;
}

}  // namespace hamiltonia::canonical

#include <cmath>

#include "doctest.h"
#include "hamiltonia/canonical.hpp"
#include "hamiltonia/quadrature.hpp"

using namespace hamiltonia;
using canonical::DomainBox;
using canonical::GeneratingFamily;
using canonical::GeneratingFunction;
using canonical::ObservableFn;
using canonical::PhaseMap;
using num::VectorXd;

namespace {

PhaseMap identity_map(int ell) {
    PhaseMap m;
    m.ell = ell;
    m.forward = [](const VectorXd& x) { return x; };
    m.inverse = [](const VectorXd& x) { return x; };
    return m;
}

DomainBox wide_box(int n, double half_width = 50.0) {
    DomainBox b;
    b.lo = VectorXd::Constant(n, -half_width);
    b.hi = VectorXd::Constant(n, half_width);
    return b;
}

}  // namespace

TEST_CASE("symplectic residual") {
    SUBCASE("identity map is canonical to round-off") {
        VectorXd x(4);
        x << 0.3, -0.7, 1.1, 0.2;
        CHECK(canonical::symplectic_residual(identity_map(2), x) <= 1e-9);
    }
    SUBCASE("polar chart is homogeneous canonical") {
        VectorXd x(4);
        x << 0.4, -0.2, 0.9, 0.6;
        const auto probe = canonical::symplectic_probe(canonical::polar_map(), x);
        CHECK(probe.residual <= 1e-6);
        CHECK(probe.det == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("uniform scaling is rejected with residual 3") {
        PhaseMap scale;
        scale.ell = 1;
        scale.forward = [](const VectorXd& x) { return VectorXd(2.0 * x); };
        VectorXd x(2);
        x << 0.5, -0.3;
        CHECK(canonical::symplectic_residual(scale, x) == doctest::Approx(3.0).epsilon(1e-7));
    }
    SUBCASE("composition of canonical maps stays canonical") {
        const auto polar = canonical::polar_map();
        PhaseMap composed;
        composed.ell = 2;
        composed.forward = [&](const VectorXd& x) {
            VectorXd y = polar.forward(x);
            // follow with a point shift of the angle, p_theta unchanged
            y[3] += 0.1 * std::sin(y[2]);
            y[0] -= 0.1 * y[1] * std::cos(y[2]);
            return y;
        };
        VectorXd x(4);
        x << 0.4, -0.2, 1.1, 0.3;
        CHECK(canonical::symplectic_residual(composed, x) <= 2e-6);
    }
}

TEST_CASE("poisson bracket") {
    VectorXd x(2);
    x << 1.0, 2.0;
    SUBCASE("{p, q} = +1") {
        ObservableFn P{[](const VectorXd& v) { return v[0]; }, {}};
        ObservableFn Q{[](const VectorXd& v) { return v[1]; }, {}};
        CHECK(canonical::poisson_bracket(P, Q, x) == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("antisymmetry: {F, F} = 0") {
        ObservableFn F{[](const VectorXd& v) { return v[0] * v[0] * v[1] + std::sin(v[1]); }, {}};
        CHECK(std::abs(canonical::poisson_bracket(F, F, x)) <= 1e-10);
    }
    SUBCASE("Jacobi identity for F = p^2 q, G = p q^2, Q = p + q at (1,2)") {
        ObservableFn F{[](const VectorXd& v) { return v[0] * v[0] * v[1]; },
                       [](const VectorXd& v) {
                           VectorXd g(2);
                           g << 2.0 * v[0] * v[1], v[0] * v[0];
                           return g;
                       }};
        ObservableFn G{[](const VectorXd& v) { return v[0] * v[1] * v[1]; },
                       [](const VectorXd& v) {
                           VectorXd g(2);
                           g << v[1] * v[1], 2.0 * v[0] * v[1];
                           return g;
                       }};
        ObservableFn Q{[](const VectorXd& v) { return v[0] + v[1]; },
                       [](const VectorXd&) {
                           VectorXd g(2);
                           g << 1.0, 1.0;
                           return g;
                       }};
        CHECK(std::abs(canonical::jacobi_identity_residual(F, G, Q, x)) <= 1e-8);
    }
    SUBCASE("analytic gradients agree with finite differences") {
        ObservableFn F{[](const VectorXd& v) { return v[0] * v[0] * v[1]; },
                       [](const VectorXd& v) {
                           VectorXd g(2);
                           g << 2.0 * v[0] * v[1], v[0] * v[0];
                           return g;
                       }};
        const VectorXd fd = num::gradient_richardson(F.value, x);
        CHECK((F.gradient(x) - fd).cwiseAbs().maxCoeff() <= 1e-6);
    }
}

TEST_CASE("maps from generating functions") {
    num::Rng rng(123);
    SUBCASE("Phi = p'.q generates the identity") {
        GeneratingFunction gen;
        gen.family = GeneratingFamily::new_momentum_old_coordinate;
        gen.ell = 2;
        gen.value = [](const VectorXd& pp, const VectorXd& q) { return pp.dot(q); };
        const auto map = canonical::map_from_generating_function(gen, wide_box(2));
        VectorXd x(4);
        x << 0.3, -0.8, 1.2, 0.4;
        CHECK((map.forward(x) - x).cwiseAbs().maxCoeff() <= 1e-10);
    }
    SUBCASE("Phi = p'.R(q) generates the point transformation R(q) = q + 0.1 sin q") {
        GeneratingFunction gen;
        gen.family = GeneratingFamily::new_momentum_old_coordinate;
        gen.ell = 1;
        gen.value = [](const VectorXd& pp, const VectorXd& q) {
            return pp[0] * (q[0] + 0.1 * std::sin(q[0]));
        };
        gen.grad_a = [](const VectorXd&, const VectorXd& q) {
            VectorXd g(1);
            g << q[0] + 0.1 * std::sin(q[0]);
            return g;
        };
        gen.grad_b = [](const VectorXd& pp, const VectorXd& q) {
            VectorXd g(1);
            g << pp[0] * (1.0 + 0.1 * std::cos(q[0]));
            return g;
        };
        const auto map = canonical::map_from_generating_function(gen, wide_box(1));
        for (int i = 0; i < 20; ++i) {
            VectorXd x(2);
            x << rng.uniform(-1.0, 1.0), rng.uniform(-2.0, 2.0);
            const VectorXd y = map.forward(x);
            CHECK(y[1] == doctest::Approx(x[1] + 0.1 * std::sin(x[1])).epsilon(1e-9));
            CHECK(y[0] == doctest::Approx(x[0] / (1.0 + 0.1 * std::cos(x[1]))).epsilon(1e-8));
            CHECK(canonical::symplectic_residual(map, x) <= 1e-6);
        }
    }
    SUBCASE("all four families generate canonical maps") {
        // family 1: Phi(p', q) = p'.q + 0.05 p'^2 sin q
        GeneratingFunction g1;
        g1.family = GeneratingFamily::new_momentum_old_coordinate;
        g1.ell = 1;
        g1.value = [](const VectorXd& a, const VectorXd& b) {
            return a[0] * b[0] + 0.05 * a[0] * a[0] * std::sin(b[0]);
        };
        g1.grad_a = [](const VectorXd& a, const VectorXd& b) {
            VectorXd g(1);
            g << b[0] + 0.1 * a[0] * std::sin(b[0]);
            return g;
        };
        g1.grad_b = [](const VectorXd& a, const VectorXd& b) {
            VectorXd g(1);
            g << a[0] + 0.05 * a[0] * a[0] * std::cos(b[0]);
            return g;
        };
        // family 2: Gamma(q, q') = q q' + 0.1 cos q
        GeneratingFunction g2;
        g2.family = GeneratingFamily::old_coordinate_new_coordinate;
        g2.ell = 1;
        g2.value = [](const VectorXd& a, const VectorXd& b) { return a[0] * b[0] + 0.1 * std::cos(a[0]); };
        g2.grad_a = [](const VectorXd& a, const VectorXd& b) {
            VectorXd g(1);
            g << b[0] - 0.1 * std::sin(a[0]);
            return g;
        };
        g2.grad_b = [](const VectorXd& a, const VectorXd&) {
            VectorXd g(1);
            g << a[0];
            return g;
        };
        // family 3: F(p, q') = -p q' + 0.05 sin(p q')
        GeneratingFunction g3;
        g3.family = GeneratingFamily::old_momentum_new_coordinate;
        g3.ell = 1;
        g3.value = [](const VectorXd& a, const VectorXd& b) {
            return -a[0] * b[0] + 0.05 * std::sin(a[0] * b[0]);
        };
        g3.grad_a = [](const VectorXd& a, const VectorXd& b) {
            VectorXd g(1);
            g << -b[0] + 0.05 * b[0] * std::cos(a[0] * b[0]);
            return g;
        };
        g3.grad_b = [](const VectorXd& a, const VectorXd& b) {
            VectorXd g(1);
            g << -a[0] + 0.05 * a[0] * std::cos(a[0] * b[0]);
            return g;
        };
        // family 4: G(p, p') = -p p' + 0.05 p^3
        GeneratingFunction g4;
        g4.family = GeneratingFamily::old_momentum_new_momentum;
        g4.ell = 1;
        g4.value = [](const VectorXd& a, const VectorXd& b) {
            return -a[0] * b[0] + 0.05 * a[0] * a[0] * a[0];
        };
        g4.grad_a = [](const VectorXd& a, const VectorXd& b) {
            VectorXd g(1);
            g << -b[0] + 0.15 * a[0] * a[0];
            return g;
        };
        g4.grad_b = [](const VectorXd& a, const VectorXd&) {
            VectorXd g(1);
            g << -a[0];
            return g;
        };
        for (const auto* gen : {&g1, &g2, &g3, &g4}) {
            const auto map = canonical::map_from_generating_function(*gen, wide_box(1));
            for (int i = 0; i < 5; ++i) {
                VectorXd x(2);
                x << rng.uniform(0.4, 1.2), rng.uniform(0.4, 1.2);
                const auto probe = canonical::symplectic_probe(map, x);
                CHECK(probe.residual <= 1e-6);
                CHECK(probe.det == doctest::Approx(1.0).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("energy-time generator for the harmonic well") {
    // S(q, E) = integral of sqrt(2m(E - V)) from the left turning point;
    // d_q S = p and d_E S = t, the time for the standard solution to reach q.
    const double m = 1.3, om = 0.9;
    quadrature::Potential1D V;
    V.m = m;
    V.V = [&](double q) { return 0.5 * m * om * om * q * q; };
    V.dV = [&](double q) { return m * om * om * q; };
    const double E = 0.8;
    const auto S = [&](double q, double Ee) {
        const double qm = -std::sqrt(2.0 * Ee / (m * om * om));
        return num::integrate(
            [&](double x) { return std::sqrt(std::max(0.0, 2.0 * m * (Ee - V.V(x)))); }, qm, q, 1e-12);
    };
    for (double q : {-0.2, 0.1, 0.5}) {
        const double p = std::sqrt(2.0 * m * (E - V.V(q)));
        const double dqS = num::deriv_richardson([&](double x) { return S(x, E); }, q, 1e-6);
        CHECK(std::abs(dqS - p) <= 1e-8 * std::max(1.0, p));
        const double dES = num::deriv_richardson([&](double Ee) { return S(q, Ee); }, E, 1e-6);
        const double t_direct = quadrature::time_to_reach(V, E, q);
        CHECK(std::abs(dES - t_direct) <= 1e-8 * std::max(1.0, t_direct));
    }
}

TEST_CASE("canonicity implies bracket preservation") {
    // transformed coordinate functions of a canonical map satisfy the
    // elementary bracket relations
    const auto polar = canonical::polar_map();
    num::Rng rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        VectorXd x(4);
        x << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(0.5, 1.5), rng.uniform(0.3, 1.2);
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                ObservableFn Pi{[&, i](const VectorXd& v) { return polar.forward(v)[i]; }, {}};
                ObservableFn Qj{[&, j](const VectorXd& v) { return polar.forward(v)[2 + j]; }, {}};
                const double pb = canonical::poisson_bracket(Pi, Qj, x);
                CHECK(std::abs(pb - (i == j ? 1.0 : 0.0)) <= 1e-6);
            }
        }
    }
}

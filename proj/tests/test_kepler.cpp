#include <cmath>

#include "doctest.h"
#include "hamiltonia/kepler.hpp"
#include "hamiltonia/numerics.hpp"

using namespace hamiltonia;
using kepler::Rational;

TEST_CASE("first orders of the eccentricity expansion") {
    SUBCASE("order 1: h = e sin(lambda)") {
        const auto q = kepler::series_recursion(1);
        REQUIRE(q.size() == 2);
        CHECK(q.at(1) == Rational(-1, 2));
        CHECK(q.at(-1) == Rational(1, 2));
    }
    SUBCASE("order 2: h^(2) = (1/2) sin(2 lambda)") {
        const auto q = kepler::series_recursion(2);
        REQUIRE(q.size() == 2);
        CHECK(q.at(2) == Rational(-1, 4));
        CHECK(q.at(-2) == Rational(1, 4));
    }
    SUBCASE("nu = 0 coefficient always vanishes") {
        for (int k = 1; k <= 10; ++k) CHECK(kepler::series_recursion(k).count(0) == 0);
    }
}

TEST_CASE("recursion, tree sum, and closed form agree exactly") {
    for (int k = 1; k <= 8; ++k) {
        const auto a = kepler::series_recursion(k);
        const auto b = kepler::series_trees(k);
        const auto c = kepler::series_lagrange(k);
        CHECK(a == b);
        CHECK(a == c);
    }
    for (int k = 9; k <= 12; ++k) CHECK(kepler::series_recursion(k) == kepler::series_lagrange(k));
}

TEST_CASE("zero-current trees cancel exactly at orders 2..6") {
    for (int k = 2; k <= 6; ++k) {
        const auto leftover = kepler::zero_current_tree_sum(k);
        CHECK(leftover.empty());
    }
}

TEST_CASE("coefficient bound sum |h^(k)_nu| <= 4^k") {
    Rational four_k = 1;
    for (int k = 1; k <= 12; ++k) {
        four_k *= 4;
        CHECK(kepler::abs_coefficient_sum(kepler::series_recursion(k)) <= four_k);
    }
}

TEST_CASE("solve_kepler") {
    SUBCASE("e = 0 returns lambda") {
        CHECK(kepler::solve_kepler(0.0, 1.234) == doctest::Approx(1.234).epsilon(1e-15));
    }
    SUBCASE("lambda = 0 returns 0") {
        for (double e : {0.1, 0.5, 0.9}) CHECK(kepler::solve_kepler(e, 0.0) == doctest::Approx(0.0));
    }
    SUBCASE("e = 0.3, lambda = pi/2 against bisection oracle") {
        const double newton = kepler::solve_kepler(0.3, M_PI / 2.0);
        const double bisect = kepler::solve_kepler(0.3, M_PI / 2.0, kepler::SolveMethod::bisection);
        CHECK(newton == doctest::Approx(bisect).epsilon(1e-12));
        CHECK(newton == doctest::Approx(1.8584).epsilon(1e-4));
    }
    SUBCASE("residual tolerance across the parameter range") {
        num::Rng rng(99);
        for (int i = 0; i < 200; ++i) {
            const double e = rng.uniform(0.0, 0.95);
            const double lam = rng.uniform(-10.0, 10.0);
            const double xi = kepler::solve_kepler(e, lam);
            CHECK(std::abs(xi - e * std::sin(xi) - lam) <= 1e-13);
        }
    }
}

TEST_CASE("lagrange closed-form evaluation") {
    CHECK(kepler::lagrange_coefficient(1, M_PI / 2.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(kepler::lagrange_coefficient(2, M_PI / 4.0) == doctest::Approx(0.5).epsilon(1e-14));
    num::Rng rng(5);
    for (int i = 0; i < 20; ++i) {
        const double psi = rng.uniform(0.0, num::kTwoPi);
        double from_series = 0.0;
        for (const auto& [nu, q] : kepler::series_recursion(4))
            if (nu > 0) from_series += -2.0 * static_cast<double>(q) * std::sin(nu * psi);
        CHECK(kepler::lagrange_coefficient(4, psi) == doctest::Approx(from_series).epsilon(1e-14));
    }
}

TEST_CASE("series vs Newton cross-check") {
    num::Rng rng(2024);
    const int K = 15;
    // rigorous tail majorant: sum_{k>K} e^k sum_nu |h^(k)_nu|, extended past
    // the last computed term by its geometric ratio at e = 0.6
    std::vector<double> S;
    for (int k = K + 1; k <= K + 25; ++k)
        S.push_back(static_cast<double>(kepler::abs_coefficient_sum(kepler::series_lagrange(k))));
    const auto tail_bound = [&](double e) {
        double sum = 0.0, epow = std::pow(e, K + 1);
        for (size_t i = 0; i < S.size(); ++i, epow *= e) sum += S[i] * epow;
        return sum / (1.0 - e / 0.66) + 1e-12;  // remainder via the ratio at the radius
    };
    for (int i = 0; i < 200; ++i) {
        const double e = rng.uniform(0.0, 0.6);
        const double lam = rng.uniform(0.0, num::kTwoPi);
        const double xi = kepler::solve_kepler(e, lam);
        const double h = kepler::series_eval(e, lam, K);
        CHECK(std::abs(lam + h - xi) <= tail_bound(e));
        if (e <= 0.25) CHECK(std::abs(lam + h - xi) <= 1e-8);
    }
}

TEST_CASE("resummed evaluations") {
    SUBCASE("e = 0 gives 0") {
        CHECK(kepler::resummed_series_eval(0.0, 1.0, 10, kepler::ResummationRoute::levi_civita) ==
              doctest::Approx(0.0));
    }
    SUBCASE("levi-civita route against the Newton oracle") {
        const double e = 0.2, psi = 1.0;
        const double target = kepler::solve_kepler(e, psi) - psi;
        const double lc = kepler::resummed_series_eval(e, psi, 10, kepler::ResummationRoute::levi_civita);
        const double ps = kepler::resummed_series_eval(e, psi, 10, kepler::ResummationRoute::power_series);
        CHECK(std::abs(lc - target) <= 1e-8);
        CHECK(std::abs(ps - target) <= 1e-8);
    }
    SUBCASE("truncation tail ratio at e = 0.5") {
        const double psi = 0.7;
        const double a12 = kepler::resummed_series_eval(0.5, psi, 12, kepler::ResummationRoute::power_series);
        const double a13 = kepler::resummed_series_eval(0.5, psi, 13, kepler::ResummationRoute::power_series);
        CHECK(std::abs(a13 - a12) <= std::pow(0.5, 13) * 4.0);
    }
    SUBCASE("no-simple-node route reproduces the solution at small e") {
        for (double e : {0.05, 0.15}) {
            for (double psi : {0.4, 1.7, 3.9}) {
                const double target = kepler::solve_kepler(e, psi) - psi;
                const double v =
                    kepler::resummed_series_eval(e, psi, 8, kepler::ResummationRoute::no_simple_node);
                CHECK(std::abs(v - target) <= 1e5 * std::pow(e, 9) + 1e-12);
            }
        }
    }
}

TEST_CASE("laplace radius") {
    const double rho = kepler::laplace_radius();
    CHECK(rho == doctest::Approx(0.6627).epsilon(8e-4));
    SUBCASE("eta probes") {
        CHECK(kepler::eta_parameter(1.0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(kepler::eta_parameter_imag_axis(rho) == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("crude bounds from the tree estimates are smaller") {
        CHECK(0.25 < rho);
        CHECK(0.3678 < rho);
    }
}

TEST_CASE("anomalies") {
    SUBCASE("circular orbit") {
        const auto a = kepler::anomalies(0.0, 0.8);
        CHECK(a.xi == doctest::Approx(0.8));
        CHECK(a.theta == doctest::Approx(0.8));
        CHECK(a.rho_over_a == doctest::Approx(1.0));
    }
    SUBCASE("identity at e = 0.1, lambda = 1") {
        const auto a = kepler::anomalies(0.1, 1.0);
        CHECK(std::abs((1.0 - 0.1 * std::cos(a.xi)) * (1.0 + 0.1 * std::cos(a.theta)) - (1.0 - 0.01)) <=
              1e-12);
    }
    SUBCASE("apocenter") {
        const auto a = kepler::anomalies(0.25, M_PI);
        CHECK(a.xi == doctest::Approx(M_PI).epsilon(1e-13));
        CHECK(a.theta == doctest::Approx(M_PI).epsilon(1e-13));
        CHECK(a.rho_over_a == doctest::Approx(1.25).epsilon(1e-13));
    }
    SUBCASE("integral form of the mean anomaly") {
        num::Rng rng(31);
        for (int i = 0; i < 25; ++i) {
            const double e = rng.uniform(0.0, 0.7);
            const double lam = rng.uniform(0.05, num::kTwoPi - 0.05);
            const auto a = kepler::anomalies(e, lam);
            const double integral = num::integrate(
                [&](double th) {
                    const double d = 1.0 + e * std::cos(th);
                    return 1.0 / (d * d);
                },
                0.0, a.theta, 1e-13);
            CHECK(std::abs(std::pow(1.0 - e * e, 1.5) * integral - lam) <= 1e-11);
        }
    }
}

TEST_CASE("f and g leading coefficients") {
    const auto c = kepler::fg_leading_coefficients();
    CHECK(std::abs(c.g_linear - 1.0) <= 1e-3);
    CHECK(std::abs(c.g_xy - 1.0) <= 1e-2);
    CHECK(std::abs(c.f_linear - 2.0) <= 1e-3);
    CHECK(std::abs(c.f_xy - 2.5) <= 1e-2);
    CHECK(std::abs(c.f_xy / c.f_linear - 1.25) <= 1e-2);
}

TEST_CASE("regularized restricted three-body Hamiltonian") {
    const kepler::R3bpParams par{1.0, 5.0, std::pow(5.0, -1.5), 1e-3};
    SUBCASE("eps = 0 circular value") {
        kepler::R3bpParams p0 = par;
        p0.eps = 0.0;
        const double L = 1.2;
        CHECK(kepler::regularized_r3bp_hamiltonian(p0, L, 0.7, 0.0, 0.0) ==
              doctest::Approx(-p0.g * p0.g / (2.0 * L * L) - p0.omega * L).epsilon(1e-14));
    }
    SUBCASE("matches the elements chart away from the circular point") {
        num::Rng rng(17);
        for (int i = 0; i < 50; ++i) {
            const double L = rng.uniform(0.8, 1.5);
            const double lam = rng.uniform(0.0, num::kTwoPi);
            const double gam = rng.uniform(0.0, num::kTwoPi);
            const double G = 0.1;
            const double p = std::sqrt(2.0 * G) * std::cos(gam);
            const double q = std::sqrt(2.0 * G) * std::sin(gam);
            const double via_reg = kepler::regularized_r3bp_hamiltonian(par, L, lam, p, q);
            // chart chain: L0 = L, G0 = L - G, lambda0 = lambda + gamma, gamma0 = -gamma
            const double via_el = kepler::r3bp_hamiltonian_elements(par, L, lam + gam, L - G, -gam);
            CHECK(std::abs(via_reg - via_el) <= 1e-10 * std::max(1.0, std::abs(via_el)));
        }
    }
    SUBCASE("second differences continuous through p = q = 0") {
        const double L = 1.1, lam = 0.9, h = 5e-4;
        const auto H = [&](double p, double q) {
            return kepler::regularized_r3bp_hamiltonian(par, L, lam, p, q);
        };
        const double dpp_plus = (H(2 * h, 0) - 2 * H(h, 0) + H(0, 0)) / (h * h);
        const double dpp_minus = (H(-2 * h, 0) - 2 * H(-h, 0) + H(0, 0)) / (h * h);
        CHECK(std::abs(dpp_plus - dpp_minus) <= 1e-6 * std::max(1.0, std::abs(dpp_plus)) + 1e-6);
        const double dqq_plus = (H(0, 2 * h) - 2 * H(0, h) + H(0, 0)) / (h * h);
        const double dqq_minus = (H(0, -2 * h) - 2 * H(0, -h) + H(0, 0)) / (h * h);
        CHECK(std::abs(dqq_plus - dqq_minus) <= 1e-6 * std::max(1.0, std::abs(dqq_plus)) + 1e-6);
    }
    SUBCASE("domain guard") {
        CHECK_THROWS_AS((void)kepler::regularized_r3bp_hamiltonian(par, 0.5, 0.0, 1.0, 0.1),
                        DomainViolation);
    }
}

TEST_CASE("levi-civita squaring map") {
    SUBCASE("(1,0)") {
        const auto roots = kepler::levi_civita_map(1.0, 0.0);
        REQUIRE(roots.size() == 2);
        CHECK(roots[0].first == doctest::Approx(1.0));
        CHECK(roots[0].second == doctest::Approx(0.0));
    }
    SUBCASE("(0,1)") {
        const auto roots = kepler::levi_civita_map(0.0, 1.0);
        const double r = std::sqrt(2.0) / 2.0;
        CHECK(roots[0].first == doctest::Approx(r).epsilon(1e-14));
        CHECK(roots[0].second == doctest::Approx(r).epsilon(1e-14));
    }
    SUBCASE("origin has a single preimage") { CHECK(kepler::levi_civita_map(0.0, 0.0).size() == 1); }
    SUBCASE("round trip") {
        num::Rng rng(11);
        for (int i = 0; i < 50; ++i) {
            const double x = rng.uniform(-2.0, 2.0), y = rng.uniform(-2.0, 2.0);
            for (const auto& [xi, eta] : kepler::levi_civita_map(x, y)) {
                CHECK(std::abs(xi * xi - eta * eta - x) <= 1e-14 * (1.0 + std::abs(x)));
                CHECK(std::abs(2.0 * xi * eta - y) <= 1e-14 * (1.0 + std::abs(y)));
            }
        }
    }
}

TEST_CASE("orbit elements from the actions") {
    const auto el = kepler::elements_from_actions(1.25, 0.8, 1.0, 1.0);
    CHECK(el.a == doctest::Approx(1.25 * 1.25).epsilon(1e-14));
    CHECK(el.G == doctest::Approx(1.25 * std::sqrt(1.0 - el.e * el.e)).epsilon(1e-12));
    CHECK(el.e >= 0.0);
    CHECK(el.e < 1.0);
    CHECK_THROWS_AS((void)kepler::elements_from_actions(1.0, 1.2, 1.0, 1.0), DomainViolation);
}

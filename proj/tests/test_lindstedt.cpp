#include <cmath>

#include "doctest.h"
#include "hamiltonia/lindstedt.hpp"
#include "hamiltonia/numerics.hpp"

using namespace hamiltonia;
using lindstedt::Method;
using lindstedt::TorusSeries;
using num::VectorXd;

namespace {
const double kPhi = (1.0 + std::sqrt(5.0)) / 2.0;
}

TEST_CASE("first lindstedt order by hand") {
    // f = cos(a1 + a2): h^(1)_(1,1) = i (1,1) (1/2) / (1 + phi)^2
    const auto f = cosine_series(HarmonicVector{1, 1});
    const auto om = golden_frequency();
    const auto h1 = lindstedt::lindstedt_coefficient(f, om, 1);
    const auto c = h1.at(HarmonicVector{1, 1});
    REQUIRE(c.size() == 2);
    const double expect = 0.5 / std::pow(1.0 + kPhi, 2);
    CHECK(c[0].real() == doctest::Approx(0.0));
    CHECK(c[0].imag() == doctest::Approx(expect).epsilon(1e-12));
    CHECK(c[1].imag() == doctest::Approx(expect).epsilon(1e-12));
    CHECK(std::abs(c[0].imag() - 0.07295) <= 1e-5);
    // zero mean
    CHECK(h1.at(HarmonicVector{0, 0}).empty());
}

TEST_CASE("recursion and trees agree") {
    const auto om = golden_frequency();
    auto f2 = cosine_series(HarmonicVector{1, 1});
    f2 += cosine_series(HarmonicVector{1, -1}, 0.7);
    const std::vector<FourierSeries> cases = {lindstedt::default_thirring_f(), f2};
    for (const FourierSeries* f : {&cases[0], &cases[1]}) {
        const auto Ta = lindstedt::lindstedt_series(*f, om, 6, Method::recursion);
        const auto Tb = lindstedt::lindstedt_series(*f, om, 6, Method::trees);
        for (int k = 1; k <= 6; ++k) {
            const auto& A = Ta.orders[static_cast<size_t>(k - 1)];
            const auto& B = Tb.orders[static_cast<size_t>(k - 1)];
            double scale = std::max(1e-300, A.abs_sum());
            // same support, same coefficients to 1e-12 relative
            for (const auto& [nu, ca] : A.coefficients()) {
                const auto cb = B.at(nu);
                REQUIRE(!cb.empty());
                for (size_t i = 0; i < ca.size(); ++i) CHECK(std::abs(ca[i] - cb[i]) <= 1e-12 * scale);
            }
            for (const auto& [nu, cb] : B.coefficients()) CHECK(!A.at(nu).empty());
        }
    }
}

TEST_CASE("order properties of the torus series") {
    const auto om = golden_frequency();
    const auto f = lindstedt::default_thirring_f();
    const auto T = lindstedt::lindstedt_series(f, om, 8);
    SUBCASE("zero mean at every order") {
        for (const auto& hk : T.orders) CHECK(hk.at(HarmonicVector{0, 0}).empty());
    }
    SUBCASE("support growth |nu| <= k N") {
        for (int k = 1; k <= 8; ++k) {
            const auto& hk = T.orders[static_cast<size_t>(k - 1)];
            CHECK(hk.degree() <= k * f.degree());
        }
    }
    SUBCASE("reality of the parametrization") {
        for (const auto& hk : T.orders) CHECK(satisfies_reality(hk, 1e-13));
        num::Rng rng(3);
        for (int trial = 0; trial < 10; ++trial) {
            const double psi[2] = {rng.uniform(0.0, num::kTwoPi), rng.uniform(0.0, num::kTwoPi)};
            const auto v = fourier_eval(T.h_eps(1e-3), psi);
            CHECK(std::abs(v[0].imag()) <= 1e-13 * std::max(1.0, std::abs(v[0].real())));
        }
    }
}

TEST_CASE("torus residual") {
    const auto om = golden_frequency();
    const auto f = lindstedt::default_thirring_f();
    SUBCASE("eps = 0 gives zero exactly") {
        const auto T = lindstedt::lindstedt_series(f, om, 2);
        CHECK(lindstedt::torus_residual(T, f, 0.0) == 0.0);
    }
    SUBCASE("K = 4 doubling ratio near 2^5") {
        const auto T = lindstedt::lindstedt_series(f, om, 4);
        const double r1 = lindstedt::torus_residual(T, f, 1e-3);
        const double r2 = lindstedt::torus_residual(T, f, 2e-3);
        CHECK(r2 / r1 == doctest::Approx(32.0).epsilon(0.25));
    }
    SUBCASE("K = 2 doubling ratio near 2^3") {
        const auto T = lindstedt::lindstedt_series(f, om, 2);
        const double r1 = lindstedt::torus_residual(T, f, 1e-3);
        const double r2 = lindstedt::torus_residual(T, f, 2e-3);
        CHECK(r2 / r1 == doctest::Approx(8.0).epsilon(0.25));
    }
    SUBCASE("K = 8 residual at the double-precision floor") {
        const auto T = lindstedt::lindstedt_series(f, om, 8);
        CHECK(lindstedt::torus_residual(T, f, 1e-3) <= 1e-15);
    }
    SUBCASE("K = 8 doubling ratio near 2^9 at measurable eps") {
        const auto T = lindstedt::lindstedt_series(f, om, 8);
        const double r1 = lindstedt::torus_residual(T, f, 0.016);
        const double r2 = lindstedt::torus_residual(T, f, 0.032);
        CHECK(r2 / r1 == doctest::Approx(512.0).epsilon(0.25));
    }
}

TEST_CASE("torus flow verification") {
    const auto om = golden_frequency();
    const auto f = lindstedt::default_thirring_f();
    const double psi0[2] = {0.4, 1.9};
    SUBCASE("free rotators at eps = 0") {
        const auto T = lindstedt::lindstedt_series(f, om, 2);
        const auto dev = lindstedt::verify_torus_flow(T, f, 0.0, psi0, 10.0);
        CHECK(dev.max_angle_dev <= 1e-11);
        CHECK(dev.max_action_dev <= 1e-11);
    }
    SUBCASE("K = 8, eps = 1e-3: deviation below 1e-8 over t = 10") {
        const auto T = lindstedt::lindstedt_series(f, om, 8);
        const auto dev = lindstedt::verify_torus_flow(T, f, 1e-3, psi0, 10.0);
        CHECK(dev.max_angle_dev <= 1e-8);
        CHECK(dev.max_action_dev <= 1e-8);
    }
    SUBCASE("deviation grows at most linearly in t") {
        // eps large enough that the conjugacy defect dominates the integrator floor
        const auto T = lindstedt::lindstedt_series(f, om, 4);
        const double eps = 0.02;
        std::vector<double> ts = {2.5, 5.0, 10.0, 20.0};
        std::vector<double> devs;
        for (double t : ts)
            devs.push_back(lindstedt::verify_torus_flow(T, f, eps, psi0, t).max_angle_dev);
        // fit growth exponent by regression on the log-log points
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (size_t i = 0; i < ts.size(); ++i) {
            const double x = std::log(ts[i]), y = std::log(devs[i]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double n = static_cast<double>(ts.size());
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        CHECK(slope <= 1.2);
    }
}

TEST_CASE("birkhoff series") {
    const auto om = golden_frequency();
    SUBCASE("f = 0 is rejected as empty; a single harmonic gives the geometric structure") {
        const auto f = cosine_series(HarmonicVector{1, 1});
        const double eps = 0.05;
        const auto B = lindstedt::birkhoff_series(f, om, 12, eps);
        const double d = 1.0 + kPhi;
        // closed form -eps f / (i (d + eps nu2))
        const Complex closed = B.closed.at(HarmonicVector{1, 1});
        const Complex expect = -eps * 0.5 / (Complex(0.0, 1.0) * (d + eps));
        CHECK(std::abs(closed - expect) <= 1e-15);
        // geometric ratio between consecutive orders: -nu2/d per power of eps
        for (int k = 2; k <= 12; ++k) {
            const Complex a = B.orders[static_cast<size_t>(k - 1)].at(HarmonicVector{1, 1});
            const Complex b = B.orders[static_cast<size_t>(k - 2)].at(HarmonicVector{1, 1});
            CHECK(std::abs(a - b * (-1.0 / d)) <= 1e-15 * std::abs(a) + 1e-18);
        }
        // the truncated orders resum to the closed form within the tail
        Complex partial(0.0, 0.0);
        double ep = 1.0;
        for (int k = 1; k <= 12; ++k) {
            ep *= eps;
            partial += ep * B.orders[static_cast<size_t>(k - 1)].at(HarmonicVector{1, 1});
        }
        CHECK(std::abs(partial - closed) <= std::pow(eps / d, 13) + 1e-15 * std::abs(closed));
    }
    SUBCASE("conjugacy of the flow at eps = 0.05") {
        const auto f = cosine_series(HarmonicVector{1, 1});
        VectorXd A0(2), alpha0(2);
        A0 << 0.3, -0.2;
        alpha0 << 1.0, 2.2;
        const double err = lindstedt::birkhoff_conjugacy_error(f, om, 0.05, A0, alpha0, 10.0);
        CHECK(err <= 1e-8);
    }
    SUBCASE("resonant denominator raised") {
        auto f = cosine_series(HarmonicVector{1, 1});
        f += cosine_series(HarmonicVector{2, -1}, 0.3);
        // omega02 + eps = 2 omega01 makes (2,-1) resonant
        const double eps = 2.0 - kPhi;
        CHECK_THROWS_AS((void)lindstedt::birkhoff_series(f, om, 4, eps), ResonantDenominator);
    }
}

TEST_CASE("poincare obstruction scan") {
    VectorXd lo(2), hi(2);
    lo << 0.5, 0.5;
    hi << 1.5, 1.5;
    const auto omega_of_A = [](const VectorXd& A) { return A; };
    SUBCASE("f with only nu = (1,0) on a positive box: empty") {
        const auto f = cosine_series(HarmonicVector{1, 0});
        CHECK(lindstedt::poincare_obstruction_scan(f, omega_of_A, lo, hi, 3).empty());
    }
    SUBCASE("nu = (1,-1) detects the diagonal") {
        auto f = cosine_series(HarmonicVector{1, -1});
        const auto hits = lindstedt::poincare_obstruction_scan(f, omega_of_A, lo, hi, 3);
        // both +-(1,-1) harmonics witness the same resonance surface
        REQUIRE(hits.size() == 2);
        for (const auto& hit : hits)
            CHECK(hit.locus[0] == doctest::Approx(hit.locus[1]).epsilon(1e-9));
    }
    SUBCASE("empty f scans empty") {
        FourierSeries f(2);
        CHECK(lindstedt::poincare_obstruction_scan(f, omega_of_A, lo, hi, 3).empty());
    }
}

TEST_CASE("resonant lindstedt") {
    // r = 1 fast angle, s = 1 slow angle; f = cos(beta) + cos(psi + beta)
    auto f = cosine_series(HarmonicVector{0, 1});
    f += cosine_series(HarmonicVector{1, 1});
    const FrequencyVector om({1.0}, FrequencyVector::Diophantine{2.0, 1.0});
    VectorXd beta0(1);
    beta0 << M_PI;
    SUBCASE("order 1 matches the direct Fourier division") {
        const auto sol = lindstedt::resonant_lindstedt(f, 1, om, beta0);
        // f harmonic (1,1): phase at beta0 = pi gives -1/2; h1_(1) = i(-1/2)/1
        const auto h1 = sol.h1.at(HarmonicVector{1});
        REQUIRE(h1.size() == 1);
        CHECK(h1[0].imag() == doctest::Approx(-0.5).epsilon(1e-12));
        const auto k1 = sol.k1.at(HarmonicVector{1});
        CHECK(k1[0].imag() == doctest::Approx(-0.5).epsilon(1e-12));
        CHECK(sol.hessian(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("orders 1-2 satisfy the equations on a grid") {
        const auto sol = lindstedt::resonant_lindstedt(f, 1, om, beta0);
        CHECK(lindstedt::resonant_residual(sol, f, om, beta0) <= 1e-12);
    }
    SUBCASE("degenerate Hessian rejected") {
        // f independent of beta has a flat average
        auto fb = cosine_series(HarmonicVector{1, 0});
        CHECK_THROWS_AS((void)lindstedt::resonant_lindstedt(fb, 1, om, beta0), Error);
    }
    SUBCASE("non-stationary point rejected") {
        VectorXd beta_bad(1);
        beta_bad << 1.0;
        CHECK_THROWS_AS((void)lindstedt::resonant_lindstedt(f, 1, om, beta_bad), StationarityViolated);
    }
}

TEST_CASE("cluster matrix") {
    const auto om = golden_frequency();
    SUBCASE("order eps^1 vanishes for zero-mean f") {
        const auto f = lindstedt::default_thirring_f();
        const auto M = lindstedt::cluster_matrix(f, om, HarmonicVector{1, 0}, 1);
        CHECK(M.order_coeff[0].cwiseAbs().maxCoeff() <= 1e-14);
    }
    SUBCASE("two-node clusters against the hand-built sum") {
        auto f = cosine_series(HarmonicVector{1, 1});
        f += cosine_series(HarmonicVector{1, -1});
        const HarmonicVector nu{1, 0};
        const auto M = lindstedt::cluster_matrix(f, om, nu, 2);
        // hand-built: sum over mu in {+-(1,1), +-(1,-1)} of
        // mu (x) mu |mu|^2 f_mu^2 [1/(omega.(nu+mu))^2 - 1/(omega.mu)^2]
        // with the scale-0 filter C|omega.cur| > 1 on both lines
        Eigen::MatrixXcd hand = Eigen::MatrixXcd::Zero(2, 2);
        const double C = om.diophantine()->C;
        for (const auto mu : {HarmonicVector{1, 1}, HarmonicVector{-1, -1}, HarmonicVector{1, -1},
                              HarmonicVector{-1, 1}}) {
            const double fmu = 0.5;
            const double dmu = om.small_divisor(mu);
            const HarmonicVector through = nu + mu;
            const double dth = through.is_zero() ? 0.0 : om.small_divisor(through);
            const double mu2 = static_cast<double>(mu.dot(mu));
            Eigen::MatrixXcd dyad(2, 2);
            for (int а = 0; а < 2; ++а)
                for (int b = 0; b < 2; ++b) dyad(а, b) = static_cast<double>(mu[а]) * mu[b];
            if (!through.is_zero() && C * std::abs(dth) > 1.0)
                hand += dyad * mu2 * fmu * fmu / (dth * dth);
            if (C * std::abs(dmu) > 1.0) hand -= dyad * mu2 * fmu * fmu / (dmu * dmu);
        }
        CHECK((M.order_coeff[1] - hand).cwiseAbs().maxCoeff() <= 1e-13);
    }
    SUBCASE("bounded ratio over the smallest divisors") {
        const auto f = lindstedt::default_thirring_f();
        // the 20 smallest divisors with |nu| <= 30
        std::vector<std::pair<double, HarmonicVector>> divisors;
        for (int a = -30; a <= 30; ++a)
            for (int b = -30 + std::abs(a); b <= 30 - std::abs(a); ++b) {
                if (a == 0 && b == 0) continue;
                const HarmonicVector nu{a, b};
                divisors.emplace_back(std::abs(om.small_divisor(nu)), nu);
            }
        std::sort(divisors.begin(), divisors.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });
        double max_ratio = 0.0, min_ratio = 1e300;
        for (int i = 0; i < 20; ++i) {
            const auto& nu = divisors[static_cast<size_t>(i)].second;
            const auto M = lindstedt::cluster_matrix(f, om, nu, 2);
            const double d = om.small_divisor(nu);
            const double ratio = M.order_coeff[1].norm() / (d * d);  // at eps = 1
            max_ratio = std::max(max_ratio, ratio);
            min_ratio = std::min(min_ratio, ratio);
        }
        CHECK(max_ratio < 1e4);          // finite, no blow-up on small divisors
        CHECK(max_ratio / min_ratio < 50.0);  // and stable across them
    }
    SUBCASE("hermiticity of the order-2 matrix") {
        const auto f = lindstedt::default_thirring_f();
        const auto M = lindstedt::cluster_matrix(f, om, HarmonicVector{2, -1}, 2);
        CHECK((M.order_coeff[1] - M.order_coeff[1].adjoint()).cwiseAbs().maxCoeff() <= 1e-14);
    }
}

TEST_CASE("resummed propagator") {
    const auto om = golden_frequency();
    const HarmonicVector nu{1, 0};
    SUBCASE("M0 = 0 gives Id/(omega.nu)^2") {
        const Eigen::MatrixXcd M0 = Eigen::MatrixXcd::Zero(2, 2);
        const auto P = lindstedt::resummed_propagator(nu, M0, om);
        CHECK(std::abs(P(0, 0) - Complex(1.0, 0.0)) <= 1e-15);
        CHECK(std::abs(P(0, 1)) <= 1e-15);
    }
    SUBCASE("scalar sanity: geometric ratio") {
        const FrequencyVector om1({0.9}, FrequencyVector::Diophantine{2.0, 1.0});
        const HarmonicVector n1{1};
        Eigen::MatrixXcd M0(1, 1);
        M0(0, 0) = 0.3;
        const auto exact = lindstedt::resummed_propagator(n1, M0, om1);
        for (int K : {4, 8, 16}) {
            const auto part = lindstedt::propagator_partial_sum(n1, M0, om1, K);
            const double ratio = 0.3 / (0.9 * 0.9);
            CHECK((exact - part).cwiseAbs().maxCoeff() <= 2.0 * std::pow(ratio, K + 1) / (0.81 * (1 - ratio)));
        }
    }
    SUBCASE("thirring case: resummed vs 10-term sum to 1e-15") {
        const auto f = lindstedt::default_thirring_f();
        const auto M = lindstedt::cluster_matrix(f, om, nu, 2);
        const Eigen::MatrixXcd M0 = M.eval(1e-3);
        const auto exact = lindstedt::resummed_propagator(nu, M0, om);
        const auto part = lindstedt::propagator_partial_sum(nu, M0, om, 10);
        CHECK((exact - part).cwiseAbs().maxCoeff() <= 1e-15);
    }
    SUBCASE("divergence guard") {
        Eigen::MatrixXcd M0(2, 2);
        M0.setZero();
        M0(0, 0) = 2.0;  // bigger than (omega.nu)^2 = 1
        CHECK_THROWS_AS((void)lindstedt::resummed_propagator(nu, M0, om), ResummationDiverges);
    }
}

TEST_CASE("torus generating function") {
    const auto om = golden_frequency();
    const auto f = lindstedt::default_thirring_f();
    SUBCASE("eps = 0: everything vanishes") {
        const auto T = lindstedt::lindstedt_series(f, om, 2);
        const auto g = lindstedt::torus_generating_function(T, 0.0);
        CHECK(g.G.empty());
        CHECK(g.a.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("K = 8 golden torus at eps = 1e-3") {
        const auto T = lindstedt::lindstedt_series(f, om, 8);
        const auto g = lindstedt::torus_generating_function(T, 1e-3);
        CHECK(g.closedness_residual <= 1e-8);
        CHECK(g.grid_curl_residual <= 1e-8);
        CHECK(g.map_residual <= 1e-10);
    }
}

TEST_CASE("restricted tree values obey the census-driven bound") {
    // every non-repeating tree of order k <= 6 over the support of the default
    // perturbation has |Val| <= B^k / k! with B = C^2 max|f| N^2 2^{sum 8n 2^{-n/tau}}
    const auto om = golden_frequency();
    const auto f = lindstedt::default_thirring_f();
    const double C = om.diophantine()->C;
    const double tau = om.diophantine()->tau;
    const int N = f.degree();
    double exponent = 0.0;
    for (int n = 1; n < 60; ++n) exponent += 8.0 * n * std::pow(2.0, -n / tau);
    const double B = C * C * 0.5 * N * N * std::pow(2.0, exponent);
    std::vector<HarmonicVector> alphabet;
    for (const auto& [nu, c] : f.coefficients()) alphabet.push_back(nu);
    const std::vector<double> u = {1.0, 0.0};
    double kfact = 1.0;
    for (int k = 1; k <= 6; ++k) {
        kfact *= k;
        const double bound = std::pow(B, k) / kfact;
        trees::enumerate_trees(k, alphabet, [&](const trees::LabeledTree& t) {
            if (!trees::non_repeating(t)) return;
            const auto currents = trees::line_currents(t);
            for (const auto& cur : currents)
                if (cur.is_zero()) return;
            const Complex v = trees::lindstedt_tree_value(t, om, f, u);
            CHECK(std::abs(v) <= bound);
        });
    }
}

TEST_CASE("birkhoff with no perturbation") {
    FourierSeries f(2);
    const auto B = lindstedt::birkhoff_series(f, golden_frequency(), 6, 0.05);
    CHECK(B.closed.empty());
    for (const auto& o : B.orders) CHECK(o.empty());
}

TEST_CASE("deep recursion orders stay healthy") {
    // the recursion route carries orders well past the tree budget; support
    // bounds hold exactly and coefficient sums stay bounded for the golden
    // frequency (no divisor blow-up at these orders)
    const auto om = golden_frequency();
    const auto f = lindstedt::default_thirring_f();
    const auto T = lindstedt::lindstedt_series(f, om, 20);
    for (int k = 1; k <= 20; ++k) {
        const auto& hk = T.orders[static_cast<size_t>(k - 1)];
        CHECK(hk.degree() <= k * f.degree());
        CHECK(hk.abs_sum() < 10.0);
        CHECK(hk.at(HarmonicVector{0, 0}).empty());
    }
    CHECK(lindstedt::torus_residual(T, f, 1e-3, 12) <= 1e-15);
}

// Command-line front end: every module exposed as subcommands with
// reproducible, file-based JSON/CSV outputs.
#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "hamiltonia/acceptance.hpp"
#include "hamiltonia/canonical.hpp"
#include "hamiltonia/json_io.hpp"
#include "hamiltonia/kepler.hpp"
#include "hamiltonia/lindstedt.hpp"
#include "hamiltonia/numerics.hpp"
#include "hamiltonia/quadrature.hpp"
#include "hamiltonia/rigidbody.hpp"
#include "hamiltonia/trees.hpp"

namespace {

using hamiltonia::Complex;
using hamiltonia::FourierSeries;
using hamiltonia::HarmonicVector;
using hamiltonia::io::Json;
using Eigen::VectorXd;

struct RunConfig {
    std::string out_dir = ".";
    std::uint64_t seed = 20240810;
    double tolerance = 1e-10;
};

void add_common(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--out", cfg.out_dir, "output directory");
    cmd->add_option("--seed", cfg.seed, "seed for randomized sampling");
    cmd->add_option("--tolerance", cfg.tolerance, "tolerance override for verification checks");
}

void write_json(const RunConfig& cfg, const std::string& name, Json j) {
    j["seed"] = cfg.seed;
    std::filesystem::create_directories(cfg.out_dir);
    const auto path = std::filesystem::path(cfg.out_dir) / (name + ".json");
    std::ofstream os(path);
    os << j.dump(2) << "\n";
    std::cout << "wrote " << path.string() << "\n";
}

void write_csv(const RunConfig& cfg, const std::string& name, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::filesystem::create_directories(cfg.out_dir);
    const auto path = std::filesystem::path(cfg.out_dir) / (name + ".csv");
    std::ofstream os(path);
    for (size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << "\n";
    os << std::setprecision(17);
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << "\n";
    }
    // companion plot spec: data plus a rendering hint, no plotting dependency
    Json spec;
    spec["data"] = name + ".csv";
    spec["x"] = header.front();
    spec["y"] = std::vector<std::string>(header.begin() + 1, header.end());
    std::ofstream ps(std::filesystem::path(cfg.out_dir) / (name + ".plotspec.json"));
    ps << spec.dump(2) << "\n";
    std::cout << "wrote " << path.string() << "\n";
}

Json rational_series_json(const hamiltonia::kepler::ImagSeries& s) {
    Json arr = Json::array();
    for (const auto& [nu, q] : s) {
        Json rec;
        rec["nu"] = nu;
        rec["im_num"] = boost::multiprecision::numerator(q).str();
        rec["im_den"] = boost::multiprecision::denominator(q).str();
        rec["im"] = static_cast<double>(q);
        arr.push_back(std::move(rec));
    }
    return arr;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
}

hamiltonia::quadrature::Potential1D make_potential(const std::string& kind, double m, double param) {
    hamiltonia::quadrature::Potential1D V;
    V.m = m;
    if (kind == "harmonic") {
        V.V = [m, param](double q) { return 0.5 * m * param * param * q * q; };
        V.dV = [m, param](double q) { return m * param * param * q; };
    } else if (kind == "quartic") {
        V.V = [](double q) { return q * q * q * q; };
        V.dV = [](double q) { return 4.0 * q * q * q; };
    } else if (kind == "pendulum") {
        V.V = [m, param](double q) { return m * param * (1.0 - std::cos(q)); };
        V.dV = [m, param](double q) { return m * param * std::sin(q); };
        V.q_lo = -M_PI * 0.999;
        V.q_hi = M_PI * 0.999;
    } else {
        throw CLI::ValidationError("--potential", "unknown potential kind: " + kind);
    }
    return V;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hamiltonia: quadratures, perturbation series and invariant-torus verification"};
    app.require_subcommand(1);
    app.set_config("--config");
    RunConfig cfg;
    int exit_status = 0;

    // ----- kepler -----------------------------------------------------------
    auto* kep = app.add_subcommand("kepler", "two-body machinery");
    kep->require_subcommand(1);
    {
        auto* solve = kep->add_subcommand("solve", "solve the transcendental anomaly equation");
        static double e = 0.3, lam = 1.0;
        static std::string method = "newton";
        solve->add_option("--e", e, "eccentricity");
        solve->add_option("--lambda", lam, "mean anomaly");
        solve->add_option("--method", method, "newton or bisection");
        add_common(solve, cfg);
        solve->callback([&] {
            const auto xi = hamiltonia::kepler::solve_kepler(
                e, lam,
                method == "bisection" ? hamiltonia::kepler::SolveMethod::bisection
                                      : hamiltonia::kepler::SolveMethod::newton);
            Json j;
            j["e"] = e;
            j["lambda"] = lam;
            j["xi"] = xi;
            j["residual"] = xi - e * std::sin(xi) - lam;
            write_json(cfg, "kepler_solve", j);
        });

        auto* series = kep->add_subcommand("series", "eccentricity-series coefficients");
        static int order = 6;
        static bool check_trees = false;
        series->add_option("--order", order, "highest order");
        series->add_flag("--check-trees", check_trees, "cross-check the recursion against tree sums");
        add_common(series, cfg);
        series->callback([&] {
            Json j;
            Json orders = Json::array();
            bool ok = true;
            for (int k = 1; k <= order; ++k) {
                const auto rec = hamiltonia::kepler::series_recursion(k);
                Json entry;
                entry["order"] = k;
                entry["coefficients"] = rational_series_json(rec);
                if (check_trees) {
                    const bool match = rec == hamiltonia::kepler::series_trees(k);
                    entry["trees_match"] = match;
                    ok = ok && match;
                }
                orders.push_back(std::move(entry));
            }
            j["orders"] = std::move(orders);
            j["pass"] = ok;
            write_json(cfg, "kepler_series", j);
            if (!ok) exit_status = 1;
        });

        auto* radius = kep->add_subcommand("radius", "convergence radius of the series");
        add_common(radius, cfg);
        radius->callback([&] {
            Json j;
            const double rho = hamiltonia::kepler::laplace_radius();
            j["radius"] = rho;
            j["eta_at_one"] = hamiltonia::kepler::eta_parameter(1.0);
            j["eta_imag_axis_at_radius"] = hamiltonia::kepler::eta_parameter_imag_axis(rho);
            j["crude_bound"] = 0.25;
            j["refined_bound"] = 0.3678;
            write_json(cfg, "kepler_radius", j);
        });

        auto* anom = kep->add_subcommand("anomalies", "mean, eccentric and true anomalies");
        static double ea = 0.1, la = 1.0;
        anom->add_option("--e", ea, "eccentricity");
        anom->add_option("--lambda", la, "mean anomaly");
        add_common(anom, cfg);
        anom->callback([&] {
            const auto a = hamiltonia::kepler::anomalies(ea, la);
            Json j;
            j["lambda"] = a.lambda;
            j["xi"] = a.xi;
            j["theta"] = a.theta;
            j["rho_over_a"] = a.rho_over_a;
            write_json(cfg, "kepler_anomalies", j);
        });

        auto* fg = kep->add_subcommand("fg", "leading coefficients of the anomaly inversions");
        add_common(fg, cfg);
        fg->callback([&] {
            const auto cres = hamiltonia::kepler::fg_leading_coefficients();
            Json j;
            j["g_linear"] = cres.g_linear;
            j["g_xy"] = cres.g_xy;
            j["f_linear"] = cres.f_linear;
            j["f_xy"] = cres.f_xy;
            const bool ok = std::abs(cres.g_linear - 1.0) <= 1e-3 && std::abs(cres.g_xy - 1.0) <= 1e-2 &&
                            std::abs(cres.f_linear - 2.0) <= 1e-3 && std::abs(cres.f_xy - 2.5) <= 1e-2;
            j["pass"] = ok;
            write_json(cfg, "kepler_fg", j);
            if (!ok) exit_status = 1;
        });

        auto* r3bp = kep->add_subcommand("r3bp", "regularized rotating-frame Hamiltonian");
        static double L = 1.2, lam3 = 0.7, pp = 0.1, qq = -0.2, eps = 1e-3, gg = 1.0, RR = 5.0;
        r3bp->add_option("--L", L, "action");
        r3bp->add_option("--lambda", lam3, "angle");
        r3bp->add_option("--p", pp, "regularizing coordinate p");
        r3bp->add_option("--q", qq, "regularizing coordinate q");
        r3bp->add_option("--eps", eps, "mass ratio");
        r3bp->add_option("--g", gg, "attraction strength");
        r3bp->add_option("--R", RR, "primary separation");
        add_common(r3bp, cfg);
        r3bp->callback([&] {
            const hamiltonia::kepler::R3bpParams par{gg, RR, std::pow(RR, -1.5) * std::sqrt(gg), eps};
            const double H = hamiltonia::kepler::regularized_r3bp_hamiltonian(par, L, lam3, pp, qq);
            Json j;
            j["H"] = H;
            const double G = 0.5 * (pp * pp + qq * qq);
            if (G > 0.0) {
                const double gam = std::atan2(qq, pp);
                const double He =
                    hamiltonia::kepler::r3bp_hamiltonian_elements(par, L, lam3 + gam, L - G, -gam);
                j["H_elements_chart"] = He;
                j["chart_mismatch"] = H - He;
                if (std::abs(H - He) > cfg.tolerance * std::max(1.0, std::abs(He))) exit_status = 1;
            }
            write_json(cfg, "kepler_r3bp", j);
        });
    }

    // ----- quadrature -------------------------------------------------------
    auto* quad = app.add_subcommand("quadrature", "action-angle quadratures and integrable oracles");
    quad->require_subcommand(1);
    {
        auto* period = quad->add_subcommand("period", "oscillation period T(E)");
        static std::string pot = "quartic";
        static double m = 1.0, par = 1.0, E = 1.0;
        period->add_option("--potential", pot, "harmonic, quartic or pendulum");
        period->add_option("--m", m, "mass");
        period->add_option("--param", par, "frequency (harmonic) or strength (pendulum)");
        period->add_option("--E", E, "energy");
        add_common(period, cfg);
        period->callback([&] {
            const auto V = make_potential(pot, m, par);
            Json j;
            j["potential"] = pot;
            j["E"] = E;
            j["T"] = hamiltonia::quadrature::period(V, E);
            write_json(cfg, "quadrature_period", j);
        });

        auto* action = quad->add_subcommand("action", "action A(E) and the period identity");
        static std::string pot2 = "quartic";
        static double m2 = 1.0, par2 = 1.0, E2 = 1.0;
        action->add_option("--potential", pot2, "harmonic, quartic or pendulum");
        action->add_option("--m", m2, "mass");
        action->add_option("--param", par2, "potential parameter");
        action->add_option("--E", E2, "energy");
        add_common(action, cfg);
        action->callback([&] {
            const auto V = make_potential(pot2, m2, par2);
            const double A = hamiltonia::quadrature::action_of_energy(V, E2);
            const double T = hamiltonia::quadrature::period(V, E2);
            const double dAdE = hamiltonia::num::deriv_richardson(
                [&](double x) { return hamiltonia::quadrature::action_of_energy(V, x); }, E2, 1e-5);
            Json j;
            j["A"] = A;
            j["T"] = T;
            j["dA_dE"] = dAdE;
            j["identity_residual"] = dAdE - T / hamiltonia::num::kTwoPi;
            const bool ok = std::abs(dAdE - T / hamiltonia::num::kTwoPi) <= 1e-6;
            j["pass"] = ok;
            write_json(cfg, "quadrature_action", j);
            if (!ok) exit_status = 1;
        });

        auto* central = quad->add_subcommand("central", "central-motion frequencies and actions");
        static double G = 0.8, Ec = -0.5;
        static std::string cpot = "newton";
        central->add_option("--potential", cpot, "newton or harmonic");
        central->add_option("--G", G, "angular momentum");
        central->add_option("--E", Ec, "energy");
        add_common(central, cfg);
        central->callback([&] {
            hamiltonia::quadrature::CentralPotential C;
            if (cpot == "newton") {
                C.V = [](double r) { return -1.0 / r; };
                C.dV = [](double r) { return 1.0 / (r * r); };
                C.rho_ref = G * G;
            } else {
                C.V = [](double r) { return 0.5 * r * r; };
                C.dV = [](double r) { return r; };
                C.rho_ref = std::sqrt(std::abs(G));
            }
            C.G = G;
            const auto [w0, w1] = hamiltonia::quadrature::central_frequencies(C, Ec);
            const auto [A1, A2] = hamiltonia::quadrature::central_actions(C, Ec);
            Json j;
            j["omega0"] = w0;
            j["omega1"] = w1;
            j["ratio"] = w1 / w0;
            j["A1"] = A1;
            j["A2"] = A2;
            write_json(cfg, "quadrature_central", j);
        });

        auto* modes = quad->add_subcommand("modes", "normal modes of a harmonic chain");
        static std::string masses_text = "1,1";
        static std::string stiff_text = "2,-1;-1,2";
        modes->add_option("--masses", masses_text, "comma-separated masses");
        modes->add_option("--stiffness", stiff_text, "rows separated by ';'");
        add_common(modes, cfg);
        modes->callback([&] {
            const auto masses_v = parse_list(masses_text);
            const int n = static_cast<int>(masses_v.size());
            VectorXd masses(n);
            for (int i = 0; i < n; ++i) masses[i] = masses_v[static_cast<size_t>(i)];
            Eigen::MatrixXd stiff(n, n);
            std::stringstream ss(stiff_text);
            std::string row;
            int r = 0;
            while (std::getline(ss, row, ';')) {
                const auto vals = parse_list(row);
                for (int ccol = 0; ccol < n; ++ccol) stiff(r, ccol) = vals[static_cast<size_t>(ccol)];
                ++r;
            }
            const auto nm = hamiltonia::quadrature::normal_modes(masses, stiff);
            hamiltonia::num::Rng rng(cfg.seed);
            VectorXd x(2 * n);
            for (int i = 0; i < 2 * n; ++i) x[i] = rng.uniform(-1.0, 1.0);
            double Hval = 0.0;
            for (int i = 0; i < n; ++i) Hval += x[i] * x[i] / (2.0 * masses[i]);
            Hval += 0.5 * x.tail(n).dot(stiff * x.tail(n));
            Json j;
            j["omega"] = std::vector<double>(nm.omega.data(), nm.omega.data() + n);
            j["energy_identity_residual"] = nm.energy(x) - Hval;
            const bool ok = std::abs(nm.energy(x) - Hval) <= 1e-10 * std::max(1.0, std::abs(Hval));
            j["pass"] = ok;
            write_json(cfg, "quadrature_modes", j);
            if (!ok) exit_status = 1;
        });

        auto* lax = quad->add_subcommand("lax", "isospectral drift of a lattice flow");
        static std::string kind = "toda";
        static std::string p_text = "1,-1", q_text = "0,1";
        static double tfin = 10.0;
        lax->add_option("--kind", kind, "toda, calogero or sutherland");
        lax->add_option("--p", p_text, "initial momenta");
        lax->add_option("--q", q_text, "initial positions");
        lax->add_option("--t", tfin, "integration horizon");
        add_common(lax, cfg);
        lax->callback([&] {
            hamiltonia::quadrature::LatticeState s;
            s.kind = kind == "calogero"     ? hamiltonia::quadrature::LatticeKind::calogero
                     : kind == "sutherland" ? hamiltonia::quadrature::LatticeKind::sutherland
                                            : hamiltonia::quadrature::LatticeKind::toda;
            s.p = parse_list(p_text);
            s.q = parse_list(q_text);
            const auto rep = hamiltonia::quadrature::lax_eigenvalue_drift(s, tfin);
            // spectrum time series
            {
                std::vector<double> y;
                for (double v : s.p) y.push_back(v);
                for (double v : s.q) y.push_back(v);
                std::vector<std::vector<double>> rows;
                std::vector<double> times;
                for (int i = 0; i <= 100; ++i) times.push_back(tfin * i / 100.0);
                hamiltonia::num::integrate_ode_sampled(
                    [&](const std::vector<double>& yy, std::vector<double>& d, double) {
                        hamiltonia::quadrature::lattice_rhs(s, yy, d);
                    },
                    y, 0.0, times,
                    [&](double t, const std::vector<double>& yy) {
                        hamiltonia::quadrature::LatticeState st = s;
                        const int n = st.n();
                        for (int i = 0; i < n; ++i) {
                            st.p[static_cast<size_t>(i)] = yy[static_cast<size_t>(i)];
                            st.q[static_cast<size_t>(i)] = yy[static_cast<size_t>(n + i)];
                        }
                        const auto ev =
                            hamiltonia::num::hermitian_eigenvalues(hamiltonia::quadrature::lax_matrix(st));
                        std::vector<double> row = {t};
                        for (int i = 0; i < n; ++i) row.push_back(yy[static_cast<size_t>(i)]);
                        for (int i = 0; i < n; ++i) row.push_back(yy[static_cast<size_t>(n + i)]);
                        for (int i = 0; i < ev.size(); ++i) row.push_back(ev[i]);
                        rows.push_back(std::move(row));
                    });
                std::vector<std::string> header = {"t"};
                for (int i = 1; i <= s.n(); ++i) header.push_back("p" + std::to_string(i));
                for (int i = 1; i <= s.n(); ++i) header.push_back("q" + std::to_string(i));
                for (int i = 1; i <= s.n(); ++i) header.push_back("eig" + std::to_string(i));
                write_csv(cfg, "quadrature_lax", header, rows);
            }
            Json j;
            j["kind"] = kind;
            j["max_eigenvalue_drift"] = rep.max_eigenvalue_drift;
            j["max_entry_variation"] = rep.max_entry_variation;
            const bool ok = rep.max_eigenvalue_drift <= 1e-7;
            j["pass"] = ok;
            write_json(cfg, "quadrature_lax", j);
            if (!ok) exit_status = 1;
        });

        auto* mel = quad->add_subcommand("melnikov", "separatrix second-derivative matrix");
        static double a1 = 0.0, a2 = M_PI / 2.0, w1 = 0.0, w2 = 0.0, gpend = 1.0;
        mel->add_option("--alpha1", a1, "first phase");
        mel->add_option("--alpha2", a2, "second phase");
        mel->add_option("--omega1", w1, "first drive frequency");
        mel->add_option("--omega2", w2, "second drive frequency");
        mel->add_option("--g", gpend, "pendulum strength");
        add_common(mel, cfg);
        mel->callback([&] {
            const auto f = [](const VectorXd& a, double, double q) {
                return (std::cos(a[0]) + std::sin(a[1])) * (std::cos(q) - 1.0);
            };
            VectorXd alpha(2), omega(2);
            alpha << a1, a2;
            omega << w1, w2;
            const auto res = hamiltonia::quadrature::melnikov_matrix(f, alpha, omega, gpend);
            Json j;
            j["D"] = {{res.D(0, 0), res.D(0, 1)}, {res.D(1, 0), res.D(1, 1)}};
            j["abs_det"] = res.abs_det;
            if (w1 == 0.0 && w2 == 0.0 && gpend == 1.0)
                j["analytic_frozen_phase"] = 16.0 * std::abs(std::cos(a1) * std::sin(a2));
            write_json(cfg, "quadrature_melnikov", j);
        });
    }

    // ----- canonical --------------------------------------------------------
    auto* canon = app.add_subcommand("canonical", "canonicity verification");
    canon->require_subcommand(1);
    {
        auto* check = canon->add_subcommand("check", "symplectic residual of a catalog map");
        static std::string map_name = "polar";
        static int samples = 20;
        check->add_option("--map", map_name, "identity, polar, scaling or point");
        check->add_option("--samples", samples, "number of sample points");
        add_common(check, cfg);
        check->callback([&] {
            hamiltonia::canonical::PhaseMap map;
            bool expect_canonical = true;
            if (map_name == "identity") {
                map.ell = 2;
                map.forward = [](const VectorXd& x) { return x; };
            } else if (map_name == "polar") {
                map = hamiltonia::canonical::polar_map();
            } else if (map_name == "scaling") {
                map.ell = 1;
                map.forward = [](const VectorXd& x) { return VectorXd(2.0 * x); };
                expect_canonical = false;
            } else if (map_name == "point") {
                map = hamiltonia::canonical::point_transformation(
                    1, [](const VectorXd& q) { return VectorXd(q.array().sin() * 0.1 + q.array()); });
            } else {
                throw CLI::ValidationError("--map", "unknown map: " + map_name);
            }
            hamiltonia::num::Rng rng(cfg.seed);
            Json rows = Json::array();
            bool ok = true;
            for (int i = 0; i < samples; ++i) {
                VectorXd x(2 * map.ell);
                for (int k = 0; k < map.ell; ++k) {
                    x[k] = rng.uniform(-1.0, 1.0);
                    x[map.ell + k] = rng.uniform(0.4, 1.4);
                }
                const double res = hamiltonia::canonical::symplectic_residual(map, x);
                const bool point_ok = expect_canonical ? (res <= 1e-6) : (res > 1e-6);
                ok = ok && point_ok;
                Json rec;
                rec["point"] = std::vector<double>(x.data(), x.data() + x.size());
                rec["residual"] = res;
                rec["pass"] = point_ok;
                rows.push_back(std::move(rec));
            }
            Json j;
            j["map"] = map_name;
            j["expected_canonical"] = expect_canonical;
            j["reports"] = std::move(rows);
            j["pass"] = ok;
            write_json(cfg, "canonical_check", j);
            if (!ok) exit_status = 1;
        });

        auto* bracket = canon->add_subcommand("bracket", "Poisson-bracket identities at a point");
        static std::vector<double> at = {1.0, 2.0};
        bracket->add_option("--at", at, "phase point (p, q)");
        add_common(bracket, cfg);
        bracket->callback([&] {
            VectorXd x(2);
            x << at[0], at[1];
            hamiltonia::canonical::ObservableFn P{[](const VectorXd& v) { return v[0]; }, {}};
            hamiltonia::canonical::ObservableFn Q{[](const VectorXd& v) { return v[1]; }, {}};
            hamiltonia::canonical::ObservableFn F{[](const VectorXd& v) { return v[0] * v[0] * v[1]; },
                                                  [](const VectorXd& v) {
                                                      VectorXd g(2);
                                                      g << 2.0 * v[0] * v[1], v[0] * v[0];
                                                      return g;
                                                  }};
            hamiltonia::canonical::ObservableFn G{[](const VectorXd& v) { return v[0] * v[1] * v[1]; },
                                                  [](const VectorXd& v) {
                                                      VectorXd g(2);
                                                      g << v[1] * v[1], 2.0 * v[0] * v[1];
                                                      return g;
                                                  }};
            hamiltonia::canonical::ObservableFn S{[](const VectorXd& v) { return v[0] + v[1]; },
                                                  [](const VectorXd&) {
                                                      VectorXd g(2);
                                                      g << 1.0, 1.0;
                                                      return g;
                                                  }};
            Json j;
            j["pq_bracket"] = hamiltonia::canonical::poisson_bracket(P, Q, x);
            j["antisymmetry"] = hamiltonia::canonical::poisson_bracket(F, F, x);
            j["jacobi_residual"] = hamiltonia::canonical::jacobi_identity_residual(F, G, S, x);
            const bool ok = std::abs(j["pq_bracket"].get<double>() - 1.0) <= 1e-9 &&
                            std::abs(j["jacobi_residual"].get<double>()) <= 1e-8;
            j["pass"] = ok;
            write_json(cfg, "canonical_bracket", j);
            if (!ok) exit_status = 1;
        });

        auto* generate = canon->add_subcommand("generate", "map from a generating function");
        static std::string family = "phi";
        static int gsamples = 20;
        generate->add_option("--family", family, "phi, gamma, f or g");
        generate->add_option("--samples", gsamples, "number of verification points");
        add_common(generate, cfg);
        generate->callback([&] {
            hamiltonia::canonical::GeneratingFunction gen;
            gen.ell = 1;
            if (family == "phi") {
                gen.family = hamiltonia::canonical::GeneratingFamily::new_momentum_old_coordinate;
                gen.value = [](const VectorXd& a, const VectorXd& b) {
                    return a[0] * (b[0] + 0.1 * std::sin(b[0]));
                };
                gen.grad_a = [](const VectorXd&, const VectorXd& b) {
                    VectorXd g(1);
                    g << b[0] + 0.1 * std::sin(b[0]);
                    return g;
                };
                gen.grad_b = [](const VectorXd& a, const VectorXd& b) {
                    VectorXd g(1);
                    g << a[0] * (1.0 + 0.1 * std::cos(b[0]));
                    return g;
                };
            } else if (family == "gamma") {
                gen.family = hamiltonia::canonical::GeneratingFamily::old_coordinate_new_coordinate;
                gen.value = [](const VectorXd& a, const VectorXd& b) {
                    return a[0] * b[0] + 0.1 * std::cos(a[0]);
                };
                gen.grad_a = [](const VectorXd& a, const VectorXd& b) {
                    VectorXd g(1);
                    g << b[0] - 0.1 * std::sin(a[0]);
                    return g;
                };
                gen.grad_b = [](const VectorXd& a, const VectorXd&) {
                    VectorXd g(1);
                    g << a[0];
                    return g;
                };
            } else if (family == "f") {
                gen.family = hamiltonia::canonical::GeneratingFamily::old_momentum_new_coordinate;
                gen.value = [](const VectorXd& a, const VectorXd& b) {
                    return -a[0] * b[0] + 0.05 * std::sin(a[0] * b[0]);
                };
                gen.grad_a = [](const VectorXd& a, const VectorXd& b) {
                    VectorXd g(1);
                    g << -b[0] + 0.05 * b[0] * std::cos(a[0] * b[0]);
                    return g;
                };
                gen.grad_b = [](const VectorXd& a, const VectorXd& b) {
                    VectorXd g(1);
                    g << -a[0] + 0.05 * a[0] * std::cos(a[0] * b[0]);
                    return g;
                };
            } else if (family == "g") {
                gen.family = hamiltonia::canonical::GeneratingFamily::old_momentum_new_momentum;
                gen.value = [](const VectorXd& a, const VectorXd& b) {
                    return -a[0] * b[0] + 0.05 * a[0] * a[0] * a[0];
                };
                gen.grad_a = [](const VectorXd& a, const VectorXd& b) {
                    VectorXd g(1);
                    g << -b[0] + 0.15 * a[0] * a[0];
                    return g;
                };
                gen.grad_b = [](const VectorXd& a, const VectorXd&) {
                    VectorXd g(1);
                    g << -a[0];
                    return g;
                };
            } else {
                throw CLI::ValidationError("--family", "unknown family: " + family);
            }
            hamiltonia::canonical::DomainBox box;
            box.lo = VectorXd::Constant(1, -50.0);
            box.hi = VectorXd::Constant(1, 50.0);
            const auto map = hamiltonia::canonical::map_from_generating_function(gen, box);
            hamiltonia::num::Rng rng(cfg.seed);
            double worst = 0.0;
            for (int i = 0; i < gsamples; ++i) {
                VectorXd x(2);
                x << rng.uniform(0.4, 1.2), rng.uniform(0.4, 1.2);
                worst = std::max(worst, hamiltonia::canonical::symplectic_residual(map, x));
            }
            Json j;
            j["family"] = family;
            j["worst_residual"] = worst;
            const bool ok = worst <= 1e-6;
            j["pass"] = ok;
            write_json(cfg, "canonical_generate", j);
            if (!ok) exit_status = 1;
        });
    }

    // ----- rigidbody ----------------------------------------------------------
    auto* rb = app.add_subcommand("rigidbody", "free and heavy rigid body");
    rb->require_subcommand(1);
    {
        auto* euler = rb->add_subcommand("euler", "integrate the Euler equations");
        static std::string I_text = "1,2,3", w_text = "0.7,0.4,0.5";
        static double teu = 100.0;
        euler->add_option("--I", I_text, "principal inertia moments");
        euler->add_option("--omega0", w_text, "initial body angular velocity");
        euler->add_option("--t", teu, "horizon");
        add_common(euler, cfg);
        euler->callback([&] {
            const auto Iv = parse_list(I_text);
            const auto wv = parse_list(w_text);
            const hamiltonia::rigidbody::InertiaTriple I{Iv[0], Iv[1], Iv[2]};
            const auto run = hamiltonia::rigidbody::integrate_free_body(I, {wv[0], wv[1], wv[2]}, teu, 400);
            std::vector<std::vector<double>> rows;
            for (const auto& s : run.samples)
                rows.push_back({s.t, s.omega[0], s.omega[1], s.omega[2], s.quat[0], s.quat[1], s.quat[2],
                                s.quat[3], hamiltonia::rigidbody::kinetic_energy(I, s.omega),
                                hamiltonia::rigidbody::momentum_squared(I, s.omega)});
            write_csv(cfg, "rigidbody_euler",
                      {"t", "omega1", "omega2", "omega3", "qw", "qx", "qy", "qz", "K", "G2"}, rows);
            Json j;
            j["max_energy_drift"] = run.max_energy_drift;
            j["max_momentum_drift"] = run.max_momentum_drift;
            const bool ok = run.max_energy_drift <= 1e-10 && run.max_momentum_drift <= 1e-10;
            j["pass"] = ok;
            write_json(cfg, "rigidbody_euler", j);
            if (!ok) exit_status = 1;
        });

        auto* deprit = rb->add_subcommand("deprit-check", "canonicity of the angular-momentum chart");
        static int dsamples = 100;
        deprit->add_option("--samples", dsamples, "number of random nonsingular points");
        add_common(deprit, cfg);
        deprit->callback([&] {
            hamiltonia::num::Rng rng(cfg.seed);
            Json rows = Json::array();
            bool ok = true;
            for (int i = 0; i < dsamples; ++i) {
                const double G = rng.uniform(0.5, 2.0);
                const hamiltonia::rigidbody::DepritPoint d{
                    rng.uniform(-0.6, 0.6) * G, rng.uniform(0.2, 6.0), rng.uniform(-0.6, 0.6) * G,
                    rng.uniform(0.2, 6.0),      G,                     rng.uniform(0.2, 6.0)};
                const double res = hamiltonia::rigidbody::verify_deprit_canonicity(d);
                ok = ok && res <= 1e-6;
                Json rec;
                rec["residual"] = res;
                rec["pass"] = res <= 1e-6;
                rows.push_back(std::move(rec));
            }
            Json j;
            j["reports"] = std::move(rows);
            j["pass"] = ok;
            write_json(cfg, "rigidbody_deprit_check", j);
            if (!ok) exit_status = 1;
        });

        auto* quadr = rb->add_subcommand("quadratures", "periods from quadrature vs integration");
        static std::string I2_text = "1,2,3", w2_text = "0.7,0.4,0.5";
        quadr->add_option("--I", I2_text, "principal inertia moments");
        quadr->add_option("--omega0", w2_text, "initial body angular velocity");
        add_common(quadr, cfg);
        quadr->callback([&] {
            const auto Iv = parse_list(I2_text);
            const auto wv = parse_list(w2_text);
            const hamiltonia::rigidbody::InertiaTriple I{Iv[0], Iv[1], Iv[2]};
            const hamiltonia::rigidbody::Vec3 w0{wv[0], wv[1], wv[2]};
            double L, G, psi;
            hamiltonia::rigidbody::chart_from_omega(I, w0, L, G, psi);
            const double E = hamiltonia::rigidbody::kinetic_energy(I, w0);
            const auto quadp = hamiltonia::rigidbody::body_periods(I, E, G);
            const auto direct = hamiltonia::rigidbody::body_periods_from_integration(
                I, w0, std::min(60.0 * quadp.T_L, 400.0));
            Json j;
            j["librating"] = quadp.librating;
            j["T_L_quadrature"] = quadp.T_L;
            j["T_G_quadrature"] = quadp.T_G;
            j["T_L_integration"] = direct.T_L;
            j["T_G_integration"] = direct.T_G;
            const bool ok = std::abs(quadp.T_L - direct.T_L) <= 1e-4 * direct.T_L &&
                            std::abs(quadp.T_G - direct.T_G) <= 1e-4 * direct.T_G;
            j["pass"] = ok;
            write_json(cfg, "rigidbody_quadratures", j);
            if (!ok) exit_status = 1;
        });

        auto* gyro = rb->add_subcommand("gyroscope", "symmetric heavy top in the canonical chart");
        static double I1 = 1.5, I3 = 2.5, mm = 1.0, gr = 9.8, hh = 0.3, tg = 10.0;
        static std::string point_text = "0.3,0.5,0.5,1.1,1.0,0.4";
        gyro->add_option("--I", I1, "transverse inertia moment");
        gyro->add_option("--I3", I3, "axial inertia moment");
        gyro->add_option("--m", mm, "mass");
        gyro->add_option("--g", gr, "gravity");
        gyro->add_option("--height", hh, "center-of-mass distance");
        gyro->add_option("--point", point_text, "M3,gamma,L,psi,G,phi");
        gyro->add_option("--t", tg, "horizon");
        add_common(gyro, cfg);
        gyro->callback([&] {
            const auto pv = parse_list(point_text);
            const hamiltonia::rigidbody::Gyroscope gy{I1, I3, mm, gr, hh};
            const hamiltonia::rigidbody::DepritPoint d{pv[0], pv[1], pv[2], pv[3], pv[4], pv[5]};
            const auto run = hamiltonia::rigidbody::integrate_gyroscope(gy, d, tg);
            Json j;
            j["H0"] = hamiltonia::rigidbody::gyroscope_hamiltonian(gy, d);
            j["max_H_drift"] = run.max_H_drift;
            j["max_M3_drift"] = run.max_M3_drift;
            j["max_L_drift"] = run.max_L_drift;
            const bool ok = run.max_H_drift <= 1e-9 && run.max_M3_drift <= 1e-9;
            j["pass"] = ok;
            write_json(cfg, "rigidbody_gyroscope", j);
            if (!ok) exit_status = 1;
        });
    }

    // ----- lindstedt ----------------------------------------------------------
    auto* lind = app.add_subcommand("lindstedt", "perturbation series for invariant tori");
    lind->require_subcommand(1);
    {
        auto* torus = lind->add_subcommand("torus", "golden-frequency torus series");
        static int K = 8;
        static double eps = 1e-3, tflow = 10.0;
        static bool verify_flow = false;
        torus->add_option("--K", K, "truncation order");
        torus->add_option("--eps", eps, "coupling");
        torus->add_flag("--verify-flow", verify_flow, "also integrate and compare with the linear flow");
        torus->add_option("--t", tflow, "flow horizon");
        add_common(torus, cfg);
        torus->callback([&] {
            const auto om = hamiltonia::golden_frequency();
            const auto f = hamiltonia::lindstedt::default_thirring_f();
            const auto T = hamiltonia::lindstedt::lindstedt_series(f, om, K);
            Json j = hamiltonia::io::to_json(T);
            j["residual"] = hamiltonia::lindstedt::torus_residual(T, f, eps);
            // residual report over an eps sweep
            std::vector<std::vector<double>> rows;
            for (double factor : {0.25, 0.5, 1.0, 2.0, 4.0})
                rows.push_back({eps * factor, static_cast<double>(K),
                                hamiltonia::lindstedt::torus_residual(T, f, eps * factor)});
            write_csv(cfg, "lindstedt_torus_residuals", {"eps", "K", "residual"}, rows);
            if (verify_flow) {
                const double psi0[2] = {0.4, 1.9};
                const auto dev = hamiltonia::lindstedt::verify_torus_flow(T, f, eps, psi0, tflow);
                j["flow_angle_deviation"] = dev.max_angle_dev;
                j["flow_action_deviation"] = dev.max_action_dev;
            }
            write_json(cfg, "lindstedt_torus", j);
        });

        auto* birk = lind->add_subcommand("birkhoff", "isochronous generating series and conjugacy");
        static double beps = 0.05, bt = 10.0;
        birk->add_option("--eps", beps, "coupling");
        birk->add_option("--t", bt, "flow horizon");
        add_common(birk, cfg);
        birk->callback([&] {
            const auto om = hamiltonia::golden_frequency();
            const auto f = hamiltonia::cosine_series(HarmonicVector{1, 1});
            const auto B = hamiltonia::lindstedt::birkhoff_series(f, om, 10, beps);
            VectorXd A0(2), alpha0(2);
            A0 << 0.3, -0.2;
            alpha0 << 1.0, 2.2;
            const double err = hamiltonia::lindstedt::birkhoff_conjugacy_error(f, om, beps, A0, alpha0, bt);
            Json j;
            j["Phi_closed"] = hamiltonia::io::to_json(B.closed);
            j["conjugacy_error"] = err;
            const bool ok = err <= 1e-8;
            j["pass"] = ok;
            write_json(cfg, "lindstedt_birkhoff", j);
            if (!ok) exit_status = 1;
        });

        auto* reso = lind->add_subcommand("resonant", "resonant-torus series through order 2");
        add_common(reso, cfg);
        reso->callback([&] {
            auto f = hamiltonia::cosine_series(HarmonicVector{0, 1});
            f += hamiltonia::cosine_series(HarmonicVector{1, 1});
            const hamiltonia::FrequencyVector om({1.0}, hamiltonia::FrequencyVector::Diophantine{2.0, 1.0});
            VectorXd beta0(1);
            beta0 << M_PI;
            const auto sol = hamiltonia::lindstedt::resonant_lindstedt(f, 1, om, beta0);
            const double res = hamiltonia::lindstedt::resonant_residual(sol, f, om, beta0);
            Json j;
            j["c1"] = std::vector<double>(sol.c1.data(), sol.c1.data() + sol.c1.size());
            j["residual_orders_1_2"] = res;
            const bool ok = res <= 1e-12;
            j["pass"] = ok;
            write_json(cfg, "lindstedt_resonant", j);
            if (!ok) exit_status = 1;
        });

        auto* obst = lind->add_subcommand("obstruction", "first-order resonance witnesses in a box");
        add_common(obst, cfg);
        obst->callback([&] {
            auto f = hamiltonia::cosine_series(HarmonicVector{1, -1});
            f += hamiltonia::cosine_series(HarmonicVector{1, 0});
            VectorXd lo(2), hi(2);
            lo << 0.5, 0.5;
            hi << 1.5, 1.5;
            const auto hits = hamiltonia::lindstedt::poincare_obstruction_scan(
                f, [](const VectorXd& A) { return A; }, lo, hi, 3);
            Json arr = Json::array();
            for (const auto& h : hits) {
                Json rec;
                rec["nu"] = h.nu.entries();
                rec["locus"] = std::vector<double>(h.locus.data(), h.locus.data() + h.locus.size());
                arr.push_back(std::move(rec));
            }
            Json j;
            j["violations"] = std::move(arr);
            write_json(cfg, "lindstedt_obstruction", j);
        });

        auto* resum = lind->add_subcommand("resum", "scale-0 cluster matrix and propagator");
        static std::string nu_text = "1,0";
        static int kmax = 2;
        static double reps = 1e-3;
        resum->add_option("--nu", nu_text, "line current");
        resum->add_option("--kmax", kmax, "cluster order budget");
        resum->add_option("--eps", reps, "coupling");
        add_common(resum, cfg);
        resum->callback([&] {
            const auto om = hamiltonia::golden_frequency();
            const auto f = hamiltonia::lindstedt::default_thirring_f();
            const auto nv = parse_list(nu_text);
            const HarmonicVector nu{static_cast<int>(nv[0]), static_cast<int>(nv[1])};
            const auto M = hamiltonia::lindstedt::cluster_matrix(f, om, nu, kmax);
            const auto M0 = M.eval(reps);
            const auto exact = hamiltonia::lindstedt::resummed_propagator(nu, M0, om);
            const auto part = hamiltonia::lindstedt::propagator_partial_sum(nu, M0, om, 10);
            Json j;
            j["first_order_norm"] = M.order_coeff[0].cwiseAbs().maxCoeff();
            if (kmax >= 2) j["second_order_norm"] = M.order_coeff[1].cwiseAbs().maxCoeff();
            j["propagator_vs_partial_sum"] = (exact - part).cwiseAbs().maxCoeff();
            const bool ok = j["propagator_vs_partial_sum"].get<double>() <= 1e-14;
            j["pass"] = ok;
            write_json(cfg, "lindstedt_resum", j);
            if (!ok) exit_status = 1;
        });

        auto* genfun = lind->add_subcommand("genfun", "generating function of the truncated torus");
        static int gK = 8;
        static double geps = 1e-3;
        genfun->add_option("--K", gK, "truncation order");
        genfun->add_option("--eps", geps, "coupling");
        add_common(genfun, cfg);
        genfun->callback([&] {
            const auto om = hamiltonia::golden_frequency();
            const auto f = hamiltonia::lindstedt::default_thirring_f();
            const auto T = hamiltonia::lindstedt::lindstedt_series(f, om, gK);
            const auto g = hamiltonia::lindstedt::torus_generating_function(T, geps);
            Json j;
            j["a"] = std::vector<double>(g.a.data(), g.a.data() + g.a.size());
            j["closedness_residual"] = g.closedness_residual;
            j["grid_curl_residual"] = g.grid_curl_residual;
            j["map_residual"] = g.map_residual;
            j["G"] = hamiltonia::io::to_json(g.G);
            const bool ok = g.grid_curl_residual <= 1e-8;
            j["pass"] = ok;
            write_json(cfg, "lindstedt_genfun", j);
            if (!ok) exit_status = 1;
        });
    }

    // ----- trees --------------------------------------------------------------
    auto* tr = app.add_subcommand("trees", "labeled-tree enumeration and the divisor census");
    tr->require_subcommand(1);
    {
        auto* enumerate = tr->add_subcommand("enumerate", "canonical trees with multiplicities");
        static int order = 4;
        static std::string alphabet = "pm1";
        static bool dump = false;
        enumerate->add_option("--order", order, "tree order");
        enumerate->add_option("--alphabet", alphabet, "pm1, or ball:N for |nu| <= N in Z^2");
        enumerate->add_flag("--dump", dump, "include the tree encodings in the output");
        add_common(enumerate, cfg);
        enumerate->callback([&] {
            std::vector<HarmonicVector> letters;
            if (alphabet == "pm1") {
                letters = {HarmonicVector{1}, HarmonicVector{-1}};
            } else if (alphabet.rfind("ball:", 0) == 0) {
                letters = hamiltonia::trees::harmonic_ball(2, std::stoi(alphabet.substr(5)));
            } else {
                throw CLI::ValidationError("--alphabet", "unknown alphabet: " + alphabet);
            }
            long long canonical = 0, weighted = 0;
            Json dumped = Json::array();
            hamiltonia::trees::enumerate_trees(order, letters,
                                               [&](const hamiltonia::trees::LabeledTree& t) {
                                                   ++canonical;
                                                   weighted += t.multiplicity;
                                                   if (dump) dumped.push_back(hamiltonia::io::to_json(t));
                                               });
            Json j;
            j["order"] = order;
            j["canonical_trees"] = canonical;
            j["weighted_trees"] = weighted;
            long long cayley = 1;
            for (int i = 0; i < order - 1; ++i) cayley *= order;
            long long labelings = 1;
            for (int i = 0; i < order; ++i) labelings *= static_cast<long long>(letters.size());
            j["cayley_self_check"] = (weighted == cayley * labelings);
            if (dump) j["trees"] = std::move(dumped);
            write_json(cfg, "trees_enumerate", j);
            if (!j["cayley_self_check"].get<bool>()) exit_status = 1;
        });

        auto* census = tr->add_subcommand("census", "small-divisor census over restricted trees");
        static int kmax = 4, N = 2;
        census->add_option("--kmax", kmax, "highest tree order");
        census->add_option("--N", N, "node harmonic bound");
        add_common(census, cfg);
        census->callback([&] {
            const auto om = hamiltonia::golden_frequency();
            const double C = om.diophantine()->C;
            const double tau = om.diophantine()->tau;
            const auto letters = hamiltonia::trees::harmonic_ball(2, N);
            long long restricted = 0, violations = 0;
            for (int k = 1; k <= kmax; ++k) {
                hamiltonia::trees::enumerate_trees(
                    k, letters, [&](const hamiltonia::trees::LabeledTree& t) {
                        if (!hamiltonia::trees::non_repeating(t)) return;
                        ++restricted;
                        const auto currents = hamiltonia::trees::line_currents(t);
                        std::array<int, 16> counts{};
                        for (const auto& cur : currents) {
                            const double scaled = C * std::abs(cur.dot(om.omega()));
                            if (scaled > 1.0 || scaled == 0.0) continue;
                            const int n = static_cast<int>(std::ceil(-std::log2(scaled)));
                            if (n >= 1 && n < 16) ++counts[static_cast<size_t>(n)];
                        }
                        for (int n = 1; n < 16; ++n)
                            if (counts[static_cast<size_t>(n)] > 4.0 * N * k * std::pow(2.0, -n / tau))
                                ++violations;
                    });
            }
            Json j;
            j["kmax"] = kmax;
            j["N"] = N;
            j["restricted_trees"] = restricted;
            j["violations"] = violations;
            j["pass"] = violations == 0;
            write_json(cfg, "trees_census", j);
            if (violations != 0) exit_status = 1;
        });
    }

    // ----- suite ----------------------------------------------------------------
    auto* suite = app.add_subcommand("suite", "acceptance battery");
    {
        static std::string level = "fast";
        static std::string report_path;
        suite->add_option("level", level, "fast or full")->required();
        suite->add_option("--out", report_path, "write the machine-readable summary here");
        suite->callback([&] {
            if (level != "fast" && level != "full")
                throw CLI::ValidationError("level", "unknown suite: " + level);
            const auto lev = level == "full" ? hamiltonia::acceptance::Level::full
                                             : hamiltonia::acceptance::Level::fast;
            const auto report = hamiltonia::acceptance::run(lev, &std::cout);
            Json j;
            j["level"] = level;
            Json rows = Json::array();
            for (const auto& r : report.results) {
                Json rec;
                rec["id"] = r.id;
                rec["name"] = r.name;
                rec["pass"] = r.pass;
                rec["detail"] = r.detail;
                rec["seconds"] = r.seconds;
                rows.push_back(std::move(rec));
            }
            j["criteria"] = std::move(rows);
            j["all_pass"] = report.all_pass();
            if (!report_path.empty()) {
                std::ofstream os(report_path);
                os << j.dump(2) << "\n";
                std::cout << "wrote " << report_path << "\n";
            }
            if (!report.all_pass()) exit_status = 1;
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage errors exit 2, --help exits 0
    } catch (const hamiltonia::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return exit_status;
}

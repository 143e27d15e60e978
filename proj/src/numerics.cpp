#include "hamiltonia/numerics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>

namespace hamiltonia::num {

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    using boost::math::quadrature::gauss_kronrod;
    double error = 0.0;
    const double v = gauss_kronrod<double, 15>::integrate(f, a, b, 15, tol, &error);
    return v;
}

double find_root_bisect(const std::function<double(double)>& f, double a, double b, double xtol) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw PreconditionViolated("find_root_bisect: endpoints do not bracket a root");
    while (b - a > xtol) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;  // interval at floating point resolution
        const double fm = f(m);
        if (fm == 0.0) return m;
        if (fa * fm < 0.0) {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
    }
    return 0.5 * (a + b);
}

double find_root(const std::function<double(double)>& f, double a, double b) {
    boost::math::tools::eps_tolerance<double> tol(52);
    std::uintmax_t max_iter = 200;
    const auto r = boost::math::tools::toms748_solve(f, a, b, tol, max_iter);
    return 0.5 * (r.first + r.second);
}

namespace {
namespace odeint = boost::numeric::odeint;
using Stepper = odeint::runge_kutta_fehlberg78<std::vector<double>>;
}  // namespace

void integrate_ode(const OdeRhs& rhs, std::vector<double>& y, double t0, double t1, double tol) {
    if (t1 == t0) return;
    auto controlled = odeint::make_controlled<Stepper>(tol, tol);
    const double dt0 = (t1 - t0) / 100.0;
    odeint::integrate_adaptive(controlled, rhs, y, t0, t1, dt0);
}

void integrate_ode_sampled(const OdeRhs& rhs, std::vector<double>& y, double t0,
                           const std::vector<double>& times,
                           const std::function<void(double, const std::vector<double>&)>& observe,
                           double tol) {
    auto controlled = odeint::make_controlled<Stepper>(tol, tol);
    double t = t0;
    for (double ts : times) {
        if (ts < t) throw PreconditionViolated("integrate_ode_sampled: times must be ascending from t0");
        if (ts > t) odeint::integrate_adaptive(controlled, rhs, y, t, ts, (ts - t) / 16.0);
        t = ts;
        observe(t, y);
    }
}

void leapfrog(const std::function<std::vector<double>(const std::vector<double>&)>& force,
              const std::vector<double>& masses, std::vector<double>& p, std::vector<double>& q, double dt,
              long long steps,
              const std::function<void(long long, const std::vector<double>&, const std::vector<double>&)>&
                  observe) {
    const size_t n = q.size();
    std::vector<double> f = force(q);
    for (long long s = 0; s < steps; ++s) {
        for (size_t i = 0; i < n; ++i) p[i] += 0.5 * dt * f[i];
        for (size_t i = 0; i < n; ++i) q[i] += dt * p[i] / masses[i];
        f = force(q);
        for (size_t i = 0; i < n; ++i) p[i] += 0.5 * dt * f[i];
        if (observe) observe(s + 1, p, q);
    }
}

double deriv_richardson(const std::function<double(double)>& f, double x, double h) {
    const auto central = [&](double step) { return (f(x + step) - f(x - step)) / (2.0 * step); };
    const double d1 = central(h);
    const double d2 = central(h / 2.0);
    return (4.0 * d2 - d1) / 3.0;
}

MatrixXd jacobian_richardson(const std::function<VectorXd(const VectorXd&)>& F, const VectorXd& x, double h) {
    const auto column = [&](int j, double step) {
        VectorXd xp = x, xm = x;
        xp[j] += step;
        xm[j] -= step;
        return VectorXd(((F(xp) - F(xm)) / (2.0 * step)).eval());
    };
    const int n = static_cast<int>(x.size());
    const VectorXd probe = F(x);
    MatrixXd J(probe.size(), n);
    for (int j = 0; j < n; ++j) {
        const VectorXd c1 = column(j, h);
        const VectorXd c2 = column(j, h / 2.0);
        J.col(j) = (4.0 * c2 - c1) / 3.0;
    }
    return J;
}

VectorXd gradient_richardson(const std::function<double(const VectorXd&)>& f, const VectorXd& x, double h) {
    const int n = static_cast<int>(x.size());
    VectorXd g(n);
    for (int j = 0; j < n; ++j) {
        const auto fj = [&](double xj) {
            VectorXd y = x;
            y[j] = xj;
            return f(y);
        };
        g[j] = deriv_richardson(fj, x[j], h);
    }
    return g;
}

double second_partial_richardson(const std::function<double(const VectorXd&)>& f, const VectorXd& x, int i,
                                 int j, double h) {
    const auto second = [&](double step) {
        if (i == j) {
            VectorXd xp = x, xm = x;
            xp[i] += step;
            xm[i] -= step;
            return (f(xp) - 2.0 * f(x) + f(xm)) / (step * step);
        }
        VectorXd xpp = x, xpm = x, xmp = x, xmm = x;
        xpp[i] += step;
        xpp[j] += step;
        xpm[i] += step;
        xpm[j] -= step;
        xmp[i] -= step;
        xmp[j] += step;
        xmm[i] -= step;
        xmm[j] -= step;
        return (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * step * step);
    };
    const double d1 = second(h);
    const double d2 = second(h / 2.0);
    return (4.0 * d2 - d1) / 3.0;
}

VectorXd symmetric_eigenvalues(const MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(a, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error("symmetric_eigenvalues: eigensolver failed");
    return es.eigenvalues();
}

void symmetric_eigen(const MatrixXd& a, VectorXd& values, MatrixXd& vectors) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(a);
    if (es.info() != Eigen::Success) throw Error("symmetric_eigen: eigensolver failed");
    values = es.eigenvalues();
    vectors = es.eigenvectors();
}

VectorXd hermitian_eigenvalues(const MatrixXcd& a) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(a, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error("hermitian_eigenvalues: eigensolver failed");
    return es.eigenvalues();
}

}  // namespace hamiltonia::num

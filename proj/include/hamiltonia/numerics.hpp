#pragma once

#include <Eigen/Dense>
#include <functional>
#include <random>
#include <vector>

#include "hamiltonia/errors.hpp"

namespace hamiltonia::num {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Adaptive Gauss-Kronrod quadrature on a finite interval.
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12);

/// Bisection root find on a bracketing interval: f(a) f(b) <= 0.
double find_root_bisect(const std::function<double(double)>& f, double a, double b, double xtol = 1e-14);

/// Bracketed root refinement (TOMS 748); falls back to bisection accuracy.
double find_root(const std::function<double(double)>& f, double a, double b);

/// First-order ODE system dy/dt = rhs(y, t).
using OdeRhs = std::function<void(const std::vector<double>&, std::vector<double>&, double)>;

/// Integrates with an 8th-order embedded Runge-Kutta pair under step control.
/// `y` is advanced in place from t0 to t1.
void integrate_ode(const OdeRhs& rhs, std::vector<double>& y, double t0, double t1, double tol = 1e-13);

/// Same, sampling the solution at the given times (ascending, within [t0,t1]).
void integrate_ode_sampled(const OdeRhs& rhs, std::vector<double>& y, double t0,
                           const std::vector<double>& times,
                           const std::function<void(double, const std::vector<double>&)>& observe,
                           double tol = 1e-13);

/// Velocity-Verlet leapfrog for separable H = sum p^2/(2 m_i) + V(q);
/// `force(q)` returns -dV/dq. Fixed step, for long-time runs.
void leapfrog(const std::function<std::vector<double>(const std::vector<double>&)>& force,
              const std::vector<double>& masses, std::vector<double>& p, std::vector<double>& q,
              double dt, long long steps,
              const std::function<void(long long, const std::vector<double>&, const std::vector<double>&)>&
                  observe = {});

/// Central-difference derivative with one Richardson refinement step.
double deriv_richardson(const std::function<double(double)>& f, double x, double h = 1e-5);

/// Finite-difference Jacobian with Richardson refinement (steps h and h/2).
MatrixXd jacobian_richardson(const std::function<VectorXd(const VectorXd&)>& F, const VectorXd& x,
                             double h = 1e-5);

/// Gradient of a scalar function, Richardson refined.
VectorXd gradient_richardson(const std::function<double(const VectorXd&)>& f, const VectorXd& x,
                             double h = 1e-5);

/// Central second derivative d^2f/(dx_i dx_j) with Richardson refinement.
double second_partial_richardson(const std::function<double(const VectorXd&)>& f, const VectorXd& x, int i,
                                 int j, double h = 1e-2);

/// Eigenvalues of a real symmetric matrix, ascending.
VectorXd symmetric_eigenvalues(const MatrixXd& a);

/// Eigen-decomposition of a real symmetric matrix (ascending eigenvalues).
void symmetric_eigen(const MatrixXd& a, VectorXd& values, MatrixXd& vectors);

/// Eigenvalues of a complex Hermitian matrix, ascending real values.
VectorXd hermitian_eigenvalues(const MatrixXcd& a);

/// Deterministic RNG used for all sampled tests and CLI sampling.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : g_(seed) {}
    double uniform(double a, double b) {
        std::uniform_real_distribution<double> d(a, b);
        return d(g_);
    }
    std::mt19937_64& engine() { return g_; }

private:
    std::mt19937_64 g_;
};

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace hamiltonia::num

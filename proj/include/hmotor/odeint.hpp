// Fixed-step explicit integrators on Eigen state vectors.
#pragma once

#include <Eigen/Dense>

namespace hmotor {

enum class Integrator { rk4, euler };

/// Advances x(t) by one step of size dt. `rhs(t, x)` returns dx/dt.
template <typename Rhs>
Eigen::VectorXd integrate_step(Integrator method, const Rhs& rhs, double t,
                               const Eigen::VectorXd& x, double dt) {
    if (method == Integrator::euler) return x + dt * rhs(t, x);
    const double half = 0.5 * dt;
    const Eigen::VectorXd k1 = rhs(t, x);
    const Eigen::VectorXd k2 = rhs(t + half, x + half * k1);
    const Eigen::VectorXd k3 = rhs(t + half, x + half * k2);
    const Eigen::VectorXd k4 = rhs(t + dt, x + dt * k3);
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace hmotor

// Central finite differences. Used as the independent oracle for analytic
// derivatives and as the fallback for models without analytic gradients.
#pragma once

#include <algorithm>
#include <functional>

#include <Eigen/Dense>

namespace hmotor {

using ScalarField = std::function<double(const Eigen::VectorXd&)>;

/// Step used by numeric_gradient at point x: 1e-6 * max(1, |x|) times `scale`.
inline double fd_step(const Eigen::VectorXd& x, double scale = 1.0) {
    return 1e-6 * std::max(1.0, x.norm()) * scale;
}

/// Gradient of f at x by central differences.
inline Eigen::VectorXd numeric_gradient(const ScalarField& f, const Eigen::VectorXd& x,
                                        double scale = 1.0) {
    const double h = fd_step(x, scale);
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd xp = x;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        xp[k] = x[k] + h;
        const double fp = f(xp);
        xp[k] = x[k] - h;
        const double fm = f(xp);
        xp[k] = x[k];
        g[k] = (fp - fm) / (2.0 * h);
    }
    return g;
}

/// Jacobian of a vector field by central differences (rows = outputs).
inline Eigen::MatrixXd numeric_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
    double scale = 1.0) {
    const double h = fd_step(x, scale);
    Eigen::VectorXd xp = x;
    Eigen::MatrixXd jac;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        xp[k] = x[k] + h;
        const Eigen::VectorXd fp = f(xp);
        xp[k] = x[k] - h;
        const Eigen::VectorXd fm = f(xp);
        xp[k] = x[k];
        if (k == 0) jac.resize(fp.size(), x.size());
        jac.col(k) = (fp - fm) / (2.0 * h);
    }
    return jac;
}

}  // namespace hmotor

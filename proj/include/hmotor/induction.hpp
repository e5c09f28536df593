// Linear sinusoidal induction machine in the synchronous frame.
//
// Flux state (phi_s, phi_r), both dq. With D = L_s L_r - L_m^2 = L_s L_r sigma:
//   H = kappa rho^2/2 + [L_m |phi_s - phi_r|^2 + (L_r - L_m)|phi_s|^2 + (L_s - L_m)|phi_r|^2] / (2D)
#pragma once

#include <string_view>

#include "hmotor/energy.hpp"

namespace hmotor {

struct ImParams {
    double L_s = 0.0;  ///< stator inductance [H]
    double L_r = 0.0;  ///< rotor inductance [H]
    double L_m = 0.0;  ///< mutual inductance [H]
    double R_s = 0.0;
    double R_r = 0.0;
    double kinetic_coeff = 1.0;
    int n_p = 1;

    /// L_s L_r - L_m^2.
    [[nodiscard]] double determinant() const { return L_s * L_r - L_m * L_m; }
    /// Leakage factor, always derived from the inductances.
    [[nodiscard]] double sigma() const { return determinant() / (L_s * L_r); }

    void validate() const {
        require(L_s > 0.0, "L_s", "must be > 0");
        require(L_r > 0.0, "L_r", "must be > 0");
        require(L_m > 0.0, "L_m", "must be > 0");
        require(determinant() > 0.0, "L_m",
                "L_s*L_r - L_m^2 must be > 0 (current-flux map not invertible)");
        require(R_s >= 0.0, "R_s", "must be >= 0");
        require(R_r >= 0.0, "R_r", "must be >= 0");
        require(kinetic_coeff > 0.0, "kinetic_coeff", "must be > 0");
        require(n_p > 0, "n_p", "must be a positive integer");
    }
};

struct ImFlux {
    Eigen::Vector2d phi_s = Eigen::Vector2d::Zero();
    Eigen::Vector2d phi_r = Eigen::Vector2d::Zero();

    [[nodiscard]] Eigen::Vector4d packed() const {
        return (Eigen::Vector4d() << phi_s, phi_r).finished();
    }
    static ImFlux unpack(FluxRef v) { return {v.head<2>(), v.tail<2>()}; }
};

struct ImCurrents {
    Eigen::Vector2d i_s = Eigen::Vector2d::Zero();
    Eigen::Vector2d i_r = Eigen::Vector2d::Zero();
};

inline ImCurrents im_currents(const ImParams& p, const ImFlux& f) {
    const double inv_d = 1.0 / p.determinant();
    return {inv_d * (p.L_m * (f.phi_s - f.phi_r) + (p.L_r - p.L_m) * f.phi_s),
            inv_d * (p.L_m * (f.phi_r - f.phi_s) + (p.L_s - p.L_m) * f.phi_r)};
}

/// Inductance-matrix form: phi_s = L_s i_s + L_m i_r, phi_r = L_m i_s + L_r i_r.
inline ImFlux invert_currents(const ImParams& p, const Eigen::Vector2d& i_s,
                              const Eigen::Vector2d& i_r) {
    return {p.L_s * i_s + p.L_m * i_r, p.L_m * i_s + p.L_r * i_r};
}

/// Electromagnetic torque -n_p i_r^T J phi_r (equivalently n_p i_s^T J phi_s).
inline double im_torque(const ImParams& p, const ImFlux& f) {
    const ImCurrents i = im_currents(p, f);
    return -p.n_p * i.i_r.dot(frames::j2() * f.phi_r);
}

class InductionMachine final : public EnergyModel {
public:
    explicit InductionMachine(ImParams p) : p_(p) { p_.validate(); }

    [[nodiscard]] const ImParams& params() const noexcept { return p_; }

    int flux_dim() const override { return 4; }
    int pole_pairs() const override { return p_.n_p; }
    std::string_view kind() const override { return "linear_im"; }
    double stator_resistance() const override { return p_.R_s; }
    double rotor_resistance() const override { return p_.R_r; }

    double evaluate(double, double rho, FluxRef phi) const override {
        const Eigen::Vector2d s = phi.head<2>();
        const Eigen::Vector2d r = phi.tail<2>();
        const double magnetic = p_.L_m * (s - r).squaredNorm() + (p_.L_r - p_.L_m) * s.squaredNorm() +
                                (p_.L_s - p_.L_m) * r.squaredNorm();
        return 0.5 * p_.kinetic_coeff * rho * rho + magnetic / (2.0 * p_.determinant());
    }
    Eigen::VectorXd d_flux(double, double, FluxRef phi) const override {
        const ImCurrents i = im_currents(p_, ImFlux::unpack(phi));
        return (Eigen::Vector4d() << i.i_s, i.i_r).finished();
    }
    double d_theta(double, double, FluxRef) const override { return 0.0; }
    double d_rho(double, double rho, FluxRef) const override { return p_.kinetic_coeff * rho; }
    std::optional<Eigen::MatrixXd> flux_hessian(double, double, FluxRef) const override {
        const double inv_d = 1.0 / p_.determinant();
        const Eigen::Matrix2d eye = Eigen::Matrix2d::Identity();
        Eigen::Matrix4d h;
        h << p_.L_r * eye, -p_.L_m * eye,
             -p_.L_m * eye, p_.L_s * eye;
        return Eigen::MatrixXd(inv_d * h);
    }

private:
    ImParams p_;
};

inline InductionMachine im_energy(const ImParams& p) { return InductionMachine(p); }

}  // namespace hmotor

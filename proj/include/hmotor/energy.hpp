// Energy-function (Hamiltonian) machine models.
//
// A machine is fully described by one scalar H(theta, rho, phi):
//   currents  i     = dH/dphi
//   speed     omega = dH/drho
//   torque    T_e   = -n_p dH/dtheta + n_p i^T J phi          (PMSM family)
// Everything downstream (dynamics, validation, identification) only talks to
// the EnergyModel interface.
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "hmotor/errors.hpp"
#include "hmotor/frames.hpp"
#include "hmotor/numeric.hpp"

namespace hmotor {

using FluxRef = Eigen::Ref<const Eigen::VectorXd>;

/// Contract every machine model implements. Instances are immutable.
class EnergyModel {
public:
    virtual ~EnergyModel() = default;

    /// 2 for the PMSM family (dq), 4 for the induction machine (stator dq, rotor dq).
    [[nodiscard]] virtual int flux_dim() const = 0;
    [[nodiscard]] virtual int pole_pairs() const = 0;
    [[nodiscard]] virtual std::string_view kind() const = 0;

    [[nodiscard]] virtual double evaluate(double theta, double rho, FluxRef phi) const = 0;
    [[nodiscard]] virtual Eigen::VectorXd d_flux(double theta, double rho, FluxRef phi) const = 0;
    [[nodiscard]] virtual double d_theta(double theta, double rho, FluxRef phi) const = 0;
    [[nodiscard]] virtual double d_rho(double theta, double rho, FluxRef phi) const = 0;

    /// Winding resistances used by the dynamics; energy evaluation never reads them.
    [[nodiscard]] virtual double stator_resistance() const { return 0.0; }
    [[nodiscard]] virtual double rotor_resistance() const { return 0.0; }

    /// Analytic d^2H/dphi^2 when the model has one.
    [[nodiscard]] virtual std::optional<Eigen::MatrixXd> flux_hessian(double /*theta*/,
                                                                      double /*rho*/,
                                                                      FluxRef /*phi*/) const {
        return std::nullopt;
    }
};

using ModelPtr = std::shared_ptr<const EnergyModel>;

/// Integrator state. phi is (phi_d, phi_q) or (phi_sd, phi_sq, phi_rd, phi_rq).
struct MachineState {
    double theta = 0.0;
    double rho = 0.0;
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(2);
};

// -----------------------------------------------------------------------------
// Kinetic coefficient
// -----------------------------------------------------------------------------

/// kappa in the kinetic term kappa * rho^2 / 2, so that omega = kappa * rho.
///
/// `standard` (n_p^2 / J) reduces n_p d(rho)/dt = T_e - T_l to J dOmega/dt = T_e - T_l
/// for the mechanical speed Omega = omega / n_p. `literal` (1 / (J n_p^2)) keeps the
/// coefficient exactly as it is often written next to rho^2 / 2.
enum class KineticConvention { standard, literal };

inline double kinetic_coeff(double inertia, int n_p,
                            KineticConvention conv = KineticConvention::standard) {
    require(inertia > 0.0, "inertia", "must be > 0");
    require(n_p > 0, "n_p", "must be a positive integer");
    const double np = n_p;
    return conv == KineticConvention::standard ? np * np / inertia : 1.0 / (inertia * np * np);
}

// -----------------------------------------------------------------------------
// Derived quantities
// -----------------------------------------------------------------------------

inline void check_dim(const EnergyModel& m, FluxRef phi) {
    if (phi.size() != m.flux_dim()) {
        throw DimensionError("flux has dimension " + std::to_string(phi.size()) + ", model '" +
                             std::string(m.kind()) + "' expects " +
                             std::to_string(m.flux_dim()));
    }
}

inline Eigen::VectorXd currents(const EnergyModel& m, double theta, double rho, FluxRef phi) {
    check_dim(m, phi);
    return m.d_flux(theta, rho, phi);
}

inline double speed(const EnergyModel& m, double theta, double rho, FluxRef phi) {
    return m.d_rho(theta, rho, phi);
}

/// Torque from the already-computed current vector (saves one gradient evaluation).
///
/// For 4D models the coupling acts on the rotor pair: T = -n_p dH/dtheta - n_p i_r^T J phi_r,
/// which for rotation-invariant energies equals n_p i_s^T J phi_s.
inline double torque_from_currents(const EnergyModel& m, double theta, double rho, FluxRef phi,
                                   const Eigen::VectorXd& i) {
    const double np = m.pole_pairs();
    const frames::Mat2 jm = frames::j2();
    const double dth = m.d_theta(theta, rho, phi);
    if (phi.size() == 2) {
        return -np * dth + np * i.head<2>().dot(jm * phi.head<2>());
    }
    if (phi.size() == 4) {
        return -np * dth - np * i.tail<2>().dot(jm * phi.tail<2>());
    }
    throw DimensionError("torque: unsupported flux dimension " + std::to_string(phi.size()));
}

inline double torque(const EnergyModel& m, double theta, double rho, FluxRef phi) {
    check_dim(m, phi);
    return torque_from_currents(m, theta, rho, phi, m.d_flux(theta, rho, phi));
}

/// Gradient of H packed as (dH/dtheta, dH/drho, dH/dphi...) by finite differences.
inline Eigen::VectorXd numeric_state_gradient(const EnergyModel& m, double theta, double rho,
                                              FluxRef phi) {
    Eigen::VectorXd x(2 + phi.size());
    x << theta, rho, phi;
    const auto f = [&m](const Eigen::VectorXd& z) {
        return m.evaluate(z[0], z[1], z.tail(z.size() - 2));
    };
    return numeric_gradient(f, x);
}

// -----------------------------------------------------------------------------
// Linear sinusoidal PMSM and SynRM
// -----------------------------------------------------------------------------

struct LinearPmsmParams {
    double L_d = 0.0;            ///< d-axis inductance [H]
    double L_q = 0.0;            ///< q-axis inductance [H]
    double phi_M = 0.0;          ///< permanent-magnet flux [Wb]
    double kinetic_coeff = 1.0;  ///< kappa, omega = kappa * rho
    int n_p = 1;                 ///< pole pairs
    double R_s = 0.0;            ///< stator resistance [Ohm], used by dynamics only

    void validate() const {
        require(L_d > 0.0, "L_d", "must be > 0");
        require(L_q > 0.0, "L_q", "must be > 0");
        require(phi_M >= 0.0, "phi_M", "must be >= 0");
        require(kinetic_coeff > 0.0, "kinetic_coeff", "must be > 0");
        require(n_p > 0, "n_p", "must be a positive integer");
        require(R_s >= 0.0, "R_s", "must be >= 0");
    }
};

/// H = kappa rho^2/2 + (phi_d - phi_M)^2 / (2 L_d) + phi_q^2 / (2 L_q).
class LinearPmsm final : public EnergyModel {
public:
    explicit LinearPmsm(LinearPmsmParams p, bool synrm = false) : p_(p), synrm_(synrm) {
        p_.validate();
    }

    [[nodiscard]] const LinearPmsmParams& params() const noexcept { return p_; }

    int flux_dim() const override { return 2; }
    int pole_pairs() const override { return p_.n_p; }
    std::string_view kind() const override { return synrm_ ? "synrm" : "linear_pmsm"; }
    double stator_resistance() const override { return p_.R_s; }

    double evaluate(double, double rho, FluxRef phi) const override {
        const double x = phi[0] - p_.phi_M;
        const double y = phi[1];
        return 0.5 * p_.kinetic_coeff * rho * rho + 0.5 * x * x / p_.L_d + 0.5 * y * y / p_.L_q;
    }
    Eigen::VectorXd d_flux(double, double, FluxRef phi) const override {
        return Eigen::Vector2d((phi[0] - p_.phi_M) / p_.L_d, phi[1] / p_.L_q);
    }
    double d_theta(double, double, FluxRef) const override { return 0.0; }
    double d_rho(double, double rho, FluxRef) const override { return p_.kinetic_coeff * rho; }
    std::optional<Eigen::MatrixXd> flux_hessian(double, double, FluxRef) const override {
        return Eigen::Matrix2d(Eigen::Vector2d(1.0 / p_.L_d, 1.0 / p_.L_q).asDiagonal());
    }

private:
    LinearPmsmParams p_;
    bool synrm_;
};

inline LinearPmsm linear_energy(const LinearPmsmParams& p) { return LinearPmsm(p); }

/// Reluctance machine: the linear model with no magnet, even in phi.
inline LinearPmsm synrm_energy(const LinearPmsmParams& p) {
    require(p.phi_M == 0.0, "phi_M", "must be 0 for a synchronous reluctance machine");
    return LinearPmsm(p, true);
}

/// n_p (1/L_q - 1/L_d) phi_d phi_q + (n_p / L_d) phi_q phi_M.
inline double linear_torque_closed_form(const LinearPmsmParams& p, double phi_d, double phi_q) {
    const double np = p.n_p;
    return np * (1.0 / p.L_q - 1.0 / p.L_d) * phi_d * phi_q + np / p.L_d * phi_q * p.phi_M;
}

}  // namespace hmotor

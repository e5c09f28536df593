// Time-domain simulation of energy-based machine models.
//
// PMSM family, rotating (dq) frame:
//   dtheta/dt = omega = dH/drho
//   n_p drho/dt = T_e - T_l
//   dphi/dt = u - R_s i - omega J phi
// Stationary (alpha-beta) frame: same with the omega J phi term absent and
// T_e = -n_p dH/dtheta of the alpha-beta energy.
// Induction machine, synchronous frame at constant omega_s:
//   dphi_s/dt = u_s - R_s i_s - omega_s J phi_s
//   dphi_r/dt = -R_r i_r - (omega_s - omega) J phi_r
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "hmotor/energy.hpp"
#include "hmotor/induction.hpp"
#include "hmotor/odeint.hpp"

namespace hmotor {

// -----------------------------------------------------------------------------
// Sources
// -----------------------------------------------------------------------------

struct ConstantVoltage {
    Eigen::Vector2d u_dq = Eigen::Vector2d::Zero();
};

/// u_dq(t) = offset + amplitude * sin(2 pi f t + phase), componentwise.
struct DqSinusoid {
    Eigen::Vector2d offset = Eigen::Vector2d::Zero();
    Eigen::Vector2d amplitude = Eigen::Vector2d::Zero();
    double frequency = 0.0;  ///< [Hz]
    double phase = 0.0;      ///< [rad]
};

/// Balanced physical supply u_a = A cos(2 pi f t + phase), b and c lagging by 2pi/3.
struct ThreePhaseSinusoid {
    double amplitude = 0.0;  ///< peak phase voltage [V]
    double frequency = 0.0;  ///< [Hz]
    double phase = 0.0;
};

/// Zero-order hold on dq voltages; value i applies on [t_i, t_{i+1}).
struct VoltageTable {
    std::vector<double> t;
    std::vector<Eigen::Vector2d> u_dq;
};

using VoltageSource = std::variant<ConstantVoltage, DqSinusoid, ThreePhaseSinusoid, VoltageTable>;

struct ConstantLoad {
    double torque = 0.0;
};

/// T_l = torque + slope * omega, omega being the electrical speed.
struct LinearLoad {
    double torque = 0.0;
    double slope = 0.0;
};

struct LoadTable {
    std::vector<double> t;
    std::vector<double> torque;
};

using LoadSource = std::variant<ConstantLoad, LinearLoad, LoadTable>;

struct Drive {
    VoltageSource voltage = ConstantVoltage{};
    LoadSource load = ConstantLoad{};
};

/// Frame the simulated flux is expressed in.
enum class Frame { rotating, stationary };

namespace detail {
inline std::size_t hold_index(const std::vector<double>& t, double now) {
    const auto it = std::upper_bound(t.begin(), t.end(), now);
    return it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
}
}  // namespace detail

inline frames::PhaseTriple three_phase_voltage(const ThreePhaseSinusoid& s, double t) {
    constexpr double third = 2.0 * std::numbers::pi / 3.0;
    const double w = 2.0 * std::numbers::pi * s.frequency * t + s.phase;
    return {s.amplitude * std::cos(w), s.amplitude * std::cos(w - third),
            s.amplitude * std::cos(w - 2.0 * third)};
}

/// Voltage at time t in the simulation frame. `angle` is the frame angle
/// (rotor angle for a PMSM, synchronous angle for an induction machine).
inline Eigen::Vector2d voltage_at(const VoltageSource& src, double t, double angle, Frame frame) {
    const auto dq_in_frame = [&](const Eigen::Vector2d& dq) -> Eigen::Vector2d {
        return frame == Frame::rotating ? dq : frames::inv_park2(dq, angle);
    };
    return std::visit(
        [&](const auto& s) -> Eigen::Vector2d {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, ConstantVoltage>) {
                return dq_in_frame(s.u_dq);
            } else if constexpr (std::is_same_v<S, DqSinusoid>) {
                const double w = std::sin(2.0 * std::numbers::pi * s.frequency * t + s.phase);
                return dq_in_frame(s.offset + s.amplitude * w);
            } else if constexpr (std::is_same_v<S, ThreePhaseSinusoid>) {
                const frames::OrthTriple ab = frames::clarke(three_phase_voltage(s, t));
                const Eigen::Vector2d v(ab.alpha, ab.beta);
                return frame == Frame::rotating ? frames::park2(v, angle) : v;
            } else {
                if (s.t.empty()) return Eigen::Vector2d::Zero();
                return dq_in_frame(s.u_dq[detail::hold_index(s.t, t)]);
            }
        },
        src);
}

inline double load_at(const LoadSource& src, double t, double omega) {
    return std::visit(
        [&](const auto& s) -> double {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, ConstantLoad>) {
                return s.torque;
            } else if constexpr (std::is_same_v<S, LinearLoad>) {
                return s.torque + s.slope * omega;
            } else {
                if (s.t.empty()) return 0.0;
                return s.torque[detail::hold_index(s.t, t)];
            }
        },
        src);
}

inline void validate_drive(const Drive& d) {
    if (const auto* tab = std::get_if<VoltageTable>(&d.voltage)) {
        require(tab->t.size() == tab->u_dq.size(), "drive.voltage", "table columns differ in length");
        require(std::is_sorted(tab->t.begin(), tab->t.end()), "drive.voltage.t", "must be increasing");
    }
    if (const auto* tab = std::get_if<LoadTable>(&d.load)) {
        require(tab->t.size() == tab->torque.size(), "drive.load", "table columns differ in length");
        require(std::is_sorted(tab->t.begin(), tab->t.end()), "drive.load.t", "must be increasing");
    }
}

// -----------------------------------------------------------------------------
// Configuration and output
// -----------------------------------------------------------------------------

struct SimConfig {
    double dt = 1e-5;
    double t_end = 0.0;
    Integrator integrator = Integrator::rk4;
    int record_stride = 1;
    double omega_s = 0.0;  ///< synchronous frame speed, induction machine only

    void validate() const {
        require(dt > 0.0 && std::isfinite(dt), "sim.dt", "must be > 0");
        require(t_end >= dt, "sim.t_end", "must be >= dt");
        require(record_stride > 0, "sim.record_stride", "must be a positive integer");
        require(std::isfinite(omega_s), "sim.omega_s", "must be finite");
    }
    [[nodiscard]] long steps() const {
        return static_cast<long>(std::ceil(t_end / dt - 1e-9));
    }
};

struct Record {
    double t = 0.0;
    double theta = 0.0;
    double rho = 0.0;
    double omega = 0.0;
    Eigen::Vector2d phi = Eigen::Vector2d::Zero();  ///< stator flux
    Eigen::Vector2d i = Eigen::Vector2d::Zero();    ///< stator current
    double torque = 0.0;
    Eigen::Vector2d u = Eigen::Vector2d::Zero();
    double load = 0.0;
    // Induction machine only.
    Eigen::Vector2d phi_r = Eigen::Vector2d::Zero();
    Eigen::Vector2d i_r = Eigen::Vector2d::Zero();
    double theta_s = 0.0;
};

struct Trajectory {
    bool induction = false;
    Frame frame = Frame::rotating;
    std::vector<Record> records;
};

// -----------------------------------------------------------------------------
// PMSM family
// -----------------------------------------------------------------------------

namespace detail {

/// State layout: (theta, rho, phi_d, phi_q).
struct PmsmRhs {
    const EnergyModel& m;
    const std::function<Eigen::Vector2d(double, double)>& voltage;  // (t, theta)
    const std::function<double(double, double)>& load;              // (t, omega)
    Frame frame;

    Eigen::VectorXd operator()(double t, const Eigen::VectorXd& x) const {
        const double theta = x[0];
        const double rho = x[1];
        const Eigen::Vector2d phi = x.segment<2>(2);
        const Eigen::Vector2d i = m.d_flux(theta, rho, phi);
        const double omega = m.d_rho(theta, rho, phi);
        const double np = m.pole_pairs();
        const double te = frame == Frame::rotating ? torque_from_currents(m, theta, rho, phi, i)
                                                   : -np * m.d_theta(theta, rho, phi);
        Eigen::Vector2d dphi = voltage(t, theta) - m.stator_resistance() * i;
        if (frame == Frame::rotating) dphi -= omega * (frames::j2() * phi);
        Eigen::VectorXd dx(4);
        dx << omega, (te - load(t, omega)) / np, dphi;
        return dx;
    }
};

inline void check_finite(const Eigen::VectorXd& x, double t) {
    if (!x.allFinite()) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.12g", t);
        throw NumericalError("non-finite state at t = " + std::string(buf) + " s");
    }
}

inline Eigen::VectorXd pack(const MachineState& s) {
    Eigen::VectorXd x(2 + s.phi.size());
    x << s.theta, s.rho, s.phi;
    return x;
}

inline MachineState unpack(const Eigen::VectorXd& x, Eigen::Index flux_dim) {
    return {x[0], x[1], x.segment(2, flux_dim)};
}

}  // namespace detail

/// One fixed step with voltage and load held constant over the step.
inline MachineState step_pmsm(const EnergyModel& m, const MachineState& s,
                              const Eigen::Vector2d& u_dq, double load_torque, double dt,
                              Integrator method = Integrator::rk4) {
    require(dt > 0.0, "dt", "must be > 0");
    check_dim(m, s.phi);
    require(m.flux_dim() == 2, "model", "step_pmsm needs a 2D (dq) flux model");
    const std::function<Eigen::Vector2d(double, double)> u = [&](double, double) { return u_dq; };
    const std::function<double(double, double)> tl = [&](double, double) { return load_torque; };
    const detail::PmsmRhs rhs{m, u, tl, Frame::rotating};
    const Eigen::VectorXd x = integrate_step(method, rhs, 0.0, detail::pack(s), dt);
    detail::check_finite(x, dt);
    return detail::unpack(x, 2);
}

namespace detail {
inline Record pmsm_record(const EnergyModel& m, double t, const Eigen::VectorXd& x,
                          const Drive& d, Frame frame) {
    Record r;
    r.t = t;
    r.theta = x[0];
    r.rho = x[1];
    r.phi = x.segment<2>(2);
    r.i = m.d_flux(r.theta, r.rho, r.phi);
    r.omega = m.d_rho(r.theta, r.rho, r.phi);
    r.torque = frame == Frame::rotating ? torque_from_currents(m, r.theta, r.rho, r.phi, r.i)
                                        : -m.pole_pairs() * m.d_theta(r.theta, r.rho, r.phi);
    r.u = voltage_at(d.voltage, t, r.theta, frame);
    r.load = load_at(d.load, t, r.omega);
    return r;
}
}  // namespace detail

/// Integrates a PMSM-family model from s0 under `drive`. With Frame::stationary
/// the model must be an alpha-beta energy (see StationaryFrameModel).
inline Trajectory simulate_pmsm(const EnergyModel& m, const MachineState& s0, const Drive& drive,
                                const SimConfig& cfg, Frame frame = Frame::rotating) {
    cfg.validate();
    validate_drive(drive);
    require(m.flux_dim() == 2, "model", "simulate_pmsm needs a 2D flux model");
    check_dim(m, s0.phi);

    const std::function<Eigen::Vector2d(double, double)> u = [&](double t, double theta) {
        return voltage_at(drive.voltage, t, theta, frame);
    };
    const std::function<double(double, double)> tl = [&](double t, double omega) {
        return load_at(drive.load, t, omega);
    };
    const detail::PmsmRhs rhs{m, u, tl, frame};

    Trajectory traj;
    traj.frame = frame;
    const long n = cfg.steps();
    traj.records.reserve(static_cast<std::size_t>(n / cfg.record_stride + 2));
    Eigen::VectorXd x = detail::pack(s0);
    detail::check_finite(x, 0.0);
    traj.records.push_back(detail::pmsm_record(m, 0.0, x, drive, frame));
    for (long k = 0; k < n; ++k) {
        const double t = k * cfg.dt;
        x = integrate_step(cfg.integrator, rhs, t, x, cfg.dt);
        detail::check_finite(x, t + cfg.dt);
        if ((k + 1) % cfg.record_stride == 0 || k + 1 == n) {
            traj.records.push_back(detail::pmsm_record(m, (k + 1) * cfg.dt, x, drive, frame));
        }
    }
    return traj;
}

/// Alpha-beta view of a dq energy: H_ab(theta, rho, phi_ab) = H_dq(theta, rho, R(theta)^T phi_ab).
class StationaryFrameModel final : public EnergyModel {
public:
    explicit StationaryFrameModel(const EnergyModel& dq) : dq_(dq) {
        require(dq.flux_dim() == 2, "model", "stationary view needs a 2D flux model");
    }

    int flux_dim() const override { return 2; }
    int pole_pairs() const override { return dq_.pole_pairs(); }
    std::string_view kind() const override { return "stationary_view"; }
    double stator_resistance() const override { return dq_.stator_resistance(); }

    double evaluate(double theta, double rho, FluxRef phi) const override {
        return dq_.evaluate(theta, rho, frames::park2(phi, theta));
    }
    Eigen::VectorXd d_flux(double theta, double rho, FluxRef phi) const override {
        const Eigen::Vector2d pd = frames::park2(phi, theta);
        return frames::inv_park2(dq_.d_flux(theta, rho, pd), theta);
    }
    double d_theta(double theta, double rho, FluxRef phi) const override {
        // d(phi_dq)/dtheta = -J phi_dq
        const Eigen::Vector2d pd = frames::park2(phi, theta);
        const Eigen::Vector2d i = dq_.d_flux(theta, rho, pd);
        return dq_.d_theta(theta, rho, pd) - i.dot(frames::j2() * pd);
    }
    double d_rho(double theta, double rho, FluxRef phi) const override {
        return dq_.d_rho(theta, rho, frames::park2(phi, theta));
    }

private:
    const EnergyModel& dq_;
};

// -----------------------------------------------------------------------------
// Induction machine
// -----------------------------------------------------------------------------

namespace detail {

/// State layout: (theta, rho, phi_sd, phi_sq, phi_rd, phi_rq, theta_s).
struct ImRhs {
    const EnergyModel& m;
    const Drive& drive;
    double omega_s;

    Eigen::VectorXd operator()(double t, const Eigen::VectorXd& x) const {
        const double theta = x[0];
        const double rho = x[1];
        const Eigen::Vector4d phi = x.segment<4>(2);
        const Eigen::VectorXd i = m.d_flux(theta, rho, phi);
        const double omega = m.d_rho(theta, rho, phi);
        const double te = torque_from_currents(m, theta, rho, phi, i);
        const double np = m.pole_pairs();
        const frames::Mat2 jm = frames::j2();
        const Eigen::Vector2d u = voltage_at(drive.voltage, t, x[6], Frame::rotating);
        Eigen::VectorXd dx(7);
        dx[0] = omega;
        dx[1] = (te - load_at(drive.load, t, omega)) / np;
        dx.segment<2>(2) = u - m.stator_resistance() * i.head<2>() - omega_s * (jm * phi.head<2>());
        dx.segment<2>(4) = -m.rotor_resistance() * i.tail<2>() - (omega_s - omega) * (jm * phi.tail<2>());
        dx[6] = omega_s;
        return dx;
    }
};

inline Record im_record(const EnergyModel& m, double t, const Eigen::VectorXd& x, const Drive& d) {
    Record r;
    r.t = t;
    r.theta = x[0];
    r.rho = x[1];
    const Eigen::Vector4d phi = x.segment<4>(2);
    const Eigen::VectorXd i = m.d_flux(r.theta, r.rho, phi);
    r.phi = phi.head<2>();
    r.phi_r = phi.tail<2>();
    r.i = i.head<2>();
    r.i_r = i.tail<2>();
    r.omega = m.d_rho(r.theta, r.rho, phi);
    r.torque = torque_from_currents(m, r.theta, r.rho, phi, i);
    r.theta_s = x[6];
    r.u = voltage_at(d.voltage, t, r.theta_s, Frame::rotating);
    r.load = load_at(d.load, t, r.omega);
    return r;
}

}  // namespace detail

/// Integrates a 4D (stator + rotor flux) model. s0.phi = (phi_sd, phi_sq, phi_rd, phi_rq).
inline Trajectory simulate_im(const EnergyModel& m, const MachineState& s0, const Drive& drive,
                              const SimConfig& cfg, double theta_s0 = 0.0) {
    cfg.validate();
    validate_drive(drive);
    require(m.flux_dim() == 4, "model", "simulate_im needs a 4D flux model");
    check_dim(m, s0.phi);
    const detail::ImRhs rhs{m, drive, cfg.omega_s};

    Trajectory traj;
    traj.induction = true;
    const long n = cfg.steps();
    Eigen::VectorXd x(7);
    x << s0.theta, s0.rho, s0.phi, theta_s0;
    detail::check_finite(x, 0.0);
    traj.records.push_back(detail::im_record(m, 0.0, x, drive));
    for (long k = 0; k < n; ++k) {
        const double t = k * cfg.dt;
        x = integrate_step(cfg.integrator, rhs, t, x, cfg.dt);
        detail::check_finite(x, t + cfg.dt);
        if ((k + 1) % cfg.record_stride == 0 || k + 1 == n) {
            traj.records.push_back(detail::im_record(m, (k + 1) * cfg.dt, x, drive));
        }
    }
    return traj;
}

inline Trajectory simulate_im(const ImParams& p, const MachineState& s0, const Drive& drive,
                              const SimConfig& cfg) {
    const InductionMachine m(p);
    return simulate_im(m, s0, drive, cfg);
}

// -----------------------------------------------------------------------------
// Energy bookkeeping
// -----------------------------------------------------------------------------

struct PowerBalance {
    double max_relative_residual = 0.0;
    double max_abs_residual = 0.0;
    double exchanged_energy = 0.0;  ///< integral of |P| over the run [J]
    double initial_energy = 0.0;
    double final_energy = 0.0;
};

/// Power flowing into the stored energy at one record:
/// u^T i - R_s |i|^2 - T_l omega / n_p (- R_r |i_r|^2).
inline double exchanged_power(const EnergyModel& m, const Record& r, bool induction) {
    double p = r.u.dot(r.i) - m.stator_resistance() * r.i.squaredNorm() -
               r.load * r.omega / m.pole_pairs();
    if (induction) p -= m.rotor_resistance() * r.i_r.squaredNorm();
    return p;
}

/// Compares H(t) - H(0) with the time integral of the exchanged power.
/// The integral uses cubic (4th order) interpolation of the uniformly sampled
/// power so the quadrature does not mask the integrator's own convergence.
inline PowerBalance power_balance_report(const EnergyModel& m, const Trajectory& traj) {
    const auto& rec = traj.records;
    if (rec.size() < 3) throw ParameterError("trajectory", "power balance needs at least 3 samples");
    const std::size_t n = rec.size();
    const double h = rec[1].t - rec[0].t;
    for (std::size_t k = 1; k < n; ++k) {
        if (std::abs((rec[k].t - rec[k - 1].t) - h) > 1e-9 * h) {
            throw ParameterError("trajectory", "power balance needs uniformly spaced samples");
        }
    }

    std::vector<double> p(n), energy(n);
    for (std::size_t k = 0; k < n; ++k) {
        p[k] = exchanged_power(m, rec[k], traj.induction);
        Eigen::VectorXd phi(traj.induction ? 4 : 2);
        if (traj.induction) phi << rec[k].phi, rec[k].phi_r;
        else phi = rec[k].phi;
        energy[k] = m.evaluate(rec[k].theta, rec[k].rho, phi);
    }

    const auto interval = [&](std::size_t k) {
        // integral over [t_k, t_{k+1}]
        if (n == 3) {
            return k == 0 ? h / 12.0 * (5 * p[0] + 8 * p[1] - p[2])
                          : h / 12.0 * (-p[0] + 8 * p[1] + 5 * p[2]);
        }
        if (k == 0) return h / 24.0 * (9 * p[0] + 19 * p[1] - 5 * p[2] + p[3]);
        if (k + 2 == n) return h / 24.0 * (p[k - 2] - 5 * p[k - 1] + 19 * p[k] + 9 * p[k + 1]);
        return h / 24.0 * (-p[k - 1] + 13 * p[k] + 13 * p[k + 1] - p[k + 2]);
    };

    PowerBalance out;
    out.initial_energy = energy.front();
    out.final_energy = energy.back();
    double cumulative = 0.0;
    double abs_exchanged = 0.0;
    double max_abs = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double e = interval(k);
        cumulative += e;
        abs_exchanged += 0.5 * h * (std::abs(p[k]) + std::abs(p[k + 1]));
        max_abs = std::max(max_abs, std::abs(energy[k + 1] - energy[0] - cumulative));
    }
    out.exchanged_energy = abs_exchanged;
    out.max_abs_residual = max_abs;
    const double scale = std::max({abs_exchanged, std::abs(energy[0]), 1e-300});
    out.max_relative_residual = max_abs / scale;
    return out;
}

inline double power_balance(const EnergyModel& m, const Trajectory& traj) {
    return power_balance_report(m, traj).max_relative_residual;
}

}  // namespace hmotor

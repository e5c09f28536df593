// Non-sinusoidal PMSM: the saturated energy plus a Fourier series in 6k*theta
//
//   H = kappa rho^2/2 + H0(x, y) + sum_k a_6k(x, y) cos(6k theta) + b_6k(x, y) sin(6k theta)
//
// with x = phi_d - phi_M, y = phi_q. The a_6k are even in y and the b_6k odd in y,
// so H is pi/3-periodic in theta and invariant under (theta, rho, phi_q) -> -(...).
// An optional 0-axis flux series phi0(theta) (period 2 pi/3) feeds the
// neutral-point voltage.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hmotor/saturation.hpp"

namespace hmotor {

/// Polynomial in (x, y) of total degree <= 4: sum c[i][j] x^i y^j.
class FluxPolynomial {
public:
    static constexpr int kMaxDegree = 4;

    FluxPolynomial() { for (auto& row : c_) row.fill(0.0); }

    /// Sets the coefficient of x^i y^j.
    FluxPolynomial& set(int i, int j, double value) {
        if (i < 0 || j < 0 || i + j > kMaxDegree) {
            throw ParameterError("x^" + std::to_string(i) + " y^" + std::to_string(j),
                                 "harmonic coefficient polynomials are capped at degree 4");
        }
        c_[i][j] = value;
        return *this;
    }
    [[nodiscard]] double get(int i, int j) const { return c_[i][j]; }

    [[nodiscard]] bool empty() const {
        for (const auto& row : c_)
            for (double v : row)
                if (v != 0.0) return false;
        return true;
    }

    /// First non-zero coefficient whose y-power has parity `odd_y`, if any.
    [[nodiscard]] std::optional<std::pair<int, int>> find_y_parity(bool odd_y) const {
        for (int i = 0; i <= kMaxDegree; ++i)
            for (int j = 0; i + j <= kMaxDegree; ++j)
                if (c_[i][j] != 0.0 && (j % 2 == 1) == odd_y) return std::pair{i, j};
        return std::nullopt;
    }

    [[nodiscard]] double value(double x, double y) const {
        const auto px = powers(x);
        const auto py = powers(y);
        double s = 0.0;
        for (int i = 0; i <= kMaxDegree; ++i)
            for (int j = 0; i + j <= kMaxDegree; ++j) s += c_[i][j] * px[i] * py[j];
        return s;
    }

    [[nodiscard]] Eigen::Vector2d gradient(double x, double y) const {
        const auto px = powers(x);
        const auto py = powers(y);
        Eigen::Vector2d g = Eigen::Vector2d::Zero();
        for (int i = 0; i <= kMaxDegree; ++i) {
            for (int j = 0; i + j <= kMaxDegree; ++j) {
                const double cij = c_[i][j];
                if (cij == 0.0) continue;
                if (i > 0) g[0] += cij * i * px[i - 1] * py[j];
                if (j > 0) g[1] += cij * j * px[i] * py[j - 1];
            }
        }
        return g;
    }

    [[nodiscard]] Eigen::Matrix2d hessian(double x, double y) const {
        const auto px = powers(x);
        const auto py = powers(y);
        double hxx = 0.0, hxy = 0.0, hyy = 0.0;
        for (int i = 0; i <= kMaxDegree; ++i) {
            for (int j = 0; i + j <= kMaxDegree; ++j) {
                const double cij = c_[i][j];
                if (cij == 0.0) continue;
                if (i > 1) hxx += cij * i * (i - 1) * px[i - 2] * py[j];
                if (i > 0 && j > 0) hxy += cij * i * j * px[i - 1] * py[j - 1];
                if (j > 1) hyy += cij * j * (j - 1) * px[i] * py[j - 2];
            }
        }
        Eigen::Matrix2d h;
        h << hxx, hxy, hxy, hyy;
        return h;
    }

private:
    static std::array<double, kMaxDegree + 1> powers(double v) {
        std::array<double, kMaxDegree + 1> p{};
        p[0] = 1.0;
        for (int k = 1; k <= kMaxDegree; ++k) p[k] = p[k - 1] * v;
        return p;
    }

    std::array<std::array<double, kMaxDegree + 1>, kMaxDegree + 1> c_{};
};

/// One harmonic of order 6k: a(x, y) cos(6k theta) + b(x, y) sin(6k theta).
struct HarmonicTerm {
    int k = 1;
    FluxPolynomial a;  ///< even in y
    FluxPolynomial b;  ///< odd in y
};

/// phi0 contribution c cos(3m theta) + s sin(3m theta).
struct ZeroAxisTerm {
    int m = 1;
    double c = 0.0;
    double s = 0.0;
};

struct HarmonicModel {
    SaturationCoefficients base;
    std::vector<HarmonicTerm> terms;
    std::optional<std::vector<ZeroAxisTerm>> zero_axis;
};

class HarmonicPmsm final : public EnergyModel {
public:
    explicit HarmonicPmsm(HarmonicModel m) : m_(std::move(m)) {
        m_.base.validate();
        for (std::size_t n = 0; n < m_.terms.size(); ++n) {
            const auto& t = m_.terms[n];
            const std::string where = "terms[" + std::to_string(n) + "]";
            require(t.k > 0, where + ".k", "harmonic index must be a positive integer");
            if (auto bad = t.a.find_y_parity(true)) {
                throw ParameterError(where + ".a x^" + std::to_string(bad->first) + " y^" +
                                         std::to_string(bad->second),
                                     "a_6k must be even in phi_q (odd power of y found)");
            }
            if (auto bad = t.b.find_y_parity(false)) {
                throw ParameterError(where + ".b x^" + std::to_string(bad->first) + " y^" +
                                         std::to_string(bad->second),
                                     "b_6k must be odd in phi_q (even power of y found)");
            }
        }
        if (m_.zero_axis) {
            for (std::size_t n = 0; n < m_.zero_axis->size(); ++n) {
                require((*m_.zero_axis)[n].m > 0, "zero_axis[" + std::to_string(n) + "].m",
                        "must be a positive integer");
            }
        }
    }

    [[nodiscard]] const HarmonicModel& model() const noexcept { return m_; }
    [[nodiscard]] bool has_zero_axis() const noexcept { return m_.zero_axis.has_value(); }

    int flux_dim() const override { return 2; }
    int pole_pairs() const override { return m_.base.n_p; }
    std::string_view kind() const override { return "harmonic_pmsm"; }
    double stator_resistance() const override { return m_.base.R_s; }

    double evaluate(double theta, double rho, FluxRef phi) const override {
        const double x = phi[0] - m_.base.phi_M;
        const double y = phi[1];
        double h = 0.5 * m_.base.kinetic_coeff * rho * rho + SaturationPolynomial{m_.base}.value(x, y);
        for (const auto& t : m_.terms) {
            const double w = 6.0 * t.k * theta;
            h += t.a.value(x, y) * std::cos(w) + t.b.value(x, y) * std::sin(w);
        }
        return h;
    }

    Eigen::VectorXd d_flux(double theta, double, FluxRef phi) const override {
        const double x = phi[0] - m_.base.phi_M;
        const double y = phi[1];
        Eigen::Vector2d g = SaturationPolynomial{m_.base}.gradient(x, y);
        for (const auto& t : m_.terms) {
            const double w = 6.0 * t.k * theta;
            g += t.a.gradient(x, y) * std::cos(w) + t.b.gradient(x, y) * std::sin(w);
        }
        return g;
    }

    double d_theta(double theta, double, FluxRef phi) const override {
        const double x = phi[0] - m_.base.phi_M;
        const double y = phi[1];
        double d = 0.0;
        for (const auto& t : m_.terms) {
            const double f = 6.0 * t.k;
            d += f * (-t.a.value(x, y) * std::sin(f * theta) + t.b.value(x, y) * std::cos(f * theta));
        }
        return d;
    }

    double d_rho(double, double rho, FluxRef) const override { return m_.base.kinetic_coeff * rho; }

    std::optional<Eigen::MatrixXd> flux_hessian(double theta, double, FluxRef phi) const override {
        const double x = phi[0] - m_.base.phi_M;
        const double y = phi[1];
        Eigen::Matrix2d h = SaturationPolynomial{m_.base}.hessian(x, y);
        for (const auto& t : m_.terms) {
            const double w = 6.0 * t.k * theta;
            h += t.a.hessian(x, y) * std::cos(w) + t.b.hessian(x, y) * std::sin(w);
        }
        return Eigen::MatrixXd(h);
    }

    /// 0-axis flux phi0(theta) and its angle derivative.
    [[nodiscard]] double zero_axis_flux(double theta) const {
        double v = 0.0;
        for (const auto& z : zero_axis_terms()) {
            const double w = 3.0 * z.m * theta;
            v += z.c * std::cos(w) + z.s * std::sin(w);
        }
        return v;
    }
    [[nodiscard]] double zero_axis_flux_dtheta(double theta) const {
        double v = 0.0;
        for (const auto& z : zero_axis_terms()) {
            const double f = 3.0 * z.m;
            v += f * (-z.c * std::sin(f * theta) + z.s * std::cos(f * theta));
        }
        return v;
    }

private:
    [[nodiscard]] const std::vector<ZeroAxisTerm>& zero_axis_terms() const {
        if (!m_.zero_axis) throw ParameterError("zero_axis", "model has no 0-axis flux channel");
        return *m_.zero_axis;
    }

    HarmonicModel m_;
};

inline HarmonicPmsm harmonic_energy(HarmonicModel m) { return HarmonicPmsm(std::move(m)); }

/// Torque sampled over an angle grid at fixed (rho, phi). The grid must span
/// at least one ripple period pi/3.
inline std::vector<double> ripple_torque(const EnergyModel& m, std::span<const double> thetas,
                                         double rho, const Eigen::Vector2d& phi) {
    require(!thetas.empty(), "theta_grid", "must not be empty");
    const auto [lo, hi] = std::minmax_element(thetas.begin(), thetas.end());
    require(*hi - *lo >= std::numbers::pi / 3.0 * (1.0 - 1e-12), "theta_grid",
            "must cover at least one period pi/3");
    std::vector<double> out;
    out.reserve(thetas.size());
    for (double th : thetas) out.push_back(torque(m, th, rho, phi));
    return out;
}

/// One sample of a dq trajectory.
struct TrajectoryPoint {
    double t = 0.0;
    double theta = 0.0;
    double rho = 0.0;
    Eigen::Vector2d phi = Eigen::Vector2d::Zero();
};

/// Neutral-point potential v_N = (v_s0 - dphi0/dt) / sqrt(3), with dphi0/dt
/// obtained from the chain rule dphi0/dtheta * omega.
inline std::vector<double> neutral_voltage(const HarmonicPmsm& m,
                                           std::span<const TrajectoryPoint> trajectory,
                                           double v_s0) {
    if (!m.has_zero_axis()) throw ParameterError("zero_axis", "model has no 0-axis flux channel");
    std::vector<double> out;
    out.reserve(trajectory.size());
    const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
    for (std::size_t n = 0; n < trajectory.size(); ++n) {
        const auto& p = trajectory[n];
        if (n > 0 && !(p.t > trajectory[n - 1].t)) {
            throw ParameterError("trajectory", "time must be strictly increasing (sample " +
                                                   std::to_string(n) + ")");
        }
        const double omega = m.d_rho(p.theta, p.rho, p.phi);
        out.push_back((v_s0 - m.zero_axis_flux_dtheta(p.theta) * omega) * inv_sqrt3);
    }
    return out;
}

}  // namespace hmotor

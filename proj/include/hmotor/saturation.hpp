// Saturated sinusoidal PMSM: quadratic energy plus a Taylor expansion in
// x = phi_d - phi_M and y = phi_q up to total degree 4. Only even powers of
// y appear, so the five higher-order coefficients are a30, a12, a40, a22, a04.
#pragma once

#include <array>
#include <cmath>
#include <string_view>

#include "hmotor/energy.hpp"

namespace hmotor {

struct SaturationCoefficients {
    double inv_L_d = 0.0;   ///< 1/L_d [1/H]
    double inv_L_q = 0.0;   ///< 1/L_q [1/H]
    double phi_M = 0.0;     ///< [Wb]
    double alpha_30 = 0.0;  ///< x^3
    double alpha_12 = 0.0;  ///< x y^2
    double alpha_40 = 0.0;  ///< x^4
    double alpha_22 = 0.0;  ///< x^2 y^2
    double alpha_04 = 0.0;  ///< y^4
    double kinetic_coeff = 1.0;
    int n_p = 1;
    double R_s = 0.0;

    void validate() const {
        require(inv_L_d > 0.0, "inv_L_d", "must be > 0");
        require(inv_L_q > 0.0, "inv_L_q", "must be > 0");
        require(phi_M >= 0.0, "phi_M", "must be >= 0");
        require(kinetic_coeff > 0.0, "kinetic_coeff", "must be > 0");
        require(n_p > 0, "n_p", "must be a positive integer");
        require(R_s >= 0.0, "R_s", "must be >= 0");
        const std::array<std::pair<std::string_view, double>, 8> all{{{"inv_L_d", inv_L_d},
                                                                      {"inv_L_q", inv_L_q},
                                                                      {"phi_M", phi_M},
                                                                      {"alpha_30", alpha_30},
                                                                      {"alpha_12", alpha_12},
                                                                      {"alpha_40", alpha_40},
                                                                      {"alpha_22", alpha_22},
                                                                      {"alpha_04", alpha_04}}};
        for (const auto& [k, v] : all) require(std::isfinite(v), std::string(k), "must be finite");
    }

    static SaturationCoefficients from_linear(const LinearPmsmParams& p) {
        SaturationCoefficients c;
        c.inv_L_d = 1.0 / p.L_d;
        c.inv_L_q = 1.0 / p.L_q;
        c.phi_M = p.phi_M;
        c.kinetic_coeff = p.kinetic_coeff;
        c.n_p = p.n_p;
        c.R_s = p.R_s;
        return c;
    }

    /// The seven magnetic parameters in identification order.
    [[nodiscard]] std::array<double, 7> magnetic() const {
        return {inv_L_d, inv_L_q, alpha_30, alpha_12, alpha_40, alpha_22, alpha_04};
    }
    void set_magnetic(const std::array<double, 7>& v) {
        inv_L_d = v[0];
        inv_L_q = v[1];
        alpha_30 = v[2];
        alpha_12 = v[3];
        alpha_40 = v[4];
        alpha_22 = v[5];
        alpha_04 = v[6];
    }
};

inline constexpr std::array<std::string_view, 7> kMagneticNames{
    "inv_L_d", "inv_L_q", "alpha_30", "alpha_12", "alpha_40", "alpha_22", "alpha_04"};

/// Power of phi_M that makes each magnetic parameter an A*Wb quantity.
inline constexpr std::array<int, 7> kMagneticScalePower{2, 2, 3, 3, 4, 4, 4};

/// phi_M^k * value for each magnetic parameter.
inline std::array<double, 7> to_scaled(const std::array<double, 7>& raw, double phi_M) {
    std::array<double, 7> out{};
    for (std::size_t k = 0; k < 7; ++k) out[k] = raw[k] * std::pow(phi_M, kMagneticScalePower[k]);
    return out;
}

inline std::array<double, 7> from_scaled(const std::array<double, 7>& scaled, double phi_M) {
    require(phi_M > 0.0, "phi_M", "must be > 0 to unscale coefficients");
    std::array<double, 7> out{};
    for (std::size_t k = 0; k < 7; ++k)
        out[k] = scaled[k] / std::pow(phi_M, kMagneticScalePower[k]);
    return out;
}

/// Magnetic part of the saturated energy and its derivatives in (x, y).
struct SaturationPolynomial {
    const SaturationCoefficients& c;

    [[nodiscard]] double value(double x, double y) const {
        const double x2 = x * x;
        const double y2 = y * y;
        return 0.5 * c.inv_L_d * x2 + 0.5 * c.inv_L_q * y2 + c.alpha_30 * x2 * x +
               c.alpha_12 * x * y2 + c.alpha_40 * x2 * x2 + c.alpha_22 * x2 * y2 +
               c.alpha_04 * y2 * y2;
    }
    [[nodiscard]] Eigen::Vector2d gradient(double x, double y) const {
        const double x2 = x * x;
        const double y2 = y * y;
        return {c.inv_L_d * x + 3.0 * c.alpha_30 * x2 + c.alpha_12 * y2 +
                    4.0 * c.alpha_40 * x2 * x + 2.0 * c.alpha_22 * x * y2,
                c.inv_L_q * y + 2.0 * c.alpha_12 * x * y + 2.0 * c.alpha_22 * x2 * y +
                    4.0 * c.alpha_04 * y2 * y};
    }
    [[nodiscard]] Eigen::Matrix2d hessian(double x, double y) const {
        const double dxx = c.inv_L_d + 6.0 * c.alpha_30 * x + 12.0 * c.alpha_40 * x * x +
                           2.0 * c.alpha_22 * y * y;
        const double dxy = 2.0 * c.alpha_12 * y + 4.0 * c.alpha_22 * x * y;
        const double dyy = c.inv_L_q + 2.0 * c.alpha_12 * x + 2.0 * c.alpha_22 * x * x +
                           12.0 * c.alpha_04 * y * y;
        Eigen::Matrix2d h;
        h << dxx, dxy, dxy, dyy;
        return h;
    }
};

class SaturatedPmsm final : public EnergyModel {
public:
    explicit SaturatedPmsm(SaturationCoefficients c) : c_(c) { c_.validate(); }

    [[nodiscard]] const SaturationCoefficients& coefficients() const noexcept { return c_; }

    int flux_dim() const override { return 2; }
    int pole_pairs() const override { return c_.n_p; }
    std::string_view kind() const override { return "saturated_pmsm"; }
    double stator_resistance() const override { return c_.R_s; }

    double evaluate(double, double rho, FluxRef phi) const override {
        return 0.5 * c_.kinetic_coeff * rho * rho + poly().value(phi[0] - c_.phi_M, phi[1]);
    }
    Eigen::VectorXd d_flux(double, double, FluxRef phi) const override {
        return poly().gradient(phi[0] - c_.phi_M, phi[1]);
    }
    double d_theta(double, double, FluxRef) const override { return 0.0; }
    double d_rho(double, double rho, FluxRef) const override { return c_.kinetic_coeff * rho; }
    std::optional<Eigen::MatrixXd> flux_hessian(double, double, FluxRef phi) const override {
        return Eigen::MatrixXd(poly().hessian(phi[0] - c_.phi_M, phi[1]));
    }

private:
    [[nodiscard]] SaturationPolynomial poly() const { return {c_}; }
    SaturationCoefficients c_;
};

inline SaturatedPmsm saturated_energy(const SaturationCoefficients& c) { return SaturatedPmsm(c); }

inline Eigen::Vector2d saturated_currents(const SaturationCoefficients& c,
                                          const Eigen::Vector2d& phi) {
    return SaturationPolynomial{c}.gradient(phi[0] - c.phi_M, phi[1]);
}

/// d i / d phi, i.e. the inverse incremental inductance matrix.
inline Eigen::Matrix2d incremental_inductance(const SaturationCoefficients& c,
                                              const Eigen::Vector2d& phi) {
    return SaturationPolynomial{c}.hessian(phi[0] - c.phi_M, phi[1]);
}

/// True when (phi_d - phi_M, phi_q) leaves the box |x|, |y| <= phi_M where the
/// truncated expansion is expected to be meaningful.
inline bool outside_validity_box(const SaturationCoefficients& c, const Eigen::Vector2d& phi) {
    return std::abs(phi[0] - c.phi_M) > c.phi_M || std::abs(phi[1]) > c.phi_M;
}

/// Measured magnetic parameters of an IPM and an SPM machine, as phi_M-scaled
/// values in A*Wb (order: inv_L_d, inv_L_q, a30, a12, a40, a22, a04).
namespace reference {
inline constexpr std::array<double, 7> kIpmScaled{4.20, 2.83, 0.770, 0.702, 0.486, 0.734, 0.175};
inline constexpr std::array<double, 7> kSpmScaled{3.06, 2.94, 0.655, 0.617, 0.724, 1.010, 0.262};
inline constexpr double kIpmPhiM = 0.196;
inline constexpr double kSpmPhiM = 0.155;
inline constexpr int kIpmPolePairs = 3;
inline constexpr int kSpmPolePairs = 5;
inline constexpr double kIpmRs = 1.52;
inline constexpr double kSpmRs = 2.1;

inline SaturationCoefficients ipm(double kinetic_coeff = 1.0) {
    SaturationCoefficients c;
    c.phi_M = kIpmPhiM;
    c.set_magnetic(from_scaled(kIpmScaled, kIpmPhiM));
    c.n_p = kIpmPolePairs;
    c.R_s = kIpmRs;
    c.kinetic_coeff = kinetic_coeff;
    return c;
}

inline SaturationCoefficients spm(double kinetic_coeff = 1.0) {
    SaturationCoefficients c;
    c.phi_M = kSpmPhiM;
    c.set_magnetic(from_scaled(kSpmScaled, kSpmPhiM));
    c.n_p = kSpmPolePairs;
    c.R_s = kSpmRs;
    c.kinetic_coeff = kinetic_coeff;
    return c;
}
}  // namespace reference

}  // namespace hmotor

// Identification of the saturated PMSM energy from flux-current samples.
//
// With phi_M fixed the current model is linear in the seven magnetic
// parameters (inv_L_d, inv_L_q, a30, a12, a40, a22, a04):
//   i_d = inv_L_d x + 3 a30 x^2 + a12 y^2 + 4 a40 x^3 + 2 a22 x y^2
//   i_q = inv_L_q y + 2 a12 x y + 2 a22 x^2 y + 4 a04 y^3
// so both current components are stacked into one weighted least-squares
// problem. phi_M can optionally be refined by Gauss-Newton on the reduced
// (variable projection) residual.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hmotor/saturation.hpp"

namespace hmotor {

struct FluxSample {
    double phi_d = 0.0;
    double phi_q = 0.0;
    double i_d = 0.0;
    double i_q = 0.0;
    double weight = 1.0;
};

struct FitResult {
    SaturationCoefficients coefficients;
    double residual_rms = 0.0;                       ///< [A]
    std::optional<std::array<double, 7>> std_errors;  ///< only when 2N > 7
    double condition_number = 0.0;                   ///< of the (column-scaled) normal equations
    std::optional<double> phi_M_std_error;           ///< when phi_M was refined
    bool converged = true;
    int iterations = 0;
};

/// The design matrix has (numerically) unobservable parameter directions.
class RankDeficientError : public NumericalError {
public:
    RankDeficientError(const std::string& what, std::vector<std::string> directions)
        : NumericalError(what), directions_(std::move(directions)) {}
    [[nodiscard]] const std::vector<std::string>& directions() const noexcept { return directions_; }

private:
    std::vector<std::string> directions_;
};

inline constexpr std::size_t kMinSamples = 7;

/// Rows 2k (i_d) and 2k+1 (i_q) of the unweighted design matrix.
inline Eigen::MatrixXd design_matrix(const std::vector<FluxSample>& samples, double phi_M) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * static_cast<Eigen::Index>(samples.size()), 7);
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const double x = samples[k].phi_d - phi_M;
        const double y = samples[k].phi_q;
        const auto r = static_cast<Eigen::Index>(2 * k);
        a.row(r) << x, 0.0, 3 * x * x, y * y, 4 * x * x * x, 2 * x * y * y, 0.0;
        a.row(r + 1) << 0.0, y, 0.0, 2 * x * y, 0.0, 2 * x * x * y, 4 * y * y * y;
    }
    return a;
}

/// d(design)/d(phi_M); only x depends on phi_M and dx/dphi_M = -1.
inline Eigen::MatrixXd design_matrix_dphi(const std::vector<FluxSample>& samples, double phi_M) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * static_cast<Eigen::Index>(samples.size()), 7);
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const double x = samples[k].phi_d - phi_M;
        const double y = samples[k].phi_q;
        const auto r = static_cast<Eigen::Index>(2 * k);
        a.row(r) << -1.0, 0.0, -6 * x, 0.0, -12 * x * x, -2 * y * y, 0.0;
        a.row(r + 1) << 0.0, 0.0, 0.0, -2 * y, 0.0, -4 * x * y, 0.0;
    }
    return a;
}

inline Eigen::VectorXd current_vector(const std::vector<FluxSample>& samples) {
    Eigen::VectorXd b(2 * static_cast<Eigen::Index>(samples.size()));
    for (std::size_t k = 0; k < samples.size(); ++k) {
        b[static_cast<Eigen::Index>(2 * k)] = samples[k].i_d;
        b[static_cast<Eigen::Index>(2 * k + 1)] = samples[k].i_q;
    }
    return b;
}

inline Eigen::VectorXd sqrt_weights(const std::vector<FluxSample>& samples) {
    Eigen::VectorXd w(2 * static_cast<Eigen::Index>(samples.size()));
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const double s = std::sqrt(samples[k].weight);
        w[static_cast<Eigen::Index>(2 * k)] = s;
        w[static_cast<Eigen::Index>(2 * k + 1)] = s;
    }
    return w;
}

namespace detail {

/// Weighted linear solve at fixed phi_M, through an SVD of the column-scaled design.
struct LinearSolve {
    Eigen::Matrix<double, 7, 1> params;
    Eigen::VectorXd weighted_residual;  ///< sqrt(W) (b - A p)
    Eigen::Matrix<double, 7, 7> covariance_unit;  ///< (A^T W A)^-1
    double condition_number = 0.0;
};

inline std::string describe_direction(const Eigen::VectorXd& v) {
    std::ostringstream os;
    os.precision(3);
    bool first = true;
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        if (std::abs(v[k]) < 1e-6) continue;
        os << (first ? "" : (v[k] < 0 ? " - " : " + "));
        if (first && v[k] < 0) os << "-";
        os << std::abs(v[k]) << "*" << kMagneticNames[static_cast<std::size_t>(k)];
        first = false;
    }
    return os.str();
}

inline LinearSolve solve_linear(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                const Eigen::VectorXd& sw) {
    const Eigen::MatrixXd aw = sw.asDiagonal() * a;
    const Eigen::VectorXd bw = sw.cwiseProduct(b);

    Eigen::Matrix<double, 7, 1> col_scale;
    for (int k = 0; k < 7; ++k) {
        const double n = aw.col(k).norm();
        col_scale[k] = n > 0.0 ? n : 1.0;
    }
    const Eigen::MatrixXd as = aw * col_scale.cwiseInverse().asDiagonal();
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(as, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd sv = svd.singularValues();
    const double tol = 1e-12 * sv[0];

    std::vector<std::string> dirs;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
        if (!(sv[k] > tol)) {
            Eigen::VectorXd v = svd.matrixV().col(k).cwiseQuotient(col_scale);
            v /= v.cwiseAbs().maxCoeff();
            dirs.push_back(describe_direction(v));
        }
    }
    if (!dirs.empty()) {
        std::string msg = "rank-deficient design matrix; unobservable:";
        for (const auto& d : dirs) msg += " [" + d + "]";
        throw RankDeficientError(msg, dirs);
    }

    LinearSolve out;
    const Eigen::VectorXd ps = svd.solve(bw);
    out.params = ps.cwiseQuotient(col_scale);
    out.weighted_residual = bw - aw * out.params;
    const Eigen::MatrixXd v = svd.matrixV();
    const Eigen::VectorXd inv_s2 = sv.array().square().inverse();
    const Eigen::MatrixXd cov_s = v * inv_s2.asDiagonal() * v.transpose();
    out.covariance_unit = col_scale.cwiseInverse().asDiagonal() * cov_s *
                          col_scale.cwiseInverse().asDiagonal();
    const double ratio = sv[0] / sv[sv.size() - 1];
    out.condition_number = ratio * ratio;
    return out;
}

/// HC3 covariance of a least-squares fit with Jacobian `j` and residual `r`
/// (both already weighted).
inline Eigen::MatrixXd robust_covariance(const Eigen::MatrixXd& j, const Eigen::VectorXd& r) {
    Eigen::VectorXd col_scale(j.cols());
    for (Eigen::Index k = 0; k < j.cols(); ++k) {
        const double n = j.col(k).norm();
        col_scale[k] = n > 0.0 ? n : 1.0;
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(j * col_scale.cwiseInverse().asDiagonal(),
                                                Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::MatrixXd& u = svd.matrixU();
    Eigen::VectorXd e(r.size());
    for (Eigen::Index k = 0; k < r.size(); ++k) {
        const double lever = std::min(u.row(k).squaredNorm(), 1.0 - 1e-12);
        e[k] = r[k] * r[k] / ((1.0 - lever) * (1.0 - lever));
    }
    const Eigen::MatrixXd meat = u.transpose() * e.asDiagonal() * u;
    const Eigen::VectorXd inv_s = svd.singularValues().cwiseInverse();
    const Eigen::MatrixXd vs = svd.matrixV() * inv_s.asDiagonal();
    const Eigen::MatrixXd cov_s = vs * meat * vs.transpose();
    return col_scale.cwiseInverse().asDiagonal() * cov_s * col_scale.cwiseInverse().asDiagonal();
}

}  // namespace detail

/// Options besides phi_M; `base` supplies the non-magnetic fields (kappa, n_p, R_s)
/// copied into the result.
/// How standard errors are estimated.
///  classical: s^2 (A^T W A)^-1 with s^2 = RSS / (2N - p); assumes equal error variance
///             (after weighting) on every current.
///  robust:    HC3 sandwich estimator, valid when the error variance differs between
///             samples (e.g. noise proportional to the current).
enum class Covariance { classical, robust };

struct FitOptions {
    bool refine_phi_M = false;
    Covariance covariance = Covariance::classical;
    int max_iterations = 50;
    double step_tolerance = 1e-10;
    SaturationCoefficients base{};
};

inline FitResult fit_saturation(const std::vector<FluxSample>& samples, double phi_M,
                                const FitOptions& opt = {}) {
    if (samples.size() < kMinSamples) {
        throw ParameterError("samples", "insufficient samples: need at least " +
                                            std::to_string(kMinSamples) + ", got " +
                                            std::to_string(samples.size()));
    }
    require(phi_M > 0.0 && std::isfinite(phi_M), "phi_M", "must be > 0");
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const auto& s = samples[k];
        const std::string where = "samples[" + std::to_string(k) + "]";
        require(std::isfinite(s.phi_d) && std::isfinite(s.phi_q) && std::isfinite(s.i_d) &&
                    std::isfinite(s.i_q),
                where, "non-finite value");
        require(s.weight > 0.0 && std::isfinite(s.weight), where + ".weight", "must be > 0");
    }

    const Eigen::VectorXd b = current_vector(samples);
    const Eigen::VectorXd sw = sqrt_weights(samples);

    double phi = phi_M;
    detail::LinearSolve sol = detail::solve_linear(design_matrix(samples, phi), b, sw);
    FitResult out;

    if (opt.refine_phi_M) {
        // Gauss-Newton on the projected residual r(phi) = sqrt(W)(b - A(phi) p(phi)),
        // using Kaufman's approximation dr/dphi ~ -P_perp sqrt(W) dA/dphi p.
        double rss = sol.weighted_residual.squaredNorm();
        out.converged = false;
        for (int it = 1; it <= opt.max_iterations; ++it) {
            out.iterations = it;
            const Eigen::MatrixXd a = sw.asDiagonal() * design_matrix(samples, phi);
            const Eigen::VectorXd g = sw.asDiagonal() * (design_matrix_dphi(samples, phi) * sol.params);
            const Eigen::VectorXd jac = -(g - a * (sol.covariance_unit * (a.transpose() * g)));
            const double jj = jac.squaredNorm();
            const double step = jj > 0.0 ? -jac.dot(sol.weighted_residual) / jj : 0.0;
            if (std::abs(step) <= opt.step_tolerance * std::abs(phi)) {
                out.converged = true;
                break;
            }
            // Halve the step until the residual does not grow.
            bool accepted = false;
            double s = step;
            for (int halving = 0; halving < 40 && !accepted; ++halving, s *= 0.5) {
                const double trial = phi + s;
                if (!(trial > 0.0)) continue;
                try {
                    auto cand = detail::solve_linear(design_matrix(samples, trial), b, sw);
                    const double cand_rss = cand.weighted_residual.squaredNorm();
                    if (cand_rss <= rss) {
                        phi = trial;
                        sol = std::move(cand);
                        rss = cand_rss;
                        accepted = true;
                    }
                } catch (const RankDeficientError&) {
                }
            }
            if (!accepted) {
                // No descent along the Gauss-Newton direction: stationary to working precision.
                out.converged = true;
                break;
            }
            if (std::abs(s * 2.0) <= opt.step_tolerance * std::abs(phi)) {
                out.converged = true;
                break;
            }
        }
    }

    out.coefficients = opt.base;
    out.coefficients.phi_M = phi;
    std::array<double, 7> p{};
    for (int k = 0; k < 7; ++k) p[static_cast<std::size_t>(k)] = sol.params[k];
    out.coefficients.set_magnetic(p);
    out.condition_number = sol.condition_number;

    const double rss = sol.weighted_residual.squaredNorm();
    out.residual_rms = std::sqrt(rss / sw.squaredNorm());
    const auto n_eq = static_cast<double>(b.size());
    const int n_par = opt.refine_phi_M ? 8 : 7;
    if (n_eq > n_par) {
        // Jacobian of the weighted residual: [A] or, with phi_M refined, [A, dA/dphi p].
        Eigen::MatrixXd jac(b.size(), n_par);
        jac.leftCols(7) = sw.asDiagonal() * design_matrix(samples, phi);
        if (opt.refine_phi_M)
            jac.col(7) = sw.asDiagonal() * (design_matrix_dphi(samples, phi) * sol.params);
        Eigen::MatrixXd cov;
        if (opt.covariance == Covariance::robust) {
            cov = detail::robust_covariance(jac, sol.weighted_residual);
        } else if (opt.refine_phi_M) {
            cov = rss / (n_eq - n_par) *
                  (jac.transpose() * jac).completeOrthogonalDecomposition().pseudoInverse();
        } else {
            cov = rss / (n_eq - n_par) * sol.covariance_unit;
        }
        std::array<double, 7> se{};
        for (int k = 0; k < 7; ++k) se[static_cast<std::size_t>(k)] = std::sqrt(cov(k, k));
        out.std_errors = se;
        if (opt.refine_phi_M) out.phi_M_std_error = std::sqrt(cov(7, 7));
    }
    return out;
}

inline FitResult fit_saturation(const std::vector<FluxSample>& samples, double phi_M,
                                bool refine_phi_M) {
    FitOptions opt;
    opt.refine_phi_M = refine_phi_M;
    return fit_saturation(samples, phi_M, opt);
}

// -----------------------------------------------------------------------------
// Synthetic data
// -----------------------------------------------------------------------------

/// Rectangular flux grid, inclusive bounds.
struct GridSpec {
    double phi_d_min = 0.0;
    double phi_d_max = 0.0;
    int n_d = 1;
    double phi_q_min = 0.0;
    double phi_q_max = 0.0;
    int n_q = 1;

    /// n x n grid with |phi_d - phi_M|, |phi_q| <= fraction * phi_M.
    static GridSpec around(double phi_M, double fraction, int n) {
        const double h = fraction * phi_M;
        return {phi_M - h, phi_M + h, n, -h, h, n};
    }

    [[nodiscard]] std::vector<Eigen::Vector2d> points() const {
        require(n_d > 0 && n_q > 0, "grid", "must have at least one point per axis");
        std::vector<Eigen::Vector2d> pts;
        pts.reserve(static_cast<std::size_t>(n_d) * static_cast<std::size_t>(n_q));
        const auto lin = [](double lo, double hi, int n, int k) {
            return n == 1 ? lo : lo + (hi - lo) * k / (n - 1);
        };
        for (int a = 0; a < n_d; ++a)
            for (int b = 0; b < n_q; ++b)
                pts.emplace_back(lin(phi_d_min, phi_d_max, n_d, a), lin(phi_q_min, phi_q_max, n_q, b));
        return pts;
    }
};

/// Evaluates `current_map(phi)` on the grid and multiplies each current by
/// (1 + noise * N(0, 1)), drawing d before q at every grid point.
template <class CurrentMap>
std::vector<FluxSample> sample_current_map(const CurrentMap& current_map, const GridSpec& grid,
                                           double noise, std::uint64_t seed) {
    require(noise >= 0.0 && std::isfinite(noise), "noise", "must be >= 0");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<FluxSample> out;
    for (const auto& phi : grid.points()) {
        const Eigen::Vector2d i = current_map(phi);
        FluxSample s{phi[0], phi[1], i[0], i[1], 1.0};
        if (noise > 0.0) {
            s.i_d *= 1.0 + noise * normal(rng);
            s.i_q *= 1.0 + noise * normal(rng);
        }
        out.push_back(s);
    }
    return out;
}

inline std::vector<FluxSample> generate_synthetic(const SaturationCoefficients& c,
                                                  const GridSpec& grid, double noise,
                                                  std::uint64_t seed) {
    return sample_current_map([&](const Eigen::Vector2d& phi) { return saturated_currents(c, phi); },
                              grid, noise, seed);
}

// -----------------------------------------------------------------------------
// Reporting
// -----------------------------------------------------------------------------

/// phi_M-scaled magnetic parameters (all in A*Wb) with propagated standard errors.
struct ScaledReport {
    double phi_M = 0.0;
    std::array<double, 7> values{};
    std::optional<std::array<double, 7>> std_errors;
};

inline constexpr std::array<std::string_view, 7> kScaledNames{
    "phi_M^2/L_d", "phi_M^2/L_q", "phi_M^3*alpha_30", "phi_M^3*alpha_12",
    "phi_M^4*alpha_40", "phi_M^4*alpha_22", "phi_M^4*alpha_04"};

inline ScaledReport report_scaled(const FitResult& r, double phi_M) {
    ScaledReport out;
    out.phi_M = phi_M;
    out.values = to_scaled(r.coefficients.magnetic(), phi_M);
    if (r.std_errors) out.std_errors = to_scaled(*r.std_errors, phi_M);
    return out;
}

}  // namespace hmotor

// Numerical checks of the structural properties an energy model must have:
// reciprocity of the current-flux map, pi/3 periodicity and (theta, rho, phi_q)
// parity for the PMSM family, evenness for reluctance machines, and rotation /
// reflection invariance for the induction machine.
//
// Every check samples random points in a box, measures the absolute violation
// and normalises it by the largest magnitude of the compared quantity seen over
// the same samples. Sampling is split into fixed-size batches, each with its own
// seeded generator, so reports do not depend on the number of worker threads.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "hmotor/energy.hpp"
#include "hmotor/harmonics.hpp"
#include "hmotor/induction.hpp"
#include "hmotor/saturation.hpp"

namespace hmotor {

struct CheckReport {
    std::string name;
    std::size_t samples = 0;
    double max_abs = 0.0;
    double max_rel = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::vector<double> worst_point;  ///< (theta, rho, phi...) of the largest violation
};

/// Sampling region: theta in [-theta_max, theta_max], rho in [-rho_max, rho_max],
/// phi_k in [center_k - half_width_k, center_k + half_width_k].
struct SamplingBox {
    double theta_max = 2.0 * std::numbers::pi;
    double rho_max = 1.0;
    Eigen::VectorXd phi_center = Eigen::VectorXd::Zero(2);
    Eigen::VectorXd phi_half_width = Eigen::VectorXd::Ones(2);

    static SamplingBox pmsm(double phi_M, double rho_max) {
        SamplingBox b;
        b.rho_max = rho_max;
        b.phi_center = Eigen::Vector2d(phi_M, 0.0);
        const double w = phi_M > 0.0 ? phi_M : 1.0;
        b.phi_half_width = Eigen::Vector2d(w, w);
        return b;
    }
    static SamplingBox centered(int flux_dim, double half_width, double rho_max) {
        SamplingBox b;
        b.rho_max = rho_max;
        b.phi_center = Eigen::VectorXd::Zero(flux_dim);
        b.phi_half_width = Eigen::VectorXd::Constant(flux_dim, half_width);
        return b;
    }
};

/// Rated electrical speed of the IPM test machine (1800 rpm, 3 pole pairs), used
/// to size the default momentum range: rho_max = omega_rated / kappa.
inline constexpr double kDefaultRatedOmega = 1800.0 / 60.0 * 2.0 * std::numbers::pi * 3.0;

/// Box sized from the model parameters when the model type is known.
inline SamplingBox default_box(const EnergyModel& m) {
    const double probe = m.d_rho(0.0, 1.0, Eigen::VectorXd::Zero(m.flux_dim()));
    const double rho_max = probe > 0.0 ? kDefaultRatedOmega / probe : 1.0;
    if (const auto* lin = dynamic_cast<const LinearPmsm*>(&m)) {
        const double phi_M = lin->params().phi_M;
        if (phi_M > 0.0) return SamplingBox::pmsm(phi_M, rho_max);
        return SamplingBox::centered(2, reference::kIpmPhiM, rho_max);
    }
    if (const auto* sat = dynamic_cast<const SaturatedPmsm*>(&m))
        return SamplingBox::pmsm(sat->coefficients().phi_M, rho_max);
    if (const auto* har = dynamic_cast<const HarmonicPmsm*>(&m))
        return SamplingBox::pmsm(har->model().base.phi_M, rho_max);
    if (m.flux_dim() == 4) return SamplingBox::centered(4, 1.0, rho_max);
    return SamplingBox::centered(m.flux_dim(), 1.0, rho_max);
}

struct CheckOptions {
    std::size_t samples = 10000;
    double tolerance = 1e-10;
    std::uint64_t seed = 1;
    unsigned threads = 0;  ///< 0: hardware concurrency
    /// Reciprocity only: ignore analytic Hessians and use finite differences.
    bool force_finite_differences = false;
};

namespace detail {

struct Point {
    double theta;
    double rho;
    Eigen::VectorXd phi;
    double extra;  ///< auxiliary uniform sample in [-pi, pi] (rotation angle)
};

/// Violation and reference magnitude at one point.
struct Measure {
    double violation;
    double magnitude;
};

struct BatchResult {
    double max_abs = 0.0;
    double max_mag = 0.0;
    std::vector<double> worst;
};

inline constexpr std::size_t kBatch = 1024;

inline BatchResult run_batch(const SamplingBox& box, std::uint64_t seed, std::size_t batch,
                             std::size_t count, const std::function<Measure(const Point&)>& f) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(batch)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    BatchResult r;
    bool first = true;
    for (std::size_t k = 0; k < count; ++k) {
        Point p;
        p.theta = box.theta_max * u(rng);
        p.rho = box.rho_max * u(rng);
        p.phi.resize(box.phi_center.size());
        for (Eigen::Index j = 0; j < p.phi.size(); ++j)
            p.phi[j] = box.phi_center[j] + box.phi_half_width[j] * u(rng);
        p.extra = std::numbers::pi * u(rng);
        const Measure m = f(p);
        r.max_mag = std::max(r.max_mag, m.magnitude);
        if (first || m.violation > r.max_abs) {
            r.max_abs = m.violation;
            r.worst.assign({p.theta, p.rho});
            for (Eigen::Index j = 0; j < p.phi.size(); ++j) r.worst.push_back(p.phi[j]);
            first = false;
        }
    }
    return r;
}

inline CheckReport run_check(std::string name, const SamplingBox& box, const CheckOptions& opt,
                             const std::function<Measure(const Point&)>& f) {
    const std::size_t n_batches = (opt.samples + kBatch - 1) / kBatch;
    unsigned workers = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n_batches, 1)));

    std::vector<BatchResult> results(n_batches);
    const auto work = [&](unsigned w) {
        for (std::size_t b = w; b < n_batches; b += workers) {
            const std::size_t count = std::min(kBatch, opt.samples - b * kBatch);
            results[b] = run_batch(box, opt.seed, b, count, f);
        }
    };
    if (workers <= 1) {
        work(0);
    } else {
        std::vector<std::future<void>> jobs;
        for (unsigned w = 0; w < workers; ++w) jobs.push_back(std::async(std::launch::async, work, w));
        for (auto& j : jobs) j.get();
    }

    CheckReport rep;
    rep.name = std::move(name);
    rep.samples = opt.samples;
    rep.tolerance = opt.tolerance;
    double max_mag = 0.0;
    bool first = true;
    for (const auto& r : results) {
        max_mag = std::max(max_mag, r.max_mag);
        if (first || r.max_abs > rep.max_abs) {
            rep.max_abs = r.max_abs;
            rep.worst_point = r.worst;
            first = false;
        }
    }
    rep.max_rel = max_mag > 0.0 ? rep.max_abs / max_mag : rep.max_abs;
    rep.passed = rep.max_rel < rep.tolerance;
    return rep;
}

}  // namespace detail

/// Largest |di_j/dphi_k - di_k/dphi_j| over the box, relative to the largest
/// Jacobian entry.
inline CheckReport check_reciprocity(const EnergyModel& m, const SamplingBox& box,
                                     const CheckOptions& opt = {}) {
    return detail::run_check("reciprocity", box, opt, [&](const detail::Point& p) {
        Eigen::MatrixXd jac;
        std::optional<Eigen::MatrixXd> h;
        if (!opt.force_finite_differences) h = m.flux_hessian(p.theta, p.rho, p.phi);
        if (h) {
            jac = *h;
        } else {
            jac = numeric_jacobian(
                [&](const Eigen::VectorXd& phi) { return m.d_flux(p.theta, p.rho, phi); }, p.phi);
        }
        const double asym = (jac - jac.transpose()).cwiseAbs().maxCoeff();
        return detail::Measure{asym, jac.cwiseAbs().maxCoeff()};
    });
}

/// H(theta + pi/3) = H(theta).
inline CheckReport check_period(const EnergyModel& m, const SamplingBox& box,
                                const CheckOptions& opt = {}) {
    return detail::run_check("period_pi_3", box, opt, [&](const detail::Point& p) {
        const double a = m.evaluate(p.theta, p.rho, p.phi);
        const double b = m.evaluate(p.theta + std::numbers::pi / 3.0, p.rho, p.phi);
        return detail::Measure{std::abs(a - b), std::max(std::abs(a), std::abs(b))};
    });
}

/// H(theta, rho, phi_d, phi_q) = H(-theta, -rho, phi_d, -phi_q).
inline CheckReport check_parity(const EnergyModel& m, const SamplingBox& box,
                                const CheckOptions& opt = {}) {
    return detail::run_check("parity", box, opt, [&](const detail::Point& p) {
        Eigen::VectorXd mirrored = p.phi;
        mirrored[1] = -mirrored[1];
        const double a = m.evaluate(p.theta, p.rho, p.phi);
        const double b = m.evaluate(-p.theta, -p.rho, mirrored);
        return detail::Measure{std::abs(a - b), std::max(std::abs(a), std::abs(b))};
    });
}

/// H(theta, rho, phi) = H(theta, rho, -phi).
inline CheckReport check_synrm_evenness(const EnergyModel& m, const SamplingBox& box,
                                        const CheckOptions& opt = {}) {
    return detail::run_check("synrm_evenness", box, opt, [&](const detail::Point& p) {
        const double a = m.evaluate(p.theta, p.rho, p.phi);
        const double b = m.evaluate(p.theta, p.rho, -p.phi);
        return detail::Measure{std::abs(a - b), std::max(std::abs(a), std::abs(b))};
    });
}

/// H(rho, R(eta) phi_s, R(eta) phi_r) = H(rho, phi_s, phi_r) for random eta.
inline CheckReport check_im_rotation(const EnergyModel& m, const SamplingBox& box,
                                     const CheckOptions& opt = {}) {
    require(m.flux_dim() == 4, "model", "rotation check needs a 4D (stator + rotor) flux model");
    return detail::run_check("im_rotation", box, opt, [&](const detail::Point& p) {
        const frames::Mat2 r = frames::rotation2(p.extra);
        Eigen::Vector4d rotated;
        rotated << r * p.phi.head<2>(), r * p.phi.tail<2>();
        const double a = m.evaluate(p.theta, p.rho, p.phi);
        const double b = m.evaluate(p.theta, p.rho, rotated);
        return detail::Measure{std::abs(a - b), std::max(std::abs(a), std::abs(b))};
    });
}

inline CheckReport check_im_rotation(const ImParams& p, const CheckOptions& opt = {}) {
    const InductionMachine m(p);
    return check_im_rotation(m, default_box(m), opt);
}

/// H(rho, phi_s, phi_r) = H(-rho, S phi_s, S phi_r), S = diag(1, -1).
inline CheckReport check_im_reflection(const EnergyModel& m, const SamplingBox& box,
                                       const CheckOptions& opt = {}) {
    require(m.flux_dim() == 4, "model", "reflection check needs a 4D (stator + rotor) flux model");
    return detail::run_check("im_reflection", box, opt, [&](const detail::Point& p) {
        Eigen::Vector4d reflected = p.phi;
        reflected[1] = -reflected[1];
        reflected[3] = -reflected[3];
        const double a = m.evaluate(p.theta, p.rho, p.phi);
        const double b = m.evaluate(p.theta, p.rho * -1.0, reflected);
        return detail::Measure{std::abs(a - b), std::max(std::abs(a), std::abs(b))};
    });
}

/// All checks applicable to the model's family.
inline std::vector<CheckReport> run_suite(const EnergyModel& m, const SamplingBox& box,
                                          const CheckOptions& opt = {}) {
    std::vector<CheckReport> out;
    out.push_back(check_reciprocity(m, box, opt));
    if (m.flux_dim() == 2) {
        out.push_back(check_period(m, box, opt));
        out.push_back(check_parity(m, box, opt));
        if (m.kind() == "synrm") {
            SamplingBox even = box;
            even.phi_center.setZero();
            out.push_back(check_synrm_evenness(m, even, opt));
        }
    } else if (m.flux_dim() == 4) {
        out.push_back(check_im_rotation(m, box, opt));
        out.push_back(check_im_reflection(m, box, opt));
    }
    return out;
}

}  // namespace hmotor

// Shared fixtures: the shipped model set and random states inside their boxes.
#pragma once

#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "hmotor/presets.hpp"
#include "hmotor/validate.hpp"

namespace testing_support {

struct NamedModel {
    std::string name;
    std::shared_ptr<const hmotor::EnergyModel> model;
};

inline std::vector<NamedModel> shipped_models() {
    using namespace hmotor;
    return {
        {"linear_ipm", std::make_shared<LinearPmsm>(presets::linear_ipm())},
        {"synrm", std::make_shared<LinearPmsm>(synrm_energy(presets::synrm()))},
        {"saturated_ipm", std::make_shared<SaturatedPmsm>(presets::saturated_ipm())},
        {"saturated_spm", std::make_shared<SaturatedPmsm>(presets::saturated_spm())},
        {"harmonic_ipm", std::make_shared<HarmonicPmsm>(presets::harmonic_ipm())},
        {"induction", std::make_shared<InductionMachine>(presets::induction())},
    };
}

inline hmotor::MachineState random_state(const hmotor::SamplingBox& box, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    hmotor::MachineState s;
    s.theta = box.theta_max * u(rng);
    s.rho = box.rho_max * u(rng);
    s.phi.resize(box.phi_center.size());
    for (Eigen::Index k = 0; k < s.phi.size(); ++k)
        s.phi[k] = box.phi_center[k] + box.phi_half_width[k] * u(rng);
    return s;
}

/// Analytic (dH/dtheta, dH/drho, dH/dphi) packed like numeric_state_gradient.
inline Eigen::VectorXd analytic_state_gradient(const hmotor::EnergyModel& m,
                                               const hmotor::MachineState& s) {
    Eigen::VectorXd g(2 + s.phi.size());
    g << m.d_theta(s.theta, s.rho, s.phi), m.d_rho(s.theta, s.rho, s.phi),
        m.d_flux(s.theta, s.rho, s.phi);
    return g;
}

/// Test double: a base model plus an extra energy term (with its gradient) and
/// an optional non-gradient current offset.
class Faulty final : public hmotor::EnergyModel {
public:
    using Extra = std::function<double(double, double, const Eigen::VectorXd&)>;
    using ExtraGrad = std::function<Eigen::VectorXd(double, double, const Eigen::VectorXd&)>;

    Faulty(std::shared_ptr<const hmotor::EnergyModel> base, Extra e, ExtraGrad de,
           std::function<Eigen::VectorXd(const Eigen::VectorXd&)> current_offset = {})
        : base_(std::move(base)), e_(std::move(e)), de_(std::move(de)), offset_(std::move(current_offset)) {}

    int flux_dim() const override { return base_->flux_dim(); }
    int pole_pairs() const override { return base_->pole_pairs(); }
    std::string_view kind() const override { return "faulty"; }
    double evaluate(double th, double rho, hmotor::FluxRef phi) const override {
        return base_->evaluate(th, rho, phi) + (e_ ? e_(th, rho, phi) : 0.0);
    }
    Eigen::VectorXd d_flux(double th, double rho, hmotor::FluxRef phi) const override {
        Eigen::VectorXd i = base_->d_flux(th, rho, phi);
        if (de_) i += de_(th, rho, phi);
        if (offset_) i += offset_(phi);
        return i;
    }
    double d_theta(double th, double rho, hmotor::FluxRef phi) const override {
        return base_->d_theta(th, rho, phi);
    }
    double d_rho(double th, double rho, hmotor::FluxRef phi) const override {
        return base_->d_rho(th, rho, phi);
    }

private:
    std::shared_ptr<const hmotor::EnergyModel> base_;
    Extra e_;
    ExtraGrad de_;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> offset_;
};

}  // namespace testing_support

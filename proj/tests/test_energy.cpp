#include <gtest/gtest.h>

#include "hmotor/energy.hpp"
#include "hmotor/presets.hpp"
#include "support.hpp"

using namespace hmotor;

namespace {

LinearPmsmParams unit_params() {
    LinearPmsmParams p;
    p.L_d = 0.01;
    p.L_q = 0.02;
    p.phi_M = 0.1;
    p.kinetic_coeff = 1.0;
    p.n_p = 2;
    return p;
}

}  // namespace

TEST(Energy, ExpansionPointHasZeroEnergyAndCurrent) {
    const LinearPmsm m(unit_params());
    const Eigen::Vector2d phi(0.1, 0.0);
    for (double th : {0.0, 1.0, -2.0}) {
        EXPECT_EQ(m.evaluate(th, 0.0, phi), 0.0);
        EXPECT_EQ(currents(m, th, 0.0, phi).norm(), 0.0);
    }
}

TEST(Energy, IpmOneAmpereOffset) {
    const LinearPmsmParams p = presets::linear_ipm();
    EXPECT_NEAR(p.L_d, 0.196 * 0.196 / 4.20, 1e-15);
    EXPECT_NEAR(p.L_d, 9.147e-3, 1e-6);
    const LinearPmsm m(p);
    const Eigen::Vector2d i = currents(m, 0.0, 0.0, Eigen::Vector2d(0.196 + 0.00915, 0.0));
    EXPECT_NEAR(i[0], 1.0, 1e-3);
    EXPECT_EQ(i[1], 0.0);
}

TEST(Energy, DecoupledQuadrature) {
    const LinearPmsmParams p = unit_params();
    const LinearPmsm m(p);
    const Eigen::VectorXd i = currents(m, 0.3, 0.0, Eigen::Vector2d(p.phi_M, 0.05));
    EXPECT_EQ(i[0], 0.0);
    EXPECT_DOUBLE_EQ(i[1], 0.05 / p.L_q);
}

TEST(Energy, RejectsInvalidParameters) {
    LinearPmsmParams p = unit_params();
    p.L_d = 0.0;
    try {
        LinearPmsm m(p);
        FAIL() << "L_d = 0 accepted";
    } catch (const ParameterError& e) {
        EXPECT_EQ(e.key(), "L_d");
    }
    p = unit_params();
    p.L_q = -1.0;
    EXPECT_THROW(LinearPmsm{p}, ParameterError);
    p = unit_params();
    p.kinetic_coeff = 0.0;
    EXPECT_THROW(LinearPmsm{p}, ParameterError);
    EXPECT_THROW(synrm_energy(unit_params()), ParameterError);
}

TEST(Energy, DimensionMismatch) {
    const LinearPmsm m(unit_params());
    EXPECT_THROW(currents(m, 0.0, 0.0, Eigen::Vector3d(0, 0, 0)), DimensionError);
    EXPECT_THROW(torque(m, 0.0, 0.0, Eigen::Vector4d::Zero()), DimensionError);
}

TEST(Energy, SynrmIsEvenAndTorqueMatchesClosedForm) {
    LinearPmsmParams p = unit_params();
    p.phi_M = 0.0;
    const LinearPmsm m = synrm_energy(p);
    EXPECT_EQ(m.kind(), "synrm");
    EXPECT_EQ(currents(m, 0.0, 0.0, Eigen::Vector2d::Zero()).norm(), 0.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    for (int k = 0; k < 200; ++k) {
        const Eigen::Vector2d phi(u(rng), u(rng));
        EXPECT_DOUBLE_EQ(m.evaluate(0.1, 0.2, phi), m.evaluate(0.1, 0.2, -phi));
        const double expected = p.n_p * (1 / p.L_q - 1 / p.L_d) * phi[0] * phi[1];
        EXPECT_NEAR(torque(m, 0.0, 0.0, phi), expected, 1e-12 * std::abs(expected) + 1e-300);
    }
}

TEST(Energy, LinearTorqueClosedForm) {
    const LinearPmsmParams p = presets::linear_ipm();
    const LinearPmsm m(p);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        const Eigen::Vector2d phi(p.phi_M * (1 + u(rng)), p.phi_M * u(rng));
        const double t = torque(m, u(rng), u(rng), phi);
        const double ref = linear_torque_closed_form(p, phi[0], phi[1]);
        EXPECT_NEAR(t, ref, 1e-12 * std::max(std::abs(ref), 1e-3));
    }
    EXPECT_EQ(torque(m, 0.4, 0.0, Eigen::Vector2d(0.3, 0.0)), 0.0);
}

TEST(Energy, Speed) {
    LinearPmsmParams p = unit_params();
    const LinearPmsm m(p);
    EXPECT_EQ(speed(m, 0.0, 0.0, Eigen::Vector2d(0.1, 0.0)), 0.0);
    EXPECT_EQ(speed(m, 0.0, 2.0, Eigen::Vector2d(0.1, 0.0)), 2.0);
}

TEST(Energy, KineticConventions) {
    EXPECT_DOUBLE_EQ(kinetic_coeff(1e-3, 3), 9000.0);
    EXPECT_DOUBLE_EQ(kinetic_coeff(1e-3, 3, KineticConvention::literal), 1.0 / 9e-3);
    EXPECT_THROW(kinetic_coeff(0.0, 3), ParameterError);
    EXPECT_THROW(kinetic_coeff(1.0, 0), ParameterError);
}

TEST(Energy, NumericGradientBasics) {
    const auto sq = [](const Eigen::VectorXd& x) { return x[0] * x[0]; };
    EXPECT_NEAR(numeric_gradient(sq, Eigen::VectorXd::Constant(1, 3.0))[0], 6.0, 1e-6);
    const auto cst = [](const Eigen::VectorXd&) { return 4.0; };
    EXPECT_EQ(numeric_gradient(cst, Eigen::Vector3d(1, 2, 3)).norm(), 0.0);
    const auto xy = [](const Eigen::VectorXd& x) { return x[0] * x[1]; };
    const Eigen::VectorXd g = numeric_gradient(xy, Eigen::Vector2d(2, 5));
    EXPECT_NEAR(g[0], 5.0, 1e-6);
    EXPECT_NEAR(g[1], 2.0, 1e-6);
}

TEST(Energy, AnalyticGradientsMatchFiniteDifferences) {
    for (const auto& nm : testing_support::shipped_models()) {
        const auto& m = *nm.model;
        const SamplingBox box = default_box(m);
        std::mt19937_64 rng(21);
        double worst = 0.0, scale = 0.0;
        for (int k = 0; k < 100; ++k) {
            const MachineState s = testing_support::random_state(box, rng);
            const Eigen::VectorXd a = testing_support::analytic_state_gradient(m, s);
            const Eigen::VectorXd n = numeric_state_gradient(m, s.theta, s.rho, s.phi);
            worst = std::max(worst, (a - n).cwiseAbs().maxCoeff());
            scale = std::max(scale, a.cwiseAbs().maxCoeff());
        }
        EXPECT_LT(worst / scale, 1e-5) << nm.name;
    }
}

TEST(Energy, TorqueMatchesEnergyDifferenceForHarmonicModel) {
    const HarmonicPmsm m(presets::harmonic_ipm());
    const double np = m.pole_pairs();
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double pm = m.model().base.phi_M;
    for (int k = 0; k < 100; ++k) {
        const double th = 3.0 * u(rng);
        const Eigen::Vector2d phi(pm * (1 + 0.5 * u(rng)), 0.5 * pm * u(rng));
        const double h = 1e-6;
        const double dth = (m.evaluate(th + h, 0.0, phi) - m.evaluate(th - h, 0.0, phi)) / (2 * h);
        const Eigen::Vector2d i = numeric_gradient(
            [&](const Eigen::VectorXd& p) { return m.evaluate(th, 0.0, p); }, phi);
        const double ref = -np * dth + np * i.dot(frames::j2() * phi);
        EXPECT_NEAR(torque(m, th, 0.0, phi), ref, 1e-6 * std::max(1.0, std::abs(ref)));
    }
}

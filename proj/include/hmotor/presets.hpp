// Ready-made machines used by the shipped configs, the tests and the default
// validation boxes. Magnetic data of the IPM and SPM come from flux-current
// measurements on two industrial drives; the harmonic and induction machines
// are representative values of the same size class.
#pragma once

#include "hmotor/harmonics.hpp"
#include "hmotor/induction.hpp"
#include "hmotor/saturation.hpp"

namespace hmotor::presets {

/// Rotor inertia assumed for every preset [kg m^2].
inline constexpr double kInertia = 1e-3;

/// Unsaturated part of the IPM: L_d = phi_M^2 / 4.20 A*Wb, L_q = phi_M^2 / 2.83 A*Wb.
inline LinearPmsmParams linear_ipm() {
    LinearPmsmParams p;
    p.phi_M = reference::kIpmPhiM;
    p.L_d = p.phi_M * p.phi_M / reference::kIpmScaled[0];
    p.L_q = p.phi_M * p.phi_M / reference::kIpmScaled[1];
    p.n_p = reference::kIpmPolePairs;
    p.R_s = reference::kIpmRs;
    p.kinetic_coeff = kinetic_coeff(kInertia, p.n_p);
    return p;
}

/// Reluctance machine with the IPM inductances and no magnet.
inline LinearPmsmParams synrm() {
    LinearPmsmParams p = linear_ipm();
    p.phi_M = 0.0;
    return p;
}

inline SaturationCoefficients saturated_ipm() {
    return reference::ipm(kinetic_coeff(kInertia, reference::kIpmPolePairs));
}

inline SaturationCoefficients saturated_spm() {
    return reference::spm(kinetic_coeff(kInertia, reference::kSpmPolePairs));
}

/// Saturated IPM with 6th and 12th order slotting harmonics and a 0-axis flux.
inline HarmonicModel harmonic_ipm() {
    HarmonicModel m;
    m.base = saturated_ipm();
    HarmonicTerm h6;
    h6.k = 1;
    h6.a.set(0, 0, 3e-3).set(1, 0, 1e-2).set(0, 2, 5e-2);
    h6.b.set(0, 1, 4e-3).set(1, 1, 2e-2);
    HarmonicTerm h12;
    h12.k = 2;
    h12.a.set(0, 0, 5e-4).set(2, 0, 4e-3);
    h12.b.set(0, 1, 1e-3);
    m.terms = {h6, h12};
    m.zero_axis = std::vector<ZeroAxisTerm>{{1, 4e-3, 0.0}, {3, 0.0, 1e-3}};
    return m;
}

/// 4-pole, 1.5 kW class squirrel-cage machine.
inline ImParams induction() {
    ImParams p;
    p.L_m = 0.16;
    p.L_s = 0.168;
    p.L_r = 0.168;
    p.R_s = 1.5;
    p.R_r = 1.2;
    p.n_p = 2;
    p.kinetic_coeff = kinetic_coeff(kInertia * 5.0, p.n_p);
    return p;
}

}  // namespace hmotor::presets

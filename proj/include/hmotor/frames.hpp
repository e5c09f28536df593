// Three-phase reference frames: abc, alpha-beta-0 and dq0.
//
// Power-invariant convention throughout: the Clarke matrix Q is orthogonal,
// so norms (and therefore powers u^T i) are preserved between frames.
#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace hmotor::frames {

using Mat3 = Eigen::Matrix3d;
using Mat2 = Eigen::Matrix2d;
using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

/// Physical phase quantities (currents, voltages or fluxes) in the abc frame.
struct PhaseTriple {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    [[nodiscard]] Vec3 vec() const { return {a, b, c}; }
    static PhaseTriple from(const Vec3& v) { return {v[0], v[1], v[2]}; }
    [[nodiscard]] bool balanced(double tol = 1e-12) const {
        return std::abs(a + b + c) <= tol * std::max(1.0, vec().norm());
    }
};

/// Stationary orthogonal frame; `zero` carries the common-mode component.
struct OrthTriple {
    double alpha = 0.0;
    double beta = 0.0;
    double zero = 0.0;

    [[nodiscard]] Vec3 vec() const { return {alpha, beta, zero}; }
    static OrthTriple from(const Vec3& v) { return {v[0], v[1], v[2]}; }
};

/// Rotating frame quantity together with the electrical angle it is expressed at.
struct RotTriple {
    double d = 0.0;
    double q = 0.0;
    double zero = 0.0;
    double theta = 0.0;

    [[nodiscard]] Vec3 vec() const { return {d, q, zero}; }
    [[nodiscard]] Vec2 dq() const { return {d, q}; }
    static RotTriple from(const Vec3& v, double theta) { return {v[0], v[1], v[2], theta}; }
};

// -----------------------------------------------------------------------------
// Constant and angle-dependent matrices
// -----------------------------------------------------------------------------

/// Clarke matrix, sqrt(2/3) * [[1, -1/2, -1/2], [0, sqrt3/2, -sqrt3/2], [1/sqrt2 x3]].
inline Mat3 clarke_matrix() {
    const double s3 = std::sqrt(3.0);
    const double is2 = 1.0 / std::sqrt(2.0);
    Mat3 q;
    q << 1.0, -0.5, -0.5,
         0.0, s3 / 2.0, -s3 / 2.0,
         is2, is2, is2;
    return std::sqrt(2.0 / 3.0) * q;
}

/// Planar rotation by theta about the 0-axis.
inline Mat3 rotation(double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    Mat3 r;
    r << c, -s, 0.0,
         s, c, 0.0,
         0.0, 0.0, 1.0;
    return r;
}

/// dR/dtheta, used for the J3 identity.
inline Mat3 rotation_derivative(double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    Mat3 r;
    r << -s, -c, 0.0,
         c, -s, 0.0,
         0.0, 0.0, 0.0;
    return r;
}

/// Combined abc -> rotating transform. Rows use theta - 2pi/3 and theta - 4pi/3.
inline Mat3 k_matrix(double theta) {
    constexpr double third = 2.0 * std::numbers::pi / 3.0;
    const double is2 = 1.0 / std::sqrt(2.0);
    Mat3 k;
    k << std::cos(theta), std::cos(theta - third), std::cos(theta - 2.0 * third),
         -std::sin(theta), -std::sin(theta - third), -std::sin(theta - 2.0 * third),
         is2, is2, is2;
    return std::sqrt(2.0 / 3.0) * k;
}

/// Circular phase permutation (a, b, c) -> (b, c, a).
inline Mat3 permutation_matrix() {
    Mat3 p;
    p << 0, 1, 0,
         0, 0, 1,
         1, 0, 0;
    return p;
}

/// Swap of phases b and c.
inline Mat3 orientation_matrix() {
    Mat3 o;
    o << 1, 0, 0,
         0, 0, 1,
         0, 1, 0;
    return o;
}

inline Mat3 j3() {
    Mat3 j;
    j << 0, -1, 0,
         1, 0, 0,
         0, 0, 0;
    return j;
}

/// Quarter-turn skew matrix of the dq plane.
inline Mat2 j2() {
    Mat2 j;
    j << 0, -1,
         1, 0;
    return j;
}

/// Reflection diag(1, -1).
inline Mat2 s2() {
    Mat2 s;
    s << 1, 0,
         0, -1;
    return s;
}

inline Mat2 rotation2(double eta) {
    const double c = std::cos(eta);
    const double s = std::sin(eta);
    Mat2 r;
    r << c, -s,
         s, c;
    return r;
}

// -----------------------------------------------------------------------------
// Transforms
// -----------------------------------------------------------------------------

inline OrthTriple clarke(const PhaseTriple& x) { return OrthTriple::from(clarke_matrix() * x.vec()); }

inline PhaseTriple inv_clarke(const OrthTriple& y) {
    return PhaseTriple::from(clarke_matrix().transpose() * y.vec());
}

inline RotTriple park(const OrthTriple& y, double theta) {
    return RotTriple::from(rotation(theta).transpose() * y.vec(), theta);
}

inline OrthTriple inv_park(const RotTriple& z, double theta) {
    return OrthTriple::from(rotation(theta) * z.vec());
}

inline RotTriple k_transform(const PhaseTriple& x, double theta) {
    return RotTriple::from(k_matrix(theta) * x.vec(), theta);
}

/// Q P Q^T: the phase permutation seen in the alpha-beta-0 frame.
inline Mat3 conjugated_permutation() {
    const Mat3 q = clarke_matrix();
    return q * permutation_matrix() * q.transpose();
}

/// Q O Q^T: the b/c swap seen in the alpha-beta-0 frame.
inline Mat3 conjugated_orientation() {
    const Mat3 q = clarke_matrix();
    return q * orientation_matrix() * q.transpose();
}

// 2D helpers used by the dq models (0-axis decoupled).

inline Vec2 park2(const Vec2& ab, double theta) { return rotation2(theta).transpose() * ab; }
inline Vec2 inv_park2(const Vec2& dq, double theta) { return rotation2(theta) * dq; }

/// dq -> abc for a star-connected (zero 0-axis) quantity.
inline PhaseTriple dq_to_abc(const Vec2& dq, double theta) {
    return inv_clarke(inv_park(RotTriple{dq[0], dq[1], 0.0, theta}, theta));
}

}  // namespace hmotor::frames

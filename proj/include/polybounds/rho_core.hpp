#pragma once

// Complex basis algebra for planar elasticity.
//
// A 2x2 matrix A is written as A = a1 r1 + a2 r2 + a3 r3 + a4 r4 with
//   r1 = 1/2 [[1, i], [ i,-1]]    r2 = 1/2 [[1,-i], [-i,-1]]
//   r3 = 1/2 [[1, i], [-i, 1]]    r4 = 1/2 [[1,-i], [ i, 1]]
// which is orthonormal for <A,B> = sum conj(A_ij) B_ij.  In these
// coordinates a rotation of the material acts diagonally, a symmetric
// matrix has a3 = a4 and a real matrix has a2 = conj(a1), a4 = conj(a3).

#include <array>
#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "errors.hpp"

namespace polybounds {

using cplx = std::complex<double>;
using Vec4 = Eigen::Matrix<cplx, 4, 1>;
using Mat4 = Eigen::Matrix<cplx, 4, 4>;
using Vec3c = Eigen::Matrix<cplx, 3, 1>;
using Mat3c = Eigen::Matrix<cplx, 3, 3>;
using Mat43 = Eigen::Matrix<cplx, 4, 3>;

inline constexpr cplx kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

/// Coefficients of a 2x2 complex matrix in the rotation basis.
using RhoVector = Vec4;

inline RhoVector identity_vector() { return RhoVector(0.0, 0.0, 1.0, 1.0); }

inline bool is_symmetric(const RhoVector& a, double tol = 1e-10)
{
    return std::abs(a(2) - a(3)) <= tol * std::max(1.0, a.norm());
}

inline bool is_real_matrix(const RhoVector& a, double tol = 1e-10)
{
    double s = tol * std::max(1.0, a.norm());
    return std::abs(a(1) - std::conj(a(0))) <= s && std::abs(a(3) - std::conj(a(2))) <= s;
}

/// The four basis matrices.
inline const std::array<Eigen::Matrix2cd, 4>& rho_basis()
{
    static const std::array<Eigen::Matrix2cd, 4> b = [] {
        std::array<Eigen::Matrix2cd, 4> r;
        r[0] << 0.5, 0.5 * kI, 0.5 * kI, -0.5;
        r[1] << 0.5, -0.5 * kI, -0.5 * kI, -0.5;
        r[2] << 0.5, 0.5 * kI, -0.5 * kI, 0.5;
        r[3] << 0.5, -0.5 * kI, 0.5 * kI, 0.5;
        return r;
    }();
    return b;
}

/// Column k holds basis matrix k flattened row-major (entry (i,j) -> 2i+j).
/// The matrix is unitary.
inline Mat4 basis_change()
{
    Mat4 q;
    for (int k = 0; k < 4; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) q(2 * i + j, k) = rho_basis()[k](i, j);
    return q;
}

inline RhoVector to_rho(const Eigen::Matrix2cd& A)
{
    RhoVector a;
    for (int k = 0; k < 4; ++k) a(k) = (rho_basis()[k].conjugate().cwiseProduct(A)).sum();
    return a;
}

inline Eigen::Matrix2cd from_rho(const RhoVector& a)
{
    Eigen::Matrix2cd A = Eigen::Matrix2cd::Zero();
    for (int k = 0; k < 4; ++k) A += a(k) * rho_basis()[k];
    return A;
}

/// Fourth-order planar tensor acting on basis coefficients.
///
/// Only Hermitian structure is enforced on construction because the
/// translation tensors are Hermitian but do not annihilate the
/// antisymmetric part.  Elasticity and compliance tensors should be built
/// through RhoTensor::elastic which also checks the column structure and
/// the reality condition.
class RhoTensor {
public:
    RhoTensor() : m_(Mat4::Zero()) {}

    explicit RhoTensor(const Mat4& m, double tol = 1e-10) : m_(m)
    {
        if (!is_hermitian(tol))
            throw InvalidTensor("tensor is not Hermitian in the rotation basis");
    }

    static RhoTensor elastic(const Mat4& m, double tol = 1e-10)
    {
        RhoTensor t(m, tol);
        if (!t.annihilates_antisymmetric(tol))
            throw InvalidTensor("columns 3 and 4 differ: tensor does not annihilate the antisymmetric part");
        if (!t.is_real_structured(tol))
            throw InvalidTensor("tensor is not the image of a real Cartesian tensor");
        return t;
    }

    const Mat4& m() const { return m_; }
    cplx operator()(int i, int j) const { return m_(i, j); }
    RhoVector operator*(const RhoVector& v) const { return m_ * v; }

    double scale() const { return std::max(1.0, m_.norm()); }

    bool is_hermitian(double tol = 1e-10) const
    {
        return (m_ - m_.adjoint()).norm() <= tol * scale();
    }
    bool annihilates_antisymmetric(double tol = 1e-10) const
    {
        return (m_.col(2) - m_.col(3)).norm() <= tol * scale() &&
               (m_.row(2) - m_.row(3)).norm() <= tol * scale();
    }
    bool is_real_structured(double tol = 1e-10) const
    {
        Mat4 p = swap_permutation();
        return (p * m_.conjugate() * p - m_).norm() <= tol * scale();
    }

    /// Permutation exchanging coefficients 1<->2 and 3<->4.
    static Mat4 swap_permutation()
    {
        Mat4 p = Mat4::Zero();
        p(0, 1) = p(1, 0) = p(2, 3) = p(3, 2) = 1.0;
        return p;
    }

private:
    Mat4 m_;
};

// ---------------------------------------------------------------------------
// Cartesian input

/// Independent components of a planar elasticity tensor with the usual
/// major and minor symmetries.
struct VoigtTensor {
    double c1111 = 0, c1122 = 0, c1112 = 0, c2222 = 0, c2212 = 0, c1212 = 0;

    /// Quadratic form on (e11, e22, sqrt2 e12); positive definite iff the
    /// tensor is positive definite on symmetric matrices.
    Eigen::Matrix3d mandel() const
    {
        const double s = std::sqrt(2.0);
        Eigen::Matrix3d k;
        k << c1111, c1122, s * c1112,
             c1122, c2222, s * c2212,
             s * c1112, s * c2212, 2.0 * c1212;
        return k;
    }

    bool positive_definite() const
    {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(mandel(), Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff() > 0.0;
    }

    /// Full tensor as a 4x4 matrix over flattened index pairs (ij -> 2i+j).
    Eigen::Matrix4d cartesian() const
    {
        Eigen::Matrix4d c = Eigen::Matrix4d::Zero();
        auto put = [&](int i, int j, int k, int l, double v) {
            for (auto [a, b] : {std::pair{i, j}, std::pair{j, i}})
                for (auto [p, q] : {std::pair{k, l}, std::pair{l, k}}) {
                    c(2 * a + b, 2 * p + q) = v;
                    c(2 * p + q, 2 * a + b) = v;
                }
        };
        put(0, 0, 0, 0, c1111);
        put(0, 0, 1, 1, c1122);
        put(0, 0, 0, 1, c1112);
        put(1, 1, 1, 1, c2222);
        put(1, 1, 0, 1, c2212);
        put(0, 1, 0, 1, c1212);
        return c;
    }

    static VoigtTensor isotropic(double kappa, double mu)
    {
        // planar bulk modulus: sigma = 2 kappa (tr e / 2) I + 2 mu dev(e)
        return {kappa + mu, kappa - mu, 0.0, kappa + mu, 0.0, mu};
    }
};

inline RhoTensor voigt_to_rho(const VoigtTensor& v)
{
    Mat4 q = basis_change();
    Mat4 m = q.adjoint() * v.cartesian().cast<cplx>() * q;
    return RhoTensor::elastic(m);
}

/// Cartesian 4x4 (flattened index pairs) of a tensor given in the basis.
inline Eigen::Matrix4cd rho_to_cartesian(const RhoTensor& t)
{
    Mat4 q = basis_change();
    return q * t.m() * q.adjoint();
}

inline VoigtTensor rho_to_voigt(const RhoTensor& t)
{
    Eigen::Matrix4d c = rho_to_cartesian(t).real();
    return {c(0, 0), c(0, 3), c(0, 1), c(3, 3), c(3, 1), c(1, 1)};
}

// ---------------------------------------------------------------------------
// Rotations and reflections

/// Diagonal action of a rotation on basis coefficients.  rotate_tensor with
/// a positive angle corresponds to turning the material clockwise by theta.
inline Vec4 rotation_diagonal(double theta)
{
    return Vec4(std::exp(2.0 * kI * theta), std::exp(-2.0 * kI * theta), 1.0, 1.0);
}

inline RhoVector rotate_vector(const RhoVector& v, double theta)
{
    return rotation_diagonal(theta).cwiseProduct(v);
}

inline RhoTensor rotate_tensor(const RhoTensor& c, double theta)
{
    Vec4 r = rotation_diagonal(theta);
    Mat4 m = r.asDiagonal() * c.m() * r.conjugate().asDiagonal();
    return RhoTensor(m);
}

/// Reflection of the material about the x1 axis.  For tensors with the
/// reality structure this is the entrywise conjugate (equivalently the
/// 1<->2, 3<->4 index swap); field coefficients transform by conjugation.
inline RhoTensor mirror_tensor(const RhoTensor& c) { return RhoTensor(Mat4(c.m().conjugate())); }

inline RhoVector mirror_vector(const RhoVector& v) { return v.conjugate(); }

// ---------------------------------------------------------------------------
// Symmetric subspace

/// Orthonormal basis of the symmetric subspace: e1, e2, (e3+e4)/sqrt2.
inline Mat43 symmetric_basis()
{
    Mat43 b = Mat43::Zero();
    b(0, 0) = 1.0;
    b(1, 1) = 1.0;
    b(2, 2) = b(3, 2) = 1.0 / std::sqrt(2.0);
    return b;
}

inline Mat3c restrict_to_symmetric(const Mat4& m)
{
    Mat43 b = symmetric_basis();
    return b.adjoint() * m * b;
}

inline Mat4 embed_symmetric(const Mat3c& r)
{
    Mat43 b = symmetric_basis();
    return b * r * b.adjoint();
}

/// Smallest eigenvalue of the Hermitian form restricted to symmetric matrices.
inline double min_eig_symmetric(const Mat4& m)
{
    Mat3c r = restrict_to_symmetric(m);
    Mat3c h = 0.5 * (r + r.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat3c> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

inline bool positive_definite_on_symmetric(const RhoTensor& c, double tol = 0.0)
{
    return min_eig_symmetric(c.m()) > tol * c.scale();
}

/// Inverse on the space of symmetric matrices (compliance from stiffness
/// and back).
inline RhoTensor invert_on_symmetric(const RhoTensor& c)
{
    Mat3c r = restrict_to_symmetric(c.m());
    Mat3c h = 0.5 * (r + r.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat3c> es(h);
    double big = es.eigenvalues().cwiseAbs().maxCoeff();
    double small = es.eigenvalues().cwiseAbs().minCoeff();
    if (!(big > 0.0) || small <= 1e-14 * big)
        throw SingularOnSymmetric("restricted 3x3 system is singular");
    Mat3c inv = es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
                es.eigenvectors().adjoint();
    return RhoTensor(embed_symmetric(inv));
}

// ---------------------------------------------------------------------------
// Translations and jump templates

inline RhoTensor translation_T(double t1, double t2)
{
    return RhoTensor(Mat4(Vec4(t1, t2, -t1, -t2).asDiagonal()));
}

inline RhoTensor translation_T0(double t0)
{
    return RhoTensor(Mat4(Vec4(-t0, -t0, t0, t0).asDiagonal()));
}

/// Divergence-free Fourier form i(g conj(k), -d k, -g k, d conj(k)).
inline RhoVector divergence_free_form(cplx gamma, cplx delta, cplx k)
{
    return kI * RhoVector(gamma * std::conj(k), -delta * k, -gamma * k, delta * std::conj(k));
}

/// Gradient Fourier form (a conj(k), b k, a k, b conj(k)).
inline RhoVector gradient_form(cplx alpha, cplx beta, cplx k)
{
    return RhoVector(alpha * std::conj(k), beta * k, alpha * k, beta * std::conj(k));
}

/// Recovers (alpha, beta) if v has the gradient form for wavevector k,
/// returning the residual of the best fit.
inline double gradient_form_residual(const RhoVector& v, cplx k)
{
    cplx alpha = (v(0) * k + v(2) * std::conj(k)) / (2.0 * std::norm(k));
    cplx beta = (v(1) * std::conj(k) + v(3) * k) / (2.0 * std::norm(k));
    return (v - gradient_form(alpha, beta, k)).norm();
}

inline double divergence_free_form_residual(const RhoVector& v, cplx k)
{
    RhoVector u = -kI * v; // (g conj k, -d k, -g k, d conj k)
    cplx gamma = (u(0) * k - u(2) * std::conj(k)) / (2.0 * std::norm(k));
    cplx delta = (-u(1) * std::conj(k) + u(3) * k) / (2.0 * std::norm(k));
    return (v - divergence_free_form(gamma, delta, k)).norm();
}

enum class JumpKind { stress, displacement, strain };

/// Whether d is an admissible jump across an interface with normal (0,1).
inline bool check_jump(JumpKind kind, const RhoVector& d, double tol = 1e-9)
{
    double s = tol * std::max(1.0, d.norm());
    switch (kind) {
    case JumpKind::stress:
        return std::abs(d(0) - d(3)) <= s && std::abs(d(1) - d(3)) <= s && std::abs(d(2) - d(3)) <= s;
    case JumpKind::displacement:
        return std::abs(d(2) + d(0)) <= s && std::abs(d(3) + d(1)) <= s;
    case JumpKind::strain:
        return std::abs(d(2) - d(3)) <= s && std::abs(d(0) + d(1) + 2.0 * d(2)) <= s;
    }
    return false;
}

} // namespace polybounds

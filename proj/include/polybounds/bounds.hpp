#pragma once

// Translation bounds on the bulk and shear moduli of planar polycrystals.
//
// Bulk:  1/kappa- = Tr(S0 I)  and  kappa+ = 1/(2 t0) with t0 the largest
//        translation for which S0 - T0(t0) stays positive semidefinite.
// Shear: the admissible translation sets {(t1,t2) : S0 - T >= 0} and
//        {(t1,t2) : C0 - T >= 0} are convex; mu+ = 1/(2 t1) and mu- = t1/2
//        where t1 is maximal over the respective set.

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "rho_core.hpp"

namespace polybounds {

struct BulkBounds {
    double k = 0;            // Tr(e), e = S0 I
    double kappa_minus = 0;  // 1/k
    double kappa_plus = 0;   // 1/(2 t0)
    double t0 = 0;
    RhoVector e = RhoVector::Zero();
    RhoVector c = RhoVector::Zero(); // null vector of I - C0 T0, c3 = c4 = 1
    double residual_c = 0;
};

struct ShearBound {
    double t1 = 0, t2 = 0;
    double mu = 0;
    RhoVector vector = RhoVector::Zero(); // v (upper) or w (lower), in the rotated frame
    double normalize_angle = 0;
    RhoTensor rotated_crystal;
    bool normalized = false; // false when v3 (resp. w4) vanishes
    double residual = 0;     // eigen-relation residual in the rotated frame
    double min_eig = 0;      // smallest eigenvalue of the positivity condition at (t1,t2)

    /// The normalized vector; raises when normalization was impossible.
    const RhoVector& require_vector() const
    {
        if (!normalized)
            throw NormalizationFailure("optimal shear vector has a vanishing normalizing component");
        return vector;
    }
};

struct BoundsRectangle {
    BulkBounds bulk;
    ShearBound upper; // mu+, compliance side
    ShearBound lower; // mu-, stiffness side
    double lambda = 0; // k + t1 + t2 (upper shear translation)
    double eta = 0;    // k + 1/t1 + 1/t2 (lower shear translation)
    double alpha1 = 0; // (t0 + t1)/(2 t0 + t1 + t2)
    double beta1 = 0;  // t2 (1 + t0 t1)/(t1 + t2 + 2 t0 t1 t2), lower translation
    double t_ratio = 0; // t1/t2 of the lower translation
    bool lambda_nonnegative = true;
    bool lower_denominator_nonnegative = true;
    int rays = 0;

    double kappa_minus() const { return bulk.kappa_minus; }
    double kappa_plus() const { return bulk.kappa_plus; }
    double mu_minus() const { return lower.mu; }
    double mu_plus() const { return upper.mu; }
};

enum class CurveMode { compliance, stiffness };

namespace detail {

inline Eigen::MatrixXcd inv_sqrt_hermitian(const Eigen::MatrixXcd& a)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (a + a.adjoint()));
    Eigen::VectorXd w = es.eigenvalues();
    if (w.minCoeff() <= 0.0)
        throw SingularOnSymmetric("reference form for ray tracing is not positive definite");
    return es.eigenvectors() * w.cwiseSqrt().cwiseInverse().asDiagonal() *
           es.eigenvectors().adjoint();
}

/// Eigenvector of the eigenvalue of smallest magnitude of a Hermitian matrix.
inline Eigen::VectorXcd hermitian_null_vector(const Eigen::MatrixXcd& a, double* eig = nullptr)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (a + a.adjoint()));
    Eigen::Index j = 0;
    es.eigenvalues().cwiseAbs().minCoeff(&j);
    if (eig) *eig = es.eigenvalues()(j);
    return es.eigenvectors().col(j);
}

inline double min_eig(const Eigen::MatrixXcd& a)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

/// Boundary of {p0 + r d : A - M(r d) >= 0} along rays.  Since the set is
/// convex and p0 interior, the first boundary crossing along direction d
/// sits at r = 1/lambda_max(A^-1/2 M(d) A^-1/2), no bracketing required.
struct RayTracer {
    Eigen::MatrixXcd a_inv_sqrt;
    Eigen::Vector2d p0 = Eigen::Vector2d::Zero();
    CurveMode mode = CurveMode::compliance;
    Mat3c sr;  // compliance restricted to symmetric matrices
    Mat4 c0;   // stiffness

    static RayTracer make(const RhoTensor& c0, CurveMode mode)
    {
        RayTracer r;
        r.mode = mode;
        r.c0 = c0.m();
        Mat3c cr = restrict_to_symmetric(c0.m());
        r.sr = restrict_to_symmetric(invert_on_symmetric(c0).m());
        if (mode == CurveMode::compliance) {
            r.a_inv_sqrt = inv_sqrt_hermitian(r.sr);
        } else {
            // The origin lies on the boundary here (the antisymmetric
            // direction is only marginally stable), so trace from a point
            // strictly inside.
            Eigen::SelfAdjointEigenSolver<Mat3c> es(0.5 * (cr + cr.adjoint()), Eigen::EigenvaluesOnly);
            double c = es.eigenvalues()(0);
            r.p0 = Eigen::Vector2d(c / 2, c / 2);
            r.a_inv_sqrt = inv_sqrt_hermitian(r.c0 - translation_T(c / 2, c / 2).m());
        }
        return r;
    }

    Eigen::MatrixXcd translation(double t1, double t2) const
    {
        if (mode == CurveMode::compliance)
            return Mat3c(Eigen::Vector3cd(t1, t2, -(t1 + t2) / 2).asDiagonal());
        return translation_T(t1, t2).m();
    }

    /// The form that must stay positive semidefinite.
    Eigen::MatrixXcd form(double t1, double t2) const
    {
        if (mode == CurveMode::compliance) return sr - translation(t1, t2);
        return c0 - translation(t1, t2);
    }

    double radius(double angle) const
    {
        Eigen::MatrixXcd m = a_inv_sqrt * translation(std::cos(angle), std::sin(angle)) * a_inv_sqrt;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
        double top = es.eigenvalues().maxCoeff();
        if (!(top > 0.0)) return std::numeric_limits<double>::infinity();
        return 1.0 / top;
    }

    Eigen::Vector2d point(double angle) const
    {
        return p0 + radius(angle) * Eigen::Vector2d(std::cos(angle), std::sin(angle));
    }

    /// Null vector of the positivity form at a boundary point, as a full
    /// four-component field.
    RhoVector null_vector(const Eigen::Vector2d& p, double* eig = nullptr) const
    {
        Eigen::VectorXcd u = hermitian_null_vector(form(p(0), p(1)), eig);
        if (mode == CurveMode::compliance) return symmetric_basis() * u;
        return u;
    }

    double angle_of(const Eigen::Vector2d& p) const
    {
        return std::atan2(p(1) - p0(1), p(0) - p0(0));
    }
};

/// Point of the traced boundary with maximal t1.  Coarse ray sampling,
/// Brent refinement of the ray angle and a final root solve of the
/// stationarity condition |x2| = |x4| on the null vector.
inline Eigen::Vector2d max_t1_point(const RayTracer& tr, int rays)
{
    const double h = 2.0 * kPi / rays;
    int best = 0;
    Eigen::Vector2d bp = tr.point(0.0);
    for (int i = 1; i < rays; ++i) {
        Eigen::Vector2d p = tr.point(i * h);
        double scale = std::max(1.0, std::abs(bp(0)));
        if (p(0) > bp(0) + 1e-14 * scale ||
            (std::abs(p(0) - bp(0)) <= 1e-14 * scale && p(1) > bp(1))) {
            best = i;
            bp = p;
        }
    }
    double a0 = best * h;
    auto neg_t1 = [&](double a) { return -tr.point(a)(0); };
    auto [amin, fmin] = boost::math::tools::brent_find_minima(neg_t1, a0 - h, a0 + h, 50);
    Eigen::Vector2d pt = -fmin <= bp(0) ? bp : tr.point(amin);
    double acenter = -fmin <= bp(0) ? a0 : amin;

    auto g = [&](double a) {
        RhoVector x = tr.null_vector(tr.point(a));
        return std::norm(x(1)) - std::norm(x(3));
    };
    double lo = acenter - h, hi = acenter + h;
    double glo = g(lo), ghi = g(hi);
    if (glo * ghi < 0.0) {
        boost::uintmax_t iters = 200;
        auto tol = [](double x, double y) { return std::abs(x - y) <= 1e-15 * std::max(1.0, std::abs(x)); };
        auto r = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi, tol, iters);
        Eigen::Vector2d polished = tr.point(0.5 * (r.first + r.second));
        // Keep the polished point only if it does not lose t1 noticeably.
        if (polished(0) >= pt(0) - 1e-10 * std::max(1.0, std::abs(pt(0)))) pt = polished;
    }
    return pt;
}

} // namespace detail

/// Reuss-Hill lower bulk bound: returns (k, e) with e = S0 I, k = e3 + e4.
inline std::pair<double, RhoVector> bulk_lower(const RhoTensor& c0)
{
    RhoTensor s0 = invert_on_symmetric(c0);
    RhoVector e = s0 * identity_vector();
    return {(e(2) + e(3)).real(), e};
}

/// Upper bulk bound: returns (t0, c) with t0 the smallest positive root of
/// det(I - C0 T0(t)) on symmetric matrices and c the real null vector
/// normalized to c3 = c4 = 1.
inline std::pair<double, RhoVector> bulk_upper(const RhoTensor& c0)
{
    Mat3c cr = restrict_to_symmetric(c0.m());
    Eigen::SelfAdjointEigenSolver<Mat3c> ec(0.5 * (cr + cr.adjoint()));
    Mat3c half = ec.eigenvectors() * ec.eigenvalues().cwiseSqrt().asDiagonal() * ec.eigenvectors().adjoint();
    Mat3c d = Mat3c(Eigen::Vector3cd(-1.0, -1.0, 1.0).asDiagonal());
    Mat3c h = half * d * half;
    Eigen::SelfAdjointEigenSolver<Mat3c> es(0.5 * (h + h.adjoint()));
    double top = es.eigenvalues()(2);
    if (!(top > 0.0)) throw SingularOnSymmetric("no positive root for the bulk translation");
    double t0 = 1.0 / top;
    Vec3c u = half * es.eigenvectors().col(2);
    RhoVector c = symmetric_basis() * u;
    if (std::abs(c(2)) <= 1e-10 * c.norm())
        throw NormalizationFailure("bulk null vector has c3 = 0");
    c /= c(2);
    return {t0, c};
}

inline BulkBounds bulk_bounds(const RhoTensor& c0)
{
    BulkBounds b;
    auto [k, e] = bulk_lower(c0);
    auto [t0, c] = bulk_upper(c0);
    b.k = k;
    b.e = e;
    b.kappa_minus = 1.0 / k;
    b.t0 = t0;
    b.kappa_plus = 1.0 / (2.0 * t0);
    b.c = c;
    b.residual_c = (c - c0 * (translation_T0(t0) * c)).norm();
    return b;
}

/// Samples of the boundary of the admissible translation set, ordered by ray
/// angle from the tracing origin.
inline std::vector<std::pair<double, double>> trace_translation_curve(const RhoTensor& c0, CurveMode mode,
                                                                      int rays = 720)
{
    auto tr = detail::RayTracer::make(c0, mode);
    std::vector<std::pair<double, double>> out;
    out.reserve(rays);
    for (int i = 0; i < rays; ++i) {
        Eigen::Vector2d p = tr.point(2.0 * kPi * i / rays);
        out.emplace_back(p(0), p(1));
    }
    return out;
}

/// Upper shear bound mu+ = 1/(2 t1).  The returned vector v solves
/// v = C T v and is normalized to v3 = v4 = 1, v2 = -1 after rotating the
/// crystal by normalize_angle.
inline ShearBound shear_upper(const RhoTensor& c0, int rays = 720)
{
    auto tr = detail::RayTracer::make(c0, CurveMode::compliance);
    Eigen::Vector2d p = detail::max_t1_point(tr, rays);
    ShearBound sb;
    sb.t1 = p(0);
    sb.t2 = p(1);
    sb.mu = 1.0 / (2.0 * sb.t1);
    RhoVector v = tr.null_vector(p, &sb.min_eig);
    sb.rotated_crystal = c0;
    sb.vector = v;
    if (std::abs(v(2)) > 1e-8 * v.norm()) {
        v /= v(2);
        sb.normalize_angle = (std::arg(v(1)) - kPi) / 2.0;
        sb.vector = rotate_vector(v, sb.normalize_angle);
        sb.rotated_crystal = rotate_tensor(c0, sb.normalize_angle);
        sb.normalized = true;
    }
    RhoVector tv = translation_T(sb.t1, sb.t2) * sb.vector;
    sb.residual = (sb.vector - sb.rotated_crystal * tv).norm() / std::max(1.0, sb.vector.norm());
    return sb;
}

/// Lower shear bound mu- = t1/2.  The returned vector w solves C w = T w
/// and is normalized to w4 = 1 (so w3 = t2/t1) with w2 = 1 after rotating
/// the crystal by normalize_angle.
inline ShearBound shear_lower(const RhoTensor& c0, int rays = 720)
{
    auto tr = detail::RayTracer::make(c0, CurveMode::stiffness);
    Eigen::Vector2d p = detail::max_t1_point(tr, rays);
    ShearBound sb;
    sb.t1 = p(0);
    sb.t2 = p(1);
    sb.mu = sb.t1 / 2.0;
    RhoVector w = tr.null_vector(p, &sb.min_eig);
    sb.rotated_crystal = c0;
    sb.vector = w;
    if (std::abs(w(3)) > 1e-8 * w.norm()) {
        w /= w(3);
        sb.normalize_angle = std::arg(w(1)) / 2.0;
        sb.vector = rotate_vector(w, sb.normalize_angle);
        sb.rotated_crystal = rotate_tensor(c0, sb.normalize_angle);
        sb.normalized = true;
    }
    RhoVector tw = translation_T(sb.t1, sb.t2) * sb.vector;
    sb.residual = (sb.rotated_crystal * sb.vector - tw).norm() / std::max(1.0, sb.vector.norm());
    return sb;
}

inline BoundsRectangle rectangle(const RhoTensor& c0, int rays = 720)
{
    if (!positive_definite_on_symmetric(c0))
        throw InvalidTensor("crystal is not positive definite on symmetric matrices");
    BoundsRectangle r;
    r.rays = rays;
    r.bulk = bulk_bounds(c0);
    r.upper = shear_upper(c0, rays);
    r.lower = shear_lower(c0, rays);
    const double t0 = r.bulk.t0;
    const double t1 = r.upper.t1, t2 = r.upper.t2;
    const double s1 = r.lower.t1, s2 = r.lower.t2;
    r.lambda = r.bulk.k + t1 + t2;
    r.eta = r.bulk.k + 1.0 / s1 + 1.0 / s2;
    r.alpha1 = (t0 + t1) / (2.0 * t0 + t1 + t2);
    double dl = s1 + s2 + 2.0 * t0 * s1 * s2;
    r.beta1 = s2 * (1.0 + t0 * s1) / dl;
    r.t_ratio = s1 / s2;
    const double tol = 1e-9 * std::max(1.0, std::abs(r.bulk.k));
    r.lambda_nonnegative = r.lambda >= -tol;
    r.lower_denominator_nonnegative = dl >= -tol;
    return r;
}

} // namespace polybounds

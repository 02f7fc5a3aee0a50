#pragma once

// Rank-one lamination, hierarchical laminate trees and the self-similar
// fixed point realizing the optimal microstructures.

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bounds.hpp"
#include "corners_ad.hpp"
#include "rho_core.hpp"

namespace polybounds {

namespace detail {

/// Laminate of two phases layered with normal (0,1), phase a occupying
/// volume fraction f.
///
/// Fields are constant in each phase.  With average displacement gradient E
/// the phase gradients are E + (1-f) J beta and E - f J beta where J beta
/// spans the admissible gradient jumps (b1, b2, -b1, -b2).  Stress jumps must
/// have all four components equal; the two resulting conditions fix beta.
inline Mat4 laminate_normal_y(const Mat4& ca, const Mat4& cb, double f)
{
    Eigen::Matrix<cplx, 4, 2> j = Eigen::Matrix<cplx, 4, 2>::Zero();
    j(0, 0) = 1.0;
    j(1, 1) = 1.0;
    j(2, 0) = -1.0;
    j(3, 1) = -1.0;
    Eigen::Matrix<cplx, 2, 4> pm = Eigen::Matrix<cplx, 2, 4>::Zero();
    pm(0, 0) = 1.0;
    pm(0, 2) = -1.0;
    pm(1, 1) = 1.0;
    pm(1, 2) = -1.0;

    const Mat4 dc = ca - cb;
    const Eigen::Matrix<cplx, 4, 2> k = ((1.0 - f) * ca + f * cb) * j;
    const Eigen::Matrix2cd a = pm * k;
    Eigen::JacobiSVD<Eigen::Matrix2cd> svd(a);
    const double smax = svd.singularValues()(0), smin = svd.singularValues()(1);
    if (!(smax > 0.0) || smin <= 1e-13 * smax)
        throw SingularInterfaceSystem("interface conditions are degenerate for this phase pair");
    const Eigen::Matrix<cplx, 2, 4> beta = -a.inverse() * (pm * dc);
    Mat4 eff = f * ca + (1.0 - f) * cb + f * (1.0 - f) * dc * j * beta;
    return 0.5 * (eff + eff.adjoint());
}

} // namespace detail

/// Effective tensor of a simple laminate with layer normal `direction`.
inline RhoTensor rank1_effective(const RhoTensor& ca, const RhoTensor& cb, double fraction,
                                 const Eigen::Vector2d& direction = Eigen::Vector2d(0.0, 1.0))
{
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ConfigError("volume fraction must lie in (0, 1)");
    // Angle of the physical rotation carrying (0,1) onto the normal; a
    // physical rotation by a corresponds to rotate_tensor(., -a).
    const double a = std::atan2(-direction(0), direction(1));
    if (std::abs(a) < 1e-15)
        return RhoTensor(detail::laminate_normal_y(ca.m(), cb.m(), fraction));
    Mat4 local = detail::laminate_normal_y(rotate_tensor(ca, a).m(), rotate_tensor(cb, a).m(), fraction);
    return rotate_tensor(RhoTensor(local), -a);
}

// ---------------------------------------------------------------------------
// Laminate trees

struct LaminateNode;
using LaminatePtr = std::shared_ptr<const LaminateNode>;

/// Microstructure description.
///  leaf:         the base crystal, optionally mirrored, then rotated
///  layered:      rank-one laminate of child_a (fraction) and child_b
///  self_similar: infinite-rank laminate Y = rotate(Lam(child_a, Y, fraction), -rot_result)
/// Non-leaf nodes apply `rotation` to their result.
struct LaminateNode {
    enum class Kind { leaf, layered, self_similar };
    Kind kind = Kind::leaf;
    double rotation = 0.0;
    bool mirror = false;
    Eigen::Vector2d direction = Eigen::Vector2d(0.0, 1.0);
    double fraction = 0.0;
    double rot_result = 0.0;
    LaminatePtr child_a, child_b;

    static LaminatePtr leaf(double rotation, bool mirror = false)
    {
        auto n = std::make_shared<LaminateNode>();
        n->kind = Kind::leaf;
        n->rotation = rotation;
        n->mirror = mirror;
        return n;
    }
    static LaminatePtr layered(LaminatePtr a, LaminatePtr b, double fraction, double rotation = 0.0,
                               Eigen::Vector2d direction = Eigen::Vector2d(0.0, 1.0))
    {
        auto n = std::make_shared<LaminateNode>();
        n->kind = Kind::layered;
        n->child_a = std::move(a);
        n->child_b = std::move(b);
        n->fraction = fraction;
        n->rotation = rotation;
        n->direction = direction;
        return n;
    }
    static LaminatePtr self_similar(LaminatePtr crystal, double fraction, double rot_result, double rotation = 0.0)
    {
        auto n = std::make_shared<LaminateNode>();
        n->kind = Kind::self_similar;
        n->child_a = std::move(crystal);
        n->fraction = fraction;
        n->rot_result = rot_result;
        n->rotation = rotation;
        return n;
    }
};

struct FixedPointResult {
    RhoTensor c_prime;
    int iterations = 0;
    double residual = 0.0;
    bool positive_definite = false;
};

struct FixedPointOptions {
    double tol = 1e-10;
    int max_iter = 10000;
};

/// Solves Y = rotate(Lam(phase, Y, fraction), -rot_result) for the
/// positive-definite Y by plain iteration, halving the step when the
/// residual stalls.
inline FixedPointResult fixed_point_with_phase(const RhoTensor& phase, double rot_result, double fraction,
                                               std::optional<RhoTensor> seed = std::nullopt,
                                               FixedPointOptions opt = {})
{
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ConfigError("volume fraction must lie in (0, 1)");
    Mat4 y = seed ? seed->m() : phase.m();
    if (min_eig_symmetric(y) <= 0.0)
        throw LostPositivity("seed is not positive definite");
    double relax = 1.0;
    double prev = std::numeric_limits<double>::infinity();
    FixedPointResult r;
    for (int it = 1; it <= opt.max_iter; ++it) {
        Mat4 next = rotate_tensor(RhoTensor(detail::laminate_normal_y(phase.m(), y, fraction)), -rot_result).m();
        double res = (next - y).norm() / std::max(1e-300, y.norm());
        if (res > prev * 0.999 && relax > 0.5) relax = 0.5;
        y = (1.0 - relax) * y + relax * next;
        prev = res;
        if (min_eig_symmetric(y) <= 0.0)
            throw LostPositivity("fixed-point iterate lost positivity");
        if (res < opt.tol) {
            r.c_prime = RhoTensor(y);
            r.iterations = it;
            r.residual = res;
            r.positive_definite = true;
            return r;
        }
    }
    throw NoConvergence("self-similar fixed point did not converge within " + std::to_string(opt.max_iter) +
                        " iterations (residual " + std::to_string(prev) + ")");
}

inline FixedPointResult self_similar_fixed_point(const RhoTensor& c0, double rot_crystal, double rot_result,
                                                 double fraction, std::optional<RhoTensor> seed = std::nullopt,
                                                 FixedPointOptions opt = {})
{
    return fixed_point_with_phase(rotate_tensor(c0, rot_crystal), rot_result, fraction, std::move(seed), opt);
}

inline RhoTensor evaluate_tree(const LaminateNode& node, const RhoTensor& c0)
{
    switch (node.kind) {
    case LaminateNode::Kind::leaf:
        return rotate_tensor(node.mirror ? mirror_tensor(c0) : c0, node.rotation);
    case LaminateNode::Kind::layered: {
        RhoTensor a = evaluate_tree(*node.child_a, c0);
        RhoTensor b = evaluate_tree(*node.child_b, c0);
        return rotate_tensor(rank1_effective(a, b, node.fraction, node.direction), node.rotation);
    }
    case LaminateNode::Kind::self_similar: {
        RhoTensor phase = evaluate_tree(*node.child_a, c0);
        auto fp = fixed_point_with_phase(phase, node.rot_result, node.fraction);
        return rotate_tensor(fp.c_prime, node.rotation);
    }
    }
    return c0;
}

// ---------------------------------------------------------------------------
// Verification

struct ConditionCheck {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

struct AttainmentReport {
    Corner corner = Corner::A;
    std::vector<ConditionCheck> checks;
    bool pass = true;
    double e1_prime_imag = 0.0; // informational: orthotropy of the result

    void add(std::string name, double value, double threshold, bool ok)
    {
        checks.push_back({std::move(name), value, threshold, ok});
        pass = pass && ok;
    }
};

struct VerifyOptions {
    double eig_slack = 1e-8;  // relative to the norm of the tested form
    double residual = 1e-8;   // relative
};

/// Checks the attainability conditions of a corner on an effective tensor:
/// positivity of the translated forms, existence of the null vectors
/// (a vanishing smallest eigenvalue) and, for A and D, I:S'I = k.
inline AttainmentReport verify_attainment(const RhoTensor& c_prime, Corner corner, const BoundsRectangle& rect,
                                          VerifyOptions opt = {})
{
    AttainmentReport rep;
    rep.corner = corner;
    const RhoTensor s_prime = invert_on_symmetric(c_prime);

    auto compliance_side = [&](const std::string& name, const Mat3c& tr) {
        Mat3c form = restrict_to_symmetric(s_prime.m()) - tr;
        double scale = std::max(1e-300, form.norm());
        double lmin = detail::min_eig(form);
        rep.add(name + " >= 0", lmin / scale, -opt.eig_slack, lmin >= -opt.eig_slack * scale);
        rep.add(name + " singular", std::abs(lmin) / scale, opt.residual, std::abs(lmin) <= opt.residual * scale);
        rep.add(name + " det", std::abs(form.determinant()), 1e-6, std::abs(form.determinant()) <= 1e-6);
    };
    auto stiffness_side = [&](const std::string& name, double t1, double t2) {
        Mat4 form = c_prime.m() - translation_T(t1, t2).m();
        double scale = std::max(1e-300, form.norm());
        double lmin = detail::min_eig(form);
        rep.add(name + " >= 0", lmin / scale, -opt.eig_slack, lmin >= -opt.eig_slack * scale);
        rep.add(name + " singular", std::abs(lmin) / scale, opt.residual, std::abs(lmin) <= opt.residual * scale);
        rep.add(name + " det", std::abs(form.determinant()), 1e-6, std::abs(form.determinant()) <= 1e-6);
    };
    auto bulk_lower_check = [&] {
        RhoVector e = s_prime * identity_vector();
        double ise = (e(2) + e(3)).real();
        double rel = std::abs(ise - rect.bulk.k) / std::abs(rect.bulk.k);
        rep.add("I:S'I = k", rel, opt.residual, rel <= opt.residual);
        rep.e1_prime_imag = e(0).imag();
    };
    auto bulk_upper_check = [&] {
        double t0 = rect.bulk.t0;
        compliance_side("S'-T0", Mat3c(Eigen::Vector3cd(-t0, -t0, t0).asDiagonal()));
    };

    const double t1 = rect.upper.t1, t2 = rect.upper.t2;
    const double s1 = rect.lower.t1, s2 = rect.lower.t2;
    const Mat3c tr_upper = Mat3c(Eigen::Vector3cd(t1, t2, -(t1 + t2) / 2).asDiagonal());
    switch (corner) {
    case Corner::A:
        compliance_side("S'-T", tr_upper);
        bulk_lower_check();
        break;
    case Corner::D:
        stiffness_side("C'-T", s1, s2);
        bulk_lower_check();
        break;
    case Corner::B:
        compliance_side("S'-T", tr_upper);
        bulk_upper_check();
        break;
    case Corner::C:
        stiffness_side("C'-T", s1, s2);
        bulk_upper_check();
        break;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Corner A / D construction

struct CornerTrees {
    LaminatePtr mirror_pair;  // laminate of the crystal and its mirror image
    LaminatePtr self_similar; // infinite-rank form, proper rotations only
};

/// Trees for a corner A/D parameter set.  `crystal_angle` is the rotation
/// taking the input crystal to the normalized working crystal.
inline CornerTrees build_corner_tree(const CornerParams& p, double crystal_angle)
{
    if (p.interior_branch)
        throw BranchAmbiguity("p lies in [0,1]: interior laminate of mirror images, no self-similar form");
    const double rot = crystal_angle + std::atan(p.tau);
    CornerTrees t;
    auto crystal = LaminateNode::leaf(rot, false);
    auto mirrored = LaminateNode::leaf(-rot, true);
    if (p.p < 0.0) {
        t.mirror_pair = LaminateNode::layered(crystal, mirrored, p.f_c0_in_ctheta, p.theta);
        t.self_similar = LaminateNode::self_similar(crystal, p.f_c0_relaminate, -2.0 * p.theta, -p.theta);
    } else {
        t.mirror_pair = LaminateNode::layered(crystal, mirrored, p.f_c0_in_ctheta, -p.theta);
        t.self_similar = LaminateNode::self_similar(crystal, p.f_c0_relaminate, 2.0 * p.theta, p.theta);
    }
    return t;
}

struct CornerADResult {
    Corner corner = Corner::A;
    std::string kind; // "laminate", "orthotropic", "imaginary"
    CornerParams params;
    std::optional<CornerTrees> trees;
    std::optional<DegenerateScheme> scheme;
    double crystal_angle = 0.0;
    cplx e1_crystal;
    double crystal_identity_residual = 0.0;
    std::optional<FixedPointResult> fixed_point;
    std::optional<RhoTensor> c_prime;
    cplx e1_prime_computed;
    double e1_prime_error = 0.0;
    double mirror_form_difference = 0.0;
    std::optional<AttainmentReport> report;
};

/// Full construction for corner A or D starting from the input crystal.
inline CornerADResult construct_corner_ad(const RhoTensor& c0, const BoundsRectangle& rect, Corner corner,
                                          VerifyOptions vopt = {})
{
    if (corner != Corner::A && corner != Corner::D)
        throw ConfigError("construct_corner_ad handles corners A and D only");
    CornerADResult out;
    out.corner = corner;
    const ShearBound& sb = corner == Corner::A ? rect.upper : rect.lower;
    const RhoVector& v = sb.require_vector();
    const RhoTensor& crystal = sb.rotated_crystal;
    const double scale = corner == Corner::A ? rect.lambda : rect.eta;
    const double ratio = rect.lower.t1 / rect.lower.t2;
    out.crystal_angle = sb.normalize_angle;

    RhoVector e = invert_on_symmetric(crystal) * identity_vector();
    const cplx e1 = e(0);
    out.e1_crystal = e1;
    out.crystal_identity_residual =
        corner == Corner::A ? std::abs(std::conj(e1) * v(0) - e1 + scale)
                            : std::abs(ratio * std::conj(e1) * v(0) + e1 - scale);

    const double small = 1e-10 * std::max(1.0, std::abs(e1));
    if (std::abs(e1.imag()) <= small) {
        // Already orthotropic; the crystal itself carries the optimal fields.
        out.kind = "orthotropic";
        out.c_prime = crystal;
        out.e1_prime_computed = e1;
        out.report = verify_attainment(crystal, corner, rect, vopt);
        return out;
    }
    if (std::abs(e1.real()) <= small) {
        out.kind = "imaginary";
        out.scheme = special_case_imaginary(cplx(0.0, e1.imag()), rect.bulk.k, scale);
        return out;
    }

    auto [y, tau] = invert_e1(e1, scale);
    out.kind = "laminate";
    out.params = build_construction(y, tau, scale, corner, ratio);
    out.trees = build_corner_tree(out.params, out.crystal_angle);

    const LaminateNode& ss = *out.trees->self_similar;
    out.fixed_point = self_similar_fixed_point(c0, ss.child_a->rotation, ss.rot_result, ss.fraction);
    RhoTensor cp = rotate_tensor(out.fixed_point->c_prime, ss.rotation);
    out.c_prime = cp;
    out.mirror_form_difference =
        (evaluate_tree(*out.trees->mirror_pair, c0).m() - cp.m()).norm() / cp.m().norm();
    RhoVector ep = invert_on_symmetric(cp) * identity_vector();
    out.e1_prime_computed = ep(0);
    out.e1_prime_error = std::abs(ep(0) - out.params.e1_prime) / std::max(1.0, std::abs(out.params.e1_prime));
    out.report = verify_attainment(cp, corner, rect, vopt);
    return out;
}

} // namespace polybounds

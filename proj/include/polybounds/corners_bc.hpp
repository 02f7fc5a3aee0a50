#pragma once

// Corners B (kappa+, mu+) and C (kappa+, mu-).
//
// A trajectory starts at the crystal coordinate c1 (tau = 0) and follows
//   c1'(tau) = (c1 + e^{-2i theta} phi tau)(1 + e^{i theta} tau)
//              / ((1 + phi tau)(1 + e^{-i theta} tau))
// where theta is a layering angle for which phi(theta) is real.  A point
// where the trajectory crosses itself gives a tensor C' that, laminated
// with the rotated crystal, reproduces a rotation of itself.
//
// Near c1 = 1 the trajectories form a one-parameter family labelled by
// z = 2i + (c1 - 1)/theta, for which the self intersections are explicit.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "bounds.hpp"
#include "corners_ad.hpp"
#include "laminate.hpp"
#include "rho_core.hpp"

namespace polybounds {

struct MixParams {
    double alpha1 = 0.5, alpha2 = 0.5; // corner B
    double beta1 = 0.5, beta2 = 0.5;   // corner C
    double t_ratio = 1.0;              // t1/t2 of the lower shear translation (corner C)

    static MixParams for_b(double alpha1)
    {
        MixParams m;
        m.alpha1 = alpha1;
        m.alpha2 = 1.0 - alpha1;
        return m;
    }
    static MixParams for_c(double beta1, double t_ratio)
    {
        MixParams m;
        m.beta1 = beta1;
        m.beta2 = 1.0 - beta1;
        m.t_ratio = t_ratio;
        return m;
    }
    static MixParams from_rectangle(const BoundsRectangle& r)
    {
        MixParams m = for_b(r.alpha1);
        m.beta1 = r.beta1;
        m.beta2 = 1.0 - r.beta1;
        m.t_ratio = r.t_ratio;
        return m;
    }
};

// ---------------------------------------------------------------------------
// Real-phi condition

/// phi(theta) making the trajectory satisfy the bilinear identity.
inline cplx phi_of_theta(double theta, cplx c1, const MixParams& mp, Corner corner)
{
    const cplx cb = std::conj(c1);
    const cplx e2 = std::exp(2.0 * kI * theta), em2 = std::exp(-2.0 * kI * theta);
    const cplx em3 = std::exp(-3.0 * kI * theta), em4 = std::exp(-4.0 * kI * theta);
    cplx num, den;
    if (corner == Corner::B) {
        num = cb * (1.0 - mp.alpha1 * cb * em2 - mp.alpha2 * c1 * e2) * em3;
        den = 1.0 - mp.alpha2 * c1 + mp.alpha2 * cb * em4 - cb * em2;
    } else if (corner == Corner::C) {
        num = cb * (1.0 - mp.beta1 * cb * em2 - mp.beta2 * c1 * e2) * em3;
        den = 1.0 - mp.beta2 * c1 + mp.beta2 * cb * em4 - cb * em2;
    } else {
        throw ConfigError("phi_of_theta applies to corners B and C");
    }
    if (std::abs(den) <= 1e-14 * std::max(1.0, std::abs(num)))
        throw PoleAtTheta("phi has a pole at this theta");
    return num / den;
}

/// Reciprocal of phi for corner B in closed form.  Equal to 1/phi_of_theta
/// wherever both are finite.
inline cplx inverse_phi_b(double theta, cplx c1, double alpha1)
{
    const double alpha2 = 1.0 - alpha1;
    const cplx cb = std::conj(c1);
    const cplx e1 = std::exp(kI * theta), em1 = std::exp(-kI * theta);
    const cplx e2 = std::exp(2.0 * kI * theta), em2 = std::exp(-2.0 * kI * theta);
    const cplx den = cb * (alpha1 * em2 * (cb - e2) + alpha2 * e2 * (c1 - em2));
    if (std::abs(den) == 0.0 || std::abs(cb) == 0.0) throw PoleAtTheta("1/phi has a pole at this theta");
    return e1 / cb + (e1 - em1) * (cb - e2) / den;
}

/// Small-theta expansion of 1/phi with z = 2i + (c1 - 1)/theta.
inline cplx inverse_phi_asymptotic(double theta, cplx z, double alpha1)
{
    const double alpha2 = 1.0 - alpha1;
    const cplx zb = std::conj(z);
    return 1.0 - theta * (zb + kI) + 2.0 * kI * theta * zb / (alpha1 * zb + alpha2 * z);
}

/// Angles in (0, pi) at which phi is real: sign changes of Im phi on a
/// uniform scan, refined by bracketing, with poles rejected by residual.
inline std::vector<double> find_real_phi_thetas(cplx c1, const MixParams& mp, Corner corner, int scan = 2000)
{
    const double lo = 1e-6, hi = kPi - 1e-6;
    auto im_phi = [&](double th) {
        try {
            return phi_of_theta(th, c1, mp, corner).imag();
        } catch (const PoleAtTheta&) {
            return std::nan("");
        }
    };
    std::vector<double> roots;
    double prev_t = lo, prev = im_phi(lo);
    for (int i = 1; i <= scan; ++i) {
        double t = lo + (hi - lo) * i / scan;
        double cur = im_phi(t);
        if (!std::isnan(prev) && !std::isnan(cur) && prev * cur <= 0.0) {
            double r;
            if (cur == 0.0) r = t;
            else if (prev == 0.0) r = prev_t;
            else {
                boost::uintmax_t it = 200;
                auto tol = [](double a, double b) { return std::abs(a - b) <= 1e-15; };
                auto br = boost::math::tools::toms748_solve(im_phi, prev_t, t, prev, cur, tol, it);
                r = 0.5 * (br.first + br.second);
            }
            try {
                cplx ph = phi_of_theta(r, c1, mp, corner);
                if (std::abs(ph.imag()) < 1e-10 * std::max(1.0, std::abs(ph.real())) &&
                    (roots.empty() || std::abs(roots.back() - r) > 1e-12))
                    roots.push_back(r);
            } catch (const PoleAtTheta&) {
            }
        }
        prev_t = t;
        prev = cur;
    }
    return roots;
}

// ---------------------------------------------------------------------------
// Exact trajectories

inline cplx c1_prime(double tau, cplx c1, double theta, double phi)
{
    const cplx p = std::exp(kI * theta), q = std::exp(-kI * theta);
    return (c1 + std::exp(-2.0 * kI * theta) * phi * tau) * (1.0 + p * tau) / ((1.0 + phi * tau) * (1.0 + q * tau));
}

inline cplx c1_prime_derivative(double tau, cplx c1, double theta, double phi)
{
    const cplx p = std::exp(kI * theta), q = std::exp(-kI * theta);
    const cplx b = std::exp(-2.0 * kI * theta) * phi;
    const cplx n = (c1 + b * tau) * (1.0 + p * tau);
    const cplx dn = b * (1.0 + p * tau) + p * (c1 + b * tau);
    const cplx d = (1.0 + phi * tau) * (1.0 + q * tau);
    const cplx dd = phi * (1.0 + q * tau) + q * (1.0 + phi * tau);
    return (dn * d - n * dd) / (d * d);
}

/// Shear-field coordinate of the crystal implied by the bilinear identity:
/// v1 for B, w1 for C.
inline cplx crystal_field1(cplx c1, const MixParams& mp, Corner corner)
{
    if (corner == Corner::B) return (1.0 - mp.alpha2 * c1) / (mp.alpha1 * std::conj(c1));
    return (mp.beta2 * c1 - 1.0) / (mp.t_ratio * mp.beta1 * std::conj(c1));
}

inline cplx field1_prime(double tau, cplx f1, double theta, const MixParams& mp, Corner corner)
{
    const cplx p = std::exp(kI * theta), q = std::exp(-kI * theta);
    const cplx jump = corner == Corner::B ? std::exp(-3.0 * kI * theta) : -std::exp(-3.0 * kI * theta) / mp.t_ratio;
    return (f1 + jump * tau) * (1.0 + p * tau) / ((1.0 + q * tau) * (1.0 + q * tau));
}

/// Residual of the bilinear identity tying c1' to the shear field.
inline double bilinear_residual(cplx c1p, cplx f1p, const MixParams& mp, Corner corner)
{
    if (corner == Corner::B) return std::abs(mp.alpha1 * std::conj(c1p) * f1p + mp.alpha2 * c1p - 1.0);
    return std::abs(mp.beta1 * mp.t_ratio * std::conj(c1p) * f1p - mp.beta2 * c1p + 1.0);
}

struct TrajectorySample {
    double tau = 0;
    cplx c1_prime;
    cplx field1_prime;
};

struct Trajectory {
    Corner corner = Corner::B;
    cplx c1;
    cplx field1;
    double theta = 0, phi = 0;
    MixParams params;
    std::vector<TrajectorySample> samples;
    double identity_residual = 0; // max over samples, relative to the sample size
};

inline std::vector<double> trajectory_taus(double theta, double phi, int n)
{
    std::vector<double> taus;
    taus.reserve(2 * n);
    for (int i = 1; i < n; ++i) taus.push_back(std::tan(-kPi / 2 + kPi * i / n));
    // The loops of nearly degenerate trajectories live near tau = -1/cos(theta)
    // within a window of order sin(theta).
    const double s = std::max(1e-8, std::abs(std::sin(theta)));
    const double centre = -1.0 / std::cos(theta);
    if (std::isfinite(centre) && std::abs(centre) < 1e6) {
        for (int i = 0; i <= n / 2; ++i) {
            double u = -1.0 + 2.0 * i / (n / 2);
            taus.push_back(centre + 40.0 * s * std::sinh(3.0 * u) / std::sinh(3.0));
        }
    }
    if (phi != 0.0) {
        const double pole = -1.0 / phi;
        for (int i = 1; i <= 40; ++i) {
            double d = std::pow(10.0, -8.0 + 7.0 * i / 40.0) * std::max(1.0, std::abs(pole));
            taus.push_back(pole - d);
            taus.push_back(pole + d);
        }
    }
    taus.push_back(0.0);
    std::sort(taus.begin(), taus.end());
    taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
    return taus;
}

inline Trajectory trace_trajectory(cplx c1, double theta, double phi, const MixParams& mp, Corner corner,
                                   int n = 4000)
{
    Trajectory tr;
    tr.corner = corner;
    tr.c1 = c1;
    tr.theta = theta;
    tr.phi = phi;
    tr.params = mp;
    tr.field1 = crystal_field1(c1, mp, corner);
    for (double tau : trajectory_taus(theta, phi, n)) {
        TrajectorySample s;
        s.tau = tau;
        s.c1_prime = c1_prime(tau, c1, theta, phi);
        s.field1_prime = field1_prime(tau, tr.field1, theta, mp, corner);
        if (!std::isfinite(std::abs(s.c1_prime)) || !std::isfinite(std::abs(s.field1_prime))) continue;
        double scale = std::max(1.0, std::abs(s.c1_prime) * std::abs(s.field1_prime));
        tr.identity_residual =
            std::max(tr.identity_residual, bilinear_residual(s.c1_prime, s.field1_prime, mp, corner) / scale);
        tr.samples.push_back(s);
    }
    return tr;
}

/// Winding number of a closed polyline about the origin (counterclockwise
/// positive).
inline int winding_number(const std::vector<cplx>& pts)
{
    if (pts.size() < 3) return 0;
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        cplx a = pts[i], b = pts[(i + 1) % pts.size()];
        double d = std::arg(b / a);
        if (std::abs(d) > kPi / 2)
            throw UndersampledTrajectory("argument increment exceeds pi/2 between consecutive samples");
        total += d;
    }
    return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

/// Winding of c1'(tau) for tau between ta and tb (same sign), sampled
/// until consecutive argument increments stay below pi/2.
inline int loop_winding(cplx c1, double theta, double phi, double ta, double tb)
{
    for (int n = 512; n <= (1 << 20); n *= 4) {
        std::vector<cplx> pts;
        pts.reserve(n + 1);
        const double ua = std::atan(ta), ub = std::atan(tb);
        for (int i = 0; i <= n; ++i) pts.push_back(c1_prime(std::tan(ua + (ub - ua) * i / n), c1, theta, phi));
        try {
            return winding_number(pts);
        } catch (const UndersampledTrajectory&) {
        }
    }
    throw UndersampledTrajectory("loop could not be resolved");
}

// ---------------------------------------------------------------------------
// Asymptotic family

enum class DeltaForm { corrected, printed };

struct AsymptoticFamily {
    double alpha1 = 0;
    double zI = 0, zR = 0;
    double delta = 0;
    cplx z, w; // w = 1/z

    cplx at_t(double t) const { return (z / (delta + t) - 1.0) * (1.0 - kI * t) / (1.0 + kI * t); }
    cplx at_s(double s) const
    {
        return (w - s) * (1.0 + (kI - delta) * s) / (w * (1.0 - (kI + delta) * s));
    }
};

inline double zr_squared(double zI, double alpha1)
{
    const double d = 2.0 * alpha1 - 1.0;
    return -(2.0 + (zI - 1.0) * d) * d * zI * zI / (zI + 1.0);
}

/// Real-phi condition of the expansion: 1/phi = 1 - theta delta.
inline double asymptotic_delta(double zR, double zI, double alpha1, DeltaForm form = DeltaForm::corrected)
{
    const double d = 2.0 * alpha1 - 1.0;
    const double factor = form == DeltaForm::corrected ? 4.0 * (1.0 - alpha1) : 4.0;
    return zR - factor * zR * zI / (zR * zR + d * d * zI * zI);
}

inline AsymptoticFamily asymptotic_family(double zI, double alpha1, int zr_sign = 1,
                                          DeltaForm form = DeltaForm::corrected)
{
    if (zI == -1.0) throw InadmissibleZI("zI = -1 is singular");
    const double r = zr_squared(zI, alpha1);
    if (!(r >= 0.0)) throw InadmissibleZI("no real zR for this zI");
    AsymptoticFamily f;
    f.alpha1 = alpha1;
    f.zI = zI;
    f.zR = (zr_sign >= 0 ? 1.0 : -1.0) * std::sqrt(r);
    const double d = 2.0 * alpha1 - 1.0;
    if (f.zR * f.zR + d * d * zI * zI == 0.0) throw InadmissibleZI("delta undefined");
    f.delta = asymptotic_delta(f.zR, zI, alpha1, form);
    f.z = cplx(f.zR, zI);
    f.w = 1.0 / f.z;
    return f;
}

/// Negative zI interval on which the family exists, as (lo, hi).
inline std::optional<std::pair<double, double>> admissible_negative_zi(double alpha1)
{
    const double d = 2.0 * alpha1 - 1.0;
    if (d < 0.0) return std::pair{-1.0, 0.0};
    if (d == 0.0 || d == 1.0) return std::nullopt;
    const double r = 1.0 - 2.0 / d;
    if (d < 1.0) return std::pair{r, -1.0};
    return std::pair{-1.0, std::min(0.0, r)};
}

/// Every zI interval (either sign) on which the family exists.
inline std::vector<std::pair<double, double>> admissible_zi_intervals(double alpha1)
{
    std::vector<std::pair<double, double>> out;
    const double d = 2.0 * alpha1 - 1.0;
    if (auto neg = admissible_negative_zi(alpha1)) out.push_back(*neg);
    if (d < 0.0) out.emplace_back(0.0, 1.0 - 2.0 / d);
    else if (d > 2.0) out.emplace_back(0.0, 1.0 - 2.0 / d);
    return out;
}

struct SelfIntersection {
    double wR = 0, wI = 0;
    double gamma = 0;
    double s_plus = 0, s_minus = 0;
    double t_plus = 0, t_minus = 0;
    cplx c1_star;
    double residual = 0; // |c1'(s+) - c1'(s-)|
    bool in_unit_disk = false;
    bool in_t_interval = false;
};

inline double gamma_squared(const AsymptoticFamily& f)
{
    const double wR = f.w.real(), wI = f.w.imag();
    return wR * wR + (1.0 - 2.0 * f.delta * wR + 2.0 * wI) / (f.delta * f.delta + 1.0);
}

/// Explicit self intersection of an asymptotic trajectory.  With
/// `require_admissible` the intersection must lie in the open unit disk.
inline SelfIntersection self_intersection(const AsymptoticFamily& f, bool require_admissible = true)
{
    const double g2 = gamma_squared(f);
    if (!(g2 >= 0.0)) throw NoRealGamma("self-intersection parameter is not real");
    SelfIntersection si;
    si.wR = f.w.real();
    si.wI = f.w.imag();
    si.gamma = std::sqrt(g2);
    si.s_plus = si.wR + si.gamma;
    si.s_minus = si.wR - si.gamma;
    si.t_plus = 1.0 / si.s_plus - f.delta;
    si.t_minus = 1.0 / si.s_minus - f.delta;
    si.c1_star = f.at_s(si.s_plus);
    si.residual = std::abs(si.c1_star - f.at_s(si.s_minus));
    si.in_unit_disk = std::abs(si.c1_star) < 1.0;
    // |c1'(t)| < 1 requires t beyond |z|^2/(2 zR) - delta on the side of zR.
    const double edge = std::norm(f.z) / (2.0 * f.zR) - f.delta;
    auto inside = [&](double t) { return f.zR > 0 ? t > edge : t < edge; };
    si.in_t_interval = inside(si.t_plus) && inside(si.t_minus);
    if (require_admissible && !si.in_unit_disk)
        throw OutsideUnitDisk("self intersection lies outside the unit disk");
    return si;
}

struct LoopCheck {
    bool analytic = false; // zI < 0
    int winding = 0;       // numeric, counterclockwise in increasing s
    bool loops = false;
    bool has_loop = false; // a real self intersection exists
};

/// Whether the closed portion between the self-intersection parameters
/// winds around the origin, compared with the analytic predicate zI < 0.
inline LoopCheck loops_origin(const AsymptoticFamily& f)
{
    LoopCheck lc;
    lc.analytic = f.zI < 0.0;
    if (!(gamma_squared(f) >= 0.0)) return lc;
    SelfIntersection si = self_intersection(f, false);
    lc.has_loop = true;
    for (int n = 256; n <= (1 << 20); n *= 4) {
        std::vector<cplx> pts;
        pts.reserve(n + 1);
        for (int i = 0; i <= n; ++i) pts.push_back(f.at_s(si.s_minus + (si.s_plus - si.s_minus) * i / n));
        try {
            lc.winding = winding_number(pts);
            lc.loops = lc.winding != 0;
            return lc;
        } catch (const UndersampledTrajectory&) {
        }
    }
    throw UndersampledTrajectory("asymptotic loop could not be resolved");
}

// ---------------------------------------------------------------------------
// General self intersections of exact trajectories

struct NewtonResult {
    double tau1 = 0, tau2 = 0;
    int iterations = 0;
    bool converged = false;
    double residual = 0;
};

/// Damped Newton on c1'(tau1) = c1'(tau2) in the two real unknowns.
inline NewtonResult refine_self_intersection(cplx c1, double theta, double phi, double tau1, double tau2,
                                             int max_iter = 50, double tol = 1e-13)
{
    NewtonResult r;
    r.tau1 = tau1;
    r.tau2 = tau2;
    for (int it = 0; it <= max_iter; ++it) {
        cplx f = c1_prime(r.tau1, c1, theta, phi) - c1_prime(r.tau2, c1, theta, phi);
        r.residual = std::abs(f);
        r.iterations = it;
        if (r.residual < tol) {
            r.converged = std::abs(r.tau1 - r.tau2) > 1e-9 * std::max(1.0, std::abs(r.tau1));
            return r;
        }
        if (it == max_iter) break;
        cplx d1 = c1_prime_derivative(r.tau1, c1, theta, phi);
        cplx d2 = -c1_prime_derivative(r.tau2, c1, theta, phi);
        Eigen::Matrix2d j;
        j << d1.real(), d2.real(), d1.imag(), d2.imag();
        Eigen::Vector2d rhs(-f.real(), -f.imag());
        if (std::abs(j.determinant()) < 1e-300) break;
        Eigen::Vector2d step = j.partialPivLu().solve(rhs);
        double lim = 0.5 * std::max(std::abs(r.tau1 - r.tau2), 1e-12) + 0.1 * std::max(1.0, std::abs(r.tau1));
        if (step.norm() > lim) step *= lim / step.norm();
        r.tau1 += step(0);
        r.tau2 += step(1);
    }
    return r;
}

struct AsymptoticSeedResult {
    cplx c1;          // crystal coordinate 1 + theta0 (z - 2i)
    double theta = 0; // real-phi root near theta0
    double phi = 0;
    double tau_plus0 = 0, tau_minus0 = 0; // asymptotic initial guesses
    NewtonResult newton;
    cplx c1_star_asymptotic, c1_star_exact;
};

/// Uses the explicit intersection of an asymptotic family member to seed
/// the exact two-variable search on the trajectory through
/// c1 = 1 + theta0 (z - 2i), where tau = -1 - t theta.
inline AsymptoticSeedResult asymptotic_seeded_intersection(const AsymptoticFamily& fam, double theta0 = 1e-3,
                                                           int max_iter = 20)
{
    AsymptoticSeedResult r;
    SelfIntersection si = self_intersection(fam, false);
    r.c1 = 1.0 + theta0 * (fam.z - 2.0 * kI);
    const MixParams mp = MixParams::for_b(fam.alpha1);
    auto im_phi = [&](double th) { return phi_of_theta(th, r.c1, mp, Corner::B).imag(); };
    double best = std::nan(""), prev_t = 0.25 * theta0, prev = im_phi(prev_t);
    for (int i = 1; i <= 800; ++i) {
        double t = 0.25 * theta0 * std::pow(16.0, i / 800.0);
        double cur = im_phi(t);
        if (prev * cur <= 0.0) {
            boost::uintmax_t it = 200;
            auto tol = [](double a, double b) { return std::abs(a - b) <= 1e-15 * std::abs(a); };
            auto br = boost::math::tools::toms748_solve(im_phi, prev_t, t, prev, cur, tol, it);
            double root = 0.5 * (br.first + br.second);
            if (std::isnan(best) || std::abs(root - theta0) < std::abs(best - theta0)) best = root;
        }
        prev_t = t;
        prev = cur;
    }
    if (std::isnan(best)) throw NoRoot("no real-phi angle near theta0");
    r.theta = best;
    r.phi = phi_of_theta(best, r.c1, mp, Corner::B).real();
    r.tau_plus0 = -1.0 - si.t_plus * r.theta;
    r.tau_minus0 = -1.0 - si.t_minus * r.theta;
    r.c1_star_asymptotic = si.c1_star;
    r.newton = refine_self_intersection(r.c1, r.theta, r.phi, r.tau_plus0, r.tau_minus0, max_iter, 1e-10);
    r.c1_star_exact = c1_prime(r.newton.tau1, r.c1, r.theta, r.phi);
    return r;
}

struct TrajectoryIntersection {
    double theta = 0, phi = 0;
    double tau_a = 0, tau_b = 0; // |tau_a| < |tau_b|, same sign
    cplx c1_star;
    int winding = 0;
    int newton_iterations = 0;
};

namespace detail {

inline double cross2(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }

inline bool segments_cross(cplx p1, cplx p2, cplx q1, cplx q2)
{
    double d1 = cross2(q2 - q1, p1 - q1), d2 = cross2(q2 - q1, p2 - q1);
    double d3 = cross2(p2 - p1, q1 - p1), d4 = cross2(p2 - p1, q2 - p1);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

} // namespace detail

/// All self intersections inside the unit disk of the exact trajectory,
/// found by segment-crossing tests and refined by Newton.
inline std::vector<NewtonResult> trajectory_self_intersections(const Trajectory& tr)
{
    std::vector<std::size_t> idx; // segments with both ends inside the disk
    for (std::size_t i = 0; i + 1 < tr.samples.size(); ++i)
        if (std::abs(tr.samples[i].c1_prime) < 1.0 && std::abs(tr.samples[i + 1].c1_prime) < 1.0) idx.push_back(i);
    std::vector<NewtonResult> out;
    for (std::size_t a = 0; a < idx.size(); ++a) {
        const auto i = idx[a];
        cplx p1 = tr.samples[i].c1_prime, p2 = tr.samples[i + 1].c1_prime;
        double xmin = std::min(p1.real(), p2.real()), xmax = std::max(p1.real(), p2.real());
        double ymin = std::min(p1.imag(), p2.imag()), ymax = std::max(p1.imag(), p2.imag());
        for (std::size_t b = a + 1; b < idx.size(); ++b) {
            const auto j = idx[b];
            if (j <= i + 1) continue;
            cplx q1 = tr.samples[j].c1_prime, q2 = tr.samples[j + 1].c1_prime;
            if (std::max(q1.real(), q2.real()) < xmin || std::min(q1.real(), q2.real()) > xmax ||
                std::max(q1.imag(), q2.imag()) < ymin || std::min(q1.imag(), q2.imag()) > ymax)
                continue;
            if (!detail::segments_cross(p1, p2, q1, q2)) continue;
            NewtonResult nr = refine_self_intersection(
                tr.c1, tr.theta, tr.phi, 0.5 * (tr.samples[i].tau + tr.samples[i + 1].tau),
                0.5 * (tr.samples[j].tau + tr.samples[j + 1].tau));
            if (!nr.converged) continue;
            bool dup = false;
            for (const auto& o : out)
                if (std::abs(o.tau1 - nr.tau1) + std::abs(o.tau2 - nr.tau2) < 1e-8 * (1.0 + std::abs(nr.tau1)))
                    dup = true;
            if (!dup) out.push_back(nr);
        }
    }
    return out;
}

/// Trajectories through c1 that loop around the origin and self intersect
/// inside the unit disk, with the crystal on the tail (both intersection
/// parameters on the same side of tau = 0).
inline std::vector<TrajectoryIntersection> find_bc_candidates(cplx c1, const MixParams& mp, Corner corner,
                                                              int samples = 4000)
{
    std::vector<TrajectoryIntersection> out;
    for (double theta : find_real_phi_thetas(c1, mp, corner)) {
        const double phi = phi_of_theta(theta, c1, mp, corner).real();
        Trajectory tr = trace_trajectory(c1, theta, phi, mp, corner, samples);
        for (const NewtonResult& nr : trajectory_self_intersections(tr)) {
            double ta = nr.tau1, tb = nr.tau2;
            if (std::abs(ta) > std::abs(tb)) std::swap(ta, tb);
            if (!(ta * tb > 0.0)) continue;
            // the loop must avoid the pole of the bulk normalization
            if (phi != 0.0) {
                double pole = -1.0 / phi;
                if ((pole - ta) * (pole - tb) <= 0.0 || (pole - 0.0) * (pole - ta) <= 0.0) continue;
            }
            TrajectoryIntersection ti;
            ti.theta = theta;
            ti.phi = phi;
            ti.tau_a = ta;
            ti.tau_b = tb;
            ti.c1_star = c1_prime(ta, c1, theta, phi);
            ti.newton_iterations = nr.iterations;
            try {
                ti.winding = loop_winding(c1, theta, phi, ta, tb);
            } catch (const UndersampledTrajectory&) {
                continue;
            }
            if (ti.winding == 0 || !(std::abs(ti.c1_star) < 1.0)) continue;
            out.push_back(ti);
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return std::abs(a.tau_b) < std::abs(b.tau_b);
    });
    return out;
}

inline TrajectoryIntersection solve_for_crystal(cplx c1, const MixParams& mp, Corner corner)
{
    if (!(std::abs(c1) < 1.0)) throw OutsideUnitDisk("crystal coordinate must satisfy |c1| < 1");
    auto c = find_bc_candidates(c1, mp, corner);
    if (c.empty()) throw NotAttainedWithinSearch("no looping trajectory tail through c1 was found");
    return c.front();
}

// ---------------------------------------------------------------------------
// Tensor-level construction

/// Angle psi with rotate_tensor(., psi) normalizing the averaged fields at
/// tau: e^{2 i psi} = e^{-2 i theta} (1 + e^{i theta} tau)/(1 + e^{-i theta} tau).
inline double normalizing_angle(double theta, double tau)
{
    cplx r = std::exp(-2.0 * kI * theta) * (1.0 + std::exp(kI * theta) * tau) / (1.0 + std::exp(-kI * theta) * tau);
    return 0.5 * std::arg(r);
}

struct CornerBCResult {
    Corner corner = Corner::B;
    MixParams params;
    double crystal_angle = 0; // rotation of the input crystal to the working frame
    cplx c1;                  // working-frame crystal coordinate
    std::vector<TrajectoryIntersection> candidates;
    std::optional<TrajectoryIntersection> chosen;
    double fraction = 0;   // crystal fraction in the laminate
    double rot_result = 0; // relative rotation between the two copies of C'
    double psi_b = 0;
    LaminatePtr tree;
    std::optional<FixedPointResult> fixed_point;
    std::optional<RhoTensor> c_prime;
    double c1_prime_error = 0;
    std::optional<AttainmentReport> report;
    bool success = false;
    std::vector<std::string> failures;
};

/// Per-crystal attempt at corner B or C: the crystal is rotated so that the
/// shear vector has second component +1 (B) or -1 (C), candidate loops are
/// located and the self-consistent tensor is solved and verified.
inline CornerBCResult construct_corner_bc(const RhoTensor& c0, const BoundsRectangle& rect, Corner corner,
                                          VerifyOptions vopt = {}, FixedPointOptions fopt = {})
{
    if (corner != Corner::B && corner != Corner::C)
        throw ConfigError("construct_corner_bc handles corners B and C only");
    CornerBCResult out;
    out.corner = corner;
    out.params = MixParams::from_rectangle(rect);
    const ShearBound& sb = corner == Corner::B ? rect.upper : rect.lower;
    sb.require_vector();
    out.crystal_angle = sb.normalize_angle + kPi / 2;
    const RhoTensor work = rotate_tensor(c0, out.crystal_angle);
    out.c1 = rotate_vector(rect.bulk.c, out.crystal_angle)(0);
    if (!(std::abs(out.c1) < 1.0)) throw OutsideUnitDisk("crystal coordinate must satisfy |c1| < 1");

    out.candidates = find_bc_candidates(out.c1, out.params, corner);
    if (out.candidates.empty()) {
        out.failures.push_back("no looping trajectory tail through c1");
        return out;
    }
    for (const auto& cand : out.candidates) {
        const double f = 1.0 - cand.tau_a / cand.tau_b;
        const double psi_a = normalizing_angle(cand.theta, cand.tau_a);
        const double psi_b = normalizing_angle(cand.theta, cand.tau_b);
        const double rot_result = psi_b - psi_a;
        try {
            auto fp = fixed_point_with_phase(rotate_tensor(work, cand.theta), rot_result, f, std::nullopt, fopt);
            RhoTensor cp = rotate_tensor(fp.c_prime, psi_b);
            auto rep = verify_attainment(cp, corner, rect, vopt);
            auto [t0, cvec] = bulk_upper(cp);
            (void)t0;
            double err = std::abs(cvec(0) - cand.c1_star);
            out.chosen = cand;
            out.fraction = f;
            out.rot_result = rot_result;
            out.psi_b = psi_b;
            out.fixed_point = fp;
            out.c_prime = cp;
            out.c1_prime_error = err;
            out.report = rep;
            out.tree = LaminateNode::self_similar(LaminateNode::leaf(out.crystal_angle + cand.theta), f, rot_result,
                                                  psi_b);
            if (rep.pass) {
                out.success = true;
                return out;
            }
            out.failures.push_back("candidate theta=" + std::to_string(cand.theta) + " failed verification");
        } catch (const Error& e) {
            out.failures.push_back("candidate theta=" + std::to_string(cand.theta) + ": " + e.category() + ": " +
                                   e.what());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Coverage of the unit disk by the asymptotic tails

struct TailSample {
    double zI = 0, zR = 0, t = 0;
    cplx c;
    bool on_loop = false;
    int side = 0; // 0: before the loop (s < s-), 1: after (s > s+)
};

struct CoverageOptions {
    int families = 2000;       // zI samples
    int samples = 20000;       // s samples per family
    int grid = 100;            // grid resolution per axis
    double epsilon = 0.02;
    std::optional<double> zi_min, zi_max;
    DeltaForm delta_form = DeltaForm::corrected;
    int export_families = 120; // families written to the sample list
    int export_samples = 600;  // samples per exported family
};

struct CoverageReport {
    double alpha1 = 0;
    double coverage = 0;
    int grid_points = 0, covered = 0;
    int families = 0, looping_families = 0;
    std::vector<TailSample> samples; // exported subset, lower half-plane tails plus loops
};

namespace detail {

inline std::vector<double> zi_grid(double lo, double hi, int n)
{
    std::vector<double> u;
    u.reserve(n + 400);
    for (int i = 1; i <= n; ++i) u.push_back(0.5 - 0.5 * std::cos(kPi * i / (n + 1)));
    for (int i = 0; i < 200; ++i) {
        double e = std::pow(10.0, -8.0 + 6.0 * i / 199.0);
        u.push_back(e);
        u.push_back(1.0 - e);
    }
    std::vector<double> z;
    z.reserve(u.size());
    for (double x : u) z.push_back(lo + (hi - lo) * x);
    std::sort(z.begin(), z.end());
    z.erase(std::unique(z.begin(), z.end()), z.end());
    return z;
}

} // namespace detail

/// Sweeps the looping asymptotic trajectories, keeps their tails inside the
/// unit disk, mirrors them about the real axis and measures the fraction of
/// grid points of the open disk within epsilon of a tail sample.
inline CoverageReport disk_coverage_sweep(double alpha1, const CoverageOptions& opt = {})
{
    CoverageReport rep;
    rep.alpha1 = alpha1;
    const int g = opt.grid;
    const double h = 2.0 / (g - 1);
    std::vector<char> covered(static_cast<std::size_t>(g) * g, 0);
    auto mark = [&](cplx c) {
        for (double im : {c.imag(), -c.imag()}) {
            int i0 = static_cast<int>(std::floor((c.real() + 1.0 - opt.epsilon) / h));
            int i1 = static_cast<int>(std::ceil((c.real() + 1.0 + opt.epsilon) / h));
            int j0 = static_cast<int>(std::floor((im + 1.0 - opt.epsilon) / h));
            int j1 = static_cast<int>(std::ceil((im + 1.0 + opt.epsilon) / h));
            for (int i = std::max(0, i0); i <= std::min(g - 1, i1); ++i)
                for (int j = std::max(0, j0); j <= std::min(g - 1, j1); ++j) {
                    double x = -1.0 + i * h, y = -1.0 + j * h;
                    if (std::norm(cplx(x, y) - cplx(c.real(), im)) < opt.epsilon * opt.epsilon)
                        covered[static_cast<std::size_t>(i) * g + j] = 1;
                }
        }
    };

    auto interval = admissible_negative_zi(alpha1);
    if (interval) {
        double lo = interval->first, hi = interval->second;
        if (opt.zi_min) lo = std::max(lo, *opt.zi_min);
        if (opt.zi_max) hi = std::min(hi, *opt.zi_max);
        if (lo < hi) {
            std::vector<double> zis = detail::zi_grid(lo, hi, opt.families);
            std::vector<double> ss(opt.samples);
            for (int i = 0; i < opt.samples; ++i)
                ss[i] = std::tan(-kPi / 2 + 1e-5 + (kPi - 2e-5) * i / (opt.samples - 1));
            const std::size_t export_stride = std::max<std::size_t>(1, zis.size() / std::max(1, opt.export_families));
            for (std::size_t k = 0; k < zis.size(); ++k) {
                for (int sign : {1, -1}) {
                    AsymptoticFamily fam;
                    try {
                        fam = asymptotic_family(zis[k], alpha1, sign, opt.delta_form);
                    } catch (const InadmissibleZI&) {
                        continue;
                    }
                    ++rep.families;
                    double g2 = gamma_squared(fam);
                    if (!(g2 >= 0.0)) continue;
                    ++rep.looping_families;
                    const double gm = std::sqrt(g2);
                    const double sl = fam.w.real() - gm, sh = fam.w.real() + gm;
                    for (double s : ss) {
                        if (s >= sl && s <= sh) continue;
                        cplx c = fam.at_s(s);
                        if (std::norm(c) < 1.0) mark(c);
                    }
                    if (k % export_stride == 0) {
                        for (int i = 0; i < opt.export_samples; ++i) {
                            double s = std::tan(-kPi / 2 + 1e-4 + (kPi - 2e-4) * i / (opt.export_samples - 1));
                            cplx c = fam.at_s(s);
                            if (!(std::norm(c) < 1.0)) continue;
                            TailSample ts;
                            ts.zI = fam.zI;
                            ts.zR = fam.zR;
                            ts.t = 1.0 / s - fam.delta;
                            ts.c = c;
                            ts.on_loop = s >= sl && s <= sh;
                            ts.side = s > sh ? 1 : 0;
                            rep.samples.push_back(ts);
                        }
                    }
                }
            }
        }
    }
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            double x = -1.0 + i * h, y = -1.0 + j * h;
            if (x * x + y * y < 1.0) {
                ++rep.grid_points;
                rep.covered += covered[static_cast<std::size_t>(i) * g + j];
            }
        }
    rep.coverage = rep.grid_points ? static_cast<double>(rep.covered) / rep.grid_points : 0.0;
    return rep;
}

} // namespace polybounds

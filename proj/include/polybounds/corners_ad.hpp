#pragma once

// Corners A (kappa-, mu+) and D (kappa-, mu-).
//
// Both corners reduce to inverting the trajectory map
//   e1(y, tau) = s (2y+1) (1 + i tau (1 + 1/y)) (1 - i tau) / (2 (1 + i tau))
// with s = lambda = k + t1 + t2 for A and s = eta = k + 1/t1 + 1/t2 for D,
// over y in (-1, 0) and tau^2 >= (1-y)/(1+y).  The preimage fixes the
// layering angle theta (y = cos 2 theta) and the layering weight p, from
// which the laminate of the crystal with its mirror image is assembled.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "rho_core.hpp"

namespace polybounds {

enum class Corner { A, B, C, D };

inline const char* corner_name(Corner c)
{
    switch (c) {
    case Corner::A: return "A";
    case Corner::B: return "B";
    case Corner::C: return "C";
    case Corner::D: return "D";
    }
    return "?";
}

inline Corner parse_corner(const std::string& s)
{
    if (s == "A" || s == "a") return Corner::A;
    if (s == "B" || s == "b") return Corner::B;
    if (s == "C" || s == "c") return Corner::C;
    if (s == "D" || s == "d") return Corner::D;
    throw ConfigError("corner must be one of A, B, C, D (got '" + s + "')");
}

inline cplx e1_forward(double y, double tau, double scale)
{
    return scale * (2.0 * y + 1.0) * (1.0 + kI * tau * (1.0 + 1.0 / y)) * (1.0 - kI * tau) /
           (2.0 * (1.0 + kI * tau));
}

/// First shear-field coordinate along the trajectory, normalized so that
/// conj(e1) v1 - e1 = -scale.  Point D uses w1 = -(t2/t1) v1.
inline cplx v1_along(double y, double tau)
{
    return ((2.0 * y - 1.0) / (2.0 * y + 1.0) + kI * tau) * (1.0 - kI * tau) /
           ((1.0 + kI * tau) * (1.0 + kI * tau));
}

inline cplx de1_dy(double y, double tau, double scale)
{
    return scale * (2.0 - kI * tau * (1.0 / (y * y) - 2.0)) * (1.0 - kI * tau) / (2.0 * (1.0 + kI * tau));
}

inline cplx de1_dtau(double y, double tau, double scale)
{
    cplx brace = 2.0 * tau * (1.0 + 1.0 / y) - kI * ((1.0 - 1.0 / y) - tau * tau * (1.0 + 1.0 / y));
    return scale * (2.0 * y + 1.0) * brace / (2.0 * (1.0 + kI * tau) * (1.0 + kI * tau));
}

/// Region of attainable crystal coordinates: Re(e1/s) <= 1/2 with nonzero
/// real and imaginary parts.  Dividing by s covers a negative eta as well.
inline bool in_omega(cplx e1, double scale, double tol = 1e-12)
{
    cplx z = e1 / scale;
    return z.real() <= 0.5 + tol && std::abs(z.real()) > tol && std::abs(z.imag()) > tol;
}

/// Positivity margin used to certify that the gradients of e1 in y and tau
/// are not parallel.
inline double injectivity_margin(double y, double tau)
{
    return (1.0 / (y * y) - 1.0) + (1.0 - y) / (tau * tau * (1.0 + y));
}

inline bool check_injectivity_certificate(double y, double tau)
{
    const double dy = std::abs(de1_dy(y, tau, 1.0));
    const double dt = std::abs(de1_dtau(y, tau, 1.0));
    return dy > 1e-12 && dt > 1e-12 && injectivity_margin(y, tau) > 0.0;
}

inline bool in_sigma(double y, double tau, double tol = 1e-12)
{
    return y > -1.0 && y < 0.0 && tau * tau >= (1.0 - y) / (1.0 + y) - tol;
}

namespace detail {

inline std::vector<double> clustered_grid(double lo, double hi, int n)
{
    std::vector<double> g;
    g.reserve(n + 80);
    for (int i = 0; i <= n; ++i) g.push_back(lo + (hi - lo) * i / n);
    for (int i = 0; i < 40; ++i) {
        double u = std::pow(10.0, -13.0 + 11.0 * i / 39.0);
        g.push_back(lo + (hi - lo) * u);
        g.push_back(hi - (hi - lo) * u);
    }
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
}

} // namespace detail

/// Preimage (y, tau) of a crystal coordinate e1 under the trajectory map.
/// The modulus equation is solved for tau^2 in closed form; the argument
/// equation is then scanned in y on both sides of y = -1/2 and refined.
inline std::pair<double, double> invert_e1(cplx e1, double scale)
{
    if (std::abs(e1) <= 1e-14 * std::abs(scale))
        throw DegenerateLine("e1 = 0 is the image of the whole line y = -1/2");
    if (!in_omega(e1, scale))
        throw NotInOmega("e1 lies outside the attainable region");
    const cplx z = e1 / scale;
    const double z2 = std::norm(z);
    auto tau2 = [&](double y) {
        double a = 1.0 + 1.0 / y;
        return (4.0 * z2 / ((2.0 * y + 1.0) * (2.0 * y + 1.0)) - 1.0) / (a * a);
    };

    struct Candidate { double y, tau, err; };
    std::vector<Candidate> found;
    for (auto [lo, hi] : {std::pair{-1.0 + 1e-13, -0.5 - 1e-13}, std::pair{-0.5 + 1e-13, -1e-13}}) {
        std::vector<double> ys = detail::clustered_grid(lo, hi, 4000);
        for (double sgn : {1.0, -1.0}) {
            auto phase = [&](double y) {
                double t2 = tau2(y);
                if (!(t2 >= 0.0)) return std::nan("");
                return std::arg(e1_forward(y, sgn * std::sqrt(t2), 1.0) / z);
            };
            double prev = phase(ys[0]);
            for (std::size_t i = 1; i < ys.size(); ++i) {
                double cur = phase(ys[i]);
                if (!std::isnan(prev) && !std::isnan(cur) && prev * cur <= 0.0 && std::abs(prev - cur) < 1.0) {
                    double y;
                    if (prev == 0.0) y = ys[i - 1];
                    else if (cur == 0.0) y = ys[i];
                    else {
                        boost::uintmax_t it = 200;
                        auto tol = [](double a, double b) { return std::abs(a - b) <= 4e-16 * std::max(1e-300, std::abs(a)); };
                        auto r = boost::math::tools::toms748_solve(phase, ys[i - 1], ys[i], prev, cur, tol, it);
                        y = 0.5 * (r.first + r.second);
                    }
                    double tau = sgn * std::sqrt(std::max(0.0, tau2(y)));
                    if (in_sigma(y, tau, 1e-9)) {
                        double err = std::abs(e1_forward(y, tau, 1.0) - z);
                        found.push_back({y, tau, err});
                    }
                }
                prev = cur;
            }
        }
    }
    if (found.empty())
        throw NoRoot("no preimage found for e1 inside the attainable region");
    auto best = std::min_element(found.begin(), found.end(),
                                 [](const Candidate& a, const Candidate& b) { return a.err < b.err; });
    return {best->y, best->tau};
}

struct CornerParams {
    Corner corner = Corner::A;
    double scale = 0;  // lambda (A) or eta (D)
    cplx e1;           // crystal coordinate
    double y = 0, tau = 0, theta = 0, p = 0;
    double e1_prime = 0;     // orthotropic target s (2y+1)/(2y)
    double field1_prime = 0; // v1' = 1/(2y+1) (A) or w1' = -(t2/t1)/(2y+1) (D)
    double t_ratio = 1;      // t1/t2 (D only)
    // Proportions: crystal and mirror in the mirror-pair laminate, and the
    // crystal in the self-similar relamination.
    double f_c0_in_ctheta = 0, f_mirror_in_ctheta = 0, f_c0_relaminate = 0;
    bool interior_branch = false; // p in [0,1]: no self-similar form
    double identity_residual = 0;
};

/// Recovers theta, p, the orthotropic targets and the laminate proportions
/// from a preimage (y, tau).
inline CornerParams build_construction(double y, double tau, double scale, Corner corner, double t_ratio = 1.0)
{
    if (corner != Corner::A && corner != Corner::D)
        throw ConfigError("build_construction handles corners A and D only");
    if (!(y > -1.0 && y < 0.0))
        throw NotInOmega("y must lie in (-1, 0)");
    CornerParams c;
    c.corner = corner;
    c.scale = scale;
    c.y = y;
    c.tau = tau;
    c.t_ratio = t_ratio;
    c.e1 = e1_forward(y, tau, scale);
    c.theta = 0.5 * std::acos(y);
    c.p = 0.5 * (tau / std::tan(c.theta) + 1.0);
    c.e1_prime = scale * (2.0 * y + 1.0) / (2.0 * y);
    c.field1_prime = 1.0 / (2.0 * y + 1.0);
    if (corner == Corner::D) c.field1_prime = -c.field1_prime / t_ratio;

    const double p = c.p;
    if (p < 0.0) {
        c.f_c0_in_ctheta = (1.0 - p) / (1.0 - 2.0 * p);
        c.f_mirror_in_ctheta = -p / (1.0 - 2.0 * p);
        c.f_c0_relaminate = 1.0 / (1.0 - p);
    } else if (p > 1.0) {
        c.f_c0_in_ctheta = p / (2.0 * p - 1.0);
        c.f_mirror_in_ctheta = (p - 1.0) / (2.0 * p - 1.0);
        c.f_c0_relaminate = 1.0 / p;
    } else {
        c.interior_branch = true;
        c.f_c0_in_ctheta = 1.0 - p;
        c.f_mirror_in_ctheta = p;
        c.f_c0_relaminate = 0.0;
    }
    // conj(e1) v1 - e1 = -s along the whole trajectory
    const cplx v1 = v1_along(y, tau);
    c.identity_residual = std::abs(std::conj(c.e1) * v1 - c.e1 + scale) / std::max(1.0, std::abs(scale));
    if (c.identity_residual > 1e-10)
        throw NoRoot("average-field identity violated along the trajectory");
    return c;
}

/// Field pair realizing the purely imaginary case as the limit of a
/// vanishing loop (effective-medium scheme).
struct DegenerateScheme {
    RhoVector sigma1, sigma2, eps1, eps2;
    bool stress_compatible = false;
    bool strain_compatible = false;
    bool effective_medium_limit = true;
};

inline DegenerateScheme special_case_imaginary(cplx e1, double k, double lambda)
{
    if (std::abs(e1.real()) > 1e-12 * std::max(1.0, std::abs(e1)) || std::abs(e1.imag()) == 0.0)
        throw NotInOmega("special case requires a purely imaginary e1; real e1 is already orthotropic");
    DegenerateScheme s;
    const cplx r = lambda / e1;
    s.sigma1 = RhoVector(1.0 - r, 1.0, 1.0, 1.0);
    s.sigma2 = RhoVector(-r, 0.0, 0.0, 0.0);
    s.eps1 = RhoVector(-e1, e1, k / 2, k / 2);
    s.eps2 = RhoVector(0.0, 0.0, k / 2, k / 2);
    s.stress_compatible = check_jump(JumpKind::stress, s.sigma1 - s.sigma2);
    s.strain_compatible = check_jump(JumpKind::strain, s.eps1 - s.eps2);
    return s;
}

} // namespace polybounds

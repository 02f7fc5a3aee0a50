#include <gtest/gtest.h>

#include <random>

#include <polybounds/laminate.hpp>

#include "test_util.hpp"

using namespace polybounds;

namespace {

std::pair<double, double> random_sigma_point(std::mt19937& g)
{
    std::uniform_real_distribution<double> uy(-0.999, -0.001), ut(1.0, 6.0), sg(0.0, 1.0);
    for (;;) {
        double y = uy(g);
        if (std::abs(y + 0.5) < 1e-3) continue;
        double tmin = std::sqrt((1.0 - y) / (1.0 + y));
        double tau = tmin * ut(g);
        if (tau > 1e4) continue;
        return {y, sg(g) < 0.5 ? -tau : tau};
    }
}

} // namespace

TEST(CornersAD, ForwardMapIdentity)
{
    std::mt19937 g(21);
    for (int t = 0; t < 200; ++t) {
        auto [y, tau] = random_sigma_point(g);
        const double s = 2.7;
        cplx e1 = e1_forward(y, tau, s);
        cplx v1 = v1_along(y, tau);
        EXPECT_NEAR(std::abs(std::conj(e1) * v1 - e1 + s), 0.0, 1e-10 * std::max(1.0, std::abs(e1)));
        EXPECT_GE(std::abs(v1), 1.0 - 1e-12); // |v1'| >= 1 along the trajectory
    }
}

TEST(CornersAD, DerivativesMatchFiniteDifferences)
{
    std::mt19937 g(22);
    for (int t = 0; t < 50; ++t) {
        auto [y, tau] = random_sigma_point(g);
        const double h = 1e-6;
        cplx fy = (e1_forward(y + h, tau, 1.0) - e1_forward(y - h, tau, 1.0)) / (2 * h);
        cplx ft = (e1_forward(y, tau + h, 1.0) - e1_forward(y, tau - h, 1.0)) / (2 * h);
        EXPECT_NEAR(std::abs(fy - de1_dy(y, tau, 1.0)), 0.0, 1e-5 * std::max(1.0, std::abs(fy)));
        EXPECT_NEAR(std::abs(ft - de1_dtau(y, tau, 1.0)), 0.0, 1e-5 * std::max(1.0, std::abs(ft)));
    }
}

TEST(CornersAD, InjectivityCertificates)
{
    std::mt19937 g(23);
    for (int t = 0; t < 1000; ++t) {
        auto [y, tau] = random_sigma_point(g);
        EXPECT_GT(injectivity_margin(y, tau), 0.0);
        EXPECT_TRUE(check_injectivity_certificate(y, tau));
    }
}

TEST(CornersAD, InvertRoundTrip)
{
    std::mt19937 g(24);
    for (int t = 0; t < 200; ++t) {
        auto [y, tau] = random_sigma_point(g);
        cplx e1 = e1_forward(y, tau, 1.3);
        ASSERT_TRUE(in_omega(e1, 1.3));
        auto [yy, tt] = invert_e1(e1, 1.3);
        EXPECT_NEAR(std::abs(e1_forward(yy, tt, 1.3) - e1), 0.0, 1e-8 * std::max(1.0, std::abs(e1)));
        EXPECT_NEAR(yy, y, 1e-6);
        EXPECT_NEAR(tt, tau, 1e-6 * std::max(1.0, std::abs(tau)));
    }
}

TEST(CornersAD, InvertErrors)
{
    EXPECT_THROW(invert_e1(cplx(0.0, 0.0), 1.0), DegenerateLine);
    EXPECT_THROW(invert_e1(cplx(0.8, 0.3), 1.0), NotInOmega);
    EXPECT_THROW(invert_e1(cplx(0.3, 0.0), 1.0), NotInOmega);
    EXPECT_FALSE(in_omega(cplx(0.0, 0.4), 1.0));
    EXPECT_TRUE(in_omega(cplx(0.49, -0.4), 1.0));
}

TEST(CornersAD, BuildConstructionArithmetic)
{
    // y = cos 2 theta and p = (tau / tan theta + 1)/2
    const double y = -0.3, tau = -2.5;
    CornerParams c = build_construction(y, tau, 2.0, Corner::A);
    EXPECT_NEAR(std::cos(2 * c.theta), y, 1e-14);
    EXPECT_NEAR(c.p, 0.5 * (tau / std::tan(c.theta) + 1.0), 1e-14);
    EXPECT_NEAR(c.e1_prime, 2.0 * (2 * y + 1) / (2 * y), 1e-14);
    ASSERT_LT(c.p, 0.0);
    EXPECT_NEAR(c.f_c0_in_ctheta + c.f_mirror_in_ctheta, 1.0, 1e-15);
    EXPECT_NEAR(c.f_c0_relaminate, 1.0 / (1.0 - c.p), 1e-15);
    CornerParams d = build_construction(y, tau, 2.0, Corner::D, 0.5);
    EXPECT_NEAR(d.field1_prime, -2.0 / (2 * y + 1), 1e-14);
    // |w1'| >= |t2/t1|
    EXPECT_GE(std::abs(d.field1_prime), 2.0 - 1e-12);
    EXPECT_THROW(build_construction(0.2, 1.0, 1.0, Corner::A), NotInOmega);
}

TEST(CornersAD, FractionsForSmallNegativeP)
{
    // with p = -0.0669 the mirror-pair form mixes 0.941 / 0.059 and the
    // self-similar form uses 1/(1-p) = 0.937 of the crystal
    const double theta = 1.0;
    const double p = -0.0669;
    const double tau = (2 * p - 1) * std::tan(theta);
    const double y = std::cos(2 * theta);
    CornerParams c = build_construction(y, tau, 1.0, Corner::A);
    EXPECT_NEAR(c.p, p, 1e-12);
    EXPECT_NEAR(c.f_c0_in_ctheta, 0.941, 5e-4);
    EXPECT_NEAR(c.f_mirror_in_ctheta, 0.059, 5e-4);
    EXPECT_NEAR(c.f_c0_relaminate, 0.937, 5e-4);
}

TEST(CornersAD, InteriorBranchHasNoSelfSimilarForm)
{
    const double theta = 1.0, p = 0.4;
    const double tau = (2 * p - 1) * std::tan(theta);
    CornerParams c = build_construction(std::cos(2 * theta), tau, 1.0, Corner::A);
    EXPECT_TRUE(c.interior_branch);
    EXPECT_THROW(build_corner_tree(c, 0.0), BranchAmbiguity);
}

TEST(CornersAD, PointDMapIsPointAMapWithScale)
{
    for (double y : {-0.8, -0.2})
        for (double tau : {-3.0, 4.0}) {
            cplx a = e1_forward(y, tau, 1.0);
            EXPECT_NEAR(std::abs(e1_forward(y, tau, -1.7) + 1.7 * a), 0.0, 1e-13);
        }
}

TEST(CornersAD, ImaginarySpecialCase)
{
    DegenerateScheme s = special_case_imaginary(cplx(0.0, 0.8), 0.5, 2.0);
    EXPECT_TRUE(s.stress_compatible);
    EXPECT_TRUE(s.strain_compatible);
    EXPECT_THROW(special_case_imaginary(cplx(0.3, 0.0), 0.5, 2.0), NotInOmega);
}

TEST(CornersAD, EndToEndRandomCrystals)
{
    std::mt19937 g(25);
    for (int t = 0; t < 6; ++t) {
        RhoTensor c = voigt_to_rho(testutil::random_voigt(g));
        BoundsRectangle r = rectangle(c);
        for (Corner k : {Corner::A, Corner::D}) {
            CornerADResult res = construct_corner_ad(c, r, k);
            ASSERT_EQ(res.kind, "laminate");
            ASSERT_TRUE(res.report.has_value());
            EXPECT_TRUE(res.report->pass) << corner_name(k);
            EXPECT_LT(res.e1_prime_error, 1e-6);
            EXPECT_LT(std::abs(res.e1_prime_computed.imag()), 1e-6);
            EXPECT_LT(res.mirror_form_difference, 1e-8);
            EXPECT_LT(res.crystal_identity_residual, 1e-8);
        }
    }
}

TEST(CornersAD, OrthotropicCrystalIsItsOwnConstruction)
{
    // orthotropic axes aligned with the frame: C1112 = C2212 = 0
    RhoTensor c = voigt_to_rho({5.0, 1.0, 0.0, 2.0, 0.0, 1.2});
    BoundsRectangle r = rectangle(c);
    CornerADResult res = construct_corner_ad(c, r, Corner::A);
    EXPECT_EQ(res.kind, "orthotropic");
    ASSERT_TRUE(res.report.has_value());
    EXPECT_TRUE(res.report->pass);
}

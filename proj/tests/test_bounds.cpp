#include <gtest/gtest.h>

#include <random>

#include <polybounds/bounds.hpp>

#include "test_util.hpp"

using namespace polybounds;

TEST(Bounds, IsotropicRectangleCollapses)
{
    std::mt19937 g(11);
    std::uniform_real_distribution<double> u(0.2, 5.0);
    for (int t = 0; t < 20; ++t) {
        double kappa = u(g), mu = u(g);
        BoundsRectangle r = rectangle(voigt_to_rho(VoigtTensor::isotropic(kappa, mu)));
        double s = 1e-9 * std::max(kappa, mu);
        EXPECT_NEAR(r.kappa_minus(), kappa, s);
        EXPECT_NEAR(r.kappa_plus(), kappa, s);
        EXPECT_NEAR(r.mu_minus(), mu, s);
        EXPECT_NEAR(r.mu_plus(), mu, s);
    }
}

TEST(Bounds, KnownAnisotropicValues)
{
    BoundsRectangle r = rectangle(voigt_to_rho({4.1, 1.2, 0.7, 3.3, -0.4, 1.6}));
    EXPECT_NEAR(r.kappa_minus(), 2.41516936671576, 1e-11);
    EXPECT_NEAR(r.kappa_plus(), 2.43549491152942, 1e-11);
    EXPECT_NEAR(r.mu_minus(), 1.22933538780772, 1e-10);
    EXPECT_NEAR(r.mu_plus(), 1.2861786579409, 1e-10);
}

TEST(Bounds, BulkLowerIsReussAverage)
{
    std::mt19937 g(12);
    for (int t = 0; t < 20; ++t) {
        VoigtTensor v = testutil::random_voigt(g);
        Eigen::Matrix3d s = v.mandel().inverse();
        double reuss = 1.0 / (s(0, 0) + s(1, 1) + 2.0 * s(0, 1));
        auto [k, e] = bulk_lower(voigt_to_rho(v));
        (void)e;
        EXPECT_NEAR(1.0 / k, reuss, 1e-12 * reuss);
    }
}

TEST(Bounds, OrderingAndVoigtReussSandwich)
{
    std::mt19937 g(13);
    for (int t = 0; t < 20; ++t) {
        VoigtTensor v = testutil::random_voigt(g);
        BoundsRectangle r = rectangle(voigt_to_rho(v));
        EXPECT_LE(r.kappa_minus(), r.kappa_plus() * (1 + 1e-12));
        EXPECT_LE(r.mu_minus(), r.mu_plus() * (1 + 1e-12));
        // Voigt averages bound everything from above
        double kv = (v.c1111 + v.c2222 + 2 * v.c1122) / 4;
        double mv = (v.c1111 + v.c2222 - 2 * v.c1122 + 4 * v.c1212) / 8;
        EXPECT_LE(r.kappa_plus(), kv * (1 + 1e-12));
        EXPECT_LE(r.mu_plus(), mv * (1 + 1e-12));
    }
}

TEST(Bounds, InvariantUnderRotationAndMirror)
{
    std::mt19937 g(14);
    RhoTensor c = voigt_to_rho(testutil::random_voigt(g));
    BoundsRectangle a = rectangle(c), b = rectangle(rotate_tensor(c, 0.77)), m = rectangle(mirror_tensor(c));
    for (const auto* x : {&b, &m}) {
        EXPECT_NEAR(a.kappa_minus(), x->kappa_minus(), 1e-10);
        EXPECT_NEAR(a.kappa_plus(), x->kappa_plus(), 1e-10);
        EXPECT_NEAR(a.mu_minus(), x->mu_minus(), 1e-9);
        EXPECT_NEAR(a.mu_plus(), x->mu_plus(), 1e-9);
    }
}

TEST(Bounds, OptimalFieldsAndNormalization)
{
    std::mt19937 g(15);
    for (int t = 0; t < 10; ++t) {
        RhoTensor c = voigt_to_rho(testutil::random_voigt(g));
        BoundsRectangle r = rectangle(c);
        EXPECT_LT(r.bulk.residual_c, 1e-9);
        EXPECT_NEAR(std::abs(r.bulk.c(2) - 1.0), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(r.bulk.c(1) - std::conj(r.bulk.c(0))), 0.0, 1e-9);
        ASSERT_TRUE(r.upper.normalized);
        ASSERT_TRUE(r.lower.normalized);
        EXPECT_LT(r.upper.residual, 1e-8);
        EXPECT_LT(r.lower.residual, 1e-8);
        EXPECT_NEAR(std::abs(r.upper.vector(1) + 1.0), 0.0, 1e-9);
        EXPECT_NEAR(std::abs(r.lower.vector(1) - 1.0), 0.0, 1e-9);
        EXPECT_NEAR(std::abs(r.lower.vector(2) - r.lower.t2 / r.lower.t1), 0.0, 1e-8);
        // the translated forms sit on the boundary of positivity
        EXPECT_NEAR(r.upper.min_eig, 0.0, 1e-9);
        EXPECT_NEAR(r.lower.min_eig, 0.0, 1e-9);
        EXPECT_GE(r.alpha1, 0.0);
        EXPECT_TRUE(r.lambda_nonnegative);
        EXPECT_TRUE(r.lower_denominator_nonnegative);
    }
}

TEST(Bounds, TranslationCurveIsConvexAndAdmissible)
{
    std::mt19937 g(16);
    RhoTensor c = voigt_to_rho(testutil::random_voigt(g));
    for (CurveMode mode : {CurveMode::compliance, CurveMode::stiffness}) {
        auto pts = trace_translation_curve(c, mode, 180);
        ASSERT_EQ(pts.size(), 180u);
        // convex polygon: all cross products of consecutive edges share a sign
        int pos = 0, neg = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            auto a = pts[i], b = pts[(i + 1) % pts.size()], d = pts[(i + 2) % pts.size()];
            double cr = (b.first - a.first) * (d.second - b.second) - (b.second - a.second) * (d.first - b.first);
            if (cr > 1e-12) ++pos;
            if (cr < -1e-12) ++neg;
        }
        EXPECT_TRUE(pos == 0 || neg == 0);
    }
}

TEST(Bounds, RejectsIndefiniteCrystal)
{
    EXPECT_THROW(rectangle(voigt_to_rho({1.0, 2.0, 0.0, 1.0, 0.0, 0.5})), InvalidTensor);
}

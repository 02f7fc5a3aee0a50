#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <polybounds/io.hpp>

#include "test_util.hpp"

using namespace polybounds;
using io::json;

namespace {

std::string temp_path(const std::string& name)
{
    return (std::filesystem::temp_directory_path() / ("polybounds_test_" + name)).string();
}

} // namespace

TEST(IO, SeventeenDigitsRoundTrip)
{
    std::mt19937_64 g(61);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int t = 0; t < 200; ++t) {
        double x = u(g);
        EXPECT_EQ(std::stod(io::format_double(x)), x);
    }
    EXPECT_EQ(io::format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(io::format_double(std::nan("")), "null");
    json j{{"x", 1.0 / 3.0}};
    EXPECT_NE(io::dump(j).find("0.33333333333333331"), std::string::npos);
}

TEST(IO, TensorRoundTrip)
{
    std::mt19937 g(62);
    RhoTensor c = voigt_to_rho(testutil::random_voigt(g));
    json j = json::parse(io::dump(io::tensor_json(c)));
    EXPECT_EQ((io::tensor_from(j).m() - c.m()).norm(), 0.0);
    VoigtTensor v = testutil::random_voigt(g);
    EXPECT_EQ(testutil::voigt_distance(io::voigt_from(json::parse(io::dump(io::to_json(v)))), v), 0.0);
}

TEST(IO, TreeRoundTrip)
{
    auto tree = LaminateNode::layered(LaminateNode::self_similar(LaminateNode::leaf(0.2), 0.7, -0.4, 0.1),
                                      LaminateNode::leaf(-0.3, true), 0.35, 0.05, Eigen::Vector2d(0.6, 0.8));
    std::mt19937 g(63);
    RhoTensor c = voigt_to_rho(testutil::random_voigt(g));
    auto back = io::tree_from(json::parse(io::dump(io::to_json(*tree))));
    EXPECT_LT((evaluate_tree(*back, c).m() - evaluate_tree(*tree, c).m()).norm(), 1e-13);
    EXPECT_THROW(io::tree_from(json{{"kind", "spiral"}, {"rotation", 0.0}, {"fraction", 0.5}, {"children", json::array()}}),
                 ConfigError);
    EXPECT_THROW(io::tree_from(json{{"kind", "layered"}, {"rotation", 0.0}, {"fraction", 1.5},
                                    {"children", json::array()}}),
                 ConfigError);
}

TEST(IO, CrystalFileErrors)
{
    EXPECT_THROW(io::read_crystal(temp_path("does_not_exist.json")), IOError);
    const std::string bad = temp_path("bad.json");
    io::write_text_file(bad, "{ not json");
    EXPECT_THROW(io::read_crystal(bad), ConfigError);
    io::write_text_file(bad, R"({"C1111": 1, "C1122": 0.2})");
    EXPECT_THROW(io::read_crystal(bad), ConfigError);
    io::write_text_file(bad, R"({"crystal": {"C1111": 3, "C1122": 1, "C1112": 0, "C2222": 3, "C2212": 0, "C1212": 1}})");
    EXPECT_EQ(io::read_crystal(bad).c1111, 3.0);
    std::remove(bad.c_str());
}

TEST(IO, CsvAndSvg)
{
    CoverageReport r;
    r.alpha1 = 0.49;
    r.samples.push_back({-0.5, 0.2, 1.0, cplx(0.1, -0.2), false, 0});
    r.samples.push_back({-0.5, 0.2, 1.5, cplx(0.2, -0.3), false, 0});
    r.samples.push_back({-0.5, 0.2, 2.0, cplx(0.3, -0.1), true, 0});
    r.samples.push_back({-0.5, 0.2, 3.0, cplx(0.4, -0.1), false, 1});
    r.samples.push_back({-0.5, 0.2, 3.5, cplx(0.5, -0.2), false, 1});
    std::string csv = io::tails_csv({r});
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "zI,zR,t,re,im,on_loop");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
    std::string svg = io::tails_svg({r}, cplx(0.3, 0.1));
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("<circle"), std::string::npos);
    EXPECT_NE(svg.find("#d62728"), std::string::npos);
    EXPECT_NE(svg.find("#1f77b4"), std::string::npos);
    EXPECT_NE(svg.find(">c1</text>"), std::string::npos);
    EXPECT_NE(svg.find("alpha1 = 0.49"), std::string::npos);
}

TEST(IO, BoundsReportHasAllFields)
{
    std::mt19937 g(64);
    json j = io::to_json(rectangle(voigt_to_rho(testutil::random_voigt(g))));
    for (const char* k : {"kappa_minus", "kappa_plus", "mu_minus", "mu_plus", "alpha1"}) EXPECT_TRUE(j.contains(k)) << k;
}

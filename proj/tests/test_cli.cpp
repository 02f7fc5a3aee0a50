#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <polybounds/io.hpp>

using polybounds::io::json;

namespace {

const std::string kBin = POLYBOUNDS_BIN;
const std::string kData = POLYBOUNDS_DATA;

std::string tmp(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / "polybounds_cli_test";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

int run(const std::string& args, const std::string& env = "")
{
    std::string cmd = env + (env.empty() ? "" : " ") + kBin + " " + args + " 2>" + tmp("stderr.txt");
    int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const std::string& path)
{
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

} // namespace

TEST(Cli, IsotropicBoundsAreDegenerate)
{
    const std::string out = tmp("iso.json");
    ASSERT_EQ(run("bounds --input " + kData + "/isotropic.json --output " + out), 0);
    json j = json::parse(slurp(out));
    EXPECT_TRUE(j.at("rectangle").at("degenerate").get<bool>());
    EXPECT_NEAR(j.at("rectangle").at("kappa_minus").get<double>(), 2.0, 1e-9);
    EXPECT_NEAR(j.at("rectangle").at("mu_plus").get<double>(), 1.0, 1e-9);
}

TEST(Cli, AttainAndVerifyRoundTrip)
{
    for (std::string corner : {"A", "D"}) {
        const std::string out = tmp("attain_" + corner + ".json");
        ASSERT_EQ(run("attain --corner " + corner + " --input " + kData + "/anisotropic.json --output " + out), 0);
        EXPECT_EQ(run("verify --input " + out), 0);
        // tamper with the stored tensor
        json j = json::parse(slurp(out));
        json& rho = j.at("c_prime").at("rho");
        for (auto& row : rho)
            for (auto& e : row) e["re"] = e.at("re").get<double>() * 1.01;
        j.at("c_prime").erase("voigt");
        const std::string bad = tmp("tampered_" + corner + ".json");
        polybounds::io::write_text_file(bad, polybounds::io::dump(j));
        EXPECT_EQ(run("verify --input " + bad), 7);
        EXPECT_NE(slurp(tmp("stderr.txt")).find("FAILED"), std::string::npos);
    }
}

TEST(Cli, TrajectoriesWriteCsvAndSvg)
{
    const std::string csv = tmp("t.csv"), svg = tmp("t.svg"), out = tmp("t.json");
    ASSERT_EQ(run("trajectories --alpha1 0.49 --grid 40 --csv " + csv + " --svg " + svg + " --output " + out), 0);
    std::string c = slurp(csv);
    EXPECT_EQ(c.substr(0, c.find('\n')), "zI,zR,t,re,im,on_loop");
    EXPECT_NE(slurp(svg).find("<svg"), std::string::npos);
    json j = json::parse(slurp(out));
    EXPECT_GE(j.at("coverage")[0].at("coverage").get<double>(), 0.95);
}

TEST(Cli, ErrorsMapToExitCodes)
{
    EXPECT_EQ(run("bounds --input " + tmp("missing.json")), 3);
    EXPECT_NE(slurp(tmp("stderr.txt")).find("IOError"), std::string::npos);
    EXPECT_EQ(run("bounds --input " + kData + "/isotropic.json --output " + tmp("x.json"), "POLYBOUNDS_TOL=abc"), 2);
    EXPECT_EQ(run("attain --corner E --input " + kData + "/isotropic.json"), 2);
    EXPECT_EQ(run(""), 2);
}

TEST(Cli, OutputIsDeterministic)
{
    const std::string a = tmp("det_a.json"), b = tmp("det_b.json");
    ASSERT_EQ(run("attain --corner B --input " + kData + "/anisotropic.json --output " + a), 0);
    ASSERT_EQ(run("attain --corner B --input " + kData + "/anisotropic.json --output " + b), 0);
    EXPECT_EQ(slurp(a), slurp(b));
}

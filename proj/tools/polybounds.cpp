// polybounds: bounds on the effective moduli of planar polycrystals and the
// laminate microstructures attaining them.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <polybounds/config.hpp>
#include <polybounds/io.hpp>

using namespace polybounds;
using io::json;

namespace {

struct RunConfig {
    std::string command;
    std::string input, output, csv, svg;
    std::string corner = "A";
    std::vector<double> alpha1;
    std::optional<double> zi_min, zi_max;
    int grid = 100;
    double epsilon = 0.02;
    std::optional<double> tol;
};

// Exit statuses per error category; anything else maps to 1.
int exit_code(const std::string& category)
{
    static const std::map<std::string, int> codes = {
        {"ConfigError", 2},         {"IOError", 3},     {"NormalizationFailure", 4},
        {"NotAttainedWithinSearch", 5}, {"NoConvergence", 6}, {"VerificationFailed", 7},
        {"InvalidTensor", 8},       {"LostPositivity", 9},
    };
    auto it = codes.find(category);
    return it == codes.end() ? 1 : it->second;
}

void emit(const RunConfig& cfg, const json& report)
{
    const std::string text = io::dump(report);
    if (cfg.output.empty()) std::cout << text;
    else io::write_text_file(cfg.output, text);
}

VerifyOptions verify_options(const RunConfig& cfg)
{
    VerifyOptions v;
    if (cfg.tol) {
        v.eig_slack = *cfg.tol;
        v.residual = *cfg.tol;
    }
    return v;
}

RhoTensor load_crystal(const RunConfig& cfg, VoigtTensor* voigt = nullptr)
{
    if (cfg.input.empty()) throw ConfigError("--input is required");
    VoigtTensor v = io::read_crystal(cfg.input);
    if (voigt) *voigt = v;
    return voigt_to_rho(v);
}

int run_bounds(const RunConfig& cfg)
{
    VoigtTensor v;
    RhoTensor c0 = load_crystal(cfg, &v);
    BoundsRectangle rect = rectangle(c0);
    json out{{"command", "bounds"}, {"crystal", io::to_json(v)}, {"rectangle", io::to_json(rect)}};
    emit(cfg, out);
    return 0;
}

int run_attain(const RunConfig& cfg)
{
    VoigtTensor v;
    RhoTensor c0 = load_crystal(cfg, &v);
    const Corner corner = parse_corner(cfg.corner);
    BoundsRectangle rect = rectangle(c0);
    const VerifyOptions vopt = verify_options(cfg);

    json out{{"command", "attain"}, {"corner", corner_name(corner)}, {"crystal", io::to_json(v)},
             {"rectangle", io::to_json(rect)}};
    std::optional<RhoTensor> cp;
    std::optional<AttainmentReport> rep;
    if (corner == Corner::A || corner == Corner::D) {
        CornerADResult r = construct_corner_ad(c0, rect, corner, vopt);
        out["construction"] = io::to_json(r);
        cp = r.c_prime;
        rep = r.report;
    } else {
        CornerBCResult r = construct_corner_bc(c0, rect, corner, vopt);
        out["construction"] = io::to_json(r);
        if (!r.success) {
            out["success"] = false;
            emit(cfg, out);
            throw NotAttainedWithinSearch("no candidate construction passed verification for corner " +
                                          std::string(corner_name(corner)));
        }
        cp = r.c_prime;
        rep = r.report;
    }
    if (cp) out["c_prime"] = io::tensor_json(*cp);
    if (rep) out["verification"] = io::to_json(*rep);
    out["success"] = rep ? rep->pass : false;
    emit(cfg, out);
    return rep && !rep->pass ? exit_code("VerificationFailed") : 0;
}

int run_trajectories(const RunConfig& cfg)
{
    std::vector<double> alphas = cfg.alpha1;
    std::optional<cplx> marker;
    json out{{"command", "trajectories"}};
    if (!cfg.input.empty()) {
        VoigtTensor v;
        RhoTensor c0 = load_crystal(cfg, &v);
        BoundsRectangle rect = rectangle(c0);
        const double angle = rect.upper.normalize_angle + kPi / 2;
        cplx c1 = rotate_vector(rect.bulk.c, angle)(0);
        // tails are drawn in the lower half plane and mirrored; mark both images
        marker = c1;
        out["crystal"] = io::to_json(v);
        out["c1"] = io::to_json(c1);
        if (alphas.empty()) alphas.push_back(rect.alpha1);
    }
    if (alphas.empty()) alphas = {0.1, 0.49, 0.75, 0.99, 1.25, 1.51, 2.0, 6.0};

    CoverageOptions opt;
    opt.grid = cfg.grid;
    opt.epsilon = cfg.epsilon;
    opt.zi_min = cfg.zi_min;
    opt.zi_max = cfg.zi_max;
    std::vector<CoverageReport> reports;
    json cov = json::array();
    for (double a : alphas) {
        if (!(a > 0.0)) throw ConfigError("--alpha1 values must be positive");
        reports.push_back(disk_coverage_sweep(a, opt));
        cov.push_back(io::to_json(reports.back()));
    }
    out["grid"] = cfg.grid;
    out["epsilon"] = cfg.epsilon;
    out["coverage"] = cov;
    const std::string csv_path = cfg.csv.empty() ? "trajectories.csv" : cfg.csv;
    const std::string svg_path = cfg.svg.empty() ? "trajectories.svg" : cfg.svg;
    io::write_text_file(csv_path, io::tails_csv(reports));
    io::write_text_file(svg_path, io::tails_svg(reports, marker));
    out["csv"] = csv_path;
    out["svg"] = svg_path;
    emit(cfg, out);
    return 0;
}

/// Rebuilds C' from the stored tree, compares it with the stored tensor and
/// re-checks the attainment conditions.
int run_verify(const RunConfig& cfg)
{
    if (cfg.input.empty()) throw ConfigError("--input is required");
    json in = io::read_json_file(cfg.input);
    if (!in.contains("crystal") || !in.contains("corner") || !in.contains("c_prime") || !in.contains("construction"))
        throw ConfigError("construction file needs crystal, corner, construction and c_prime entries");
    const Corner corner = parse_corner(in.at("corner").get<std::string>());
    RhoTensor c0 = voigt_to_rho(io::voigt_from(in.at("crystal")));
    RhoTensor cp = io::tensor_from(in.at("c_prime"));
    BoundsRectangle rect = rectangle(c0);
    const VerifyOptions vopt = verify_options(cfg);

    json residuals = json::array();
    bool pass = true;
    auto add = [&](const std::string& name, double value, double threshold) {
        bool ok = value <= threshold;
        pass = pass && ok;
        residuals.push_back(json{{"name", name}, {"value", value}, {"threshold", threshold}, {"pass", ok}});
    };
    // voigt and rho entries must describe the same tensor
    if (in.at("c_prime").contains("voigt") && in.at("c_prime").contains("rho")) {
        RhoTensor alt = voigt_to_rho(io::voigt_from(in.at("c_prime").at("voigt")));
        add("c_prime voigt/rho consistency", (alt.m() - cp.m()).norm() / cp.m().norm(), 1e-10);
    }
    const json& cons = in.at("construction");
    if (cons.contains("tree")) {
        RhoTensor rebuilt = evaluate_tree(*io::tree_from(cons.at("tree")), c0);
        add("tree reproduces c_prime", (rebuilt.m() - cp.m()).norm() / cp.m().norm(), 1e-7);
    }
    AttainmentReport rep = verify_attainment(cp, corner, rect, vopt);
    for (const auto& c : rep.checks) {
        residuals.push_back(json{{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}});
        pass = pass && c.pass;
    }
    json out{{"command", "verify"}, {"corner", corner_name(corner)}, {"pass", pass}, {"residuals", residuals}};
    emit(cfg, out);
    if (!pass) {
        for (const auto& r : residuals)
            if (!r.at("pass").get<bool>())
                std::cerr << "FAILED " << r.at("name").get<std::string>() << ": "
                          << io::format_double(r.at("value").get<double>()) << " (threshold "
                          << io::format_double(r.at("threshold").get<double>()) << ")\n";
        return exit_code("VerificationFailed");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Bounds on planar polycrystal moduli and the laminates attaining them"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--input", cfg.input, "Crystal JSON (or construction file for verify)");
        sub->add_option("--output", cfg.output, "Report path (default: stdout)");
        sub->add_option("--tol", cfg.tol, "Verification tolerance")->check(CLI::PositiveNumber);
    };
    auto* bounds = app.add_subcommand("bounds", "Bulk and shear bounds of a crystal");
    common(bounds);
    auto* attain = app.add_subcommand("attain", "Construct a laminate attaining a corner");
    common(attain);
    attain->add_option("--corner", cfg.corner, "A, B, C or D")->check(CLI::IsMember({"A", "B", "C", "D"}));
    auto* traj = app.add_subcommand("trajectories", "Sweep asymptotic trajectory tails over the unit disk");
    common(traj);
    traj->add_option("--alpha1", cfg.alpha1, "alpha1 values")->delimiter(',');
    traj->add_option("--zi-min", cfg.zi_min, "Lower zI limit");
    traj->add_option("--zi-max", cfg.zi_max, "Upper zI limit");
    traj->add_option("--grid", cfg.grid, "Coverage grid resolution")->check(CLI::Range(16, 100000));
    traj->add_option("--epsilon", cfg.epsilon, "Coverage radius")->check(CLI::PositiveNumber);
    traj->add_option("--csv", cfg.csv, "CSV output path");
    traj->add_option("--svg", cfg.svg, "SVG output path");
    auto* verify = app.add_subcommand("verify", "Re-check a construction file");
    common(verify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : exit_code("ConfigError");
    }

    try {
        if (!cfg.tol && std::getenv("POLYBOUNDS_TOL")) cfg.tol = default_tolerance();
        if (bounds->parsed()) return run_bounds(cfg);
        if (attain->parsed()) return run_attain(cfg);
        if (traj->parsed()) return run_trajectories(cfg);
        if (verify->parsed()) return run_verify(cfg);
    } catch (const Error& e) {
        std::cerr << io::dump(json{{"error", e.category()}, {"message", e.what()}});
        return exit_code(e.category());
    } catch (const std::exception& e) {
        std::cerr << io::dump(json{{"error", "InternalError"}, {"message", e.what()}});
        return 1;
    }
    return 0;
}

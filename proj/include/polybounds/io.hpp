#pragma once

// Serialization: crystal files, reports, laminate trees, CSV samples and the
// SVG rendering of trajectory tails.  Output is deterministic: objects keep
// insertion order and every double is printed with 17 significant digits.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bounds.hpp"
#include "corners_ad.hpp"
#include "corners_bc.hpp"
#include "errors.hpp"
#include "laminate.hpp"
#include "rho_core.hpp"

namespace polybounds::io {

using json = nlohmann::ordered_json;

inline std::string format_double(double x)
{
    if (!std::isfinite(x)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace detail {

inline void write_indent(std::ostream& os, int n)
{
    for (int i = 0; i < n; ++i) os.put(' ');
}

inline void write_value(std::ostream& os, const json& j, int indent, int depth)
{
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) {
            os << "{}";
            return;
        }
        os << "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) os << ",\n";
            first = false;
            write_indent(os, indent * (depth + 1));
            os << json(it.key()).dump() << ": ";
            write_value(os, it.value(), indent, depth + 1);
        }
        os << "\n";
        write_indent(os, indent * depth);
        os << "}";
        return;
    }
    case json::value_t::array: {
        if (j.empty()) {
            os << "[]";
            return;
        }
        // Arrays of scalars stay on one line.
        bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
        if (flat) {
            os << "[";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) os << ", ";
                write_value(os, j[i], indent, depth + 1);
            }
            os << "]";
            return;
        }
        os << "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) os << ",\n";
            write_indent(os, indent * (depth + 1));
            write_value(os, j[i], indent, depth + 1);
        }
        os << "\n";
        write_indent(os, indent * depth);
        os << "]";
        return;
    }
    case json::value_t::number_float:
        os << format_double(j.get<double>());
        return;
    default:
        os << j.dump();
    }
}

} // namespace detail

inline std::string dump(const json& j)
{
    std::ostringstream os;
    detail::write_value(os, j, 2, 0);
    os << "\n";
    return os.str();
}

inline void write_text_file(const std::string& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IOError("cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw IOError("failed writing '" + path + "'");
}

inline json read_json_file(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw IOError("cannot open '" + path + "'");
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Numbers, vectors, tensors

inline json to_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

inline double number_at(const json& j, const std::string& key)
{
    if (!j.contains(key)) throw ConfigError("missing key '" + key + "'");
    if (!j.at(key).is_number()) throw ConfigError("key '" + key + "' must be a number");
    return j.at(key).get<double>();
}

inline cplx complex_from(const json& j)
{
    if (j.is_number()) return {j.get<double>(), 0.0};
    return {number_at(j, "re"), number_at(j, "im")};
}

inline json to_json(const Vec4& v)
{
    json a = json::array();
    for (int i = 0; i < 4; ++i) a.push_back(to_json(v(i)));
    return a;
}

inline json matrix_json(const Mat4& m)
{
    json rows = json::array();
    for (int i = 0; i < 4; ++i) {
        json r = json::array();
        for (int k = 0; k < 4; ++k) r.push_back(to_json(m(i, k)));
        rows.push_back(r);
    }
    return rows;
}

inline Mat4 matrix_from(const json& j)
{
    if (!j.is_array() || j.size() != 4) throw ConfigError("rho matrix must be a 4x4 array");
    Mat4 m;
    for (int i = 0; i < 4; ++i) {
        if (!j[i].is_array() || j[i].size() != 4) throw ConfigError("rho matrix must be a 4x4 array");
        for (int k = 0; k < 4; ++k) m(i, k) = complex_from(j[i][k]);
    }
    return m;
}

inline json to_json(const VoigtTensor& v)
{
    return json{{"C1111", v.c1111}, {"C1122", v.c1122}, {"C1112", v.c1112},
                {"C2222", v.c2222}, {"C2212", v.c2212}, {"C1212", v.c1212}};
}

inline VoigtTensor voigt_from(const json& j)
{
    if (!j.is_object()) throw ConfigError("crystal must be a JSON object");
    VoigtTensor v;
    v.c1111 = number_at(j, "C1111");
    v.c1122 = number_at(j, "C1122");
    v.c1112 = number_at(j, "C1112");
    v.c2222 = number_at(j, "C2222");
    v.c2212 = number_at(j, "C2212");
    v.c1212 = number_at(j, "C1212");
    return v;
}

/// Reads a crystal file.  The six moduli may sit at the top level or under
/// a "crystal" key (so construction files can be read back as inputs).
inline VoigtTensor read_crystal(const std::string& path)
{
    json j = read_json_file(path);
    if (j.is_object() && j.contains("crystal") && j.at("crystal").is_object()) return voigt_from(j.at("crystal"));
    return voigt_from(j);
}

inline json tensor_json(const RhoTensor& t)
{
    return json{{"voigt", to_json(rho_to_voigt(t))}, {"rho", matrix_json(t.m())}};
}

inline RhoTensor tensor_from(const json& j)
{
    if (j.contains("rho")) return RhoTensor(matrix_from(j.at("rho")));
    if (j.contains("voigt")) return voigt_to_rho(voigt_from(j.at("voigt")));
    throw ConfigError("tensor needs a 'rho' or 'voigt' entry");
}

// ---------------------------------------------------------------------------
// Laminate trees

inline const char* kind_name(LaminateNode::Kind k)
{
    switch (k) {
    case LaminateNode::Kind::leaf: return "leaf";
    case LaminateNode::Kind::layered: return "layered";
    case LaminateNode::Kind::self_similar: return "self_similar";
    }
    return "?";
}

inline json to_json(const LaminateNode& n)
{
    json j{{"kind", kind_name(n.kind)}, {"rotation", n.rotation}};
    if (n.kind == LaminateNode::Kind::leaf) {
        j["mirror"] = n.mirror;
        return j;
    }
    j["fraction"] = n.fraction;
    if (n.kind == LaminateNode::Kind::layered) {
        j["direction"] = json::array({n.direction(0), n.direction(1)});
        j["children"] = json::array({to_json(*n.child_a), to_json(*n.child_b)});
    } else {
        j["rot_result"] = n.rot_result;
        j["children"] = json::array({to_json(*n.child_a)});
    }
    return j;
}

inline LaminatePtr tree_from(const json& j)
{
    if (!j.is_object() || !j.contains("kind")) throw ConfigError("laminate node needs a 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    const double rotation = number_at(j, "rotation");
    if (kind == "leaf") return LaminateNode::leaf(rotation, j.value("mirror", false));
    if (!j.contains("children") || !j.at("children").is_array()) throw ConfigError("node needs 'children'");
    const json& ch = j.at("children");
    const double fraction = number_at(j, "fraction");
    if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("laminate fraction must lie in (0,1)");
    if (kind == "layered") {
        if (ch.size() != 2) throw ConfigError("layered node needs two children");
        Eigen::Vector2d d(0.0, 1.0);
        if (j.contains("direction")) d = Eigen::Vector2d(j.at("direction")[0].get<double>(), j.at("direction")[1].get<double>());
        return LaminateNode::layered(tree_from(ch[0]), tree_from(ch[1]), fraction, rotation, d);
    }
    if (kind == "self_similar") {
        if (ch.size() != 1) throw ConfigError("self_similar node needs one child");
        return LaminateNode::self_similar(tree_from(ch[0]), fraction, number_at(j, "rot_result"), rotation);
    }
    throw ConfigError("unknown laminate node kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const BoundsRectangle& r)
{
    json j;
    j["kappa_minus"] = r.kappa_minus();
    j["kappa_plus"] = r.kappa_plus();
    j["mu_minus"] = r.mu_minus();
    j["mu_plus"] = r.mu_plus();
    j["degenerate"] = std::abs(r.kappa_plus() - r.kappa_minus()) <= 1e-9 * r.kappa_plus() &&
                      std::abs(r.mu_plus() - r.mu_minus()) <= 1e-9 * r.mu_plus();
    j["bulk"] = json{{"k", r.bulk.k},
                     {"t0", r.bulk.t0},
                     {"e", to_json(r.bulk.e)},
                     {"c", to_json(r.bulk.c)},
                     {"residual_c", r.bulk.residual_c}};
    auto shear = [](const ShearBound& s) {
        return json{{"t1", s.t1},         {"t2", s.t2},
                    {"mu", s.mu},         {"normalized", s.normalized},
                    {"normalize_angle", s.normalize_angle},
                    {"vector", to_json(s.vector)},
                    {"residual", s.residual},
                    {"min_eig", s.min_eig}};
    };
    j["upper_shear"] = shear(r.upper);
    j["lower_shear"] = shear(r.lower);
    j["lambda"] = r.lambda;
    j["eta"] = r.eta;
    j["alpha1"] = r.alpha1;
    j["beta1"] = r.beta1;
    j["t_ratio"] = r.t_ratio;
    j["lambda_nonnegative"] = r.lambda_nonnegative;
    j["lower_denominator_nonnegative"] = r.lower_denominator_nonnegative;
    j["rays"] = r.rays;
    return j;
}

inline json to_json(const AttainmentReport& rep)
{
    json checks = json::array();
    for (const auto& c : rep.checks)
        checks.push_back(json{{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}});
    return json{{"corner", corner_name(rep.corner)},
                {"pass", rep.pass},
                {"e1_prime_imag", rep.e1_prime_imag},
                {"checks", checks}};
}

inline json to_json(const FixedPointResult& fp)
{
    return json{{"iterations", fp.iterations},
                {"residual", fp.residual},
                {"positive_definite", fp.positive_definite}};
}

inline json to_json(const CornerParams& p)
{
    return json{{"scale", p.scale},
                {"e1", to_json(p.e1)},
                {"y", p.y},
                {"tau", p.tau},
                {"theta", p.theta},
                {"p", p.p},
                {"e1_prime", p.e1_prime},
                {"field1_prime", p.field1_prime},
                {"t_ratio", p.t_ratio},
                {"fraction_crystal_mirror_pair", p.f_c0_in_ctheta},
                {"fraction_mirror_mirror_pair", p.f_mirror_in_ctheta},
                {"fraction_crystal_self_similar", p.f_c0_relaminate},
                {"interior_branch", p.interior_branch},
                {"identity_residual", p.identity_residual}};
}

inline json to_json(const CornerADResult& r)
{
    json j;
    j["kind"] = r.kind;
    j["crystal_angle"] = r.crystal_angle;
    j["e1_crystal"] = to_json(r.e1_crystal);
    j["crystal_identity_residual"] = r.crystal_identity_residual;
    if (r.kind == "laminate") {
        j["params"] = to_json(r.params);
        j["tree"] = to_json(*r.trees->self_similar);
        j["alternate_tree"] = to_json(*r.trees->mirror_pair);
        j["fixed_point"] = to_json(*r.fixed_point);
        j["e1_prime_computed"] = to_json(r.e1_prime_computed);
        j["e1_prime_error"] = r.e1_prime_error;
        j["alternate_tree_difference"] = r.mirror_form_difference;
    } else if (r.kind == "orthotropic") {
        j["tree"] = to_json(*LaminateNode::leaf(r.crystal_angle));
    } else if (r.scheme) {
        j["scheme"] = json{{"sigma1", to_json(r.scheme->sigma1)},
                           {"sigma2", to_json(r.scheme->sigma2)},
                           {"eps1", to_json(r.scheme->eps1)},
                           {"eps2", to_json(r.scheme->eps2)},
                           {"stress_compatible", r.scheme->stress_compatible},
                           {"strain_compatible", r.scheme->strain_compatible},
                           {"effective_medium_limit", r.scheme->effective_medium_limit}};
    }
    return j;
}

inline json to_json(const TrajectoryIntersection& t)
{
    return json{{"theta", t.theta},     {"phi", t.phi},         {"tau_a", t.tau_a},
                {"tau_b", t.tau_b},     {"c1_star", to_json(t.c1_star)},
                {"winding", t.winding}, {"newton_iterations", t.newton_iterations}};
}

inline json to_json(const CornerBCResult& r)
{
    json j;
    j["kind"] = "self_similar";
    j["crystal_angle"] = r.crystal_angle;
    j["c1"] = to_json(r.c1);
    j["params"] = json{{"alpha1", r.params.alpha1},
                       {"beta1", r.params.beta1},
                       {"t_ratio", r.params.t_ratio}};
    json cands = json::array();
    for (const auto& c : r.candidates) cands.push_back(to_json(c));
    j["candidates"] = cands;
    if (r.chosen) {
        j["chosen"] = to_json(*r.chosen);
        j["fraction"] = r.fraction;
        j["rot_result"] = r.rot_result;
        j["rotation_versus_two_theta"] = r.rot_result - 2.0 * r.chosen->theta;
        j["final_rotation"] = r.psi_b;
        j["tree"] = to_json(*r.tree);
        j["fixed_point"] = to_json(*r.fixed_point);
        j["c1_prime_error"] = r.c1_prime_error;
    }
    json f = json::array();
    for (const auto& s : r.failures) f.push_back(s);
    j["failures"] = f;
    return j;
}

inline json to_json(const CoverageReport& c)
{
    return json{{"alpha1", c.alpha1},
                {"coverage", c.coverage},
                {"grid_points", c.grid_points},
                {"covered", c.covered},
                {"families", c.families},
                {"looping_families", c.looping_families},
                {"samples_exported", c.samples.size()}};
}

// ---------------------------------------------------------------------------
// CSV and SVG

inline std::string tails_csv(const std::vector<CoverageReport>& reports)
{
    std::ostringstream os;
    os << "zI,zR,t,re,im,on_loop\n";
    for (const auto& r : reports)
        for (const auto& s : r.samples)
            os << format_double(s.zI) << ',' << format_double(s.zR) << ',' << format_double(s.t) << ','
               << format_double(s.c.real()) << ',' << format_double(s.c.imag()) << ',' << (s.on_loop ? 1 : 0)
               << '\n';
    return os.str();
}

/// Tails inside the unit disk, red before the loop and blue after it,
/// mirrored about the real axis; loops are left out.  One panel per report.
inline std::string tails_svg(const std::vector<CoverageReport>& reports, std::optional<cplx> crystal = std::nullopt,
                             int panel = 320)
{
    const int cols = std::min<int>(4, std::max<std::size_t>(1, reports.size()));
    const int rows = static_cast<int>((reports.size() + cols - 1) / std::max(1, cols));
    const int w = cols * panel, h = std::max(1, rows) * (panel + 24);
    std::ostringstream os;
    auto f = [](double x) {
        char b[32];
        std::snprintf(b, sizeof b, "%.3f", x);
        return std::string(b);
    };
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 "
       << w << ' ' << h << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    auto label = [](double x) {
        char b[32];
        std::snprintf(b, sizeof b, "%.4g", x);
        return std::string(b);
    };
    const double r = 0.45 * panel;
    for (std::size_t p = 0; p < reports.size(); ++p) {
        const double cx = (p % cols) * panel + panel / 2.0;
        const double cy = (p / cols) * (panel + 24) + 24 + panel / 2.0;
        auto X = [&](double x) { return f(cx + r * x); };
        auto Y = [&](double y) { return f(cy - r * y); };
        os << "<g>\n<text x=\"" << f(cx) << "\" y=\"" << f(cy - panel / 2.0 - 6)
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">alpha1 = "
           << label(reports[p].alpha1) << "</text>\n";
        os << "<circle cx=\"" << f(cx) << "\" cy=\"" << f(cy) << "\" r=\"" << f(r)
           << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
        const auto& s = reports[p].samples;
        // consecutive samples of the same family and side form a polyline
        for (double sign : {1.0, -1.0}) {
            std::size_t i = 0;
            while (i < s.size()) {
                if (s[i].on_loop) {
                    ++i;
                    continue;
                }
                std::size_t j = i;
                std::string pts;
                while (j < s.size() && !s[j].on_loop && s[j].zI == s[i].zI && s[j].zR == s[i].zR &&
                       s[j].side == s[i].side) {
                    pts += X(s[j].c.real()) + "," + Y(sign * s[j].c.imag()) + " ";
                    ++j;
                }
                if (j - i >= 2)
                    os << "<polyline fill=\"none\" stroke-width=\"0.6\" stroke=\""
                       << (s[i].side == 0 ? "#d62728" : "#1f77b4") << "\" points=\"" << pts << "\"/>\n";
                i = j;
            }
        }
        if (crystal)
            os << "<circle cx=\"" << X(crystal->real()) << "\" cy=\"" << Y(crystal->imag())
               << "\" r=\"4\" fill=\"black\"/>\n<text x=\"" << X(crystal->real()) << "\" y=\""
               << Y(crystal->imag()) << "\" dx=\"6\" dy=\"-6\" font-family=\"sans-serif\" font-size=\"12\">c1</text>\n";
        os << "</g>\n";
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace polybounds::io

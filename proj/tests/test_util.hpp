#pragma once

#include <array>
#include <cmath>
#include <random>

#include <polybounds/rho_core.hpp>

namespace testutil {

using polybounds::VoigtTensor;

/// Random tensor positive definite on symmetric matrices, built from a
/// random Mandel matrix A A^T + shift I.
inline VoigtTensor random_voigt(std::mt19937& g, double shift = 0.5)
{
    std::normal_distribution<double> n;
    Eigen::Matrix3d a;
    for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = n(g);
    Eigen::Matrix3d m = a * a.transpose() + shift * Eigen::Matrix3d::Identity();
    const double s = std::sqrt(2.0);
    return {m(0, 0), m(0, 1), m(0, 2) / s, m(1, 1), m(1, 2) / s, m(2, 2) / 2};
}

using Tensor4 = std::array<std::array<std::array<std::array<double, 2>, 2>, 2>, 2>;

/// Full fourth-order tensor with minor and major symmetries.
inline Tensor4 full_tensor(const VoigtTensor& v)
{
    Tensor4 c{};
    auto set = [&](int i, int j, int k, int l, double x) {
        for (auto [a, b] : {std::pair{i, j}, std::pair{j, i}})
            for (auto [p, q] : {std::pair{k, l}, std::pair{l, k}}) {
                c[a][b][p][q] = x;
                c[p][q][a][b] = x;
            }
    };
    set(0, 0, 0, 0, v.c1111);
    set(0, 0, 1, 1, v.c1122);
    set(0, 0, 0, 1, v.c1112);
    set(1, 1, 1, 1, v.c2222);
    set(1, 1, 0, 1, v.c2212);
    set(0, 1, 0, 1, v.c1212);
    return c;
}

inline VoigtTensor voigt_of(const Tensor4& c)
{
    return {c[0][0][0][0], c[0][0][1][1], c[0][0][0][1], c[1][1][1][1], c[1][1][0][1], c[0][1][0][1]};
}

/// C'_{ijkl} = R_ip R_jq R_kr R_ls C_pqrs.
inline Tensor4 transform(const Tensor4& c, const Eigen::Matrix2d& r)
{
    Tensor4 out{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) {
                    double s = 0;
                    for (int p = 0; p < 2; ++p)
                        for (int q = 0; q < 2; ++q)
                            for (int u = 0; u < 2; ++u)
                                for (int w = 0; w < 2; ++w)
                                    s += r(i, p) * r(j, q) * r(k, u) * r(l, w) * c[p][q][u][w];
                    out[i][j][k][l] = s;
                }
    return out;
}

inline Eigen::Matrix2d rotation(double a)
{
    Eigen::Matrix2d r;
    r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    return r;
}

inline double voigt_distance(const VoigtTensor& a, const VoigtTensor& b)
{
    return std::max({std::abs(a.c1111 - b.c1111), std::abs(a.c1122 - b.c1122), std::abs(a.c1112 - b.c1112),
                     std::abs(a.c2222 - b.c2222), std::abs(a.c2212 - b.c2212), std::abs(a.c1212 - b.c1212)});
}

/// Effective tensor of a periodic two-phase layered cell computed by a 1D
/// finite-element solve in Cartesian components.  Phase a fills s in [0, f)
/// along the normal n.  Linear elements with nodes on the interfaces make
/// the discrete solution exact up to round-off.
inline VoigtTensor layered_fe_oracle(const VoigtTensor& va, const VoigtTensor& vb, double f,
                                     const Eigen::Vector2d& n, int elems_per_phase = 40)
{
    const Tensor4 ca = full_tensor(va), cb = full_tensor(vb);
    const int ne = 2 * elems_per_phase;
    std::vector<double> h(ne);
    std::vector<const Tensor4*> mat(ne);
    for (int e = 0; e < ne; ++e) {
        bool in_a = e < elems_per_phase;
        h[e] = (in_a ? f : 1.0 - f) / elems_per_phase;
        mat[e] = in_a ? &ca : &cb;
    }
    // acoustic-type tensor A_ik = C_ijkl n_j n_l and coupling B_ikl = C_ijkl n_j
    auto acoustic = [&](const Tensor4& c) {
        Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < 2; ++k)
                for (int j = 0; j < 2; ++j)
                    for (int l = 0; l < 2; ++l) a(i, k) += c[i][j][k][l] * n(j) * n(l);
        return a;
    };
    const int nd = 2 * ne; // periodic nodes, 2 dofs each
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(nd, nd);
    for (int e = 0; e < ne; ++e) {
        Eigen::Matrix2d a = acoustic(*mat[e]) / h[e];
        int n0 = e, n1 = (e + 1) % ne;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                k(2 * n0 + i, 2 * n0 + j) += a(i, j);
                k(2 * n1 + i, 2 * n1 + j) += a(i, j);
                k(2 * n0 + i, 2 * n1 + j) -= a(i, j);
                k(2 * n1 + i, 2 * n0 + j) -= a(i, j);
            }
    }
    // pin node 0 to remove the rigid translation
    Eigen::MatrixXd kr = k.bottomRightCorner(nd - 2, nd - 2);
    Eigen::LDLT<Eigen::MatrixXd> solver(kr);

    const std::array<std::pair<int, int>, 3> comps = {std::pair{0, 0}, std::pair{1, 1}, std::pair{0, 1}};
    Tensor4 eff{};
    for (auto [p, q] : comps) {
        double e_mac[2][2] = {{0, 0}, {0, 0}};
        e_mac[p][q] = e_mac[q][p] = 1.0;
        // load: -int B^T E  with  (C E n)_i per element, difference at nodes
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nd);
        for (int e = 0; e < ne; ++e) {
            Eigen::Vector2d t = Eigen::Vector2d::Zero();
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    for (int kk = 0; kk < 2; ++kk)
                        for (int l = 0; l < 2; ++l) t(i) += (*mat[e])[i][j][kk][l] * e_mac[kk][l] * n(j);
            int n0 = e, n1 = (e + 1) % ne;
            rhs.segment<2>(2 * n0) += t;
            rhs.segment<2>(2 * n1) -= t;
        }
        Eigen::VectorXd u = Eigen::VectorXd::Zero(nd);
        u.tail(nd - 2) = solver.solve(rhs.tail(nd - 2));
        // average stress
        double sig[2][2] = {{0, 0}, {0, 0}};
        for (int e = 0; e < ne; ++e) {
            int n0 = e, n1 = (e + 1) % ne;
            Eigen::Vector2d du = (u.segment<2>(2 * n1) - u.segment<2>(2 * n0)) / h[e];
            double eps[2][2];
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) eps[i][j] = e_mac[i][j] + 0.5 * (du(i) * n(j) + du(j) * n(i));
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    double s = 0;
                    for (int kk = 0; kk < 2; ++kk)
                        for (int l = 0; l < 2; ++l) s += (*mat[e])[i][j][kk][l] * eps[kk][l];
                    sig[i][j] += h[e] * s;
                }
        }
        // a shear load sets both eps_12 and eps_21, which doubles the response
        const double w = p == q ? 1.0 : 0.5;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) eff[i][j][p][q] = eff[i][j][q][p] = w * sig[i][j];
    }
    return voigt_of(eff);
}

} // namespace testutil

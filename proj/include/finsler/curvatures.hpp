#pragma once

/**
 * @file curvatures.hpp
 * @brief Berwald curvatures (P, H, R hat, R), the Landsberg tensor and the
 * Cartan torsion/curvature pieces that enter the Numata argument.
 *
 * Index layouts:
 *   P(i, j, k, l)    = d G^i_jk / dy^l
 *   H(i, j)          deviation tensor
 *   R_hat(i, X, Y)   = (d_X H^i_Y - d_Y H^i_X) / 3, so y^X R_hat(i, X, Y) = H^i_Y
 *   R(i, X, Y, Z)    = d_Z R_hat(i, X, Y), i.e. R(X, Y)Z
 *   landsberg(i,j,k) = -1/2 y_s P(s, i, j, k)
 */

#include "finsler/connections.hpp"
#include "finsler/core.hpp"
#include "finsler/fundamentals.hpp"
#include "finsler/tensor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace finsler {

struct CurvatureJets {
    JetTensor P;         // (up, down, down, down)
    JetTensor H;         // (up, down)
    JetTensor R_hat;     // (up, down, down)
    JetTensor R;         // (up, down, down, down)
    JetTensor landsberg; // (down, down, down)
    JetTensor P_hat;     // (up, down, down)
    JetTensor S;         // (up, down, down, down)
};

inline JetTensor berwald_hv_curvature(const Frame& fr) {
    const int n = fr.dim();
    JetTensor P(n, mixed(3));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = j; k < n; ++k)
                for (int l = k; l < n; ++l) {
                    const Jet v = fr.conn.G_berwald(i, j, k).dy(l);
                    for (auto [a, b, c] : {std::array{j, k, l}, std::array{j, l, k}, std::array{k, j, l},
                                           std::array{k, l, j}, std::array{l, j, k}, std::array{l, k, j}})
                        P(i, a, b, c) = v;
                }
    return P;
}

inline JetTensor deviation_tensor(const Frame& fr) {
    const int n = fr.dim();
    const auto& G = fr.conn.G;
    const auto& N = fr.conn.N;
    const auto& Gb = fr.conn.G_berwald;
    JetTensor H(n, mixed(1));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Jet acc = 2.0 * G[i].dx(j);
            for (int k = 0; k < n; ++k) {
                acc -= fr.F.eta[k] * N(i, j).dx(k);
                acc += 2.0 * (G[k] * Gb(i, j, k));
                acc -= N(i, k) * N(k, j);
            }
            H(i, j) = acc;
        }
    return H;
}

inline JetTensor vh_torsion(const JetTensor& H) {
    const int n = H.dim();
    JetTensor Rh(n, mixed(2));
    for (int i = 0; i < n; ++i)
        for (int X = 0; X < n; ++X)
            for (int Y = 0; Y < n; ++Y) Rh(i, X, Y) = (H(i, Y).dy(X) - H(i, X).dy(Y)) / 3.0;
    return Rh;
}

inline JetTensor h_curvature(const JetTensor& R_hat) { return partial_y(R_hat); }

/// L_ijk = -1/2 y_s G^s_ijk with y_s = g_sm y^m.
inline JetTensor landsberg_from_spray(const Frame& fr, const JetTensor& P) {
    const int n = fr.dim();
    JetTensor Lt(n, down(3));
    std::vector<Jet> y_low;
    for (int s = 0; s < n; ++s) y_low.push_back(fr.F.L * fr.F.ell[s]);
    for_each_index(n, 3, [&](std::span<const int> idx) {
        Jet acc = y_low[0] * P(0, idx[0], idx[1], idx[2]);
        for (int s = 1; s < n; ++s) acc += y_low[s] * P(s, idx[0], idx[1], idx[2]);
        Lt.at(idx) = -0.5 * acc;
    });
    return Lt;
}

/// y^m (Cartan horizontal derivative of T)_ijk,m.
inline JetTensor landsberg_from_cartan(const Frame& fr) {
    const int n = fr.dim();
    const JetTensor DT = horizontal_derivative(fr, fr.F.T, Connection::cartan);
    JetTensor Lt(n, down(3));
    for_each_index(n, 3, [&](std::span<const int> idx) {
        Jet acc = fr.F.eta[0] * DT(idx[0], idx[1], idx[2], 0);
        for (int m = 1; m < n; ++m) acc += fr.F.eta[m] * DT(idx[0], idx[1], idx[2], m);
        Lt.at(idx) = acc;
    });
    return Lt;
}

/// S^i_jkl = T^i_km T^m_jl - T^i_lm T^m_jk.
inline JetTensor cartan_v_curvature(const FundamentalJets& F) {
    const int n = F.dim;
    const auto& Tm = F.T_mixed;
    JetTensor S(n, mixed(3));
    for_each_index(n, 4, [&](std::span<const int> idx) {
        const int i = idx[0], j = idx[1], k = idx[2], l = idx[3];
        Jet acc = Tm(i, k, 0) * Tm(0, j, l) - Tm(i, l, 0) * Tm(0, j, k);
        for (int m = 1; m < n; ++m) acc += Tm(i, k, m) * Tm(m, j, l) - Tm(i, l, m) * Tm(m, j, k);
        S.at(idx) = acc;
    });
    return S;
}

inline CurvatureJets curvature_jets(const Frame& fr) {
    CurvatureJets K;
    K.P = berwald_hv_curvature(fr);
    K.H = deviation_tensor(fr);
    K.R_hat = vh_torsion(K.H);
    K.R = h_curvature(K.R_hat);
    K.landsberg = landsberg_from_spray(fr, K.P);
    K.P_hat = raise_first(fr.F.g_inv, K.landsberg);
    K.S = cartan_v_curvature(fr.F);
    return K;
}

struct CurvaturePack {
    ChartPoint point;
    Tensor P_berwald, R_berwald, R_hat, H, Landsberg, Landsberg_cartan, S_cartan, P_hat;
};

inline CurvaturePack curvature_pack(const Frame& fr, const CurvatureJets& K) {
    CurvaturePack c;
    c.point = fr.point();
    c.P_berwald = values(K.P);
    c.R_berwald = values(K.R);
    c.R_hat = values(K.R_hat);
    c.H = values(K.H);
    c.Landsberg = values(K.landsberg);
    c.Landsberg_cartan = values(landsberg_from_cartan(fr));
    c.S_cartan = values(K.S);
    c.P_hat = values(K.P_hat);
    return c;
}

/// Cyclic sum over (X, Y, Z) of (D_X R)(Y, Z)W + P(R_hat(X, Y), Z)W with the
/// Berwald horizontal derivative DR(i, Y, Z, W, X). Layout B(i, X, Y, Z, W).
inline Tensor second_bianchi_tensor(const Tensor& DR, const Tensor& P, const Tensor& Rh) {
    const int n = P.dim();
    auto term = [&](int i, int X, int Y, int Z, int W) {
        double v = DR(i, Y, Z, W, X);
        for (int j = 0; j < n; ++j) v += P(i, j, Z, W) * Rh(j, X, Y);
        return v;
    };
    Tensor B(n, mixed(4));
    for_each_index(n, 5, [&](std::span<const int> a) {
        const int i = a[0], X = a[1], Y = a[2], Z = a[3], W = a[4];
        B.at(a) = term(i, X, Y, Z, W) + term(i, Y, Z, X, W) + term(i, Z, X, Y, W);
    });
    return B;
}

/// Size of the individual terms of the cyclic sum; the residual scale.
inline double second_bianchi_scale(const Tensor& DR, const Tensor& P, const Tensor& Rh) {
    return std::max(max_abs(DR), max_abs(P) * max_abs(Rh) * P.dim());
}

/// Contracts the cyclic sum with (X, Y, Z) direction triples and every basis W;
/// returns the largest relative residual.
inline double bianchi_residual(const Tensor& B, double scale,
                               const std::vector<std::array<std::vector<double>, 3>>& directions) {
    const int n = B.dim();
    scale = std::max(scale, kResidualScaleFloor);
    double worst = 0.0;
    for (const auto& d : directions)
        for (int i = 0; i < n; ++i)
            for (int W = 0; W < n; ++W) {
                double v = 0.0;
                for (int X = 0; X < n; ++X)
                    for (int Y = 0; Y < n; ++Y)
                        for (int Z = 0; Z < n; ++Z)
                            v += B(i, X, Y, Z, W) * d[0][static_cast<std::size_t>(X)] *
                                 d[1][static_cast<std::size_t>(Y)] * d[2][static_cast<std::size_t>(Z)];
                worst = std::max(worst, std::abs(v) / scale);
            }
    return worst;
}

inline double bianchi_residual(const Frame& fr, const CurvatureJets& K,
                               const std::vector<std::array<std::vector<double>, 3>>& directions) {
    const Tensor DR = values(horizontal_derivative(fr, K.R, Connection::berwald));
    const Tensor P = values(K.P);
    const Tensor Rh = values(K.R_hat);
    return bianchi_residual(second_bianchi_tensor(DR, P, Rh), second_bianchi_scale(DR, P, Rh), directions);
}

/// Both sides of (D_eta P)(Y, X, W) = y^b d_X R(Y, b)W from the Berwald
/// horizontal derivative DP(i, Y, X, W, m) and dR(i, Y, b, W, X) = d_X R.
/// Layout (i, Y, X, W).
inline std::pair<Tensor, Tensor> exchange_identity_sides(const Tensor& DP, const Tensor& dR,
                                                         std::span<const double> y) {
    const int n = DP.dim();
    Tensor lhs(n, mixed(3)), rhs(n, mixed(3));
    for_each_index(n, 4, [&](std::span<const int> a) {
        const int i = a[0], Y = a[1], X = a[2], W = a[3];
        double l = 0.0, r = 0.0;
        for (int m = 0; m < n; ++m) {
            l += y[static_cast<std::size_t>(m)] * DP(i, Y, X, W, m);
            r += y[static_cast<std::size_t>(m)] * dR(i, Y, m, W, X);
        }
        lhs.at(a) = l;
        rhs.at(a) = r;
    });
    return {lhs, rhs};
}

inline std::pair<Tensor, Tensor> exchange_identity_sides(const Frame& fr, const CurvatureJets& K) {
    return exchange_identity_sides(values(horizontal_derivative(fr, K.P, Connection::berwald)),
                                   values(partial_y(K.R)), fr.point().y);
}

} // namespace finsler

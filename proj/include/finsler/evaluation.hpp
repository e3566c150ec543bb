#pragma once

/**
 * @file evaluation.hpp
 * @brief Everything the identity catalog and the classifiers read at one
 * sample point, evaluated once from a single jet lift of L.
 *
 * Derivative layouts follow the covariant-derivative convention: the
 * differentiation slot is appended last.
 */

#include "finsler/connections.hpp"
#include "finsler/curvatures.hpp"
#include "finsler/fundamentals.hpp"
#include "finsler/metrics.hpp"
#include "finsler/scalar.hpp"
#include "finsler/tensor.hpp"

#include <tuple>

namespace finsler {

struct PointData {
    ChartPoint point;
    int n = 0;
    Tensor y; // y^i

    FundamentalPack F;
    ConnectionData conn;
    CurvaturePack curv;
    ScalarCurvatureFit fit;

    // vertical derivatives
    Tensor dL;             // dL/dy^m
    Tensor dell;           // (i, m)
    Tensor dell_cartan;    // (i, m)
    Tensor dphi;           // (i, Y, X)
    Tensor dhbar;          // (Y, Z, X) Berwald
    Tensor dhbar_cartan;   // (Y, Z, X)
    Tensor VT_cartan;      // (i, j, k, m)
    Tensor dC;             // (W, X) = d_X C_W
    Tensor VC_cartan;      // (W, X)

    // horizontal derivatives
    Tensor Dg_cartan;      // (i, j, m)
    Tensor DL_berwald;     // (m)
    Tensor DL_cartan;      // (m)
    Tensor Deta_berwald;   // (i, m)
    Tensor Deta_cartan;    // (i, m)
    Tensor Dell_berwald;   // (i, m)
    Tensor DT_cartan;      // (i, j, k, m)
    Tensor DC_cartan;      // (W, m)
    Tensor DS_cartan;      // (i, j, k, l, m)
    Tensor DRhat;          // (i, Y, Z, X) Berwald
    Tensor DP_eta;         // (i, Y, X, W) = y^m D_m P

    Tensor bianchi;        // (i, X, Y, Z, W)
    double bianchi_scale = 0.0;
    Tensor exchange_lhs, exchange_rhs; // (i, Y, X, W)

    // only when the fit is not flat
    AuxTensors aux;
    Tensor dB;             // (X, Y) = d_Y B_X

    // an arbitrary polynomial vector field and its derivatives
    Tensor V;              // (i)
    Tensor dV, dV_cartan;  // (i, m)
    Tensor DV_berwald, DV_cartan; // (i, m)
};

/// V^i = (1 + x_i^2) y_{i+1} + x_{i+2} y_i y_{i+1} + x_i y_{i+2}, indices mod n.
inline JetTensor probe_vector_field(const Frame& fr) {
    const int n = fr.dim();
    const auto& sp = *fr.F.space;
    JetTensor V(n, {Slot::up});
    for (int i = 0; i < n; ++i) {
        const int a = (i + 1) % n, b = (i + 2) % n;
        const Jet xi = sp.x(i);
        V[i] = (1.0 + xi * xi) * sp.y(a) + sp.x(b) * sp.y(i) * sp.y(a) + xi * sp.y(b);
    }
    return V;
}

inline PointData evaluate_point(const MetricFixture& f, const ChartPoint& p, JetBudget budget = {}) {
    if (budget.order < 7 || budget.x_order < 3)
        throw OrderError("evaluation: the full identity suite needs jet order 7 with 3 x-slots");
    const Frame fr = make_frame(f, p, budget);
    const CurvatureJets K = curvature_jets(fr);
    const int n = fr.dim();
    const auto berwald = Connection::berwald;
    const auto cartan = Connection::cartan;

    PointData d;
    d.point = p;
    d.n = n;
    d.y = to_vector_tensor(p.y, Slot::up);
    d.F = pack(fr.F);
    d.conn = connection_data(fr);
    d.curv = curvature_pack(fr, K);
    d.fit = extract_scalar_curvature(fr, K.H);

    const JetTensor Lj = jet_scalar(n, fr.F.L);
    d.dL = values(vertical_derivative(fr, Lj, berwald));
    d.dell = values(vertical_derivative(fr, fr.F.ell, berwald));
    d.dell_cartan = values(vertical_derivative(fr, fr.F.ell, cartan));
    d.dphi = values(vertical_derivative(fr, fr.F.phi, berwald));
    d.dhbar = values(vertical_derivative(fr, fr.F.hbar, berwald));
    d.dhbar_cartan = values(vertical_derivative(fr, fr.F.hbar, cartan));
    d.VT_cartan = values(vertical_derivative(fr, fr.F.T, cartan));
    d.dC = values(vertical_derivative(fr, fr.F.C, berwald));
    d.VC_cartan = values(vertical_derivative(fr, fr.F.C, cartan));

    d.Dg_cartan = values(horizontal_derivative(fr, fr.F.g, cartan));
    d.DL_berwald = values(horizontal_derivative(fr, Lj, berwald));
    d.DL_cartan = values(horizontal_derivative(fr, Lj, cartan));
    d.Deta_berwald = values(horizontal_derivative(fr, fr.F.eta, berwald));
    d.Deta_cartan = values(horizontal_derivative(fr, fr.F.eta, cartan));
    d.Dell_berwald = values(horizontal_derivative(fr, fr.F.ell, berwald));
    d.DT_cartan = values(horizontal_derivative(fr, fr.F.T, cartan));
    d.DC_cartan = values(horizontal_derivative(fr, fr.F.C, cartan));
    d.DS_cartan = values(horizontal_derivative(fr, K.S, cartan));
    d.DRhat = values(horizontal_derivative(fr, K.R_hat, berwald));

    const Tensor DR = values(horizontal_derivative(fr, K.R, berwald));
    const Tensor DP = values(horizontal_derivative(fr, K.P, berwald));
    d.bianchi = second_bianchi_tensor(DR, d.curv.P_berwald, d.curv.R_hat);
    d.bianchi_scale = second_bianchi_scale(DR, d.curv.P_berwald, d.curv.R_hat);
    std::tie(d.exchange_lhs, d.exchange_rhs) = exchange_identity_sides(DP, values(partial_y(K.R)), p.y);
    d.DP_eta = d.exchange_lhs;

    if (!d.fit.flat) {
        const Jet r = *scalar_curvature_jets(fr, K.H).r;
        const JetTensor dr = partial_y(jet_scalar(n, r));
        // B(X) = r L l_X + L^2 d_X r / 3, kept as a jet for its vertical derivative.
        JetTensor B(n, down(1));
        for (int X = 0; X < n; ++X) B[X] = r * fr.F.L * fr.F.ell[X] + fr.F.E * dr[X] / 3.0;
        d.dB = values(partial_y(B));
        assemble_aux(d.aux, d.fit.r, d.fit.r_grad_v, d.fit.r_hess_v, d.F.L, d.F.ell);
    }
    d.aux.A_bb = cartan_c_combination(d.VC_cartan, d.F.L, d.F.ell, d.F.C);

    const JetTensor V = probe_vector_field(fr);
    d.V = values(V);
    d.dV = values(vertical_derivative(fr, V, berwald));
    d.dV_cartan = values(vertical_derivative(fr, V, cartan));
    d.DV_berwald = values(horizontal_derivative(fr, V, berwald));
    d.DV_cartan = values(horizontal_derivative(fr, V, cartan));
    return d;
}

} // namespace finsler

#pragma once

/**
 * @file identities.hpp
 * @brief Residuals of the geometric identities, as pure functions of value
 * tensors, and the catalog that names and gates them.
 *
 * Every residual is relative: ||lhs - rhs|| / max(||lhs||, ||rhs||, 1).
 */

#include "finsler/evaluation.hpp"
#include "finsler/scalar.hpp"
#include "finsler/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace finsler {

namespace detail {

inline double zero_residual(const Tensor& t) { return relative_residual(t, Tensor(t.dim(), t.valence())); }

inline Tensor hbar_sym_ell(const Tensor& hbar, const Tensor& ell, double L) {
    // -(h_XY l_Z + h_XZ l_Y) / L, layout (Y, Z, X)
    const int n = ell.dim();
    Tensor out(n, down(3));
    for_each_index(n, 3, [&](std::span<const int> a) {
        const int Y = a[0], Z = a[1], X = a[2];
        out.at(a) = -(hbar(X, Y) * ell[Z] + hbar(X, Z) * ell[Y]) / L;
    });
    return out;
}

} // namespace detail

struct ScalarExtraction {
    double value = 0.0;
    double residual = 0.0;
};

/// Fits t = s * hbar by the metric trace s = g^{XW} t_XW / (n - 1).
inline ScalarExtraction extract_hbar_multiple(const Tensor& t, const Tensor& hbar, const Tensor& g_inv) {
    const int n = t.dim();
    ScalarExtraction e;
    e.value = metric_trace(g_inv, t) / (n - 1);
    e.residual = relative_residual(t, e.value * hbar);
    return e;
}

// ---- identities on constructed inputs --------------------------------------

/// T(X, Y, W) against -(1 / 3r) [h_XW d_Y r + h_YW d_X r + h_XY d_W r].
inline double cartan_from_r_residual(const Tensor& T, const Tensor& hbar, const Tensor& dr, double r) {
    const int n = T.dim();
    Tensor rhs(n, down(3));
    for_each_index(n, 3, [&](std::span<const int> a) {
        const int X = a[0], Y = a[1], W = a[2];
        rhs.at(a) = -(hbar(X, W) * dr[Y] + hbar(Y, W) * dr[X] + hbar(X, Y) * dr[W]) / (3.0 * r);
    });
    return relative_residual(T, rhs);
}

/// d_X r against -3r C_X / (n + 1).
inline double r_vertical_from_c_residual(const Tensor& dr, const Tensor& C, double r) {
    const int n = C.dim();
    return relative_residual(dr, (-3.0 * r / (n + 1)) * C);
}

/// (Cartan horizontal C-derivative)(Y; W) = mu h_YW, DC in layout (Y, W).
inline ScalarExtraction extract_mu(const Tensor& DC, const Tensor& hbar, const Tensor& g_inv) {
    return extract_hbar_multiple(DC, hbar, g_inv);
}

/// max |(n - 2) mu C|.
inline double mu_c_norm(double mu, const Tensor& C) { return max_abs(((C.dim() - 2) * mu) * C); }

/// l_X C_W + l_W C_X + L [d_X C_W - k C_X C_W / (n + 1)], layout (X, W).
inline Tensor c_equation_lhs(const Tensor& ell, const Tensor& C, const Tensor& dC, double L, double k) {
    const int n = C.dim();
    Tensor out(n, down(2));
    for (int X = 0; X < n; ++X)
        for (int W = 0; W < n; ++W)
            out(X, W) = ell[X] * C[W] + ell[W] * C[X] + L * (dC(W, X) - k / (n + 1) * C[X] * C[W]);
    return out;
}

/// The Berwald-case C equation (coefficient 3), which must vanish.
inline double berwald_c_equation_residual(const Tensor& ell, const Tensor& C, const Tensor& dC, double L) {
    return detail::zero_residual(c_equation_lhs(ell, C, dC, L, 3.0));
}

/// The C-reducible C equation (coefficient 2) is psi * hbar; returns psi.
inline ScalarExtraction extract_psi(const Tensor& ell, const Tensor& C, const Tensor& dC, double L,
                                    const Tensor& hbar, const Tensor& g_inv) {
    return extract_hbar_multiple(c_equation_lhs(ell, C, dC, L, 2.0), hbar, g_inv);
}

/// L (Cartan vertical C-derivative)(X; W) + l_X C_W + l_W C_X = alpha h_XW.
inline ScalarExtraction extract_alpha(const Tensor& VC, const Tensor& ell, const Tensor& C, double L,
                                      const Tensor& hbar, const Tensor& g_inv) {
    return extract_hbar_multiple(L * cartan_c_combination(VC, L, ell, C), hbar, g_inv);
}

/// ||T - (1/(n+1)) cyc(h C)|| / max(||T||, floor). Second member reports a
/// vanishing Cartan tensor.
inline std::pair<double, bool> c_reducibility_residual(const Tensor& T, const Tensor& hbar, const Tensor& C,
                                                       double trivial_tol) {
    const int n = T.dim();
    Tensor model(n, down(3));
    for_each_index(n, 3, [&](std::span<const int> a) {
        const int X = a[0], Y = a[1], Z = a[2];
        model.at(a) = (hbar(X, Y) * C[Z] + hbar(Y, Z) * C[X] + hbar(Z, X) * C[Y]) / (n + 1);
    });
    const bool trivial = max_abs(T) < trivial_tol;
    return {max_abs_diff(T, model) / std::max(max_abs(T), kResidualScaleFloor), trivial};
}

// ---- identities on evaluated points ----------------------------------------

namespace residuals {

inline double cartan_total_symmetry(const PointData& d) {
    return max_asymmetry(d.F.T) / std::max(max_abs(d.F.T), kResidualScaleFloor);
}

inline double cartan_annihilates_eta(const PointData& d) {
    Tensor t(d.n, down(2));
    for_each_index(d.n, 2, [&](std::span<const int> a) {
        for (int k = 0; k < d.n; ++k) t.at(a) += d.F.T(a[0], a[1], k) * d.y[k];
    });
    return max_abs(t) / std::max(max_abs(d.F.T), kResidualScaleFloor);
}

inline double hbar_annihilates_eta(const PointData& d) {
    Tensor t(d.n, down(1));
    for (int i = 0; i < d.n; ++i)
        for (int j = 0; j < d.n; ++j) t[i] += d.F.hbar(i, j) * d.y[j];
    return max_abs(t) / std::max(max_abs(d.F.hbar), kResidualScaleFloor);
}

inline double metric_on_eta(const PointData& d) {
    double gyy = 0.0;
    for (int i = 0; i < d.n; ++i)
        for (int j = 0; j < d.n; ++j) gyy += d.F.g(i, j) * d.y[i] * d.y[j];
    return relative_residual(gyy, d.F.L * d.F.L);
}

inline double phi_projector(const PointData& d) {
    Tensor sq(d.n, mixed(1));
    double tr = 0.0;
    for (int i = 0; i < d.n; ++i) {
        tr += d.F.phi(i, i);
        for (int j = 0; j < d.n; ++j)
            for (int k = 0; k < d.n; ++k) sq(i, j) += d.F.phi(i, k) * d.F.phi(k, j);
    }
    return std::max(relative_residual(sq, d.F.phi), relative_residual(tr, d.n - 1.0));
}

inline double vertical_symmetry(const PointData& d) {
    const double s = std::max(max_abs(d.VT_cartan), kResidualScaleFloor);
    return std::max({max_asymmetry(d.VT_cartan) / s, cartan_total_symmetry(d),
                     max_asymmetry(d.F.hbar) / std::max(max_abs(d.F.hbar), kResidualScaleFloor)});
}

inline double vertical_derivative_of_L(const PointData& d) { return relative_residual(d.dL, d.F.ell); }

inline double vertical_derivative_of_ell(const PointData& d) {
    const Tensor rhs = (1.0 / d.F.L) * d.F.hbar;
    return std::max(relative_residual(d.dell, rhs), relative_residual(d.dell_cartan, rhs));
}

inline double berwald_vertical_phi(const PointData& d) {
    const int n = d.n;
    const double L = d.F.L;
    Tensor rhs(n, mixed(2)); // (i, Y, X)
    for_each_index(n, 3, [&](std::span<const int> a) {
        const int i = a[0], Y = a[1], X = a[2];
        rhs.at(a) = -d.F.hbar(X, Y) * d.y[i] / (L * L) - d.F.phi(i, X) * d.F.ell[Y] / L;
    });
    return relative_residual(d.dphi, rhs);
}

inline double berwald_vertical_hbar(const PointData& d) {
    Tensor rhs = detail::hbar_sym_ell(d.F.hbar, d.F.ell, d.F.L);
    for_each_index(d.n, 3, [&](std::span<const int> a) { rhs.at(a) += 2.0 * d.F.T(a[2], a[0], a[1]); });
    return relative_residual(d.dhbar, rhs);
}

inline double cartan_vertical_hbar(const PointData& d) {
    return relative_residual(d.dhbar_cartan, detail::hbar_sym_ell(d.F.hbar, d.F.ell, d.F.L));
}

inline double spray_homogeneity_ladder(const PointData& d) {
    const auto& c = d.conn;
    Tensor Ny(d.n, {Slot::up});
    Tensor Gby(d.n, mixed(1));
    for (int i = 0; i < d.n; ++i)
        for (int j = 0; j < d.n; ++j) {
            Ny[i] += c.N(i, j) * d.y[j];
            for (int k = 0; k < d.n; ++k) Gby(i, j) += c.G_berwald(i, j, k) * d.y[k];
        }
    return std::max(relative_residual(Ny, 2.0 * c.G), relative_residual(Gby, c.N));
}

inline double cartan_coefficients(const PointData& d) {
    const auto& c = d.conn;
    Tensor Gyy(d.n, {Slot::up});
    for (int i = 0; i < d.n; ++i)
        for (int j = 0; j < d.n; ++j)
            for (int k = 0; k < d.n; ++k) Gyy[i] += c.Gamma_cartan(i, j, k) * d.y[j] * d.y[k];
    return std::max(max_asymmetry(c.Gamma_cartan, {1, 2}) / std::max(max_abs(c.Gamma_cartan), kResidualScaleFloor),
                    relative_residual(Gyy, 2.0 * c.G));
}

inline double shared_nonlinear_connection(const PointData& d) {
    const auto& c = d.conn;
    Tensor Gy(d.n, mixed(1));
    for (int i = 0; i < d.n; ++i)
        for (int j = 0; j < d.n; ++j)
            for (int k = 0; k < d.n; ++k) Gy(i, j) += c.Gamma_cartan(i, j, k) * d.y[k];
    return relative_residual(Gy, c.N);
}

inline double cartan_metricity(const PointData& d) { return detail::zero_residual(d.Dg_cartan); }

inline double horizontal_L(const PointData& d) {
    return std::max(detail::zero_residual(d.DL_berwald), detail::zero_residual(d.DL_cartan));
}

inline double deflection(const PointData& d) {
    return std::max(detail::zero_residual(d.Deta_berwald), detail::zero_residual(d.Deta_cartan));
}

inline double horizontal_ell(const PointData& d) { return detail::zero_residual(d.Dell_berwald); }

inline double cartan_berwald_vertical(const PointData& d) {
    Tensor rhs = d.dV_cartan;
    for (int i = 0; i < d.n; ++i)
        for (int m = 0; m < d.n; ++m)
            for (int s = 0; s < d.n; ++s) rhs(i, m) -= d.F.T_mixed(i, m, s) * d.V[s];
    return relative_residual(d.dV, rhs);
}

inline double cartan_berwald_horizontal(const PointData& d) {
    Tensor rhs = d.DV_cartan;
    for (int i = 0; i < d.n; ++i)
        for (int m = 0; m < d.n; ++m)
            for (int s = 0; s < d.n; ++s) rhs(i, m) += d.curv.P_hat(i, m, s) * d.V[s];
    return relative_residual(d.DV_berwald, rhs);
}

inline double berwald_hv_eta(const PointData& d) {
    const auto& P = d.curv.P_berwald;
    Tensor Py(d.n, mixed(2));
    for_each_index(d.n, 3, [&](std::span<const int> a) {
        for (int l = 0; l < d.n; ++l) Py.at(a) += P(a[0], a[1], a[2], l) * d.y[l];
    });
    const double s = std::max(max_abs(P), kResidualScaleFloor);
    return std::max(max_abs(Py) / s, max_asymmetry(P, {1, 2, 3}) / s);
}

inline double deviation_eta(const PointData& d) {
    Tensor Hy(d.n, {Slot::up});
    for (int i = 0; i < d.n; ++i)
        for (int j = 0; j < d.n; ++j) Hy[i] += d.curv.H(i, j) * d.y[j];
    return max_abs(Hy) / std::max(max_abs(d.curv.H), kResidualScaleFloor);
}

inline double rhat_contracts_to_H(const PointData& d) {
    Tensor t(d.n, mixed(1));
    for (int i = 0; i < d.n; ++i)
        for (int Y = 0; Y < d.n; ++Y)
            for (int X = 0; X < d.n; ++X) t(i, Y) += d.y[X] * d.curv.R_hat(i, X, Y);
    return relative_residual(t, d.curv.H);
}

inline double h_curvature_structure(const PointData& d) {
    const auto& R = d.curv.R_berwald;
    Tensor Ry(d.n, mixed(2));
    for_each_index(d.n, 3, [&](std::span<const int> a) {
        for (int Z = 0; Z < d.n; ++Z) Ry.at(a) += R(a[0], a[1], a[2], Z) * d.y[Z];
    });
    double anti = 0.0;
    for_each_index(d.n, 4, [&](std::span<const int> a) {
        anti = std::max(anti, std::abs(R(a[0], a[1], a[2], a[3]) + R(a[0], a[2], a[1], a[3])));
    });
    return std::max(relative_residual(Ry, d.curv.R_hat), anti / std::max(max_abs(R), kResidualScaleFloor));
}

inline double berwald_first_bianchi(const PointData& d) {
    const auto& R = d.curv.R_berwald;
    Tensor c(d.n, mixed(3));
    for_each_index(d.n, 4, [&](std::span<const int> a) {
        const int i = a[0], X = a[1], Y = a[2], Z = a[3];
        c.at(a) = R(i, X, Y, Z) + R(i, Y, Z, X) + R(i, Z, X, Y);
    });
    return max_abs(c) / std::max(max_abs(R), kResidualScaleFloor);
}

inline double landsberg_two_routes(const PointData& d) {
    return relative_residual(d.curv.Landsberg, d.curv.Landsberg_cartan);
}

inline double landsberg_symmetry(const PointData& d) {
    const auto& Lt = d.curv.Landsberg;
    Tensor Ly(d.n, down(2));
    for_each_index(d.n, 2, [&](std::span<const int> a) {
        for (int k = 0; k < d.n; ++k) Ly.at(a) += Lt(a[0], a[1], k) * d.y[k];
    });
    const double s = std::max(max_abs(Lt), kResidualScaleFloor);
    return std::max(max_asymmetry(Lt) / s, max_abs(Ly) / s);
}

inline double second_bianchi(const PointData& d) {
    return max_abs(d.bianchi) / std::max(d.bianchi_scale, kResidualScaleFloor);
}

inline double exchange_identity(const PointData& d) { return relative_residual(d.exchange_lhs, d.exchange_rhs); }

inline double rhat_cyclic(const PointData& d) {
    Tensor c(d.n, mixed(3));
    for_each_index(d.n, 4, [&](std::span<const int> a) {
        const int i = a[0], X = a[1], Y = a[2], Z = a[3];
        c.at(a) = d.DRhat(i, Y, Z, X) + d.DRhat(i, Z, X, Y) + d.DRhat(i, X, Y, Z);
    });
    return max_abs(c) / std::max(max_abs(d.DRhat), kResidualScaleFloor);
}

inline double cartan_v_curvature_horizontal(const PointData& d) { return detail::zero_residual(d.DS_cartan); }

inline double landsberg_horizontal_symmetry(const PointData& d) {
    return max_asymmetry(d.DT_cartan) / std::max(max_abs(d.DT_cartan), kResidualScaleFloor);
}

inline double landsberg_horizontal_trace_symmetry(const PointData& d) {
    return max_asymmetry(d.DC_cartan) / std::max(max_abs(d.DC_cartan), kResidualScaleFloor);
}

inline double scalar_curvature_form(const PointData& d) { return d.fit.residual; }

inline double r_homogeneity(const PointData& d) {
    double s = 0.0;
    for (int i = 0; i < d.n; ++i) s += d.y[i] * d.fit.r_grad_v[i];
    return std::abs(s);
}

inline double aux_A_eta_first(const PointData& d) {
    const double L = d.F.L, r = d.fit.r;
    Tensor lhs(d.n, down(1)), rhs(d.n, down(1));
    for (int X = 0; X < d.n; ++X) {
        for (int e = 0; e < d.n; ++e) lhs[X] += d.y[e] * d.aux.A(e, X);
        rhs[X] = r * L * d.F.ell[X] + 2.0 / 3.0 * L * L * d.fit.r_grad_v[X];
    }
    return relative_residual(lhs, rhs);
}

inline double aux_A_eta_second(const PointData& d) {
    Tensor lhs(d.n, down(1));
    for (int X = 0; X < d.n; ++X)
        for (int e = 0; e < d.n; ++e) lhs[X] += d.aux.A(X, e) * d.y[e];
    return relative_residual(lhs, d.aux.B);
}

inline double aux_A_eta_eta(const PointData& d) {
    double a = 0.0, b = 0.0;
    for (int i = 0; i < d.n; ++i) {
        b += d.aux.B[i] * d.y[i];
        for (int j = 0; j < d.n; ++j) a += d.aux.A(i, j) * d.y[i] * d.y[j];
    }
    const double target = d.fit.r * d.F.L * d.F.L;
    return std::max(relative_residual(a, target), relative_residual(b, target));
}

inline double aux_vertical_B(const PointData& d) {
    return relative_residual(d.dB, d.aux.A + d.fit.r * d.F.hbar);
}

/// R(X, Y)Z assembled from r, A, B, h, phi, l; layout (i, X, Y, Z).
inline Tensor h_curvature_model(const PointData& d) {
    const int n = d.n;
    const double L = d.F.L, r = d.fit.r;
    const auto& h = d.F.hbar;
    const auto& phi = d.F.phi;
    const auto& A = d.aux.A;
    const auto& B = d.aux.B;
    auto F = [&](int i, int X, int Y, int Z) {
        return (r * h(X, Z) + A(X, Z)) * phi(i, Y) -
               B[X] * (h(Y, Z) * d.y[i] / (L * L) + d.F.ell[Y] * phi(i, Z) / L);
    };
    Tensor out(n, mixed(3));
    for_each_index(n, 4, [&](std::span<const int> a) {
        out.at(a) = F(a[0], a[1], a[2], a[3]) - F(a[0], a[2], a[1], a[3]);
    });
    return out;
}

inline double h_curvature_formula(const PointData& d) {
    return relative_residual(d.curv.R_berwald, h_curvature_model(d));
}

inline double rhat_formula(const PointData& d) {
    Tensor model(d.n, mixed(2));
    for_each_index(d.n, 3, [&](std::span<const int> a) {
        const int i = a[0], X = a[1], Y = a[2];
        model.at(a) = d.aux.B[X] * d.F.phi(i, Y) - d.aux.B[Y] * d.F.phi(i, X);
    });
    return relative_residual(d.curv.R_hat, model);
}

/// Right side of the lowered (D_eta P)(Y, X, W, Z) expansion, layout (Y, X, W, Z).
inline Tensor dpeta_model(const PointData& d) {
    const int n = d.n;
    const double L = d.F.L, r = d.fit.r;
    const auto& h = d.F.hbar;
    const auto& dr = d.fit.r_grad_v;
    const auto& M = d.aux.M;
    Tensor out(n, down(4));
    for_each_index(n, 4, [&](std::span<const int> a) {
        const int Y = a[0], X = a[1], W = a[2], Z = a[3];
        const double bracket = h(X, W) * dr[Y] + h(Y, W) * dr[X] + h(X, Y) * dr[W] + 3.0 * r * d.F.T(X, Y, W);
        out.at(a) = 2.0 / 3.0 * L * d.F.ell[Z] * bracket -
                    (h(Y, Z) * M(X, W) + h(X, Z) * M(Y, W) + h(W, Z) * M(X, Y)) / 3.0;
    });
    return out;
}

inline Tensor dpeta_lowered(const PointData& d) {
    Tensor out(d.n, down(4));
    for_each_index(d.n, 4, [&](std::span<const int> a) {
        for (int i = 0; i < d.n; ++i) out.at(a) += d.F.g(a[3], i) * d.DP_eta(i, a[0], a[1], a[2]);
    });
    return out;
}

inline double dpeta_expansion(const PointData& d) { return relative_residual(dpeta_lowered(d), dpeta_model(d)); }

inline double dpeta_eta(const PointData& d) {
    const Tensor lhs4 = dpeta_lowered(d), rhs4 = dpeta_model(d);
    Tensor lhs(d.n, down(3)), rhs(d.n, down(3));
    for_each_index(d.n, 3, [&](std::span<const int> a) {
        for (int Z = 0; Z < d.n; ++Z) {
            lhs.at(a) += lhs4(a[0], a[1], a[2], Z) * d.y[Z];
            rhs.at(a) += rhs4(a[0], a[1], a[2], Z) * d.y[Z];
        }
    });
    // The contracted right side reduces to (2/3) L^2 [...]; check that form directly.
    Tensor closed(d.n, down(3));
    const double L = d.F.L, r = d.fit.r;
    const auto& h = d.F.hbar;
    const auto& dr = d.fit.r_grad_v;
    for_each_index(d.n, 3, [&](std::span<const int> a) {
        const int Y = a[0], X = a[1], W = a[2];
        closed.at(a) = 2.0 / 3.0 * L * L *
                       (h(X, W) * dr[Y] + h(Y, W) * dr[X] + h(X, Y) * dr[W] + 3.0 * r * d.F.T(X, Y, W));
    });
    return std::max(relative_residual(lhs, closed), relative_residual(rhs, closed));
}

inline double vertical_c_symmetric(const PointData& d) {
    return max_asymmetry(d.VC_cartan) / std::max(max_abs(d.VC_cartan), kResidualScaleFloor);
}

inline double c_reducible_alpha(const PointData& d) {
    return extract_alpha(d.VC_cartan, d.F.ell, d.F.C, d.F.L, d.F.hbar, d.F.g_inv).residual;
}

inline double c_vertical_relation(const PointData& d) {
    const int n = d.n;
    Tensor rhs(n, down(2));
    for (int W = 0; W < n; ++W)
        for (int X = 0; X < n; ++X)
            rhs(W, X) = d.dC(W, X) - (d.F.C_sq * d.F.hbar(X, W) + 2.0 * d.F.C[X] * d.F.C[W]) / (n + 1);
    return relative_residual(d.VC_cartan, rhs);
}

inline double c_reducible_psi(const PointData& d) {
    const auto psi = extract_psi(d.F.ell, d.F.C, d.dC, d.F.L, d.F.hbar, d.F.g_inv);
    const auto alpha = extract_alpha(d.VC_cartan, d.F.ell, d.F.C, d.F.L, d.F.hbar, d.F.g_inv);
    return std::max(psi.residual, relative_residual(psi.value, d.F.L * d.F.C_sq / (d.n + 1) + alpha.value));
}

inline double cartan_from_r(const PointData& d) {
    return cartan_from_r_residual(d.F.T, d.F.hbar, d.fit.r_grad_v, d.fit.r);
}

inline double r_vertical_from_c(const PointData& d) {
    return r_vertical_from_c_residual(d.fit.r_grad_v, d.F.C, d.fit.r);
}

inline double horizontal_c_proportional(const PointData& d) {
    return extract_mu(d.DC_cartan, d.F.hbar, d.F.g_inv).residual;
}

inline double mu_c_vanishes(const PointData& d) {
    return mu_c_norm(extract_mu(d.DC_cartan, d.F.hbar, d.F.g_inv).value, d.F.C);
}

inline double berwald_c_equation(const PointData& d) {
    return berwald_c_equation_residual(d.F.ell, d.F.C, d.dC, d.F.L);
}

inline double c_vanishes(const PointData& d) { return max_abs(d.F.C); }

inline double r_vertically_parallel(const PointData& d) { return max_abs(d.fit.r_grad_v); }

inline double rhat_constant_form(const PointData& d) {
    Tensor model(d.n, mixed(2));
    for_each_index(d.n, 3, [&](std::span<const int> a) {
        const int i = a[0], X = a[1], Y = a[2];
        model.at(a) = d.fit.r * d.F.L * (d.F.ell[X] * (i == Y) - d.F.ell[Y] * (i == X));
    });
    return relative_residual(d.curv.R_hat, model);
}

inline double r_horizontal_along_ell(const PointData& d) {
    double eta_r = 0.0;
    for (int m = 0; m < d.n; ++m) eta_r += d.y[m] * d.fit.r_grad_h[m];
    return relative_residual(d.fit.r_grad_h, (eta_r / d.F.L) * d.F.ell);
}

inline double r_horizontally_parallel(const PointData& d) { return max_abs(d.fit.r_grad_h); }

} // namespace residuals

// ---- catalog ----------------------------------------------------------------

/// Fixture-level hypotheses an identity needs before it says anything.
enum class Gate {
    none,
    landsberg,
    scalar_nonzero,          // scalar curvature with r != 0
    c_reducible,             // C-reducible (vanishing Cartan tensor counts)
    landsberg_scalar_nonzero,
    landsberg_c_reducible,   // and n >= 3
    berwald_scalar_nonzero,  // and n >= 3
};

inline const char* to_string(Gate g) {
    switch (g) {
    case Gate::none: return "none";
    case Gate::landsberg: return "landsberg";
    case Gate::scalar_nonzero: return "scalar curvature, r != 0";
    case Gate::c_reducible: return "c-reducible";
    case Gate::landsberg_scalar_nonzero: return "landsberg, scalar curvature, r != 0";
    case Gate::landsberg_c_reducible: return "landsberg, c-reducible, n >= 3";
    case Gate::berwald_scalar_nonzero: return "berwald, scalar curvature, r != 0, n >= 3";
    }
    return "?";
}

struct IdentitySpec {
    std::string id;
    std::string anchor;
    std::string group;
    Gate gate = Gate::none;
    /// Only Riemannian instances can pass the gate; a non-Riemannian one
    /// would contradict Numata's theorem.
    bool riemannian_only = false;
    double (*residual)(const PointData&) = nullptr;
};

inline const std::vector<IdentitySpec>& identity_catalog() {
    namespace R = residuals;
    static const std::vector<IdentitySpec> catalog = {
        {"cartan-total-symmetry", "T(X,Y,Z) totally symmetric", "fundamentals", Gate::none, false, R::cartan_total_symmetry},
        {"cartan-annihilates-eta", "T(X,Y,η) = 0", "fundamentals", Gate::none, false, R::cartan_annihilates_eta},
        {"hbar-annihilates-eta", "ħ(X,η) = 0", "fundamentals", Gate::none, false, R::hbar_annihilates_eta},
        {"metric-on-eta", "g(η,η) = L²", "fundamentals", Gate::none, false, R::metric_on_eta},
        {"phi-projector", "φ∘φ = φ, tr φ = n−1", "fundamentals", Gate::none, false, R::phi_projector},

        {"vertical-total-symmetry", "T, ∇_γT, ħ totally symmetric", "vertical", Gate::none, false, R::vertical_symmetry},
        {"vertical-derivative-of-L", "∇_γL = D°_γL = ℓ", "vertical", Gate::none, false, R::vertical_derivative_of_L},
        {"vertical-derivative-of-ell", "∇_γℓ = D°_γℓ = L⁻¹ħ", "vertical", Gate::none, false, R::vertical_derivative_of_ell},
        {"berwald-vertical-phi", "D°_γφ = −L⁻²ħ⊗η − L⁻¹φ⊗ℓ", "vertical", Gate::none, false, R::berwald_vertical_phi},
        {"berwald-vertical-hbar", "(D°_γX ħ)(Y,Z) = 2T(X,Y,Z) − L⁻¹ħ(X,Y)ℓ(Z) − L⁻¹ħ(X,Z)ℓ(Y)", "vertical", Gate::none, false, R::berwald_vertical_hbar},
        {"cartan-vertical-hbar", "(∇_γX ħ)(Y,Z) = −L⁻¹ħ(X,Y)ℓ(Z) − L⁻¹ħ(X,Z)ℓ(Y)", "vertical", Gate::none, false, R::cartan_vertical_hbar},

        {"spray-homogeneity-ladder", "N(η) = 2G, G_jk y^k = N_j", "connections", Gate::none, false, R::spray_homogeneity_ladder},
        {"cartan-coefficients", "Γ_jk = Γ_kj, Γ(η,η) = 2G", "connections", Gate::none, false, R::cartan_coefficients},
        {"shared-nonlinear-connection", "Γ^i_jk y^k = N^i_j", "connections", Gate::none, false, R::shared_nonlinear_connection},
        {"cartan-metricity", "∇_β g = 0", "connections", Gate::none, false, R::cartan_metricity},
        {"horizontal-L", "D°_β L = ∇_β L = 0", "connections", Gate::none, false, R::horizontal_L},
        {"deflection", "D°_β η = ∇_β η = 0", "connections", Gate::none, false, R::deflection},
        {"horizontal-ell", "D°_βX ℓ = 0", "connections", Gate::none, false, R::horizontal_ell},
        {"cartan-berwald-vertical", "D°_γX Y = ∇_γX Y − T(X,Y)", "connections", Gate::none, false, R::cartan_berwald_vertical},
        {"cartan-berwald-horizontal", "D°_βX Y = ∇_βX Y + P̂(X,Y)", "connections", Gate::none, false, R::cartan_berwald_horizontal},

        {"berwald-hv-eta", "i_η P° = 0, P° symmetric", "curvatures", Gate::none, false, R::berwald_hv_eta},
        {"deviation-eta", "H(η) = 0", "curvatures", Gate::none, false, R::deviation_eta},
        {"rhat-contracts-to-H", "H = i_η R̂°", "curvatures", Gate::none, false, R::rhat_contracts_to_H},
        {"h-curvature-structure", "R°(X,Y)η = R̂°(X,Y), R°(X,Y) = −R°(Y,X)", "curvatures", Gate::none, false, R::h_curvature_structure},
        {"berwald-first-bianchi", "𝔖 R°(X,Y)Z = 0", "curvatures", Gate::none, false, R::berwald_first_bianchi},
        {"landsberg-two-routes", "−½ y_s G^s_ijk = (∇_βη T)_ijk", "curvatures", Gate::none, false, R::landsberg_two_routes},
        {"landsberg-symmetry", "L_ijk totally symmetric, L(·,·,η) = 0", "curvatures", Gate::none, false, R::landsberg_symmetry},
        {"second-bianchi", "𝔖{(D°_βX R°)(Y,Z,W) + P°(R̂°(X,Y),Z)W} = 0", "curvatures", Gate::none, false, R::second_bianchi},
        {"exchange-identity", "(D°_βη P°)(Y,X,W) = (D°_γX R°)(Y,η,W)", "curvatures", Gate::none, false, R::exchange_identity},
        {"rhat-cyclic", "𝔖 (D°_βX R̂°)(Y,Z) = 0", "curvatures", Gate::none, false, R::rhat_cyclic},
        {"cartan-v-curvature-horizontal", "(∇_βZ S)(X,Y,W) = 0", "curvatures", Gate::landsberg, false, R::cartan_v_curvature_horizontal},
        {"horizontal-T-symmetry", "(∇_βZ T)(X,Y,W) = (∇_βW T)(X,Y,Z)", "curvatures", Gate::landsberg, false, R::landsberg_horizontal_symmetry},
        {"horizontal-C-symmetry", "(∇_βZ C)(W) = (∇_βW C)(Z)", "curvatures", Gate::landsberg, false, R::landsberg_horizontal_trace_symmetry},

        {"scalar-curvature-form", "H = r L² φ", "scalar", Gate::scalar_nonzero, false, R::scalar_curvature_form},
        {"r-homogeneity", "D°_γη r = 0", "scalar", Gate::scalar_nonzero, false, R::r_homogeneity},
        {"aux-A-eta-first", "A(η,X) = rLℓ(X) + ⅔L² D°_γX r", "scalar", Gate::scalar_nonzero, false, R::aux_A_eta_first},
        {"aux-A-eta-second", "A(X,η) = B(X)", "scalar", Gate::scalar_nonzero, false, R::aux_A_eta_second},
        {"aux-A-eta-eta", "A(η,η) = B(η) = rL²", "scalar", Gate::scalar_nonzero, false, R::aux_A_eta_eta},
        {"aux-vertical-B", "(D°_γY B)(X) = A(X,Y) + r ħ(X,Y)", "scalar", Gate::scalar_nonzero, false, R::aux_vertical_B},
        {"h-curvature-formula", "R°(X,Y)Z = 𝔄{[rħ(X,Z) + A(X,Z)]φ(Y) − B(X)[L⁻²ħ(Y,Z)η + L⁻¹ℓ(Y)φ(Z)]}", "scalar", Gate::scalar_nonzero, false, R::h_curvature_formula},
        {"rhat-formula", "R̂°(X,Y) = 𝔄{B(X)φ(Y)}", "scalar", Gate::scalar_nonzero, false, R::rhat_formula},
        {"dpeta-expansion", "(D°_βη 𝐏°)(Y,X,W,Z) = ⅔Lℓ(Z)[...+3rT(X,Y,W)] − ⅓[ħ(Y,Z)M(X,W) + ...]", "scalar", Gate::scalar_nonzero, false, R::dpeta_expansion},
        {"dpeta-eta", "(D°_βη 𝐏°)(Y,X,W,η) = ⅔L²[...+3rT(X,Y,W)]", "scalar", Gate::scalar_nonzero, false, R::dpeta_eta},

        {"vertical-C-symmetry", "(∇_γX C)(Y) = (∇_γY C)(X)", "c-reducible", Gate::none, false, R::vertical_c_symmetric},
        {"c-reducible-alpha", "L(∇_γX C)(W) + ℓ(X)C(W) + ℓ(W)C(X) = α ħ(X,W)", "c-reducible", Gate::c_reducible, false, R::c_reducible_alpha},
        {"c-vertical-relation", "(∇_γX C)(W) = (D°_γX C)(W) − (C²ħ(X,W) + 2C(X)C(W))/(n+1)", "c-reducible", Gate::c_reducible, false, R::c_vertical_relation},
        {"c-reducible-psi", "ℓ(X)C(W) + ℓ(W)C(X) + L[(D°_γX C)(W) − 2C(X)C(W)/(n+1)] = ψ ħ(X,W)", "c-reducible", Gate::c_reducible, false, R::c_reducible_psi},

        {"cartan-from-r", "T(X,Y,W) = −(1/3r)[ħ(X,W)D°_γY r + ħ(Y,W)D°_γX r + ħ(X,Y)D°_γW r]", "numata-chain", Gate::landsberg_scalar_nonzero, true, R::cartan_from_r},
        {"r-vertical-from-C", "D°_γX r = −3r C(X)/(n+1)", "numata-chain", Gate::landsberg_scalar_nonzero, true, R::r_vertical_from_c},
        {"horizontal-C-proportional", "(∇_βW C)(Y) = μ ħ(Y,W)", "numata-chain", Gate::landsberg_c_reducible, true, R::horizontal_c_proportional},
        {"mu-C-vanishes", "(n−2) μ C = 0", "numata-chain", Gate::landsberg_c_reducible, true, R::mu_c_vanishes},
        {"berwald-C-equation", "ℓ(X)C(W) + ℓ(W)C(X) + L[(D°_γX C)(W) − 3C(X)C(W)/(n+1)] = 0", "numata-chain", Gate::berwald_scalar_nonzero, true, R::berwald_c_equation},
        {"C-vanishes", "C = 0", "numata-chain", Gate::berwald_scalar_nonzero, true, R::c_vanishes},
        {"r-vertically-parallel", "D°_γX r = 0", "numata-chain", Gate::berwald_scalar_nonzero, true, R::r_vertically_parallel},
        {"rhat-constant-form", "R̂°(X,Y) = rL[ℓ(X)Y − ℓ(Y)X]", "numata-chain", Gate::berwald_scalar_nonzero, true, R::rhat_constant_form},
        {"r-horizontal-along-ell", "D°_βX r = L⁻¹(D°_βη r)ℓ(X)", "numata-chain", Gate::berwald_scalar_nonzero, true, R::r_horizontal_along_ell},
        {"r-horizontally-parallel", "D°_βX r = 0", "numata-chain", Gate::berwald_scalar_nonzero, true, R::r_horizontally_parallel},
    };
    return catalog;
}

inline const IdentitySpec& identity_spec(const std::string& id) {
    for (const auto& s : identity_catalog())
        if (s.id == id) return s;
    throw Error("unknown identity '" + id + "'");
}

} // namespace finsler

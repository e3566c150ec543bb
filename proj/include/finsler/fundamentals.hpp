#pragma once

/**
 * @file fundamentals.hpp
 * @brief Fundamental tensor, supporting element, angular metric and Cartan tensor.
 *
 * Everything here is first computed as jets at a chart point so that later
 * layers can keep differentiating; FundamentalPack is the plain-value view.
 */

#include "finsler/core.hpp"
#include "finsler/jet.hpp"
#include "finsler/metrics.hpp"
#include "finsler/tensor.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <memory>

namespace finsler {

/// Total order and x-order used when lifting L at a point.
struct JetBudget {
    int order = 7;
    int x_order = 3;
};

/// Condition number of a symmetric or general square matrix (2-norm).
inline double condition_number(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    if (s(s.size() - 1) == 0.0) return std::numeric_limits<double>::infinity();
    return s(0) / s(s.size() - 1);
}

/// Inverse of a square (down,down) jet matrix by Gauss-Jordan elimination with
/// partial pivoting on the base values. The result carries valence (up,up).
inline JetTensor jet_inverse(const JetTensor& m, double condition_limit = kConditionLimit) {
    const int n = m.dim();
    if (m.rank() != 2) throw Error("jet inverse: rank 2 required");
    const double cond = condition_number(to_matrix(values(m)));
    if (!(cond <= condition_limit))
        throw DegenerateMetricError("fundamental tensor is singular or ill-conditioned (condition number " +
                                    std::to_string(cond) + ")");
    std::vector<std::vector<Jet>> a(static_cast<std::size_t>(n));
    std::vector<std::vector<Jet>> inv(static_cast<std::size_t>(n));
    const auto& space = m[0].space_ptr();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            a[i].push_back(m(i, j));
            inv[i].push_back(space->constant(i == j ? 1.0 : 0.0));
        }
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col].value()) > std::abs(a[piv][col].value())) piv = r;
        std::swap(a[col], a[piv]);
        std::swap(inv[col], inv[piv]);
        const Jet rp = reciprocal(a[col][col], "pivot of g");
        for (int j = 0; j < n; ++j) {
            a[col][j] = a[col][j] * rp;
            inv[col][j] = inv[col][j] * rp;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const Jet f = a[r][col];
            for (int j = 0; j < n; ++j) {
                a[r][j] -= f * a[col][j];
                inv[r][j] -= f * inv[col][j];
            }
        }
    }
    JetTensor out(n, {Slot::up, Slot::up});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = inv[i][j];
    return out;
}

/// Jets of the zeroth-layer objects at one chart point.
struct FundamentalJets {
    std::shared_ptr<const JetSpace> space;
    int dim = 0;
    JetTensor eta;   // y^i
    Jet E;           // L^2
    Jet L;
    JetTensor g;       // g_ij
    JetTensor g_inv;   // g^ij
    JetTensor ell;     // l_i
    JetTensor hbar;    // h_ij
    JetTensor phi;     // phi^i_j
    JetTensor T;       // T_ijk
    JetTensor T_mixed; // T^i_jk
    JetTensor C;       // C_k
    JetTensor C_up;    // C^i
    Jet C_sq;

    const ChartPoint& point() const { return space->base(); }
};

/// Raises the first slot of a fully covariant jet tensor with g_inv.
inline JetTensor raise_first(const JetTensor& g_inv, const JetTensor& t) {
    const int n = t.dim();
    Valence v = t.valence();
    v[0] = Slot::up;
    JetTensor out(n, std::move(v));
    const std::size_t stride = out.size() / static_cast<std::size_t>(n);
    for (int i = 0; i < n; ++i)
        for (std::size_t rest = 0; rest < stride; ++rest) {
            Jet acc = g_inv(i, 0) * t[rest];
            for (int l = 1; l < n; ++l) acc += g_inv(i, l) * t[static_cast<std::size_t>(l) * stride + rest];
            out[static_cast<std::size_t>(i) * stride + rest] = acc;
        }
    return out;
}

inline FundamentalJets fundamental_jets(const MetricFixture& f, const ChartPoint& p, JetBudget budget = {}) {
    if (p.dim() != f.dim) throw Error("fundamentals: point dimension does not match the fixture");
    if (!f.contains(p)) throw DomainError("fundamentals: point outside the fixture domain: " + to_string(p));
    if (budget.order < 3) throw OrderError("fundamentals: jet order must be at least 3");
    FundamentalJets F;
    F.space = JetSpace::make(p, budget.order, budget.x_order);
    const int n = F.dim = p.dim();
    std::vector<Jet> xs, ys;
    for (int i = 0; i < n; ++i) xs.push_back(F.space->x(i));
    for (int i = 0; i < n; ++i) ys.push_back(F.space->y(i));
    F.L = f.jet_L(xs, ys);
    if (F.L.space_ptr() != F.space) throw SpaceMismatchError("fundamentals: fixture returned a foreign jet");
    if (!(F.L.value() > 0.0)) throw DomainError("fundamentals: L must be positive at " + to_string(p));
    F.E = F.L * F.L;

    F.eta = JetTensor(n, {Slot::up});
    for (int i = 0; i < n; ++i) F.eta[i] = ys[i];

    F.g = JetTensor(n, down(2));
    for (int i = 0; i < n; ++i) {
        const Jet Ei = F.E.dy(i);
        for (int j = i; j < n; ++j) F.g(i, j) = F.g(j, i) = 0.5 * Ei.dy(j);
    }
    F.g_inv = jet_inverse(F.g);

    const Jet inv_L = reciprocal(F.L, "L");
    F.ell = JetTensor(n, down(1));
    for (int i = 0; i < n; ++i) {
        Jet acc = F.g(i, 0) * ys[0];
        for (int j = 1; j < n; ++j) acc += F.g(i, j) * ys[j];
        F.ell[i] = acc * inv_L;
    }
    F.hbar = JetTensor(n, down(2));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) F.hbar(i, j) = F.g(i, j) - F.ell[i] * F.ell[j];
    F.phi = raise_first(F.g_inv, F.hbar);

    F.T = JetTensor(n, down(3));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            for (int k = j; k < n; ++k) {
                const Jet v = 0.5 * F.g(i, j).dy(k);
                F.T(i, j, k) = F.T(i, k, j) = F.T(j, i, k) = F.T(j, k, i) = F.T(k, i, j) = F.T(k, j, i) = v;
            }
    F.T_mixed = raise_first(F.g_inv, F.T);

    F.C = JetTensor(n, down(1));
    for (int k = 0; k < n; ++k) {
        Jet acc = F.T_mixed(0, 0, k);
        for (int i = 1; i < n; ++i) acc += F.T_mixed(i, i, k);
        F.C[k] = acc;
    }
    F.C_up = JetTensor(n, {Slot::up});
    for (int i = 0; i < n; ++i) {
        Jet acc = F.g_inv(i, 0) * F.C[0];
        for (int j = 1; j < n; ++j) acc += F.g_inv(i, j) * F.C[j];
        F.C_up[i] = acc;
    }
    F.C_sq = F.C[0] * F.C_up[0];
    for (int i = 1; i < n; ++i) F.C_sq += F.C[i] * F.C_up[i];
    return F;
}

/// Plain values of the zeroth-layer objects at one point.
struct FundamentalPack {
    ChartPoint point;
    double L = 0.0;
    Tensor g, g_inv, ell, hbar, phi, T, T_mixed, C, C_vec;
    double C_sq = 0.0;
};

inline FundamentalPack pack(const FundamentalJets& F) {
    FundamentalPack P;
    P.point = F.point();
    P.L = F.L.value();
    P.g = values(F.g);
    P.g_inv = values(F.g_inv);
    P.ell = values(F.ell);
    P.hbar = values(F.hbar);
    P.phi = values(F.phi);
    P.T = values(F.T);
    P.T_mixed = values(F.T_mixed);
    P.C = values(F.C);
    P.C_vec = values(F.C_up);
    P.C_sq = F.C_sq.value();
    return P;
}

inline FundamentalPack fundamental_pack(const MetricFixture& f, const ChartPoint& p) {
    return pack(fundamental_jets(f, p, {3, 0}));
}

struct AngularProjectionReport {
    double L_residual = 0.0;   // max |dL/dy^i - l_i|
    double ell_residual = 0.0; // max |dl_i/dy^j - h_ij / L|
    double max_residual() const { return std::max(L_residual, ell_residual); }
};

/// Checks dL/dy = l and dl/dy = h / L by differentiating the jets.
inline AngularProjectionReport angular_projection_check(const FundamentalJets& F) {
    AngularProjectionReport r;
    const int n = F.dim;
    const double L = F.L.value();
    for (int i = 0; i < n; ++i) {
        r.L_residual = std::max(r.L_residual, std::abs(F.L.dy(i).value() - F.ell[i].value()));
        for (int j = 0; j < n; ++j)
            r.ell_residual =
                std::max(r.ell_residual, std::abs(F.ell[i].dy(j).value() - F.hbar(i, j).value() / L));
    }
    return r;
}

inline AngularProjectionReport angular_projection_check(const MetricFixture& f, const ChartPoint& p) {
    return angular_projection_check(fundamental_jets(f, p, {3, 0}));
}

} // namespace finsler

#pragma once

/**
 * @file connections.hpp
 * @brief Spray, nonlinear connection, Berwald and Cartan coefficients, and the
 * vertical and horizontal covariant derivatives built on them.
 *
 * Covariant derivatives append the differentiation slot last:
 * (DA)[i..., m] is the derivative of A[i...] in direction m.
 */

#include "finsler/core.hpp"
#include "finsler/fundamentals.hpp"
#include "finsler/jet.hpp"
#include "finsler/metrics.hpp"
#include "finsler/tensor.hpp"

#include <functional>
#include <string>
#include <vector>

namespace finsler {

struct ConnectionJets {
    JetTensor G;         // G^i
    JetTensor N;         // N^i_j
    JetTensor G_berwald; // G^i_jk
    JetTensor Gamma;     // Cartan Gamma^i_jk
};

/// Fundamentals and connection coefficients at one point, as jets.
struct Frame {
    FundamentalJets F;
    ConnectionJets conn;

    int dim() const { return F.dim; }
    const ChartPoint& point() const { return F.point(); }
};

enum class Connection { berwald, cartan };

inline const char* to_string(Connection c) { return c == Connection::berwald ? "berwald" : "cartan"; }

namespace detail {

/// Adds sign * K^{idx_p}_{s m} A[.. s ..] (up slot) or sign * K^s_{idx_p m} A[.. s ..]
/// (down slot) into out[.., m] for every slot p of A.
inline void add_connection_terms(JetTensor& out, const JetTensor& A, const JetTensor& K, double up_sign) {
    const int n = A.dim();
    const int rank = A.rank();
    if (rank == 0) return;
    std::vector<int> src(static_cast<std::size_t>(rank));
    for_each_index(n, rank + 1, [&](std::span<const int> idx) {
        const int m = idx[static_cast<std::size_t>(rank)];
        Jet& target = out.at(idx);
        std::copy(idx.begin(), idx.begin() + rank, src.begin());
        for (int p = 0; p < rank; ++p) {
            const int orig = src[static_cast<std::size_t>(p)];
            const bool up = A.valence()[static_cast<std::size_t>(p)] == Slot::up;
            for (int s = 0; s < n; ++s) {
                src[static_cast<std::size_t>(p)] = s;
                const Jet& a = A.at(src);
                if (up)
                    target += up_sign * (K(orig, s, m) * a);
                else
                    target -= up_sign * (K(s, orig, m) * a);
            }
            src[static_cast<std::size_t>(p)] = orig;
        }
    });
}

} // namespace detail

/// delta_m A = d_{x^m} A - N^s_m d_{y^s} A, appended as a down slot.
inline JetTensor delta(const Frame& fr, const JetTensor& A) {
    JetTensor dx = partial_x(A);
    const JetTensor dy = partial_y(A);
    const int n = A.dim();
    const std::size_t un = static_cast<std::size_t>(n);
    for (std::size_t flat = 0; flat < A.size(); ++flat)
        for (int m = 0; m < n; ++m) {
            Jet& t = dx[flat * un + static_cast<std::size_t>(m)];
            for (int s = 0; s < n; ++s) t -= fr.conn.N(s, m) * dy[flat * un + static_cast<std::size_t>(s)];
        }
    return dx;
}

/// delta_m of a scalar jet, as a (down) jet tensor.
inline JetTensor delta(const Frame& fr, const Jet& a) { return delta(fr, jet_scalar(fr.dim(), a)); }

/// Vertical covariant derivative. Berwald: plain y-partials. Cartan: adds
/// +T^i_{ms} A^s per up slot and -T^s_{jm} A_s per down slot.
inline JetTensor vertical_derivative(const Frame& fr, const JetTensor& A, Connection c) {
    JetTensor out = partial_y(A);
    if (c == Connection::cartan) detail::add_connection_terms(out, A, fr.F.T_mixed, 1.0);
    return out;
}

/// Horizontal covariant derivative along delta with Berwald G^i_jk or Cartan Gamma^i_jk.
inline JetTensor horizontal_derivative(const Frame& fr, const JetTensor& A, Connection c) {
    JetTensor out = delta(fr, A);
    detail::add_connection_terms(out, A, c == Connection::berwald ? fr.conn.G_berwald : fr.conn.Gamma, 1.0);
    return out;
}

inline JetTensor spray_jets(const FundamentalJets& F) {
    const int n = F.dim;
    // V_l = y^k d^2E/dy^l dx^k - dE/dx^l
    std::vector<Jet> V;
    for (int l = 0; l < n; ++l) {
        const Jet El = F.E.dy(l);
        Jet acc = -F.E.dx(l);
        for (int k = 0; k < n; ++k) acc += F.eta[k] * El.dx(k);
        V.push_back(acc);
    }
    JetTensor G(n, {Slot::up});
    for (int i = 0; i < n; ++i) {
        Jet acc = F.g_inv(i, 0) * V[0];
        for (int l = 1; l < n; ++l) acc += F.g_inv(i, l) * V[l];
        G[i] = 0.25 * acc;
    }
    return G;
}

inline Frame make_frame(const MetricFixture& f, const ChartPoint& p, JetBudget budget = {}) {
    if (budget.x_order < 1 || budget.order < 3) throw OrderError("connections: jet budget too small");
    Frame fr;
    fr.F = fundamental_jets(f, p, budget);
    const int n = fr.F.dim;
    auto& C = fr.conn;
    C.G = spray_jets(fr.F);
    C.N = JetTensor(n, mixed(1));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) C.N(i, j) = C.G[i].dy(j);
    C.G_berwald = JetTensor(n, mixed(2));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = j; k < n; ++k) C.G_berwald(i, j, k) = C.G_berwald(i, k, j) = C.N(i, j).dy(k);

    // Gamma_ljk lowered, then raised: 1/2 (delta_k g_lj + delta_j g_lk - delta_l g_jk)
    const JetTensor dg = delta(fr, fr.F.g); // dg(a, b, m) = delta_m g_ab
    JetTensor low(n, down(3));
    for (int l = 0; l < n; ++l)
        for (int j = 0; j < n; ++j)
            for (int k = j; k < n; ++k)
                low(l, j, k) = low(l, k, j) = 0.5 * (dg(l, j, k) + dg(l, k, j) - dg(j, k, l));
    C.Gamma = raise_first(fr.F.g_inv, low);
    return fr;
}

/// Procedure producing a tensor field as jets in a frame.
struct TensorField {
    std::string name;
    Valence valence;
    std::function<JetTensor(const Frame&)> evaluate;
    bool jet_capable = true;
};

namespace fields {

inline TensorField L() {
    return {"L", {}, [](const Frame& fr) { return jet_scalar(fr.dim(), fr.F.L); }};
}
inline TensorField eta() {
    return {"eta", {Slot::up}, [](const Frame& fr) { return fr.F.eta; }};
}
inline TensorField ell() {
    return {"ell", down(1), [](const Frame& fr) { return fr.F.ell; }};
}
inline TensorField g() {
    return {"g", down(2), [](const Frame& fr) { return fr.F.g; }};
}
inline TensorField hbar() {
    return {"hbar", down(2), [](const Frame& fr) { return fr.F.hbar; }};
}
inline TensorField phi() {
    return {"phi", mixed(1), [](const Frame& fr) { return fr.F.phi; }};
}
inline TensorField T() {
    return {"T", down(3), [](const Frame& fr) { return fr.F.T; }};
}
inline TensorField C() {
    return {"C", down(1), [](const Frame& fr) { return fr.F.C; }};
}

inline TensorField by_name(const std::string& name) {
    for (auto make : {L, eta, ell, g, hbar, phi, T, C}) {
        TensorField f = make();
        if (f.name == name) return f;
    }
    throw Error("unknown tensor field '" + name + "'");
}

} // namespace fields

namespace detail {

inline JetTensor evaluate_field(const TensorField& field, const Frame& fr) {
    if (!field.jet_capable || !field.evaluate)
        throw Error("tensor field '" + field.name + "' is not jet-capable");
    JetTensor t = field.evaluate(fr);
    if (t.valence() != field.valence) throw Error("tensor field '" + field.name + "' changed valence");
    return t;
}

} // namespace detail

inline Tensor vertical_cov_deriv(const TensorField& field, Connection c, const MetricFixture& f,
                                 const ChartPoint& p) {
    Frame fr = make_frame(f, p, {4, 1});
    return values(vertical_derivative(fr, detail::evaluate_field(field, fr), c));
}

inline Tensor horizontal_cov_deriv(const TensorField& field, Connection c, const MetricFixture& f,
                                   const ChartPoint& p) {
    Frame fr = make_frame(f, p, {4, 2});
    return values(horizontal_derivative(fr, detail::evaluate_field(field, fr), c));
}

struct ConnectionData {
    ChartPoint point;
    Tensor G, N, G_berwald, Gamma_cartan;
};

inline ConnectionData connection_data(const Frame& fr) {
    return {fr.point(), values(fr.conn.G), values(fr.conn.N), values(fr.conn.G_berwald), values(fr.conn.Gamma)};
}

inline ConnectionData connection_data(const MetricFixture& f, const ChartPoint& p) {
    return connection_data(make_frame(f, p, {4, 1}));
}

inline Tensor spray(const MetricFixture& f, const ChartPoint& p) {
    return values(spray_jets(fundamental_jets(f, p, {3, 1})));
}

} // namespace finsler

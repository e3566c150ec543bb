#pragma once

/**
 * @file scalar.hpp
 * @brief Scalar-curvature fit r = tr(H) / ((n-1) L^2) and the auxiliary
 * tensors A, B, M and the vertical C-derivative combination built from r.
 */

#include "finsler/connections.hpp"
#include "finsler/curvatures.hpp"
#include "finsler/tensor.hpp"

#include <cmath>
#include <optional>

namespace finsler {

/// H below this multiple of L^2 counts as flat.
inline constexpr double kFlatThreshold = 1e-9;

struct ScalarCurvatureFit {
    double r = 0.0;
    double residual = 0.0;
    bool flat = false;
    Tensor r_grad_v;  // dr/dy^i
    Tensor r_grad_h;  // delta r / delta x^i
    Tensor r_hess_v;  // d^2 r / dy^i dy^j
};

/// r as a jet, so that it can be differentiated further. Empty when flat.
struct ScalarCurvatureJets {
    std::optional<Jet> r;
    bool flat = false;
};

inline ScalarCurvatureJets scalar_curvature_jets(const Frame& fr, const JetTensor& H) {
    const int n = fr.dim();
    const double L2 = fr.F.E.value();
    double hmax = 0.0;
    for (const Jet& h : H.components()) hmax = std::max(hmax, std::abs(h.value()));
    if (hmax < kFlatThreshold * L2) return {std::nullopt, true};
    Jet tr = H(0, 0);
    for (int i = 1; i < n; ++i) tr += H(i, i);
    return {divide(tr, fr.F.E * static_cast<double>(n - 1), "(n-1) L^2"), false};
}

inline ScalarCurvatureFit extract_scalar_curvature(const Frame& fr, const JetTensor& H) {
    const int n = fr.dim();
    ScalarCurvatureFit fit;
    fit.r_grad_v = Tensor(n, down(1));
    fit.r_grad_h = Tensor(n, down(1));
    fit.r_hess_v = Tensor(n, down(2));
    const auto rj = scalar_curvature_jets(fr, H);
    fit.flat = rj.flat;
    if (rj.flat) return fit;
    const Jet& r = *rj.r;
    fit.r = r.value();
    const Tensor Hv = values(H);
    const Tensor model = (fit.r * fr.F.E.value()) * values(fr.F.phi);
    fit.residual = relative_residual(Hv, model);
    const JetTensor dr = partial_y(jet_scalar(n, r));
    fit.r_grad_v = values(dr);
    fit.r_grad_h = values(delta(fr, r));
    if (r.order() >= 2) fit.r_hess_v = values(partial_y(dr));
    return fit;
}

inline ScalarCurvatureFit extract_scalar_curvature(const MetricFixture& f, const ChartPoint& p) {
    const Frame fr = make_frame(f, p, {6, 2});
    return extract_scalar_curvature(fr, deviation_tensor(fr));
}

struct AuxTensors {
    Tensor A;     // A(X, Y)
    Tensor B;     // B(X)
    Tensor M;     // M(X, Y)
    Tensor A_bb;  // vertical Cartan C-derivative combination A(X, W)
    double alpha = 0.0;
    double mu = 0.0;
    double psi = 0.0;
};

/// A, B and M from r, its vertical derivatives and L, l.
inline void assemble_aux(AuxTensors& a, double r, const Tensor& dr, const Tensor& ddr, double L, const Tensor& ell) {
    const int n = ell.dim();
    a.A = Tensor(n, down(2));
    a.B = Tensor(n, down(1));
    a.M = Tensor(n, down(2));
    for (int X = 0; X < n; ++X) {
        a.B[X] = r * L * ell[X] + L * L * dr[X] / 3.0;
        for (int Y = 0; Y < n; ++Y) {
            a.A(X, Y) = L * ell[X] * dr[Y] + 2.0 / 3.0 * L * ell[Y] * dr[X] + r * ell[X] * ell[Y] +
                        L * L * ddr(Y, X) / 3.0;
            a.M(X, Y) = L * ell[X] * dr[Y] + L * ell[Y] * dr[X] + L * L * ddr(X, Y);
        }
    }
}

/// A_bb(X, W) = (Cartan vertical C-derivative)(X; W) + (l_X C_W + l_W C_X) / L,
/// with VC(W, X) the Cartan vertical derivative of C in direction X.
inline Tensor cartan_c_combination(const Tensor& VC, double L, const Tensor& ell, const Tensor& C) {
    const int n = C.dim();
    Tensor out(n, down(2));
    for (int X = 0; X < n; ++X)
        for (int W = 0; W < n; ++W) out(X, W) = VC(W, X) + (ell[X] * C[W] + ell[W] * C[X]) / L;
    return out;
}

/// Metric trace g^{XW} t_XW.
inline double metric_trace(const Tensor& g_inv, const Tensor& t) {
    double s = 0.0;
    for (int i = 0; i < t.dim(); ++i)
        for (int j = 0; j < t.dim(); ++j) s += g_inv(i, j) * t(i, j);
    return s;
}

} // namespace finsler

#include "finsler/fundamentals.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace finsler;

namespace {

ChartPoint pt(std::vector<double> x, std::vector<double> y) { return {std::move(x), std::move(y)}; }

std::vector<ChartPoint> samples(const MetricFixture& f, int count, std::uint64_t seed = 3) {
    SampleSpec s;
    s.count = count;
    s.seed = seed;
    return sample_points(f, s);
}

/// Randers fundamental tensor in closed form:
/// g_ij = (F/a)(a_ij - Y_i Y_j / a^2) + (Y_i/a + b_i)(Y_j/a + b_j), Y_i = a_ij y^j.
Tensor randers_g(const Tensor& a, const std::vector<double>& b, const std::vector<double>& y) {
    const int n = a.dim();
    std::vector<double> Y(static_cast<std::size_t>(n), 0.0);
    double aa = 0.0, beta = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) Y[i] += a(i, j) * y[j];
        aa += Y[i] * y[i];
        beta += b[i] * y[i];
    }
    const double alpha = std::sqrt(aa), F = alpha + beta;
    Tensor g(n, down(2));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            g(i, j) = F / alpha * (a(i, j) - Y[i] * Y[j] / aa) + (Y[i] / alpha + b[i]) * (Y[j] / alpha + b[j]);
    return g;
}

Jet det3(const JetTensor& g, int n) {
    if (n == 2) return g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
    return g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1)) - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0)) +
           g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0));
}

} // namespace

TEST(Fundamentals, InvariantsOnAllFixtures) {
    for (const auto& name : builtin_fixture_names())
        for (int n : {2, 3, 4}) {
            const auto f = builtin_fixture(name, n, builtin_fixture_defaults(name));
            for (const auto& p : samples(f, 10)) {
                const auto P = fundamental_pack(f, p);
                const double s = std::max(max_abs(P.T), 1.0);
                EXPECT_LT(max_asymmetry(P.T) / s, 1e-9) << name;
                double gyy = 0.0, tr = 0.0;
                for (int i = 0; i < n; ++i) {
                    tr += P.phi(i, i);
                    double h = 0.0, t = 0.0;
                    for (int j = 0; j < n; ++j) {
                        gyy += P.g(i, j) * p.y[i] * p.y[j];
                        h += P.hbar(i, j) * p.y[j];
                        t += P.T(i, 0, j) * p.y[j];
                    }
                    EXPECT_LT(std::abs(h), 1e-12);
                    EXPECT_LT(std::abs(t), 1e-12);
                }
                EXPECT_NEAR(gyy, P.L * P.L, 1e-12 * P.L * P.L);
                EXPECT_NEAR(tr, n - 1.0, 1e-12);
            }
        }
}

TEST(Fundamentals, RandersMatchesClosedForm) {
    const auto f = builtin_fixture("randers-generic", 3, {{"b", 0.3}, {"bx", 0.2}, {"sigma", 0.5}});
    for (const auto& p : samples(f, 10)) {
        double x2 = 0.0;
        for (double v : p.x) x2 += v * v;
        Tensor a = (1.0 + 0.5 * x2) * identity_tensor(3, down(2));
        std::vector<double> b(3);
        for (int i = 0; i < 3; ++i) b[i] = (i == 0 ? 0.3 : 0.0) + 0.2 * p.x[(i + 1) % 3];
        EXPECT_LT(max_abs_diff(fundamental_pack(f, p).g, randers_g(a, b, p.y)), 1e-13);
    }
}

TEST(Fundamentals, CartanTensorMatchesFiniteDifferencesOfG) {
    const double h = 1e-4;
    for (const char* name : {"funk", "quartic-minkowski", "randers-generic"}) {
        const auto f = builtin_fixture(name, 3, builtin_fixture_defaults(name));
        for (const auto& p : samples(f, 4)) {
            const auto P = fundamental_pack(f, p);
            for (int k = 0; k < 3; ++k) {
                ChartPoint a = p, b = p;
                a.y[k] += h;
                b.y[k] -= h;
                const Tensor ga = fundamental_tensor(f, a), gb = fundamental_tensor(f, b);
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j)
                        EXPECT_NEAR(P.T(i, j, k), 0.25 * (ga(i, j) - gb(i, j)) / h, 1e-6) << name;
            }
        }
    }
}

TEST(Fundamentals, TraceOfCartanIsLogDerivativeOfVolume) {
    // C_k = d/dy^k log sqrt(det g): a second route through the determinant.
    for (const char* name : {"funk", "quartic-minkowski", "randers-generic"})
        for (int n : {2, 3}) {
            const auto f = builtin_fixture(name, n, builtin_fixture_defaults(name));
            for (const auto& p : samples(f, 5)) {
                const FundamentalJets F = fundamental_jets(f, p, {3, 0});
                const Jet logvol = 0.5 * log(det3(F.g, n));
                for (int k = 0; k < n; ++k) EXPECT_NEAR(F.C[k].value(), logvol.dy(k).value(), 1e-12) << name;
            }
        }
}

TEST(Fundamentals, RiemannianFixturesHaveNoCartanTensor) {
    for (const char* name : {"euclidean", "riemann-const-k"}) {
        const auto f = builtin_fixture(name, 3, builtin_fixture_defaults(name));
        for (const auto& p : samples(f, 5)) EXPECT_LT(max_abs(fundamental_pack(f, p).T), 1e-13);
    }
}

TEST(Fundamentals, AngularProjection) {
    for (const auto& name : builtin_fixture_names()) {
        const auto f = builtin_fixture(name, 3, builtin_fixture_defaults(name));
        for (const auto& p : samples(f, 5)) EXPECT_LT(angular_projection_check(f, p).max_residual(), 1e-12) << name;
    }
}

TEST(Fundamentals, InverseMetric) {
    const auto f = builtin_fixture("funk", 3);
    const auto p = pt({0.3, 0.1, -0.2}, {1.0, 0.2, 0.1});
    const auto P = fundamental_pack(f, p);
    const Eigen::MatrixXd prod = to_matrix(P.g) * to_matrix(P.g_inv);
    EXPECT_LT((prod - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Fundamentals, SingularMatrixIsRejected) {
    auto sp = JetSpace::make(pt({0.0, 0.0}, {1.0, 0.0}), 2);
    JetTensor m(2, down(2), sp->constant(0.0));
    m(0, 0) = sp->constant(1.0);
    m(0, 1) = m(1, 0) = sp->constant(1.0);
    m(1, 1) = sp->constant(1.0);
    EXPECT_THROW(jet_inverse(m), DegenerateMetricError);
}

TEST(Fundamentals, PointOutsideDomainIsRejected) {
    const auto f = builtin_fixture("funk", 2);
    EXPECT_THROW(fundamental_pack(f, pt({1.2, 0.0}, {1.0, 0.0})), Error);
}

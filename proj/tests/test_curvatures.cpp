#include "finsler/curvatures.hpp"
#include "finsler/evaluation.hpp"
#include "finsler/identities.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace finsler;

namespace {

std::vector<ChartPoint> samples(const MetricFixture& f, int count, std::uint64_t seed = 11) {
    SampleSpec s;
    s.count = count;
    s.seed = seed;
    return sample_points(f, s);
}

std::vector<std::array<std::vector<double>, 3>> random_triples(int n, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
    std::vector<std::array<std::vector<double>, 3>> out;
    for (int t = 0; t < count; ++t) {
        std::array<std::vector<double>, 3> d;
        for (auto& v : d)
            for (int i = 0; i < n; ++i) v.push_back(u());
        out.push_back(d);
    }
    return out;
}

MetricFixture fixture(const std::string& name, int n) { return builtin_fixture(name, n, builtin_fixture_defaults(name)); }

} // namespace

TEST(Curvatures, DeviationTensorOfConstantCurvature) {
    for (double k : {1.0, -0.5}) {
        const auto f = builtin_fixture("riemann-const-k", 3, {{"k", k}});
        for (const auto& p : samples(f, 5)) {
            const Frame fr = make_frame(f, p, {6, 2});
            const Tensor H = values(deviation_tensor(fr));
            const auto P = pack(fr.F);
            EXPECT_LT(relative_residual(H, (k * P.L * P.L) * P.phi), 1e-10);
        }
    }
}

TEST(Curvatures, FunkHasConstantFlagCurvatureMinusQuarter) {
    const auto f = fixture("funk", 3);
    for (const auto& p : samples(f, 5)) {
        const Frame fr = make_frame(f, p, {6, 2});
        const auto P = pack(fr.F);
        EXPECT_LT(relative_residual(values(deviation_tensor(fr)), (-0.25 * P.L * P.L) * P.phi), 1e-10);
    }
}

TEST(Curvatures, BerwaldFixturesHaveNoHvCurvature) {
    for (const char* name : {"euclidean", "riemann-const-k", "quartic-minkowski"}) {
        const auto f = fixture(name, 3);
        for (const auto& p : samples(f, 4)) {
            const Frame fr = make_frame(f, p, {5, 1});
            EXPECT_LT(max_abs(values(berwald_hv_curvature(fr))), 1e-12) << name;
        }
    }
}

TEST(Curvatures, FunkIsNotBerwaldNorLandsberg) {
    const auto f = fixture("funk", 2);
    const ChartPoint p{{0.3, 0.1}, {1.0 / std::sqrt(1.04), 0.2 / std::sqrt(1.04)}};
    const PointData d = evaluate_point(f, p);
    EXPECT_GT(max_abs(d.curv.P_berwald), 1e-3);
    EXPECT_GT(max_abs(d.curv.Landsberg), 1e-3);
    EXPECT_LT(residuals::landsberg_two_routes(d), 1e-7);
    // P hat is the Landsberg tensor with its first index raised.
    EXPECT_GT(max_abs(d.curv.P_hat), 1e-3);
}

TEST(Curvatures, InvariantsOnAllFixtures) {
    for (const auto& name : builtin_fixture_names())
        for (int n : {2, 3}) {
            const auto f = fixture(name, n);
            for (const auto& p : samples(f, 5)) {
                const PointData d = evaluate_point(f, p);
                EXPECT_LT(residuals::berwald_hv_eta(d), 1e-8) << name;
                EXPECT_LT(residuals::deviation_eta(d), 1e-8) << name;
                EXPECT_LT(residuals::rhat_contracts_to_H(d), 1e-8) << name;
                EXPECT_LT(residuals::h_curvature_structure(d), 1e-8) << name;
                EXPECT_LT(residuals::berwald_first_bianchi(d), 1e-8) << name;
                EXPECT_LT(residuals::landsberg_two_routes(d), 1e-7) << name;
                EXPECT_LT(residuals::landsberg_symmetry(d), 1e-8) << name;
                EXPECT_LT(residuals::second_bianchi(d), 1e-6) << name;
                EXPECT_LT(residuals::exchange_identity(d), 1e-6) << name;
                EXPECT_LT(residuals::rhat_cyclic(d), 1e-6) << name;
                if (max_abs(d.curv.P_berwald) < 1e-9) {
                    EXPECT_LT(max_abs(d.curv.Landsberg), 1e-9) << name;
                }
            }
        }
}

TEST(Curvatures, BianchiOnRandomTriples) {
    for (const char* name : {"riemann-const-k", "funk", "randers-generic"}) {
        const auto f = fixture(name, 3);
        for (const auto& p : samples(f, 3)) {
            const Frame fr = make_frame(f, p);
            const CurvatureJets K = curvature_jets(fr);
            EXPECT_LT(bianchi_residual(fr, K, random_triples(3, 20, 99)), 1e-6) << name;
        }
    }
}

TEST(Curvatures, BianchiNeedsTheHvTerm) {
    // Dropping the P°(R̂) term breaks the identity on a non-Berwald metric.
    const auto f = fixture("randers-generic", 3);
    const ChartPoint p = samples(f, 1).front();
    const Frame fr = make_frame(f, p);
    const CurvatureJets K = curvature_jets(fr);
    const Tensor DR = values(horizontal_derivative(fr, K.R, Connection::berwald));
    const Tensor P = values(K.P);
    const Tensor zeroP(P.dim(), mixed(3));
    const Tensor Rh = values(K.R_hat);
    const auto dirs = random_triples(3, 5, 1);
    EXPECT_LT(bianchi_residual(second_bianchi_tensor(DR, P, Rh), second_bianchi_scale(DR, P, Rh), dirs), 1e-8);
    EXPECT_GT(bianchi_residual(second_bianchi_tensor(DR, zeroP, Rh), second_bianchi_scale(DR, P, Rh), dirs), 1e-4);
}

TEST(Curvatures, ExchangeIdentityOnFunkAndRiemann) {
    for (const char* name : {"funk", "riemann-const-k"}) {
        const auto f = fixture(name, 3);
        for (const auto& p : samples(f, 3)) {
            const Frame fr = make_frame(f, p);
            const auto [lhs, rhs] = exchange_identity_sides(fr, curvature_jets(fr));
            EXPECT_LT(relative_residual(lhs, rhs), 1e-6) << name;
        }
    }
}

TEST(Curvatures, CartanVerticalCurvature) {
    // n = 2: the angular space is one-dimensional, so S vanishes.
    const auto funk2 = fixture("funk", 2);
    for (const auto& p : samples(funk2, 5)) {
        const Frame fr = make_frame(funk2, p, {5, 1});
        EXPECT_LT(max_abs(values(cartan_v_curvature(fr.F))), 1e-12);
    }
    const auto q3 = fixture("quartic-minkowski", 3);
    for (const auto& p : samples(q3, 3)) {
        const PointData d = evaluate_point(q3, p);
        EXPECT_GT(max_abs(d.curv.S_cartan), 1e-3);
        // antisymmetric in its last two slots
        const Tensor& S = d.curv.S_cartan;
        double worst = 0.0;
        for_each_index(3, 4, [&](std::span<const int> i) {
            worst = std::max(worst, std::abs(S(i[0], i[1], i[2], i[3]) + S(i[0], i[1], i[3], i[2])));
        });
        EXPECT_LT(worst, 1e-12);
        EXPECT_LT(residuals::cartan_v_curvature_horizontal(d), 1e-8);
    }
}

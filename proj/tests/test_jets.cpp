#include "finsler/jet.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <string>

using namespace finsler;
using nlohmann::json;

namespace {

json load_oracle() {
    std::ifstream in(std::string(FINSLER_TEST_DATA) + "/jet_oracle.json");
    if (!in) throw std::runtime_error("jet oracle data missing");
    return json::parse(in);
}

Jet eval_tree(const json& node, const JetSpace& sp) {
    const std::string op = node[0];
    if (op == "var") return sp.variable(node[1].get<int>());
    if (op == "const") return sp.constant(node[1].get<double>());
    if (op == "scale") return node[1].get<double>() * eval_tree(node[2], sp);
    if (op == "pow") return pow(eval_tree(node[1], sp), node[2].get<double>());
    if (op == "sqrt") return sqrt(eval_tree(node[1], sp));
    if (op == "exp") return exp(eval_tree(node[1], sp));
    if (op == "log") return log(eval_tree(node[1], sp));
    const Jet a = eval_tree(node[1], sp);
    const Jet b = eval_tree(node[2], sp);
    if (op == "add") return a + b;
    if (op == "sub") return a - b;
    if (op == "mul") return a * b;
    if (op == "div") return a / b;
    throw std::runtime_error("unknown op " + op);
}

ChartPoint point2(double x0, double x1, double y0, double y1) { return {{x0, x1}, {y0, y1}}; }

} // namespace

TEST(JetOracle, MatchesSymbolicTaylorCoefficients) {
    const json doc = load_oracle();
    const int dim = doc["dim"], order = doc["order"];
    ASSERT_GE(doc["cases"].size(), 20u);
    double worst = 0.0;
    for (const auto& c : doc["cases"]) {
        const std::vector<double> base = c["base"];
        ChartPoint p{{base.begin(), base.begin() + dim}, {base.begin() + dim, base.end()}};
        auto sp = JetSpace::make(p, order);
        const Jet f = eval_tree(c["tree"], *sp);
        for (const auto& e : c["coefficients"]) {
            const double expect = e["coeff"];
            const double got = f.coeff(MultiIndex(e["alpha"].get<std::vector<int>>()));
            const double rel = std::abs(got - expect) / std::max(std::abs(expect), 1e-300);
            if (std::abs(expect) > 1e-14) worst = std::max(worst, rel);
            else EXPECT_LT(std::abs(got), 1e-12);
        }
    }
    EXPECT_LT(worst, 1e-12);
}

TEST(Jet, VariablesAndConstants) {
    auto sp = JetSpace::make(point2(0.1, 0.2, 0.3, 0.4), 4);
    const Jet y1 = sp->y(1);
    EXPECT_DOUBLE_EQ(y1.value(), 0.4);
    EXPECT_DOUBLE_EQ(y1.dy(1).value(), 1.0);
    EXPECT_DOUBLE_EQ(y1.dx(0).value(), 0.0);
    EXPECT_DOUBLE_EQ(sp->constant(2.5).dy(0).value(), 0.0);
}

TEST(Jet, ProductRuleAndMixedPartials) {
    auto sp = JetSpace::make(point2(0.3, -0.2, 0.7, 0.5), 5);
    const Jet x0 = sp->x(0), y0 = sp->y(0), y1 = sp->y(1);
    const Jet f = x0 * x0 * y0 * y1 * y1;
    // d^3 f / dx0 dy0 dy1 = 2 x0 * 2 y1
    EXPECT_NEAR(f.dx(0).dy(0).dy(1).value(), 4.0 * 0.3 * 0.5, 1e-14);
    EXPECT_NEAR(f.partial(MultiIndex(std::vector<int>{2, 0, 1, 2})), 4.0, 1e-13);
}

TEST(Jet, ElementaryFunctionsAgreeWithClosedForms) {
    auto sp = JetSpace::make(point2(0.0, 0.0, 1.3, 0.0), 6);
    const Jet t = sp->y(0);
    const double v = 1.3;
    EXPECT_NEAR(sqrt(t).dy(0).dy(0).value(), -0.25 * std::pow(v, -1.5), 1e-14);
    EXPECT_NEAR(exp(t).dy(0).dy(0).dy(0).value(), std::exp(v), 1e-12);
    EXPECT_NEAR(log(t).dy(0).dy(0).value(), -1.0 / (v * v), 1e-14);
    EXPECT_NEAR(pow(t, 2.5).dy(0).dy(0).value(), 2.5 * 1.5 * std::pow(v, 0.5), 1e-13);
    EXPECT_NEAR((1.0 / t).dy(0).dy(0).dy(0).value(), -6.0 / std::pow(v, 4), 1e-12);
}

TEST(Jet, HomogeneityIsVisibleInCoefficients) {
    // Euler: y^i d_i L = L for a 1-homogeneous L.
    auto sp = JetSpace::make(point2(0.0, 0.0, 0.6, -0.8), 3);
    const Jet y0 = sp->y(0), y1 = sp->y(1);
    const Jet L = pow(y0 * y0 * y0 * y0 + y1 * y1 * y1 * y1, 0.25);
    EXPECT_NEAR(0.6 * L.dy(0).value() - 0.8 * L.dy(1).value(), L.value(), 1e-14);
}

TEST(Jet, DerivativeBeyondOrderThrows) {
    auto sp = JetSpace::make(point2(0.1, 0.1, 1.0, 0.0), 2);
    const Jet f = sp->y(0) * sp->y(0);
    EXPECT_NO_THROW(f.dy(0).dy(0));
    EXPECT_THROW(f.dy(0).dy(0).dy(0), OrderError);
    EXPECT_THROW(f.coeff(MultiIndex(std::vector<int>{0, 0, 3, 0})), OrderError);
}

TEST(Jet, XOrderBudgetIsTracked) {
    auto sp = JetSpace::make(point2(0.1, 0.1, 1.0, 0.5), 4, 1);
    const Jet f = sp->x(0) * sp->y(0);
    EXPECT_NO_THROW(f.dx(0));
    EXPECT_THROW(f.dx(0).dx(0), OrderError);
    EXPECT_EQ(f.dy(0).dy(0).order(), 2);
}

TEST(Jet, MixingSpacesThrows) {
    auto a = JetSpace::make(point2(0.1, 0.1, 1.0, 0.0), 3);
    auto b = JetSpace::make(point2(0.2, 0.1, 1.0, 0.0), 3);
    EXPECT_THROW(a->y(0) + b->y(0), SpaceMismatchError);
    EXPECT_THROW(a->y(0) * b->y(0), SpaceMismatchError);
}

TEST(Jet, DomainErrorsCarryTheLabel) {
    auto sp = JetSpace::make(point2(0.0, 0.0, -1.0, 0.0), 3);
    try {
        (void)sqrt(sp->y(0), "radicand");
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("radicand"), std::string::npos);
    }
    EXPECT_THROW((void)log(sp->y(0)), DomainError);
    EXPECT_THROW((void)(1.0 / (sp->y(0) + 1.0)), DomainError);
}

TEST(Jet, LiftMatchesDirectConstruction) {
    const ChartPoint p = point2(0.2, -0.1, 0.5, 0.9);
    auto body = [](auto x, auto y) { return safe_sqrt(y[0] * y[0] + y[1] * y[1] + x[0] * y[0] * y[1], "q"); };
    const Jet L = lift(body, p, 4);
    EXPECT_NEAR(L.value(), body(p.x, p.y), 1e-15);
    auto sp = JetSpace::make(p, 4);
    const Jet direct = sqrt(sp->y(0) * sp->y(0) + sp->y(1) * sp->y(1) + sp->x(0) * sp->y(0) * sp->y(1));
    for (std::size_t i = 0; i < L.coefficients().size(); ++i)
        EXPECT_NEAR(L.coefficients()[i], direct.coefficients()[i], 1e-14);
}

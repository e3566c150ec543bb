#pragma once

/**
 * @file metrics.hpp
 * @brief Closed-form Finsler functions, deterministic sampling of chart
 * points, and registration-time validation (homogeneity, strong convexity).
 */

#include "finsler/core.hpp"
#include "finsler/jet.hpp"
#include "finsler/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace finsler {

using JetFinslerFn = std::function<Jet(std::span<const Jet>, std::span<const Jet>)>;
using FinslerFn = std::function<double(std::span<const double>, std::span<const double>)>;
using Params = std::map<std::string, double>;

struct Interval {
    double lo = -0.5;
    double hi = 0.5;
};

struct MetricFixture {
    std::string name;
    int dim = 0;
    Params params;
    FinslerFn L;
    JetFinslerFn jet_L;
    std::function<bool(const ChartPoint&)> domain;
    /// Default sampling box for x, one interval per coordinate.
    std::vector<Interval> x_box;

    double operator()(const ChartPoint& p) const { return L(p.x, p.y); }

    bool contains(const ChartPoint& p) const {
        if (p.dim() != dim || static_cast<int>(p.y.size()) != dim) return false;
        bool nonzero = std::any_of(p.y.begin(), p.y.end(), [](double v) { return v != 0.0; });
        return nonzero && domain(p);
    }

    /// L as a jet at p, exact through the given orders.
    Jet lift(const ChartPoint& p, int order, int x_order) const {
        return finsler::lift([this](std::span<const Jet> x, std::span<const Jet> y) { return jet_L(x, y); }, p,
                             order, x_order);
    }
};

namespace detail {

template <class F>
MetricFixture make_fixture(std::string name, int dim, Params params, F body,
                           std::function<bool(const ChartPoint&)> domain, Interval box) {
    MetricFixture f;
    f.name = std::move(name);
    f.dim = dim;
    f.params = std::move(params);
    f.L = [body](std::span<const double> x, std::span<const double> y) { return body(x, y); };
    f.jet_L = [body](std::span<const Jet> x, std::span<const Jet> y) { return body(x, y); };
    f.domain = std::move(domain);
    f.x_box.assign(static_cast<std::size_t>(dim), box);
    return f;
}

template <class S>
S dot(std::span<const S> a, std::span<const S> b) {
    S s = a[0] * b[0];
    for (std::size_t i = 1; i < a.size(); ++i) s = s + a[i] * b[i];
    return s;
}

inline double norm_sq(std::span<const double> v) { return dot(v, v); }

inline double param(const Params& given, const std::string& key, double fallback) {
    auto it = given.find(key);
    return it == given.end() ? fallback : it->second;
}

inline void reject_unknown(const std::string& fixture, const Params& given, std::initializer_list<const char*> known) {
    for (const auto& [key, value] : given) {
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
            throw FixtureError("fixture '" + fixture + "' has no parameter '" + key + "'");
        if (!std::isfinite(value)) throw FixtureError("fixture '" + fixture + "': parameter '" + key + "' is not finite");
    }
}

} // namespace detail

inline const std::vector<std::string>& builtin_fixture_names() {
    static const std::vector<std::string> names{"euclidean", "riemann-const-k", "quartic-minkowski", "funk",
                                                "randers-generic"};
    return names;
}

/// Parameter names accepted by each builtin fixture, with defaults.
inline Params builtin_fixture_defaults(const std::string& name) {
    if (name == "riemann-const-k") return {{"k", 1.0}};
    if (name == "quartic-minkowski") return {{"c", 1.0}};
    if (name == "randers-generic") return {{"b", 0.3}, {"bx", 0.2}, {"sigma", 0.5}};
    return {};
}

/**
 * Catalog lookup.
 *
 *  - euclidean:          L = |y|
 *  - riemann-const-k:    L = 2|y| / (1 + k|x|^2), sectional curvature k
 *  - quartic-minkowski:  L = (sum y_i^4 + c (sum y_i^2)^2)^(1/4), c >= 0
 *  - funk:               L = (sqrt((1-|x|^2)|y|^2 + <x,y>^2) + <x,y>) / (1-|x|^2), |x| < 1
 *  - randers-generic:    L = sqrt(a_ij y^i y^j) + b_i y^i with
 *                        a_ij = (1 + sigma|x|^2) delta_ij,
 *                        b_i  = b delta_i1 + bx x^(i+1 mod n)
 */
inline MetricFixture builtin_fixture(const std::string& name, int dim, const Params& given = {}) {
    using detail::dot;
    if (dim < 2) throw FixtureError("fixture dimension must be >= 2 (got " + std::to_string(dim) + ")");
    if (dim > 6) throw FixtureError("fixture dimension must be <= 6 (got " + std::to_string(dim) + ")");

    if (name == "euclidean") {
        detail::reject_unknown(name, given, {});
        auto body = [](auto x, auto y) {
            (void)x;
            return safe_sqrt(dot(y, y), "|y|^2");
        };
        return detail::make_fixture(name, dim, {}, body, [](const ChartPoint&) { return true; }, {-1.0, 1.0});
    }

    if (name == "riemann-const-k") {
        detail::reject_unknown(name, given, {"k"});
        const double k = detail::param(given, "k", 1.0);
        auto body = [k](auto x, auto y) {
            auto conf = 1.0 + k * dot(x, x);
            return safe_div(2.0 * safe_sqrt(dot(y, y), "|y|^2"), conf, "1 + k|x|^2");
        };
        auto domain = [k](const ChartPoint& p) { return 1.0 + k * detail::norm_sq(p.x) > 0.05; };
        return detail::make_fixture(name, dim, {{"k", k}}, body, domain, {-0.5, 0.5});
    }

    if (name == "quartic-minkowski") {
        detail::reject_unknown(name, given, {"c"});
        const double c = detail::param(given, "c", 1.0);
        if (c < 0.0) throw FixtureError("quartic-minkowski: c must be >= 0 (got " + std::to_string(c) + ")");
        auto body = [c](auto x, auto y) {
            (void)x;
            auto q = y[0] * y[0];
            auto s = q * q;
            for (std::size_t i = 1; i < y.size(); ++i) {
                auto yi2 = y[i] * y[i];
                q = q + yi2;
                s = s + yi2 * yi2;
            }
            return safe_pow(s + c * q * q, 0.25, "sum y^4 + c (sum y^2)^2");
        };
        return detail::make_fixture(name, dim, {{"c", c}}, body, [](const ChartPoint&) { return true; },
                                    {-1.0, 1.0});
    }

    if (name == "funk") {
        detail::reject_unknown(name, given, {});
        auto body = [](auto x, auto y) {
            auto xy = dot(x, y);
            auto gap = 1.0 - dot(x, x);
            auto root = safe_sqrt(gap * dot(y, y) + xy * xy, "(1-|x|^2)|y|^2 + <x,y>^2");
            return safe_div(root + xy, gap, "1 - |x|^2");
        };
        auto domain = [](const ChartPoint& p) { return detail::norm_sq(p.x) < 1.0; };
        return detail::make_fixture(name, dim, {}, body, domain, {-0.5, 0.5});
    }

    if (name == "randers-generic") {
        detail::reject_unknown(name, given, {"b", "bx", "sigma"});
        const double b = detail::param(given, "b", 0.3);
        const double bx = detail::param(given, "bx", 0.2);
        const double sigma = detail::param(given, "sigma", 0.5);
        if (sigma < 0.0) throw FixtureError("randers-generic: sigma must be >= 0");
        if (std::abs(b) >= 1.0)
            throw FixtureError("randers-generic: |b|_a must be < 1 (got " + std::to_string(std::abs(b)) + " at x = 0)");
        auto body = [b, bx, sigma](auto x, auto y) {
            const std::size_t n = y.size();
            auto conf = 1.0 + sigma * dot(x, x);
            auto beta = b * y[0];
            for (std::size_t i = 0; i < n; ++i) beta = beta + bx * x[(i + 1) % n] * y[i];
            return safe_sqrt(conf * dot(y, y), "a(y,y)") + beta;
        };
        auto domain = [b, bx, sigma](const ChartPoint& p) {
            const std::size_t n = p.x.size();
            const double conf = 1.0 + sigma * detail::norm_sq(p.x);
            double bb = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double bi = (i == 0 ? b : 0.0) + bx * p.x[(i + 1) % n];
                bb += bi * bi;
            }
            return conf > 0.0 && bb / conf < 1.0;
        };
        return detail::make_fixture(name, dim, {{"b", b}, {"bx", bx}, {"sigma", sigma}}, body, domain,
                                    {-0.5, 0.5});
    }

    std::string known;
    for (const auto& n : builtin_fixture_names()) known += (known.empty() ? "" : ", ") + n;
    throw FixtureError("unknown fixture '" + name + "' (known: " + known + ")");
}

struct SampleSpec {
    int count = 50;
    std::uint64_t seed = 1;
    /// Per-coordinate x intervals; empty means the fixture's default box.
    std::vector<Interval> x_box;
    /// Norm of the emitted y (directions are uniform on the unit sphere).
    double y_norm = 1.0;
    /// Rejection budget; 0 means 100 * count + 1000.
    int max_attempts = 0;
};

namespace detail {

// The distributions in <random> are implementation-defined; these are not.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double standard_normal(std::mt19937_64& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace detail

/// Deterministic for a fixed seed; every point satisfies the fixture domain.
inline std::vector<ChartPoint> sample_points(const MetricFixture& f, const SampleSpec& s) {
    if (s.count < 1) throw SamplingError("sample count must be >= 1");
    if (!(s.y_norm > 0.0)) throw SamplingError("y norm must be positive");
    const auto& box = s.x_box.empty() ? f.x_box : s.x_box;
    if (static_cast<int>(box.size()) != f.dim)
        throw SamplingError("x box has " + std::to_string(box.size()) + " intervals, fixture dimension is " +
                            std::to_string(f.dim));
    std::mt19937_64 rng(s.seed);
    const int budget = s.max_attempts > 0 ? s.max_attempts : 100 * s.count + 1000;
    std::vector<ChartPoint> out;
    out.reserve(static_cast<std::size_t>(s.count));
    for (int attempt = 0; attempt < budget && static_cast<int>(out.size()) < s.count; ++attempt) {
        ChartPoint p;
        p.x.resize(static_cast<std::size_t>(f.dim));
        p.y.resize(static_cast<std::size_t>(f.dim));
        for (int i = 0; i < f.dim; ++i) {
            const auto& iv = box[static_cast<std::size_t>(i)];
            p.x[static_cast<std::size_t>(i)] = iv.lo + (iv.hi - iv.lo) * detail::uniform01(rng);
        }
        double norm = 0.0;
        for (double& v : p.y) {
            v = detail::standard_normal(rng);
            norm += v * v;
        }
        norm = std::sqrt(norm);
        if (norm < 1e-8) continue;
        for (double& v : p.y) v *= s.y_norm / norm;
        if (f.contains(p)) out.push_back(std::move(p));
    }
    if (static_cast<int>(out.size()) < s.count)
        throw SamplingError("rejection budget exhausted: only " + std::to_string(out.size()) + " of " +
                            std::to_string(s.count) + " points fell inside the domain of '" + f.name + "'");
    return out;
}

/// g_ij = 1/2 d^2(L^2)/dy^i dy^j at p.
inline Tensor fundamental_tensor(const MetricFixture& f, const ChartPoint& p) {
    const Jet L = f.lift(p, 2, 0);
    const Jet E = L * L;
    Tensor g(f.dim, down(2));
    for (int i = 0; i < f.dim; ++i)
        for (int j = 0; j < f.dim; ++j) g(i, j) = 0.5 * E.dy(i).dy(j).value();
    return g;
}

struct FixtureValidation {
    bool passed = true;
    double max_homogeneity_error = 0.0;
    double min_eigenvalue = 0.0;
    double max_condition = 0.0;
    std::size_t points_checked = 0;
    std::optional<ChartPoint> witness;
    std::string message;
};

inline constexpr double kHomogeneityTolerance = 1e-10;
inline constexpr double kConditionLimit = 1e12;

/**
 * Checks positive 1-homogeneity of L (lambda in {0.5, 2, 3}) and positive
 * definiteness of g on the sampled points, plus the coordinate-axis
 * directions at the first sampled x. Reports the first violation.
 */
inline FixtureValidation validate_fixture(const MetricFixture& f, const SampleSpec& s) {
    FixtureValidation report;
    report.min_eigenvalue = std::numeric_limits<double>::infinity();
    std::vector<ChartPoint> probes = sample_points(f, s);
    const ChartPoint anchor = probes.front();
    for (int i = 0; i < f.dim; ++i) {
        for (double sign : {1.0, -1.0}) {
            ChartPoint p = anchor;
            std::fill(p.y.begin(), p.y.end(), 0.0);
            p.y[static_cast<std::size_t>(i)] = sign * s.y_norm;
            if (f.contains(p)) probes.push_back(std::move(p));
        }
    }
    auto fail = [&](const ChartPoint& p, std::string why) {
        if (!report.passed) return;
        report.passed = false;
        report.witness = p;
        report.message = std::move(why) + " at " + to_string(p);
    };
    for (const auto& p : probes) {
        ++report.points_checked;
        double L0 = 0.0;
        try {
            L0 = f(p);
        } catch (const DomainError& e) {
            fail(p, std::string("L not evaluable: ") + e.what());
            continue;
        }
        if (!(L0 > 0.0)) {
            fail(p, "L is not positive");
            continue;
        }
        for (double lambda : {0.5, 2.0, 3.0}) {
            ChartPoint q = p;
            for (double& v : q.y) v *= lambda;
            const double err = std::abs(f(q) - lambda * L0) / (lambda * L0);
            report.max_homogeneity_error = std::max(report.max_homogeneity_error, err);
            if (err >= kHomogeneityTolerance) fail(p, "L is not positively 1-homogeneous (lambda " + std::to_string(lambda) + ")");
        }
        Eigen::VectorXd ev;
        try {
            ev = symmetric_eigenvalues(fundamental_tensor(f, p));
        } catch (const DomainError& e) {
            fail(p, std::string("fundamental tensor not evaluable: ") + e.what());
            continue;
        }
        const double lo = ev.minCoeff();
        const double hi = ev.cwiseAbs().maxCoeff();
        report.min_eigenvalue = std::min(report.min_eigenvalue, lo);
        const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
        report.max_condition = std::max(report.max_condition, cond);
        if (!(lo > 0.0) || cond > kConditionLimit)
            fail(p, "fundamental tensor is not positive definite (min eigenvalue " + detail::fmt(lo) + ")");
    }
    return report;
}

/// Throws FixtureError carrying the witness when validation fails.
inline void require_valid(const MetricFixture& f, const SampleSpec& s) {
    auto report = validate_fixture(f, s);
    if (!report.passed) throw FixtureError("fixture '" + f.name + "' rejected: " + report.message);
}

} // namespace finsler

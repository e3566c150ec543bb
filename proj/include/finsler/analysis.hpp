#pragma once

/**
 * @file analysis.hpp
 * @brief Classification predicates, the identity suite, the Numata pipeline
 * and point-level checks.
 *
 * Sample evaluation runs on a small thread pool; results are stored by sample
 * index, so every report is independent of the thread count.
 */

#include "finsler/evaluation.hpp"
#include "finsler/identities.hpp"
#include "finsler/metrics.hpp"
#include "finsler/scalar.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace finsler {

inline constexpr double kDefaultIdentityTolerance = 1e-6;
inline constexpr double kDefaultZeroTolerance = 1e-7;

struct Tolerances {
    double identity = kDefaultIdentityTolerance; // identity residuals, fits, c-reducibility
    double zero = kDefaultZeroTolerance;         // norms that must vanish
};

// ---- threads -----------------------------------------------------------------

/// FINSLER_THREADS if set and positive, otherwise the hardware concurrency.
inline int default_thread_count() {
    if (const char* env = std::getenv("FINSLER_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// out[i] = fn(i) for i < count. The first exception (by index) is rethrown.
template <class R, class Fn>
std::vector<R> parallel_map(std::size_t count, int threads, Fn fn) {
    std::vector<std::optional<R>> slots(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), count);
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    std::vector<R> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (errors[i]) std::rethrow_exception(errors[i]);
        out.push_back(std::move(*slots[i]));
    }
    return out;
}

// ---- sample evaluation --------------------------------------------------------

struct SampleSet {
    MetricFixture fixture;
    SampleSpec spec;
    std::vector<ChartPoint> points;
    std::vector<PointData> data;
};

inline SampleSet evaluate_samples(const MetricFixture& f, const SampleSpec& s, int threads = 1,
                                  JetBudget budget = {}) {
    require_valid(f, s);
    SampleSet set{f, s, sample_points(f, s), {}};
    set.data = parallel_map<PointData>(set.points.size(), threads,
                                       [&](std::size_t i) { return evaluate_point(f, set.points[i], budget); });
    return set;
}

/// Running maximum with the point that attains it.
struct Witness {
    double value = 0.0;
    std::optional<ChartPoint> point;

    void offer(double v, const ChartPoint& p) {
        if (point && std::isnan(value)) return;
        if (!point || v > value || std::isnan(v)) {
            value = v;
            point = p;
        }
    }
};

// ---- classification -------------------------------------------------------------

struct PredicateVerdict {
    std::string name;
    bool verdict = false;
    double residual = 0.0;
    double tolerance = 0.0;
    std::optional<ChartPoint> witness;
    bool trivial = false;
    std::string note;
};

struct ScalarSummary {
    double mean = 0.0, min = 0.0, max = 0.0, stdev = 0.0;
    double fit_residual = 0.0;
    double max_grad_v = 0.0, max_grad_h = 0.0;
    int flat_points = 0;
    /// No flat sample and |r| above the zero tolerance everywhere.
    bool nonzero = false;
};

struct ClassificationReport {
    std::string fixture;
    int dim = 0;
    Params params;
    int samples = 0;
    std::uint64_t seed = 0;
    Tolerances tol;
    std::vector<PredicateVerdict> predicates;
    ScalarSummary r;

    const PredicateVerdict& get(const std::string& name) const {
        for (const auto& p : predicates)
            if (p.name == name) return p;
        throw Error("no predicate '" + name + "'");
    }
    bool holds(const std::string& name) const { return get(name).verdict; }
};

inline const std::vector<std::string>& predicate_names() {
    static const std::vector<std::string> names = {"riemannian",       "berwald",   "landsberg", "c_reducible",
                                                   "scalar_curvature", "constant_r"};
    return names;
}

inline ClassificationReport classify(const SampleSet& set, const Tolerances& tol = {}) {
    ClassificationReport rep;
    rep.fixture = set.fixture.name;
    rep.dim = set.fixture.dim;
    rep.params = set.fixture.params;
    rep.samples = static_cast<int>(set.points.size());
    rep.seed = set.spec.seed;
    rep.tol = tol;

    Witness wT, wP, wL, wC, wFit, wGrad;
    bool c_trivial = true;
    std::vector<double> rs;
    auto& s = rep.r;
    s.min = std::numeric_limits<double>::infinity();
    s.max = -std::numeric_limits<double>::infinity();
    for (const auto& d : set.data) {
        wT.offer(max_abs(d.F.T), d.point);
        wP.offer(max_abs(d.curv.P_berwald), d.point);
        wL.offer(max_abs(d.curv.Landsberg), d.point);
        const auto [cres, ctriv] = c_reducibility_residual(d.F.T, d.F.hbar, d.F.C, tol.zero);
        c_trivial = c_trivial && ctriv;
        wC.offer(cres, d.point);
        wFit.offer(d.fit.residual, d.point);
        const double gv = max_abs(d.fit.r_grad_v), gh = max_abs(d.fit.r_grad_h);
        s.max_grad_v = std::max(s.max_grad_v, gv);
        s.max_grad_h = std::max(s.max_grad_h, gh);
        wGrad.offer(std::max(gv, gh), d.point);
        if (d.fit.flat) ++s.flat_points;
        rs.push_back(d.fit.r);
        s.min = std::min(s.min, d.fit.r);
        s.max = std::max(s.max, d.fit.r);
    }
    for (double r : rs) s.mean += r;
    s.mean /= static_cast<double>(rs.size());
    for (double r : rs) s.stdev += (r - s.mean) * (r - s.mean);
    s.stdev = std::sqrt(s.stdev / static_cast<double>(rs.size()));
    s.fit_residual = wFit.value;
    s.nonzero = s.flat_points == 0 && std::min(std::abs(s.min), std::abs(s.max)) > tol.zero && s.min * s.max > 0.0;

    auto verdict = [&](const std::string& name, const Witness& w, double t) {
        PredicateVerdict v{name, w.value < t, w.value, t, w.point, false, {}};
        return v;
    };
    rep.predicates.push_back(verdict("riemannian", wT, tol.zero));
    rep.predicates.back().note = "max |T|";
    rep.predicates.push_back(verdict("berwald", wP, tol.zero));
    rep.predicates.back().note = "max |P°|";
    rep.predicates.push_back(verdict("landsberg", wL, tol.zero));
    rep.predicates.back().note = "max |Landsberg tensor|";

    PredicateVerdict cred = verdict("c_reducible", wC, tol.identity);
    cred.trivial = c_trivial;
    cred.note = c_trivial ? "Cartan tensor vanishes" : "|T - cyc(ħ⊗C)/(n+1)| / |T|";
    rep.predicates.push_back(cred);

    PredicateVerdict scal = verdict("scalar_curvature", wFit, tol.identity);
    scal.trivial = s.flat_points == rep.samples;
    scal.note = scal.trivial ? "flat: H vanishes, r = 0" : "|H - r L² φ|";
    rep.predicates.push_back(scal);

    PredicateVerdict cr;
    cr.name = "constant_r";
    cr.tolerance = tol.identity;
    cr.residual = std::max({s.stdev, s.max_grad_v, s.max_grad_h});
    cr.witness = wGrad.point;
    cr.verdict = scal.verdict && cr.residual < tol.identity;
    cr.trivial = scal.trivial;
    cr.note = "max(stdev r, |∂r/∂y|, |δr/δx|)";
    rep.predicates.push_back(cr);
    return rep;
}

// ---- identity suite -------------------------------------------------------------

enum class IdentityStatus { pass, fail, vacuous };

inline const char* to_string(IdentityStatus s) {
    switch (s) {
    case IdentityStatus::pass: return "pass";
    case IdentityStatus::fail: return "fail";
    case IdentityStatus::vacuous: return "vacuous";
    }
    return "?";
}

struct IdentityResult {
    std::string id;
    std::string anchor;
    std::string group;
    IdentityStatus status = IdentityStatus::vacuous;
    double max_residual = 0.0;
    double tolerance = 0.0;
    std::optional<ChartPoint> witness;
    /// Passed only because the instance is Riemannian.
    bool trivial = false;
    std::string note;
};

struct IdentityReport {
    std::string fixture;
    int dim = 0;
    int samples = 0;
    std::vector<IdentityResult> results;

    bool all_pass() const {
        return std::none_of(results.begin(), results.end(),
                            [](const IdentityResult& r) { return r.status == IdentityStatus::fail; });
    }
    const IdentityResult& get(const std::string& id) const {
        for (const auto& r : results)
            if (r.id == id) return r;
        throw Error("no identity '" + id + "' in report");
    }
};

/// Empty when the gate holds, otherwise the failed leg.
inline std::optional<std::string> gate_refusal(Gate g, const ClassificationReport& c) {
    auto scalar_leg = [&]() -> std::optional<std::string> {
        if (!c.holds("scalar_curvature")) return "not of scalar curvature";
        if (!c.r.nonzero) return "scalar curvature vanishes (r = 0)";
        return std::nullopt;
    };
    auto dim_leg = [&]() -> std::optional<std::string> {
        if (c.dim < 3) return "dimension below 3";
        return std::nullopt;
    };
    switch (g) {
    case Gate::none: return std::nullopt;
    case Gate::landsberg:
        if (!c.holds("landsberg")) return "not Landsberg";
        return std::nullopt;
    case Gate::scalar_nonzero: return scalar_leg();
    case Gate::c_reducible:
        if (!c.holds("c_reducible")) return "not C-reducible";
        return std::nullopt;
    case Gate::landsberg_scalar_nonzero:
        if (!c.holds("landsberg")) return "not Landsberg";
        return scalar_leg();
    case Gate::landsberg_c_reducible:
        if (!c.holds("landsberg")) return "not Landsberg";
        if (!c.holds("c_reducible")) return "not C-reducible";
        return dim_leg();
    case Gate::berwald_scalar_nonzero:
        if (!c.holds("berwald")) return "not Berwald";
        if (auto s = scalar_leg()) return s;
        return dim_leg();
    }
    return std::nullopt;
}

inline IdentityResult run_identity(const IdentitySpec& spec, const SampleSet& set, const ClassificationReport& c,
                                   const Tolerances& tol) {
    IdentityResult r{spec.id, spec.anchor, spec.group, IdentityStatus::vacuous, 0.0, tol.identity, {}, false, {}};
    if (auto refusal = gate_refusal(spec.gate, c)) {
        r.note = "gate (" + std::string(to_string(spec.gate)) + ") refused: " + *refusal;
        return r;
    }
    Witness w;
    for (const auto& d : set.data) w.offer(spec.residual(d), d.point);
    r.max_residual = w.value;
    r.witness = w.point;
    r.status = w.value < tol.identity ? IdentityStatus::pass : IdentityStatus::fail;
    r.trivial = spec.riemannian_only && c.holds("riemannian");
    if (r.trivial) r.note = "Riemannian instance";
    return r;
}

inline IdentityReport run_identity_suite(const SampleSet& set, const ClassificationReport& c,
                                         const Tolerances& tol = {}) {
    IdentityReport rep{set.fixture.name, set.fixture.dim, static_cast<int>(set.points.size()), {}};
    for (const auto& spec : identity_catalog()) rep.results.push_back(run_identity(spec, set, c, tol));
    return rep;
}

// ---- Numata pipeline ---------------------------------------------------------------

struct HypothesisLeg {
    std::string name;
    bool holds = false;
    std::string detail;
};

struct NumataReport {
    ClassificationReport classification;
    std::vector<HypothesisLeg> legs;
    bool hypothesis = false;
    /// Set only when the hypothesis holds.
    std::optional<bool> conclusion;
    std::vector<IdentityResult> chain;
    std::string summary;
};

inline bool is_chain_group(const std::string& g) {
    return g == "scalar" || g == "c-reducible" || g == "numata-chain";
}

inline NumataReport numata_pipeline(const SampleSet& set, const Tolerances& tol = {}) {
    if (set.fixture.dim < 3) throw GateRefused("the Numata pipeline needs dimension n >= 3");
    NumataReport rep;
    rep.classification = classify(set, tol);
    const auto& c = rep.classification;

    auto fmt = [](double v) {
        std::ostringstream os;
        os.precision(3);
        os << std::scientific << v;
        return os.str();
    };
    const auto& lp = c.get("landsberg");
    rep.legs.push_back({"landsberg", lp.verdict,
                        lp.verdict ? "Landsberg tensor vanishes"
                                   : "not Landsberg: max |Landsberg tensor| = " + fmt(lp.residual)});
    const auto& sp = c.get("scalar_curvature");
    rep.legs.push_back({"scalar_curvature", sp.verdict,
                        sp.verdict ? "H = r L² φ holds" : "not of scalar curvature: max |H - r L² φ| = " + fmt(sp.residual)});
    const bool nz = sp.verdict && c.r.nonzero;
    rep.legs.push_back({"r_nonzero", nz,
                        nz ? "r ranges over [" + fmt(c.r.min) + ", " + fmt(c.r.max) + "]"
                           : !sp.verdict        ? "r undefined: not of scalar curvature"
                           : c.r.flat_points > 0 ? "r = 0: H vanishes, a nowhere-zero scalar curvature is required"
                                                 : "r is not bounded away from 0"});
    rep.hypothesis = std::all_of(rep.legs.begin(), rep.legs.end(), [](const HypothesisLeg& l) { return l.holds; });

    const IdentityReport suite = run_identity_suite(set, c, tol);
    for (const auto& r : suite.results)
        if (is_chain_group(r.group)) rep.chain.push_back(r);

    if (rep.hypothesis) {
        rep.conclusion = c.holds("riemannian") && c.holds("constant_r");
        rep.summary = *rep.conclusion ? "hypothesis holds; conclusion holds: Riemannian of constant curvature r = " +
                                            fmt(c.r.mean)
                                      : "hypothesis holds but the conclusion fails";
    } else {
        std::string failed;
        for (const auto& l : rep.legs)
            if (!l.holds) failed += (failed.empty() ? "" : "; ") + l.detail;
        rep.summary = "hypothesis fails (" + failed + "); conclusion not asserted";
    }
    return rep;
}

// ---- point-level checks ---------------------------------------------------------------

namespace detail {

inline bool scalar_at(const PointData& d, double tol) { return !d.fit.flat && d.fit.residual < tol; }

inline void require_scalar(const PointData& d, double tol, const char* what) {
    if (d.fit.flat) throw GateRefused(std::string(what) + ": H vanishes (r = 0)");
    if (d.fit.residual >= tol) throw GateRefused(std::string(what) + ": not of scalar curvature at this point");
}

} // namespace detail

/// A, B, M, the C-derivative combination and the scalars alpha, mu, psi.
inline AuxTensors aux_tensors(const PointData& d, double tol = kDefaultIdentityTolerance) {
    detail::require_scalar(d, tol, "aux_tensors");
    AuxTensors a = d.aux;
    a.alpha = extract_alpha(d.VC_cartan, d.F.ell, d.F.C, d.F.L, d.F.hbar, d.F.g_inv).value;
    a.mu = extract_mu(d.DC_cartan, d.F.hbar, d.F.g_inv).value;
    a.psi = extract_psi(d.F.ell, d.F.C, d.dC, d.F.L, d.F.hbar, d.F.g_inv).value;
    return a;
}

inline AuxTensors aux_tensors(const MetricFixture& f, const ChartPoint& p, double tol = kDefaultIdentityTolerance) {
    return aux_tensors(evaluate_point(f, p), tol);
}

/// Residual of the R° formula in A, B, ħ, φ. Flat points compare 0 with 0.
inline double check_lemma24(const MetricFixture& f, const ChartPoint& p, double tol = kDefaultIdentityTolerance) {
    const PointData d = evaluate_point(f, p);
    if (d.fit.flat) return max_abs(d.curv.R_berwald);
    detail::require_scalar(d, tol, "check_lemma24");
    return residuals::h_curvature_formula(d);
}

inline double check_rhat_formula(const MetricFixture& f, const ChartPoint& p,
                                 double tol = kDefaultIdentityTolerance) {
    const PointData d = evaluate_point(f, p);
    if (d.fit.flat) return max_abs(d.curv.R_hat);
    detail::require_scalar(d, tol, "check_rhat_formula");
    return residuals::rhat_formula(d);
}

struct CReducibility {
    bool verdict = false;
    double residual = 0.0;
    bool trivial = false;
};

inline CReducibility is_c_reducible(const MetricFixture& f, const ChartPoint& p, const Tolerances& tol = {}) {
    const FundamentalPack F = fundamental_pack(f, p);
    const auto [res, trivial] = c_reducibility_residual(F.T, F.hbar, F.C, tol.zero);
    return {trivial || res < tol.identity, res, trivial};
}

struct Prop25Result {
    double alpha = 0.0;
    double residual = 0.0;
};

/// L (∇_γ C) + ℓ⊗C + C⊗ℓ = α ħ. Refused where the point is not C-reducible.
inline Prop25Result check_prop25(const MetricFixture& f, const ChartPoint& p, const Tolerances& tol = {}) {
    if (!is_c_reducible(f, p, tol).verdict) throw GateRefused("check_prop25: point is not C-reducible");
    const PointData d = evaluate_point(f, p);
    const auto e = extract_alpha(d.VC_cartan, d.F.ell, d.F.C, d.F.L, d.F.hbar, d.F.g_inv);
    return {e.value, e.residual};
}

struct GatedCheck {
    bool applied = false;
    std::string refusal;
    bool trivial = false;
    std::vector<double> residuals;
    double scalar = 0.0;
};

/// T from r and ∂r/∂y from C, on Landsberg points of nonzero scalar curvature.
inline GatedCheck check_eq5_eq6(const MetricFixture& f, const ChartPoint& p, const Tolerances& tol = {}) {
    const PointData d = evaluate_point(f, p);
    GatedCheck g;
    if (max_abs(d.curv.Landsberg) >= tol.zero) g.refusal = "not Landsberg";
    else if (!detail::scalar_at(d, tol.identity)) g.refusal = d.fit.flat ? "r = 0" : "not of scalar curvature";
    if (!g.refusal.empty()) return g;
    g.applied = true;
    g.trivial = max_abs(d.F.T) < tol.zero;
    g.residuals = {residuals::cartan_from_r(d), residuals::r_vertical_from_c(d)};
    return g;
}

/// μ from ∇_β C = μ ħ, its proportionality residual and |(n-2) μ C|.
inline GatedCheck check_thm31_mu(const MetricFixture& f, const ChartPoint& p, const Tolerances& tol = {}) {
    GatedCheck g;
    if (f.dim < 3) {
        g.refusal = "dimension below 3";
        return g;
    }
    const PointData d = evaluate_point(f, p);
    const auto [cres, ctriv] = c_reducibility_residual(d.F.T, d.F.hbar, d.F.C, tol.zero);
    if (max_abs(d.curv.Landsberg) >= tol.zero) g.refusal = "not Landsberg";
    else if (!ctriv && cres >= tol.identity) g.refusal = "not C-reducible";
    if (!g.refusal.empty()) return g;
    g.applied = true;
    g.trivial = ctriv;
    const auto mu = extract_mu(d.DC_cartan, d.F.hbar, d.F.g_inv);
    g.scalar = mu.value;
    g.residuals = {mu.residual, mu_c_norm(mu.value, d.F.C)};
    return g;
}

/// Both sides of the (D°_βη P°) expansion and its η contraction.
inline std::pair<double, double> check_eq1a(const MetricFixture& f, const ChartPoint& p,
                                            double tol = kDefaultIdentityTolerance) {
    const PointData d = evaluate_point(f, p);
    if (d.fit.flat) {
        const double lhs = max_abs(residuals::dpeta_lowered(d));
        return {lhs, lhs};
    }
    detail::require_scalar(d, tol, "check_eq1a");
    return {residuals::dpeta_expansion(d), residuals::dpeta_eta(d)};
}

/// The end-state identities for Berwald spaces of nonzero scalar curvature.
inline IdentityReport check_thm33_chain(const MetricFixture& f, const SampleSpec& s, const Tolerances& tol = {},
                                        int threads = 1) {
    const SampleSet set = evaluate_samples(f, s, threads);
    const ClassificationReport c = classify(set, tol);
    IdentityReport rep{f.name, f.dim, static_cast<int>(set.points.size()), {}};
    for (const auto& spec : identity_catalog())
        if (spec.gate == Gate::berwald_scalar_nonzero) rep.results.push_back(run_identity(spec, set, c, tol));
    return rep;
}

} // namespace finsler

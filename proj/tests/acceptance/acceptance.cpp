// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "finsler/analysis.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace finsler;
using nlohmann::json;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string sci(double v) {
    std::ostringstream os;
    os.precision(2);
    os << std::scientific << v;
    return os.str();
}

MetricFixture fixture(const std::string& name, int n, Params params = {}) {
    if (params.empty()) params = builtin_fixture_defaults(name);
    return builtin_fixture(name, n, params);
}

SampleSpec spec(int count, std::uint64_t seed = 1) {
    SampleSpec s;
    s.count = count;
    s.seed = seed;
    return s;
}

const int kThreads = default_thread_count();

// Samples at n = 3, 50 points, shared by several criteria.
const SampleSet& catalog_set(const std::string& name) {
    static std::map<std::string, SampleSet> cache;
    auto it = cache.find(name);
    if (it == cache.end()) it = cache.emplace(name, evaluate_samples(fixture(name, 3), spec(50), kThreads)).first;
    return it->second;
}

double worst(const SampleSet& set, const std::string& id) {
    const auto& s = identity_spec(id);
    double w = 0.0;
    for (const auto& d : set.data) {
        const double r = s.residual(d);
        if (std::isnan(r)) return r;
        w = std::max(w, r);
    }
    return w;
}

void bound(Outcome& o, const std::string& fixture_name, const SampleSet& set, const std::string& id, double tol) {
    const double w = worst(set, id);
    o.require(w < tol, fixture_name + " " + id + " = " + sci(w));
}

// ---- 1 ------------------------------------------------------------------------

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
    throw Error("unknown op " + op);
}

Outcome criterion1() {
    Outcome o;
    std::ifstream in(std::string(FINSLER_TEST_DATA) + "/jet_oracle.json");
    if (!in) {
        o.require(false, "oracle file missing");
        return o;
    }
    const json doc = json::parse(in);
    const int dim = doc["dim"], order = doc["order"];
    o.require(order >= 6, "oracle order below 6");
    o.require(doc["cases"].size() >= 20, "fewer than 20 oracle cases");
    double rel = 0.0, abs_small = 0.0;
    std::size_t coeffs = 0;
    for (const auto& c : doc["cases"]) {
        const std::vector<double> base = c["base"];
        ChartPoint p{{base.begin(), base.begin() + dim}, {base.begin() + dim, base.end()}};
        auto sp = JetSpace::make(p, order);
        const Jet f = eval_tree(c["tree"], *sp);
        for (const auto& e : c["coefficients"]) {
            const double expect = e["coeff"];
            const double got = f.coeff(MultiIndex(e["alpha"].get<std::vector<int>>()));
            ++coeffs;
            if (std::abs(expect) > 1e-14) rel = std::max(rel, std::abs(got - expect) / std::abs(expect));
            else abs_small = std::max(abs_small, std::abs(got));
        }
    }
    o.require(rel < 1e-12, "max relative error " + sci(rel));
    o.require(abs_small < 1e-12, "max error on vanishing coefficients " + sci(abs_small));
    if (o.pass) o.detail = std::to_string(coeffs) + " coefficients, max relative error " + sci(rel);
    return o;
}

// ---- 2 - 5 --------------------------------------------------------------------

Outcome criterion2() {
    Outcome o;
    for (const auto& name : builtin_fixture_names()) {
        const SampleSet& s = catalog_set(name);
        bound(o, name, s, "cartan-total-symmetry", 1e-9);
        bound(o, name, s, "hbar-annihilates-eta", 1e-8);
        bound(o, name, s, "metric-on-eta", 1e-8);
        bound(o, name, s, "phi-projector", 1e-8);
    }
    if (o.pass) o.detail = "5 fixtures x 50 points at n = 3";
    return o;
}

Outcome criterion3() {
    Outcome o;
    for (const auto& name : builtin_fixture_names()) {
        const SampleSet& s = catalog_set(name);
        for (const char* id : {"spray-homogeneity-ladder", "cartan-metricity", "deflection"}) bound(o, name, s, id, 1e-8);
    }
    if (o.pass) o.detail = "ladder, Cartan metricity and deflection below 1e-8";
    return o;
}

Outcome criterion4() {
    Outcome o;
    for (const char* name : {"funk", "quartic-minkowski"}) {
        const SampleSet s = evaluate_samples(fixture(name, 3), spec(30, 2), kThreads);
        for (const char* id : {"vertical-total-symmetry", "vertical-derivative-of-L", "vertical-derivative-of-ell",
                               "berwald-vertical-phi", "berwald-vertical-hbar", "cartan-vertical-hbar"})
            bound(o, name, s, id, 1e-6);
    }
    if (o.pass) o.detail = "(a)-(e) on funk and quartic-minkowski, 30 points each";
    return o;
}

Outcome criterion5() {
    Outcome o;
    for (const auto& name : builtin_fixture_names()) {
        const SampleSet& s = catalog_set(name);
        bound(o, name, s, "second-bianchi", 1e-6);
        bound(o, name, s, "landsberg-two-routes", 1e-7);
        bound(o, name, s, "berwald-hv-eta", 1e-8);
    }
    if (o.pass) o.detail = "second Bianchi, Landsberg two routes and i_eta P on all fixtures";
    return o;
}

// ---- 6 ------------------------------------------------------------------------

Outcome criterion6() {
    Outcome o;
    std::string found;
    auto check = [&](const MetricFixture& f, double expect) {
        const auto c = classify(evaluate_samples(f, spec(50), kThreads));
        const double err = std::max(std::abs(c.r.min - expect), std::abs(c.r.max - expect));
        o.require(err < 1e-6, f.name + " r in [" + sci(c.r.min) + ", " + sci(c.r.max) + "], expected " + sci(expect));
        o.require(c.holds("constant_r"), f.name + " constant_r verdict false");
        found += (found.empty() ? "" : ", ") + f.name + " r = " + sci(c.r.mean);
    };
    check(fixture("riemann-const-k", 3, {{"k", 1.0}}), 1.0);
    check(fixture("riemann-const-k", 3, {{"k", -0.5}}), -0.5);
    check(fixture("funk", 3), -0.25);
    if (o.pass) o.detail = found;
    return o;
}

// ---- 7 ------------------------------------------------------------------------

const std::vector<std::string>& criterion7_ids() {
    static const std::vector<std::string> ids = {
        "aux-A-eta-first",      "aux-A-eta-second",    "aux-A-eta-eta",         "aux-vertical-B",
        "h-curvature-formula",  "rhat-formula",        "dpeta-expansion",       "dpeta-eta",
        "c-reducible-alpha",    "vertical-C-symmetry", "horizontal-T-symmetry", "horizontal-C-symmetry",
        "c-vertical-relation",  "c-reducible-psi",     "cartan-from-r",         "r-vertical-from-C",
        "horizontal-C-proportional", "mu-C-vanishes",  "berwald-C-equation",    "C-vanishes",
        "r-vertically-parallel", "rhat-constant-form", "r-horizontal-along-ell", "r-horizontally-parallel",
        "scalar-curvature-form", "r-homogeneity",      "exchange-identity",     "rhat-cyclic",
        "cartan-v-curvature-horizontal"};
    return ids;
}

Tensor covector(std::vector<double> v) {
    Tensor t(static_cast<int>(v.size()), down(1));
    for (std::size_t i = 0; i < v.size(); ++i) t[static_cast<int>(i)] = v[i];
    return t;
}

// Gate tests on constructed inputs: each gated formula is exact on data built
// to satisfy it and visibly wrong on perturbed data.
void synthetic_gates(Outcome& o) {
    const int n = 3;
    Tensor g_inv(n, {Slot::up, Slot::up}), hbar = identity_tensor(n, down(2)), ell(n, down(1));
    for (int i = 0; i < n; ++i) g_inv(i, i) = 1.0;
    hbar(0, 0) = 0.0;
    ell[0] = 1.0;
    const double L = 1.3, r = 0.6;
    const Tensor C = covector({0.0, 0.5, -0.3});
    const Tensor dr = (-3.0 * r / (n + 1)) * C;

    // T from r and dr/dy from C
    Tensor T(n, down(3));
    for_each_index(n, 3, [&](std::span<const int> a) {
        T.at(a) = -(hbar(a[0], a[2]) * dr[a[1]] + hbar(a[1], a[2]) * dr[a[0]] + hbar(a[0], a[1]) * dr[a[2]]) / (3.0 * r);
    });
    o.require(cartan_from_r_residual(T, hbar, dr, r) == 0.0, "synthetic T from r not exact");
    o.require(r_vertical_from_c_residual(dr, C, r) == 0.0, "synthetic dr from C not exact");
    o.require(cartan_from_r_residual(T, hbar, dr, -r) > 0.5, "perturbed T from r not detected");
    // The constructed T is C-reducible.
    // and it is C-reducible with the same C
    o.require(c_reducibility_residual(T, hbar, C, 1e-7).first < 1e-15, "synthetic T not C-reducible");

    // mu: DC = mu hbar and (n-2) mu C
    const auto mu = extract_mu(2.0 * hbar, hbar, g_inv);
    o.require(mu.value == 2.0 && mu.residual == 0.0, "synthetic mu = 2 not recovered exactly");
    o.require(mu_c_norm(mu.value, C) == 2.0 * 0.5, "(n-2) mu C norm wrong");

    // C equations with coefficient 3 (Berwald) and 2 (psi)
    auto dC_for = [&](double k, double target) {
        Tensor dC(n, down(2));
        for (int X = 0; X < n; ++X)
            for (int W = 0; W < n; ++W)
                dC(W, X) = (target * hbar(X, W) - ell[X] * C[W] - ell[W] * C[X]) / L + k / (n + 1) * C[X] * C[W];
        return dC;
    };
    o.require(berwald_c_equation_residual(ell, C, dC_for(3.0, 0.0), L) < 1e-15, "synthetic Berwald C equation");
    o.require(berwald_c_equation_residual(ell, C, dC_for(2.0, 0.0), L) > 1e-3, "perturbed C equation not detected");
    const auto psi = extract_psi(ell, C, dC_for(2.0, 0.7), L, hbar, g_inv);
    o.require(std::abs(psi.value - 0.7) < 1e-15 && psi.residual < 1e-15, "synthetic psi not recovered");

    // alpha
    Tensor VC(n, down(2));
    for (int X = 0; X < n; ++X)
        for (int W = 0; W < n; ++W) VC(W, X) = (-0.4 * hbar(X, W) - ell[X] * C[W] - ell[W] * C[X]) / L;
    const auto alpha = extract_alpha(VC, ell, C, L, hbar, g_inv);
    o.require(std::abs(alpha.value + 0.4) < 1e-15 && alpha.residual < 1e-15, "synthetic alpha not recovered");
}

Outcome criterion7() {
    Outcome o;
    const Tolerances tol{1e-5, kDefaultZeroTolerance};
    std::map<std::string, int> applied;
    int vacuous = 0;
    for (const auto& name : builtin_fixture_names()) {
        const SampleSet& s = catalog_set(name);
        const auto c = classify(s, tol);
        for (const auto& id : criterion7_ids()) {
            const auto r = run_identity(identity_spec(id), s, c, tol);
            if (r.status == IdentityStatus::fail) o.require(false, name + " " + id + " = " + sci(r.max_residual));
            if (r.status == IdentityStatus::vacuous) {
                ++vacuous;
                o.require(r.note.find("refused") != std::string::npos, name + " " + id + " vacuous without a reason");
            }
            if (r.status == IdentityStatus::pass) ++applied[id];
        }
    }
    // Gates that must refuse: funk is not Landsberg, quartic has r = 0.
    {
        const auto c = classify(catalog_set("funk"));
        o.require(run_identity(identity_spec("cartan-from-r"), catalog_set("funk"), c, tol).status ==
                      IdentityStatus::vacuous,
                  "cartan-from-r not vacuous on funk");
        const auto q = classify(catalog_set("quartic-minkowski"));
        o.require(run_identity(identity_spec("berwald-C-equation"), catalog_set("quartic-minkowski"), q, tol).status ==
                      IdentityStatus::vacuous,
                  "berwald-C-equation not vacuous on quartic-minkowski");
    }
    for (const auto& id : criterion7_ids()) o.require(applied[id] > 0, id + " never applies");
    synthetic_gates(o);
    if (o.pass)
        o.detail = std::to_string(criterion7_ids().size()) + " identities, " + std::to_string(vacuous) +
                   " vacuous fixture gates, synthetic gate tests exact";
    return o;
}

// ---- 8 ------------------------------------------------------------------------

Outcome criterion8() {
    Outcome o;
    using Row = std::map<std::string, bool>;
    const std::map<std::string, Row> expected = {
        {"euclidean", {{"riemannian", true}, {"berwald", true}, {"landsberg", true}}},
        {"riemann-const-k", {{"riemannian", true}, {"berwald", true}, {"landsberg", true}, {"constant_r", true}}},
        {"quartic-minkowski", {{"riemannian", false}, {"berwald", true}, {"landsberg", true}, {"c_reducible", false}}},
        {"funk", {{"riemannian", false}, {"berwald", false}, {"landsberg", false}, {"c_reducible", true}}},
        {"randers-generic", {{"c_reducible", true}}},
    };
    for (const auto& [name, row] : expected) {
        const auto c = classify(catalog_set(name), {1e-6, kDefaultZeroTolerance});
        for (const auto& [pred, v] : row)
            o.require(c.holds(pred) == v, name + " " + pred + " = " + (c.holds(pred) ? "true" : "false"));
        if (name == "quartic-minkowski")
            o.require(c.r.flat_points == c.samples && c.r.max == 0.0 && c.r.min == 0.0, "quartic r != 0");
        if (name == "funk") o.require(std::abs(c.r.mean + 0.25) < 1e-6, "funk r = " + sci(c.r.mean));
    }
    if (o.pass) o.detail = "5 x 5 verdict matrix reproduced at n = 3";
    return o;
}

// ---- 9 ------------------------------------------------------------------------

Outcome criterion9() {
    Outcome o;
    const auto rie = numata_pipeline(catalog_set("riemann-const-k"), {1e-5, kDefaultZeroTolerance});
    o.require(rie.hypothesis, "riemann-const-k hypothesis rejected");
    o.require(rie.conclusion && *rie.conclusion, "riemann-const-k conclusion not asserted");
    for (const auto& r : rie.chain)
        if (r.status != IdentityStatus::vacuous)
            o.require(r.status == IdentityStatus::pass && r.max_residual < 1e-5,
                      "chain " + r.id + " = " + sci(r.max_residual));
    const auto funk = numata_pipeline(catalog_set("funk"));
    o.require(!funk.hypothesis && !funk.legs.at(0).holds && funk.legs.at(0).name == "landsberg",
              "funk should fail the Landsberg leg");
    const auto q = numata_pipeline(catalog_set("quartic-minkowski"));
    o.require(!q.hypothesis && q.legs.at(0).holds && q.legs.at(1).holds && !q.legs.at(2).holds,
              "quartic-minkowski should fail only the r != 0 leg");
    if (o.pass) o.detail = "riemann: " + rie.summary + " | funk: " + funk.legs[0].detail + " | quartic: " + q.legs[2].detail;
    return o;
}

// ---- 10 -----------------------------------------------------------------------

struct CliRun {
    int code = -1;
    std::string out;
};

CliRun run_cli(const std::string& args) {
    const std::string cmd = std::string(FINSLER_CLI_PATH) + " " + args + " 2>/dev/null";
    CliRun r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

Outcome criterion10() {
    Outcome o;
    int compared = 0;
    for (const char* name : {"funk", "randers-generic", "quartic-minkowski"}) {
        const std::string base = std::string("verify --fixture ") + name + " --dim 3 --samples 20 --seed 7 --output json";
        const CliRun a = run_cli(base + " --threads 1");
        const CliRun b = run_cli(base + " --threads 1");
        const CliRun c = run_cli(base + " --threads 4");
        o.require(a.code == 0 && b.code == 0 && c.code == 0, std::string(name) + " CLI exit code nonzero");
        o.require(!a.out.empty() && a.out == b.out, std::string(name) + " repeated runs differ");
        o.require(a.out == c.out, std::string(name) + " --threads 1 and 4 differ");
        try {
            const json ja = json::parse(a.out), jc = json::parse(c.out);
            o.require(ja["verdicts"] == jc["verdicts"], std::string(name) + " verdicts depend on thread count");
        } catch (const std::exception& e) {
            o.require(false, std::string(name) + " invalid JSON: " + e.what());
        }
        ++compared;
    }
    const CliRun s1 = run_cli("classify --fixture funk --dim 3 --samples 10 --seed 2 --output json");
    const CliRun s2 = run_cli("classify --fixture funk --dim 3 --samples 10 --seed 3 --output json");
    o.require(s1.out != s2.out, "different seeds gave identical reports");
    if (o.pass) o.detail = std::to_string(compared) + " fixtures byte-identical across repeats and --threads 1/4";
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"derivative-engine exactness", criterion1},
        {"fundamental invariants", criterion2},
        {"connection ladder", criterion3},
        {"vertical derivative identities", criterion4},
        {"curvature integration", criterion5},
        {"scalar-curvature fits", criterion6},
        {"identity suite", criterion7},
        {"truth table", criterion8},
        {"Numata end-to-end", criterion9},
        {"determinism", criterion10},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        if (!o.pass) ++failures;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << (i + 1) << ": " << criteria[i].first << " ("
                  << o.detail << ")" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}

#pragma once

/**
 * @file report.hpp
 * @brief JSON and fixed-width text rendering of classification, identity and
 * Numata reports.
 *
 * The JSON document always has the top-level keys meta, fixture, verdicts,
 * identities and witnesses. Nothing run-dependent beyond the configuration
 * (time, thread count, host) is written, so equal inputs give equal bytes.
 */

#include "finsler/analysis.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <string>

namespace finsler {

inline constexpr const char* kToolName = "finsler";
inline constexpr const char* kToolVersion = "1.0.0";

namespace detail {

inline nlohmann::json number(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

inline nlohmann::json point_json(const ChartPoint& p) { return {{"x", p.x}, {"y", p.y}}; }

inline nlohmann::json witness_json(const std::optional<ChartPoint>& p, double residual) {
    nlohmann::json w = {{"residual", number(residual)}};
    if (p) w["point"] = point_json(*p);
    return w;
}

} // namespace detail

struct ReportMeta {
    std::string command;
    int samples = 0;
    std::uint64_t seed = 0;
    Tolerances tol;
    JetBudget budget;
};

inline nlohmann::json meta_json(const ReportMeta& m) {
    return {{"tool", kToolName},
            {"version", kToolVersion},
            {"command", m.command},
            {"samples", m.samples},
            {"seed", m.seed},
            {"tolerances", {{"identity", m.tol.identity}, {"zero", m.tol.zero}}},
            {"jet", {{"order", m.budget.order}, {"x_order", m.budget.x_order}}}};
}

inline nlohmann::json fixture_json(const MetricFixture& f) {
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : f.params) params[k] = v;
    return {{"name", f.name}, {"dim", f.dim}, {"params", params}};
}

inline nlohmann::json verdicts_json(const ClassificationReport& c) {
    nlohmann::json v = nlohmann::json::object();
    for (const auto& p : c.predicates)
        v[p.name] = {{"value", p.verdict},
                     {"residual", detail::number(p.residual)},
                     {"tolerance", p.tolerance},
                     {"trivial", p.trivial},
                     {"note", p.note}};
    const auto& r = c.r;
    v["r"] = {{"mean", detail::number(r.mean)},  {"min", detail::number(r.min)},
              {"max", detail::number(r.max)},    {"stdev", detail::number(r.stdev)},
              {"flat_points", r.flat_points},    {"nonzero", r.nonzero},
              {"max_grad_v", detail::number(r.max_grad_v)}, {"max_grad_h", detail::number(r.max_grad_h)}};
    return v;
}

inline nlohmann::json identity_json(const IdentityResult& r) {
    return {{"id", r.id},
            {"anchor", r.anchor},
            {"group", r.group},
            {"status", to_string(r.status)},
            {"max_residual", detail::number(r.max_residual)},
            {"tolerance", r.tolerance},
            {"trivial", r.trivial},
            {"note", r.note}};
}

inline nlohmann::json witnesses_json(const ClassificationReport& c, const std::vector<IdentityResult>& ids) {
    nlohmann::json predicates = nlohmann::json::object();
    for (const auto& p : c.predicates) predicates[p.name] = detail::witness_json(p.witness, p.residual);
    nlohmann::json identities = nlohmann::json::object();
    for (const auto& r : ids)
        if (r.witness) identities[r.id] = detail::witness_json(r.witness, r.max_residual);
    return {{"predicates", predicates}, {"identities", identities}};
}

inline nlohmann::json report_json(const ReportMeta& meta, const MetricFixture& f, const ClassificationReport& c,
                                  const std::vector<IdentityResult>& ids,
                                  const NumataReport* numata = nullptr) {
    nlohmann::json doc;
    doc["meta"] = meta_json(meta);
    doc["fixture"] = fixture_json(f);
    doc["verdicts"] = verdicts_json(c);
    if (numata) {
        nlohmann::json legs = nlohmann::json::array();
        for (const auto& l : numata->legs) legs.push_back({{"name", l.name}, {"holds", l.holds}, {"detail", l.detail}});
        doc["verdicts"]["numata"] = {{"hypothesis", numata->hypothesis},
                                     {"legs", legs},
                                     {"conclusion", numata->conclusion ? nlohmann::json(*numata->conclusion) : nullptr},
                                     {"summary", numata->summary}};
    }
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : ids) arr.push_back(identity_json(r));
    doc["identities"] = arr;
    doc["witnesses"] = witnesses_json(c, ids);
    return doc;
}

// ---- text ----------------------------------------------------------------------

namespace detail {

inline std::string sci(double v) {
    if (!std::isfinite(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

inline std::string pad(const std::string& s, std::size_t w) {
    return s.size() >= w ? s + " " : s + std::string(w - s.size(), ' ');
}

} // namespace detail

inline std::string header_text(const ReportMeta& meta, const MetricFixture& f) {
    std::ostringstream os;
    os << meta.command << ": " << f.name << "  n=" << f.dim;
    for (const auto& [k, v] : f.params) os << "  " << k << "=" << v;
    os << "\nsamples=" << meta.samples << "  seed=" << meta.seed << "  tol-identity=" << detail::sci(meta.tol.identity)
       << "  tol-zero=" << detail::sci(meta.tol.zero) << "\n";
    return os.str();
}

inline std::string classification_text(const ClassificationReport& c) {
    using detail::pad;
    std::ostringstream os;
    os << "\n" << pad("predicate", 18) << pad("verdict", 9) << pad("residual", 12) << pad("tolerance", 12) << "note\n";
    for (const auto& p : c.predicates)
        os << pad(p.name, 18) << pad(p.verdict ? (p.trivial ? "yes*" : "yes") : "no", 9)
           << pad(detail::sci(p.residual), 12) << pad(detail::sci(p.tolerance), 12) << p.note << "\n";
    os << "r: mean=" << detail::sci(c.r.mean) << " min=" << detail::sci(c.r.min) << " max=" << detail::sci(c.r.max)
       << " stdev=" << detail::sci(c.r.stdev) << " flat points=" << c.r.flat_points << "\n";
    if (std::any_of(c.predicates.begin(), c.predicates.end(),
                    [](const PredicateVerdict& p) { return p.verdict && p.trivial; }))
        os << "(* trivially true)\n";
    return os.str();
}

inline std::string identities_text(const std::vector<IdentityResult>& ids) {
    using detail::pad;
    std::ostringstream os;
    os << "\n" << pad("identity", 32) << pad("status", 9) << pad("residual", 12) << "anchor\n";
    int pass = 0, fail = 0, vacuous = 0;
    for (const auto& r : ids) {
        std::string st = to_string(r.status);
        if (r.trivial) st += "*";
        os << pad(r.id, 32) << pad(st, 9)
           << pad(r.status == IdentityStatus::vacuous ? "-" : detail::sci(r.max_residual), 12) << r.anchor << "\n";
        if (r.status == IdentityStatus::vacuous) os << std::string(32, ' ') << r.note << "\n";
        (r.status == IdentityStatus::pass ? pass : r.status == IdentityStatus::fail ? fail : vacuous)++;
    }
    os << "pass=" << pass << " fail=" << fail << " vacuous=" << vacuous << "  (* Riemannian instance)\n";
    return os.str();
}

inline std::string numata_text(const NumataReport& n) {
    std::ostringstream os;
    os << "\nhypothesis (Landsberg, scalar curvature, r != 0):\n";
    for (const auto& l : n.legs) os << "  " << detail::pad(l.name, 18) << (l.holds ? "holds  " : "FAILS  ") << l.detail << "\n";
    os << "conclusion (Riemannian, constant r): "
       << (n.conclusion ? (*n.conclusion ? "holds" : "FAILS") : "not asserted") << "\n";
    os << n.summary << "\n";
    return os.str();
}

inline std::string fixtures_text() {
    std::ostringstream os;
    os << detail::pad("fixture", 20) << "default parameters\n";
    for (const auto& name : builtin_fixture_names()) {
        os << detail::pad(name, 20);
        const auto p = builtin_fixture_defaults(name);
        if (p.empty()) os << "-";
        bool first = true;
        for (const auto& [k, v] : p) {
            os << (first ? "" : " ") << k << "=" << v;
            first = false;
        }
        os << "\n";
    }
    return os.str();
}

inline nlohmann::json fixtures_json() {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& name : builtin_fixture_names()) {
        nlohmann::json params = nlohmann::json::object();
        for (const auto& [k, v] : builtin_fixture_defaults(name)) params[k] = v;
        arr.push_back({{"name", name}, {"defaults", params}});
    }
    return {{"fixtures", arr}};
}

} // namespace finsler

// Command-line front end: classify, verify, numata, fixtures.
//
// Exit codes: 0 ok, 1 usage error, 2 fixture invalid, 3 identity failure.

#include "finsler/analysis.hpp"
#include "finsler/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace finsler;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFixture = 2;
constexpr int kExitIdentity = 3;

struct RunConfig {
    std::string fixture;
    int dim = 3;
    std::vector<std::string> params;
    std::map<std::string, double> shortcut; // --k, --c, --b, --bx, --sigma
    int samples = 50;
    std::uint64_t seed = 1;
    double tol_identity = kDefaultIdentityTolerance;
    double tol_zero = kDefaultZeroTolerance;
    std::string output = "text";
    std::string out_path;
    int threads = 0;
    int order = JetBudget{}.order;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Params parse_params(const RunConfig& cfg) {
    Params p;
    for (const auto& kv : cfg.params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--param expects key=value, got '" + kv + "'");
        const std::string key = kv.substr(0, eq);
        const std::string val = kv.substr(eq + 1);
        try {
            std::size_t used = 0;
            p[key] = std::stod(val, &used);
            if (used != val.size()) throw std::invalid_argument(val);
        } catch (const std::exception&) {
            throw UsageError("--param " + key + ": '" + val + "' is not a number");
        }
    }
    for (const auto& [k, v] : cfg.shortcut) p[k] = v;
    return p;
}

std::string fixture_list() {
    std::string s;
    for (const auto& n : builtin_fixture_names()) s += (s.empty() ? "" : ", ") + n;
    return s;
}

void emit(const RunConfig& cfg, const std::string& body) {
    if (cfg.out_path.empty()) {
        std::cout << body;
        return;
    }
    std::ofstream out(cfg.out_path, std::ios::binary);
    if (!out) throw UsageError("cannot open '" + cfg.out_path + "' for writing");
    out << body;
}

std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

struct Prepared {
    MetricFixture fixture;
    SampleSet set;
    ReportMeta meta;
    Tolerances tol;
};

Prepared prepare(const RunConfig& cfg, const std::string& command) {
    if (cfg.fixture.empty()) throw UsageError("--fixture is required (known: " + fixture_list() + ")");
    const auto& names = builtin_fixture_names();
    if (std::find(names.begin(), names.end(), cfg.fixture) == names.end())
        throw UsageError("unknown fixture '" + cfg.fixture + "' (known: " + fixture_list() + ")");
    if (cfg.dim < 2) throw UsageError("--dim must be >= 2");
    if (cfg.samples < 1) throw UsageError("--samples must be >= 1");
    if (!(cfg.tol_identity > 0.0) || !(cfg.tol_zero > 0.0)) throw UsageError("tolerances must be > 0");
    if (cfg.order < 7) throw UsageError("--order must be >= 7");

    Prepared p;
    p.fixture = builtin_fixture(cfg.fixture, cfg.dim, parse_params(cfg));
    p.tol = {cfg.tol_identity, cfg.tol_zero};
    SampleSpec spec;
    spec.count = cfg.samples;
    spec.seed = cfg.seed;
    const JetBudget budget{cfg.order, JetBudget{}.x_order};
    const int threads = cfg.threads > 0 ? cfg.threads : default_thread_count();
    p.set = evaluate_samples(p.fixture, spec, threads, budget);
    p.meta = {command, cfg.samples, cfg.seed, p.tol, budget};
    return p;
}

int cmd_classify(const RunConfig& cfg) {
    const Prepared p = prepare(cfg, "classify");
    const ClassificationReport c = classify(p.set, p.tol);
    if (cfg.output == "json")
        emit(cfg, json_text(report_json(p.meta, p.fixture, c, {})));
    else
        emit(cfg, header_text(p.meta, p.fixture) + classification_text(c));
    return kExitOk;
}

int cmd_verify(const RunConfig& cfg) {
    const Prepared p = prepare(cfg, "verify");
    const ClassificationReport c = classify(p.set, p.tol);
    const IdentityReport suite = run_identity_suite(p.set, c, p.tol);
    if (cfg.output == "json")
        emit(cfg, json_text(report_json(p.meta, p.fixture, c, suite.results)));
    else
        emit(cfg, header_text(p.meta, p.fixture) + classification_text(c) + identities_text(suite.results));
    return suite.all_pass() ? kExitOk : kExitIdentity;
}

int cmd_numata(const RunConfig& cfg) {
    if (cfg.dim < 3)
        throw UsageError("numata requires dimension n >= 3: the theorem is stated for n >= 3 (got --dim " +
                         std::to_string(cfg.dim) + ")");
    const Prepared p = prepare(cfg, "numata");
    const NumataReport n = numata_pipeline(p.set, p.tol);
    if (cfg.output == "json")
        emit(cfg, json_text(report_json(p.meta, p.fixture, n.classification, n.chain, &n)));
    else
        emit(cfg, header_text(p.meta, p.fixture) + classification_text(n.classification) + numata_text(n) +
                      identities_text(n.chain));
    return kExitOk;
}

int cmd_fixtures(const RunConfig& cfg) {
    emit(cfg, cfg.output == "json" ? json_text(fixtures_json()) : fixtures_text());
    return kExitOk;
}

void add_run_options(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--fixture", cfg.fixture, "Fixture name (see `fixtures`)");
    sub->add_option("--dim", cfg.dim, "Dimension n")->check(CLI::Range(2, 6));
    sub->add_option("--param", cfg.params, "Fixture parameter key=value (repeatable)");
    for (const char* key : {"k", "c", "b", "bx", "sigma"}) {
        sub->add_option_function<double>(
            std::string("--") + key, [&cfg, key](double v) { cfg.shortcut[key] = v; },
            std::string("Shorthand for --param ") + key + "=VALUE");
    }
    sub->add_option("--samples", cfg.samples, "Number of sample points")->check(CLI::PositiveNumber);
    sub->add_option("--seed", cfg.seed, "Sampling seed");
    sub->add_option("--tol-identity", cfg.tol_identity, "Tolerance for identity residuals")
        ->check(CLI::PositiveNumber);
    sub->add_option("--tol-zero", cfg.tol_zero, "Tolerance for vanishing norms")->check(CLI::PositiveNumber);
    sub->add_option("--threads", cfg.threads, "Worker threads (default: FINSLER_THREADS or all cores)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--order", cfg.order, "Jet order (>= 7)");
}

} // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    CLI::App app{"Numerical Finsler geometry: classification, identity verification and the Numata pipeline"};
    app.require_subcommand(1);
    app.add_option("--output", cfg.output, "Report format")->check(CLI::IsMember({"text", "json"}));
    app.add_option("--out", cfg.out_path, "Write the report to this file instead of stdout");

    auto* classify_cmd = app.add_subcommand("classify", "Evaluate the classification predicates");
    auto* verify_cmd = app.add_subcommand("verify", "Run the identity suite (exit 3 if any identity fails)");
    auto* numata_cmd = app.add_subcommand("numata", "Check the Numata hypothesis and conclusion (n >= 3)");
    auto* fixtures_cmd = app.add_subcommand("fixtures", "List builtin fixtures and their default parameters");
    for (auto* sub : {classify_cmd, verify_cmd, numata_cmd, fixtures_cmd}) {
        sub->add_option("--output", cfg.output, "Report format")->check(CLI::IsMember({"text", "json"}));
        sub->add_option("--out", cfg.out_path, "Write the report to this file instead of stdout");
    }
    for (auto* sub : {classify_cmd, verify_cmd, numata_cmd}) add_run_options(sub, cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (classify_cmd->parsed()) return cmd_classify(cfg);
        if (verify_cmd->parsed()) return cmd_verify(cfg);
        if (numata_cmd->parsed()) return cmd_numata(cfg);
        return cmd_fixtures(cfg);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const GateRefused& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const FixtureError& e) {
        std::cerr << "fixture invalid: " << e.what() << "\n";
        return kExitFixture;
    } catch (const SamplingError& e) {
        std::cerr << "fixture invalid: " << e.what() << "\n";
        return kExitFixture;
    } catch (const DegenerateMetricError& e) {
        std::cerr << "fixture invalid: " << e.what() << "\n";
        return kExitFixture;
    } catch (const DomainError& e) {
        std::cerr << "fixture invalid: " << e.what() << "\n";
        return kExitFixture;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

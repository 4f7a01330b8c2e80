// drs: population-size estimation from dual-record tables, and the
// simulation studies behind the estimators.
//
// Exit codes: 0 success, 1 usage or I/O error, 2 estimation error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "drs/drs.hpp"

namespace {

constexpr int kUsage = 1;
constexpr int kEstimation = 2;

struct EstimateArgs {
    std::string table;
    std::string method = "dse";
    std::string delta;
    int bootstrap = -1;
    std::uint64_t seed = 20170101;
    bool json = false;
    std::string out;
};

struct SimulateArgs {
    std::string config;
    std::string out;
    int workers = 0;
};

struct ReproduceArgs {
    std::string target;
    std::uint64_t seed = 20170101;
    std::string out;
    std::string svg;
    int replicates = 200;
    int workers = 1;
    std::string delta_mode = "oracle";
};

void emit(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") std::cout << text;
    else drs::io::write_file(path, text);
}

int cmd_estimate(const EstimateArgs& a) {
    const auto table = drs::io::load_table(a.table);
    drs::EstimatorSpec spec;
    spec.method = drs::parse_method(a.method);
    if (!a.delta.empty()) spec.delta = drs::DeltaPolicy::parse(a.delta);
    spec.validate();

    auto report = drs::estimate(spec, table);
    const int b = a.bootstrap >= 0 ? a.bootstrap : (drs::method_uses_delta(spec.method) ? 500 : 0);
    if (b > 0) drs::attach_bootstrap(report, spec, table, b, a.seed);

    const std::string js = drs::io::report_to_json(report).dump(2) + "\n";
    if (a.json) std::cout << js;
    else std::cout << drs::io::report_to_text(report, table);
    if (!a.out.empty()) drs::io::write_file(a.out, js);
    return 0;
}

int cmd_simulate(const SimulateArgs& a) {
    auto cfg = drs::io::config_from_json(drs::io::json::parse(drs::io::read_file(a.config)));
    if (a.workers > 0) cfg.workers = a.workers;
    const auto rows = drs::run_study(cfg);
    for (const auto& r : rows)
        if (!r.valid)
            std::cerr << "warning: " << r.population << "/" << r.estimator << " invalid (" << r.failures << " of "
                      << r.replicates << " replicates failed)\n";
    emit(drs::io::summary_csv(rows), a.out);
    return 0;
}

int cmd_reproduce(const ReproduceArgs& a) {
    drs::reproduce::Options opt;
    opt.seed = a.seed;
    opt.replicates = a.replicates;
    opt.workers = a.workers;
    opt.delta_mode = drs::parse_delta_mode(a.delta_mode);
    const auto result = drs::reproduce::run_target(a.target, opt);
    emit(result.csv, a.out);
    if (!a.svg.empty()) {
        if (result.svg.empty()) throw drs::DomainError("target '" + a.target + "' has no plot");
        drs::io::write_file(a.svg, result.svg);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dual-record-system population size estimation (models M_t and M_tb)"};
    app.require_subcommand(1);
    app.footer(
        "Tables may be JSON {\"x11\":..,\"x10\":..,\"x01\":..} or CSV with header x11,x10,x01.\n"
        "The published real-data examples (Greenfield and Xu data) cannot be reproduced: only\n"
        "summary statistics were published, not the underlying 2x2 cell counts.");

    EstimateArgs ea;
    auto* est = app.add_subcommand("estimate", "Estimate N from one 2x2 table");
    est->add_option("--table", ea.table, "Table file (JSON or CSV)")->required()->check(CLI::ExistingFile);
    est->add_option("--method", ea.method, "dse | pl-mt | mpl-mt | pl-mtb | adpl-mtb | adpl-mt")
        ->capture_default_str();
    est->add_option("--delta", ea.delta, "AdPL delta policy: fixed:<v> | scaled:<k> | recapture:<k>");
    est->add_option("--bootstrap", ea.bootstrap,
                    "Parametric bootstrap replicates for se/CI (default 500 for AdPL, 0 otherwise)");
    est->add_option("--seed", ea.seed, "Bootstrap seed")->capture_default_str();
    est->add_flag("--json", ea.json, "Print the report as JSON instead of text");
    est->add_option("--out", ea.out, "Also write the JSON report to this path");

    SimulateArgs sa;
    auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo study from a JSON config");
    sim->add_option("--config", sa.config, "Study config JSON")->required()->check(CLI::ExistingFile);
    sim->add_option("--out", sa.out, "Summary CSV path (default stdout)");
    sim->add_option("--workers", sa.workers, "Worker threads (overrides the config)");

    ReproduceArgs ra;
    auto* rep = app.add_subcommand("reproduce", "Regenerate a study table or figure dataset");
    rep->add_option("--target", ra.target, "table2 | table3 | table4 | fig1 | fig2 | fig3 | fig4")
        ->required()
        ->check(CLI::IsMember(drs::reproduce::targets()));
    rep->add_option("--seed", ra.seed, "Study seed")->capture_default_str();
    rep->add_option("--out", ra.out, "CSV path (default stdout)");
    rep->add_option("--svg", ra.svg, "Also write a minimal SVG plot (figure targets)");
    rep->add_option("--replicates", ra.replicates, "Replicates per cell")->capture_default_str()->check(
        CLI::Range(2, 100000000));
    rep->add_option("--workers", ra.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    rep->add_option("--delta-mode", ra.delta_mode, "oracle | candidate (figure targets)")
        ->capture_default_str()
        ->check(CLI::IsMember({"oracle", "candidate"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*est) return cmd_estimate(ea);
        if (*sim) return cmd_simulate(sa);
        if (*rep) return cmd_reproduce(ra);
    } catch (const drs::EstimationError& e) {
        std::cerr << "estimation error (" << drs::to_string(e.kind()) << "): " << e.what() << "\n";
        return kEstimation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mw/errors.hpp"
#include "mw/kernel.hpp"
#include "mw/report.hpp"

namespace {

using nlohmann::json;

struct CommonOpts {
    std::string config_path;
    std::string out_path;
    std::vector<std::string> plots;  // BLOCK:PATH
    int seed = -1;
    std::string resolution_ladder;
};

std::string resolve_out_path(const std::string& path) {
    if (path.empty() || std::filesystem::path(path).is_absolute()) return path;
    if (const char* dir = std::getenv("MATWEIGHT_OUT_DIR"))
        return (std::filesystem::path(dir) / path).string();
    return path;
}

void apply_overrides(json& doc, const CommonOpts& opts) {
    if (opts.seed >= 0) doc["seed"] = opts.seed;
    if (!opts.resolution_ladder.empty()) {
        // "1000,2000,4000": base grid count plus the ladder depth
        std::vector<int> counts;
        std::string item;
        std::istringstream ss(opts.resolution_ladder);
        while (std::getline(ss, item, ',')) counts.push_back(std::stoi(item));
        if (counts.empty()) throw mw::ConfigError("--resolution-ladder is empty");
        int dims = 1;
        if (doc.contains("domain") && doc["domain"].contains("dims")) {
            dims = 0;
            for (const auto& d : doc["domain"]["dims"]) dims += d.get<int>();
        }
        json grid = doc.contains("grid") ? doc["grid"] : json::object();
        json base = json::array();
        for (int i = 0; i < dims; ++i) base.push_back(counts[0]);
        grid["counts"] = base;
        grid["levels"] = static_cast<int>(counts.size());
        doc["grid"] = grid;
    }
}

int emit_report(const mw::Report& report, const CommonOpts& opts) {
    for (const auto& spec : opts.plots) {
        const auto pos = spec.find(':');
        if (pos == std::string::npos)
            throw mw::ConfigError("--plot expects BLOCK:PATH, got '" + spec + "'");
        mw::emit_plot_data(report, spec.substr(0, pos),
                           resolve_out_path(spec.substr(pos + 1)));
    }
    const std::string out = resolve_out_path(opts.out_path);
    if (out.empty()) {
        std::cout << report.dump() << "\n";
    } else {
        std::ofstream file(out);
        if (!file) throw mw::ConfigError("cannot open '" + out + "' for writing");
        file << report.dump() << "\n";
    }
    if (report.any_block_errored()) return 3;
    if (report.expectation_violated()) return 1;
    return 0;
}

int run_with_analyses(const CommonOpts& opts, const std::vector<std::string>& force) {
    std::ifstream in(opts.config_path);
    if (!in) throw mw::ConfigError("cannot open config file '" + opts.config_path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw mw::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    apply_overrides(doc, opts);
    if (!force.empty()) doc["analyses"] = force;
    const mw::RunConfig cfg = mw::parse_config(doc);
    return emit_report(mw::run(cfg), opts);
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_config) {
    auto* c = cmd->add_option("--config", opts.config_path, "run configuration (JSON)");
    if (needs_config) c->required();
    cmd->add_option("--seed", opts.seed, "override the config seed");
    cmd->add_option("--out", opts.out_path,
                    "report path (stdout if omitted; relative paths resolve under "
                    "MATWEIGHT_OUT_DIR)");
    cmd->add_option("--plot", opts.plots, "emit a block trace as CSV, format BLOCK:PATH");
    cmd->add_option("--resolution-ladder", opts.resolution_ladder,
                    "comma-separated grid counts, e.g. 512,1024,2048");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical probes for matrix Muckenhoupt weights"};
    app.require_subcommand(1);

    CommonOpts analyze_opts, proj_opts, suff_opts, rud_opts, probe_opts, repro_opts;

    auto* analyze = app.add_subcommand("analyze", "run the analyses requested in the config");
    add_common(analyze, analyze_opts, true);

    auto* projection = app.add_subcommand("projection", "projection-criterion analysis only");
    add_common(projection, proj_opts, true);

    auto* sufficient = app.add_subcommand("sufficient", "sufficient-condition check only");
    add_common(sufficient, suff_opts, true);

    auto* roudenko = app.add_subcommand("roudenko", "Roudenko constant estimate only");
    add_common(roudenko, rud_opts, true);

    auto* probe = app.add_subcommand("probe", "transform and kernel probes only");
    add_common(probe, probe_opts, true);

    auto* repro = app.add_subcommand("reproduce-example",
                                     "golden reproduction of the built-in example weight");
    add_common(repro, repro_opts, false);

    auto* catalog = app.add_subcommand("list-catalog", "list built-in weights and kernels");

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed()) return run_with_analyses(analyze_opts, {});
        if (projection->parsed()) return run_with_analyses(proj_opts, {"projection"});
        if (sufficient->parsed()) return run_with_analyses(suff_opts, {"sufficient"});
        if (roudenko->parsed()) return run_with_analyses(rud_opts, {"roudenko"});
        if (probe->parsed()) return run_with_analyses(probe_opts, {"transform", "kernel"});
        if (repro->parsed()) return emit_report(mw::reproduce_example(), repro_opts);
        if (catalog->parsed()) {
            std::cout << "weights:\n";
            for (const auto& entry : mw::weight_catalog())
                std::cout << "  " << entry.name << "  params: " << entry.params << "\n    "
                          << entry.description << "\n";
            std::cout << "kernels:\n";
            for (const auto& name : mw::kernel_catalog_names()) std::cout << "  " << name << "\n";
            return 0;
        }
    } catch (const mw::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const mw::Error& e) {
        std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

#include "mw/report.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mw/errors.hpp"
#include "mw/kernel.hpp"
#include "mw/numerics.hpp"
#include "mw/transform.hpp"

namespace mw {

using nlohmann::json;

namespace {

void require_object(const json& v, const std::string& ctx) {
    if (!v.is_object()) throw ConfigError("'" + ctx + "' must be an object");
}

void reject_unknown_keys(const json& obj, const std::string& ctx,
                         std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw ConfigError("unknown key '" + key + "' in '" + ctx + "'");
        (void)value;
    }
}

double number_or(const json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
    return obj[key].get<double>();
}

int int_or(const json& obj, const char* key, int fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer())
        throw ConfigError(std::string("'") + key + "' must be an integer");
    return obj[key].get<int>();
}

std::vector<int> int_vector(const json& v, const std::string& ctx) {
    if (!v.is_array() || v.empty()) throw ConfigError("'" + ctx + "' must be a non-empty array");
    std::vector<int> out;
    for (const auto& e : v) {
        if (!e.is_number_integer()) throw ConfigError("'" + ctx + "' must hold integers");
        out.push_back(e.get<int>());
    }
    return out;
}

DomainDescriptor parse_domain(const json& d) {
    require_object(d, "domain");
    reject_unknown_keys(d, "domain", {"kind", "dims", "window"});
    if (!d.contains("kind") || !d["kind"].is_string())
        throw ConfigError("'domain.kind' must be a string");
    const std::string kind = d["kind"].get<std::string>();
    std::vector<int> dims = d.contains("dims") ? int_vector(d["dims"], "domain.dims")
                                               : std::vector<int>{1};
    Window win;
    if (d.contains("window")) {
        if (!d["window"].is_array()) throw ConfigError("'domain.window' must be an array");
        for (const auto& pair : d["window"]) {
            if (!pair.is_array() || pair.size() != 2)
                throw ConfigError("'domain.window' entries must be [lo, hi] pairs");
            win.lo.push_back(pair[0].get<double>());
            win.hi.push_back(pair[1].get<double>());
        }
    }
    auto default_window = [](int total) {
        Window w;
        w.lo.assign(total, 0.0);
        w.hi.assign(total, 1.0);
        return w;
    };
    if (kind == "euclidean_line") {
        if (win.lo.empty()) win = default_window(dims.at(0));
        return DomainDescriptor::euclidean(dims.at(0), win);
    }
    if (kind == "torus") return DomainDescriptor::torus(dims.at(0));
    if (kind == "product_euclidean") {
        if (dims.size() != 2) throw ConfigError("'domain.dims' must be [m, n] for products");
        if (win.lo.empty()) win = default_window(dims[0] + dims[1]);
        return DomainDescriptor::product_euclidean(dims[0], dims[1], win);
    }
    if (kind == "product_torus") {
        if (dims.size() != 2) throw ConfigError("'domain.dims' must be [m, n] for products");
        return DomainDescriptor::product_torus(dims[0], dims[1]);
    }
    throw ConfigError("unknown 'domain.kind' value '" + kind + "'");
}

std::string verdict_string(EssSupVerdict v) {
    switch (v) {
        case EssSupVerdict::BoundedAtResolution: return "bounded_at_resolution";
        case EssSupVerdict::DivergenceSuspected: return "divergence_suspected";
        default: return "inconclusive";
    }
}

json trace_row(double x, double value, double resolution) {
    return json{{"x", x}, {"value", value}, {"resolution", resolution}};
}

json trend_json(const ConstantTrend& t) {
    return json{{"values", t.values},
                {"slope", t.slope},
                {"divergence_suspected", t.divergence},
                {"final", t.final_value()}};
}

json ess_sup_json(const EssSupEstimate& est) {
    json levels = json::array();
    for (const auto& lv : est.trace) {
        levels.push_back(json{{"level", lv.level},
                              {"grid_points", lv.grid_points},
                              {"skipped", lv.skipped},
                              {"min_distance", lv.min_distance},
                              {"max_value", lv.max_value}});
    }
    return json{{"b_hat", est.b_hat},
                {"verdict", verdict_string(est.verdict)},
                {"rate", est.rate},
                {"levels", levels}};
}

struct BlockTimer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         start)
            .count();
    }
};

}  // namespace

RunConfig parse_config(const json& doc) {
    require_object(doc, "config");
    if (auto err = validate_against_schema(doc, config_schema()))
        throw ConfigError("config schema: " + *err);
    reject_unknown_keys(doc, "config",
                        {"weight", "domain", "p", "family", "grid", "quadrature",
                         "sphere_count", "seed", "trend_levels", "analyses", "projection",
                         "slices", "transform", "kernel", "roudenko", "expect"});

    if (!doc.contains("weight")) throw ConfigError("'weight' is required");
    const json& wspec = doc["weight"];
    require_object(wspec, "weight");
    reject_unknown_keys(wspec, "weight", {"name", "params", "tabulated"});

    const double pval = number_or(doc, "p", 2.0);
    if (!(pval > 1.0)) throw ConfigError("'p' must lie in (1, infinity)");

    std::optional<DomainDescriptor> domain;
    if (doc.contains("domain")) domain = parse_domain(doc["domain"]);

    std::optional<MatrixWeight> weight;
    if (wspec.contains("tabulated")) {
        if (wspec.contains("name")) throw ConfigError("'weight' takes 'name' or 'tabulated'");
        weight = load_tabulated_weight(wspec["tabulated"].get<std::string>());
        if (!domain) domain = weight->domain();
    } else {
        if (!wspec.contains("name") || !wspec["name"].is_string())
            throw ConfigError("'weight.name' must be a string");
        if (!domain) {
            Window win;
            win.lo = {0.0};
            win.hi = {1.0};
            domain = DomainDescriptor::euclidean(1, win);
        }
        weight = catalog_weight(wspec["name"].get<std::string>(),
                                wspec.contains("params") ? wspec["params"] : json::object(),
                                *domain);
    }

    RunConfig cfg(*domain, *weight, LebesgueExponent(pval));
    cfg.echo = doc;
    cfg.seed = static_cast<std::uint64_t>(int_or(doc, "seed", 1));
    cfg.sphere_count = int_or(doc, "sphere_count", 512);
    cfg.trend_levels = int_or(doc, "trend_levels", 3);

    cfg.family.centers_per_axis.assign(cfg.domain.total_dim(), 3);
    cfg.family.r_min = 0.05;
    cfg.family.r_max = 0.4;
    cfg.family.radius_count = 4;
    if (doc.contains("family")) {
        const json& f = doc["family"];
        require_object(f, "family");
        reject_unknown_keys(f, "family",
                            {"centers_per_axis", "r_min", "r_max", "radius_count"});
        if (f.contains("centers_per_axis"))
            cfg.family.centers_per_axis = int_vector(f["centers_per_axis"],
                                                     "family.centers_per_axis");
        cfg.family.r_min = number_or(f, "r_min", cfg.family.r_min);
        cfg.family.r_max = number_or(f, "r_max", cfg.family.r_max);
        cfg.family.radius_count = int_or(f, "radius_count", cfg.family.radius_count);
    }

    cfg.grid.base.counts.assign(cfg.domain.total_dim(), 512);
    cfg.grid.base.grading_ratio = 1.01;
    cfg.grid.levels = 3;
    if (doc.contains("grid")) {
        const json& g = doc["grid"];
        require_object(g, "grid");
        reject_unknown_keys(g, "grid", {"counts", "grading_ratio", "levels"});
        if (g.contains("counts")) cfg.grid.base.counts = int_vector(g["counts"], "grid.counts");
        cfg.grid.base.grading_ratio = number_or(g, "grading_ratio", 1.01);
        cfg.grid.levels = int_or(g, "levels", 3);
    }
    if (static_cast<int>(cfg.grid.base.counts.size()) != cfg.domain.total_dim())
        throw ConfigError("'grid.counts' does not match the domain dimension");

    if (doc.contains("quadrature")) {
        const json& q = doc["quadrature"];
        require_object(q, "quadrature");
        reject_unknown_keys(q, "quadrature", {"points_per_axis", "grading_ratio"});
        cfg.quadrature.points_per_axis = int_or(q, "points_per_axis", 600);
        cfg.quadrature.grading_ratio = number_or(q, "grading_ratio", 1.01);
    }

    if (doc.contains("analyses")) {
        if (!doc["analyses"].is_array()) throw ConfigError("'analyses' must be an array");
        for (const auto& a : doc["analyses"]) {
            const std::string name = a.get<std::string>();
            static const std::vector<std::string> known = {"ap",     "roudenko",  "projection",
                                                           "sufficient", "slices", "transform",
                                                           "kernel", "example"};
            bool ok = false;
            for (const auto& k : known) ok = ok || k == name;
            if (!ok) throw ConfigError("unknown analysis '" + name + "'");
            cfg.analyses.push_back(name);
        }
    } else {
        cfg.analyses = {"roudenko"};
    }

    if (doc.contains("projection")) {
        require_object(doc["projection"], "projection");
        reject_unknown_keys(doc["projection"], "projection", {"direction", "k", "scalar"});
        cfg.projection = doc["projection"];
    }
    if (doc.contains("slices")) {
        require_object(doc["slices"], "slices");
        reject_unknown_keys(doc["slices"], "slices", {"axis", "count"});
        cfg.slices = doc["slices"];
    }
    if (doc.contains("transform")) {
        require_object(doc["transform"], "transform");
        reject_unknown_keys(doc["transform"], "transform",
                            {"op", "axis", "sizes", "trials", "iterations"});
        cfg.transform = doc["transform"];
    }
    if (doc.contains("kernel")) {
        require_object(doc["kernel"], "kernel");
        reject_unknown_keys(doc["kernel"], "kernel",
                            {"name", "eta", "grid_size", "eps_ladder", "n_ladder", "trials",
                             "iterations", "budget", "dyadic_min", "dyadic_max"});
        cfg.kernel = doc["kernel"];
    }
    if (doc.contains("roudenko")) {
        require_object(doc["roudenko"], "roudenko");
        reject_unknown_keys(doc["roudenko"], "roudenko", {"norm"});
        cfg.roudenko = doc["roudenko"];
    }
    if (doc.contains("expect")) {
        require_object(doc["expect"], "expect");
        reject_unknown_keys(doc["expect"], "expect",
                            {"ap", "roudenko", "projection", "transform", "sufficient"});
        cfg.expect = doc["expect"];
    }
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

const json* Report::find_block(const std::string& id) const {
    for (const auto& b : doc.at("blocks"))
        if (b.at("id").get<std::string>() == id) return &b;
    return nullptr;
}

bool Report::any_block_errored() const {
    for (const auto& b : doc.at("blocks"))
        if (b.at("status").get<std::string>() == "error") return true;
    return false;
}

bool Report::expectation_violated() const {
    for (const auto& b : doc.at("blocks"))
        if (b.contains("expectation_violated") && b["expectation_violated"].get<bool>())
            return true;
    return false;
}

// ---------------------------------------------------------------------------
// analysis runners

namespace {

void check_expectation(json& block, const json& expect, const std::string& key,
                       bool divergent) {
    if (!expect.contains(key)) return;
    const std::string want = expect[key].get<std::string>();
    const bool violated = (want == "bounded" && divergent) || (want == "divergent" && !divergent);
    block["expectation_violated"] = violated;
}

json run_ap_block(const RunConfig& cfg) {
    const ConstantTrend trend = ap_condition_trend(cfg.weight, cfg.p, cfg.family,
                                                   cfg.sphere_count, cfg.quadrature, cfg.seed,
                                                   cfg.trend_levels);
    const ApEstimate last = ap_condition_check(cfg.weight, cfg.p, cfg.family, cfg.sphere_count,
                                               cfg.quadrature, cfg.seed, 0);
    json values = trend_json(trend);
    values["argmax_set"] = last.argmax_set_desc;
    values["sphere_count"] = last.sphere_count;
    values["torus_radius_capped"] = last.torus_radius_capped;
    json block{{"values", values}, {"lower_bound", true}};
    json trace = json::array();
    for (std::size_t i = 0; i < trend.values.size(); ++i)
        trace.push_back(trace_row(double(i), trend.values[i],
                                  double(cfg.quadrature.points_per_axis << i)));
    block["trace"] = trace;
    return block;
}

json run_roudenko_block(const RunConfig& cfg) {
    MatrixNormKind norm = MatrixNormKind::Spectral;
    if (cfg.roudenko.is_object() && cfg.roudenko.contains("norm")) {
        const std::string name = cfg.roudenko["norm"].get<std::string>();
        if (name == "frobenius")
            norm = MatrixNormKind::Frobenius;
        else if (name != "spectral")
            throw ConfigError("'roudenko.norm' must be 'spectral' or 'frobenius'");
    }
    const ConstantTrend trend = roudenko_trend(cfg.weight, cfg.p, cfg.family, cfg.quadrature,
                                               cfg.trend_levels, norm);
    const RoudenkoEstimate last =
        roudenko_constant(cfg.weight, cfg.p, cfg.family, cfg.quadrature, norm);
    json values = trend_json(trend);
    values["matrix_norm"] =
        norm == MatrixNormKind::Spectral ? "spectral" : "frobenius";
    values["argmax_set"] = last.argmax_set_desc;
    values["points_per_axis"] = last.points_per_axis;
    values["torus_radius_capped"] = last.torus_radius_capped;
    json block{{"values", values}, {"lower_bound", true}};
    json trace = json::array();
    for (std::size_t i = 0; i < trend.values.size(); ++i)
        trace.push_back(trace_row(double(i), trend.values[i],
                                  double(cfg.quadrature.points_per_axis << i)));
    block["trace"] = trace;
    return block;
}

json run_projection_block(const RunConfig& cfg) {
    const std::string direction =
        cfg.projection.is_object() && cfg.projection.contains("direction")
            ? cfg.projection["direction"].get<std::string>()
            : "coordinate";
    const int k = cfg.projection.is_object() ? int_or(cfg.projection, "k", 1) - 1 : 0;
    const std::string scalar = cfg.projection.is_object() && cfg.projection.contains("scalar")
                                   ? cfg.projection["scalar"].get<std::string>()
                                   : "entry";

    EssSupEstimate est = [&]() {
        if (direction == "coordinate" && scalar == "entry")
            return coordinate_projection_bound(cfg.weight, cfg.p, k,
                                               CoordinateTarget::EntryOfW, cfg.grid);
        if (direction == "coordinate" && scalar == "power_entry")
            return coordinate_projection_bound(cfg.weight, cfg.p, k,
                                               CoordinateTarget::EntryOfPowerTarget, cfg.grid);
        const DirectionField r =
            direction == "eigen" ? eigenvector_direction(cfg.weight, k)
                                 : coordinate_direction(cfg.weight.dim(), k);
        const ScalarWeight w = scalar == "ones"
                                   ? constant_scalar_weight(cfg.weight.domain())
                                   : diagonal_entry_weight(cfg.weight, k);
        return projection_bound(cfg.weight, w, cfg.p, r, cfg.grid);
    }();

    json block{{"values", ess_sup_json(est)}};
    json trace = json::array();
    const double res = est.trace.empty() ? 0.0 : double(est.trace.back().grid_points);
    for (const auto& [x, g] : est.profile) trace.push_back(trace_row(x, g, res));
    block["trace"] = trace;
    return block;
}

json run_sufficient_block(const RunConfig& cfg) {
    const SufficiencyReport rep = sufficient_ap_check(cfg.weight, cfg.p, cfg.family, cfg.grid,
                                                      cfg.quadrature, cfg.trend_levels);
    json per_k = json::array();
    for (std::size_t k = 0; k < rep.condition_i.size(); ++k) {
        per_k.push_back(json{{"k", k + 1},
                             {"condition_i", ess_sup_json(rep.condition_i[k])},
                             {"condition_ii", trend_json(rep.condition_ii[k])}});
    }
    json values{{"verdict", rep.verdict == SufficiencyVerdict::SufficientConditionsHold
                                ? "sufficient_conditions_hold"
                                : "indeterminate"},
                {"per_coordinate", per_k},
                {"failed_checks", rep.failed_checks}};
    return json{{"values", values}};
}

json run_slices_block(const RunConfig& cfg) {
    const bool keep_x = !cfg.slices.is_object() ||
                        !cfg.slices.contains("axis") ||
                        cfg.slices["axis"].get<std::string>() == "x";
    const int count = cfg.slices.is_object() ? int_or(cfg.slices, "count", 10) : 10;

    SetFamilySpec factor_family = cfg.family;
    const auto factor = cfg.domain.factor(keep_x);
    factor_family.centers_per_axis.assign(factor.total_dim(),
                                          cfg.family.centers_per_axis.at(0));
    const SliceReport rep =
        uniform_slice_check(cfg.weight, cfg.p, keep_x, count, factor_family, cfg.quadrature);

    json per_slice = json::array();
    json trace = json::array();
    for (std::size_t i = 0; i < rep.per_slice.size(); ++i) {
        per_slice.push_back(json{{"frozen", rep.frozen_points[i]},
                                 {"value", rep.per_slice[i]}});
        trace.push_back(trace_row(rep.frozen_points[i].at(0), rep.per_slice[i],
                                  double(cfg.quadrature.points_per_axis)));
    }
    return json{{"values", json{{"per_slice", per_slice}, {"sup", rep.sup}}},
                {"trace", trace},
                {"lower_bound", true}};
}

json run_transform_block(const RunConfig& cfg) {
    if (!cfg.domain.is_torus())
        throw ConfigError("transform probes run on torus domains (periodic grids)");
    std::vector<int> sizes = {64, 128, 256};
    std::string opname = "hilbert";
    int axis = 1, trials = 8, iterations = 2000;
    if (cfg.transform.is_object()) {
        if (cfg.transform.contains("sizes"))
            sizes = int_vector(cfg.transform["sizes"], "transform.sizes");
        if (cfg.transform.contains("op")) opname = cfg.transform["op"].get<std::string>();
        axis = int_or(cfg.transform, "axis", 1);
        trials = int_or(cfg.transform, "trials", 8);
        iterations = int_or(cfg.transform, "iterations", 2000);
    }

    std::vector<double> norms;
    json trace = json::array();
    bool all_converged = true;
    for (int size : sizes) {
        std::vector<int> counts(cfg.domain.total_dim(), size);
        const PeriodicGrid grid = periodic_grid_for_weight(counts, cfg.weight,
                                                           cfg.domain.is_product()
                                                               ? cfg.domain.dim_x()
                                                               : 0);
        FourierMultiplierOp op = [&]() {
            if (opname == "hilbert") return hilbert_op(grid);
            if (opname == "riesz") return riesz_op(grid, axis - 1);
            if (opname == "partial_riesz_x") return partial_riesz_op(grid, true, axis - 1);
            if (opname == "partial_riesz_y") return partial_riesz_op(grid, false, axis - 1);
            throw ConfigError("unknown transform op '" + opname + "'");
        }();
        const NormEstimate est =
            weighted_operator_norm(op, cfg.weight, cfg.p, trials, iterations, cfg.seed);
        norms.push_back(est.value);
        all_converged = all_converged && est.converged;
        trace.push_back(trace_row(double(size), est.value, double(size)));
    }
    const double slope = log_level_slope(norms);
    json values{{"op", opname},
                {"sizes", sizes},
                {"norms", norms},
                {"slope", slope},
                {"divergence_suspected", norms.size() >= 3 && slope > 0.1},
                {"converged", all_converged}};
    return json{{"values", values}, {"trace", trace}, {"lower_bound", true}};
}

json run_kernel_block(const RunConfig& cfg) {
    std::string name = "product_hilbert";
    double eta = 1.0;
    int grid_size = 64, trials = 1, iterations = 400;
    std::vector<double> eps_ladder = {0.05, 0.0375, 0.028};
    std::vector<double> n_ladder = {0.11, 0.17, 0.26};
    KernelSweepSpec sweep;
    double budget = std::numeric_limits<double>::infinity();
    if (cfg.kernel.is_object()) {
        if (cfg.kernel.contains("name")) name = cfg.kernel["name"].get<std::string>();
        eta = number_or(cfg.kernel, "eta", 1.0);
        grid_size = int_or(cfg.kernel, "grid_size", 64);
        trials = int_or(cfg.kernel, "trials", 1);
        iterations = int_or(cfg.kernel, "iterations", 400);
        sweep.dyadic_min = int_or(cfg.kernel, "dyadic_min", sweep.dyadic_min);
        sweep.dyadic_max = int_or(cfg.kernel, "dyadic_max", sweep.dyadic_max);
        budget = number_or(cfg.kernel, "budget", budget);
        if (cfg.kernel.contains("eps_ladder")) {
            eps_ladder.clear();
            for (const auto& e : cfg.kernel["eps_ladder"]) eps_ladder.push_back(e.get<double>());
        }
        if (cfg.kernel.contains("n_ladder")) {
            n_ladder.clear();
            for (const auto& e : cfg.kernel["n_ladder"]) n_ladder.push_back(e.get<double>());
        }
    }
    const KernelRule kernel = kernel_catalog(name);
    const KernelConditionEstimate cond = kernel_condition_estimates(kernel, sweep, eta, budget);

    json values{{"kernel", name},
                {"eta", eta},
                {"c1", cond.c1},
                {"c2_bound", cond.c2_bound},
                {"c2_diff", cond.c2_diff},
                {"c3", cond.c3},
                {"c4", cond.c4},
                {"c5", cond.c5},
                {"pass", cond.pass}};

    if (kernel.m >= 1) {
        // lifted truncated operators on the product torus transplant
        const auto dom = DomainDescriptor::product_torus(kernel.n, kernel.m);
        const bool weight_matches = cfg.domain.is_product() && cfg.domain.is_torus() &&
                                    cfg.domain.dim_x() == kernel.n &&
                                    cfg.domain.dim_y() == kernel.m;
        const MatrixWeight w = weight_matches
                                   ? cfg.weight
                                   : catalog_weight("identity", json{{"n", 1}}, dom);
        std::vector<int> counts(kernel.n + kernel.m, grid_size);
        const PeriodicGrid grid = make_periodic_grid(counts, 0.0, kernel.n);
        const BoundednessSweep bs = uniform_boundedness_sweep(
            kernel, w, cfg.p, grid, eps_ladder, n_ladder, trials, iterations, cfg.seed);
        json entries = json::array();
        for (const auto& e : bs.entries)
            entries.push_back(json{{"eps", e.eps},
                                   {"N", e.big_n},
                                   {"norm", e.estimate.value},
                                   {"converged", e.estimate.converged}});
        values["sweep"] = json{{"entries", entries},
                               {"max_norm", bs.max_norm},
                               {"diagonal_trend_slope", bs.diagonal_trend_slope},
                               {"weight", w.name()}};
        const TruncationLimitProbe probe =
            truncation_limit_probe(kernel, eps_ladder, n_ladder.back(), sweep);
        values["truncation_limit_cauchy_difference"] = probe.max_cauchy_difference;
    }
    return json{{"values", values}, {"lower_bound", true}};
}

// golden blocks for the closed-form example weight
std::vector<std::pair<std::string, json>> run_example_blocks(const RunConfig& cfg) {
    std::vector<std::pair<std::string, json>> blocks;
    BlockTimer block_timer;
    auto stamp = [&blocks, &block_timer]() {
        blocks.back().second["wall_ms"] = block_timer.ms();
        block_timer = BlockTimer{};
    };
    Window win;
    win.lo = {0.0};
    win.hi = {1.0};
    const auto domain = DomainDescriptor::euclidean(1, win);
    const MatrixWeight w = catalog_weight("paper_example", json::object(), domain);

    // determinant: det W(x) = 1 on a graded grid
    {
        GridSpec spec;
        spec.counts = {1000};
        spec.axis_singular = {{0.0}};
        spec.grading_ratio = 1.004;
        const SampleGrid grid = build_grid(domain, spec);
        double worst = 0;
        for (const auto& t : grid.points) {
            const CMatrix v = w.evaluate(t).matrix();
            worst = std::max(worst,
                             std::abs(v(0, 0) * v(1, 1) - v(0, 1) * v(1, 0) - Complex(1, 0)));
        }
        blocks.emplace_back("det_check", json{{"values", json{{"samples", grid.size()},
                                                              {"max_abs_det_minus_1", worst}}}});
        stamp();
    }

    // w11 w11^(-1) = 1 + 1/x, not essentially bounded
    {
        GridSpec spec;
        spec.counts = {400};
        spec.axis_singular = {{0.0}};
        spec.grading_ratio = 1.02;
        const SampleGrid grid = build_grid(domain, spec);
        json trace = json::array();
        double worst_rel = 0;
        for (const auto& t : grid.points) {
            const double v = w.entry_of_power_at(t, 1.0, 0, 0).real() *
                             w.entry_of_power_at(t, -1.0, 0, 0).real();
            worst_rel = std::max(worst_rel,
                                 std::abs(v - (1.0 + 1.0 / t[0])) / (1.0 + 1.0 / t[0]));
            trace.push_back(trace_row(t[0], v, double(grid.size())));
        }
        GridLadder ladder;
        ladder.base.counts = {400};
        ladder.base.grading_ratio = 1.02;
        ladder.levels = 3;
        const EssSupEstimate est = coordinate_projection_bound(
            w, LebesgueExponent(2.0), 0, CoordinateTarget::EntryOfW, ladder);
        json values{{"max_rel_deviation_from_1_plus_inv_x", worst_rel},
                    {"criterion", ess_sup_json(est)},
                    {"squared_criterion_rate", 2.0 * est.rate}};
        blocks.emplace_back("w11_divergence", json{{"values", values}, {"trace", trace}});
        stamp();
    }

    // averaged product W_{a,b} W^{(-1)}_{a,b} against the closed form
    {
        QuadSpec q;
        q.points_per_axis = 9000;
        q.grading_ratio = 1.002;
        auto rng = seeded_rng(cfg.seed + 17);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        const int pairs = 40;
        double worst = 0;
        json trace = json::array();
        auto closed_form = [](double a, double b) {
            return (4.0 / 3.0) *
                   ((b - a) * (b - a) -
                    std::sqrt(a * b) * std::pow(std::sqrt(b) - std::sqrt(a), 2.0));
        };
        auto product_deviation = [&](double a, double b) {
            const AveragingSet e = make_ball(domain, {0.5 * (a + b)}, 0.5 * (b - a));
            const CMatrix prod = averaged_power(w, 1.0, e, q).matrix() *
                                 averaged_power(w, -1.0, e, q).matrix() *
                                 ((b - a) * (b - a));
            const double c = closed_form(a, b);
            return (prod - c * CMatrix::Identity(2, 2)).norm() / (c * std::sqrt(2.0));
        };
        for (int i = 0; i < pairs; ++i) {
            double a = (i % 3 == 0) ? 0.0 : uni(rng);
            double b = uni(rng);
            if (a > b) std::swap(a, b);
            if (b - a < 1e-3) b = std::min(1.0, a + 1e-3);
            const double dev = product_deviation(a, b);
            worst = std::max(worst, dev);
            trace.push_back(trace_row(a, dev, double(q.points_per_axis)));
        }
        const double pinned = product_deviation(0.25, 1.0);
        json values{{"pairs", pairs},
                    {"max_rel_deviation", worst},
                    {"pinned_pair_value", closed_form(0.25, 1.0)},
                    {"pinned_pair_rel_deviation", pinned}};
        blocks.emplace_back("averaged_product", json{{"values", values}, {"trace", trace}});
        stamp();
    }

    // Frobenius bound: (1/(b-a)) sqrt(tr(W_{a,b} W^{(-1)}_{a,b})) <= 2 sqrt2/sqrt3
    {
        QuadSpec q;
        q.points_per_axis = 9000;
        q.grading_ratio = 1.002;
        auto rng = seeded_rng(cfg.seed + 31);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        const double bound = 2.0 * std::sqrt(2.0) / std::sqrt(3.0);
        double worst = 0;
        for (int i = 0; i < 40; ++i) {
            double a = (i % 3 == 0) ? 0.0 : uni(rng);
            double b = uni(rng);
            if (a > b) std::swap(a, b);
            if (b - a < 1e-3) b = std::min(1.0, a + 1e-3);
            const AveragingSet e = make_ball(domain, {0.5 * (a + b)}, 0.5 * (b - a));
            const CMatrix prod = fractional_power(averaged_power(w, 1.0, e, q), 0.5).matrix() *
                                 fractional_power(averaged_power(w, -1.0, e, q), 0.5).matrix();
            worst = std::max(worst, prod.norm());
        }
        const AveragingSet full = make_ball(domain, {0.5}, 0.5);
        const CMatrix limit = fractional_power(averaged_power(w, 1.0, full, q), 0.5).matrix() *
                              fractional_power(averaged_power(w, -1.0, full, q), 0.5).matrix();
        json values{{"bound", bound},
                    {"max_value", worst},
                    {"within_bound", worst <= bound + 1e-6},
                    {"zero_anchored_full_value", limit.norm()},
                    {"zero_anchored_expected", std::sqrt(8.0 / 3.0)}};
        blocks.emplace_back("frobenius_bound", json{{"values", values}});
        stamp();
    }

    // the sufficient conditions fail while the weight is A_2
    {
        SetFamilySpec fam;
        fam.centers_per_axis = {3};
        fam.r_min = 0.05;
        fam.r_max = 0.45;
        fam.radius_count = 4;
        GridLadder ladder;
        ladder.base.counts = {512};
        ladder.base.grading_ratio = 1.01;
        ladder.levels = 3;
        QuadSpec q;
        q.points_per_axis = 800;
        q.grading_ratio = 1.005;
        const NonNecessityReport rep = non_necessity_demo(fam, ladder, q, 3);
        json per_k = json::array();
        for (std::size_t k = 0; k < rep.sufficiency.condition_i.size(); ++k)
            per_k.push_back(json{{"k", k + 1},
                                 {"condition_i", ess_sup_json(rep.sufficiency.condition_i[k])},
                                 {"condition_ii", trend_json(rep.sufficiency.condition_ii[k])}});
        json values{
            {"verdict", rep.sufficiency.verdict == SufficiencyVerdict::SufficientConditionsHold
                            ? "sufficient_conditions_hold"
                            : "indeterminate"},
            {"failed_checks", rep.sufficiency.failed_checks},
            {"per_coordinate", per_k},
            {"a2_values", rep.a2_values},
            {"a2_sup", rep.a2_sup},
            {"a2_bound", rep.bound},
            {"a2_within_bound", rep.within_bound}};
        blocks.emplace_back("non_necessity", json{{"values", values}});
        stamp();
    }
    return blocks;
}

json finish_block(json block, const std::string& id, const std::string& analysis, double ms) {
    block["id"] = id;
    block["analysis"] = analysis;
    block["status"] = "ok";
    if (!block.contains("wall_ms")) block["wall_ms"] = ms;
    return block;
}

json error_block(const std::string& id, const std::string& analysis, const std::string& code,
                 const std::string& message, double ms) {
    return json{{"id", id},
                {"analysis", analysis},
                {"status", "error"},
                {"error", json{{"code", code}, {"message", message}}},
                {"wall_ms", ms}};
}

}  // namespace

Report run(const RunConfig& cfg) {
    Report report;
    report.doc = json{{"tool", kToolName},
                      {"version", kToolVersion},
                      {"config", cfg.echo},
                      {"window_note",
                       cfg.domain.describe() +
                           "; suprema restricted to the computational window; randomized "
                           "constants are lower bounds at the stated resolution"},
                      {"blocks", json::array()}};
    for (const std::string& analysis : cfg.analyses) {
        BlockTimer timer;
        try {
            if (analysis == "example") {
                for (auto& [id, block] : run_example_blocks(cfg)) {
                    report.doc["blocks"].push_back(
                        finish_block(std::move(block), id, "example", timer.ms()));
                }
                continue;
            }
            json block;
            if (analysis == "ap") {
                block = run_ap_block(cfg);
                check_expectation(block, cfg.expect, "ap",
                                  block["values"]["divergence_suspected"].get<bool>());
            } else if (analysis == "roudenko") {
                block = run_roudenko_block(cfg);
                check_expectation(block, cfg.expect, "roudenko",
                                  block["values"]["divergence_suspected"].get<bool>());
            } else if (analysis == "projection") {
                block = run_projection_block(cfg);
                check_expectation(
                    block, cfg.expect, "projection",
                    block["values"]["verdict"].get<std::string>() == "divergence_suspected");
            } else if (analysis == "sufficient") {
                block = run_sufficient_block(cfg);
                check_expectation(block, cfg.expect, "sufficient",
                                  block["values"]["verdict"].get<std::string>() ==
                                      "indeterminate");
            } else if (analysis == "slices") {
                block = run_slices_block(cfg);
            } else if (analysis == "transform") {
                block = run_transform_block(cfg);
                check_expectation(block, cfg.expect, "transform",
                                  block["values"]["divergence_suspected"].get<bool>());
            } else if (analysis == "kernel") {
                block = run_kernel_block(cfg);
            }
            report.doc["blocks"].push_back(
                finish_block(std::move(block), analysis, analysis, timer.ms()));
        } catch (const Error& e) {
            report.doc["blocks"].push_back(
                error_block(analysis, analysis, e.code(), e.what(), timer.ms()));
        } catch (const std::exception& e) {
            report.doc["blocks"].push_back(
                error_block(analysis, analysis, "internal", e.what(), timer.ms()));
        }
    }
    return report;
}

Report reproduce_example() {
    json doc{{"weight", json{{"name", "paper_example"}}},
             {"domain", json{{"kind", "euclidean_line"}, {"dims", {1}},
                             {"window", {{0.0, 1.0}}}}},
             {"p", 2.0},
             {"seed", 20240},
             {"analyses", {"example"}}};
    return run(parse_config(doc));
}

void emit_plot_data(const Report& report, const std::string& block_id,
                    const std::string& path) {
    const json* block = report.find_block(block_id);
    if (!block) throw Error("missing_block", "report has no block '" + block_id + "'");
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << "x,value,resolution\n";
    if (!block->contains("trace")) return;
    out.precision(17);
    for (const auto& row : (*block)["trace"]) {
        out << row.at("x").get<double>() << "," << row.at("value").get<double>() << ","
            << row.at("resolution").get<double>() << "\n";
    }
}

// ---------------------------------------------------------------------------
// schema

std::optional<std::string> validate_against_schema(const json& instance, const json& schema) {
    auto type_ok = [](const json& v, const std::string& t) {
        if (t == "object") return v.is_object();
        if (t == "array") return v.is_array();
        if (t == "string") return v.is_string();
        if (t == "number") return v.is_number();
        if (t == "integer") return v.is_number_integer();
        if (t == "boolean") return v.is_boolean();
        if (t == "null") return v.is_null();
        return false;
    };

    if (schema.contains("type")) {
        const std::string t = schema["type"].get<std::string>();
        if (!type_ok(instance, t)) return "expected type '" + t + "'";
    }
    if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& e : schema["enum"]) ok = ok || e == instance;
        if (!ok) return "value not in enum";
    }
    if (instance.is_object()) {
        if (schema.contains("required")) {
            for (const auto& r : schema["required"])
                if (!instance.contains(r.get<std::string>()))
                    return "missing required key '" + r.get<std::string>() + "'";
        }
        const json props = schema.contains("properties") ? schema["properties"] : json::object();
        const bool allow_extra = !schema.contains("additionalProperties") ||
                                 schema["additionalProperties"] != json(false);
        for (const auto& [key, value] : instance.items()) {
            if (props.contains(key)) {
                if (auto err = validate_against_schema(value, props[key]))
                    return "'" + key + "': " + *err;
            } else if (!allow_extra) {
                return "unexpected key '" + key + "'";
            }
        }
    }
    if (instance.is_array() && schema.contains("items")) {
        for (std::size_t i = 0; i < instance.size(); ++i) {
            if (auto err = validate_against_schema(instance[i], schema["items"]))
                return "[" + std::to_string(i) + "]: " + *err;
        }
    }
    return std::nullopt;
}

json config_schema() {
    static const char* text = R"RAW(
{
  "type": "object",
  "required": ["weight"],
  "additionalProperties": false,
  "properties": {
    "weight": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "name": {"type": "string"},
        "params": {"type": "object"},
        "tabulated": {"type": "string"}
      }
    },
    "domain": {
      "type": "object",
      "additionalProperties": false,
      "required": ["kind"],
      "properties": {
        "kind": {"type": "string",
                 "enum": ["euclidean_line", "torus", "product_euclidean", "product_torus"]},
        "dims": {"type": "array", "items": {"type": "integer"}},
        "window": {"type": "array",
                   "items": {"type": "array", "items": {"type": "number"}}}
      }
    },
    "p": {"type": "number"},
    "family": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "centers_per_axis": {"type": "array", "items": {"type": "integer"}},
        "r_min": {"type": "number"},
        "r_max": {"type": "number"},
        "radius_count": {"type": "integer"}
      }
    },
    "grid": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "counts": {"type": "array", "items": {"type": "integer"}},
        "grading_ratio": {"type": "number"},
        "levels": {"type": "integer"}
      }
    },
    "quadrature": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "points_per_axis": {"type": "integer"},
        "grading_ratio": {"type": "number"}
      }
    },
    "sphere_count": {"type": "integer"},
    "seed": {"type": "integer"},
    "trend_levels": {"type": "integer"},
    "analyses": {"type": "array",
                 "items": {"type": "string",
                           "enum": ["ap", "roudenko", "projection", "sufficient", "slices",
                                    "transform", "kernel", "example"]}},
    "projection": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "direction": {"type": "string", "enum": ["coordinate", "eigen"]},
        "k": {"type": "integer"},
        "scalar": {"type": "string", "enum": ["ones", "entry", "power_entry"]}
      }
    },
    "slices": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "axis": {"type": "string", "enum": ["x", "y"]},
        "count": {"type": "integer"}
      }
    },
    "transform": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "op": {"type": "string",
               "enum": ["hilbert", "riesz", "partial_riesz_x", "partial_riesz_y"]},
        "axis": {"type": "integer"},
        "sizes": {"type": "array", "items": {"type": "integer"}},
        "trials": {"type": "integer"},
        "iterations": {"type": "integer"}
      }
    },
    "kernel": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "name": {"type": "string"},
        "eta": {"type": "number"},
        "grid_size": {"type": "integer"},
        "eps_ladder": {"type": "array", "items": {"type": "number"}},
        "n_ladder": {"type": "array", "items": {"type": "number"}},
        "trials": {"type": "integer"},
        "iterations": {"type": "integer"},
        "budget": {"type": "number"},
        "dyadic_min": {"type": "integer"},
        "dyadic_max": {"type": "integer"}
      }
    },
    "roudenko": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "norm": {"type": "string", "enum": ["spectral", "frobenius"]}
      }
    },
    "expect": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "ap": {"type": "string", "enum": ["bounded", "divergent"]},
        "roudenko": {"type": "string", "enum": ["bounded", "divergent"]},
        "projection": {"type": "string", "enum": ["bounded", "divergent"]},
        "transform": {"type": "string", "enum": ["bounded", "divergent"]},
        "sufficient": {"type": "string", "enum": ["bounded", "divergent"]}
      }
    }
  }
}
)RAW";
    return json::parse(text);
}

json report_schema() {
    static const char* text = R"RAW(
{
  "type": "object",
  "required": ["tool", "version", "config", "blocks"],
  "additionalProperties": false,
  "properties": {
    "tool": {"type": "string", "enum": ["matweight"]},
    "version": {"type": "string"},
    "config": {"type": "object"},
    "window_note": {"type": "string"},
    "blocks": {
      "type": "array",
      "items": {
        "type": "object",
        "required": ["id", "analysis", "status", "wall_ms"],
        "additionalProperties": false,
        "properties": {
          "id": {"type": "string"},
          "analysis": {"type": "string"},
          "status": {"type": "string", "enum": ["ok", "error"]},
          "wall_ms": {"type": "number"},
          "error": {
            "type": "object",
            "required": ["code", "message"],
            "additionalProperties": false,
            "properties": {
              "code": {"type": "string"},
              "message": {"type": "string"}
            }
          },
          "values": {"type": "object"},
          "trace": {
            "type": "array",
            "items": {
              "type": "object",
              "required": ["x", "value", "resolution"],
              "additionalProperties": false,
              "properties": {
                "x": {"type": "number"},
                "value": {"type": "number"},
                "resolution": {"type": "number"}
              }
            }
          },
          "lower_bound": {"type": "boolean"},
          "expectation_violated": {"type": "boolean"}
        }
      }
    }
  }
}
)RAW";
    return json::parse(text);
}

}  // namespace mw

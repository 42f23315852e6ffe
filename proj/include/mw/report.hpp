#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mw/ap_metrics.hpp"
#include "mw/domain.hpp"
#include "mw/projection.hpp"
#include "mw/sufficiency.hpp"
#include "mw/weight.hpp"

namespace mw {

inline constexpr const char* kToolName = "matweight";
inline constexpr const char* kToolVersion = "0.1.0";

/// Parsed and validated run configuration. Unknown keys anywhere in the
/// document are rejected.
struct RunConfig {
    RunConfig(DomainDescriptor d, MatrixWeight w, LebesgueExponent exponent)
        : domain(std::move(d)), weight(std::move(w)), p(exponent) {}

    nlohmann::json echo;  // the validated document

    DomainDescriptor domain;
    MatrixWeight weight;
    LebesgueExponent p;
    SetFamilySpec family;
    GridLadder grid;
    QuadSpec quadrature;
    int sphere_count = 512;
    std::uint64_t seed = 1;
    int trend_levels = 3;
    std::vector<std::string> analyses;
    nlohmann::json projection;  // per-analysis sub-configs (validated)
    nlohmann::json slices;
    nlohmann::json transform;
    nlohmann::json kernel;
    nlohmann::json roudenko;
    nlohmann::json expect;
};

/// Parses a config document; throws ConfigError naming the offending field.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_file(const std::string& path);

/// A full run report: config echo plus one result block per analysis.
/// Serialization is deterministic except for the wall_ms fields.
struct Report {
    nlohmann::json doc;

    std::string dump(int indent = 2) const { return doc.dump(indent); }
    const nlohmann::json& blocks() const { return doc.at("blocks"); }
    const nlohmann::json* find_block(const std::string& id) const;
    bool any_block_errored() const;
    bool expectation_violated() const;
};

/// Executes the requested analyses in declared order.
Report run(const RunConfig& config);

/// The built-in golden reproduction of the closed-form example weight.
Report reproduce_example();

/// Writes a block's trace as column text: "x,value,resolution".
void emit_plot_data(const Report& report, const std::string& block_id,
                    const std::string& path);

/// Minimal structural JSON-schema validation (type / required / properties /
/// items / enum / additionalProperties). Returns the first violation or
/// nullopt when the instance validates.
std::optional<std::string> validate_against_schema(const nlohmann::json& instance,
                                                   const nlohmann::json& schema);

/// The published report schema (shipped at docs/report.schema.json).
nlohmann::json report_schema();

/// The published config schema (shipped at docs/config.schema.json).
nlohmann::json config_schema();

}  // namespace mw

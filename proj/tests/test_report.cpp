#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "mw/errors.hpp"
#include "mw/report.hpp"

using namespace mw;
using nlohmann::json;

namespace {

json small_config(std::vector<std::string> analyses) {
    return json{{"weight", json{{"name", "identity"}, {"params", json{{"n", 2}}}}},
                {"domain", json{{"kind", "euclidean_line"}, {"dims", {1}},
                                {"window", {{0.0, 1.0}}}}},
                {"p", 2.0},
                {"family", json{{"centers_per_axis", {2}},
                                {"r_min", 0.1},
                                {"r_max", 0.3},
                                {"radius_count", 2}}},
                {"grid", json{{"counts", {64}}, {"levels", 3}}},
                {"quadrature", json{{"points_per_axis", 60}}},
                {"sphere_count", 64},
                {"seed", 7},
                {"analyses", analyses}};
}

json strip_wall_ms(json doc) {
    for (auto& b : doc["blocks"]) b.erase("wall_ms");
    return doc;
}

}  // namespace

TEST_CASE("parse_config: unknown keys are rejected with the field name") {
    json doc = small_config({"roudenko"});
    doc["typo_field"] = 1;
    try {
        parse_config(doc);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("typo_field") != std::string::npos);
    }

    json doc2 = small_config({"roudenko"});
    doc2["family"]["radius"] = 0.1;
    CHECK_THROWS_AS(parse_config(doc2), ConfigError);

    json doc3 = small_config({"roudenko"});
    doc3["weight"]["name"] = "no_such_weight";
    CHECK_THROWS_AS(parse_config(doc3), ConfigError);

    json doc4 = small_config({"no_such_analysis"});
    CHECK_THROWS_AS(parse_config(doc4), ConfigError);
}

TEST_CASE("run: identity weight roudenko block and determinism") {
    const RunConfig cfg = parse_config(small_config({"roudenko", "ap"}));
    const Report a = run(cfg);
    const Report b = run(cfg);
    CHECK(strip_wall_ms(a.doc) == strip_wall_ms(b.doc));
    CHECK_FALSE(a.any_block_errored());

    const json* rud = a.find_block("roudenko");
    REQUIRE(rud != nullptr);
    CHECK((*rud)["status"] == "ok");
    for (const auto& v : (*rud)["values"]["values"])
        CHECK(v.get<double>() == doctest::Approx(1.0).epsilon(1e-9));

    const json* ap = a.find_block("ap");
    REQUIRE(ap != nullptr);
    CHECK((*ap)["values"]["final"].get<double>() == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("run: expectation flags drive the divergence contract") {
    json doc = small_config({"roudenko"});
    doc["weight"] = json{{"name", "diag_power"}, {"params", json{{"alpha", {3.0}}}}};
    doc["expect"] = json{{"roudenko", "bounded"}};
    const Report rep = run(parse_config(doc));
    CHECK(rep.expectation_violated());

    json doc2 = small_config({"roudenko"});
    doc2["expect"] = json{{"roudenko", "bounded"}};
    const Report rep2 = run(parse_config(doc2));
    CHECK_FALSE(rep2.expectation_violated());
}

TEST_CASE("run: module errors are captured as blocks, not thrown") {
    json doc = small_config({"transform"});  // transform on a euclidean domain: config misuse
    const Report rep = run(parse_config(doc));
    const json* block = rep.find_block("transform");
    REQUIRE(block != nullptr);
    CHECK((*block)["status"] == "error");
    CHECK((*block)["error"]["code"] == "config");
    CHECK(rep.any_block_errored());
}

TEST_CASE("report validates against the published schema") {
    const Report rep = run(parse_config(small_config({"roudenko", "sufficient"})));
    const auto err = validate_against_schema(rep.doc, report_schema());
    if (err) FAIL(*err);

    // the shipped schema file matches the embedded one
    std::ifstream in(std::string(MW_SOURCE_DIR) + "/docs/report.schema.json");
    REQUIRE(in.good());
    json file_schema;
    in >> file_schema;
    CHECK(file_schema == report_schema());

    // and the validator itself rejects structural breakage
    json broken = rep.doc;
    broken["blocks"][0].erase("status");
    CHECK(validate_against_schema(broken, report_schema()).has_value());
    json extra = rep.doc;
    extra["blocks"][0]["unexpected"] = 1;
    CHECK(validate_against_schema(extra, report_schema()).has_value());
}

TEST_CASE("reproduce_example: golden blocks") {
    const Report rep = reproduce_example();
    CHECK_FALSE(rep.any_block_errored());
    const auto err = validate_against_schema(rep.doc, report_schema());
    if (err) FAIL(*err);

    const json* det = rep.find_block("det_check");
    REQUIRE(det != nullptr);
    CHECK((*det)["values"]["max_abs_det_minus_1"].get<double>() <= 1e-10);

    const json* w11 = rep.find_block("w11_divergence");
    REQUIRE(w11 != nullptr);
    CHECK((*w11)["values"]["max_rel_deviation_from_1_plus_inv_x"].get<double>() <= 1e-9);
    CHECK((*w11)["values"]["criterion"]["verdict"] == "divergence_suspected");

    const json* prod = rep.find_block("averaged_product");
    REQUIRE(prod != nullptr);
    CHECK((*prod)["values"]["max_rel_deviation"].get<double>() <= 1e-6);
    // (4/3) ((0.75)^2 - 0.5 (0.5)^2) at the pinned pair (0.25, 1)
    CHECK((*prod)["values"]["pinned_pair_value"].get<double>() ==
          doctest::Approx((4.0 / 3.0) * 0.4375).epsilon(1e-12));

    const json* frob = rep.find_block("frobenius_bound");
    REQUIRE(frob != nullptr);
    CHECK((*frob)["values"]["within_bound"].get<bool>());
    CHECK((*frob)["values"]["zero_anchored_full_value"].get<double>() ==
          doctest::Approx(std::sqrt(8.0 / 3.0)).epsilon(1e-5));

    const json* nn = rep.find_block("non_necessity");
    REQUIRE(nn != nullptr);
    CHECK((*nn)["values"]["verdict"] == "indeterminate");
    CHECK((*nn)["values"]["a2_within_bound"].get<bool>());
}

TEST_CASE("emit_plot_data: trace columns and the missing-block error") {
    const Report rep = run(parse_config(small_config({"roudenko"})));
    const std::string path = "test_plot_trace.csv";
    emit_plot_data(rep, "roudenko", path);
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(header == "x,value,resolution");
    int rows = 0;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == 3);  // one row per refinement level
    std::remove(path.c_str());

    CHECK_THROWS_AS(emit_plot_data(rep, "no_such_block", path), Error);

    // a block without a trace yields a header-only file
    const Report ex = reproduce_example();
    emit_plot_data(ex, "det_check", path);
    std::ifstream headeronly(path);
    std::string first;
    std::getline(headeronly, first);
    CHECK(first == "x,value,resolution");
    std::string rest;
    CHECK_FALSE(static_cast<bool>(std::getline(headeronly, rest)));
    std::remove(path.c_str());
}

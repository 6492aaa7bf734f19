#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "flagmult/suite.hpp"

using namespace flagmult;

namespace {

ConfigError config_error(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e;
    }
    FAIL("no ConfigError for: " << text);
    return ConfigError("", 0, 0);
}

int count_lines(const std::string& s) {
    int n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

}  // namespace

TEST_CASE("config defaults and overrides") {
    const auto d = parse_config("");
    CHECK(d.grid_n == 256);
    CHECK(d.seed == 1);
    CHECK(d.plan == PlanKind::Separable);
    CHECK(d.plain.r == doctest::Approx(4.0 / 3.0));
    CHECK(d.mixed.mixed);

    const auto c = parse_config(R"(
# comment line
seed = 9
[grid]
n = 128      # trailing comment
l2 = 3/2
[exponents]
plain = 3, 3, 3, 1
mixed = 4, 4, 4, 4, 4, 4/3
[family]
kind = random
f = 1, 3
endpoint.resolutions = 64, 128
[plan]
kind = lowrank
)");
    CHECK(c.seed == 9);
    CHECK(c.grid_n == 128);
    CHECK(c.L2 == 1.5);
    CHECK(c.plain.p1 == 3.0);
    CHECK(c.plain.r == 1.0);
    CHECK(c.mixed.q3 == 4.0);
    CHECK(c.family.kind == FamilyKind::Random);
    CHECK(c.family.f.lo == 1);
    CHECK(c.family.f.hi == 3);
    // a dotted key inside a section is taken as written
    CHECK(c.endpoint_resolutions == std::vector<int>{64, 128});
    CHECK(c.plan == PlanKind::LowRankDyadic);

    // base config is kept for keys not mentioned
    ExperimentConfig base;
    base.epsilon = 0.1;
    CHECK(parse_config("seed = 2", base).epsilon == 0.1);
}

TEST_CASE("config errors carry line and column") {
    auto e = config_error("seed = 1\n  grid.size = 4\n");
    CHECK(e.line == 2);
    CHECK(e.column == 3);

    e = config_error("[grid]\nn = abc\n");
    CHECK(e.line == 2);
    CHECK(e.column == 5);

    e = config_error("exponents.plain = 4, 4, x, 4/3\n");
    CHECK(e.line == 1);
    CHECK(e.column == 25);

    e = config_error("\n\njust text\n");
    CHECK(e.line == 3);
    CHECK(e.column == 1);

    e = config_error("[grid\n");
    CHECK(e.line == 1);

    e = config_error("grid.n = 7\n");
    CHECK(e.column == 10);

    e = config_error("exponents.plain = 4, 4, 4\n");
    CHECK(e.line == 1);

    e = config_error("grid.l1 = 1/0\n");
    CHECK(e.column == 11);

    CHECK_THROWS_AS(parse_config("plan.kind = quantum"), ConfigError);
    CHECK_THROWS_AS(parse_config("tolerance.scale = -1"), ConfigError);
    CHECK_THROWS_AS(parse_config("family.g = 2, 1"), ConfigError);
}

TEST_CASE("Hoelder relation is validated at parse time") {
    CHECK_THROWS_AS(parse_config("exponents.plain = 4, 4, 4, 1"), HolderError);
    CHECK_THROWS_AS(parse_config("exponents.holder = 2, 2, 2, 1"), HolderError);
    CHECK_THROWS_AS(parse_config("exponents.mixed = 4, 3, 6, 6, 3, 1"), HolderError);
    CHECK_THROWS_AS(parse_config("exponents.plain = 0.5, 4, 4, 1/3"), InvalidExponent);
    try {
        parse_config("\n[exponents]\nplain = 4, 4, 4, 1\n");
        FAIL("expected HolderError");
    } catch (const HolderError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    // 1/r = 1/4 + 1/4 + 1/4
    CHECK_NOTHROW(parse_config("exponents.plain = 4, 4, 4, 4/3"));
}

TEST_CASE("config file loading") {
    CHECK_THROWS_AS(load_config("/nonexistent/flagmult.conf"), InvalidInput);
}

TEST_CASE("number formatting") {
    CHECK(format17(0.1) == "0.10000000000000001");
    CHECK(format17(1.0) == "1");
    CHECK(format17(std::nan("")) == "nan");
    CHECK(format17(-INFINITY) == "-inf");
    CHECK(std::stod(format17(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("unknown check names") {
    CHECK_THROWS_AS(run_check("nope", ExperimentConfig{}), InvalidInput);
    const auto names = check_names();
    for (const auto& v : verify_checks()) CHECK(std::find(names.begin(), names.end(), v) != names.end());
    CHECK(names.size() == 11);
}

TEST_CASE("verify JSON is deterministic and carries a summary") {
    ExperimentConfig cfg;
    const std::vector<CheckResult> a{run_check("generators", cfg)};
    const std::vector<CheckResult> b{run_check("generators", cfg)};
    CHECK(a[0].pass);
    const std::string ja = verify_json(cfg, a);
    CHECK(ja == verify_json(cfg, b));
    CHECK(ja.find("runtime") == std::string::npos);

    const auto rows = merge_reports({ja}, {"verify.json"});
    REQUIRE(rows.size() == a[0].metrics.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].source == "verify.json");
        CHECK(rows[i].check == "generators");
        CHECK(rows[i].metric == a[0].metrics[i].name);
        CHECK(rows[i].status == "PASS");
        CHECK(rows[i].value == a[0].metrics[i].value);  // exact round trip
    }
    CHECK_THROWS_AS(merge_reports({"{not json"}, {"x"}), InvalidInput);
    CHECK_THROWS_AS(merge_reports({"{\"a\": 1}"}, {"x"}), InvalidInput);

    // a failing metric propagates
    CheckResult bad{"made_up", {{"m", 2.0, 1.0, "<=", false}}, "", false, 0.0};
    const std::string jb = verify_json(cfg, {bad});
    CHECK(jb.find("\"pass\": false") != std::string::npos);
    const auto txt = report_text(merge_reports({jb}, {"v"}));
    CHECK(txt.find("FAIL") != std::string::npos);
    CHECK(txt.find("0 passed, 1 failed") != std::string::npos);
    const auto csv = report_csv(merge_reports({ja, jb}, {"a", "b"}));
    CHECK(count_lines(csv) == int(rows.size()) + 2);
}

TEST_CASE("endpoint and scan tables") {
    ExperimentConfig cfg;
    cfg.endpoint_resolutions = {64, 128, 256};
    const auto g = run_endpoint(cfg);
    const std::string csv = endpoint_csv(g);
    CHECK(count_lines(csv) == 4);
    CHECK(csv.rfind("N,ratio,control\n", 0) == 0);
    CHECK(g.increasing);
    CHECK(endpoint_json(cfg, g) == endpoint_json(cfg, run_endpoint(cfg)));

    cfg.grid_n = 64;
    cfg.family.octaves = 2;
    cfg.family.translations = 1;
    cfg.family.f = {2, 3};
    cfg.weight = "power";
    const auto runs = run_scans(cfg);
    REQUIRE(runs.size() == 4);
    CHECK(runs[2].weighted);
    std::size_t members = 0;
    for (const auto& r : runs) members += r.report.members.size();
    CHECK(members > 0);
    const std::string sc = scan_csv(runs);
    CHECK(sc.rfind("run,member_id,dilation,translation,ratio,norm_f,norm_g,norm_h,norm_out\n", 0) == 0);
    CHECK(count_lines(sc) == int(members) + 1);
    CHECK(scan_json(cfg, runs).find("\"summary\"") != std::string::npos);
}

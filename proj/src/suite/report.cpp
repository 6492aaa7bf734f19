#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "flagmult/suite.hpp"

namespace flagmult {
namespace {

using json = nlohmann::ordered_json;

// NaN and infinities become null
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double from_num(const json& j) {
    return j.is_number() ? j.get<double>() : std::numeric_limits<double>::quiet_NaN();
}

json tuple_json(const ExponentTuple& e) {
    json j;
    j["p1"] = num(e.p1);
    j["p2"] = num(e.p2);
    if (e.mixed) j["q2"] = num(e.q2);
    j["p3"] = num(e.p3);
    if (e.mixed) j["q3"] = num(e.q3);
    j["r"] = num(e.r);
    j["mixed"] = e.mixed;
    return j;
}

json config_json(const ExperimentConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["grid"] = {{"n", c.grid_n}, {"l1", num(c.L1)}, {"l2", num(c.L2)}};
    j["generators"] = {{"epsilon", num(c.epsilon)}, {"sharpness", num(c.sharpness)}, {"gap", c.gap}};
    j["plan"] = {{"kind", to_string(c.plan)}, {"rank_cap", c.rank_cap}, {"tol", num(c.plan_tol)}};
    j["symbol"] = {{"flag", c.scan_symbol}, {"shift", c.scan_shift}};
    j["exponents"] = {{"plain", tuple_json(c.plain)}, {"mixed", tuple_json(c.mixed)}, {"holder", tuple_json(c.holder)}};
    j["family"] = {{"kind", to_string(c.family.kind)},
                   {"octaves", c.family.octaves},
                   {"translations", c.family.translations},
                   {"seed", c.family.seed},
                   {"f", {c.family.f.lo, c.family.f.hi}},
                   {"g", {c.family.g.lo, c.family.g.hi}},
                   {"h", {c.family.h.lo, c.family.h.hi}}};
    j["weight"] = {{"kind", c.weight},
                   {"a1", num(c.weight_a1)},
                   {"a2", num(c.weight_a2)},
                   {"x1", num(c.weight_x1)},
                   {"x2", num(c.weight_x2)}};
    j["endpoint"] = {{"resolutions", c.endpoint_resolutions}, {"shift", c.endpoint_shift}, {"a", num(c.endpoint_a)}};
    j["leibniz"] = {{"alpha", {num(c.alpha[0]), num(c.alpha[1])}},
                    {"beta", {num(c.beta[0]), num(c.beta[1])}},
                    {"gap", c.leibniz_gap},
                    {"exponents", tuple_json(c.leibniz_exponents)},
                    {"kmax", c.leibniz_kmax}};
    j["tolerance_scale"] = num(c.tolerance_scale);
    return j;
}

json summary_row(const std::string& check, const std::string& metric, double value, double tol,
                 const std::string& relation, const std::string& status) {
    return {{"check", check},     {"metric", metric},     {"value", num(value)},
            {"tolerance", num(tol)}, {"relation", relation}, {"status", status}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

}  // namespace

std::string format17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string verify_json(const ExperimentConfig& cfg, const std::vector<CheckResult>& results) {
    json doc;
    doc["kind"] = "verify";
    doc["config"] = config_json(cfg);
    json checks = json::array(), summary = json::array();
    bool all = !results.empty();
    for (const auto& r : results) {
        json ms = json::array();
        for (const auto& m : r.metrics) {
            ms.push_back({{"name", m.name},
                          {"value", num(m.value)},
                          {"tolerance", num(m.tolerance)},
                          {"relation", m.relation},
                          {"pass", m.pass}});
            summary.push_back(summary_row(r.name, m.name, m.value, m.tolerance, m.relation, m.pass ? "PASS" : "FAIL"));
        }
        json c = {{"name", r.name}, {"pass", r.pass}, {"metrics", ms}};
        if (!r.note.empty()) c["note"] = r.note;
        checks.push_back(c);
        all = all && r.pass;
    }
    doc["checks"] = checks;
    doc["summary"] = summary;
    doc["pass"] = all;
    return dump(doc);
}

std::string scan_csv(const std::vector<ScanRun>& runs) {
    std::ostringstream os;
    os << "run,member_id,dilation,translation,ratio,norm_f,norm_g,norm_h,norm_out\n";
    for (const auto& run : runs)
        for (const auto& m : run.report.members)
            os << run.label << ',' << m.id << ',' << m.octave << ',' << m.translation << ',' << format17(m.ratio) << ','
               << format17(m.nf) << ',' << format17(m.ng) << ',' << format17(m.nh) << ',' << format17(m.nout) << '\n';
    return os.str();
}

std::string scan_json(const ExperimentConfig& cfg, const std::vector<ScanRun>& runs) {
    json doc;
    doc["kind"] = "scan";
    doc["config"] = config_json(cfg);
    json js = json::array(), summary = json::array();
    for (const auto& run : runs) {
        json members = json::array();
        for (const auto& m : run.report.members)
            members.push_back({{"id", m.id},
                               {"dilation", m.octave},
                               {"translation", m.translation},
                               {"ratio", num(m.ratio)},
                               {"norm_f", num(m.nf)},
                               {"norm_g", num(m.ng)},
                               {"norm_h", num(m.nh)},
                               {"norm_out", num(m.nout)}});
        js.push_back({{"label", run.label},
                      {"exponents", tuple_json(run.ex)},
                      {"weighted", run.weighted},
                      {"quasi_banach", run.report.quasi},
                      {"max", num(run.report.max)},
                      {"min", num(run.report.min)},
                      {"flatness", num(run.report.flatness)},
                      {"members", members}});
        summary.push_back(summary_row("scan_" + run.label, "max_ratio", run.report.max, 0.0, "", "INFO"));
        summary.push_back(summary_row("scan_" + run.label, "flatness", run.report.flatness, 0.0, "", "INFO"));
    }
    doc["runs"] = js;
    doc["summary"] = summary;
    return dump(doc);
}

std::string endpoint_csv(const GrowthReport& r) {
    std::ostringstream os;
    os << "N,ratio,control\n";
    for (const auto& row : r.rows) os << row.N << ',' << format17(row.ratio) << ',' << format17(row.control) << '\n';
    return os.str();
}

std::string endpoint_json(const ExperimentConfig& cfg, const GrowthReport& r) {
    json doc;
    doc["kind"] = "endpoint";
    doc["config"] = config_json(cfg);
    json rows = json::array();
    for (const auto& row : r.rows) rows.push_back({{"N", row.N}, {"ratio", num(row.ratio)}, {"control", num(row.control)}});
    doc["rows"] = rows;
    doc["increasing"] = r.increasing;
    doc["control_flatness"] = num(r.control_flatness);
    doc["constant_ratio"] = num(r.constant_ratio);
    doc["summary"] = json::array(
        {summary_row("endpoint_probe", "increasing", r.increasing ? 1.0 : 0.0, 1.0, ">=", r.increasing ? "PASS" : "FAIL"),
         summary_row("endpoint_probe", "control_flatness", r.control_flatness, 0.0, "", "INFO")});
    return dump(doc);
}

std::string leibniz_csv(const LeibnizResult& r) {
    std::ostringstream os;
    os << "label,df1,df2,dg1,dg2,dh1,dh2,terms,term_norm,product\n";
    for (const auto& l : r.labels)
        os << l.label << ',' << format17(l.df[0]) << ',' << format17(l.df[1]) << ',' << format17(l.dg[0]) << ','
           << format17(l.dg[1]) << ',' << format17(l.dh[0]) << ',' << format17(l.dh[1]) << ',' << l.terms << ','
           << format17(l.term_norm) << ',' << format17(l.product) << '\n';
    // last row: the left-hand side D^a (f D^b (g h)), L2 norm
    os << "lhs,,,,,,,," << format17(l2_norm(r.lhs)) << ",\n";
    return os.str();
}

std::string leibniz_json(const ExperimentConfig& cfg, const LeibnizResult& r) {
    json doc;
    doc["kind"] = "leibniz";
    doc["config"] = config_json(cfg);
    json labels = json::array(), terms = json::array();
    for (const auto& l : r.labels)
        labels.push_back({{"label", l.label},
                          {"df", {num(l.df[0]), num(l.df[1])}},
                          {"dg", {num(l.dg[0]), num(l.dg[1])}},
                          {"dh", {num(l.dh[0]), num(l.dh[1])}},
                          {"terms", l.terms},
                          {"term_norm", num(l.term_norm)},
                          {"product", num(l.product)}});
    for (const auto& t : r.terms)
        terms.push_back({{"region1", t.region1},
                         {"region2", t.region2},
                         {"label", t.label},
                         {"shape", t.shape},
                         {"norm_l2", num(l2_norm(t.out))}});
    doc["labels"] = labels;
    doc["terms"] = terms;
    doc["lhs_norm_l2"] = num(l2_norm(r.lhs));
    doc["rel_error"] = num(r.rel_error);
    doc["r_floor"] = num(r.r_floor);
    doc["r_in_range"] = r.r_in_range;
    doc["padded"] = r.padded;
    const double tol = 1e-8 * cfg.tolerance_scale;
    const bool ok = r.rel_error <= tol;
    doc["summary"] = json::array({summary_row("leibniz", "reconstruction_rel", r.rel_error, tol, "<=", ok ? "PASS" : "FAIL")});
    return dump(doc);
}

std::vector<ReportRow> merge_reports(const std::vector<std::string>& json_texts,
                                     const std::vector<std::string>& sources) {
    std::vector<ReportRow> rows;
    for (std::size_t i = 0; i < json_texts.size(); ++i) {
        const std::string src = i < sources.size() ? sources[i] : "input" + std::to_string(i);
        json doc;
        try {
            doc = json::parse(json_texts[i]);
        } catch (const json::exception& e) {
            throw InvalidInput(src + ": not a JSON document (" + e.what() + ")");
        }
        if (!doc.is_object() || !doc.contains("summary") || !doc["summary"].is_array())
            throw InvalidInput(src + ": no summary array");
        for (const auto& s : doc["summary"])
            rows.push_back({src, s.value("check", ""), s.value("metric", ""), s.value("status", ""),
                            from_num(s.value("value", json())), from_num(s.value("tolerance", json()))});
    }
    return rows;
}

std::string report_csv(const std::vector<ReportRow>& rows) {
    std::ostringstream os;
    os << "source,check,metric,status,value,tolerance\n";
    for (const auto& r : rows)
        os << csv_field(r.source) << ',' << csv_field(r.check) << ',' << csv_field(r.metric) << ',' << r.status << ','
           << format17(r.value) << ',' << format17(r.tolerance) << '\n';
    return os.str();
}

std::string report_text(const std::vector<ReportRow>& rows) {
    std::ostringstream os;
    int pass = 0, fail = 0;
    for (const auto& r : rows) {
        os << (r.status.empty() ? "INFO" : r.status) << "  " << r.source << "  " << r.check << "." << r.metric << " = "
           << format17(r.value);
        if (r.status == "PASS" || r.status == "FAIL") os << "  (tolerance " << format17(r.tolerance) << ")";
        os << '\n';
        pass += r.status == "PASS";
        fail += r.status == "FAIL";
    }
    os << pass << " passed, " << fail << " failed, " << rows.size() - std::size_t(pass + fail) << " informational\n";
    return os.str();
}

}  // namespace flagmult

// flagmult: verification suite and numerical experiments for flag multipliers
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "flagmult/suite.hpp"

using namespace flagmult;
namespace fs = std::filesystem;

namespace {

struct Globals {
    std::string config;
    int grid = 0;
    long long seed = -1;
    std::string out_dir;
    double tolerance_scale = 0.0;
};

ExperimentConfig resolve(const Globals& g) {
    ExperimentConfig c = g.config.empty() ? ExperimentConfig{} : load_config(g.config);
    if (g.grid) {
        if (g.grid < 8 || g.grid % 2) throw InvalidInput("--grid must be even and >= 8");
        c.grid_n = g.grid;
    }
    if (g.seed >= 0) c.seed = unsigned(g.seed);
    if (!g.out_dir.empty()) c.out_dir = g.out_dir;
    if (g.tolerance_scale > 0.0) c.tolerance_scale = g.tolerance_scale;
    return c;
}

void write(const ExperimentConfig& c, const std::string& name, const std::string& text) {
    fs::create_directories(c.out_dir);
    const fs::path p = fs::path(c.out_dir) / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw InvalidInput("cannot write " + p.string());
    out << text;
    std::cout << "wrote " << p.string() << "\n";
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cmd_verify(const ExperimentConfig& c, std::vector<std::string> names) {
    if (names.empty()) names = verify_checks();
    std::vector<CheckResult> results;
    std::string text;
    bool all = true;
    for (const auto& n : names) {
        const CheckResult r = run_check(n, c);
        char line[160];
        std::snprintf(line, sizeof line, "%s  %-22s %8.2fs\n", r.pass ? "PASS" : "FAIL", n.c_str(), r.runtime);
        std::cout << line;
        text += line;
        for (const auto& m : r.metrics) {
            const std::string ml = "      " + m.name + " = " + format17(m.value) + " " + m.relation + " " +
                                   format17(m.tolerance) + (m.pass ? "" : "  <-- fails") + "\n";
            std::cout << ml;
            text += ml;
        }
        if (!r.note.empty()) {
            std::cout << "      note: " << r.note << "\n";
            text += "      note: " + r.note + "\n";
        }
        all = all && r.pass;
        results.push_back(r);
    }
    write(c, "verify.json", verify_json(c, results));
    std::ostringstream csv;
    csv << "check,metric,value,relation,tolerance,status\n";
    for (const auto& r : results)
        for (const auto& m : r.metrics)
            csv << r.name << ',' << m.name << ',' << format17(m.value) << ',' << m.relation << ','
                << format17(m.tolerance) << ',' << (m.pass ? "PASS" : "FAIL") << '\n';
    write(c, "verify.csv", csv.str());
    write(c, "verify.txt", text);
    std::cout << (all ? "all checks passed" : "some checks failed") << "\n";
    return all ? 0 : 1;
}

int cmd_scan(const ExperimentConfig& c) {
    const auto runs = run_scans(c);
    for (const auto& r : runs)
        std::cout << r.label << ": max " << format17(r.report.max) << ", min " << format17(r.report.min)
                  << ", flatness " << format17(r.report.flatness) << (r.report.quasi ? " (quasi-Banach target)" : "")
                  << "\n";
    write(c, "scan.json", scan_json(c, runs));
    write(c, "scan.csv", scan_csv(runs));
    return 0;
}

int cmd_endpoint(const ExperimentConfig& c) {
    const auto g = run_endpoint(c);
    for (const auto& r : g.rows)
        std::cout << "N = " << r.N << "  ratio " << format17(r.ratio) << "  control " << format17(r.control) << "\n";
    std::cout << (g.increasing ? "ratios increase with N" : "ratios do NOT increase with N") << "\n";
    write(c, "endpoint.json", endpoint_json(c, g));
    write(c, "endpoint.csv", endpoint_csv(g));
    return g.increasing ? 0 : 1;
}

int cmd_leibniz(const ExperimentConfig& c) {
    const auto r = run_leibniz(c);
    std::cout << "reconstruction relative error " << format17(r.rel_error) << "\n";
    if (!r.r_in_range) std::cout << "warning: r is below the admissible floor " << format17(r.r_floor) << "\n";
    write(c, "leibniz.json", leibniz_json(c, r));
    write(c, "leibniz.csv", leibniz_csv(r));
    return r.rel_error <= 1e-8 * c.tolerance_scale ? 0 : 1;
}

int cmd_report(const ExperimentConfig& c, std::vector<std::string> inputs) {
    if (inputs.empty())
        for (const char* n : {"verify.json", "scan.json", "endpoint.json", "leibniz.json"}) {
            const fs::path p = fs::path(c.out_dir) / n;
            if (fs::exists(p)) inputs.push_back(p.string());
        }
    if (inputs.empty()) throw InvalidInput("no JSON inputs found in " + c.out_dir);
    std::vector<std::string> texts, sources;
    for (const auto& p : inputs) {
        texts.push_back(slurp(p));
        sources.push_back(fs::path(p).filename().string());
    }
    const auto rows = merge_reports(texts, sources);
    const std::string txt = report_text(rows);
    std::cout << txt;
    write(c, "report.csv", report_csv(rows));
    write(c, "report.txt", txt);
    for (const auto& r : rows)
        if (r.status == "FAIL") return 1;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flagmult: numerical checks for bi-parameter flag multipliers"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "configuration file")->check(CLI::ExistingFile);
    app.add_option("--grid", g.grid, "grid size N (N x N samples)");
    app.add_option("--seed", g.seed, "random seed")->check(CLI::NonNegativeNumber);
    app.add_option("--out-dir", g.out_dir, "output directory");
    app.add_option("--tolerance-scale", g.tolerance_scale, "multiplier for upper-bound tolerances")
        ->check(CLI::PositiveNumber);

    std::vector<std::string> checks, inputs;
    std::vector<int> resolutions;
    auto* verify = app.add_subcommand("verify", "run the verification checks");
    verify->add_option("--checks", checks, "subset of checks")
        ->delimiter(',')
        ->check(CLI::IsMember(check_names()));
    auto* scan = app.add_subcommand("scan", "bound scans over test families");
    auto* endpoint = app.add_subcommand("endpoint-probe", "L-infinity endpoint growth probe");
    endpoint->add_option("--resolutions", resolutions, "grid sizes")->delimiter(',');
    auto* leib = app.add_subcommand("leibniz", "Leibniz-rule decomposition");
    auto* report = app.add_subcommand("report", "merge JSON outputs into a summary");
    report->add_option("--inputs", inputs, "JSON files")->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig c = resolve(g);
        if (!resolutions.empty()) c.endpoint_resolutions = resolutions;
        if (*verify) return cmd_verify(c, checks);
        if (*scan) return cmd_scan(c);
        if (*endpoint) return cmd_endpoint(c);
        if (*leib) return cmd_leibniz(c);
        if (*report) return cmd_report(c, inputs);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "flagmult/suite.hpp"

namespace flagmult {
namespace {

struct Value {
    std::string text;
    int line, col;

    [[noreturn]] void fail(const std::string& what) const { throw ConfigError(what, line, col); }

    double number() const { return number_at(text, col); }
    double number_at(const std::string& s, int c) const {
        const auto slash = s.find('/');
        if (slash != std::string::npos) {
            const double a = number_at(trim(s.substr(0, slash)), c), b = number_at(trim(s.substr(slash + 1)), c);
            if (b == 0.0) throw ConfigError("division by zero in '" + s + "'", line, c);
            return a / b;
        }
        double v = 0.0;
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
            throw ConfigError("expected a number, got '" + s + "'", line, c);
        return v;
    }
    int integer() const {
        int v = 0;
        const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
        if (text.empty() || r.ec != std::errc() || r.ptr != text.data() + text.size())
            fail("expected an integer, got '" + text + "'");
        return v;
    }
    // comma separated numbers with their columns
    std::vector<double> list() const {
        std::vector<double> out;
        std::size_t start = 0;
        while (true) {
            const auto comma = text.find(',', start);
            const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            std::size_t lead = 0;
            while (lead < item.size() && std::isspace(static_cast<unsigned char>(item[lead]))) ++lead;
            out.push_back(number_at(trim(item), col + int(start + lead)));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        return out;
    }
    std::vector<double> list(std::size_t n) const {
        auto v = list();
        if (v.size() != n) fail("expected " + std::to_string(n) + " comma-separated values");
        return v;
    }

    static std::string trim(const std::string& s) {
        std::size_t a = 0, b = s.size();
        while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
        return s.substr(a, b - a);
    }
};

// drop the "Name: " prefix the error types add themselves
std::string bare(const char* what) {
    const std::string s = what;
    const auto c = s.find(": ");
    return c == std::string::npos ? s : s.substr(c + 2);
}

template <class F>
auto at_value(const Value& v, F&& f) {
    try {
        return f();
    } catch (const HolderError& e) {
        throw HolderError("line " + std::to_string(v.line) + ", column " + std::to_string(v.col) + ": " + bare(e.what()));
    } catch (const InvalidExponent& e) {
        throw InvalidExponent("line " + std::to_string(v.line) + ", column " + std::to_string(v.col) + ": " +
                              bare(e.what()));
    }
}

ExponentTuple plain_tuple(const Value& v) {
    const auto x = v.list(4);
    return at_value(v, [&] { return ExponentTuple::holder(x[0], x[1], x[2], x[3]); });
}

Band band(const Value& v) {
    const auto x = v.list(2);
    const Band b{int(x[0]), int(x[1])};
    if (double(b.lo) != x[0] || double(b.hi) != x[1] || b.lo < 0 || b.hi < b.lo)
        v.fail("band needs integers 0 <= lo <= hi");
    return b;
}

using Setter = std::function<void(ExperimentConfig&, const Value&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"seed",
         [](ExperimentConfig& c, const Value& v) {
             const int s = v.integer();
             if (s < 0) v.fail("seed must be non-negative");
             c.seed = unsigned(s);
         }},
        {"grid.n",
         [](ExperimentConfig& c, const Value& v) {
             c.grid_n = v.integer();
             if (c.grid_n < 8 || c.grid_n % 2) v.fail("grid.n must be even and >= 8");
         }},
        {"grid.l1", [](ExperimentConfig& c, const Value& v) { c.L1 = v.number(); }},
        {"grid.l2", [](ExperimentConfig& c, const Value& v) { c.L2 = v.number(); }},
        {"generators.epsilon", [](ExperimentConfig& c, const Value& v) { c.epsilon = v.number(); }},
        {"generators.sharpness", [](ExperimentConfig& c, const Value& v) { c.sharpness = v.number(); }},
        {"generators.gap",
         [](ExperimentConfig& c, const Value& v) {
             c.gap = v.integer();
             if (c.gap < 0) v.fail("gap must be non-negative");
         }},
        {"plan.kind",
         [](ExperimentConfig& c, const Value& v) {
             try {
                 c.plan = parse_plan_kind(v.text);
             } catch (const Error&) {
                 v.fail("unknown plan kind '" + v.text + "'");
             }
         }},
        {"plan.rank_cap", [](ExperimentConfig& c, const Value& v) { c.rank_cap = v.integer(); }},
        {"plan.tol", [](ExperimentConfig& c, const Value& v) { c.plan_tol = v.number(); }},
        {"symbol.flag",
         [](ExperimentConfig& c, const Value& v) {
             if (v.text != "library" && v.text != "constant") v.fail("symbol.flag is 'library' or 'constant'");
             c.scan_symbol = v.text;
         }},
        {"symbol.shift", [](ExperimentConfig& c, const Value& v) { c.scan_shift = v.integer(); }},
        {"exponents.plain", [](ExperimentConfig& c, const Value& v) { c.plain = plain_tuple(v); }},
        {"exponents.holder", [](ExperimentConfig& c, const Value& v) { c.holder = plain_tuple(v); }},
        {"exponents.mixed",
         [](ExperimentConfig& c, const Value& v) {
             const auto x = v.list(6);
             c.mixed = at_value(v, [&] { return ExponentTuple::mixed_tuple(x[0], x[1], x[2], x[3], x[4], x[5]); });
         }},
        {"family.kind",
         [](ExperimentConfig& c, const Value& v) {
             try {
                 c.family.kind = parse_family_kind(v.text);
             } catch (const Error&) {
                 v.fail("unknown family kind '" + v.text + "'");
             }
         }},
        {"family.octaves", [](ExperimentConfig& c, const Value& v) { c.family.octaves = v.integer(); }},
        {"family.translations", [](ExperimentConfig& c, const Value& v) { c.family.translations = v.integer(); }},
        {"family.seed", [](ExperimentConfig& c, const Value& v) { c.family.seed = unsigned(v.integer()); }},
        {"family.f", [](ExperimentConfig& c, const Value& v) { c.family.f = band(v); }},
        {"family.g", [](ExperimentConfig& c, const Value& v) { c.family.g = band(v); }},
        {"family.h", [](ExperimentConfig& c, const Value& v) { c.family.h = band(v); }},
        {"weight.kind",
         [](ExperimentConfig& c, const Value& v) {
             if (v.text != "none" && v.text != "power") v.fail("weight.kind is 'none' or 'power'");
             c.weight = v.text;
         }},
        {"weight.a1", [](ExperimentConfig& c, const Value& v) { c.weight_a1 = v.number(); }},
        {"weight.a2", [](ExperimentConfig& c, const Value& v) { c.weight_a2 = v.number(); }},
        {"weight.x1", [](ExperimentConfig& c, const Value& v) { c.weight_x1 = v.number(); }},
        {"weight.x2", [](ExperimentConfig& c, const Value& v) { c.weight_x2 = v.number(); }},
        {"endpoint.resolutions",
         [](ExperimentConfig& c, const Value& v) {
             c.endpoint_resolutions.clear();
             for (double x : v.list()) {
                 if (x != std::floor(x) || x < 8) v.fail("resolutions are integers >= 8");
                 c.endpoint_resolutions.push_back(int(x));
             }
         }},
        {"endpoint.shift", [](ExperimentConfig& c, const Value& v) { c.endpoint_shift = v.integer(); }},
        {"endpoint.a", [](ExperimentConfig& c, const Value& v) { c.endpoint_a = v.number(); }},
        {"leibniz.alpha",
         [](ExperimentConfig& c, const Value& v) {
             const auto x = v.list(2);
             c.alpha = {x[0], x[1]};
         }},
        {"leibniz.beta",
         [](ExperimentConfig& c, const Value& v) {
             const auto x = v.list(2);
             c.beta = {x[0], x[1]};
         }},
        {"leibniz.gap", [](ExperimentConfig& c, const Value& v) { c.leibniz_gap = v.integer(); }},
        {"leibniz.exponents", [](ExperimentConfig& c, const Value& v) { c.leibniz_exponents = plain_tuple(v); }},
        {"leibniz.kmax", [](ExperimentConfig& c, const Value& v) { c.leibniz_kmax = v.integer(); }},
        {"output.dir", [](ExperimentConfig& c, const Value& v) { c.out_dir = v.text; }},
        {"tolerance.scale",
         [](ExperimentConfig& c, const Value& v) {
             c.tolerance_scale = v.number();
             if (!(c.tolerance_scale > 0.0)) v.fail("tolerance.scale must be positive");
         }},
    };
    return table;
}

}  // namespace

GeneratorSet ExperimentConfig::generators() const { return make_generators(epsilon, sharpness); }

OperatorPlan ExperimentConfig::operator_plan() const {
    OperatorPlan p;
    p.kind = plan;
    p.gap = gap;
    p.M = rank_cap;
    p.tol = plan_tol;
    return p;
}

ExperimentConfig parse_config(const std::string& text, const ExperimentConfig& base) {
    ExperimentConfig cfg = base;
    std::istringstream in(text);
    std::string raw, section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string s = hash == std::string::npos ? raw : raw.substr(0, hash);
        std::size_t a = 0;
        while (a < s.size() && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
        if (a == s.size()) continue;
        if (s[a] == '[') {
            const auto close = s.find(']', a);
            if (close == std::string::npos) throw ConfigError("unterminated section header", line, int(a) + 1);
            section = Value::trim(s.substr(a + 1, close - a - 1));
            if (section.empty()) throw ConfigError("empty section name", line, int(a) + 2);
            for (std::size_t k = close + 1; k < s.size(); ++k)
                if (!std::isspace(static_cast<unsigned char>(s[k])))
                    throw ConfigError("unexpected text after section header", line, int(k) + 1);
            continue;
        }
        const auto eq = s.find('=', a);
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line, int(a) + 1);
        const std::string key = Value::trim(s.substr(a, eq - a));
        if (key.empty()) throw ConfigError("missing key", line, int(a) + 1);
        std::size_t vb = eq + 1;
        while (vb < s.size() && std::isspace(static_cast<unsigned char>(s[vb]))) ++vb;
        const std::string value = Value::trim(s.substr(eq + 1));
        if (value.empty()) throw ConfigError("missing value for '" + key + "'", line, int(eq) + 2);
        const std::string full = section.empty() || key.find('.') != std::string::npos ? key : section + "." + key;
        const auto it = setters().find(full);
        if (it == setters().end()) throw ConfigError("unknown key '" + full + "'", line, int(a) + 1);
        it->second(cfg, Value{value, line, int(vb) + 1});
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace flagmult

#include <algorithm>
#include <cmath>

#include "flagmult/symbols.hpp"

namespace flagmult {
namespace {

double get(const ParamMap& p, const std::string& key, double dflt) {
    auto it = p.find(key);
    return it == p.end() ? dflt : it->second;
}

// degree-0 homogeneous rational factors
double q3(double u, double v, double w, double a, double b) {
    const double r2 = u * u + v * v + w * w;
    if (r2 == 0.0) return 0.0;
    return (u * u + a * v * w + b * u * (v + w)) / r2;
}

double q2(double v, double w, double a) {
    const double r2 = v * v + w * w;
    if (r2 == 0.0) return 0.0;
    return (v * v + a * v * w) / r2;
}

ParamFactor factor_from(int arity, std::function<cplx(double, double, double)> f) {
    ParamFactor pf;
    pf.arity = arity;
    pf.eval = std::move(f);
    return pf;
}

ParamFactor chi_factor(const GeneratorSet& gen, int shift, int jlo, int jhi) {
    ParamFactor pf;
    pf.arity = 3;
    pf.eval = [gen, shift, jlo, jhi](double u, double v, double w) -> cplx {
        if (u == 0.0) return 0.0;
        const int c = int(std::floor(std::log2(std::abs(u))));
        double s = 0.0;
        for (int j = std::max(jlo, c - 2); j <= std::min(jhi, c + 2); ++j) {
            const double p = gen.psi_j(u, j);
            if (p != 0.0) s += p * gen.phi_k(v, j - shift) * gen.phi_k(w, j - shift);
        }
        return s;
    };
    for (int j = jlo; j <= jhi; ++j) {
        RankTerm t;
        t.a = [gen, j](double u) { return gen.psi_j(u, j); };
        t.b = [gen, j, shift](double v) { return gen.phi_k(v, j - shift); };
        t.w = t.b;
        pf.terms.push_back(t);
    }
    return pf;
}

ParamFactor m2_factor(const GeneratorSet& gen, int shift, int jlo, int jhi, bool flip) {
    ParamFactor pf;
    pf.arity = 2;
    pf.eval = [gen, shift, jlo, jhi, flip](double, double v, double w) -> cplx {
        if (flip) std::swap(v, w);
        if (v == 0.0) return 0.0;
        const int c = int(std::floor(std::log2(std::abs(v))));
        double s = 0.0;
        for (int k = std::max(jlo, c - 2); k <= std::min(jhi, c + 2); ++k) {
            const double p = gen.psi_j(v, k);
            if (p != 0.0) s += p * gen.phi_k(w, k - shift);
        }
        return s;
    };
    for (int k = jlo; k <= jhi; ++k) {
        RankTerm t;
        auto hi = [gen, k](double x) { return gen.psi_j(x, k); };
        auto lo = [gen, k, shift](double x) { return gen.phi_k(x, k - shift); };
        t.b = flip ? std::function<double(double)>(lo) : std::function<double(double)>(hi);
        t.w = flip ? std::function<double(double)>(hi) : std::function<double(double)>(lo);
        pf.terms.push_back(t);
    }
    return pf;
}

ParamFactor constant_factor(int arity, double value) {
    ParamFactor pf = factor_from(arity, [value](double, double, double) -> cplx { return value; });
    RankTerm t;
    t.c = value;
    t.a = [](double) { return 1.0; };
    t.b = t.a;
    t.w = t.a;
    pf.terms.push_back(t);
    return pf;
}

}  // namespace

cplx SymbolND::operator()(std::initializer_list<double> args) const {
    if (int(args.size()) != nargs()) throw SymbolError("wrong argument count");
    return eval(args.begin());
}

SymbolND tensor_symbol(const std::vector<ParamFactor>& factors, const std::string& name) {
    if (factors.empty() || factors.size() > 2) throw SymbolError("need one or two factors");
    SymbolND s;
    s.arity = factors[0].arity;
    for (const auto& f : factors)
        if (f.arity != s.arity) throw SymbolError("factor arity mismatch");
    s.params = int(factors.size());
    s.builder = name;
    s.factors = factors;
    const int ar = s.arity;
    auto fs = factors;
    s.eval = [fs, ar](const double* a) -> cplx {
        cplx v = 1.0;
        for (std::size_t p = 0; p < fs.size(); ++p) {
            const double* q = a + p * ar;
            v *= ar == 3 ? fs[p].eval(q[0], q[1], q[2]) : fs[p].eval(0.0, q[0], q[1]);
        }
        return v;
    };
    return s;
}

SymbolND product_symbol(const SymbolND& a, const SymbolND& b) {
    if (a.arity != b.arity || a.params != b.params) throw SymbolError("shape mismatch in product");
    SymbolND s;
    s.arity = a.arity;
    s.params = a.params;
    s.builder = "product";
    s.bound = a.bound * b.bound;
    auto ea = a.eval, eb = b.eval;
    s.eval = [ea, eb](const double* x) { return ea(x) * eb(x); };
    if (a.separable() && b.separable()) {
        for (int p = 0; p < a.params; ++p) {
            const ParamFactor& fa = a.factors[p];
            const ParamFactor& fb = b.factors[p];
            ParamFactor pf;
            pf.arity = a.arity;
            auto ga = fa.eval, gb = fb.eval;
            pf.eval = [ga, gb](double u, double v, double w) { return ga(u, v, w) * gb(u, v, w); };
            if (fa.has_rank() && fb.has_rank()) {
                for (const auto& ta : fa.terms)
                    for (const auto& tb : fb.terms) {
                        RankTerm t;
                        t.c = ta.c * tb.c;
                        auto mul = [](std::function<double(double)> x, std::function<double(double)> y)
                            -> std::function<double(double)> {
                            if (!x) return y;
                            if (!y) return x;
                            return [x, y](double z) { return x(z) * y(z); };
                        };
                        t.a = mul(ta.a, tb.a);
                        t.b = mul(ta.b, tb.b);
                        t.w = mul(ta.w, tb.w);
                        pf.terms.push_back(t);
                    }
            }
            s.factors.push_back(pf);
        }
    }
    return s;
}

void FlagSymbol::validate() const {
    if (m1.arity != 3 || m1.params != 2) throw SymbolError("m1 must be arity 3, bi-parameter");
    if (m2.arity != 2 || m2.params != 2) throw SymbolError("m2 must be arity 2, bi-parameter");
    if (!m1.eval || !m2.eval) throw SymbolError("empty symbol");
}

cplx FlagSymbol::eval(const double* a) const {
    const double b[4] = {a[1], a[2], a[4], a[5]};
    return m1.eval(a) * m2.eval(b);
}

ParamFactor FlagSymbol::combined_factor(int p) const {
    if (!separable()) throw SymbolError("flag is not separable");
    const ParamFactor& f1 = m1.factors[p];
    const ParamFactor& f2 = m2.factors[p];
    ParamFactor pf;
    pf.arity = 3;
    auto e1 = f1.eval, e2 = f2.eval;
    pf.eval = [e1, e2](double u, double v, double w) { return e1(u, v, w) * e2(0.0, v, w); };
    if (f1.has_rank() && f2.has_rank()) {
        for (const auto& a : f1.terms)
            for (const auto& b : f2.terms) {
                RankTerm t;
                t.c = a.c * b.c;
                t.a = a.a ? a.a : std::function<double(double)>([](double) { return 1.0; });
                auto ab = a.b, bb = b.b, aw = a.w, bw = b.w;
                t.b = [ab, bb](double z) { return (ab ? ab(z) : 1.0) * (bb ? bb(z) : 1.0); };
                t.w = [aw, bw](double z) { return (aw ? aw(z) : 1.0) * (bw ? bw(z) : 1.0); };
                pf.terms.push_back(t);
            }
    }
    return pf;
}

SymbolND flag_as_symbol(const FlagSymbol& flag) {
    flag.validate();
    SymbolND s;
    s.arity = 3;
    s.params = 2;
    s.builder = "flag";
    s.bound = flag.m1.bound * flag.m2.bound;
    auto f = flag;
    s.eval = [f](const double* a) { return f.eval(a); };
    if (flag.separable()) {
        s.factors.push_back(flag.combined_factor(0));
        s.factors.push_back(flag.combined_factor(1));
    }
    return s;
}

std::vector<std::string> symbol_builders() {
    return {"constant",        "mikhlin",          "mikhlin_coupled", "generator_chi",
            "generator_m2",    "cone",             "fractional_power", "homogeneous_power",
            "m3m4"};
}

SymbolND build_symbol(const std::string& builder, const ParamMap& p, const GeneratorSet& gen,
                      int arity, int nparams) {
    if (arity != 2 && arity != 3) throw SymbolError("arity must be 2 or 3");
    if (nparams != 1 && nparams != 2) throw SymbolError("parameter count must be 1 or 2");
    const int shift = int(get(p, "shift", 3));
    const int jlo = int(get(p, "jlo", -8));
    const int jhi = int(get(p, "jhi", 12));
    std::vector<ParamFactor> fs;
    SymbolND s;
    double bound = 1.0;

    if (builder == "constant") {
        const double v = get(p, "value", 1.0);
        for (int i = 0; i < nparams; ++i) fs.push_back(constant_factor(arity, i == 0 ? v : 1.0));
        s = tensor_symbol(fs, builder);
        bound = std::abs(v);
    } else if (builder == "mikhlin") {
        const double a = get(p, "a", 0.5), b = get(p, "b", 0.25);
        for (int i = 0; i < nparams; ++i) {
            if (arity == 3)
                fs.push_back(factor_from(3, [a, b](double u, double v, double w) -> cplx {
                    return q3(u, v, w, a, b);
                }));
            else
                fs.push_back(factor_from(2, [a](double, double v, double w) -> cplx {
                    return q2(v, w, a);
                }));
            bound *= arity == 3 ? 1.0 + std::abs(a) / 2 + std::abs(b) : 1.0 + std::abs(a) / 2;
        }
        s = tensor_symbol(fs, builder);
    } else if (builder == "mikhlin_coupled") {
        const double a = get(p, "a", 0.5), b = get(p, "b", 0.25), c = get(p, "c", 0.5);
        const double B = arity == 3 ? 1.0 + std::abs(a) / 2 + std::abs(b) : 1.0 + std::abs(a) / 2;
        const double Bp = nparams == 2 ? B * B : B;
        if (!(std::abs(c) * Bp < 2.0)) throw SymbolError("coupling too strong, symbol may blow up");
        s.arity = arity;
        s.params = nparams;
        s.eval = [a, b, c, arity, nparams](const double* x) -> cplx {
            double prod = 1.0;
            for (int i = 0; i < nparams; ++i) {
                const double* q = x + i * arity;
                const bool origin =
                    arity == 3 ? (q[0] == 0 && q[1] == 0 && q[2] == 0) : (q[0] == 0 && q[1] == 0);
                if (origin) return 0.0;
                prod *= arity == 3 ? q3(q[0], q[1], q[2], a, b) : q2(q[0], q[1], a);
            }
            return 1.0 / (2.0 + c * prod);
        };
        bound = 1.0 / (2.0 - std::abs(c) * Bp);
    } else if (builder == "generator_chi") {
        if (arity != 3) throw SymbolError("generator_chi has arity 3");
        for (int i = 0; i < nparams; ++i) fs.push_back(chi_factor(gen, shift, jlo, jhi));
        s = tensor_symbol(fs, builder);
        bound = 2.0;
    } else if (builder == "generator_m2") {
        if (arity != 2) throw SymbolError("generator_m2 has arity 2");
        for (int i = 0; i < nparams; ++i) fs.push_back(m2_factor(gen, shift, jlo, jhi, false));
        s = tensor_symbol(fs, builder);
        bound = 2.0;
    } else if (builder == "cone") {
        if (arity != 3) throw SymbolError("cone has arity 3");
        for (int i = 0; i < nparams; ++i) {
            const int which = int(get(p, i == 0 ? "i1" : "i2", 0));
            fs.push_back(factor_from(3, [gen, which](double u, double v, double w) -> cplx {
                return which == 0 ? gen.cone0(u, v, w) : gen.cone1(u, v, w);
            }));
        }
        s = tensor_symbol(fs, builder);
    } else if (builder == "fractional_power") {
        const double e = get(p, "s", 0.5);
        if (e < 0) throw SymbolError("fractional power must be non-negative");
        for (int i = 0; i < nparams; ++i) {
            if (arity == 3)
                fs.push_back(factor_from(3, [e](double u, double v, double w) -> cplx {
                    const double r2 = u * u + v * v + w * w;
                    if (r2 == 0.0) return 0.0;
                    return std::pow((v * v + w * w) / r2, e / 2);
                }));
            else
                fs.push_back(factor_from(2, [e](double, double v, double w) -> cplx {
                    const double r2 = v * v + w * w;
                    if (r2 == 0.0) return 0.0;
                    return std::pow(v * v / r2, e / 2);
                }));
        }
        s = tensor_symbol(fs, builder);
    } else if (builder == "homogeneous_power") {
        const double e = get(p, "s", 1.0);
        for (int i = 0; i < nparams; ++i) {
            if (arity == 3)
                fs.push_back(factor_from(3, [e](double u, double v, double w) -> cplx {
                    return std::pow(u * u + v * v + w * w, e / 2);
                }));
            else
                fs.push_back(factor_from(2, [e](double, double v, double w) -> cplx {
                    return std::pow(v * v + w * w, e / 2);
                }));
        }
        s = tensor_symbol(fs, builder);
        bound = e == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    } else if (builder == "m3m4") {
        // m3(xi, eta) m4(eta, zeta) with the frequency ordering reversed in the
        // second parameter
        if (arity != 3 || nparams != 2) throw SymbolError("m3m4 is arity 3, bi-parameter");
        for (int i = 0; i < 2; ++i) {
            const bool rev = i == 1;
            ParamFactor a = m2_factor(gen, shift, jlo, jhi, rev);  // in (xi, eta)
            ParamFactor b = m2_factor(gen, shift, jlo, jhi, rev);  // in (eta, zeta)
            auto ea = a.eval, eb = b.eval;
            fs.push_back(factor_from(3, [ea, eb](double u, double v, double w) -> cplx {
                return ea(0.0, u, v) * eb(0.0, v, w);
            }));
        }
        s = tensor_symbol(fs, builder);
        bound = 4.0;
    } else {
        throw SymbolError("unknown builder '" + builder + "'");
    }
    s.arity = arity;
    s.params = nparams;
    s.builder = builder;
    s.numeric = p;
    s.bound = bound;
    return s;
}

FlagSymbol library_flag(const GeneratorSet& gen, int shift, int jlo, int jhi) {
    ParamMap p{{"shift", double(shift)}, {"jlo", double(jlo)}, {"jhi", double(jhi)}};
    FlagSymbol f;
    f.m1 = build_symbol("generator_chi", p, gen, 3, 2);
    f.m2 = build_symbol("generator_m2", p, gen, 2, 2);
    return f;
}

}  // namespace flagmult

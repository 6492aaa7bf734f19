#include <cmath>
#include <limits>

#include "flagmult/analysis.hpp"

namespace flagmult {
namespace {

void check_exponent(double p) {
    if (!(p > 0.0)) throw InvalidExponent("exponent must be positive");
}

// (sum |v_i|^p c_i)^{1/p} over a strided line; weights optional
double line_norm(const cplx* v, std::size_t n, std::size_t stride, double p, const double* w, double cell) {
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(v[i * stride]));
        return m;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::pow(std::abs(v[i * stride]), p) * (w ? w[i] : 1.0);
    return std::pow(s * cell, 1.0 / p);
}

double mixed_impl(const SampledFunction& f, double p, const double* w1, double q, const double* w2) {
    check_exponent(p);
    check_exponent(q);
    const GridSpec& G = f.grid;
    const double c1 = G.L1 / G.N1, c2 = G.L2 / G.N2;
    std::vector<cplx> inner(G.N1);
    for (int i1 = 0; i1 < G.N1; ++i1)
        inner[i1] = line_norm(&f.values[std::size_t(i1) * G.N2], G.N2, 1, q, w2, c2);
    return line_norm(inner.data(), G.N1, 1, p, w1, c1);
}

}  // namespace

ExponentTuple ExponentTuple::holder(double p1, double p2, double p3, double r) {
    ExponentTuple e;
    e.p1 = p1;
    e.p2 = p2;
    e.p3 = p3;
    e.r = r;
    e.validate();
    return e;
}

ExponentTuple ExponentTuple::mixed_tuple(double p, double p2, double q2, double p3, double q3, double r) {
    ExponentTuple e;
    e.p1 = p;
    e.p2 = p2;
    e.p3 = p3;
    e.q2 = q2;
    e.q3 = q3;
    e.r = r;
    e.mixed = true;
    e.validate();
    return e;
}

void ExponentTuple::validate() const {
    auto in_range = [](double p) { return p > 1.0 && std::isfinite(p); };
    if (!in_range(p1) || !in_range(p2) || !in_range(p3)) throw InvalidExponent("p_i must lie in (1, inf)");
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidExponent("r must lie in (0, inf)");
    if (std::abs(1.0 / r - (1.0 / p1 + 1.0 / p2 + 1.0 / p3)) > 1e-12)
        throw HolderError("1/r differs from 1/p1 + 1/p2 + 1/p3");
    if (mixed) {
        if (!in_range(q2) || !in_range(q3)) throw InvalidExponent("q_i must lie in (1, inf)");
        if (std::abs(1.0 / r - (1.0 / p1 + 1.0 / q2 + 1.0 / q3)) > 1e-12)
            throw HolderError("1/r differs from 1/p + 1/q2 + 1/q3");
    }
}

Weight Weight::from_function(const SampledFunction& w) {
    Weight out;
    out.w = w;
    out.validate();
    return out;
}

Weight Weight::from_factors(const GridSpec& g, const std::vector<double>& w1, const std::vector<double>& w2) {
    if (int(w1.size()) != g.N1 || int(w2.size()) != g.N2) throw InvalidInput("weight factor length");
    Weight out;
    out.w = SampledFunction(g);
    for (int i1 = 0; i1 < g.N1; ++i1)
        for (int i2 = 0; i2 < g.N2; ++i2) out.w(i1, i2) = w1[i1] * w2[i2];
    out.tensor = true;
    out.w1 = w1;
    out.w2 = w2;
    out.validate();
    return out;
}

Weight Weight::uniform(const GridSpec& g, double c) {
    return from_factors(g, std::vector<double>(g.N1, c), std::vector<double>(g.N2, 1.0));
}

void Weight::validate() const {
    for (const auto& v : w.values)
        if (!(v.real() > 0.0) || !std::isfinite(v.real()) || v.imag() != 0.0)
            throw InvalidInput("weights must be positive and finite");
}

std::vector<double> power_weight_1d(int n, double L, double x0, double a) {
    std::vector<double> w(n);
    const double cell = L / n;
    for (int i = 0; i < n; ++i) {
        double d = std::fmod(std::abs(i * cell - x0), L);
        d = std::min(d, L - d);
        w[i] = std::pow(std::max(d, cell), a);
    }
    return w;
}

Weight power_weight(const GridSpec& g, double a1, double a2, double x01, double x02) {
    return Weight::from_factors(g, power_weight_1d(g.N1, g.L1, x01, a1), power_weight_1d(g.N2, g.L2, x02, a2));
}

double lp_norm(const SampledFunction& f, double p) {
    check_exponent(p);
    return line_norm(f.values.data(), f.values.size(), 1, p, nullptr, f.grid.cell_area());
}

double mixed_norm(const SampledFunction& f, double p_outer, double q_inner) {
    return mixed_impl(f, p_outer, nullptr, q_inner, nullptr);
}

double weighted_norm(const SampledFunction& f, double p, const Weight& w) {
    check_exponent(p);
    if (w.w.grid != f.grid) throw InvalidInput("weight lives on another grid");
    if (std::isinf(p)) return lp_norm(f, p);
    std::vector<double> wv(w.w.values.size());
    for (std::size_t i = 0; i < wv.size(); ++i) wv[i] = w.w.values[i].real();
    return line_norm(f.values.data(), f.values.size(), 1, p, wv.data(), f.grid.cell_area());
}

double weighted_mixed_norm(const SampledFunction& f, double p, const std::vector<double>& w1, double q,
                           const std::vector<double>& w2) {
    if (int(w1.size()) != f.grid.N1 || int(w2.size()) != f.grid.N2) throw InvalidInput("weight factor length");
    return mixed_impl(f, p, w1.data(), q, w2.data());
}

}  // namespace flagmult

#include <algorithm>
#include <cmath>

#include "flagmult/analysis.hpp"

namespace flagmult {
namespace {

int log2_floor(int n) {
    int s = 0;
    while ((2 << s) <= n) ++s;
    return s;
}

void check_ap_exponent(double p) {
    if (!(p > 1.0) || !std::isfinite(p)) throw InvalidExponent("A_p needs 1 < p < inf");
}

// inclusive 2D prefix table with a zero border, (n1+1) x (n2+1)
std::vector<double> prefix2(const std::vector<double>& v, int n1, int n2) {
    std::vector<double> P(std::size_t(n1 + 1) * (n2 + 1), 0.0);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j)
            P[std::size_t(i + 1) * (n2 + 1) + j + 1] = v[std::size_t(i) * n2 + j] +
                                                       P[std::size_t(i) * (n2 + 1) + j + 1] +
                                                       P[std::size_t(i + 1) * (n2 + 1) + j] -
                                                       P[std::size_t(i) * (n2 + 1) + j];
    return P;
}

double block(const std::vector<double>& P, int n2, int a1, int b1, int a2, int b2) {
    auto at = [&](int i, int j) { return P[std::size_t(i) * (n2 + 1) + j]; };
    return at(b1, b2) - at(a1, b2) - at(b1, a2) + at(a1, a2);
}

double ap_rect(const std::vector<double>& w, int n1, int n2, double p) {
    std::vector<double> dual(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) dual[i] = std::pow(w[i], 1.0 / (1.0 - p));
    const auto P = prefix2(w, n1, n2), D = prefix2(dual, n1, n2);
    double best = 0.0;
    for (int s1 = 0; s1 <= log2_floor(n1); ++s1)
        for (int s2 = 0; s2 <= log2_floor(n2); ++s2) {
            const int l1 = 1 << s1, l2 = 1 << s2;
            const double area = double(l1) * l2;
            for (int a1 = 0; a1 + l1 <= n1; a1 += l1)
                for (int a2 = 0; a2 + l2 <= n2; a2 += l2) {
                    const double A = block(P, n2, a1, a1 + l1, a2, a2 + l2) / area;
                    const double B = block(D, n2, a1, a1 + l1, a2, a2 + l2) / area;
                    best = std::max(best, A * std::pow(B, p - 1.0));
                }
        }
    return best;
}

}  // namespace

double ap_constant_1d(const std::vector<double>& w, double p) {
    check_ap_exponent(p);
    for (double v : w)
        if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput("weights must be positive and finite");
    return ap_rect(w, int(w.size()), 1, p);
}

double ap_constant(const Weight& w, double p, APMode mode) {
    check_ap_exponent(p);
    w.validate();
    const GridSpec& G = w.w.grid;
    std::vector<double> v(w.w.values.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = w.w.values[i].real();
    if (mode == APMode::Rect) return ap_rect(v, G.N1, G.N2, p);
    double best = 0.0;
    if (mode == APMode::Axis1) {
        std::vector<double> line(G.N1);
        for (int i2 = 0; i2 < G.N2; ++i2) {
            for (int i1 = 0; i1 < G.N1; ++i1) line[i1] = v[std::size_t(i1) * G.N2 + i2];
            best = std::max(best, ap_rect(line, G.N1, 1, p));
        }
    } else {
        for (int i1 = 0; i1 < G.N1; ++i1) {
            std::vector<double> line(v.begin() + std::ptrdiff_t(i1) * G.N2, v.begin() + std::ptrdiff_t(i1 + 1) * G.N2);
            best = std::max(best, ap_rect(line, G.N2, 1, p));
        }
    }
    return best;
}

SampledFunction strong_maximal(const SampledFunction& f) {
    const GridSpec& G = f.grid;
    const int n1 = G.N1, n2 = G.N2;
    std::vector<double> a(f.values.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::abs(f.values[i]);
    const auto P = prefix2(a, n1, n2);
    std::vector<double> M(a);  // the single cell is a dyadic rectangle
    for (int s1 = 0; s1 <= log2_floor(n1); ++s1)
        for (int s2 = 0; s2 <= log2_floor(n2); ++s2) {
            const int l1 = 1 << s1, l2 = 1 << s2;
            const double area = double(l1) * l2;
            for (int a1 = 0; a1 + l1 <= n1; a1 += l1)
                for (int a2 = 0; a2 + l2 <= n2; a2 += l2) {
                    const double avg = block(P, n2, a1, a1 + l1, a2, a2 + l2) / area;
                    for (int i1 = a1; i1 < a1 + l1; ++i1)
                        for (int i2 = a2; i2 < a2 + l2; ++i2) {
                            double& m = M[std::size_t(i1) * n2 + i2];
                            m = std::max(m, avg);
                        }
                }
        }
    SampledFunction out(G);
    for (std::size_t i = 0; i < M.size(); ++i) out.values[i] = M[i];
    return out;
}

FSReport fs_maximal_check(const std::vector<SampledFunction>& fs, double p, double q, const Weight* w) {
    if (fs.empty()) throw InvalidInput("empty sequence");
    if (!(q > 0.0)) throw InvalidExponent("q must be positive");
    const GridSpec& G = fs[0].grid;
    SampledFunction lhs(G), rhs(G);
    std::vector<double> sl(G.size(), 0.0), sr(G.size(), 0.0);
    for (const auto& f : fs) {
        if (f.grid != G) throw InvalidInput("sequence on different grids");
        const auto M = strong_maximal(f);
        for (std::size_t i = 0; i < sl.size(); ++i) {
            sl[i] += std::pow(M.values[i].real(), q);
            sr[i] += std::pow(std::abs(f.values[i]), q);
        }
    }
    for (std::size_t i = 0; i < sl.size(); ++i) {
        lhs.values[i] = std::pow(sl[i], 1.0 / q);
        rhs.values[i] = std::pow(sr[i], 1.0 / q);
    }
    FSReport r;
    r.lhs = w ? weighted_norm(lhs, p, *w) : lp_norm(lhs, p);
    r.rhs = w ? weighted_norm(rhs, p, *w) : lp_norm(rhs, p);
    if (r.rhs == 0.0) throw DegenerateInput("zero sequence");
    r.ratio = r.lhs / r.rhs;
    return r;
}

double square_function_ratio(const SampledFunction& f, double p, const Weight* w, const GeneratorSet& gen) {
    const SampledFunction S = square_function(f, {1, 2}, gen);
    cplx mean = 0.0;
    for (const auto& v : f.values) mean += v;
    mean /= double(f.values.size());
    SampledFunction c = f;
    for (auto& v : c.values) v -= mean;
    const double num = w ? weighted_norm(S, p, *w) : lp_norm(S, p);
    const double den = w ? weighted_norm(c, p, *w) : lp_norm(c, p);
    if (den == 0.0) throw DegenerateInput("function is constant");
    return num / den;
}

SquareFunctionProbe square_function_probe(const std::vector<SampledFunction>& family, double p,
                                          const Weight* w, const GeneratorSet& gen) {
    SquareFunctionProbe out;
    for (const auto& f : family) out.ratios.push_back(square_function_ratio(f, p, w, gen));
    if (out.ratios.empty()) throw InvalidInput("empty family");
    out.c1 = *std::min_element(out.ratios.begin(), out.ratios.end());
    out.c2 = *std::max_element(out.ratios.begin(), out.ratios.end());
    return out;
}

SampledFunction fractional_derivative(const SampledFunction& f, double a1, double a2) {
    if (!(a1 >= 0.0) || !(a2 >= 0.0)) throw InvalidExponent("derivative orders must be non-negative");
    if (a1 == 0.0 && a2 == 0.0) return f;
    const GridSpec& G = f.grid;
    const double tp = 2.0 * std::acos(-1.0);
    std::vector<double> m1(G.N1), m2(G.N2);
    for (int i = 0; i < G.N1; ++i) m1[i] = std::pow(tp * std::abs(G.phys(GridSpec::freq(i, G.N1), 1)), a1);
    for (int i = 0; i < G.N2; ++i) m2[i] = std::pow(tp * std::abs(G.phys(GridSpec::freq(i, G.N2), 2)), a2);
    Spectrum s = dft(f);
    multiply_axis(s, 1, m1);
    multiply_axis(s, 2, m2);
    return idft(s);
}

}  // namespace flagmult

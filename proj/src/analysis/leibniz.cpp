#include <algorithm>
#include <cmath>
#include <memory>

#include "../multiop/multiop_internal.hpp"
#include "flagmult/analysis.hpp"

namespace flagmult {
namespace {

using namespace detail;

const double kTwoPi = 2.0 * std::acos(-1.0);

// S_n = sum of P_i for i <= n, clipped to the band
double partial(const ScaleBand& b, int n, double u, const GeneratorSet& gen) {
    if (n < b.jmin) return 0.0;
    if (n >= b.jmax) return 1.0;
    return gen.Phi(std::ldexp(std::abs(u), -n));
}

// window tables of one axis on the evaluation grid
struct AxisWindows {
    ScaleBand band;
    std::vector<double> u;  // physical frequency per FFT index
    const GeneratorSet* gen;
    int gap;

    std::vector<double> table(int lo_n, int hi_n) const {
        // S_hi - S_lo; hi_n = INT_MAX stands for 1
        std::vector<double> t(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double hi = hi_n == kOne ? 1.0 : partial(band, hi_n, u[i], *gen);
            const double lo = lo_n == kZero ? 0.0 : partial(band, lo_n, u[i], *gen);
            t[i] = hi - lo;
        }
        return t;
    }
    static constexpr int kOne = 1 << 30, kZero = -(1 << 30);

    // type t: 0 h dominant, 1 comparable, 2 g dominant
    std::vector<double> g_window(int t, int m) const {
        return t == 0 ? table(kZero, m - gap - 1) : table(m - 1, m);
    }
    std::vector<double> h_window(int t, int m) const {
        if (t == 0) return table(m - 1, m);
        if (t == 1) return table(m - gap - 1, m + gap);
        return table(kZero, m - gap - 1);
    }
    // s: 0 f below, 1 comparable, 2 above
    std::vector<double> f_window(int s, int m) const {
        if (s == 0) return table(kZero, m - gap - 1);
        if (s == 1) return table(m - gap - 1, m + gap);
        return table(m + gap, kOne);
    }
};

std::vector<double> power_table(const GridSpec& G, int axis, double a) {
    std::vector<double> t(G.n(axis));
    for (int i = 0; i < G.n(axis); ++i) t[i] = std::pow(kTwoPi * std::abs(G.phys(GridSpec::freq(i, G.n(axis)), axis)), a);
    return t;
}

// idft of s filtered by (w1, w2), or empty when the filtered spectrum vanishes
std::unique_ptr<SampledFunction> filtered(const Spectrum& s, const std::vector<double>& w1,
                                          const std::vector<double>& w2) {
    Spectrum p = s;
    multiply_axis(p, 1, w1);
    multiply_axis(p, 2, w2);
    bool any = false;
    for (const auto& c : p.coeffs)
        if (c != 0.0) {
            any = true;
            break;
        }
    if (!any) return nullptr;
    return std::make_unique<SampledFunction>(idft(p));
}

void differentiate(SampledFunction& v, const std::vector<double>& d1, const std::vector<double>& d2) {
    Spectrum s = dft(v);
    multiply_axis(s, 1, d1);
    multiply_axis(s, 2, d2);
    v = idft(s);
}

bool is_zero(double a) { return a == 0.0; }

}  // namespace

double LeibnizSpec::r_floor() const {
    return std::max({1.0 / (1.0 + alpha1), 1.0 / (1.0 + alpha2), 1.0 / (1.0 + beta1), 1.0 / (1.0 + beta2)});
}

double leibniz_partition(const GridSpec& g, int axis, int j, double u, const GeneratorSet& gen) {
    const ScaleBand b = scale_band(g, axis);
    if (!b.contains(j)) return 0.0;
    return partial(b, j, u, gen) - partial(b, j - 1, u, gen);
}

int leibniz_label(int region1, int region2) {
    if (region1 < 0 || region1 > 8 || region2 < 0 || region2 > 8) throw InvalidInput("region index out of range");
    const bool f1 = region1 % 3 != 0, f2 = region2 % 3 != 0;
    const bool h1 = region1 / 3 == 0, h2 = region2 / 3 == 0;
    const int fgroup = f1 && f2 ? 0 : f1 ? 1 : f2 ? 2 : 3;
    const int carrier = !h1 && !h2 ? 0 : !h1 && h2 ? 1 : h1 && !h2 ? 2 : 3;
    return 4 * fgroup + carrier + 1;
}

LeibnizResult leibniz_decompose(const LeibnizSpec& spec, const SampledFunction& f, const SampledFunction& g,
                                const SampledFunction& h, const GeneratorSet& gen, const ExponentTuple& ex) {
    for (double a : {spec.alpha1, spec.alpha2, spec.beta1, spec.beta2})
        if (!(a >= 0.0)) throw InvalidExponent("derivative orders must be non-negative");
    const GridSpec& G = f.grid;
    if (g.grid != G || h.grid != G) throw InvalidInput("inputs live on different grids");
    if (spec.gap < 0) throw ScaleError("gap must be non-negative");
    for (int axis = 1; axis <= 2; ++axis) {
        const ScaleBand b = scale_band(G, axis);
        if (2 * spec.gap + 1 > b.jmax - b.jmin + 1) throw ScaleError("gap does not fit in the scale band");
    }
    ex.validate();

    const Spectrum fs = clean_spectrum(f), gs = clean_spectrum(g), hs = clean_spectrum(h);
    bool padded = false;
    const GridSpec big = padded_grid({&fs, &gs, &hs}, &padded);
    const Spectrum Fb = embed(fs, big), Gb = embed(gs, big), Hb = embed(hs, big);

    AxisWindows W[2];
    for (int p = 0; p < 2; ++p) {
        W[p].band = scale_band(G, p + 1);
        W[p].gen = &gen;
        W[p].gap = spec.gap;
        W[p].u.resize(big.n(p + 1));
        for (int i = 0; i < big.n(p + 1); ++i) W[p].u[i] = big.phys(GridSpec::freq(i, big.n(p + 1)), p + 1);
    }
    const auto da1 = power_table(big, 1, spec.alpha1), da2 = power_table(big, 2, spec.alpha2);
    const auto db1 = power_table(big, 1, spec.beta1), db2 = power_table(big, 2, spec.beta2);
    const bool has_beta = !(is_zero(spec.beta1) && is_zero(spec.beta2));
    const bool has_alpha = !(is_zero(spec.alpha1) && is_zero(spec.alpha2));

    std::vector<CVec> acc(81, CVec(big.size(), 0.0));
    const std::size_t n = big.size();
    for (int m1 = W[0].band.jmin; m1 <= W[0].band.jmax; ++m1)
        for (int m2 = W[1].band.jmin; m2 <= W[1].band.jmax; ++m2) {
            std::unique_ptr<SampledFunction> gh[3][3], fv[3][3];
            bool any_gh = false;
            for (int t1 = 0; t1 < 3; ++t1)
                for (int t2 = 0; t2 < 3; ++t2) {
                    auto gv = filtered(Gb, W[0].g_window(t1, m1), W[1].g_window(t2, m2));
                    if (!gv) continue;
                    auto hv = filtered(Hb, W[0].h_window(t1, m1), W[1].h_window(t2, m2));
                    if (!hv) continue;
                    for (std::size_t i = 0; i < n; ++i) gv->values[i] *= hv->values[i];
                    if (has_beta) differentiate(*gv, db1, db2);
                    gh[t1][t2] = std::move(gv);
                    any_gh = true;
                }
            if (!any_gh) continue;
            for (int s1 = 0; s1 < 3; ++s1)
                for (int s2 = 0; s2 < 3; ++s2) fv[s1][s2] = filtered(Fb, W[0].f_window(s1, m1), W[1].f_window(s2, m2));
            for (int t1 = 0; t1 < 3; ++t1)
                for (int t2 = 0; t2 < 3; ++t2) {
                    if (!gh[t1][t2]) continue;
                    const CVec& y = gh[t1][t2]->values;
                    for (int s1 = 0; s1 < 3; ++s1)
                        for (int s2 = 0; s2 < 3; ++s2) {
                            if (!fv[s1][s2]) continue;
                            const CVec& x = fv[s1][s2]->values;
                            CVec& a = acc[std::size_t(9 * (3 * t1 + s1) + 3 * t2 + s2)];
                            for (std::size_t i = 0; i < n; ++i) a[i] += x[i] * y[i];
                        }
                }
        }

    LeibnizResult res;
    res.padded = padded;
    res.r_floor = spec.r_floor();
    res.r_in_range = ex.r > res.r_floor;
    res.sum = SampledFunction(G);
    for (int r1 = 0; r1 < 9; ++r1)
        for (int r2 = 0; r2 < 9; ++r2) {
            SampledFunction v(big, std::move(acc[std::size_t(9 * r1 + r2)]));
            Spectrum s = dft(v);
            if (has_alpha) {
                multiply_axis(s, 1, da1);
                multiply_axis(s, 2, da2);
            }
            LeibnizTerm t;
            t.region1 = r1;
            t.region2 = r2;
            t.label = leibniz_label(r1, r2);
            const int s1 = r1 % 3, s2 = r2 % 3;
            t.shape = (s1 == 2 && s2 == 0) || (s1 == 0 && s2 == 2) ? "m3m4" : "flag";
            t.out = idft(restrict_band(s, G));
            for (std::size_t i = 0; i < G.size(); ++i) res.sum.values[i] += t.out.values[i];
            res.terms.push_back(std::move(t));
        }

    // direct evaluation of D^alpha (f D^beta (g h))
    {
        SampledFunction x = idft(Fb), y = idft(Gb), z = idft(Hb);
        for (std::size_t i = 0; i < n; ++i) y.values[i] *= z.values[i];
        if (has_beta) differentiate(y, db1, db2);
        for (std::size_t i = 0; i < n; ++i) y.values[i] *= x.values[i];
        Spectrum s = dft(y);
        if (has_alpha) {
            multiply_axis(s, 1, da1);
            multiply_axis(s, 2, da2);
        }
        res.lhs = idft(restrict_band(s, G));
    }
    res.rel_error = rel_l2_error(res.sum, res.lhs);

    const double al[2] = {spec.alpha1, spec.alpha2}, be[2] = {spec.beta1, spec.beta2};
    for (int L = 0; L < 16; ++L) {
        LeibnizLabel& lab = res.labels[std::size_t(L)];
        lab.label = L + 1;
        const int fgroup = L / 4, carrier = L % 4;
        const bool fa[2] = {fgroup == 0 || fgroup == 1, fgroup == 0 || fgroup == 2};
        const bool gc[2] = {carrier == 0 || carrier == 1, carrier == 0 || carrier == 2};
        for (int p = 0; p < 2; ++p) {
            lab.df[p] = fa[p] ? al[p] : 0.0;
            const double rest = be[p] + (fa[p] ? 0.0 : al[p]);
            lab.dg[p] = gc[p] ? rest : 0.0;
            lab.dh[p] = gc[p] ? 0.0 : rest;
        }
        lab.product = lp_norm(fractional_derivative(f, lab.df[0], lab.df[1]), ex.p1) *
                      lp_norm(fractional_derivative(g, lab.dg[0], lab.dg[1]), ex.p2) *
                      lp_norm(fractional_derivative(h, lab.dh[0], lab.dh[1]), ex.p3);
        SampledFunction part(G);
        for (const auto& t : res.terms)
            if (t.label == L + 1) {
                ++lab.terms;
                for (std::size_t i = 0; i < G.size(); ++i) part.values[i] += t.out.values[i];
            }
        lab.term_norm = lp_norm(part, ex.r);
    }
    return res;
}

}  // namespace flagmult

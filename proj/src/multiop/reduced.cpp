#include <cmath>

#include "flagmult/multiop.hpp"
#include "multiop_internal.hpp"

namespace flagmult {
namespace {

using namespace detail;

// which window each slot carries, per parameter: true = Delta_k, false = S_k
struct Pattern {
    bool g[2], h[2];
};

Pattern pattern(int i) {
    switch (i) {
        case 1: return {{true, true}, {true, true}};
        case 2: return {{true, true}, {true, false}};
        case 3: return {{true, true}, {false, false}};
        case 4: return {{true, false}, {false, true}};
    }
    throw InvalidInput("reduced operator index must be 1..4");
}

std::vector<double> window_table(const GridSpec& g, int axis, bool delta, int k, const GeneratorSet& gen) {
    return lp_symbol(g, {delta ? LPKind::Delta : LPKind::S, k, axis}, gen);
}

SampledFunction filtered(const Spectrum& s, const std::vector<double>& m1, const std::vector<double>& m2) {
    Spectrum p = s;
    multiply_axis(p, 1, m1);
    multiply_axis(p, 2, m2);
    return idft(p);
}

}  // namespace

SampledFunction reduced_flag_operator(int i, int d1, int d2, const SampledFunction& f,
                                      const SampledFunction& g, const SampledFunction& h,
                                      const GeneratorSet& gen, const ScaleTable& a, const ScaleTable& b,
                                      int gap, ApplyReport* rep) {
    const Pattern pat = pattern(i);
    if (gap < 1) throw ScaleError("gap must be positive");
    const GridSpec& G = f.grid;
    if (g.grid != G || h.grid != G) throw InvalidInput("inputs live on different grids");
    if (rep) {
        *rep = ApplyReport{};
        rep->path = "reduced";
    }
    const ScaleBand b1 = scale_band(G, 1), b2 = scale_band(G, 2);
    const Spectrum fs = clean_spectrum(f), gs = clean_spectrum(g), hs = clean_spectrum(h);
    bool padded = false;
    const GridSpec big = padded_grid({&fs, &gs, &hs}, &padded);
    const int N1 = G.N1, N2 = G.N2;

    std::vector<std::vector<double>> psi1, psi2;
    for (int j = b1.jmin; j <= b1.jmax; ++j) psi1.push_back(window_table(G, 1, true, j, gen));
    for (int j = b2.jmin; j <= b2.jmax; ++j) psi2.push_back(window_table(G, 2, true, j, gen));

    CVec acc(big.size(), 0.0);
    std::size_t terms = 0;
    for (int k1 = b1.jmin; k1 + gap <= b1.jmax; ++k1)
        for (int k2 = b2.jmin; k2 + gap <= b2.jmax; ++k2) {
            const cplx bk = b ? b(k1, k2) : cplx(1.0);
            if (bk == 0.0) continue;
            // sum over j >= k + gap of a(j1, j2) 2^{-(j1-k1) d1 - (j2-k2) d2} Delta_{j1} Delta_{j2}
            Spectrum F(G);
            for (int i1 = 0; i1 < N1; ++i1)
                for (int i2 = 0; i2 < N2; ++i2) {
                    const cplx c = fs.coeffs[std::size_t(i1) * N2 + i2];
                    if (c == 0.0) continue;
                    cplx w = 0.0;
                    for (int j1 = k1 + gap; j1 <= b1.jmax; ++j1) {
                        const double p1 = psi1[j1 - b1.jmin][i1];
                        if (p1 == 0.0) continue;
                        for (int j2 = k2 + gap; j2 <= b2.jmax; ++j2) {
                            const double p2 = psi2[j2 - b2.jmin][i2];
                            if (p2 == 0.0) continue;
                            const cplx aj = a ? a(j1, j2) : cplx(1.0);
                            w += aj * p1 * p2 * std::exp2(-double((j1 - k1) * d1 + (j2 - k2) * d2));
                        }
                    }
                    F.coeffs[std::size_t(i1) * N2 + i2] = c * w;
                }
            const auto gm1 = window_table(G, 1, pat.g[0], k1, gen), gm2 = window_table(G, 2, pat.g[1], k2, gen);
            const auto hm1 = window_table(G, 1, pat.h[0], k1, gen), hm2 = window_table(G, 2, pat.h[1], k2, gen);
            Spectrum Gk = gs, Hk = hs;
            multiply_axis(Gk, 1, gm1);
            multiply_axis(Gk, 2, gm2);
            multiply_axis(Hk, 1, hm1);
            multiply_axis(Hk, 2, hm2);
            const auto x = idft(embed(F, big)), y = idft(embed(Gk, big)), z = idft(embed(Hk, big));
            for (std::size_t n = 0; n < acc.size(); ++n) acc[n] += bk * x.values[n] * y.values[n] * z.values[n];
            ++terms;
        }
    const auto out = idft(restrict_band(dft(SampledFunction(big, std::move(acc))), G));
    if (rep) {
        rep->terms = terms;
        rep->padded = padded;
    }
    return out;
}

SymbolND reduced_flag_symbol(int i, int d1, int d2, const GridSpec& grid, const GeneratorSet& gen, int gap,
                             const std::function<cplx(int)>& a1, const std::function<cplx(int)>& a2,
                             const std::function<cplx(int)>& b1, const std::function<cplx(int)>& b2) {
    const Pattern pat = pattern(i);
    if (gap < 1) throw ScaleError("gap must be positive");
    std::vector<ParamFactor> fs;
    for (int p = 0; p < 2; ++p) {
        const ScaleBand band = scale_band(grid, p + 1);
        const int d = p == 0 ? d1 : d2;
        const auto& A = p == 0 ? a1 : a2;
        const auto& B = p == 0 ? b1 : b2;
        const bool gd = pat.g[p], hd = pat.h[p];
        ParamFactor pf;
        pf.arity = 3;
        for (int k = band.jmin; k + gap <= band.jmax; ++k)
            for (int j = k + gap; j <= band.jmax; ++j) {
                RankTerm t;
                t.c = (A ? A(j) : cplx(1.0)) * (B ? B(k) : cplx(1.0)) * std::exp2(-double((j - k) * d));
                t.a = [gen, j](double u) { return gen.psi_j(u, j); };
                auto win = [gen, k](bool delta) -> std::function<double(double)> {
                    if (delta) return [gen, k](double u) { return gen.psi_j(u, k); };
                    return [gen, k](double u) { return gen.phi_k(u, k); };
                };
                t.b = win(gd);
                t.w = win(hd);
                pf.terms.push_back(t);
            }
        auto terms = pf.terms;
        pf.eval = [terms](double u, double v, double w) -> cplx {
            cplx s = 0.0;
            for (const auto& t : terms) {
                const double x = t.a(u);
                if (x == 0.0) continue;
                s += t.c * x * t.b(v) * t.w(w);
            }
            return s;
        };
        fs.push_back(std::move(pf));
    }
    SymbolND s = tensor_symbol(fs, "reduced");
    s.numeric = {{"i", double(i)}, {"d1", double(d1)}, {"d2", double(d2)}, {"gap", double(gap)}};
    return s;
}

}  // namespace flagmult

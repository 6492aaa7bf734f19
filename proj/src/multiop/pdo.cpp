#include <algorithm>
#include <cmath>

#include "flagmult/multiop.hpp"
#include "multiop_internal.hpp"

namespace flagmult {
namespace {

using namespace detail;

const double kTwoPi = 2.0 * std::acos(-1.0);

// periodic partition window of index n on an axis split into W cells
double cell_window(const GeneratorSet& gen, double x, double L, int W, int n) {
    double t = double(W) * x / L - double(n);
    t -= double(W) * std::round(t / double(W));
    return gen.window(t);
}

// 1 on the support of the cell window n (sum of five neighbours)
double cell_cover(const GeneratorSet& gen, double x, double L, int W, int n) {
    double s = 0.0;
    for (int d = -2; d <= 2; ++d) s += cell_window(gen, x, L, W, ((n + d) % W + W) % W);
    return s;
}

}  // namespace

SampledFunction apply_pdo(const PDOSymbolPair& pair, const SampledFunction& f, const SampledFunction& g,
                          const SampledFunction& h, int Lmax, int window_count, const GeneratorSet& gen,
                          PDOReport* rep, double tail_tol) {
    if (!pair.a || !pair.b) throw SymbolError("empty pseudo-differential symbol");
    if (Lmax < 0) throw InvalidInput("Lmax must be non-negative");
    if (window_count < 1) throw InvalidInput("window count must be positive");
    const GridSpec& G = f.grid;
    if (g.grid != G || h.grid != G) throw InvalidInput("inputs live on different grids");
    const ModeList fm = sparse_modes(clean_spectrum(f), kOracleMaxModes, false);
    const ModeList gm = sparse_modes(clean_spectrum(g), kOracleMaxModes, false);
    const ModeList hm = sparse_modes(clean_spectrum(h), kOracleMaxModes, false);

    const int W = window_count;
    const bool localized = W >= 5;  // the cover needs five distinct neighbours
    const int Q = std::max(16, 4 * Lmax + 4);
    PDOReport local;
    local.windows = W * W;
    local.Lmax = Lmax;
    local.decay.assign(std::size_t(Lmax) + 1, 0.0);

    const double scale = 1.0 / (G.area() * G.area());
    const int cells = localized ? W * W : 1;
    std::vector<std::vector<double>> cover(cells, std::vector<double>(std::size_t(Q) * Q, 1.0));
    if (localized)
        for (int cell = 0; cell < cells; ++cell)
            for (int i1 = 0; i1 < Q; ++i1)
                for (int i2 = 0; i2 < Q; ++i2)
                    cover[cell][std::size_t(i1) * Q + i2] = cell_cover(gen, i1 * G.L1 / Q, G.L1, W, cell / W) *
                                                            cell_cover(gen, i2 * G.L2 / Q, G.L2, W, cell % W);
    std::vector<Spectrum> pieces(cells, Spectrum(G));
    const double QQ = double(Q) * Q;

    // coefficients of a periodic sample: returns the tail energy ratio beyond Lmax and
    // leaves the truncated series back in physical space
    auto truncate = [&](CVec& v, bool record) {
        fft2(v, Q, Q, -1);
        double all = 0.0, tail = 0.0;
        for (int i1 = 0; i1 < Q; ++i1)
            for (int i2 = 0; i2 < Q; ++i2) {
                const int l1 = GridSpec::freq(i1, Q), l2 = GridSpec::freq(i2, Q);
                cplx& c = v[std::size_t(i1) * Q + i2];
                c /= QQ;
                all += std::norm(c);
                if (std::abs(l1) > Lmax || std::abs(l2) > Lmax) {
                    tail += std::norm(c);
                    c = 0.0;
                } else if (record) {
                    const int shell = std::max(std::abs(l1), std::abs(l2));
                    local.decay[shell] = std::max(local.decay[shell], std::abs(c));
                }
            }
        if (all > 0.0) local.tail = std::max(local.tail, tail / all);
        fft2(v, Q, Q, +1);
    };

    CVec araw(std::size_t(Q) * Q), bt(std::size_t(Q) * Q), prodv(std::size_t(Q) * Q);
    for (const auto& A : fm)
        for (const auto& B : gm)
            for (const auto& Cc : hm) {
                const double fa[6] = {G.phys(A.k1, 1), G.phys(B.k1, 1), G.phys(Cc.k1, 1),
                                      G.phys(A.k2, 2), G.phys(B.k2, 2), G.phys(Cc.k2, 2)};
                const double fb[4] = {fa[1], fa[2], fa[4], fa[5]};
                for (int i1 = 0; i1 < Q; ++i1)
                    for (int i2 = 0; i2 < Q; ++i2) {
                        const double x1 = i1 * G.L1 / Q, x2 = i2 * G.L2 / Q;
                        araw[std::size_t(i1) * Q + i2] = pair.a(x1, x2, fa);
                        bt[std::size_t(i1) * Q + i2] = pair.b(x1, x2, fb);
                    }
                truncate(bt, false);
                const cplx prod = A.c * B.c * Cc.c * scale;
                const int K1 = A.k1 + B.k1 + Cc.k1, K2 = A.k2 + B.k2 + Cc.k2;
                for (int cell = 0; cell < cells; ++cell) {
                    for (std::size_t p = 0; p < prodv.size(); ++p) prodv[p] = araw[p] * cover[cell][p];
                    truncate(prodv, true);
                    // Q >= 4 Lmax + 1, so the product of the truncated series is not aliased
                    for (std::size_t p = 0; p < prodv.size(); ++p) prodv[p] *= bt[p];
                    fft2(prodv, Q, Q, -1);
                    for (int m1 = -2 * Lmax; m1 <= 2 * Lmax; ++m1)
                        for (int m2 = -2 * Lmax; m2 <= 2 * Lmax; ++m2) {
                            const cplx c = prodv[std::size_t(GridSpec::index(m1, Q)) * Q + GridSpec::index(m2, Q)] / QQ;
                            if (c == 0.0) continue;
                            const int o1 = K1 + m1, o2 = K2 + m2;
                            if (o1 <= -G.N1 / 2 || o1 >= G.N1 / 2 || o2 <= -G.N2 / 2 || o2 >= G.N2 / 2) {
                                ++local.discarded;
                                continue;
                            }
                            pieces[cell].at(o1, o2) += c * prod;
                        }
                }
            }
    SampledFunction out(G);
    for (int cell = 0; cell < cells; ++cell) {
        SampledFunction v = idft(pieces[cell]);
        if (localized)
            for (int i1 = 0; i1 < G.N1; ++i1)
                for (int i2 = 0; i2 < G.N2; ++i2)
                    v(i1, i2) *= cell_window(gen, G.x(i1, 1), G.L1, W, cell / W) *
                                 cell_window(gen, G.x(i2, 2), G.L2, W, cell % W);
        for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += v.values[i];
    }
    local.truncation_warning = local.tail > tail_tol;
    if (rep) *rep = local;
    return out;
}

std::vector<cplx> pdo_direct(const PDOSymbolPair& pair, const ModeList& f, const ModeList& g,
                             const ModeList& h, const GridSpec& grid,
                             const std::vector<std::pair<int, int>>& points) {
    for (auto* m : {&f, &g, &h}) {
        validate_modes(grid, *m);
        if (m->size() > std::size_t(kOracleMaxModes)) throw OracleTooLarge("oracle limited to 64 modes per input");
    }
    const double scale = 1.0 / (grid.area() * grid.area());
    std::vector<cplx> out;
    for (auto [i1, i2] : points) {
        const double x1 = grid.x(i1, 1), x2 = grid.x(i2, 2);
        cplx s = 0.0;
        for (const auto& A : f)
            for (const auto& B : g)
                for (const auto& C : h) {
                    const double fa[6] = {grid.phys(A.k1, 1), grid.phys(B.k1, 1), grid.phys(C.k1, 1),
                                          grid.phys(A.k2, 2), grid.phys(B.k2, 2), grid.phys(C.k2, 2)};
                    const double fb[4] = {fa[1], fa[2], fa[4], fa[5]};
                    const double ph = kTwoPi * ((fa[0] + fa[1] + fa[2]) * x1 + (fa[3] + fa[4] + fa[5]) * x2);
                    s += pair.a(x1, x2, fa) * pair.b(x1, x2, fb) * A.c * B.c * C.c * std::polar(1.0, ph);
                }
        out.push_back(s * scale);
    }
    return out;
}

}  // namespace flagmult

#include "flagmult/lp.hpp"

#include <algorithm>
#include <cmath>

namespace flagmult {
namespace {

void check_axis(int axis) {
    if (axis != 1 && axis != 2) throw InvalidInput("axis must be 1 or 2");
}

std::vector<double> tabulate(const GridSpec& g, int axis, const std::function<double(double)>& m) {
    const int n = g.n(axis);
    std::vector<double> out(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const int k = GridSpec::freq(i, n);
        if (k == -n / 2) continue;
        out[i] = m(g.phys(k, axis));
    }
    return out;
}

}  // namespace

ScaleBand scale_band(const GridSpec& g, int axis, int octaves) {
    check_axis(axis);
    const double top = double(g.n(axis)) / (4.0 * g.len(axis));
    if (!(top >= 1e-300)) throw ScaleError("grid has no representable dyadic scale");
    ScaleBand b;
    b.jmax = int(std::floor(std::log2(top) + 1e-12));
    b.jmin = b.jmax - octaves;
    return b;
}

std::pair<int, int> tilde_span(const ScaleBand& b, int k, int gap) {
    if (gap < 1) throw ScaleError("gap must be positive");
    return {std::max(b.jmin, k - 5), std::min(b.jmax, k + gap - 1)};
}

std::vector<double> band_sum_symbol(const GridSpec& g, int axis, const GeneratorSet& gen, int octaves) {
    const ScaleBand b = scale_band(g, axis, octaves);
    return tabulate(g, axis, [&](double u) { return gen.psi_sum(u, b.jmin, b.jmax); });
}

std::vector<double> lp_symbol(const GridSpec& g, const LPOperatorSpec& spec, const GeneratorSet& gen,
                              int gap, int octaves) {
    check_axis(spec.axis);
    const ScaleBand b = scale_band(g, spec.axis, octaves);
    if (!b.contains(spec.scale)) throw ScaleError("scale " + std::to_string(spec.scale) + " outside band");
    const int k = spec.scale;
    switch (spec.kind) {
        case LPKind::Delta:
            return tabulate(g, spec.axis, [&](double u) { return gen.psi_j(u, k); });
        case LPKind::S:
            return tabulate(g, spec.axis, [&](double u) { return gen.phi_k(u, k); });
        case LPKind::DeltaTilde: {
            auto [lo, hi] = tilde_span(b, k, gap);
            return tabulate(g, spec.axis, [&, lo = lo, hi = hi](double u) { return gen.psi_sum(u, lo, hi); });
        }
        case LPKind::DeltaPrime: {
            auto [lo, hi] = tilde_span(b, k, gap);
            return tabulate(g, spec.axis, [&, lo = lo, hi = hi](double u) {
                return gen.phi_k(u, k) * gen.psi_sum(u, lo, hi);
            });
        }
    }
    throw InvalidInput("unknown LP kind");
}

void multiply_axis(Spectrum& s, int axis, const std::vector<double>& m) {
    check_axis(axis);
    const int n1 = s.grid.N1, n2 = s.grid.N2;
    if (int(m.size()) != s.grid.n(axis)) throw InvalidInput("multiplier length mismatch");
    for (int i1 = 0; i1 < n1; ++i1)
        for (int i2 = 0; i2 < n2; ++i2) s.coeffs[std::size_t(i1) * n2 + i2] *= m[axis == 1 ? i1 : i2];
}

SampledFunction apply_lp(const SampledFunction& f, const LPOperatorSpec& spec, const GeneratorSet& gen,
                         int gap) {
    auto m = lp_symbol(f.grid, spec, gen, gap);
    Spectrum s = dft(f);
    multiply_axis(s, spec.axis, m);
    s.zero_nyquist();
    return idft(s);
}

SampledFunction square_function(const SampledFunction& f, const std::vector<int>& axes,
                                const GeneratorSet& gen) {
    if (axes.empty() || axes.size() > 2) throw InvalidInput("square function takes one or two axes");
    const GridSpec& g = f.grid;
    const Spectrum s = dft(f);
    SampledFunction out(g);
    std::vector<double> acc(g.size(), 0.0);
    auto add_piece = [&](const Spectrum& piece) {
        const auto v = idft(piece);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += std::norm(v.values[i]);
    };
    if (axes.size() == 1) {
        const int ax = axes[0];
        check_axis(ax);
        const ScaleBand b = scale_band(g, ax);
        for (int j = b.jmin; j <= b.jmax; ++j) {
            Spectrum p = s;
            multiply_axis(p, ax, lp_symbol(g, {LPKind::Delta, j, ax}, gen));
            p.zero_nyquist();
            add_piece(p);
        }
    } else {
        const ScaleBand b1 = scale_band(g, 1), b2 = scale_band(g, 2);
        std::vector<std::vector<double>> m2;
        for (int j2 = b2.jmin; j2 <= b2.jmax; ++j2) m2.push_back(lp_symbol(g, {LPKind::Delta, j2, 2}, gen));
        for (int j1 = b1.jmin; j1 <= b1.jmax; ++j1) {
            Spectrum p1 = s;
            multiply_axis(p1, 1, lp_symbol(g, {LPKind::Delta, j1, 1}, gen));
            for (const auto& m : m2) {
                Spectrum p = p1;
                multiply_axis(p, 2, m);
                p.zero_nyquist();
                add_piece(p);
            }
        }
    }
    for (std::size_t i = 0; i < acc.size(); ++i) out.values[i] = std::sqrt(acc[i]);
    return out;
}

SampledFunction sup_function(const SampledFunction& f, LPKind kind1, LPKind kind2,
                             const GeneratorSet& gen) {
    for (LPKind k : {kind1, kind2})
        if (k != LPKind::Delta && k != LPKind::S) throw InvalidInput("sup function takes Delta or S");
    const GridSpec& g = f.grid;
    const Spectrum s = dft(f);
    const ScaleBand b1 = scale_band(g, 1), b2 = scale_band(g, 2);
    std::vector<double> best(g.size(), 0.0);
    for (int k1 = b1.jmin; k1 <= b1.jmax; ++k1) {
        Spectrum p1 = s;
        multiply_axis(p1, 1, lp_symbol(g, {kind1, k1, 1}, gen));
        for (int k2 = b2.jmin; k2 <= b2.jmax; ++k2) {
            Spectrum p = p1;
            multiply_axis(p, 2, lp_symbol(g, {kind2, k2, 2}, gen));
            p.zero_nyquist();
            const auto v = idft(p);
            for (std::size_t i = 0; i < best.size(); ++i) best[i] = std::max(best[i], std::abs(v.values[i]));
        }
    }
    SampledFunction out(g);
    for (std::size_t i = 0; i < best.size(); ++i) out.values[i] = best[i];
    return out;
}

double tail_identity_check(const SampledFunction& f, int k1, int k2, const GeneratorSet& gen, int gap) {
    const GridSpec& g = f.grid;
    const ScaleBand b1 = scale_band(g, 1), b2 = scale_band(g, 2);
    if (!b1.contains(k1) || !b2.contains(k2) || !b1.contains(k1 + gap) || !b2.contains(k2 + gap))
        throw ScaleError("tail scales k + gap must lie in the band");
    const Spectrum s = dft(f);

    // left side: literal double sum of Delta_{j1} Delta_{j2} f
    SampledFunction lhs(g);
    for (int j1 = k1 + gap; j1 <= b1.jmax; ++j1) {
        const auto a = apply_lp(f, {LPKind::Delta, j1, 1}, gen);
        for (int j2 = k2 + gap; j2 <= b2.jmax; ++j2) {
            const auto piece = apply_lp(a, {LPKind::Delta, j2, 2}, gen);
            for (std::size_t i = 0; i < lhs.values.size(); ++i) lhs.values[i] += piece.values[i];
        }
    }

    // right side: operator composition
    Spectrum r = s;
    for (int ax : {1, 2}) {
        const int k = ax == 1 ? k1 : k2;
        auto band = band_sum_symbol(g, ax, gen);
        auto tilde = lp_symbol(g, {LPKind::DeltaTilde, k, ax}, gen, gap);
        auto low = lp_symbol(g, {LPKind::S, k, ax}, gen);
        std::vector<double> diff(band.size()), high(low.size());
        for (std::size_t i = 0; i < band.size(); ++i) {
            diff[i] = band[i] - tilde[i];
            high[i] = 1.0 - low[i];
        }
        multiply_axis(r, ax, diff);
        multiply_axis(r, ax, high);
    }
    r.zero_nyquist();
    const auto rhs = idft(r);
    const double nf = l2_norm(f);
    const double nd = l2_norm(lhs - rhs);
    return nf > 0.0 ? nd / nf : nd;
}

}  // namespace flagmult

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "flagmult/analysis.hpp"

namespace flagmult {
namespace {

double uniform(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; }

// smooth profile equal to 1 at the band centre and vanishing just outside [lo, hi]
double band_profile(const GeneratorSet& gen, const Band& b, double t) {
    const double c = 0.5 * (b.lo + b.hi), hw = 0.5 * (b.hi - b.lo);
    return gen.Phi(2.0 * std::abs(t - c) / (hw + 0.5));
}

bool in_band_abs(const Band& b, int k) { return std::abs(k) >= b.lo && std::abs(k) <= b.hi; }

Spectrum base_member(const TestFamilySpec& spec, const Band& b, int slot, const GridSpec& G,
                     const GeneratorSet& gen) {
    Spectrum s(G);
    std::mt19937_64 rng(std::uint64_t(spec.seed) * 7919u + std::uint64_t(slot));
    switch (spec.kind) {
        case FamilyKind::Dilated:
            for (int k1 = -b.hi; k1 <= b.hi; ++k1)
                for (int k2 = -b.hi; k2 <= b.hi; ++k2)
                    if (in_band_abs(b, k1) && in_band_abs(b, k2))
                        s.at(k1, k2) = band_profile(gen, b, std::abs(k1)) * band_profile(gen, b, std::abs(k2));
            break;
        case FamilyKind::Modulated:
            for (int k1 = b.lo; k1 <= b.hi; ++k1)
                for (int k2 = b.lo; k2 <= b.hi; ++k2)
                    s.at(k1, k2) = band_profile(gen, b, k1) * band_profile(gen, b, k2);
            break;
        case FamilyKind::Tensor: {
            std::vector<cplx> a(2 * b.hi + 1), c(2 * b.hi + 1);
            for (auto* v : {&a, &c})
                for (int k = -b.hi; k <= b.hi; ++k) {
                    const double re = uniform(rng), im = uniform(rng);
                    (*v)[k + b.hi] = in_band_abs(b, k) ? cplx(re, im) : 0.0;
                }
            for (int k1 = -b.hi; k1 <= b.hi; ++k1)
                for (int k2 = -b.hi; k2 <= b.hi; ++k2) s.at(k1, k2) = a[k1 + b.hi] * c[k2 + b.hi];
            break;
        }
        case FamilyKind::Random:
            for (int k1 = -b.hi; k1 <= b.hi; ++k1)
                for (int k2 = -b.hi; k2 <= b.hi; ++k2) {
                    const double re = uniform(rng), im = uniform(rng);
                    if (in_band_abs(b, k1) && in_band_abs(b, k2)) s.at(k1, k2) = cplx(re, im);
                }
            break;
    }
    return s;
}

Spectrum dilate_spectrum(const Spectrum& s, int octave, double floor) {
    if (octave < 0) throw ScaleError("dilation octave must be non-negative");
    const GridSpec& G = s.grid;
    Spectrum out(G);
    const long m = 1L << octave;
    for (int i1 = 0; i1 < G.N1; ++i1)
        for (int i2 = 0; i2 < G.N2; ++i2) {
            const cplx c = s.coeffs[std::size_t(i1) * G.N2 + i2];
            if (std::abs(c) <= floor) continue;
            const long K1 = GridSpec::freq(i1, G.N1) * m, K2 = GridSpec::freq(i2, G.N2) * m;
            if (std::abs(K1) >= G.N1 / 2 || std::abs(K2) >= G.N2 / 2) throw ScaleError("dilation leaves the band");
            out.at(int(K1), int(K2)) = c;
        }
    return out;
}

SampledFunction translate(const SampledFunction& f, int t1, int t2) {
    const GridSpec& G = f.grid;
    SampledFunction out(G);
    for (int i1 = 0; i1 < G.N1; ++i1)
        for (int i2 = 0; i2 < G.N2; ++i2)
            out(((i1 + t1) % G.N1 + G.N1) % G.N1, ((i2 + t2) % G.N2 + G.N2) % G.N2) = f(i1, i2);
    return out;
}

// outer p1 / inner q norm with optional 1D weights; the same arithmetic with or without weights
double scan_norm(const SampledFunction& f, double p, double q, const ScanWeights* w) {
    if (w) return weighted_mixed_norm(f, p, w->w1, q, w->w2);
    return mixed_norm(f, p, q);
}

void fft_vec(CVec& v, int sign) { fft1(v, int(v.size()), sign); }

}  // namespace

FamilyKind parse_family_kind(const std::string& s) {
    if (s == "dilated") return FamilyKind::Dilated;
    if (s == "modulated") return FamilyKind::Modulated;
    if (s == "tensor") return FamilyKind::Tensor;
    if (s == "random") return FamilyKind::Random;
    throw InvalidInput("unknown family kind: " + s);
}

std::string to_string(FamilyKind k) {
    switch (k) {
        case FamilyKind::Dilated: return "dilated";
        case FamilyKind::Modulated: return "modulated";
        case FamilyKind::Tensor: return "tensor";
        case FamilyKind::Random: return "random";
    }
    return "?";
}

SampledFunction dilate(const SampledFunction& f, int octave) {
    // coefficients at roundoff level are not part of the function's spectrum
    const Spectrum s = dft(f);
    double mx = 0.0;
    for (const auto& c : s.coeffs) mx = std::max(mx, std::abs(c));
    return idft(dilate_spectrum(s, octave, 1e-13 * mx));
}

std::vector<FamilyMember> make_family(const TestFamilySpec& spec, const GridSpec& G, const GeneratorSet& gen) {
    if (spec.octaves < 1 || spec.translations < 1) throw InvalidInput("family needs at least one member");
    for (const Band* b : {&spec.f, &spec.g, &spec.h}) {
        if (b->lo < 0 || b->hi < b->lo) throw InvalidInput("family band must satisfy 0 <= lo <= hi");
        const long top = long(b->hi) << (spec.octaves - 1);
        if (top >= G.N1 / 2 || top >= G.N2 / 2) throw ScaleError("family does not fit in the band");
    }
    const Spectrum f0 = base_member(spec, spec.f, 0, G, gen), g0 = base_member(spec, spec.g, 1, G, gen),
                   h0 = base_member(spec, spec.h, 2, G, gen);
    std::vector<FamilyMember> out;
    int id = 0;
    for (int o = 0; o < spec.octaves; ++o) {
        const SampledFunction f = idft(dilate_spectrum(f0, o, 0.0)), g = idft(dilate_spectrum(g0, o, 0.0)),
                              h = idft(dilate_spectrum(h0, o, 0.0));
        for (int t = 0; t < spec.translations; ++t) {
            const int t1 = t * (G.N1 / 8 + 1), t2 = t * (G.N2 / 16 + 3);
            FamilyMember m;
            m.id = id++;
            m.octave = o;
            m.translation = t;
            m.f = translate(f, t1, t2);
            m.g = translate(g, t1, t2);
            m.h = translate(h, t1, t2);
            out.push_back(std::move(m));
        }
    }
    return out;
}

ScanReport bound_scan(const TrilinearOp& op, const ExponentTuple& ex, const TestFamilySpec& family,
                      const GridSpec& grid, const GeneratorSet& gen, const ScanWeights* weights) {
    ex.validate();
    if (weights && (int(weights->w1.size()) != grid.N1 || int(weights->w2.size()) != grid.N2))
        throw InvalidInput("weight factor length");
    ScanReport rep;
    rep.quasi = ex.quasi();
    const double q2 = ex.mixed ? ex.q2 : ex.p2, q3 = ex.mixed ? ex.q3 : ex.p3;
    for (const auto& m : make_family(family, grid, gen)) {
        ScanMember s;
        s.id = m.id;
        s.octave = m.octave;
        s.translation = m.translation;
        s.nf = scan_norm(m.f, ex.p1, ex.p1, weights);
        s.ng = scan_norm(m.g, ex.p2, q2, weights);
        s.nh = scan_norm(m.h, ex.p3, q3, weights);
        const double den = s.nf * s.ng * s.nh;
        if (den == 0.0) throw DegenerateInput("family member with zero norm");
        s.nout = scan_norm(op(m.f, m.g, m.h), ex.r, ex.r, weights);
        s.ratio = s.nout / den;
        rep.members.push_back(s);
    }
    rep.max = 0.0;
    rep.min = std::numeric_limits<double>::infinity();
    for (const auto& s : rep.members) {
        rep.max = std::max(rep.max, s.ratio);
        rep.min = std::min(rep.min, s.ratio);
    }
    rep.flatness = rep.min > 0.0 ? rep.max / rep.min : std::numeric_limits<double>::infinity();
    return rep;
}

CVec bilinear_1d(const ParamFactor& m2, const CVec& g, const CVec& h, double L) {
    const int N = int(g.size());
    if (int(h.size()) != N || N < 2 || N % 2) throw InvalidInput("bilinear_1d needs equal even lengths");
    if (!m2.has_rank()) throw SymbolError("bilinear_1d needs a factor with rank terms");
    CVec a = g, b = h;
    fft_vec(a, -1);
    fft_vec(b, -1);
    a[N / 2] = b[N / 2] = 0.0;
    const int M = 2 * N;
    CVec acc(M, 0.0), u(M), v(M);
    for (const auto& t : m2.terms) {
        std::fill(u.begin(), u.end(), cplx(0.0));
        std::fill(v.begin(), v.end(), cplx(0.0));
        bool any_u = false, any_v = false;
        for (int i = 0; i < N; ++i) {
            const int k = GridSpec::freq(i, N);
            const double x = double(k) / L;
            const double wb = t.b ? t.b(x) : 1.0, ww = t.w ? t.w(x) : 1.0;
            u[GridSpec::index(k, M)] = wb * a[i] / double(N);
            v[GridSpec::index(k, M)] = ww * b[i] / double(N);
            any_u = any_u || (wb != 0.0 && a[i] != 0.0);
            any_v = any_v || (ww != 0.0 && b[i] != 0.0);
        }
        if (!any_u || !any_v) continue;
        fft_vec(u, +1);
        fft_vec(v, +1);
        for (int i = 0; i < M; ++i) acc[i] += t.c * u[i] * v[i];
    }
    fft_vec(acc, -1);
    CVec out(N, 0.0);
    for (int K = -N / 2 + 1; K < N / 2; ++K) out[GridSpec::index(K, N)] = acc[GridSpec::index(K, M)] / double(M);
    fft_vec(out, +1);
    return out;
}

GrowthReport endpoint_probe(const GeneratorSet& gen, const std::vector<int>& resolutions, int shift, double a) {
    if (resolutions.empty()) throw InvalidInput("no resolutions");
    const ParamFactor m2 = library_flag(gen, shift).m2.factors[0];
    GrowthReport rep;
    auto clean = [](CVec v) {
        const int N = int(v.size());
        fft_vec(v, -1);
        v[N / 2] = 0.0;
        for (auto& c : v) c /= double(N);
        fft_vec(v, +1);
        return v;
    };
    auto maxabs = [](const CVec& v) {
        double m = 0.0;
        for (const auto& c : v) m = std::max(m, std::abs(c));
        return m;
    };
    auto pnorm = [](const CVec& v, double p) {
        double s = 0.0;
        for (const auto& c : v) s += std::pow(std::abs(c), p);
        return std::pow(s / double(v.size()), 1.0 / p);
    };
    for (int N : resolutions) {
        if (N < 8 || N % 2) throw InvalidInput("resolutions must be even and at least 8");
        CVec g(N), h(N);
        for (int y = 0; y < N; ++y) {
            const double d = std::max(double(std::min(y, N - y)), 1.0) / N;
            g[y] = std::polar(1.0, a * std::log(d));
            h[y] = std::conj(g[y]);
        }
        const CVec gc = clean(g), hc = clean(h);
        const CVec B = bilinear_1d(m2, gc, hc, 1.0);
        GrowthRow row;
        row.N = N;
        const double r1 = maxabs(B) / (maxabs(gc) * maxabs(hc));
        const double c1 = pnorm(B, 4.0 / 3.0) / (pnorm(gc, 4.0) * pnorm(hc, 4.0));
        row.ratio = r1 * r1;
        row.control = c1 * c1;
        rep.rows.push_back(row);
    }
    rep.increasing = true;
    double cmin = std::numeric_limits<double>::infinity(), cmax = 0.0;
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        if (i > 0 && !(rep.rows[i].ratio > rep.rows[i - 1].ratio)) rep.increasing = false;
        cmin = std::min(cmin, rep.rows[i].control);
        cmax = std::max(cmax, rep.rows[i].control);
    }
    rep.control_flatness = cmin > 0.0 ? cmax / cmin : std::numeric_limits<double>::infinity();
    const int N = resolutions.front();
    const CVec one(N, 1.0);
    const double r1 = maxabs(bilinear_1d(m2, one, one, 1.0));
    rep.constant_ratio = r1 * r1;
    return rep;
}

}  // namespace flagmult

#include "flagmult/paraprod.hpp"

#include <algorithm>
#include <cmath>

#include "flagmult/parallel.hpp"

namespace flagmult {
namespace {

const double kPi = std::acos(-1.0);

// 2^scale L positions; must be an integer dividing N
int positions(int scale, int N, double L) {
    if (scale < 0) throw ScaleError("interval lengths are at most 1 (scale >= 0)");
    const double P = std::ldexp(L, scale);
    const long Pi = std::lround(P);
    if (std::abs(P - double(Pi)) > 1e-9 || Pi < 1) throw ScaleError("2^scale * L must be a positive integer");
    if (Pi > N || N % Pi != 0) throw ScaleError("position lattice does not divide the grid");
    return int(Pi);
}

// coefficients summed over k = kappa mod (P1, P2), then evaluated at the lattice
// x = (n1 L1 / P1, n2 L2 / P2)
CVec at_lattice(const CVec& c, int N1, int N2, int P1, int P2, double area) {
    CVec a(std::size_t(P1) * P2, 0.0);
    for (int i1 = 0; i1 < N1; ++i1)
        for (int i2 = 0; i2 < N2; ++i2) a[std::size_t(i1 % P1) * P2 + i2 % P2] += c[std::size_t(i1) * N2 + i2];
    fft2(a, P1, P2, +1);
    for (auto& v : a) v /= area;
    return a;
}

struct Axis {
    int N;
    double L;
};

// <F, phi_{i,n1} (x) phi_{i',n2}> for all lattice positions
CVec analysis(const CVec& F, const CVec& b1, const CVec& b2, const Axis& A1, const Axis& A2, int P1, int P2) {
    CVec c(F.size());
    for (int i1 = 0; i1 < A1.N; ++i1)
        for (int i2 = 0; i2 < A2.N; ++i2) {
            const std::size_t k = std::size_t(i1) * A2.N + i2;
            c[k] = F[k] * std::conj(b1[i1] * b2[i2]);
        }
    return at_lattice(c, A1.N, A2.N, P1, P2, A1.L * A2.L);
}

// spectrum of sum_n a_n phi_{i,n1} (x) phi_{i',n2}, accumulated into S
void synthesis(CVec a, const CVec& b1, const CVec& b2, const Axis& A1, const Axis& A2, int P1, int P2, CVec& S) {
    fft2(a, P1, P2, -1);
    for (int i1 = 0; i1 < A1.N; ++i1)
        for (int i2 = 0; i2 < A2.N; ++i2)
            S[std::size_t(i1) * A2.N + i2] += b1[i1] * b2[i2] * a[std::size_t(i1 % P1) * P2 + i2 % P2];
}

double spectral_l2(const CVec& S, double area) {
    double s = 0.0;
    for (const auto& v : S) s += std::norm(v);
    return std::sqrt(s / area);
}

std::vector<int> scales(const ScaleRange& r) {
    std::vector<int> v;
    for (int s = r.lo; s <= r.hi; ++s) v.push_back(s);
    return v;
}

SampledFunction model_sum(const ModelSpec& spec, const SampledFunction& f, const SampledFunction& g,
                          const SampledFunction& h, const GeneratorSet& gen, int k0, bool coupled,
                          std::vector<ModelTerm>* terms) {
    spec.validate();
    const GridSpec& G = f.grid;
    if (g.grid != G || h.grid != G) throw InvalidInput("inputs live on different grids");
    if (coupled && k0 < 0) throw InvalidInput("k0 must be non-negative");
    if (spec.slack < 0) throw InvalidInput("slack must be non-negative");
    const Axis A1{G.N1, G.L1}, A2{G.N2, G.L2};
    const double area = G.area();
    auto admissible = [&](int i, int j) {
        if (j > i) return false;
        return !coupled || std::abs(i - j - k0) <= spec.slack;
    };

    // bump spectra per slot, axis and scale
    auto bumps = [&](const std::array<BumpType, 3>& types, int slot, const Axis& A, const ScaleRange& r) {
        std::vector<CVec> out;
        const BumpFamily fam(types[std::size_t(slot)], gen);
        for (int s : scales(r)) {
            positions(s, A.N, A.L);
            out.push_back(fam.spectrum(s, A.N, A.L));
        }
        return out;
    };
    std::array<std::vector<CVec>, 3> bI1, bI2, bJ1, bJ2;
    for (int s = 0; s < 3; ++s) {
        bI1[s] = bumps(spec.I, s, A1, spec.I1);
        bI2[s] = bumps(spec.I, s, A2, spec.I2);
        bJ1[s] = bumps(spec.J, s, A1, spec.J1);
        bJ2[s] = bumps(spec.J, s, A2, spec.J2);
    }
    if (terms) terms->clear();
    if (spec.I1.empty() || spec.I2.empty() || spec.J1.empty() || spec.J2.empty()) return SampledFunction(G);

    const Spectrum fs = dft(f), gs = dft(g), hs = dft(h);

    // inner sums per J scale pair
    const auto j1s = scales(spec.J1), j2s = scales(spec.J2);
    std::vector<CVec> TJ(j1s.size() * j2s.size());
    parallel_for(TJ.size(), [&](std::size_t q) {
        const std::size_t a = q / j2s.size(), b = q % j2s.size();
        const int j1 = j1s[a], j2 = j2s[b];
        const int P1 = positions(j1, A1.N, A1.L), P2 = positions(j2, A2.N, A2.L);
        CVec cg = analysis(gs.coeffs, bJ1[0][a], bJ2[0][b], A1, A2, P1, P2);
        const CVec ch = analysis(hs.coeffs, bJ1[1][a], bJ2[1][b], A1, A2, P1, P2);
        const double w = std::ldexp(1.0, j1 + j2), sw = std::sqrt(w);
        for (std::size_t i = 0; i < cg.size(); ++i) cg[i] *= ch[i] * sw;
        TJ[q].assign(G.size(), 0.0);
        synthesis(std::move(cg), bJ1[2][a], bJ2[2][b], A1, A2, P1, P2, TJ[q]);
    });

    const auto i1s = scales(spec.I1), i2s = scales(spec.I2);
    std::vector<CVec> part(i1s.size() * i2s.size());
    std::vector<std::vector<ModelTerm>> rec(part.size());
    parallel_for(part.size(), [&](std::size_t q) {
        const std::size_t a = q / i2s.size(), b = q % i2s.size();
        const int i1 = i1s[a], i2 = i2s[b];
        const int P1 = positions(i1, A1.N, A1.L), P2 = positions(i2, A2.N, A2.L);
        const double sw = std::sqrt(std::ldexp(1.0, i1 + i2));
        std::vector<std::size_t> adm;
        for (std::size_t u = 0; u < j1s.size(); ++u)
            for (std::size_t v = 0; v < j2s.size(); ++v)
                if (admissible(i1, j1s[u]) && admissible(i2, j2s[v])) adm.push_back(u * j2s.size() + v);
        if (adm.empty()) return;
        CVec cf = analysis(fs.coeffs, bI1[0][a], bI2[0][b], A1, A2, P1, P2);
        for (auto& v : cf) v *= sw;
        part[q].assign(G.size(), 0.0);
        auto block = [&](const CVec& B, CVec& S) {
            CVec c = analysis(B, bI1[1][a], bI2[1][b], A1, A2, P1, P2);
            for (std::size_t i = 0; i < c.size(); ++i) c[i] *= cf[i];
            synthesis(std::move(c), bI1[2][a], bI2[2][b], A1, A2, P1, P2, S);
        };
        if (!terms) {
            CVec B(G.size(), 0.0);
            for (std::size_t t : adm)
                for (std::size_t i = 0; i < B.size(); ++i) B[i] += TJ[t][i];
            block(B, part[q]);
            return;
        }
        for (std::size_t t : adm) {
            CVec S(G.size(), 0.0);
            block(TJ[t], S);
            rec[q].push_back({i1, i2, j1s[t / j2s.size()], j2s[t % j2s.size()], spectral_l2(S, area)});
            for (std::size_t i = 0; i < S.size(); ++i) part[q][i] += S[i];
        }
    });

    Spectrum out(G);
    for (std::size_t q = 0; q < part.size(); ++q) {
        if (part[q].empty()) continue;
        for (std::size_t i = 0; i < out.coeffs.size(); ++i) out.coeffs[i] += part[q][i];
        if (terms) terms->insert(terms->end(), rec[q].begin(), rec[q].end());
    }
    return idft(out);
}

double torus_dist(double x, const DyadicInterval& I, double L) {
    const double len = I.length();
    double y = std::fmod(x - I.left(), L);
    if (y < 0) y += L;
    if (y <= len) return 0.0;
    return std::min(y - len, L - y);
}

}  // namespace

DyadicInterval DyadicInterval::make(int scale, long n, double L) {
    if (scale < 0) throw InvalidInput("dyadic intervals have length at most 1");
    const double P = std::ldexp(L, scale);
    if (n < 0 || double(n) >= P - 1e-12) throw InvalidInput("interval position outside the axis");
    return {scale, n};
}

CVec BumpFamily::spectrum(int scale, int N, double L) const {
    if (scale < 0) throw ScaleError("scale must be non-negative");
    const double s = std::ldexp(1.0, scale);
    // outer edge of the profile support, in integer frequencies
    const double edge = (type == BumpType::Lacunary ? 7.0 / 6.0 : 8.0 / 3.0) * s * L;
    if (edge > 0.5 * N) throw ScaleError("bump spectrum reaches the Nyquist frequency");
    CVec c(std::size_t(N), 0.0);
    double lo = INFINITY, hi = -INFINITY, e = 0.0;
    for (int i = 0; i < N; ++i) {
        const int k = GridSpec::freq(i, N);
        const double xi = double(k) / L;
        const double v = type == BumpType::Lacunary ? gen.Phi(12.0 * std::abs(xi / s - 1.0)) : gen.phi(3.0 * xi / (32.0 * s));
        if (v == 0.0) continue;
        c[std::size_t(i)] = v;
        lo = std::min(lo, xi);
        hi = std::max(hi, xi);
        e += v * v;
    }
    if (e == 0.0) throw FamilyError("bump spectrum is empty on this grid");
    if (type == BumpType::Lacunary) {
        // 0 outside 5 omega and outside the disc of radius |I|^-1 / 5
        const double center = 0.5 * (lo + hi), half = 2.5 * (hi - lo);
        if (!(lo > s / 5.0) || !(center - half > 0.0)) throw FamilyError("lacunary spectrum too close to 0");
    } else if (std::abs(lo + hi) > 1e-12 || hi > 4.0 * s) {
        throw FamilyError("non-lacunary spectrum not symmetric of width ~ |I|^-1");
    }
    const double norm = std::sqrt(e / L);
    for (auto& v : c) v /= norm;
    return c;
}

CVec BumpFamily::sample(const DyadicInterval& I, int N, double L) const {
    const CVec c = spectrum(I.scale, N, L);
    CVec out(std::size_t(N), 0.0);
    for (int m = 0; m < N; ++m) {
        const double x = double(m) * L / N;
        cplx s = 0.0;
        for (int i = 0; i < N; ++i) {
            if (c[std::size_t(i)] == 0.0) continue;
            const int k = GridSpec::freq(i, N);
            s += c[std::size_t(i)] * std::polar(1.0, 2.0 * kPi * k * (x - I.left()) / L);
        }
        out[std::size_t(m)] = s / L;
    }
    return out;
}

std::array<BumpType, 3> ModelSpec::j_pattern(int slot) {
    if (slot < 0 || slot > 3) throw FamilyError("non-lacunary slot must be 0..3");
    std::array<BumpType, 3> t{BumpType::Lacunary, BumpType::Lacunary, BumpType::Lacunary};
    if (slot > 0) t[std::size_t(slot - 1)] = BumpType::NonLacunary;
    return t;
}

void ModelSpec::validate() const {
    if (I[0] != BumpType::Lacunary || I[1] != BumpType::NonLacunary || I[2] != BumpType::Lacunary)
        throw FamilyError("I families must be (lacunary, non-lacunary, lacunary)");
    const int lac = int(std::count(J.begin(), J.end(), BumpType::Lacunary));
    if (lac < 2) throw FamilyError("at least two J families must be lacunary");
}

SampledFunction model_T1(const ModelSpec& spec, const SampledFunction& f, const SampledFunction& g,
                         const SampledFunction& h, const GeneratorSet& gen, std::vector<ModelTerm>* terms) {
    return model_sum(spec, f, g, h, gen, 0, false, terms);
}

SampledFunction model_T1_k0(const ModelSpec& spec, const SampledFunction& f, const SampledFunction& g,
                            const SampledFunction& h, const GeneratorSet& gen, int k0,
                            std::vector<ModelTerm>* terms) {
    return model_sum(spec, f, g, h, gen, k0, true, terms);
}

std::vector<double> cutoff_1d(const DyadicInterval& I, int N, double L) {
    std::vector<double> c(static_cast<std::size_t>(N));
    for (int m = 0; m < N; ++m) c[std::size_t(m)] = std::pow(1.0 + torus_dist(double(m) * L / N, I, L) / I.length(), -100.0);
    return c;
}

SampledFunction approximate_cutoff(const DyadicInterval& I1, const DyadicInterval& I2, const GridSpec& grid) {
    const auto c1 = cutoff_1d(I1, grid.N1, grid.L1), c2 = cutoff_1d(I2, grid.N2, grid.L2);
    SampledFunction out(grid);
    for (int a = 0; a < grid.N1; ++a)
        for (int b = 0; b < grid.N2; ++b) out(a, b) = c1[std::size_t(a)] * c2[std::size_t(b)];
    return out;
}

namespace {

// periodized cos^2 window centred at n on an axis of integer length L
std::vector<double> window_1d(int n, int N, double L) {
    if (L < 1.0 || std::abs(L - std::round(L)) > 1e-12) throw InvalidInput("windows need an integer axis length");
    std::vector<double> w(std::size_t(N), 0.0);
    for (int m = 0; m < N; ++m) {
        const double x = double(m) * L / N;
        for (int s = -2; s <= 2; ++s) {
            const double t = x - n - s * L;
            if (std::abs(t) < 1.0) w[std::size_t(m)] += std::pow(std::cos(0.5 * kPi * t), 2);
        }
    }
    return w;
}

}  // namespace

SampledFunction unit_window(int n, int m, const GridSpec& grid) {
    const auto w1 = window_1d(n, grid.N1, grid.L1), w2 = window_1d(m, grid.N2, grid.L2);
    SampledFunction out(grid);
    for (int a = 0; a < grid.N1; ++a)
        for (int b = 0; b < grid.N2; ++b) out(a, b) = w1[std::size_t(a)] * w2[std::size_t(b)];
    return out;
}

double localized_estimate_check(const SampledFunction& out, int n, int m, const SampledFunction& f,
                                const SampledFunction& g, const SampledFunction& h, const ExponentTuple& ex) {
    ex.validate();
    const GridSpec& G = out.grid;
    if (f.grid != G || g.grid != G || h.grid != G) throw InvalidInput("inputs live on different grids");
    const SampledFunction chi = approximate_cutoff(DyadicInterval::make(0, n, G.L1), DyadicInterval::make(0, m, G.L2), G);
    const double nf = lp_norm(f * chi, ex.p1);
    const double ng = ex.mixed ? mixed_norm(g * chi, ex.p2, ex.q2) : lp_norm(g * chi, ex.p2);
    const double nh = ex.mixed ? mixed_norm(h * chi, ex.p3, ex.q3) : lp_norm(h * chi, ex.p3);
    const double den = nf * ng * nh;
    if (den == 0.0) throw DegenerateInput("localized input norm vanishes");
    return lp_norm(out, ex.r) / den;
}

}  // namespace flagmult

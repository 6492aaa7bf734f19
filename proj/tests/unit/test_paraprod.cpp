#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <tuple>

#include "flagmult/paraprod.hpp"

using namespace flagmult;

namespace {

SampledFunction band_function(const GridSpec& g, int hi, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    ModeList ml;
    for (int a = -hi; a <= hi; ++a)
        for (int b = -hi; b <= hi; ++b) ml.push_back({a, b, cplx(nd(rng), nd(rng))});
    return from_modes(g, ml);
}

// physical-space evaluation of the model sum: bumps sampled by direct summation,
// inner products by Riemann sums, every interval visited explicitly
struct BruteModel {
    const ModelSpec& spec;
    const GridSpec& G;
    const GeneratorSet& gen;
    int k0 = -1;  // < 0: plain constraint

    CVec bump(const std::array<BumpType, 3>& t, int slot, int axis, int scale, long n) const {
        const BumpFamily fam(t[std::size_t(slot)], gen);
        const double L = G.len(axis);
        return fam.sample(DyadicInterval::make(scale, n, L), G.n(axis), L);
    }
    cplx inner(const SampledFunction& F, const CVec& a, const CVec& b) const {
        cplx s = 0.0;
        for (int i = 0; i < G.N1; ++i)
            for (int j = 0; j < G.N2; ++j) s += F(i, j) * std::conj(a[std::size_t(i)] * b[std::size_t(j)]);
        return s * G.cell_area();
    }
    void add(SampledFunction& out, cplx c, const CVec& a, const CVec& b) const {
        for (int i = 0; i < G.N1; ++i)
            for (int j = 0; j < G.N2; ++j) out(i, j) += c * a[std::size_t(i)] * b[std::size_t(j)];
    }
    bool ok(int i, int j) const { return j <= i && (k0 < 0 || std::abs(i - j - k0) <= spec.slack); }
    long count(int axis, int s) const { return std::lround(std::ldexp(G.len(axis), s)); }

    SampledFunction operator()(const SampledFunction& f, const SampledFunction& g, const SampledFunction& h) const {
        SampledFunction out(G);
        for (int i1 = spec.I1.lo; i1 <= spec.I1.hi; ++i1)
            for (int i2 = spec.I2.lo; i2 <= spec.I2.hi; ++i2) {
                SampledFunction B(G);
                for (int j1 = spec.J1.lo; j1 <= spec.J1.hi; ++j1)
                    for (int j2 = spec.J2.lo; j2 <= spec.J2.hi; ++j2) {
                        if (!ok(i1, j1) || !ok(i2, j2)) continue;
                        for (long n1 = 0; n1 < count(1, j1); ++n1)
                            for (long n2 = 0; n2 < count(2, j2); ++n2) {
                                const cplx c = std::sqrt(std::ldexp(1.0, j1 + j2)) *
                                               inner(g, bump(spec.J, 0, 1, j1, n1), bump(spec.J, 0, 2, j2, n2)) *
                                               inner(h, bump(spec.J, 1, 1, j1, n1), bump(spec.J, 1, 2, j2, n2));
                                add(B, c, bump(spec.J, 2, 1, j1, n1), bump(spec.J, 2, 2, j2, n2));
                            }
                    }
                for (long n1 = 0; n1 < count(1, i1); ++n1)
                    for (long n2 = 0; n2 < count(2, i2); ++n2) {
                        const cplx c = std::sqrt(std::ldexp(1.0, i1 + i2)) *
                                       inner(f, bump(spec.I, 0, 1, i1, n1), bump(spec.I, 0, 2, i2, n2)) *
                                       inner(B, bump(spec.I, 1, 1, i1, n1), bump(spec.I, 1, 2, i2, n2));
                        add(out, c, bump(spec.I, 2, 1, i1, n1), bump(spec.I, 2, 2, i2, n2));
                    }
            }
        return out;
    }
};

ModelSpec ranges(int lo, int hi) {
    ModelSpec s;
    s.I1 = s.I2 = s.J1 = s.J2 = ScaleRange{lo, hi};
    return s;
}

SampledFunction compact_bump(const GridSpec& G, double c1, double c2, double rad) {
    const double pi = std::acos(-1.0);
    return SampledFunction::from_callable(G, [=](double x, double y) -> cplx {
        const double a = x - c1, b = y - c2;
        if (std::abs(a) >= rad || std::abs(b) >= rad) return 0.0;
        return std::pow(std::cos(0.5 * pi * a / rad), 2) * std::pow(std::cos(0.5 * pi * b / rad), 2);
    });
}

}  // namespace

TEST_CASE("dyadic intervals") {
    const auto I = DyadicInterval::make(3, 5, 1.0);
    CHECK(I.length() == 0.125);
    CHECK(I.left() == 0.625);
    CHECK_NOTHROW(DyadicInterval::make(0, 1, 2.0));
    CHECK_THROWS_AS(DyadicInterval::make(0, 2, 2.0), InvalidInput);
    CHECK_THROWS_AS(DyadicInterval::make(-1, 0, 1.0), InvalidInput);
    CHECK_THROWS_AS(DyadicInterval::make(2, -1, 1.0), InvalidInput);
}

TEST_CASE("bump families") {
    const auto gen = make_generators();
    for (double L : {1.0, 2.0})
        for (auto t : {BumpType::Lacunary, BumpType::NonLacunary}) {
            const BumpFamily fam(t, gen);
            for (int s = 0; s <= 4; ++s) {
                const int N = 256;
                const auto I = DyadicInterval::make(s, std::lround(std::ldexp(L, s)) - 1, L);
                const CVec v = fam.sample(I, N, L);
                double e = 0.0;
                for (const auto& x : v) e += std::norm(x) * L / N;
                CHECK(std::sqrt(e) == doctest::Approx(1.0).epsilon(1e-10));
                const CVec c = fam.spectrum(s, N, L);
                const double sc = std::ldexp(1.0, s);
                for (int i = 0; i < N; ++i) {
                    if (c[std::size_t(i)] == 0.0) continue;
                    const double xi = GridSpec::freq(i, N) / L;
                    if (t == BumpType::Lacunary) {
                        CHECK(xi > sc / 5.0);
                        CHECK(xi >= sc * 5.0 / 6.0 - 1e-12);
                        CHECK(xi <= sc * 7.0 / 6.0 + 1e-12);
                    } else {
                        CHECK(std::abs(xi) <= sc * 8.0 / 3.0 + 1e-12);
                    }
                }
            }
        }
    // lacunary support near 2^5 * 7/6 reaches the Nyquist frequency at N = 64
    CHECK_THROWS_AS(BumpFamily(BumpType::Lacunary, gen).spectrum(5, 64, 1.0), ScaleError);
}

TEST_CASE("family types") {
    ModelSpec s = ranges(0, 1);
    CHECK_NOTHROW(s.validate());
    for (int slot = 0; slot <= 3; ++slot) {
        s.J = ModelSpec::j_pattern(slot);
        CHECK_NOTHROW(s.validate());
    }
    CHECK_THROWS_AS(ModelSpec::j_pattern(4), FamilyError);
    s.J = {BumpType::NonLacunary, BumpType::NonLacunary, BumpType::Lacunary};
    CHECK_THROWS_AS(s.validate(), FamilyError);
    s.J = ModelSpec::j_pattern(1);
    s.I = {BumpType::Lacunary, BumpType::Lacunary, BumpType::Lacunary};
    CHECK_THROWS_AS(s.validate(), FamilyError);
    const auto gen = make_generators();
    const GridSpec G(16, 16);
    const auto f = band_function(G, 3, 1);
    CHECK_THROWS_AS(model_T1(s, f, f, f, gen), FamilyError);
}

TEST_CASE("single interval pair") {
    // scale 0 on a unit torus: one I and one J per axis
    const auto gen = make_generators();
    const GridSpec G(16, 16);
    ModelSpec s = ranges(0, 0);
    s.J = ModelSpec::j_pattern(3);
    const auto f = band_function(G, 3, 1), g = band_function(G, 3, 2), h = band_function(G, 3, 3);
    const auto T = model_T1(s, f, g, h, gen);
    // lacunary bumps at scale 0 are e^{2 pi i x}, non-lacunary ones are 1
    cplx pf = 0.0, pg = 0.0, ph = 0.0;
    const double pi = std::acos(-1.0);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) {
            const cplx e = std::polar(1.0 / 256.0, -2 * pi * (i + j) / 16.0);
            pf += f(i, j) * e;
            pg += g(i, j) * e;
            ph += h(i, j) * e;
        }
    double err = 0.0, mag = 0.0;
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) {
            const cplx ref = pf * pg * ph * std::polar(1.0, 2 * pi * (i + j) / 16.0);
            err = std::max(err, std::abs(T(i, j) - ref));
            mag = std::max(mag, std::abs(ref));
        }
    CHECK(mag > 1e-3);
    CHECK(err <= 1e-10 * mag);
}

TEST_CASE("model operator against the explicit interval sum") {
    const auto gen = make_generators();
    for (int pattern = 1; pattern <= 3; ++pattern) {
        CAPTURE(pattern);
        for (double L : {1.0, 2.0}) {
            const GridSpec G(int(32 * L), 32, L, 1.0);
            ModelSpec s;
            s.I1 = {1, 2};
            s.I2 = {0, 2};
            s.J1 = {0, 2};
            s.J2 = {1, 2};
            s.J = ModelSpec::j_pattern(pattern);
            const auto f = band_function(G, 12, 11), g = band_function(G, 12, 12), h = band_function(G, 12, 13);
            const auto T = model_T1(s, f, g, h, gen);
            const auto R = BruteModel{s, G, gen}(f, g, h);
            CHECK(l2_norm(R) > 1e-6);
            CHECK(rel_l2_error(T, R) <= 1e-10);
            const auto T1 = model_T1_k0(s, f, g, h, gen, 1);
            const auto R1 = BruteModel{s, G, gen, 1}(f, g, h);
            CHECK(rel_l2_error(T1, R1) <= 1e-10);
        }
    }
}

TEST_CASE("model operator algebra") {
    const auto gen = make_generators();
    const GridSpec G(128, 128);
    ModelSpec s = ranges(0, 4);
    const auto f = band_function(G, 20, 1), f2 = band_function(G, 20, 4), g = band_function(G, 20, 2),
               h = band_function(G, 20, 3);
    const auto T = model_T1(s, f, g, h, gen);
    CHECK(l2_norm(T) > 0.0);

    SampledFunction zero(G);
    CHECK(l2_norm(model_T1(s, f, zero, zero, gen)) == 0.0);
    ModelSpec e = s;
    e.J2 = ScaleRange{};
    CHECK(l2_norm(model_T1(e, f, g, h, gen)) == 0.0);

    const cplx a(0.7, -1.3), b(-2.0, 0.4);
    const auto lhs = model_T1(s, a * f + b * f2, g, h, gen);
    const auto rhs = a * T + b * model_T1(s, f2, g, h, gen);
    CHECK(rel_l2_error(lhs, rhs) <= 1e-12);
    CHECK(rel_l2_error(model_T1(s, f, a * g, h, gen), a * T) <= 1e-12);
    CHECK(rel_l2_error(model_T1(s, f, g, b * h, gen), b * T) <= 1e-12);

    // common translation by the coarsest lattice step (1/2 here: scales start at 1)
    ModelSpec t = ranges(1, 4);
    const auto Tt = model_T1(t, f, g, h, gen);
    auto shift = [&](const SampledFunction& u) {
        SampledFunction v(G);
        for (int i = 0; i < 128; ++i)
            for (int j = 0; j < 128; ++j) v((i + 64) % 128, (j + 64) % 128) = u(i, j);
        return v;
    };
    const auto Ts = model_T1(t, shift(f), shift(g), shift(h), gen);
    CHECK(l2_norm(Ts) == doctest::Approx(l2_norm(Tt)).epsilon(1e-12));
    CHECK(rel_l2_error(Ts, shift(Tt)) <= 1e-12);

    // term records reproduce the output
    std::vector<ModelTerm> terms;
    const auto Tr = model_T1(s, f, g, h, gen, &terms);
    CHECK(rel_l2_error(Tr, T) <= 1e-12);
    for (const auto& m : terms) {
        CHECK(m.j1 <= m.i1);
        CHECK(m.j2 <= m.i2);
    }
    CHECK(terms.size() == 15 * 15);
}

TEST_CASE("scale-coupled model operators") {
    const auto gen = make_generators();
    const GridSpec G(128, 128);
    ModelSpec s = ranges(0, 4);
    const auto f = band_function(G, 20, 1), g = band_function(G, 20, 2), h = band_function(G, 20, 3);
    CHECK(l2_norm(model_T1_k0(s, f, g, h, gen, 6)) == 0.0);
    CHECK_THROWS_AS(model_T1_k0(s, f, g, h, gen, -1), InvalidInput);

    std::vector<ModelTerm> all, k0terms;
    model_T1(s, f, g, h, gen, &all);
    model_T1_k0(s, f, g, h, gen, 0, &k0terms);
    std::map<std::tuple<int, int, int, int>, double> full;
    for (const auto& m : all) full[{m.i1, m.i2, m.j1, m.j2}] = m.l2;
    double sum0 = 0.0, sum_all = 0.0;
    for (const auto& m : all) sum_all += m.l2;
    CHECK(!k0terms.empty());
    CHECK(k0terms.size() < all.size());
    for (const auto& m : k0terms) {
        auto it = full.find({m.i1, m.i2, m.j1, m.j2});
        REQUIRE(it != full.end());
        CHECK(m.l2 == doctest::Approx(it->second).epsilon(1e-12));
        sum0 += m.l2;
    }
    CHECK(sum0 <= sum_all);

    double S = 0.0, tail = 0.0;
    for (int k0 = 0; k0 <= 20; ++k0) {
        const double v = std::ldexp(l2_norm(model_T1_k0(s, f, g, h, gen, k0)), -k0);
        S += v;
        if (k0 >= 15) tail += v;
    }
    CHECK(S > 0.0);
    CHECK(tail <= 1e-6 * S);
}

TEST_CASE("approximate cutoffs") {
    const GridSpec G(64, 32, 4.0, 2.0);
    const auto I = DyadicInterval::make(1, 3, 4.0);  // [1.5, 2)
    const auto c = cutoff_1d(I, 64, 4.0);
    for (int m = 0; m < 64; ++m) {
        const double x = m * 4.0 / 64;
        if (x >= 1.5 && x <= 2.0) CHECK(c[std::size_t(m)] == 1.0);
    }
    CHECK(c[40] == doctest::Approx(std::pow(2.0, -100)).epsilon(1e-12));  // x = 2.5
    CHECK(c[16] == doctest::Approx(std::pow(2.0, -100)).epsilon(1e-12));  // x = 1.0
    for (int m = 32; m < 55; ++m) CHECK(c[std::size_t(m + 1)] <= c[std::size_t(m)]);
    for (int m = 24; m > 0; --m) CHECK(c[std::size_t(m - 1)] <= c[std::size_t(m)]);
    // torus wrap: x = 0 and x = 3.75 are 1.5 and 1.75 from the interval
    const auto J = DyadicInterval::make(0, 0, 4.0);
    const auto cj = cutoff_1d(J, 64, 4.0);
    CHECK(cj[60] == doctest::Approx(std::pow(1.25, -100)).epsilon(1e-12));
    const auto R = approximate_cutoff(I, DyadicInterval::make(0, 1, 2.0), G);
    const auto c2 = cutoff_1d(DyadicInterval::make(0, 1, 2.0), 32, 2.0);
    for (int a = 0; a < 64; ++a)
        for (int b = 0; b < 32; ++b) CHECK(R(a, b).real() == c[std::size_t(a)] * c2[std::size_t(b)]);
}

TEST_CASE("unit windows") {
    const GridSpec G(64, 64, 4.0, 4.0);
    SampledFunction sum(G);
    for (int n = 0; n < 4; ++n)
        for (int m = 0; m < 4; ++m) sum = sum + unit_window(n, m, G);
    for (const auto& v : sum.values) CHECK(std::abs(v - 1.0) <= 1e-14);
    const auto w = unit_window(1, 2, G);
    for (int a = 0; a < 64; ++a)
        for (int b = 0; b < 64; ++b) {
            const double x = a / 16.0, y = b / 16.0;
            if (std::abs(x - 1) >= 1 || std::abs(y - 2) >= 1) CHECK(w(a, b).real() == 0.0);
        }
    for (const auto& v : unit_window(0, 0, GridSpec(16, 16)).values) CHECK(std::abs(v - 1.0) <= 1e-14);
}

TEST_CASE("localized estimates") {
    const GridSpec G(128, 128, 4.0, 4.0);
    const auto ex = ExponentTuple::holder(3, 3, 3, 1);
    SampledFunction z(G);
    CHECK_THROWS_AS(localized_estimate_check(z, 0, 0, z, z, z, ex), DegenerateInput);

    // inputs inside R_{1,2}: cutoffs act as the identity
    const auto f = compact_bump(G, 1.5, 2.5, 0.4), g = compact_bump(G, 1.4, 2.3, 0.3),
               h = compact_bump(G, 1.6, 2.6, 0.35);
    const auto out = f * g * h;
    const double r = localized_estimate_check(out, 1, 2, f, g, h, ex);
    const double plain = lp_norm(out, 1) / (lp_norm(f, 3) * lp_norm(g, 3) * lp_norm(h, 3));
    CHECK(r == doctest::Approx(plain).epsilon(1e-10));

    // a bump moving out of R_{00}; the output is the windowed pointwise product
    std::vector<double> ratios;
    for (int s = 0; s < 5; ++s) {
        const double c = 0.5 + 0.25 * s;
        const auto b = compact_bump(G, c, 0.5, 0.3);
        const auto w = (b * b * b) * unit_window(0, 0, G);
        ratios.push_back(localized_estimate_check(w, 0, 0, b, b, b, ex));
    }
    for (std::size_t i = 1; i < ratios.size(); ++i) CHECK(ratios[i] < ratios[i - 1]);

    // r < 1: the windowed pieces satisfy the r-th power triangle inequality
    const auto q = ExponentTuple::holder(2, 2, 2, 2.0 / 3.0);
    const auto T = f * g * h + compact_bump(G, 3.1, 0.2, 0.5);
    double acc = 0.0;
    for (int n = 0; n < 4; ++n)
        for (int m = 0; m < 4; ++m) acc += std::pow(lp_norm(T * unit_window(n, m, G), q.r), q.r);
    CHECK(std::pow(lp_norm(T, q.r), q.r) <= acc);
}

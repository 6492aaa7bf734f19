#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "flagmult/analysis.hpp"
#include "flagmult/multiop.hpp"

using namespace flagmult;

namespace {

const double kPi = std::acos(-1.0);

SampledFunction random_function(const GridSpec& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    SampledFunction f(g);
    for (auto& v : f.values) v = cplx(nd(rng), nd(rng));
    return f;
}

// every mode with lo <= |k_i| <= hi
SampledFunction band_function(const GridSpec& g, int lo, int hi, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    ModeList ml;
    for (int a = -hi; a <= hi; ++a)
        for (int b = -hi; b <= hi; ++b)
            if (std::abs(a) >= lo && std::abs(b) >= lo) ml.push_back({a, b, cplx(nd(rng), nd(rng))});
    return from_modes(g, ml);
}

std::vector<double> random_positive(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    std::vector<double> w(n);
    for (auto& x : w) x = u(rng);
    return w;
}

// A_p constant by explicit enumeration of dyadic intervals
double brute_ap_1d(const std::vector<double>& w, double p) {
    const int n = int(w.size());
    double best = 0.0;
    for (int len = 1; len <= n; len *= 2)
        for (int a = 0; a + len <= n; a += len) {
            double s = 0.0, d = 0.0;
            for (int i = a; i < a + len; ++i) {
                s += w[i];
                d += std::pow(w[i], 1.0 / (1.0 - p));
            }
            best = std::max(best, (s / len) * std::pow(d / len, p - 1.0));
        }
    return best;
}

double brute_ap_rect(const SampledFunction& w, double p) {
    const GridSpec& G = w.grid;
    double best = 0.0;
    for (int l1 = 1; l1 <= G.N1; l1 *= 2)
        for (int l2 = 1; l2 <= G.N2; l2 *= 2)
            for (int a1 = 0; a1 + l1 <= G.N1; a1 += l1)
                for (int a2 = 0; a2 + l2 <= G.N2; a2 += l2) {
                    double s = 0.0, d = 0.0;
                    for (int i = a1; i < a1 + l1; ++i)
                        for (int j = a2; j < a2 + l2; ++j) {
                            s += w(i, j).real();
                            d += std::pow(w(i, j).real(), 1.0 / (1.0 - p));
                        }
                    const double A = double(l1) * l2;
                    best = std::max(best, (s / A) * std::pow(d / A, p - 1.0));
                }
    return best;
}

double brute_maximal_at(const SampledFunction& f, int x1, int x2) {
    const GridSpec& G = f.grid;
    double best = 0.0;
    for (int l1 = 1; l1 <= G.N1; l1 *= 2)
        for (int l2 = 1; l2 <= G.N2; l2 *= 2) {
            const int a1 = x1 / l1 * l1, a2 = x2 / l2 * l2;
            double s = 0.0;
            for (int i = a1; i < a1 + l1; ++i)
                for (int j = a2; j < a2 + l2; ++j) s += std::abs(f(i, j));
            best = std::max(best, s / (double(l1) * l2));
        }
    return best;
}

// outer p over x1 of the inner q norm over x2, by plain loops
double brute_mixed(const SampledFunction& f, double p, double q, const std::vector<double>* w1 = nullptr,
                   const std::vector<double>* w2 = nullptr) {
    const GridSpec& G = f.grid;
    const double c1 = G.L1 / G.N1, c2 = G.L2 / G.N2;
    double outer = 0.0;
    for (int i = 0; i < G.N1; ++i) {
        double inner = 0.0;
        for (int j = 0; j < G.N2; ++j) inner += std::pow(std::abs(f(i, j)), q) * c2 * (w2 ? (*w2)[j] : 1.0);
        outer += std::pow(inner, p / q) * c1 * (w1 ? (*w1)[i] : 1.0);
    }
    return std::pow(outer, 1.0 / p);
}

}  // namespace

TEST_CASE("exponent tuples") {
    CHECK_NOTHROW(ExponentTuple::holder(3, 3, 3, 1));
    CHECK_NOTHROW(ExponentTuple::holder(4, 4, 4, 4.0 / 3.0));
    CHECK_THROWS_AS(ExponentTuple::holder(3, 3, 3, 2), HolderError);
    CHECK_THROWS_AS(ExponentTuple::holder(1, 3, 3, 1), InvalidExponent);
    CHECK_THROWS_AS(ExponentTuple::holder(3, 3, 3, 0), InvalidExponent);
    CHECK_NOTHROW(ExponentTuple::mixed_tuple(4, 3, 6, 6, 3, 4.0 / 3.0));
    CHECK_THROWS_AS(ExponentTuple::mixed_tuple(4, 3, 6, 6, 4, 4.0 / 3.0), HolderError);
    CHECK(ExponentTuple::holder(4, 4, 4, 4.0 / 3.0).quasi() == false);
    CHECK(ExponentTuple::holder(2, 2, 2, 2.0 / 3.0).quasi());
}

TEST_CASE("plain and quasi norms") {
    const GridSpec G(32, 16, 1.0, 2.0);
    SampledFunction c(G);
    for (auto& v : c.values) v = cplx(0.0, -3.0);
    CHECK(lp_norm(c, 2) == doctest::Approx(3.0 * std::sqrt(2.0)).epsilon(1e-14));
    auto bump = SampledFunction::from_callable(G, [](double x, double y) {
        return std::exp(-40.0 * ((x - 0.5) * (x - 0.5) + (y - 1.0) * (y - 1.0)));
    });
    CHECK(lp_norm(bump, INFINITY) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(lp_norm(bump, 0.0), InvalidExponent);
    CHECK_THROWS_AS(lp_norm(bump, -1.0), InvalidExponent);
    const double r = 2.0 / 3.0;
    for (unsigned s = 0; s < 10; ++s) {
        const auto f = random_function(G, s), g = random_function(G, 100 + s);
        CHECK(std::pow(lp_norm(f + g, r), r) <= std::pow(lp_norm(f, r), r) + std::pow(lp_norm(g, r), r));
    }
}

TEST_CASE("mixed norms") {
    const GridSpec G(16, 32, 2.0, 1.0);
    std::vector<double> a = random_positive(16, 1), b = random_positive(32, 2);
    SampledFunction t(G);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 32; ++j) t(i, j) = a[i] * b[j];
    double na = 0.0, nb = 0.0;
    for (double x : a) na += std::pow(x, 3.0) * (2.0 / 16);
    for (double x : b) nb += std::pow(x, 1.5) * (1.0 / 32);
    CHECK(mixed_norm(t, 3.0, 1.5) == doctest::Approx(std::cbrt(na) * std::pow(nb, 1.0 / 1.5)).epsilon(1e-12));
    const auto f = random_function(G, 9);
    CHECK(mixed_norm(f, 2.5, 2.5) == doctest::Approx(lp_norm(f, 2.5)).epsilon(1e-12));
    for (auto [p, q] : {std::pair{2.0, 5.0}, {6.0, 1.5}, {0.8, 3.0}})
        CHECK(mixed_norm(f, p, q) == doctest::Approx(brute_mixed(f, p, q)).epsilon(1e-12));
}

TEST_CASE("weighted norms") {
    const GridSpec G(16, 16);
    const auto f = random_function(G, 4);
    CHECK(weighted_norm(f, 3.0, Weight::uniform(G)) == lp_norm(f, 3.0));
    CHECK(weighted_norm(f, 3.0, Weight::uniform(G, 2.0)) ==
          doctest::Approx(std::pow(2.0, 1.0 / 3.0) * lp_norm(f, 3.0)).epsilon(1e-14));
    const auto w1 = random_positive(16, 5), w2 = random_positive(16, 6);
    const auto a = random_positive(16, 7), b = random_positive(16, 8);
    SampledFunction t(G);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) t(i, j) = a[i] * b[j];
    double na = 0.0, nb = 0.0;
    for (int i = 0; i < 16; ++i) {
        na += std::pow(a[i], 4.0) * w1[i] / 16;
        nb += std::pow(b[i], 2.0) * w2[i] / 16;
    }
    CHECK(weighted_mixed_norm(t, 4.0, w1, 2.0, w2) == doctest::Approx(std::pow(na, 0.25) * std::sqrt(nb)).epsilon(1e-12));
    CHECK(weighted_mixed_norm(f, 4.0, w1, 2.0, w2) == doctest::Approx(brute_mixed(f, 4.0, 2.0, &w1, &w2)).epsilon(1e-12));
    CHECK(weighted_norm(t, 3.0, Weight::from_factors(G, w1, w2)) ==
          doctest::Approx(weighted_mixed_norm(t, 3.0, w1, 3.0, w2)).epsilon(1e-12));
    CHECK_THROWS_AS(Weight::from_factors(G, std::vector<double>(16, -1.0), w2), InvalidInput);
}

TEST_CASE("A_p constants") {
    const GridSpec G(16, 16);
    CHECK(ap_constant(Weight::uniform(G), 2.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(ap_constant(Weight::uniform(G, 7.5), 3.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(ap_constant(Weight::uniform(G), 1.0), InvalidExponent);
    for (double a : {-0.5, 0.3, 0.8}) {
        const auto w = power_weight_1d(16, 1.0, 0.3, a);
        for (double p : {1.5, 2.0, 4.0}) CHECK(ap_constant_1d(w, p) == doctest::Approx(brute_ap_1d(w, p)).epsilon(1e-12));
    }
    const Weight pw = power_weight(G, 0.5, -0.4, 0.25, 0.6);
    for (double p : {1.5, 2.0, 3.0}) {
        CHECK(ap_constant(pw, p, APMode::Rect) == doctest::Approx(brute_ap_rect(pw.w, p)).epsilon(1e-12));
        // for a tensor weight the axis constants are those of the factors
        CHECK(ap_constant(pw, p, APMode::Axis1) == doctest::Approx(brute_ap_1d(pw.w1, p)).epsilon(1e-12));
        CHECK(ap_constant(pw, p, APMode::Axis2) == doctest::Approx(brute_ap_1d(pw.w2, p)).epsilon(1e-12));
    }
    // monotone in p and scale invariant
    const Weight rw = Weight::from_function([&] {
        SampledFunction w(G);
        auto v = random_positive(256, 3);
        for (int i = 0; i < 256; ++i) w.values[i] = v[i];
        return w;
    }());
    double prev = INFINITY;
    for (double p : {1.25, 1.5, 2.0, 3.0, 5.0, 9.0}) {
        const double c = ap_constant(rw, p);
        CHECK(c <= prev * (1 + 1e-14));
        prev = c;
    }
    SampledFunction scaled = rw.w;
    for (auto& v : scaled.values) v *= 4.0;
    CHECK(ap_constant(Weight::from_function(scaled), 2.0) == ap_constant(rw, 2.0));
}

TEST_CASE("strong maximal function") {
    const GridSpec G(16, 16);
    SampledFunction c(G);
    for (auto& v : c.values) v = -2.5;
    const auto Mc = strong_maximal(c);
    for (const auto& v : Mc.values) CHECK(v.real() == doctest::Approx(2.5).epsilon(1e-15));
    SampledFunction e(G);
    e(5, 11) = 1.0;
    const auto Me = strong_maximal(e);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) CHECK(Me(i, j).real() == doctest::Approx(brute_maximal_at(e, i, j)).epsilon(1e-12));
    const auto f = random_function(G, 1), g = random_function(G, 2);
    const auto Mf = strong_maximal(f), Mg = strong_maximal(g), Ms = strong_maximal(f + g);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) {
            CHECK(Mf(i, j).real() >= std::abs(f(i, j)));
            CHECK(Mf(i, j).real() == doctest::Approx(brute_maximal_at(f, i, j)).epsilon(1e-12));
            CHECK(Ms(i, j).real() <= (Mf(i, j).real() + Mg(i, j).real()) * (1 + 1e-14));
        }
}

TEST_CASE("smooth sup function against the strong maximal function") {
    // pointwise sup_k |S_k1 S_k2 f| <= C M_s f; the measured constant must stay below 3
    const auto gen = make_generators();
    const GridSpec G(64, 64);
    double C = 0.0;
    for (unsigned s = 0; s < 5; ++s) {
        const auto f = band_function(G, 0, 12, 40 + s);
        const auto S = sup_function(f, LPKind::S, LPKind::S, gen);
        const auto M = strong_maximal(f);
        for (std::size_t i = 0; i < G.size(); ++i) C = std::max(C, S.values[i].real() / M.values[i].real());
    }
    MESSAGE("empirical constant " << C);
    CHECK(C <= 3.0);
}

TEST_CASE("Fefferman-Stein ratio") {
    const GridSpec G(128, 128);
    const auto gen = make_generators();
    SampledFunction c(G);
    for (auto& v : c.values) v = 2.0;
    CHECK(fs_maximal_check({c}, 2.0, 2.0).ratio == doctest::Approx(1.0).epsilon(1e-14));

    // a smooth bump and three translates, dilated over four octaves
    Spectrum b(G);
    for (int k1 = -3; k1 <= 3; ++k1)
        for (int k2 = -3; k2 <= 3; ++k2) b.at(k1, k2) = gen.Phi(std::abs(k1) / 2.0) * gen.Phi(std::abs(k2) / 2.0);
    const auto base = idft(b);
    std::vector<double> ratios;
    for (int o = 0; o < 4; ++o) {
        const auto d = dilate(base, o);
        std::vector<SampledFunction> seq;
        for (int j = 0; j < 4; ++j) {
            SampledFunction t(G);
            for (int i1 = 0; i1 < 128; ++i1)
                for (int i2 = 0; i2 < 128; ++i2) t((i1 + 13 * j) % 128, (i2 + 7 * j) % 128) = d(i1, i2);
            seq.push_back(t);
        }
        ratios.push_back(fs_maximal_check(seq, 2.0, 2.0).ratio);
        const auto pw = power_weight(G, 0.5, 0.5, 0.37, 0.61);
        const double wr = fs_maximal_check(seq, 2.0, 2.0, &pw).ratio;
        CHECK(std::isfinite(wr));
        CHECK(wr >= 1.0);
    }
    for (double r : ratios) {
        CHECK(r >= 1.0);
        CHECK(std::abs(r / ratios[0] - 1.0) <= 0.2);
    }
}

TEST_CASE("square function equivalence probe") {
    const auto gen = make_generators();
    const GridSpec G(256, 256);
    const auto base = band_function(G, 2, 5, 77);
    std::vector<SampledFunction> fam;
    for (int o = 0; o < 4; ++o) fam.push_back(dilate(base, o));
    const auto flat = square_function_probe(fam, 2.0, nullptr, gen);
    CHECK(flat.spread() <= 2.0);
    const auto pw = power_weight(G, 0.5, 0.5, 0.3, 0.7);
    const double a2 = ap_constant(pw, 2.0);
    MESSAGE("A2 constant of the sample weight " << a2);
    CHECK(a2 < 4.0);
    const auto weighted = square_function_probe(fam, 2.0, &pw, gen);
    CHECK(weighted.c1 > 0.0);
    CHECK(weighted.spread() <= 2.0);
    SampledFunction c(G);
    for (auto& v : c.values) v = 1.0;
    CHECK_THROWS_AS(square_function_ratio(c, 2.0, nullptr, gen), DegenerateInput);
}

TEST_CASE("fractional derivatives") {
    const GridSpec G(32, 32, 1.0, 2.0);
    const auto f = random_function(G, 3);
    const auto id = fractional_derivative(f, 0.0, 0.0);
    CHECK(max_abs_diff(id, f) == 0.0);
    CHECK_THROWS_AS(fractional_derivative(f, -0.5, 0.0), InvalidExponent);

    const auto m = from_modes(G, {{3, 0, 1.0}});
    const auto d = fractional_derivative(m, 0.5, 0.0);
    const double s = std::pow(2 * kPi * 3.0, 0.5);
    for (std::size_t i = 0; i < G.size(); ++i) CHECK(std::abs(d.values[i] - s * m.values[i]) <= 1e-12);
    CHECK(lp_norm(fractional_derivative(m, 0.5, 0.7), 2.0) <= 1e-12);  // (k, 0) mode annihilated

    const auto cc = SampledFunction::from_callable(G, [](double x, double y) {
        return std::cos(2 * kPi * x) * std::cos(2 * kPi * y / 2.0);
    });
    const auto dcc = fractional_derivative(cc, 1.0, 1.0);
    const double sc = (2 * kPi / 1.0) * (2 * kPi / 2.0);
    for (std::size_t i = 0; i < G.size(); ++i) CHECK(std::abs(dcc.values[i] - sc * cc.values[i]) <= 1e-10);

    const auto a = fractional_derivative(fractional_derivative(f, 0.3, 1.2), 0.9, 0.4);
    const auto b = fractional_derivative(f, 1.2, 1.6);
    CHECK(rel_l2_error(a, b) <= 1e-12);
}

TEST_CASE("Leibniz partition") {
    const auto gen = make_generators();
    const GridSpec G(64, 64, 1.0, 2.0);
    for (int axis = 1; axis <= 2; ++axis) {
        const auto b = scale_band(G, axis);
        for (double u : {0.0, 0.5, 1.0, 3.0, 7.5, 16.0, 31.0, 100.0}) {
            double s = 0.0;
            for (int j = b.jmin; j <= b.jmax; ++j) {
                const double p = leibniz_partition(G, axis, j, u, gen);
                CHECK(p >= 0.0);
                s += p;
            }
            CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
        }
    }
    CHECK(leibniz_label(8, 8) == 1);   // f above, g dominant on both axes
    CHECK(leibniz_label(0, 0) == 16);  // f below, h dominant on both axes
    CHECK(leibniz_label(5, 2) == 2);   // f carries both; g on axis 1, h on axis 2
}

namespace {

// closed form of one region term at single modes, by enumerating scale triples
double region_symbol(const GridSpec& G, int axis, int region, double xi, double eta, double zeta, int gap,
                     const GeneratorSet& gen) {
    const auto b = scale_band(G, axis);
    double s = 0.0;
    for (int j = b.jmin; j <= b.jmax; ++j)
        for (int k = b.jmin; k <= b.jmax; ++k)
            for (int l = b.jmin; l <= b.jmax; ++l) {
                int t, m;
                if (l > k + gap) {
                    t = 0;
                    m = l;
                } else if (k > l + gap) {
                    t = 2;
                    m = k;
                } else {
                    t = 1;
                    m = k;
                }
                const int r = j < m - gap ? 0 : j <= m + gap ? 1 : 2;
                if (3 * t + r != region) continue;
                s += leibniz_partition(G, axis, j, xi, gen) * leibniz_partition(G, axis, k, eta, gen) *
                     leibniz_partition(G, axis, l, zeta, gen);
            }
    return s;
}

}  // namespace

TEST_CASE("Leibniz decomposition") {
    const auto gen = make_generators();
    SUBCASE("single modes, closed form per term") {
        const GridSpec G(64, 64);
        const int F[2] = {13, -6}, Gm[2] = {3, 9}, H[2] = {-2, 1};
        const auto f = from_modes(G, {{F[0], F[1], 1.0}}), g = from_modes(G, {{Gm[0], Gm[1], 1.0}}),
                   h = from_modes(G, {{H[0], H[1], 1.0}});
        LeibnizSpec sp;
        sp.alpha1 = 1.0;
        sp.alpha2 = 0.5;
        sp.beta1 = 0.7;
        sp.beta2 = 1.0;
        const auto res = leibniz_decompose(sp, f, g, h, gen);
        REQUIRE(res.terms.size() == 81);
        const double al[2] = {sp.alpha1, sp.alpha2}, be[2] = {sp.beta1, sp.beta2};
        double deriv = 1.0;
        for (int p = 0; p < 2; ++p)
            deriv *= std::pow(2 * kPi * std::abs(F[p] + Gm[p] + H[p]), al[p]) * std::pow(2 * kPi * std::abs(Gm[p] + H[p]), be[p]);
        const auto mode = from_modes(G, {{F[0] + Gm[0] + H[0], F[1] + Gm[1] + H[1], 1.0}});
        const auto fgh = f * g * h;
        const double scale = std::abs(fgh(0, 0));
        for (const auto& t : res.terms) {
            const double sym = region_symbol(G, 1, t.region1, F[0], Gm[0], H[0], sp.gap, gen) *
                               region_symbol(G, 2, t.region2, F[1], Gm[1], H[1], sp.gap, gen) * deriv;
            for (std::size_t i = 0; i < G.size(); ++i)
                CHECK(std::abs(t.out.values[i] - sym * scale * mode.values[i] / std::abs(mode.values[0])) <=
                      1e-12 * std::max(1.0, deriv));
        }
    }
    SUBCASE("recomposition at N = 256") {
        const GridSpec G(256, 256);
        const auto f = band_function(G, 0, 20, 1), g = band_function(G, 0, 20, 2), h = band_function(G, 0, 20, 3);
        LeibnizSpec zero;
        zero.alpha1 = zero.alpha2 = zero.beta1 = zero.beta2 = 0.0;
        const auto r0 = leibniz_decompose(zero, f, g, h, gen);
        CHECK(rel_l2_error(r0.sum, product_in_band({&f, &g, &h})) <= 1e-10);

        LeibnizSpec one;
        const auto r1 = leibniz_decompose(one, f, g, h, gen);
        const auto gh = product_in_band({&g, &h});
        const auto dgh = fractional_derivative(gh, 1.0, 1.0);
        const auto lhs = fractional_derivative(product_in_band({&f, &dgh}), 1.0, 1.0);
        CHECK(rel_l2_error(r1.sum, lhs) <= 1e-8);
        CHECK(r1.rel_error <= 1e-8);
        int count = 0;
        for (const auto& l : r1.labels) {
            CHECK(l.terms > 0);
            CHECK(l.product > 0.0);
            CHECK(std::isfinite(l.term_norm));
            count += l.terms;
        }
        CHECK(count == 81);
        CHECK(r1.r_floor == doctest::Approx(0.5));
        CHECK(r1.r_in_range);
        // each label's derivative bookkeeping adds up to the orders on the left-hand side
        for (const auto& l : r1.labels)
            for (int p = 0; p < 2; ++p) CHECK(l.df[p] + l.dg[p] + l.dh[p] == doctest::Approx(2.0));
    }
    SUBCASE("errors") {
        const GridSpec G(64, 64);
        const auto f = band_function(G, 0, 3, 1);
        LeibnizSpec sp;
        sp.gap = 5;
        CHECK_THROWS_AS(leibniz_decompose(sp, f, f, f, gen), ScaleError);
        sp.gap = 3;
        sp.alpha1 = -1;
        CHECK_THROWS_AS(leibniz_decompose(sp, f, f, f, gen), InvalidExponent);
    }
}

TEST_CASE("families and dilation") {
    const auto gen = make_generators();
    const GridSpec G(64, 64);
    const auto f = band_function(G, 1, 3, 5);
    const auto d = dilate(f, 2);
    // f(4x) sampled
    for (int i1 = 0; i1 < 64; ++i1)
        for (int i2 = 0; i2 < 64; ++i2) CHECK(std::abs(d(i1, i2) - f((4 * i1) % 64, (4 * i2) % 64)) <= 1e-10);
    CHECK(lp_norm(d, 2.0) == doctest::Approx(lp_norm(f, 2.0)).epsilon(1e-12));  // Parseval
    CHECK_THROWS_AS(dilate(f, 4), ScaleError);
    TestFamilySpec spec;
    spec.octaves = 3;
    spec.translations = 2;
    for (auto k : {FamilyKind::Dilated, FamilyKind::Modulated, FamilyKind::Tensor, FamilyKind::Random}) {
        spec.kind = k;
        CHECK(parse_family_kind(to_string(k)) == k);
        const auto fam = make_family(spec, G, gen);
        CHECK(fam.size() == 6);
        const auto again = make_family(spec, G, gen);
        for (std::size_t i = 0; i < fam.size(); ++i) {
            CHECK(lp_norm(fam[i].f, 2) > 0.0);
            CHECK(max_abs_diff(fam[i].g, again[i].g) == 0.0);
        }
    }
    spec.octaves = 4;
    CHECK_THROWS_AS(make_family(spec, G, gen), ScaleError);
}

TEST_CASE("bound scans") {
    const auto gen = make_generators();
    const GridSpec G(128, 128);
    OperatorPlan plan;
    const FlagSymbol one{build_symbol("constant", {}, gen, 3, 2), build_symbol("constant", {}, gen, 2, 2)};
    TrilinearOp unit = [&](const SampledFunction& f, const SampledFunction& g, const SampledFunction& h) {
        return apply_flag(one, f, g, h, plan, gen);
    };
    const auto ex = ExponentTuple::holder(3, 3, 3, 1);
    TestFamilySpec hold;
    hold.kind = FamilyKind::Random;
    hold.octaves = 4;
    hold.f = hold.g = hold.h = Band{0, 2};
    const auto r = bound_scan(unit, ex, hold, G, gen);
    CHECK(r.members.size() == 4);
    CHECK(r.max <= 1.0 + 1e-10);
    TestFamilySpec consts = hold;
    consts.kind = FamilyKind::Dilated;
    consts.f = consts.g = consts.h = Band{0, 0};
    const auto rc = bound_scan(unit, ex, consts, G, gen);
    CHECK(rc.min == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rc.max == doctest::Approx(1.0).epsilon(1e-12));

    // library flag: f high, g and h low; the octave family stays in band
    const FlagSymbol lib = library_flag(gen, 0);
    TrilinearOp op = [&](const SampledFunction& f, const SampledFunction& g, const SampledFunction& h) {
        return apply_flag(lib, f, g, h, plan, gen);
    };
    TestFamilySpec fam;
    fam.octaves = 4;
    fam.translations = 2;
    const auto plain = bound_scan(op, ExponentTuple::holder(4, 4, 4, 4.0 / 3.0), fam, G, gen);
    CHECK(plain.min > 0.0);
    CHECK(plain.flatness <= 2.0);
    ScanWeights unitw{std::vector<double>(128, 1.0), std::vector<double>(128, 1.0)};
    const auto weighted = bound_scan(op, ExponentTuple::holder(4, 4, 4, 4.0 / 3.0), fam, G, gen, &unitw);
    for (std::size_t i = 0; i < plain.members.size(); ++i) CHECK(weighted.members[i].ratio == plain.members[i].ratio);
    const auto mixed = bound_scan(op, ExponentTuple::mixed_tuple(4, 3, 6, 6, 3, 4.0 / 3.0), fam, G, gen);
    CHECK(mixed.flatness <= 2.0);
    // translation leaves the ratio unchanged
    for (std::size_t i = 0; i + 1 < plain.members.size(); i += 2)
        CHECK(plain.members[i].ratio == doctest::Approx(plain.members[i + 1].ratio).epsilon(1e-10));
}

TEST_CASE("bilinear tensor evaluation matches the 2D engine") {
    const auto gen = make_generators();
    const GridSpec G(64, 64);
    const FlagSymbol flag{build_symbol("constant", {}, gen, 3, 2), library_flag(gen, 1).m2};
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    CVec g1(64), h1(64), g2(64), h2(64);
    for (auto* v : {&g1, &h1, &g2, &h2})
        for (auto& x : *v) x = cplx(nd(rng), nd(rng));
    SampledFunction one(G), g(G), h(G);
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j) {
            one(i, j) = 1.0;
            g(i, j) = g1[i] * g2[j];
            h(i, j) = h1[i] * h2[j];
        }
    const auto out = apply_flag(flag, one, g, h, OperatorPlan{}, gen);
    const ParamFactor m2 = flag.m2.factors[0];
    const CVec b1 = bilinear_1d(m2, g1, h1, 1.0), b2 = bilinear_1d(m2, g2, h2, 1.0);
    SampledFunction ref(G);
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j) ref(i, j) = b1[i] * b2[j];
    CHECK(lp_norm(ref, 2) > 1e-3);
    CHECK(rel_l2_error(out, ref) <= 1e-10);
}

TEST_CASE("endpoint probe") {
    const auto gen = make_generators();
    const auto rep = endpoint_probe(gen, {64, 128, 256, 512});
    REQUIRE(rep.rows.size() == 4);
    for (std::size_t i = 1; i < rep.rows.size(); ++i) CHECK(rep.rows[i].ratio > rep.rows[i - 1].ratio);
    CHECK(rep.increasing);
    CHECK(rep.control_flatness <= 2.0);
    CHECK(rep.constant_ratio == 0.0);
    CHECK_THROWS_AS(endpoint_probe(gen, {}), InvalidInput);
}

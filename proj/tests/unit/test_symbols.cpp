#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "flagmult/symbols.hpp"

using namespace flagmult;

namespace {

std::vector<std::array<double, 6>> random_points(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> e(-8.0, 8.0), s(0.0, 1.0);
    std::vector<std::array<double, 6>> out(n);
    for (auto& p : out)
        for (auto& v : p) v = (s(rng) < 0.5 ? -1 : 1) * std::exp2(e(rng));
    return out;
}

}  // namespace

TEST_CASE("generator partition and supports") {
    auto g = make_generators();
    CHECK(g.partition_residual <= 1e-12);
    // independent sum over a wide scale window
    for (double l = -20; l <= 20; l += 0.37) {
        const double u = std::exp2(l);
        double s = 0.0;
        for (int j = -40; j <= 40; ++j) s += g.psi(u / std::exp2(j));
        CHECK(std::abs(s - 1.0) < 1e-12);
    }
    CHECK(g.phi(std::exp2(-4)) == 1.0);
    CHECK(g.psi(0.25) == 0.0);
    CHECK(g.psi(2.0) == 0.0);
    CHECK(g.psi(0.0) == 0.0);
    CHECK(g.phi(0.0) == 1.0);
    CHECK(g.phi(0.25) == 0.0);
    // phi as the low-frequency tail of the partition
    for (double u : {0.01, 0.1, 0.13, 0.17, 0.2, 0.24, 0.3, 1.0}) {
        double s = 0.0;
        for (int k = -80; k <= -3; ++k) s += g.psi(u * std::exp2(-k));
        CHECK(std::abs(s - g.phi(u)) < 1e-12);
    }
    CHECK(g.psi_wide(0.25) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g.psi_wide(4.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("generator construction errors") {
    CHECK_THROWS_AS(make_generators(0.0), InvalidInput);
    CHECK_THROWS_AS(make_generators(0.3), InvalidInput);
    CHECK_THROWS_AS(make_generators(0.125, -1.0), InvalidInput);
    CHECK_NOTHROW(make_generators(0.25, 3.0));
}

TEST_CASE("psi prime / double prime duality") {
    auto g = make_generators();
    for (int k : {-3, 0, 5})
        for (double t = 0.5; t <= 2.0; t += 0.01) {
            const double u = t * std::exp2(k);
            for (double beta : {0.5, 1.0, 2.3}) {
                const double lhs = g.psi_prime(u, beta, k) * g.psi_dprime(u, beta, k);
                CHECK(std::abs(lhs - std::pow(g.psi_j(u, k), 2)) < 1e-12);
            }
        }
}

TEST_CASE("cone cutoffs") {
    auto g = make_generators();
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(-10, 10);
    for (int i = 0; i < 2000; ++i) {
        const double u = d(rng), v = d(rng), w = d(rng);
        const double c0 = g.cone0(u, v, w), c1 = g.cone1(u, v, w);
        CHECK(std::abs(c0 + c1 - 1.0) < 1e-15);
        if (std::abs(v) + std::abs(w) > g.epsilon * std::abs(u)) CHECK(c0 == 0.0);
        if (std::abs(v) + std::abs(w) < g.epsilon * std::abs(u) / 2) CHECK(c1 == 0.0);
        CHECK(g.cone0(3.5 * u, 3.5 * v, 3.5 * w) == doctest::Approx(c0).epsilon(1e-13));
    }
    CHECK(g.cone1(0.0, 0.0, 0.0) == 1.0);
}

TEST_CASE("builders and bounds") {
    auto g = make_generators();
    auto pts = random_points(10000, 4);
    for (const auto& name : {"constant", "mikhlin", "mikhlin_coupled", "generator_chi", "cone",
                             "fractional_power", "m3m4"}) {
        auto m = build_symbol(name, {}, g, 3, 2);
        CHECK(std::isfinite(m.bound));
        double mx = 0.0;
        for (const auto& p : pts) mx = std::max(mx, std::abs(m.eval(p.data())));
        CHECK_MESSAGE(mx <= m.bound + 1e-12, name);
    }
    auto m2 = build_symbol("generator_m2", {}, g, 2, 2);
    double mx = 0.0;
    for (const auto& p : pts) mx = std::max(mx, std::abs(m2.eval(p.data())));
    CHECK(mx <= m2.bound);
    CHECK_THROWS_AS(build_symbol("nope", {}, g), SymbolError);
    CHECK_THROWS_AS(build_symbol("generator_m2", {}, g, 3, 2), SymbolError);
    CHECK_THROWS_AS(build_symbol("mikhlin_coupled", {{"c", 1.5}}, g), SymbolError);
    auto mk = build_symbol("mikhlin", {}, g);
    CHECK(mk({0, 0, 0, 1, 2, 3}) == cplx(0.0));
}

TEST_CASE("separable factors reproduce the symbol") {
    auto g = make_generators();
    auto flag = library_flag(g);
    auto s = flag_as_symbol(flag);
    REQUIRE(s.separable());
    auto pts = random_points(500, 8);
    for (const auto& p : pts) {
        const cplx direct = flag.eval(p.data());
        const cplx viaf = s.factors[0].eval(p[0], p[1], p[2]) * s.factors[1].eval(p[3], p[4], p[5]);
        CHECK(std::abs(direct - viaf) < 1e-14);
        // rank terms
        cplx r = 1.0;
        for (int q = 0; q < 2; ++q) {
            cplx acc = 0.0;
            for (const auto& t : s.factors[q].terms)
                acc += t.c * t.a(p[3 * q]) * t.b(p[3 * q + 1]) * t.w(p[3 * q + 2]);
            r *= acc;
        }
        CHECK(std::abs(direct - r) < 1e-13);
    }
}

TEST_CASE("Hormander validator") {
    auto g = make_generators();
    auto one = build_symbol("constant", {}, g);
    auto rep = check_mm_hormander(one, 4, 1.0 + 1e-12);
    CHECK(rep.pass);
    for (const auto& e : rep.entries) {
        int order = 0;
        for (int a : e.alpha) order += a;
        if (order == 0) CHECK(e.constant == doctest::Approx(1.0));
        else CHECK(e.constant <= 1e-8);
    }

    auto abs_xi = build_symbol("homogeneous_power", {{"s", 1.0}}, g, 3, 1);
    auto bad = check_mm_hormander(abs_xi, 0, 10.0);
    CHECK_FALSE(bad.pass);

    auto chi = tensor_symbol({ParamFactor{3, [g](double u, double v, double w) -> cplx {
        return g.chi(u, v, w, 0);
    }}});
    auto r1 = check_mm_hormander(chi, 2, 1e6, std::exp2(-10), std::exp2(10), 200, 3);
    auto r2 = check_mm_hormander(chi, 2, 1e6, std::exp2(-30), std::exp2(-10), 200, 3);
    CHECK(r1.pass);
    CHECK(r2.pass);
    // scale-free constants: the two ranges are related by exact dilation of the sample
    CHECK(std::abs(r1.max_constant - r2.max_constant) <= 0.05 * r1.max_constant);
}

TEST_CASE("cone split reconstruction") {
    auto g = make_generators();
    auto m1 = build_symbol("mikhlin_coupled", {}, g);
    auto cs = cone_split(m1, g);
    auto pts = random_points(10000, 12);
    double worst = 0.0;
    for (const auto& p : pts) {
        const cplx s = cs.m00.eval(p.data()) + cs.m01.eval(p.data()) + cs.m10.eval(p.data()) +
                       cs.m11.eval(p.data());
        worst = std::max(worst, std::abs(s - m1.eval(p.data())));
    }
    CHECK(worst <= 1e-14);
    const double q[6] = {1.0, 0.01, -0.02, -3.0, 0.05, 0.1};
    CHECK(cs.m01.eval(q) == cplx(0.0));
    CHECK(cs.m10.eval(q) == cplx(0.0));
    CHECK(cs.m11.eval(q) == cplx(0.0));
    auto c1 = cone_split(build_symbol("constant", {}, g), g);
    for (const auto& p : random_points(200, 13)) {
        std::array<double, 6> sc = p;
        for (int i = 0; i < 3; ++i) sc[i] *= 5.0;
        for (int i = 3; i < 6; ++i) sc[i] *= 0.3;
        CHECK(c1.m01.eval(sc.data()).real() == doctest::Approx(c1.m01.eval(p.data()).real()).epsilon(1e-12));
    }
}

TEST_CASE("Taylor split") {
    auto g = make_generators();
    // independent of (eta, zeta)
    SymbolND flat;
    flat.arity = 3;
    flat.params = 2;
    flat.eval = [](const double* a) -> cplx { return std::sin(a[0]) * std::cos(a[3]) + 2.0; };
    auto t0 = taylor_split(flat, 3, 16, g);
    for (const auto& p : cone_localized_sample(g, 50, 3)) {
        CHECK(std::abs(t0.m11.eval(p.data()) - flat.eval(p.data())) < 1e-12);
        CHECK(std::abs(t0.m12.eval(p.data())) < 1e-12);
        CHECK(std::abs(t0.m21.eval(p.data())) < 1e-12);
        CHECK(std::abs(t0.m22.eval(p.data())) < 1e-12);
    }
    // polynomial of degree < N jointly in (eta1, zeta1, eta2, zeta2)
    SymbolND poly;
    poly.arity = 3;
    poly.params = 2;
    poly.eval = [](const double* a) -> cplx {
        return 1.0 + a[0] * a[1] - 0.5 * a[2] * a[2] + a[4] * a[5] + 0.3 * a[1] * a[5] + a[3];
    };
    auto tp = taylor_split(poly, 3, 16, g);
    for (const auto& p : cone_localized_sample(g, 50, 4)) {
        const double scale = std::abs(poly.eval(p.data())) + 1.0;
        CHECK(std::abs(tp.m12.eval(p.data())) < 1e-10 * scale);
        CHECK(std::abs(tp.m21.eval(p.data())) < 1e-10 * scale);
        CHECK(std::abs(tp.m22.eval(p.data())) < 1e-10 * scale);
    }
    // generic Mikhlin symbol
    auto m1 = build_symbol("mikhlin_coupled", {}, g);
    auto ts = taylor_split(m1, 3, 64, g);
    CHECK(ts.residual <= 1e-6);
    double err = 0, ref = 0;
    for (const auto& p : cone_localized_sample(g, 100, 99)) {
        const cplx s = ts.m11.eval(p.data()) + ts.m12.eval(p.data()) + ts.m21.eval(p.data()) +
                       ts.m22.eval(p.data());
        err = std::max(err, std::abs(s - m1.eval(p.data())));
        ref = std::max(ref, std::abs(m1.eval(p.data())));
    }
    CHECK(err / ref <= 1e-6);
    // m11 is the Taylor polynomial: compare with a direct derivative of a known symbol
    SymbolND ex;
    ex.arity = 3;
    ex.params = 2;
    ex.eval = [](const double* a) -> cplx { return std::exp(a[1] + 2 * a[4]); };
    auto te = taylor_split(ex, 2, 32, g);
    const double q[6] = {1.0, 0.05, 0.02, 1.0, 0.03, 0.01};
    // (1 + x)(1 + 2y) with x = 0.05, y = 0.03
    CHECK(te.m11.eval(q).real() == doctest::Approx(1.05 * 1.06).epsilon(1e-10));
}

TEST_CASE("Fourier tensorization") {
    auto g = make_generators();
    auto one = build_symbol("constant", {}, g, 2, 2);
    auto e1 = fourier_tensorize(one, 0, 3, 4, g);
    double off = 0.0;
    for (int a = -4; a <= 4; ++a)
        for (int b = -4; b <= 4; ++b)
            for (int c = -4; c <= 4; ++c)
                for (int d = -4; d <= 4; ++d)
                    if (a || b || c || d) off = std::max(off, std::abs(e1.coeff(a, b, c, d)));
    CHECK(off <= 1e-12);
    CHECK(std::abs(e1.coeff(0, 0, 0, 0) - 1.0) <= 1e-12);

    auto mk = build_symbol("mikhlin", {}, g, 2, 2);
    double prev = 1e300;
    for (int M : {2, 4, 8, 16}) {
        auto e = fourier_tensorize(mk, 1, -2, M, g);
        const double err = tensorize_error(mk, e, 150);
        CHECK_MESSAGE(err < prev, "M=" << M << " err=" << err);
        prev = err;
        if (M == 16) {
            CHECK(e.decay_exponent > 2.0);
            CHECK(std::isfinite(e.decay_constant));
            for (int n = 1; n <= M; ++n)
                CHECK(std::abs(e.coeff(n, 0, 0, 0)) <= e.decay_constant * std::pow(1.0 + n, -4) + 1e-300);
        }
    }
}

TEST_CASE("localized Sobolev norm") {
    auto g = make_generators();
    auto one = build_symbol("constant", {}, g);
    auto a = localized_sobolev_norm(one, 0, 0, 1.0, 1.0, g);
    auto b = localized_sobolev_norm(one, 5, -7, 1.0, 1.0, g);
    CHECK(a.value == doctest::Approx(b.value).epsilon(1e-14));
    // s = 0 is the plain L2 norm of the windowed symbol: compare against direct quadrature
    auto z = localized_sobolev_norm(one, 0, 0, 0.0, 0.0, g, 16);
    double l2 = 0.0;
    const int n = 16;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                const double u = -2 + 4.0 * i / n, v = -2 + 4.0 * j / n, w = -2 + 4.0 * k / n;
                l2 += std::pow(g.psi(std::sqrt(u * u + v * v + w * w)), 2) * std::pow(4.0 / n, 3);
            }
    CHECK(z.value == doctest::Approx(l2).epsilon(1e-12));

    auto mk = build_symbol("mikhlin", {}, g);
    double lo = 1e300, hi = 0.0;
    for (int j = -8; j <= 8; ++j)
        for (int k = -8; k <= 8; ++k) {
            const double v = localized_sobolev_norm(mk, j, k, 1.0, 1.0, g).value;
            CHECK(std::isfinite(v));
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    CHECK(hi <= 1.05 * lo);
    // separable fast path agrees with the full six-dimensional transform
    auto coupled_like = build_symbol("mikhlin", {}, g);
    coupled_like.factors.clear();
    const double full = localized_sobolev_norm(coupled_like, 2, -1, 0.5, 1.0, g, 8).value;
    const double fast = localized_sobolev_norm(mk, 2, -1, 0.5, 1.0, g, 8).value;
    CHECK(full == doctest::Approx(fast).epsilon(1e-10));
    CHECK_THROWS_AS(localized_sobolev_norm(mk, 0, 0, -1.0, 0.0, g), InvalidExponent);
}

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numeric>
#include <random>

#include "flagmult/parallel.hpp"
#include "flagmult/symbols.hpp"

namespace flagmult {
namespace {

constexpr double kPi = 3.14159265358979323846;

double unit(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

void all_multi_indices(int nvars, int max_order, std::vector<std::vector<int>>& out) {
    std::vector<int> a(nvars, 0);
    std::function<void(int, int)> rec = [&](int pos, int left) {
        if (pos == nvars) {
            out.push_back(a);
            return;
        }
        for (int v = 0; v <= left; ++v) {
            a[pos] = v;
            rec(pos + 1, left - v);
        }
        a[pos] = 0;
    };
    rec(0, max_order);
    std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
        return std::accumulate(x.begin(), x.end(), 0) < std::accumulate(y.begin(), y.end(), 0);
    });
}

}  // namespace

std::vector<double> fd_weights(const std::vector<double>& x, int m) {
    // Fornberg's recursion, derivative order m at 0
    const int n = int(x.size());
    if (m >= n) throw InvalidInput("stencil too small for derivative order");
    std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0, c4 = x[0];
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i];
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = c[i][m];
    return w;
}

// ---------------------------------------------------------------------------

ValidationReport check_mm_hormander(const SymbolND& m, int max_order, double tol, double lo,
                                    double hi, int samples, unsigned seed) {
    if (max_order < 0 || max_order > 4) throw InvalidInput("max_order must lie in [0, 4]");
    if (!m.eval) throw SymbolError("symbol has no evaluator");
    const int nv = m.nargs();
    std::vector<std::vector<int>> alphas;
    all_multi_indices(nv, max_order, alphas);

    // one-dimensional central stencils per order
    std::vector<std::vector<double>> offs(max_order + 1), wts(max_order + 1);
    for (int a = 0; a <= max_order; ++a) {
        const int r = (a + 1) / 2;
        for (int o = -r; o <= r; ++o) offs[a].push_back(o);
        wts[a] = fd_weights(offs[a], a);
    }

    std::mt19937_64 rng(seed);
    const double llo = std::log2(lo), lhi = std::log2(hi);
    std::vector<std::vector<double>> pts(samples, std::vector<double>(nv));
    for (auto& p : pts)
        for (auto& v : p) {
            const double mag = std::exp2(llo + (lhi - llo) * unit(rng));
            v = unit(rng) < 0.5 ? -mag : mag;
        }

    std::vector<std::vector<double>> res(samples, std::vector<double>(alphas.size(), 0.0));
    parallel_for(std::size_t(samples), [&](std::size_t s) {
        const auto& x = pts[s];
        std::vector<double> scale(m.params, 0.0);
        for (int i = 0; i < nv; ++i) scale[i / m.arity] += std::abs(x[i]);
        std::vector<double> y(nv);
        for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
            const auto& al = alphas[ai];
            const int order = std::accumulate(al.begin(), al.end(), 0);
            const double step = order == 0 ? 0.0 : std::exp2(-20.0 / order);
            std::vector<int> vars;
            for (int i = 0; i < nv; ++i)
                if (al[i] > 0) vars.push_back(i);
            std::vector<int> idx(vars.size(), 0);
            cplx acc = 0.0;
            while (true) {
                double w = 1.0;
                y = x;
                for (std::size_t q = 0; q < vars.size(); ++q) {
                    const int v = vars[q], a = al[v];
                    const double h = step * scale[v / m.arity];
                    y[v] = x[v] + offs[a][idx[q]] * h;
                    w *= wts[a][idx[q]];
                }
                if (w != 0.0) {
                    const cplx val = m.eval(y.data());
                    if (std::isnan(val.real()) || std::isnan(val.imag()))
                        throw SymbolError("symbol evaluation returned NaN");
                    acc += w * val;
                }
                std::size_t q = 0;
                for (; q < vars.size(); ++q) {
                    if (++idx[q] < int(offs[al[vars[q]]].size())) break;
                    idx[q] = 0;
                }
                if (q == vars.size()) break;
            }
            // h^-alpha times the homogeneity weight cancels to step^-|alpha|
            double c = std::abs(acc);
            if (order > 0) c /= std::pow(step, order);
            res[s][ai] = c;
        }
    });

    ValidationReport rep;
    rep.pass = true;
    for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
        double c = 0.0;
        for (int s = 0; s < samples; ++s) c = std::max(c, res[s][ai]);
        rep.entries.push_back({alphas[ai], c});
        rep.max_constant = std::max(rep.max_constant, c);
        if (!std::isfinite(c) || c > tol) rep.pass = false;
    }
    return rep;
}

// ---------------------------------------------------------------------------

ConeSplit cone_split(const SymbolND& m1, const GeneratorSet& gen) {
    if (m1.arity != 3 || m1.params != 2) throw SymbolError("cone split needs arity 3, bi-parameter");
    auto piece = [&](int i1, int i2) {
        SymbolND s;
        s.arity = 3;
        s.params = 2;
        s.builder = "cone_piece";
        s.bound = m1.bound;
        auto e = m1.eval;
        s.eval = [e, gen, i1, i2](const double* a) -> cplx {
            const double c1 = i1 == 0 ? gen.cone0(a[0], a[1], a[2]) : gen.cone1(a[0], a[1], a[2]);
            const double c2 = i2 == 0 ? gen.cone0(a[3], a[4], a[5]) : gen.cone1(a[3], a[4], a[5]);
            if (c1 == 0.0 || c2 == 0.0) return 0.0;
            return c1 * c2 * e(a);
        };
        if (m1.separable()) {
            for (int p = 0; p < 2; ++p) {
                const int which = p == 0 ? i1 : i2;
                ParamFactor pf;
                pf.arity = 3;
                auto fe = m1.factors[p].eval;
                pf.eval = [fe, gen, which](double u, double v, double w) -> cplx {
                    const double c = which == 0 ? gen.cone0(u, v, w) : gen.cone1(u, v, w);
                    return c == 0.0 ? cplx(0.0) : c * fe(u, v, w);
                };
                s.factors.push_back(pf);
            }
        }
        return s;
    };
    return {piece(0, 0), piece(0, 1), piece(1, 0), piece(1, 1)};
}

std::vector<std::array<double, 6>> cone_localized_sample(const GeneratorSet& gen, int count,
                                                         unsigned seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::array<double, 6>> out(count);
    for (auto& p : out)
        for (int q = 0; q < 2; ++q) {
            const double mag = std::exp2(-6.0 + 12.0 * unit(rng));
            const double xi = unit(rng) < 0.5 ? -mag : mag;
            const double r = gen.epsilon * mag * unit(rng);
            const double f = unit(rng);
            p[3 * q] = xi;
            p[3 * q + 1] = (unit(rng) < 0.5 ? -1 : 1) * r * f;
            p[3 * q + 2] = (unit(rng) < 0.5 ? -1 : 1) * r * (1 - f);
        }
    return out;
}

// ---------------------------------------------------------------------------
// Taylor split. Along the rays s -> (xi1, s eta1, s zeta1), t -> (xi2, t eta2, t zeta2)
// the symbol is replaced by its tensor Chebyshev interpolant on [0,1]^2 with
// Lobatto nodes. The interpolant matches m1 at s = t = 1, and every Taylor
// term and remainder integral of it is computed exactly up to quadrature, so
// the four pieces add back to m1.

namespace {

struct TaylorEngine {
    std::function<cplx(const double*)> m1;
    int N = 3;
    int D = 16;  // interpolation degree
    std::vector<double> gx, gw;  // Gauss-Legendre on [0,1]

    using Mat = std::vector<cplx>;  // (D+1) x (D+1), index n*(D+1)+l

    // derivative of a Chebyshev series on [0,1] (variable s = (1+x)/2)
    static std::vector<cplx> cheb_diff(const std::vector<cplx>& c) {
        const int n = int(c.size()) - 1;
        std::vector<cplx> d(c.size(), 0.0);
        if (n == 0) return d;
        d[n - 1] = 2.0 * n * c[n];
        for (int k = n - 2; k >= 0; --k) d[k] = (k + 2 < int(d.size()) ? d[k + 2] : 0.0) + 2.0 * (k + 1) * c[k + 1];
        d[0] *= 0.5;
        for (auto& v : d) v *= 2.0;  // chain rule dx/ds
        return d;
    }

    static cplx cheb_eval(const std::vector<cplx>& c, double s) {
        const double x = 2.0 * s - 1.0;
        cplx b1 = 0.0, b2 = 0.0;
        for (int k = int(c.size()) - 1; k >= 1; --k) {
            cplx b0 = c[k] + 2.0 * x * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        return c[0] + x * b1 - b2;
    }

    Mat coefficients(const double* a) const {
        const int P = D + 1;
        Mat vals(P * P);
        double y[6] = {a[0], 0, 0, a[3], 0, 0};
        std::vector<double> nodes(P);
        for (int j = 0; j < P; ++j) nodes[j] = 0.5 * (1.0 + std::cos(kPi * j / D));
        for (int i = 0; i < P; ++i)
            for (int j = 0; j < P; ++j) {
                y[1] = nodes[i] * a[1];
                y[2] = nodes[i] * a[2];
                y[4] = nodes[j] * a[4];
                y[5] = nodes[j] * a[5];
                vals[i * P + j] = m1(y);
            }
        // discrete cosine transform along both axes
        std::vector<double> T(P * P);
        for (int n = 0; n < P; ++n)
            for (int j = 0; j < P; ++j) T[n * P + j] = std::cos(kPi * n * j / D);
        auto fac = [&](int n, int j) {
            double f = 2.0 / D;
            if (j == 0 || j == D) f *= 0.5;
            if (n == 0 || n == D) f *= 0.5;
            return f;
        };
        Mat tmp(P * P, 0.0), C(P * P, 0.0);
        for (int n = 0; n < P; ++n)
            for (int j = 0; j < P; ++j) {
                cplx s = 0.0;
                for (int i = 0; i < P; ++i) s += fac(n, i) * T[n * P + i] * vals[i * P + j];
                tmp[n * P + j] = s;
            }
        double mx = 0.0;
        for (int n = 0; n < P; ++n)
            for (int l = 0; l < P; ++l) {
                cplx s = 0.0;
                for (int j = 0; j < P; ++j) s += fac(l, j) * T[l * P + j] * tmp[n * P + j];
                C[n * P + l] = s;
                mx = std::max(mx, std::abs(s));
            }
        for (auto& c : C)
            if (std::abs(c) <= 1e-14 * mx) c = 0.0;
        return C;
    }

    Mat diff(const Mat& C, int axis, int times) const {
        const int P = D + 1;
        Mat R = C;
        for (int t = 0; t < times; ++t) {
            Mat S(P * P);
            for (int o = 0; o < P; ++o) {
                std::vector<cplx> line(P);
                for (int q = 0; q < P; ++q) line[q] = axis == 0 ? R[q * P + o] : R[o * P + q];
                auto d = cheb_diff(line);
                for (int q = 0; q < P; ++q) (axis == 0 ? S[q * P + o] : S[o * P + q]) = d[q];
            }
            R = std::move(S);
        }
        return R;
    }

    // coefficients along t after evaluating the s-variable at s
    std::vector<cplx> at_s(const Mat& C, double s) const {
        const int P = D + 1;
        std::vector<cplx> out(P);
        std::vector<cplx> col(P);
        for (int l = 0; l < P; ++l) {
            for (int n = 0; n < P; ++n) col[n] = C[n * P + l];
            out[l] = cheb_eval(col, s);
        }
        return out;
    }

    std::array<cplx, 4> pieces(const double* a) const {
        const Mat C = coefficients(a);
        std::array<cplx, 4> r{0.0, 0.0, 0.0, 0.0};
        const double fN = factorial(N - 1);
        auto kern = [&](double s) { return std::pow(1.0 - s, N - 1) / fN; };
        std::vector<Mat> Ds(N + 1);
        for (int p = 0; p <= N; ++p) Ds[p] = diff(C, 0, p);
        for (int p = 0; p < N; ++p)
            for (int q = 0; q < N; ++q)
                r[0] += cheb_eval(at_s(diff(Ds[p], 1, q), 0.0), 0.0) / (factorial(p) * factorial(q));
        // m12: s-Taylor part, t-remainder
        for (int p = 0; p < N; ++p) {
            const auto line = at_s(diff(Ds[p], 1, N), 0.0);
            cplx acc = 0.0;
            for (std::size_t i = 0; i < gx.size(); ++i) acc += gw[i] * kern(gx[i]) * cheb_eval(line, gx[i]);
            r[1] += acc / factorial(p);
        }
        // m21: s-remainder, t-Taylor part
        for (int q = 0; q < N; ++q) {
            const Mat B = diff(Ds[N], 1, q);
            cplx acc = 0.0;
            for (std::size_t i = 0; i < gx.size(); ++i)
                acc += gw[i] * kern(gx[i]) * cheb_eval(at_s(B, gx[i]), 0.0);
            r[2] += acc / factorial(q);
        }
        // m22: double remainder
        {
            const Mat B = diff(Ds[N], 1, N);
            cplx acc = 0.0;
            for (std::size_t i = 0; i < gx.size(); ++i) {
                const auto line = at_s(B, gx[i]);
                cplx inner = 0.0;
                for (std::size_t k = 0; k < gx.size(); ++k)
                    inner += gw[k] * kern(gx[k]) * cheb_eval(line, gx[k]);
                acc += gw[i] * kern(gx[i]) * inner;
            }
            r[3] = acc;
        }
        return r;
    }
};

}  // namespace

TaylorSplit taylor_split(const SymbolND& m1, int N, int quad_nodes, const GeneratorSet& gen,
                         double tol) {
    if (m1.arity != 3 || m1.params != 2) throw SymbolError("taylor split needs arity 3, bi-parameter");
    if (N < 1 || N > 6) throw InvalidInput("Taylor order must lie in [1, 6]");
    if (quad_nodes < 2) throw InvalidInput("need at least two quadrature nodes");
    auto eng = std::make_shared<TaylorEngine>();
    eng->m1 = m1.eval;
    eng->N = N;
    gsl_integration_glfixed_table* tab = gsl_integration_glfixed_table_alloc(quad_nodes);
    if (!tab) throw ConstructionFailure("quadrature table allocation failed");
    for (int i = 0; i < quad_nodes; ++i) {
        double x, w;
        gsl_integration_glfixed_point(0.0, 1.0, i, &x, &w, tab);
        eng->gx.push_back(x);
        eng->gw.push_back(w);
    }
    gsl_integration_glfixed_table_free(tab);

    TaylorSplit out;
    SymbolND* slots[4] = {&out.m11, &out.m12, &out.m21, &out.m22};
    for (int i = 0; i < 4; ++i) {
        SymbolND& s = *slots[i];
        s.arity = 3;
        s.params = 2;
        s.builder = "taylor_piece";
        s.eval = [eng, i](const double* a) { return eng->pieces(a)[i]; };
    }

    const auto probe = cone_localized_sample(gen, 200, 17);
    std::vector<double> err(probe.size()), ref(probe.size());
    parallel_for(probe.size(), [&](std::size_t k) {
        const auto p = eng->pieces(probe[k].data());
        const cplx m = m1.eval(probe[k].data());
        err[k] = std::abs(m - (p[0] + p[1] + p[2] + p[3]));
        ref[k] = std::abs(m);
    });
    const double mref = *std::max_element(ref.begin(), ref.end());
    const double merr = *std::max_element(err.begin(), err.end());
    out.residual = mref > 0.0 ? merr / mref : merr;
    if (!(out.residual <= tol)) throw DecompositionError("Taylor reconstruction residual above tolerance", out.residual);
    return out;
}

// ---------------------------------------------------------------------------
// Fourier tensorization on a dyadic annulus pair.

namespace {

// equals 1 on 1/2 <= r <= 2, supported in 1/4 <= r <= 4
double plateau(const GeneratorSet& g, double r) { return g.psi(2 * r) + g.psi(r) + g.psi(r / 2); }

}  // namespace

cplx SeparableExpansion::coeff(int n1, int n2, int n3, int n4) const {
    if (std::max({std::abs(n1), std::abs(n2), std::abs(n3), std::abs(n4)}) > M) return 0.0;
    const int S = 2 * M + 1;
    return coeffs[(((std::size_t(n1 + M) * S + (n2 + M)) * S + (n3 + M)) * S) + (n4 + M)];
}

double SeparableExpansion::window(int p, double v, double w) const {
    const int k = p == 0 ? k1 : k2;
    return gen.psi(std::hypot(std::ldexp(v, -k), std::ldexp(w, -k)));
}

cplx SeparableExpansion::evaluate(double eta1, double zeta1, double eta2, double zeta2) const {
    const double W = window(0, eta1, zeta1) * window(1, eta2, zeta2);
    if (W == 0.0) return 0.0;
    const int S = 2 * M + 1;
    const double x[4] = {std::ldexp(eta1, -k1), std::ldexp(zeta1, -k1), std::ldexp(eta2, -k2),
                         std::ldexp(zeta2, -k2)};
    std::vector<cplx> e(4 * S);
    for (int a = 0; a < 4; ++a)
        for (int n = -M; n <= M; ++n) e[a * S + n + M] = std::polar(1.0, 2 * kPi * n * x[a] / period);
    cplx total = 0.0;
    std::size_t idx = 0;
    for (int a = 0; a < S; ++a) {
        cplx s2 = 0.0;
        for (int b = 0; b < S; ++b) {
            cplx s3 = 0.0;
            for (int c = 0; c < S; ++c) {
                cplx s4 = 0.0;
                for (int d = 0; d < S; ++d) s4 += coeffs[idx++] * e[3 * S + d];
                s3 += s4 * e[2 * S + c];
            }
            s2 += s3 * e[S + b];
        }
        total += s2 * e[a];
    }
    return W * total;
}

SeparableExpansion fourier_tensorize(const SymbolND& m2, int k1, int k2, int M,
                                     const GeneratorSet& gen) {
    if (m2.arity != 2 || m2.params != 2) throw SymbolError("tensorization needs arity 2, bi-parameter");
    if (M < 0 || M > 40) throw InvalidInput("truncation must lie in [0, 40]");
    if (std::abs(k1) > 60 || std::abs(k2) > 60) throw ScaleError("scale outside representable range");
    SeparableExpansion e;
    e.k1 = k1;
    e.k2 = k2;
    e.M = M;
    e.gen = gen;
    e.period = 8.0;
    int Q = std::max(2 * M + 8, 24);
    Q += Q % 2;
    e.Q = Q;
    const double P = e.period;
    const std::size_t Q2 = std::size_t(Q) * Q, total = Q2 * Q2;

    // FFT-order sample positions on [-P/2, P/2)
    std::vector<double> pos(Q);
    for (int i = 0; i < Q; ++i) pos[i] = P * double(GridSpec::freq(i, Q)) / Q;
    std::vector<double> th(Q2);
    for (int i = 0; i < Q; ++i)
        for (int j = 0; j < Q; ++j) th[i * Q + j] = plateau(gen, std::hypot(pos[i], pos[j]));

    CVec vals(total);
    parallel_for(Q2, [&](std::size_t ij) {
        const int i = int(ij / Q), j = int(ij % Q);
        double a[4];
        a[0] = std::ldexp(pos[i], k1);
        a[1] = std::ldexp(pos[j], k1);
        for (std::size_t kl = 0; kl < Q2; ++kl) {
            const double t = th[ij] * th[kl];
            if (t == 0.0) {
                vals[ij * Q2 + kl] = 0.0;
                continue;
            }
            a[2] = std::ldexp(pos[kl / Q], k2);
            a[3] = std::ldexp(pos[kl % Q], k2);
            vals[ij * Q2 + kl] = m2.eval(a);
        }
    });
    // blend value: plateau-weighted mean of m2
    cplx num = 0.0;
    double den = 0.0;
    for (std::size_t ij = 0; ij < Q2; ++ij)
        for (std::size_t kl = 0; kl < Q2; ++kl) {
            const double t = th[ij] * th[kl];
            num += t * vals[ij * Q2 + kl];
            den += t;
        }
    e.blend = den > 0.0 ? num / den : cplx(0.0);
    for (std::size_t ij = 0; ij < Q2; ++ij)
        for (std::size_t kl = 0; kl < Q2; ++kl) {
            const double t = th[ij] * th[kl];
            cplx& v = vals[ij * Q2 + kl];
            v = t * v + (1.0 - t) * e.blend;
        }
    fftn(vals, {Q, Q, Q, Q}, -1);
    const double norm = 1.0 / double(total);
    const int S = 2 * M + 1;
    e.coeffs.assign(std::size_t(S) * S * S * S, 0.0);
    std::vector<double> shell(M + 1, 0.0);
    for (int a = -M; a <= M; ++a)
        for (int b = -M; b <= M; ++b)
            for (int c = -M; c <= M; ++c)
                for (int d = -M; d <= M; ++d) {
                    const std::size_t src =
                        ((std::size_t(GridSpec::index(a, Q)) * Q + GridSpec::index(b, Q)) * Q +
                         GridSpec::index(c, Q)) * Q + GridSpec::index(d, Q);
                    const cplx v = vals[src] * norm;
                    e.coeffs[(((std::size_t(a + M) * S + (b + M)) * S + (c + M)) * S) + (d + M)] = v;
                    const int sh = std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
                    shell[sh] = std::max(shell[sh], std::abs(v));
                }
    // log-log fit of the shell envelope
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (int s = 1; s <= M; ++s)
        if (shell[s] > 0.0) {
            const double x = std::log(1.0 + s), y = std::log(shell[s]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++cnt;
        }
    if (cnt >= 2) {
        const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
        e.decay_exponent = -slope;
    }
    // constant of the bound |c_n| <= C (1 + |n|_1)^-4 over the retained set
    double C = 0.0;
    for (int a = -M; a <= M; ++a)
        for (int b = -M; b <= M; ++b)
            for (int c = -M; c <= M; ++c)
                for (int d = -M; d <= M; ++d) {
                    const double l1 = 1.0 + std::abs(a) + std::abs(b) + std::abs(c) + std::abs(d);
                    C = std::max(C, std::abs(e.coeff(a, b, c, d)) * std::pow(l1, 4));
                }
    e.decay_constant = C;
    return e;
}

double tensorize_error(const SymbolND& m2, const SeparableExpansion& e, int samples, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::array<double, 4>> pts(samples);
    for (auto& p : pts)
        for (int q = 0; q < 2; ++q) {
            const int k = q == 0 ? e.k1 : e.k2;
            const double r = std::exp2(-1.0 + 2.0 * unit(rng));
            const double th = 2 * kPi * unit(rng);
            p[2 * q] = std::ldexp(r * std::cos(th), k);
            p[2 * q + 1] = std::ldexp(r * std::sin(th), k);
        }
    std::vector<double> err(samples), ref(samples);
    parallel_for(std::size_t(samples), [&](std::size_t i) {
        const auto& p = pts[i];
        const double W = e.window(0, p[0], p[1]) * e.window(1, p[2], p[3]);
        const cplx t = W * m2.eval(p.data());
        err[i] = std::abs(t - e.evaluate(p[0], p[1], p[2], p[3]));
        ref[i] = std::abs(t);
    });
    const double r = *std::max_element(ref.begin(), ref.end());
    const double m = *std::max_element(err.begin(), err.end());
    return r > 0.0 ? m / r : m;
}

// ---------------------------------------------------------------------------
// Localized Sobolev norm: window each parameter by the radial annulus psi(|.|)
// on [-2,2)^3 and weight the spectrum by (1+4 pi^2 |zeta_i|^2)^{s_i}.

namespace {

double sobolev_from_samples(CVec vals, const std::vector<int>& dims, double box,
                            const std::vector<double>& s) {
    fftn(vals, dims, -1);
    const int rank = int(dims.size());
    const int n = dims[0];
    const double h = box / n;
    const double cell = std::pow(h, rank);
    const double dual = std::pow(1.0 / box, rank);
    double acc = 0.0;
    std::vector<int> idx(rank, 0);
    for (std::size_t k = 0; k < vals.size(); ++k) {
        std::size_t r = k;
        for (int d = rank - 1; d >= 0; --d) {
            idx[d] = GridSpec::freq(int(r % n), n);
            r /= n;
        }
        double w = 1.0;
        for (int p = 0; p < rank / 3; ++p) {
            double z2 = 0.0;
            for (int q = 0; q < 3; ++q) {
                const double z = idx[3 * p + q] / box;
                z2 += z * z;
            }
            if (s[p] != 0.0) w *= std::pow(1.0 + 4 * kPi * kPi * z2, s[p]);
        }
        acc += std::norm(vals[k] * cell) * dual * w;
    }
    return std::sqrt(acc);
}

double sobolev_norm_at(const SymbolND& m, int j, int k, double s1, double s2,
                       const GeneratorSet& gen, int n) {
    const double box = 4.0;
    std::vector<double> pos(n);
    for (int i = 0; i < n; ++i) pos[i] = box * GridSpec::freq(i, n) / n;
    const std::size_t n3 = std::size_t(n) * n * n;
    auto win3 = [&](std::size_t id, double* out) {
        const double u = pos[id / (n * n)], v = pos[(id / n) % n], w = pos[id % n];
        out[0] = u;
        out[1] = v;
        out[2] = w;
        return gen.psi(std::sqrt(u * u + v * v + w * w));
    };
    if (m.separable() && m.arity == 3 && m.params == 2) {
        double norm = 1.0;
        for (int p = 0; p < 2; ++p) {
            CVec v(n3);
            const int sc = p == 0 ? j : k;
            for (std::size_t id = 0; id < n3; ++id) {
                double x[3];
                const double W = win3(id, x);
                v[id] = W == 0.0 ? cplx(0.0)
                                 : W * m.factors[p].eval(std::ldexp(x[0], sc), std::ldexp(x[1], sc),
                                                         std::ldexp(x[2], sc));
            }
            norm *= sobolev_from_samples(std::move(v), {n, n, n}, box, {p == 0 ? s1 : s2});
        }
        return norm;
    }
    if (m.arity != 3 || m.params != 2) throw SymbolError("Sobolev norm needs arity 3, bi-parameter");
    CVec v(n3 * n3);
    std::vector<double> W(n3);
    for (std::size_t id = 0; id < n3; ++id) {
        double x[3];
        W[id] = win3(id, x);
    }
    parallel_for(n3, [&](std::size_t a) {
        double y[6];
        double x[3];
        win3(a, x);
        for (int q = 0; q < 3; ++q) y[q] = std::ldexp(x[q], j);
        for (std::size_t b = 0; b < n3; ++b) {
            const double w = W[a] * W[b];
            if (w == 0.0) {
                v[a * n3 + b] = 0.0;
                continue;
            }
            win3(b, x);
            for (int q = 0; q < 3; ++q) y[3 + q] = std::ldexp(x[q], k);
            v[a * n3 + b] = w * m.eval(y);
        }
    });
    return sobolev_from_samples(std::move(v), {n, n, n, n, n, n}, box, {s1, s2});
}

}  // namespace

SobolevNorm localized_sobolev_norm(const SymbolND& m, int j, int k, double s1, double s2,
                                   const GeneratorSet& gen, int nodes) {
    if (s1 < 0 || s2 < 0) throw InvalidExponent("Sobolev exponents must be non-negative");
    if (nodes < 8 || (nodes & (nodes - 1)) != 0) throw InvalidInput("nodes must be a power of two >= 8");
    SobolevNorm r;
    r.value = sobolev_norm_at(m, j, k, s1, s2, gen, nodes);
    r.coarse_value = sobolev_norm_at(m, j, k, s1, s2, gen, nodes / 2);
    const double d = std::abs(r.value - r.coarse_value);
    r.warning = r.value > 0.0 ? d / r.value > 0.1 : d > 0.0;
    return r;
}

}  // namespace flagmult

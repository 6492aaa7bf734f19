#include <Eigen/SVD>

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstring>
#include <map>

#include "flagmult/multiop.hpp"
#include "multiop_internal.hpp"

namespace flagmult {

PlanKind parse_plan_kind(const std::string& s) {
    if (s == "brute" || s == "BruteForce") return PlanKind::BruteForce;
    if (s == "separable" || s == "Separable") return PlanKind::Separable;
    if (s == "lowrank" || s == "LowRankDyadic") return PlanKind::LowRankDyadic;
    throw PlanError("unknown plan kind '" + s + "'");
}

std::string to_string(PlanKind k) {
    switch (k) {
        case PlanKind::BruteForce: return "BruteForce";
        case PlanKind::Separable: return "Separable";
        case PlanKind::LowRankDyadic: return "LowRankDyadic";
    }
    return "?";
}

namespace detail {

Spectrum clean_spectrum(const SampledFunction& f) {
    Spectrum s = dft(f);
    s.zero_nyquist();
    return s;
}

ModeList sparse_modes(const Spectrum& s, std::size_t cap, bool oracle) {
    ModeList m = to_modes(s, 1e-14);
    if (m.size() > cap) {
        const std::string msg = "input has " + std::to_string(m.size()) + " modes, limit " +
                                std::to_string(cap);
        if (oracle) throw OracleTooLarge(msg);
        throw PlanError(msg);
    }
    return m;
}

Spectrum embed(const Spectrum& s, const GridSpec& big) {
    Spectrum out(big);
    const int n1 = s.grid.N1, n2 = s.grid.N2;
    for (int i1 = 0; i1 < n1; ++i1)
        for (int i2 = 0; i2 < n2; ++i2) {
            const cplx c = s.coeffs[std::size_t(i1) * n2 + i2];
            if (c != 0.0) out.at(GridSpec::freq(i1, n1), GridSpec::freq(i2, n2)) = c;
        }
    return out;
}

Spectrum restrict_band(const Spectrum& big, const GridSpec& g) {
    Spectrum out(g);
    for (int k1 = -g.N1 / 2 + 1; k1 < g.N1 / 2; ++k1)
        for (int k2 = -g.N2 / 2 + 1; k2 < g.N2 / 2; ++k2) out.at(k1, k2) = big.at(k1, k2);
    return out;
}

int extent(const Spectrum& s, int axis) {
    double mx = 0.0;
    for (const auto& c : s.coeffs) mx = std::max(mx, std::abs(c));
    if (mx == 0.0) return 0;
    int e = 0;
    const int n1 = s.grid.N1, n2 = s.grid.N2;
    for (int i1 = 0; i1 < n1; ++i1)
        for (int i2 = 0; i2 < n2; ++i2)
            if (std::abs(s.coeffs[std::size_t(i1) * n2 + i2]) > 1e-15 * mx)
                e = std::max(e, std::abs(GridSpec::freq(axis == 1 ? i1 : i2, axis == 1 ? n1 : n2)));
    return e;
}

GridSpec padded_grid(const std::vector<const Spectrum*>& in, bool* padded) {
    const GridSpec& g = in.front()->grid;
    int e1 = 0, e2 = 0;
    for (auto* s : in) {
        e1 += extent(*s, 1);
        e2 += extent(*s, 2);
    }
    const bool p1 = e1 >= g.N1 / 2, p2 = e2 >= g.N2 / 2;
    if (padded) *padded = p1 || p2;
    return GridSpec(p1 ? 2 * g.N1 : g.N1, p2 ? 2 * g.N2 : g.N2, g.L1, g.L2);
}

}  // namespace detail

using namespace detail;

namespace {

void require_grid(const GridSpec& a, const GridSpec& b) {
    if (a != b) throw InvalidInput("inputs live on different grids");
}

// output frequency index, or -1 when it is outside the band or on the Nyquist line
long out_index(const GridSpec& g, int K1, int K2) {
    if (K1 <= -g.N1 / 2 || K1 >= g.N1 / 2 || K2 <= -g.N2 / 2 || K2 >= g.N2 / 2) return -1;
    return long(GridSpec::index(K1, g.N1)) * g.N2 + GridSpec::index(K2, g.N2);
}

ModeList drop_nyquist(const GridSpec& g, const ModeList& m) {
    validate_modes(g, m);
    ModeList out;
    for (const auto& x : m)
        if (x.k1 != -g.N1 / 2 && x.k2 != -g.N2 / 2) out.push_back(x);
    return out;
}

// ---------------------------------------------------------------------------
// sparse direct sums

using Evaluator = std::function<cplx(const double*)>;

SampledFunction direct_sum(const Evaluator& m, int arity, const std::vector<ModeList>& raw,
                           const GridSpec& g, ApplyReport* rep) {
    std::vector<ModeList> in;
    for (const auto& r : raw) in.push_back(drop_nyquist(g, r));
    Spectrum out(g);
    std::size_t dropped = 0;
    const double scale = std::pow(g.area(), -(double(in.size()) - 1.0));
    double args[6];
    if (arity == 3) {
        for (const auto& a : in[0])
            for (const auto& b : in[1])
                for (const auto& c : in[2]) {
                    const long idx = out_index(g, a.k1 + b.k1 + c.k1, a.k2 + b.k2 + c.k2);
                    if (idx < 0) {
                        ++dropped;
                        continue;
                    }
                    args[0] = g.phys(a.k1, 1);
                    args[1] = g.phys(b.k1, 1);
                    args[2] = g.phys(c.k1, 1);
                    args[3] = g.phys(a.k2, 2);
                    args[4] = g.phys(b.k2, 2);
                    args[5] = g.phys(c.k2, 2);
                    out.coeffs[idx] += m(args) * a.c * b.c * c.c * scale;
                }
    } else {
        for (const auto& a : in[0])
            for (const auto& b : in[1]) {
                const long idx = out_index(g, a.k1 + b.k1, a.k2 + b.k2);
                if (idx < 0) {
                    ++dropped;
                    continue;
                }
                args[0] = g.phys(a.k1, 1);
                args[1] = g.phys(b.k1, 1);
                args[2] = g.phys(a.k2, 2);
                args[3] = g.phys(b.k2, 2);
                out.coeffs[idx] += m(args) * a.c * b.c * scale;
            }
    }
    if (rep) rep->discarded += dropped;
    return idft(out);
}

// separable symbol without rank terms: factor tables on the distinct axis values
SampledFunction factored_sum(const ParamFactor& F1, const ParamFactor& F2, int arity,
                             const std::vector<ModeList>& raw, const GridSpec& g, ApplyReport* rep) {
    std::vector<ModeList> in;
    for (const auto& r : raw) in.push_back(drop_nyquist(g, r));
    const int n = int(in.size());
    // distinct axis values per input
    std::vector<std::vector<int>> v1(n), v2(n);
    std::vector<std::vector<int>> i1(n), i2(n);
    for (int q = 0; q < n; ++q) {
        for (const auto& x : in[q]) {
            v1[q].push_back(x.k1);
            v2[q].push_back(x.k2);
        }
        for (auto* v : {&v1[q], &v2[q]}) {
            std::sort(v->begin(), v->end());
            v->erase(std::unique(v->begin(), v->end()), v->end());
        }
        for (const auto& x : in[q]) {
            i1[q].push_back(int(std::lower_bound(v1[q].begin(), v1[q].end(), x.k1) - v1[q].begin()));
            i2[q].push_back(int(std::lower_bound(v2[q].begin(), v2[q].end(), x.k2) - v2[q].begin()));
        }
    }
    auto table = [&](const ParamFactor& F, const std::vector<std::vector<int>>& v, int axis) {
        std::vector<cplx> t;
        if (n == 3) {
            t.resize(v[0].size() * v[1].size() * v[2].size());
            std::size_t p = 0;
            for (int a : v[0])
                for (int b : v[1])
                    for (int c : v[2])
                        t[p++] = F.eval(g.phys(a, axis), g.phys(b, axis), g.phys(c, axis));
        } else {
            t.resize(v[0].size() * v[1].size());
            std::size_t p = 0;
            for (int a : v[0])
                for (int b : v[1]) t[p++] = F.eval(0.0, g.phys(a, axis), g.phys(b, axis));
        }
        return t;
    };
    (void)arity;
    const auto T1 = table(F1, v1, 1), T2 = table(F2, v2, 2);
    Spectrum out(g);
    std::size_t dropped = 0;
    const double scale = std::pow(g.area(), -(double(n) - 1.0));
    if (n == 3) {
        const std::size_t b1 = v1[1].size(), c1 = v1[2].size(), b2 = v2[1].size(), c2 = v2[2].size();
        for (std::size_t a = 0; a < in[0].size(); ++a)
            for (std::size_t b = 0; b < in[1].size(); ++b)
                for (std::size_t c = 0; c < in[2].size(); ++c) {
                    const auto &A = in[0][a], &B = in[1][b], &C = in[2][c];
                    const long idx = out_index(g, A.k1 + B.k1 + C.k1, A.k2 + B.k2 + C.k2);
                    if (idx < 0) {
                        ++dropped;
                        continue;
                    }
                    const cplx s1 = T1[(std::size_t(i1[0][a]) * b1 + i1[1][b]) * c1 + i1[2][c]];
                    const cplx s2 = T2[(std::size_t(i2[0][a]) * b2 + i2[1][b]) * c2 + i2[2][c]];
                    out.coeffs[idx] += s1 * s2 * A.c * B.c * C.c * scale;
                }
    } else {
        const std::size_t b1 = v1[1].size(), b2 = v2[1].size();
        for (std::size_t a = 0; a < in[0].size(); ++a)
            for (std::size_t b = 0; b < in[1].size(); ++b) {
                const auto &A = in[0][a], &B = in[1][b];
                const long idx = out_index(g, A.k1 + B.k1, A.k2 + B.k2);
                if (idx < 0) {
                    ++dropped;
                    continue;
                }
                const cplx s1 = T1[std::size_t(i1[0][a]) * b1 + i1[1][b]];
                const cplx s2 = T2[std::size_t(i2[0][a]) * b2 + i2[1][b]];
                out.coeffs[idx] += s1 * s2 * A.c * B.c * scale;
            }
    }
    if (rep) rep->discarded += dropped;
    return idft(out);
}

// ---------------------------------------------------------------------------
// rank-term engine

const std::function<double(double)>& filter_of(const RankTerm& t, int arity, int q) {
    if (arity == 3) return q == 0 ? t.a : (q == 1 ? t.b : t.w);
    return q == 0 ? t.b : t.w;
}

struct AxisFilters {
    // per input: distinct tabulated filters and, per term, the id used
    std::vector<std::vector<std::vector<double>>> tables;
    std::vector<std::vector<int>> id;
    std::vector<int> active;  // terms whose filters meet every input's support
};

AxisFilters tabulate_terms(const std::vector<RankTerm>& terms, int arity, int nin, const GridSpec& big,
                           int axis, const std::vector<std::vector<char>>& mask) {
    AxisFilters F;
    F.tables.resize(nin);
    F.id.assign(nin, std::vector<int>(terms.size(), -1));
    const int n = big.n(axis);
    for (std::size_t t = 0; t < terms.size(); ++t) {
        bool live = true;
        for (int q = 0; q < nin && live; ++q) {
            const auto& fn = filter_of(terms[t], arity, q);
            std::vector<double> v(n, 1.0);
            if (fn)
                for (int i = 0; i < n; ++i) v[i] = fn(big.phys(GridSpec::freq(i, n), axis));
            bool hit = false;
            for (int i = 0; i < n && !hit; ++i) hit = mask[q][i] && v[i] != 0.0;
            if (!hit) {
                live = false;
                break;
            }
            int found = -1;
            for (std::size_t d = 0; d < F.tables[q].size(); ++d)
                if (std::memcmp(F.tables[q][d].data(), v.data(), sizeof(double) * n) == 0) {
                    found = int(d);
                    break;
                }
            if (found < 0) {
                found = int(F.tables[q].size());
                F.tables[q].push_back(std::move(v));
            }
            F.id[q][t] = found;
        }
        if (live && terms[t].c != 0.0) F.active.push_back(int(t));
    }
    return F;
}

SampledFunction rank_engine(const std::vector<RankTerm>& T1, const std::vector<RankTerm>& T2,
                            int arity, const std::vector<const SampledFunction*>& inputs,
                            ApplyReport* rep) {
    const GridSpec& g = inputs.front()->grid;
    const int nin = int(inputs.size());
    std::vector<Spectrum> spec;
    for (auto* f : inputs) spec.push_back(clean_spectrum(*f));
    std::vector<const Spectrum*> ptrs;
    for (auto& s : spec) ptrs.push_back(&s);
    bool padded = false;
    const GridSpec big = padded_grid(ptrs, &padded);
    const int n1 = big.N1, n2 = big.N2;
    std::vector<CVec> hat;
    std::vector<std::vector<char>> m1(nin, std::vector<char>(n1, 0)), m2(nin, std::vector<char>(n2, 0));
    for (int q = 0; q < nin; ++q) {
        Spectrum e = embed(spec[q], big);
        for (int i1 = 0; i1 < n1; ++i1)
            for (int i2 = 0; i2 < n2; ++i2)
                if (e.coeffs[std::size_t(i1) * n2 + i2] != 0.0) m1[q][i1] = m2[q][i2] = 1;
        hat.push_back(std::move(e.coeffs));
    }
    const AxisFilters A1 = tabulate_terms(T1, arity, nin, big, 1, m1);
    const AxisFilters A2 = tabulate_terms(T2, arity, nin, big, 2, m2);

    CVec acc(big.size(), 0.0);
    std::vector<CVec> P(nin);
    std::vector<std::map<int, CVec>> Y(nin);
    std::size_t terms = 0;
    for (int t1 : A1.active) {
        for (int q = 0; q < nin; ++q) {
            const auto& f = A1.tables[q][A1.id[q][t1]];
            P[q] = hat[q];
            for (int i1 = 0; i1 < n1; ++i1) {
                cplx* row = P[q].data() + std::size_t(i1) * n2;
                for (int i2 = 0; i2 < n2; ++i2) row[i2] *= f[i1];
            }
            fft_axis(P[q], n1, n2, 1, +1);
            Y[q].clear();
        }
        for (int t2 : A2.active) {
            std::vector<const CVec*> y(nin);
            for (int q = 0; q < nin; ++q) {
                const int id = A2.id[q][t2];
                auto it = Y[q].find(id);
                if (it == Y[q].end()) {
                    const auto& f = A2.tables[q][id];
                    CVec v = P[q];
                    for (int i1 = 0; i1 < n1; ++i1) {
                        cplx* row = v.data() + std::size_t(i1) * n2;
                        for (int i2 = 0; i2 < n2; ++i2) row[i2] *= f[i2];
                    }
                    fft_axis(v, n1, n2, 2, +1);
                    it = Y[q].emplace(id, std::move(v)).first;
                }
                y[q] = &it->second;
            }
            const cplx c = T1[t1].c * T2[t2].c;
            if (nin == 3)
                for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += c * (*y[0])[i] * (*y[1])[i] * (*y[2])[i];
            else
                for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += c * (*y[0])[i] * (*y[1])[i];
            ++terms;
        }
    }
    // physical values are backward(hat) / area; the output coefficient is cell_area * forward
    fft2(acc, n1, n2, -1);
    const double scale = big.cell_area() / std::pow(big.area(), double(nin));
    Spectrum out(big);
    for (std::size_t i = 0; i < acc.size(); ++i) out.coeffs[i] = acc[i] * scale;
    if (rep) {
        rep->terms += terms;
        rep->padded = rep->padded || padded;
    }
    return idft(restrict_band(out, g));
}

// ---------------------------------------------------------------------------
// dyadic block low-rank engine on the active frequency lattice

int block_key(const GridSpec& g, const std::vector<int>& ks, int axis) {
    double mx = 0.0;
    for (int k : ks) mx = std::max(mx, std::abs(g.phys(k, axis)));
    return mx == 0.0 ? INT_MIN : int(std::floor(std::log2(mx)));
}

SampledFunction lattice_engine(const std::vector<Evaluator>& pieces, int arity,
                               const std::vector<ModeList>& raw, const GridSpec& g,
                               const OperatorPlan& plan, ApplyReport* rep) {
    if (plan.M < 1) throw PlanError("rank cap must be positive");
    std::vector<ModeList> in;
    for (const auto& r : raw) in.push_back(drop_nyquist(g, r));
    const int n = int(in.size());
    std::vector<std::vector<int>> v1(n), v2(n);
    for (int q = 0; q < n; ++q) {
        for (const auto& x : in[q]) {
            v1[q].push_back(x.k1);
            v2[q].push_back(x.k2);
        }
        for (auto* v : {&v1[q], &v2[q]}) {
            std::sort(v->begin(), v->end());
            v->erase(std::unique(v->begin(), v->end()), v->end());
        }
    }
    std::size_t rows = 1, cols = 1;
    for (int q = 0; q < n; ++q) {
        rows *= std::max<std::size_t>(1, v1[q].size());
        cols *= std::max<std::size_t>(1, v2[q].size());
    }
    if (rows * cols > std::size_t(1) << 24) throw PlanError("active frequency lattice too large");
    Spectrum out(g);
    for (int q = 0; q < n; ++q)
        if (in[q].empty()) {
            if (rep) rep->path = "lowrank:lattice";
            return idft(out);
        }

    // lattice coordinates
    auto decode = [&](std::size_t r, const std::vector<std::vector<int>>& v) {
        std::vector<int> ks(n);
        for (int q = n - 1; q >= 0; --q) {
            ks[q] = v[q][r % v[q].size()];
            r /= v[q].size();
        }
        return ks;
    };
    auto encode = [&](const std::vector<int>& ks, const std::vector<std::vector<int>>& v) {
        std::size_t r = 0;
        for (int q = 0; q < n; ++q)
            r = r * v[q].size() +
                std::size_t(std::lower_bound(v[q].begin(), v[q].end(), ks[q]) - v[q].begin());
        return r;
    };
    std::vector<int> rkey(rows), ckey(cols);
    std::vector<std::vector<int>> rk(rows), ck(cols);
    for (std::size_t r = 0; r < rows; ++r) {
        rk[r] = decode(r, v1);
        rkey[r] = block_key(g, rk[r], 1);
    }
    for (std::size_t c = 0; c < cols; ++c) {
        ck[c] = decode(c, v2);
        ckey[c] = block_key(g, ck[c], 2);
    }
    std::map<int, std::vector<std::size_t>> rblocks, cblocks;
    for (std::size_t r = 0; r < rows; ++r) rblocks[rkey[r]].push_back(r);
    for (std::size_t c = 0; c < cols; ++c) cblocks[ckey[c]].push_back(c);
    std::vector<std::size_t> rpos(rows), cpos(cols);
    std::vector<int> rbid(rows), cbid(cols);
    {
        int b = 0;
        for (auto& [k, list] : rblocks) {
            for (std::size_t i = 0; i < list.size(); ++i) {
                rpos[list[i]] = i;
                rbid[list[i]] = b;
            }
            ++b;
        }
        b = 0;
        for (auto& [k, list] : cblocks) {
            for (std::size_t i = 0; i < list.size(); ++i) {
                cpos[list[i]] = i;
                cbid[list[i]] = b;
            }
            ++b;
        }
    }
    std::vector<const std::vector<std::size_t>*> rlist, clist;
    for (auto& [k, l] : rblocks) rlist.push_back(&l);
    for (auto& [k, l] : cblocks) clist.push_back(&l);
    const std::size_t nrb = rlist.size(), ncb = clist.size();

    // factors per piece and block pair
    struct Block {
        Eigen::MatrixXcd U;  // scaled by the singular values
        Eigen::MatrixXcd V;
    };
    std::vector<std::vector<Block>> fac(pieces.size(), std::vector<Block>(nrb * ncb));
    double total = 0.0, lost = 0.0;
    std::size_t kept = 0;
    double args[6];
    for (std::size_t p = 0; p < pieces.size(); ++p)
        for (std::size_t rb = 0; rb < nrb; ++rb)
            for (std::size_t cb = 0; cb < ncb; ++cb) {
                const auto& R = *rlist[rb];
                const auto& C = *clist[cb];
                Eigen::MatrixXcd S(R.size(), C.size());
                bool any = false;
                for (std::size_t i = 0; i < R.size(); ++i)
                    for (std::size_t j = 0; j < C.size(); ++j) {
                        for (int q = 0; q < n; ++q) {
                            args[q] = g.phys(rk[R[i]][q], 1);
                            args[n + q] = g.phys(ck[C[j]][q], 2);
                        }
                        const cplx v = pieces[p](args);
                        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                            throw SymbolError("symbol not finite on the frequency lattice");
                        S(i, j) = v;
                        any = any || v != 0.0;
                    }
                if (!any) continue;
                Eigen::BDCSVD<Eigen::MatrixXcd> svd(S, Eigen::ComputeThinU | Eigen::ComputeThinV);
                const auto& sv = svd.singularValues();
                int r = 0;
                for (int i = 0; i < sv.size(); ++i) {
                    total += sv(i) * sv(i);
                    if (i < plan.M && sv(i) > 1e-15 * sv(0)) ++r;
                    else lost += sv(i) * sv(i);
                }
                kept += std::size_t(r);
                Block& B = fac[p][rb * ncb + cb];
                B.U = svd.matrixU().leftCols(r) * sv.head(r).asDiagonal();
                B.V = svd.matrixV().leftCols(r);
            }
    const double residual = total > 0.0 ? std::sqrt(lost / total) : 0.0;
    if (rep) {
        rep->rank += kept;
        rep->terms += kept;
        rep->residual = std::max(rep->residual, residual);
        rep->path = "lowrank:lattice";
    }
    if (residual > plan.tol) throw DecompositionError("low-rank truncation residual above tolerance", residual);

    // each retained term evaluated as a separable sum over mode triples
    const double scale = std::pow(g.area(), -(double(n) - 1.0));
    std::size_t dropped = 0;
    std::vector<std::size_t> pick(n, 0);
    std::vector<int> a1(n), a2(n);
    const std::size_t total_tuples = [&] {
        std::size_t t = 1;
        for (int q = 0; q < n; ++q) t *= in[q].size();
        return t;
    }();
    for (std::size_t t = 0; t < total_tuples; ++t) {
        std::size_t rem = t;
        for (int q = n - 1; q >= 0; --q) {
            pick[q] = rem % in[q].size();
            rem /= in[q].size();
        }
        int K1 = 0, K2 = 0;
        cplx prod = scale;
        for (int q = 0; q < n; ++q) {
            const Mode& m = in[q][pick[q]];
            a1[q] = m.k1;
            a2[q] = m.k2;
            K1 += m.k1;
            K2 += m.k2;
            prod *= m.c;
        }
        const long idx = out_index(g, K1, K2);
        if (idx < 0) {
            ++dropped;
            continue;
        }
        const std::size_t r = encode(a1, v1), c = encode(a2, v2);
        const std::size_t bid = std::size_t(rbid[r]) * ncb + cbid[c];
        cplx val = 0.0;
        for (std::size_t p = 0; p < pieces.size(); ++p) {
            const Block& B = fac[p][bid];
            if (B.U.cols() == 0) continue;
            val += (B.U.row(rpos[r]) * B.V.row(cpos[c]).adjoint())(0, 0);
        }
        out.coeffs[idx] += val * prod;
    }
    if (rep) rep->discarded += dropped;
    return idft(out);
}

std::vector<Evaluator> cone_pieces(const SymbolND& m1, const GeneratorSet& gen) {
    const ConeSplit cs = cone_split(m1, gen);
    return {cs.m00.eval, cs.m01.eval, cs.m10.eval, cs.m11.eval};
}

std::vector<ModeList> modes_of(const std::vector<const SampledFunction*>& in, std::size_t cap,
                               bool oracle) {
    std::vector<ModeList> m;
    for (auto* f : in) m.push_back(sparse_modes(clean_spectrum(*f), cap, oracle));
    return m;
}

void begin(ApplyReport* rep, const std::string& path) {
    if (rep) {
        *rep = ApplyReport{};
        rep->path = path;
    }
}

SampledFunction apply_arity3(const Evaluator& full, const SymbolND* sep, const SymbolND* m1_for_cone,
                             const Evaluator& m2_eval,
                             const std::vector<const SampledFunction*>& in, const OperatorPlan& plan,
                             const GeneratorSet& gen, ApplyReport* rep) {
    const GridSpec& g = in[0]->grid;
    for (auto* f : in) require_grid(f->grid, g);
    switch (plan.kind) {
        case PlanKind::BruteForce: {
            begin(rep, "brute");
            return direct_sum(full, 3, modes_of(in, kOracleMaxModes, true), g, rep);
        }
        case PlanKind::Separable: {
            if (!sep) throw PlanError("symbol is not separable; use the low-rank plan");
            const auto& F1 = sep->factors[0];
            const auto& F2 = sep->factors[1];
            if (F1.has_rank() && F2.has_rank()) {
                begin(rep, "separable:rank");
                return rank_engine(F1.terms, F2.terms, 3, in, rep);
            }
            begin(rep, "separable:factored");
            return factored_sum(F1, F2, 3, modes_of(in, kOracleMaxModes, false), g, rep);
        }
        case PlanKind::LowRankDyadic: {
            if (sep && sep->factors[0].has_rank() && sep->factors[1].has_rank()) {
                begin(rep, "lowrank:rank");
                return rank_engine(sep->factors[0].terms, sep->factors[1].terms, 3, in, rep);
            }
            begin(rep, "lowrank:lattice");
            std::vector<Evaluator> pieces;
            for (auto& c : cone_pieces(*m1_for_cone, gen)) {
                if (!m2_eval) {
                    pieces.push_back(c);
                    continue;
                }
                auto m2 = m2_eval;
                pieces.push_back([c, m2](const double* a) {
                    const double b[4] = {a[1], a[2], a[4], a[5]};
                    return c(a) * m2(b);
                });
            }
            return lattice_engine(pieces, 3, modes_of(in, 256, false), g, plan, rep);
        }
    }
    throw PlanError("unknown plan");
}

}  // namespace

SampledFunction apply_trilinear_brute(const SymbolND& m, const ModeList& f, const ModeList& g,
                                      const ModeList& h, const GridSpec& grid, ApplyReport* rep) {
    if (m.arity != 3 || m.params != 2) throw SymbolError("trilinear symbol must be arity 3, bi-parameter");
    for (auto* x : {&f, &g, &h})
        if (x->size() > std::size_t(kOracleMaxModes)) throw OracleTooLarge("oracle limited to 64 modes per input");
    return direct_sum(m.eval, 3, {f, g, h}, grid, rep);
}

SampledFunction apply_trilinear_brute(const FlagSymbol& m, const ModeList& f, const ModeList& g,
                                      const ModeList& h, const GridSpec& grid, ApplyReport* rep) {
    m.validate();
    return apply_trilinear_brute(flag_as_symbol(m), f, g, h, grid, rep);
}

SampledFunction apply_bilinear_brute(const SymbolND& m, const ModeList& f, const ModeList& g,
                                     const GridSpec& grid, ApplyReport* rep) {
    if (m.arity != 2 || m.params != 2) throw SymbolError("bilinear symbol must be arity 2, bi-parameter");
    for (auto* x : {&f, &g})
        if (x->size() > std::size_t(kOracleMaxModes)) throw OracleTooLarge("oracle limited to 64 modes per input");
    return direct_sum(m.eval, 2, {f, g}, grid, rep);
}

SampledFunction apply_flag(const FlagSymbol& flag, const SampledFunction& f, const SampledFunction& g,
                           const SampledFunction& h, const OperatorPlan& plan, const GeneratorSet& gen,
                           ApplyReport* rep) {
    flag.validate();
    const SymbolND full = flag_as_symbol(flag);
    return apply_arity3(full.eval, full.separable() ? &full : nullptr, &flag.m1, flag.m2.eval, {&f, &g, &h},
                        plan, gen, rep);
}

SampledFunction apply_trilinear(const SymbolND& m, const SampledFunction& f, const SampledFunction& g,
                                const SampledFunction& h, const OperatorPlan& plan, const GeneratorSet& gen,
                                ApplyReport* rep) {
    if (m.arity != 3 || m.params != 2) throw SymbolError("trilinear symbol must be arity 3, bi-parameter");
    return apply_arity3(m.eval, m.separable() ? &m : nullptr, &m, nullptr, {&f, &g, &h}, plan, gen, rep);
}

SampledFunction apply_bilinear(const SymbolND& m, const SampledFunction& f, const SampledFunction& g,
                               const OperatorPlan& plan, const GeneratorSet& gen, ApplyReport* rep) {
    (void)gen;
    if (m.arity != 2 || m.params != 2) throw SymbolError("bilinear symbol must be arity 2, bi-parameter");
    require_grid(f.grid, g.grid);
    const std::vector<const SampledFunction*> in{&f, &g};
    const bool rank = m.separable() && m.factors[0].has_rank() && m.factors[1].has_rank();
    switch (plan.kind) {
        case PlanKind::BruteForce:
            begin(rep, "brute");
            return direct_sum(m.eval, 2, modes_of(in, kOracleMaxModes, true), f.grid, rep);
        case PlanKind::Separable:
            if (!m.separable()) throw PlanError("symbol is not separable; use the low-rank plan");
            if (rank) {
                begin(rep, "separable:rank");
                return rank_engine(m.factors[0].terms, m.factors[1].terms, 2, in, rep);
            }
            begin(rep, "separable:factored");
            return factored_sum(m.factors[0], m.factors[1], 2, modes_of(in, kOracleMaxModes, false), f.grid,
                                rep);
        case PlanKind::LowRankDyadic:
            if (rank) {
                begin(rep, "lowrank:rank");
                return rank_engine(m.factors[0].terms, m.factors[1].terms, 2, in, rep);
            }
            begin(rep, "lowrank:lattice");
            return lattice_engine({m.eval}, 2, modes_of(in, 256, false), f.grid, plan, rep);
    }
    throw PlanError("unknown plan");
}

SampledFunction product_in_band(const std::vector<const SampledFunction*>& pieces, bool* padded) {
    if (pieces.empty()) throw InvalidInput("no factors");
    const GridSpec& g = pieces[0]->grid;
    for (auto* p : pieces) require_grid(p->grid, g);
    std::vector<Spectrum> spec;
    for (auto* p : pieces) spec.push_back(clean_spectrum(*p));
    std::vector<const Spectrum*> ptrs;
    for (auto& s : spec) ptrs.push_back(&s);
    const GridSpec big = padded_grid(ptrs, padded);
    SampledFunction prod(big, CVec(big.size(), 1.0));
    for (auto& s : spec) prod = prod * idft(embed(s, big));
    return idft(restrict_band(dft(prod), g));
}

}  // namespace flagmult

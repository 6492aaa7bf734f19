#include "flagmult/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <set>
#include <utility>

namespace flagmult {
namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

void require_same(const GridSpec& a, const GridSpec& b) {
    if (a != b) throw InvalidInput("grid mismatch");
}

}  // namespace

GridSpec::GridSpec(int n1, int n2, double l1, double l2) : N1(n1), N2(n2), L1(l1), L2(l2) {
    validate();
}

void GridSpec::validate() const {
    if (!is_pow2(N1) || !is_pow2(N2) || N1 < 8 || N2 < 8)
        throw InvalidInput("grid sizes must be powers of two >= 8");
    if (!(L1 > 0.0) || !(L2 > 0.0) || !std::isfinite(L1) || !std::isfinite(L2))
        throw InvalidInput("period lengths must be positive");
}

SampledFunction::SampledFunction(const GridSpec& g) : grid(g), values(g.size()) {}

SampledFunction::SampledFunction(const GridSpec& g, CVec v) : grid(g), values(std::move(v)) {
    if (values.size() != g.size()) throw InvalidInput("value array does not match grid");
}

SampledFunction SampledFunction::from_callable(const GridSpec& g,
                                               const std::function<cplx(double, double)>& fn) {
    SampledFunction f(g);
    for (int i1 = 0; i1 < g.N1; ++i1)
        for (int i2 = 0; i2 < g.N2; ++i2) f(i1, i2) = fn(g.x(i1, 1), g.x(i2, 2));
    return f;
}

void SampledFunction::check_finite() const {
    for (const auto& v : values)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw InvalidInput("non-finite sample value");
}

Spectrum::Spectrum(const GridSpec& g) : grid(g), coeffs(g.size()) {}

void Spectrum::zero_nyquist() {
    const int n1 = grid.N1, n2 = grid.N2;
    for (int i2 = 0; i2 < n2; ++i2) coeffs[std::size_t(n1 / 2) * n2 + i2] = 0.0;
    for (int i1 = 0; i1 < n1; ++i1) coeffs[std::size_t(i1) * n2 + n2 / 2] = 0.0;
}

SampledFunction operator+(const SampledFunction& a, const SampledFunction& b) {
    require_same(a.grid, b.grid);
    SampledFunction r(a.grid);
    for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] = a.values[i] + b.values[i];
    return r;
}

SampledFunction operator-(const SampledFunction& a, const SampledFunction& b) {
    require_same(a.grid, b.grid);
    SampledFunction r(a.grid);
    for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] = a.values[i] - b.values[i];
    return r;
}

SampledFunction operator*(const SampledFunction& a, const SampledFunction& b) {
    require_same(a.grid, b.grid);
    SampledFunction r(a.grid);
    for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] = a.values[i] * b.values[i];
    return r;
}

SampledFunction operator*(cplx s, const SampledFunction& a) {
    SampledFunction r(a.grid);
    for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] = s * a.values[i];
    return r;
}

Spectrum dft(const SampledFunction& f) {
    f.grid.validate();
    f.check_finite();
    Spectrum s(f.grid);
    s.coeffs = f.values;
    fft2(s.coeffs, f.grid.N1, f.grid.N2, -1);
    const double scale = f.grid.cell_area();
    for (auto& c : s.coeffs) c *= scale;
    return s;
}

SampledFunction idft(const Spectrum& s) {
    s.grid.validate();
    for (const auto& c : s.coeffs)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw InvalidInput("non-finite spectral coefficient");
    SampledFunction f(s.grid);
    f.values = s.coeffs;
    fft2(f.values, s.grid.N1, s.grid.N2, +1);
    const double scale = 1.0 / s.grid.area();
    for (auto& v : f.values) v *= scale;
    return f;
}

void validate_modes(const GridSpec& grid, const ModeList& modes) {
    std::set<std::pair<int, int>> seen;
    for (const auto& m : modes) {
        if (!GridSpec::in_band(m.k1, grid.N1) || !GridSpec::in_band(m.k2, grid.N2))
            throw InvalidInput("mode outside representable band");
        if (!seen.insert({m.k1, m.k2}).second) throw InvalidInput("duplicate mode");
        if (!std::isfinite(m.c.real()) || !std::isfinite(m.c.imag()))
            throw InvalidInput("non-finite mode coefficient");
    }
}

SampledFunction from_modes(const GridSpec& grid, const ModeList& modes) {
    grid.validate();
    validate_modes(grid, modes);
    Spectrum s(grid);
    for (const auto& m : modes) s.at(m.k1, m.k2) = m.c;
    return idft(s);
}

ModeList to_modes(const Spectrum& s, double rel_tol) {
    double mx = 0.0;
    for (const auto& c : s.coeffs) mx = std::max(mx, std::abs(c));
    ModeList out;
    if (mx == 0.0) return out;
    for (int i1 = 0; i1 < s.grid.N1; ++i1)
        for (int i2 = 0; i2 < s.grid.N2; ++i2) {
            cplx c = s.coeffs[std::size_t(i1) * s.grid.N2 + i2];
            if (std::abs(c) > rel_tol * mx)
                out.push_back({GridSpec::freq(i1, s.grid.N1), GridSpec::freq(i2, s.grid.N2), c});
        }
    return out;
}

double l2_norm(const SampledFunction& f) {
    double s = 0.0;
    for (const auto& v : f.values) s += std::norm(v);
    return std::sqrt(s * f.grid.cell_area());
}

double max_abs_diff(const SampledFunction& a, const SampledFunction& b) {
    require_same(a.grid, b.grid);
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

double rel_l2_error(const SampledFunction& a, const SampledFunction& b) {
    double nb = l2_norm(b);
    double nd = l2_norm(a - b);
    if (nb == 0.0) return nd;
    return nd / nb;
}

// ---- IO ---------------------------------------------------------------

namespace {

template <class T>
void put_le(std::ostream& os, T v) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
#if defined(__BYTE_ORDER__) && __BYTE_ORDER__ == __ORDER_BIG_ENDIAN__
    std::reverse(buf, buf + sizeof(T));
#endif
    os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
    unsigned char buf[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(buf), sizeof(T)))
        throw InvalidInput("truncated container");
#if defined(__BYTE_ORDER__) && __BYTE_ORDER__ == __ORDER_BIG_ENDIAN__
    std::reverse(buf, buf + sizeof(T));
#endif
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

}  // namespace

void write_binary(std::ostream& os, const GridSpec& g, const CVec& payload) {
    if (payload.size() != g.size()) throw InvalidInput("payload does not match grid");
    os.write("FLAG", 4);
    put_le<std::uint32_t>(os, kContainerVersion);
    put_le<std::uint32_t>(os, std::uint32_t(g.N1));
    put_le<std::uint32_t>(os, std::uint32_t(g.N2));
    put_le<double>(os, g.L1);
    put_le<double>(os, g.L2);
    for (const auto& v : payload) {
        put_le<double>(os, v.real());
        put_le<double>(os, v.imag());
    }
}

void read_binary(std::istream& is, GridSpec& g, CVec& payload) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "FLAG", 4) != 0)
        throw InvalidInput("bad container magic");
    auto version = get_le<std::uint32_t>(is);
    if (version != kContainerVersion) throw InvalidInput("unsupported container version");
    GridSpec r;
    r.N1 = int(get_le<std::uint32_t>(is));
    r.N2 = int(get_le<std::uint32_t>(is));
    r.L1 = get_le<double>(is);
    r.L2 = get_le<double>(is);
    r.validate();
    CVec data(r.size());
    for (auto& v : data) {
        double re = get_le<double>(is);
        double im = get_le<double>(is);
        v = cplx(re, im);
    }
    g = r;
    payload = std::move(data);
}

void write_csv(std::ostream& os, const SampledFunction& f) {
    auto old = os.precision(17);
    os << "i1,i2,x1,x2,re,im\n";
    for (int i1 = 0; i1 < f.grid.N1; ++i1)
        for (int i2 = 0; i2 < f.grid.N2; ++i2) {
            const cplx v = f(i1, i2);
            os << i1 << ',' << i2 << ',' << f.grid.x(i1, 1) << ',' << f.grid.x(i2, 2) << ','
               << v.real() << ',' << v.imag() << '\n';
        }
    os.precision(old);
}

void write_csv(std::ostream& os, const Spectrum& s) {
    auto old = os.precision(17);
    os << "k1,k2,re,im\n";
    for (int k1 = -s.grid.N1 / 2; k1 < s.grid.N1 / 2; ++k1)
        for (int k2 = -s.grid.N2 / 2; k2 < s.grid.N2 / 2; ++k2) {
            const cplx v = s.at(k1, k2);
            os << k1 << ',' << k2 << ',' << v.real() << ',' << v.imag() << '\n';
        }
    os.precision(old);
}

}  // namespace flagmult

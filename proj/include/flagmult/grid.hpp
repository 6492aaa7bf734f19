#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "flagmult/errors.hpp"

namespace flagmult {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

struct GridSpec {
    int N1 = 64, N2 = 64;
    double L1 = 1.0, L2 = 1.0;

    GridSpec() = default;
    GridSpec(int n1, int n2, double l1 = 1.0, double l2 = 1.0);

    void validate() const;
    std::size_t size() const { return std::size_t(N1) * std::size_t(N2); }
    double cell_area() const { return L1 * L2 / (double(N1) * double(N2)); }
    double area() const { return L1 * L2; }
    int n(int axis) const { return axis == 1 ? N1 : N2; }
    double len(int axis) const { return axis == 1 ? L1 : L2; }
    // signed integer frequency for FFT-order index i on an axis of length n
    static int freq(int i, int n) { return i < n / 2 ? i : i - n; }
    static int index(int k, int n) { return k >= 0 ? k : k + n; }
    static bool in_band(int k, int n) { return k >= -n / 2 && k < n / 2; }
    // physical frequency k / L
    double phys(int k, int axis) const { return double(k) / len(axis); }
    double x(int i, int axis) const { return double(i) * len(axis) / double(n(axis)); }

    bool operator==(const GridSpec& o) const {
        return N1 == o.N1 && N2 == o.N2 && L1 == o.L1 && L2 == o.L2;
    }
    bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

// Values at (n1*L1/N1, n2*L2/N2), row-major with axis 1 as the row index.
struct SampledFunction {
    GridSpec grid;
    CVec values;

    SampledFunction() = default;
    explicit SampledFunction(const GridSpec& g);
    SampledFunction(const GridSpec& g, CVec v);

    cplx& operator()(int i1, int i2) { return values[std::size_t(i1) * grid.N2 + i2]; }
    const cplx& operator()(int i1, int i2) const { return values[std::size_t(i1) * grid.N2 + i2]; }

    static SampledFunction from_callable(const GridSpec& g,
                                         const std::function<cplx(double, double)>& fn);
    void check_finite() const;
};

// Coefficients in FFT order; at(k1,k2) addresses signed integer frequencies.
struct Spectrum {
    GridSpec grid;
    CVec coeffs;

    Spectrum() = default;
    explicit Spectrum(const GridSpec& g);

    cplx& at(int k1, int k2) {
        return coeffs[std::size_t(GridSpec::index(k1, grid.N1)) * grid.N2 +
                      GridSpec::index(k2, grid.N2)];
    }
    const cplx& at(int k1, int k2) const {
        return coeffs[std::size_t(GridSpec::index(k1, grid.N1)) * grid.N2 +
                      GridSpec::index(k2, grid.N2)];
    }
    void zero_nyquist();
};

struct Mode {
    int k1, k2;
    cplx c;
};
using ModeList = std::vector<Mode>;

SampledFunction operator+(const SampledFunction& a, const SampledFunction& b);
SampledFunction operator-(const SampledFunction& a, const SampledFunction& b);
SampledFunction operator*(const SampledFunction& a, const SampledFunction& b);
SampledFunction operator*(cplx s, const SampledFunction& a);

Spectrum dft(const SampledFunction& f);
SampledFunction idft(const Spectrum& s);
SampledFunction from_modes(const GridSpec& grid, const ModeList& modes);

// Nonzero coefficients of a spectrum; entries below rel_tol * max are dropped.
ModeList to_modes(const Spectrum& s, double rel_tol = 1e-13);
void validate_modes(const GridSpec& grid, const ModeList& modes);

// Unnormalized in-place transforms (sign -1 forward, +1 backward).
void fft2(CVec& data, int n1, int n2, int sign);
void fft1(CVec& data, int n, int sign);
// Row-major transform of any rank.
void fftn(CVec& data, const std::vector<int>& dims, int sign);
// Transform every line along one axis of an n1 x n2 row-major array.
void fft_axis(CVec& data, int n1, int n2, int axis, int sign);

double l2_norm(const SampledFunction& f);
double max_abs_diff(const SampledFunction& a, const SampledFunction& b);
// ||a-b||_2 / ||b||_2 with the convention 0/0 = 0
double rel_l2_error(const SampledFunction& a, const SampledFunction& b);

// Binary container and CSV dump.
void write_binary(std::ostream& os, const GridSpec& g, const CVec& payload);
void read_binary(std::istream& is, GridSpec& g, CVec& payload);
void write_csv(std::ostream& os, const SampledFunction& f);
void write_csv(std::ostream& os, const Spectrum& s);

constexpr std::uint32_t kContainerVersion = 1;

}  // namespace flagmult

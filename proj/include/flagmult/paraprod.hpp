#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "flagmult/analysis.hpp"
#include "flagmult/grid.hpp"
#include "flagmult/symbols.hpp"

namespace flagmult {

// [n 2^-scale, (n+1) 2^-scale) on an axis of length L, 0 <= n < 2^scale L
struct DyadicInterval {
    int scale = 0;
    long n = 0;

    static DyadicInterval make(int scale, long n, double L);
    double length() const { return std::ldexp(1.0, -scale); }
    double left() const { return double(n) * length(); }
};

enum class BumpType { Lacunary, NonLacunary };

// L^2-normalized bumps phi_I(x) = 2^{i/2} b(2^i x - n), built on the Fourier side:
//   lacunary      b^(xi) = Phi(12 |xi - 1|), support in [5/6, 7/6]
//   non-lacunary  b^(xi) = phi(3 xi / 32), equal to 1 on [-4/3, 4/3], support in [-8/3, 8/3]
// so a non-lacunary bump at scale i sees every lacunary bump at scales j <= i.
struct BumpFamily {
    BumpType type = BumpType::Lacunary;
    GeneratorSet gen;

    BumpFamily(BumpType t, const GeneratorSet& g) : type(t), gen(g) {}

    // Fourier coefficients of phi_{(scale, 0)} on an N-point axis of length L, FFT order.
    // ScaleError if the support reaches N/2; FamilyError if the realized spectrum
    // violates the family type.
    CVec spectrum(int scale, int N, double L) const;
    // samples of phi_I at x_m = m L / N by direct summation of the spectrum
    CVec sample(const DyadicInterval& I, int N, double L) const;
};

struct ScaleRange {
    int lo = 0, hi = -1;  // inclusive; hi < lo is empty
    bool empty() const { return hi < lo; }
};

// Bi-parameter model operator: per-slot types shared by both axes.
struct ModelSpec {
    std::array<BumpType, 3> I{BumpType::Lacunary, BumpType::NonLacunary, BumpType::Lacunary};
    std::array<BumpType, 3> J{BumpType::NonLacunary, BumpType::Lacunary, BumpType::Lacunary};
    ScaleRange I1, I2, J1, J2;
    int slack = 1;  // octaves allowed in 2^k0 |w_J| ~ |w_I|

    // slot (1..3) of the non-lacunary J family, 0 for all lacunary
    static std::array<BumpType, 3> j_pattern(int nonlacunary_slot);
    void validate() const;  // FamilyError
};

// one (i, i', j, j') scale block of the model sum
struct ModelTerm {
    int i1 = 0, i2 = 0, j1 = 0, j2 = 0;
    double l2 = 0.0;
};

SampledFunction model_T1(const ModelSpec& spec, const SampledFunction& f, const SampledFunction& g,
                         const SampledFunction& h, const GeneratorSet& gen,
                         std::vector<ModelTerm>* terms = nullptr);
// J scales restricted to j <= i and |i - j - k0| <= slack on both axes
SampledFunction model_T1_k0(const ModelSpec& spec, const SampledFunction& f, const SampledFunction& g,
                            const SampledFunction& h, const GeneratorSet& gen, int k0,
                            std::vector<ModelTerm>* terms = nullptr);

// (1 + dist(x, I)/|I|)^-100 with the torus distance
std::vector<double> cutoff_1d(const DyadicInterval& I, int N, double L);
SampledFunction approximate_cutoff(const DyadicInterval& I1, const DyadicInterval& I2, const GridSpec& grid);

// smooth partition of unity on integer translates: sum over (n, m) of the windows is 1;
// the (n, m) window is supported in [n-1, n+1] x [m-1, m+1]
SampledFunction unit_window(int n, int m, const GridSpec& grid);

// ||out||_r / prod ||input * cutoff_R||_{p_i} with R = [n, n+1) x [m, m+1)
double localized_estimate_check(const SampledFunction& out, int n, int m, const SampledFunction& f,
                                const SampledFunction& g, const SampledFunction& h, const ExponentTuple& ex);

}  // namespace flagmult

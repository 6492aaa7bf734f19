#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "flagmult/grid.hpp"
#include "flagmult/lp.hpp"
#include "flagmult/symbols.hpp"

namespace flagmult {

// ---------------------------------------------------------------------------
// Exponents and weights

struct ExponentTuple {
    double p1 = 3, p2 = 3, p3 = 3, r = 1;
    // mixed variant: g in L^{p2}_{x1}(L^{q2}_{x2}), h in L^{p3}_{x1}(L^{q3}_{x2})
    bool mixed = false;
    double q2 = 0, q3 = 0;

    static ExponentTuple holder(double p1, double p2, double p3, double r);
    static ExponentTuple mixed_tuple(double p, double p2, double q2, double p3, double q3, double r);
    // InvalidExponent for out-of-range entries, HolderError for inconsistent ones
    void validate() const;
    bool quasi() const { return r < 1.0; }
};

// Strictly positive sampled weight. A tensor weight keeps its factors.
struct Weight {
    SampledFunction w;
    bool tensor = false;
    std::vector<double> w1, w2;

    static Weight from_function(const SampledFunction& w);
    static Weight from_factors(const GridSpec& g, const std::vector<double>& w1,
                               const std::vector<double>& w2);
    static Weight uniform(const GridSpec& g, double c = 1.0);
    void validate() const;
    double at(int i1, int i2) const { return w(i1, i2).real(); }
};

// Torus surrogate of |x - x0|^a on one axis: dist^a, distance clipped below at one cell.
std::vector<double> power_weight_1d(int n, double L, double x0, double a);
Weight power_weight(const GridSpec& g, double a1, double a2, double x01 = 0.0, double x02 = 0.0);

// ---------------------------------------------------------------------------
// Norms

double lp_norm(const SampledFunction& f, double p);
double mixed_norm(const SampledFunction& f, double p_outer, double q_inner);
double weighted_norm(const SampledFunction& f, double p, const Weight& w);
// outer p along x1 with weight w1, inner q along x2 with weight w2
double weighted_mixed_norm(const SampledFunction& f, double p, const std::vector<double>& w1, double q,
                           const std::vector<double>& w2);

// ---------------------------------------------------------------------------
// Muckenhoupt constants and maximal functions

enum class APMode { Axis1, Axis2, Rect };

// sup over dyadic intervals (rectangles) of (avg w)(avg w^{1/(1-p)})^{p-1}
double ap_constant(const Weight& w, double p, APMode mode = APMode::Rect);
double ap_constant_1d(const std::vector<double>& w, double p);

// sup over dyadic rectangles containing x of the average of |f|
SampledFunction strong_maximal(const SampledFunction& f);

struct FSReport {
    double lhs = 0.0, rhs = 0.0, ratio = 0.0;
};
// ||(sum (M_s f_j)^q)^{1/q}||_{L^p(w)} / ||(sum |f_j|^q)^{1/q}||_{L^p(w)}
FSReport fs_maximal_check(const std::vector<SampledFunction>& fs, double p, double q,
                          const Weight* w = nullptr);

// ||S_{12} f||_{L^p(w)} / ||f - mean f||_{L^p(w)} with the bi-parameter square function
double square_function_ratio(const SampledFunction& f, double p, const Weight* w, const GeneratorSet& gen);

struct SquareFunctionProbe {
    std::vector<double> ratios;
    double c1 = 0.0, c2 = 0.0;
    double spread() const { return c1 > 0.0 ? c2 / c1 : 0.0; }
};
SquareFunctionProbe square_function_probe(const std::vector<SampledFunction>& family, double p,
                                          const Weight* w, const GeneratorSet& gen);

// Spectral multiplier (2 pi |k1/L1|)^a1 (2 pi |k2/L2|)^a2 with 0^0 = 1.
SampledFunction fractional_derivative(const SampledFunction& f, double a1, double a2);

// ---------------------------------------------------------------------------
// Leibniz decomposition

struct LeibnizSpec {
    double alpha1 = 1, alpha2 = 1, beta1 = 1, beta2 = 1;
    int gap = GAP_DESK;
    // lower end of the admissible r-range, recorded only
    double r_floor() const;
};

// Per-axis scale partition: P_j for j in the band, exact partition of unity
// on every frequency (the ends absorb low and high frequencies).
double leibniz_partition(const GridSpec& g, int axis, int j, double u, const GeneratorSet& gen);

// per-axis region: 3 * (g/h type: 0 h dominant, 1 comparable, 2 g dominant)
//                  + (f relative to the g/h scale: 0 below, 1 comparable, 2 above)
struct LeibnizTerm {
    int region1 = 0, region2 = 0;
    int label = 0;      // 1..16
    std::string shape;  // "flag" or "m3m4"
    SampledFunction out;
};

struct LeibnizLabel {
    int label = 0;
    // derivative orders (axis 1, axis 2) carried by f, g, h
    std::array<double, 2> df{}, dg{}, dh{};
    double product = 0.0;   // ||D f||_p1 ||D g||_p2 ||D h||_p3
    double term_norm = 0.0; // ||sum of terms with this label||_r
    int terms = 0;
};

struct LeibnizResult {
    std::vector<LeibnizTerm> terms;  // 81 entries, index 9 * region1 + region2
    std::array<LeibnizLabel, 16> labels;
    SampledFunction lhs, sum;
    double rel_error = 0.0;
    double r_floor = 0.0;
    bool r_in_range = true;
    bool padded = false;
};

LeibnizResult leibniz_decompose(const LeibnizSpec& spec, const SampledFunction& f, const SampledFunction& g,
                                const SampledFunction& h, const GeneratorSet& gen,
                                const ExponentTuple& ex = ExponentTuple::holder(3, 3, 3, 1));
// label 1..16 of a region pair
int leibniz_label(int region1, int region2);

// ---------------------------------------------------------------------------
// Bound scans and the endpoint probe

enum class FamilyKind { Dilated, Modulated, Tensor, Random };
FamilyKind parse_family_kind(const std::string& s);
std::string to_string(FamilyKind k);

struct Band {
    int lo = 0, hi = 1;  // base integer frequencies per axis, before dilation
};

struct TestFamilySpec {
    FamilyKind kind = FamilyKind::Dilated;
    int octaves = 5;
    int translations = 1;
    unsigned seed = 1;
    Band f{4, 7}, g{0, 1}, h{0, 1};
};

struct FamilyMember {
    int id = 0, octave = 0, translation = 0;
    SampledFunction f, g, h;
};

// spectral rescaling k -> 2^octave k; ScaleError if the result leaves the band
SampledFunction dilate(const SampledFunction& f, int octave);
std::vector<FamilyMember> make_family(const TestFamilySpec& spec, const GridSpec& grid,
                                      const GeneratorSet& gen);

using TrilinearOp = std::function<SampledFunction(const SampledFunction&, const SampledFunction&,
                                                  const SampledFunction&)>;

struct ScanWeights {
    std::vector<double> w1, w2;
};

struct ScanMember {
    int id = 0, octave = 0, translation = 0;
    double ratio = 0.0, nf = 0.0, ng = 0.0, nh = 0.0, nout = 0.0;
};

struct ScanReport {
    std::vector<ScanMember> members;
    double max = 0.0, min = 0.0;
    double flatness = 0.0;  // max / min over all members
    bool quasi = false;
};

ScanReport bound_scan(const TrilinearOp& op, const ExponentTuple& ex, const TestFamilySpec& family,
                      const GridSpec& grid, const GeneratorSet& gen, const ScanWeights* weights = nullptr);

struct GrowthRow {
    int N = 0;
    double ratio = 0.0;    // L^inf x L^inf x L^inf -> L^inf
    double control = 0.0;  // same inputs at (4, 4, 4, 4/3)
};

struct GrowthReport {
    std::vector<GrowthRow> rows;
    bool increasing = false;
    double control_flatness = 0.0;
    double constant_ratio = 0.0;  // all inputs constant
};

// One-dimensional factor of the bilinear symbol m2 applied to (g, h); the
// output keeps the in-band, non-Nyquist frequencies.
CVec bilinear_1d(const ParamFactor& m2, const CVec& g, const CVec& h, double L);

// m1 = 1, m2 = library m2 with the given shift. Inputs are tensors f = 1,
// g = g1 (x) g1, h = h1 (x) h1 with g1(y) = |y|^{i a} (torus distance clipped
// at one cell) and h1 = conj(g1): the phases of Delta_k g1(0) and S_k h1(0)
// cancel, so every scale adds to the output at 0. Ratios are squares of the
// one-dimensional ratios.
GrowthReport endpoint_probe(const GeneratorSet& gen, const std::vector<int>& resolutions, int shift = 1,
                            double a = 1.0);

}  // namespace flagmult

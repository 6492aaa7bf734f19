#pragma once

#include <vector>

#include "flagmult/grid.hpp"
#include "flagmult/symbols.hpp"

namespace flagmult {

enum class LPKind { Delta, S, DeltaTilde, DeltaPrime };

struct LPOperatorSpec {
    LPKind kind = LPKind::Delta;
    int scale = 0;
    int axis = 1;
};

// Gap constants. The desk override is what fits in an 8-octave band.
constexpr int GAP_MAIN = 20;
constexpr int GAP_APPX = 100;
constexpr int GAP_DESK = 3;
constexpr int kDefaultOctaves = 8;

struct ScaleBand {
    int jmin = 0, jmax = 0;
    bool contains(int j) const { return j >= jmin && j <= jmax; }
};

// 2^jmax <= N / (4 L) on the axis
ScaleBand scale_band(const GridSpec& g, int axis, int octaves = kDefaultOctaves);

// Multiplier values along one axis, indexed in FFT order. The Nyquist entry is 0.
std::vector<double> lp_symbol(const GridSpec& g, const LPOperatorSpec& spec, const GeneratorSet& gen,
                              int gap = GAP_DESK, int octaves = kDefaultOctaves);
// sum of psi_j over the band, the truncated realization of sum_j Delta_j
std::vector<double> band_sum_symbol(const GridSpec& g, int axis, const GeneratorSet& gen,
                                    int octaves = kDefaultOctaves);
// Lower and upper scale of the auxiliary window Delta~_k after clipping to the band.
std::pair<int, int> tilde_span(const ScaleBand& b, int k, int gap);

// diagonal multiplier on one axis of a spectrum (in place)
void multiply_axis(Spectrum& s, int axis, const std::vector<double>& m);

SampledFunction apply_lp(const SampledFunction& f, const LPOperatorSpec& spec,
                         const GeneratorSet& gen, int gap = GAP_DESK);

// axes: {1}, {2} or {1, 2}
SampledFunction square_function(const SampledFunction& f, const std::vector<int>& axes,
                                const GeneratorSet& gen);
// pointwise sup over in-band scale pairs of |K1_{k1} K2_{k2} f|, each K either Delta or S
SampledFunction sup_function(const SampledFunction& f, LPKind kind1, LPKind kind2,
                             const GeneratorSet& gen);

// ||LHS - RHS||_2 / ||f||_2 for the high-high tail identity at (k1, k2)
double tail_identity_check(const SampledFunction& f, int k1, int k2, const GeneratorSet& gen,
                           int gap = GAP_DESK);

}  // namespace flagmult

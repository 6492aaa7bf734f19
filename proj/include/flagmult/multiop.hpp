#pragma once

#include <functional>
#include <string>
#include <vector>

#include "flagmult/grid.hpp"
#include "flagmult/lp.hpp"
#include "flagmult/symbols.hpp"

namespace flagmult {

enum class PlanKind { BruteForce, Separable, LowRankDyadic };

PlanKind parse_plan_kind(const std::string& s);
std::string to_string(PlanKind k);

struct OperatorPlan {
    PlanKind kind = PlanKind::Separable;
    int octaves = kDefaultOctaves;
    int gap = GAP_DESK;
    int M = 512;         // rank cap per dyadic block (low-rank path)
    double tol = 1e-10;  // admissible relative decomposition residual
};

struct ApplyReport {
    std::string path;
    std::size_t terms = 0;      // separable terms evaluated
    std::size_t rank = 0;       // retained singular values (low-rank path)
    std::size_t discarded = 0;  // out-of-band output contributions dropped
    double residual = 0.0;      // relative Frobenius residual of the rank truncation
    bool padded = false;
};

constexpr int kOracleMaxModes = 64;

// Exact sums over mode triples (pairs); output frequencies outside the band
// or on the Nyquist line are dropped and counted.
SampledFunction apply_trilinear_brute(const SymbolND& m, const ModeList& f, const ModeList& g,
                                      const ModeList& h, const GridSpec& grid,
                                      ApplyReport* rep = nullptr);
SampledFunction apply_trilinear_brute(const FlagSymbol& m, const ModeList& f, const ModeList& g,
                                      const ModeList& h, const GridSpec& grid,
                                      ApplyReport* rep = nullptr);
SampledFunction apply_bilinear_brute(const SymbolND& m, const ModeList& f, const ModeList& g,
                                     const GridSpec& grid, ApplyReport* rep = nullptr);

SampledFunction apply_flag(const FlagSymbol& flag, const SampledFunction& f, const SampledFunction& g,
                           const SampledFunction& h, const OperatorPlan& plan,
                           const GeneratorSet& gen, ApplyReport* rep = nullptr);
SampledFunction apply_trilinear(const SymbolND& m, const SampledFunction& f, const SampledFunction& g,
                                const SampledFunction& h, const OperatorPlan& plan,
                                const GeneratorSet& gen, ApplyReport* rep = nullptr);
SampledFunction apply_bilinear(const SymbolND& m, const SampledFunction& f, const SampledFunction& g,
                               const OperatorPlan& plan, const GeneratorSet& gen,
                               ApplyReport* rep = nullptr);

// Multiply the pieces pointwise and keep the in-band part of the product
// spectrum (zero padding where the sum of spectral extents exceeds the band).
SampledFunction product_in_band(const std::vector<const SampledFunction*>& pieces,
                                bool* padded = nullptr);

// ---------------------------------------------------------------------------
// Reduced operators T^i_{d1,d2}

using ScaleTable = std::function<cplx(int, int)>;

SampledFunction reduced_flag_operator(int i, int d1, int d2, const SampledFunction& f,
                                      const SampledFunction& g, const SampledFunction& h,
                                      const GeneratorSet& gen, const ScaleTable& a = nullptr,
                                      const ScaleTable& b = nullptr, int gap = GAP_DESK,
                                      ApplyReport* rep = nullptr);
// The symbol of T^i_{d1,d2} with tensor coefficient tables a1(j1) a2(j2), b1(k1) b2(k2),
// as a separable arity-3 symbol with exact rank terms.
SymbolND reduced_flag_symbol(int i, int d1, int d2, const GridSpec& grid, const GeneratorSet& gen,
                             int gap = GAP_DESK,
                             const std::function<cplx(int)>& a1 = nullptr,
                             const std::function<cplx(int)>& a2 = nullptr,
                             const std::function<cplx(int)>& b1 = nullptr,
                             const std::function<cplx(int)>& b2 = nullptr);

// ---------------------------------------------------------------------------
// Pseudo-differential flag operators

struct PDOSymbolPair {
    // a(x1, x2; xi1, eta1, zeta1, xi2, eta2, zeta2), L-periodic in x
    std::function<cplx(double, double, const double*)> a;
    // b(x1, x2; eta1, zeta1, eta2, zeta2)
    std::function<cplx(double, double, const double*)> b;
    int order_a = 0, order_b = 0;
};

struct PDOReport {
    int windows = 1;
    int Lmax = 0;
    double tail = 0.0;  // largest relative energy outside |l| <= Lmax
    bool truncation_warning = false;
    std::vector<double> decay;  // max |coefficient| per shell |l|_inf = 0..Lmax
    std::size_t discarded = 0;
};

SampledFunction apply_pdo(const PDOSymbolPair& pair, const SampledFunction& f,
                          const SampledFunction& g, const SampledFunction& h, int Lmax,
                          int window_count, const GeneratorSet& gen, PDOReport* rep = nullptr,
                          double tail_tol = 1e-8);

// Direct evaluation of the x-dependent sum at the given sample indices.
std::vector<cplx> pdo_direct(const PDOSymbolPair& pair, const ModeList& f, const ModeList& g,
                             const ModeList& h, const GridSpec& grid,
                             const std::vector<std::pair<int, int>>& points);

}  // namespace flagmult

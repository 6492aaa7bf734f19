#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flagmult/grid.hpp"

namespace flagmult {

// ---------------------------------------------------------------------------
// Cutoff family

struct GeneratorSet {
    double epsilon = 0.125;
    double sharpness = 1.0;
    double partition_residual = 0.0;

    // smooth step on [0,1]; step(s) + step(1-s) = 1
    double step(double s) const;
    // radial profile: 1 for |t| <= 1, 0 for |t| >= 2
    double Phi(double t) const;

    double psi(double u) const;  // supported in 1/2 <= |u| <= 2
    double phi(double u) const;  // 1 on |u| <= 1/8, 0 on |u| >= 1/4
    double psi_j(double u, int j) const { return psi(std::ldexp(u, -j)); }
    double phi_k(double u, int k) const { return phi(std::ldexp(u, -k)); }
    // psi_j summed over j in [a, b]
    double psi_sum(double u, int a, int b) const;
    // five neighbouring scales around 0: equals 1 on 1/4 <= |u| <= 4
    double psi_wide(double u) const { return psi_sum(u, -2, 2); }
    double psi_prime(double u, double beta, int k) const;
    double psi_dprime(double u, double beta, int k) const;

    // homogeneous cone cutoffs, phi0 + phi1 = 1; phi1(0) = 1 by convention
    double cone0(double u, double v, double w) const;
    double cone1(double u, double v, double w) const { return 1.0 - cone0(u, v, w); }
    double chi(double u, double v, double w, int shift = 10) const;

    // partition window on the line: supported in [-1,1], integer translates sum to 1
    double window(double t) const;
};

GeneratorSet make_generators(double epsilon = 0.125, double profile_sharpness = 1.0);
// max |sum_j psi(u / 2^j) - 1| over a log-spaced sample of [lo, hi]
double partition_residual(const GeneratorSet& gen, double lo = std::ldexp(1.0, -20),
                          double hi = std::ldexp(1.0, 20), int samples = 20001);

// ---------------------------------------------------------------------------
// Symbols

using ParamMap = std::map<std::string, double>;

// c * a(u) * b(v) * w(w); a is unused for two-argument factors.
struct RankTerm {
    cplx c = 1.0;
    std::function<double(double)> a, b, w;
};

// A factor living in one parameter: m(u, v, w) or m(v, w).
struct ParamFactor {
    int arity = 3;
    std::function<cplx(double, double, double)> eval;
    std::vector<RankTerm> terms;  // optional exact rank-one expansion
    bool has_rank() const { return !terms.empty(); }
};

struct SymbolND {
    int arity = 3;   // frequency arguments per parameter
    int params = 2;  // 1 or 2
    std::string builder;
    ParamMap numeric;
    double bound = std::numeric_limits<double>::infinity();
    // args laid out parameter by parameter: (xi1, eta1, zeta1, xi2, eta2, zeta2)
    // for arity 3, (eta1, zeta1, eta2, zeta2) for arity 2.
    std::function<cplx(const double*)> eval;
    // present when the symbol is a product of one factor per parameter
    std::vector<ParamFactor> factors;

    cplx operator()(std::initializer_list<double> args) const;
    cplx at(const double* args) const { return eval(args); }
    int nargs() const { return arity * params; }
    bool separable() const { return int(factors.size()) == params; }
};

struct FlagSymbol {
    SymbolND m1;  // arity 3, bi-parameter
    SymbolND m2;  // arity 2, bi-parameter

    void validate() const;
    // value at (xi1, eta1, zeta1, xi2, eta2, zeta2)
    cplx eval(const double* a) const;
    bool separable() const { return m1.separable() && m2.separable(); }
    // per-parameter factor of m1 * m2 (requires separable())
    ParamFactor combined_factor(int p) const;
};

// Closed registry of named builders.
SymbolND build_symbol(const std::string& builder, const ParamMap& params, const GeneratorSet& gen,
                      int arity = 3, int nparams = 2);
std::vector<std::string> symbol_builders();

// Product of per-parameter factors (1 or 2 parameters).
SymbolND tensor_symbol(const std::vector<ParamFactor>& factors, const std::string& name = "tensor");
// General product of two symbols with identical arity and parameter count.
SymbolND product_symbol(const SymbolND& a, const SymbolND& b);
// The flag as a single arity-3 symbol.
SymbolND flag_as_symbol(const FlagSymbol& flag);

// Library flag: generator-product paraproduct windows in both parameters.
FlagSymbol library_flag(const GeneratorSet& gen, int shift = 3, int jlo = -8, int jhi = 12);

// ---------------------------------------------------------------------------
// Validators and decompositions

struct ValidationReport {
    struct Entry {
        std::vector<int> alpha;
        double constant;
    };
    std::vector<Entry> entries;
    double max_constant = 0.0;
    bool pass = false;
};

ValidationReport check_mm_hormander(const SymbolND& m, int max_order, double tol,
                                    double lo = std::ldexp(1.0, -10),
                                    double hi = std::ldexp(1.0, 10), int samples = 200,
                                    unsigned seed = 7);

struct ConeSplit {
    SymbolND m00, m01, m10, m11;
};
ConeSplit cone_split(const SymbolND& m1, const GeneratorSet& gen);

struct TaylorSplit {
    SymbolND m11, m12, m21, m22;
    double residual = 0.0;  // relative, on a cone-localized probe
};
TaylorSplit taylor_split(const SymbolND& m1, int N, int quad_nodes, const GeneratorSet& gen,
                         double tol = 1e-6);
// Random points with |eta_i| + |zeta_i| <= eps |xi_i| in both parameters.
std::vector<std::array<double, 6>> cone_localized_sample(const GeneratorSet& gen, int count,
                                                         unsigned seed);

struct SeparableExpansion {
    int k1 = 0, k2 = 0;
    int M = 0;
    int Q = 0;             // samples per period and axis
    double period = 8.0;   // in units of 2^k
    cplx blend = 0.0;      // value used away from the annulus
    std::vector<cplx> coeffs;  // (2M+1)^4, index order (n_eta1, n_zeta1, n_eta2, n_zeta2)
    double decay_exponent = 0.0;  // log-log fit of the shell maxima of |c_n|
    double decay_constant = 0.0;  // max |c_n| (1 + |n|_1)^4
    GeneratorSet gen;

    cplx coeff(int n1, int n2, int n3, int n4) const;
    // annulus window in parameter p at (v, w)
    double window(int p, double v, double w) const;
    // truncated series times the two annulus windows
    cplx evaluate(double eta1, double zeta1, double eta2, double zeta2) const;
    std::size_t rank() const { return coeffs.size(); }
};

SeparableExpansion fourier_tensorize(const SymbolND& m2, int k1, int k2, int M,
                                     const GeneratorSet& gen);
// max over annulus samples of |m2 W - expansion| / max |m2 W|
double tensorize_error(const SymbolND& m2, const SeparableExpansion& e, int samples = 400,
                       unsigned seed = 11);

struct SobolevNorm {
    double value = 0.0;
    double coarse_value = 0.0;
    bool warning = false;  // relative change above 10% between resolutions
};
SobolevNorm localized_sobolev_norm(const SymbolND& m, int j, int k, double s1, double s2,
                                   const GeneratorSet& gen, int nodes = 16);

// Finite-difference weights (Fornberg) for derivative `order` at 0 from the given offsets.
std::vector<double> fd_weights(const std::vector<double>& offsets, int order);

}  // namespace flagmult

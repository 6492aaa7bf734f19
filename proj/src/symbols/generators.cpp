#include <algorithm>
#include <cmath>

#include "flagmult/symbols.hpp"

namespace flagmult {

double GeneratorSet::step(double s) const {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    // one-sided mollifier exp(-1/(1-t^2)) evaluated at t = 1 - s
    auto h = [this](double x) { return std::exp(-sharpness / (x * (2.0 - x))); };
    const double a = h(s), b = h(1.0 - s);
    return a / (a + b);
}

double GeneratorSet::Phi(double t) const {
    t = std::abs(t);
    if (t <= 1.0) return 1.0;
    if (t >= 2.0) return 0.0;
    return step(2.0 - t);
}

double GeneratorSet::psi(double u) const {
    const double a = std::abs(u);
    return Phi(a) - Phi(2.0 * a);
}

double GeneratorSet::phi(double u) const { return Phi(8.0 * std::abs(u)); }

double GeneratorSet::psi_sum(double u, int a, int b) const {
    if (u == 0.0 || a > b) return 0.0;
    const int c = int(std::floor(std::log2(std::abs(u))));
    const int lo = std::max(a, c - 2), hi = std::min(b, c + 2);
    double s = 0.0;
    for (int j = lo; j <= hi; ++j) s += psi_j(u, j);
    return s;
}

double GeneratorSet::psi_prime(double u, double beta, int k) const {
    const double p = psi_j(u, k);
    if (p == 0.0) return 0.0;
    return p * std::pow(std::abs(std::ldexp(u, -k)), beta);
}

double GeneratorSet::psi_dprime(double u, double beta, int k) const {
    const double p = psi_j(u, k);
    if (p == 0.0) return 0.0;
    return p * std::pow(std::ldexp(1.0, k) / std::abs(u), beta);
}

double GeneratorSet::cone0(double u, double v, double w) const {
    if (u == 0.0) return 0.0;
    const double rho = (std::abs(v) + std::abs(w)) / (epsilon * std::abs(u));
    return Phi(2.0 * rho);
}

double GeneratorSet::chi(double u, double v, double w, int shift) const {
    if (u == 0.0) return 0.0;
    const int c = int(std::floor(std::log2(std::abs(u))));
    double s = 0.0;
    for (int j = c - 2; j <= c + 2; ++j) {
        const double p = psi_j(u, j);
        if (p == 0.0) continue;
        s += p * phi_k(v, j - shift) * phi_k(w, j - shift);
    }
    return s;
}

double GeneratorSet::window(double t) const {
    const double a = std::abs(t);
    if (a >= 1.0) return 0.0;
    return step(1.0 - a);
}

double partition_residual(const GeneratorSet& gen, double lo, double hi, int samples) {
    double worst = 0.0;
    const double llo = std::log2(lo), lhi = std::log2(hi);
    for (int i = 0; i < samples; ++i) {
        const double u = std::exp2(llo + (lhi - llo) * double(i) / double(samples - 1));
        const int c = int(std::floor(std::log2(u)));
        double s = 0.0;
        for (int j = c - 3; j <= c + 3; ++j) s += gen.psi(std::ldexp(u, -j));
        worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
}

GeneratorSet make_generators(double epsilon, double profile_sharpness) {
    if (!(epsilon > 0.0 && epsilon <= 0.25))
        throw InvalidInput("cone aperture must lie in (0, 1/4]");
    if (!(profile_sharpness > 0.0) || !std::isfinite(profile_sharpness))
        throw InvalidInput("profile sharpness must be positive");
    GeneratorSet g;
    g.epsilon = epsilon;
    g.sharpness = profile_sharpness;
    g.partition_residual = partition_residual(g);
    if (!(g.partition_residual <= 1e-10))
        throw ConstructionFailure("partition residual " + std::to_string(g.partition_residual));
    return g;
}

}  // namespace flagmult

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <utility>
#include <vector>

#include "flagmult/grid.hpp"

namespace flagmult {
namespace {

// Plans are created once per shape under a lock; execution through the
// new-array interface is thread safe. FFTW_ESTIMATE keeps plans (and hence
// results) deterministic between runs.
struct PlanKey {
    int kind, n1, n2, sign;
    bool operator<(const PlanKey& o) const {
        return std::tie(kind, n1, n2, sign) < std::tie(o.kind, o.n1, o.n2, o.sign);
    }
};

std::mutex g_plan_mu;
std::map<PlanKey, fftw_plan>& plan_cache() {
    static std::map<PlanKey, fftw_plan> cache;
    return cache;
}

fftw_plan get_plan(int kind, int n1, int n2, int sign) {
    std::lock_guard<std::mutex> lock(g_plan_mu);
    PlanKey key{kind, n1, n2, sign};
    auto& cache = plan_cache();
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::size_t total = std::size_t(n1) * std::size_t(n2);
    fftw_complex* buf = fftw_alloc_complex(total);
    unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan p = nullptr;
    if (kind == 0) {
        p = fftw_plan_dft_2d(n1, n2, buf, buf, sign, flags);
    } else if (kind == 1) {
        p = fftw_plan_dft_1d(n1, buf, buf, sign, flags);
    } else if (kind == 2) {
        // lines along axis 1: n2 transforms of length n1, stride n2
        int n[1] = {n1};
        p = fftw_plan_many_dft(1, n, n2, buf, nullptr, n2, 1, buf, nullptr, n2, 1, sign, flags);
    } else {
        // lines along axis 2: n1 contiguous transforms of length n2
        int n[1] = {n2};
        p = fftw_plan_many_dft(1, n, n1, buf, nullptr, 1, n2, buf, nullptr, 1, n2, sign, flags);
    }
    fftw_free(buf);
    if (!p) throw InvalidInput("FFT plan creation failed");
    cache.emplace(key, p);
    return p;
}

fftw_complex* raw(CVec& v) { return reinterpret_cast<fftw_complex*>(v.data()); }

std::map<std::pair<std::vector<int>, int>, fftw_plan>& nd_cache() {
    static std::map<std::pair<std::vector<int>, int>, fftw_plan> cache;
    return cache;
}

fftw_plan get_nd_plan(const std::vector<int>& dims, int sign) {
    std::lock_guard<std::mutex> lock(g_plan_mu);
    auto key = std::make_pair(dims, sign);
    auto& cache = nd_cache();
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::size_t total = 1;
    for (int d : dims) total *= std::size_t(d);
    fftw_complex* buf = fftw_alloc_complex(total);
    fftw_plan p = fftw_plan_dft(int(dims.size()), dims.data(), buf, buf, sign,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (!p) throw InvalidInput("FFT plan creation failed");
    cache.emplace(key, p);
    return p;
}

}  // namespace

void fft2(CVec& data, int n1, int n2, int sign) {
    fftw_execute_dft(get_plan(0, n1, n2, sign), raw(data), raw(data));
}

void fft1(CVec& data, int n, int sign) {
    fftw_execute_dft(get_plan(1, n, 1, sign), raw(data), raw(data));
}

void fftn(CVec& data, const std::vector<int>& dims, int sign) {
    std::size_t total = 1;
    for (int d : dims) total *= std::size_t(d);
    if (data.size() != total) throw InvalidInput("array does not match transform shape");
    fftw_execute_dft(get_nd_plan(dims, sign), raw(data), raw(data));
}

void fft_axis(CVec& data, int n1, int n2, int axis, int sign) {
    fftw_execute_dft(get_plan(axis == 1 ? 2 : 3, n1, n2, sign), raw(data), raw(data));
}

}  // namespace flagmult

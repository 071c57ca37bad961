#pragma once

// Thin FFTW r2r layer. All transforms used by the basis are 1-D type-I
// sine/cosine transforms applied along rows or columns of row-major
// matrices. Plans are cached per shape and executed with the new-array
// interface, so the cache is shared between workers (execution is
// thread-safe, planning is serialized).

#include <fftw3.h>

#include <cstdint>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace glory::fft {

struct PlanKey {
    int kind;  // fftw_r2r_kind
    int n, howmany, stride, dist;
    auto operator<=>(const PlanKey&) const = default;
};

class PlanCache {
  public:
    static PlanCache& instance() {
        static PlanCache c;
        return c;
    }

    fftw_plan get(fftw_r2r_kind kind, int n, int howmany, int stride, int dist) {
        const PlanKey key{kind, n, howmany, stride, dist};
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        const std::size_t total = static_cast<std::size_t>(dist) * (howmany - 1) +
                                  static_cast<std::size_t>(stride) * (n - 1) + 1;
        double* buf = fftw_alloc_real(total);
        fftw_plan p = fftw_plan_many_r2r(1, &n, howmany, buf, nullptr, stride, dist, buf, nullptr,
                                         stride, dist, &kind, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(buf);
        plans_.emplace(key, p);
        return p;
    }

    PlanCache(const PlanCache&) = delete;

  private:
    PlanCache() = default;
    std::mutex mutex_;
    std::map<PlanKey, fftw_plan> plans_;
};

inline void exec(fftw_r2r_kind kind, double* data, int n, int howmany, int stride, int dist) {
    fftw_plan p = PlanCache::instance().get(kind, n, howmany, stride, dist);
    fftw_execute_r2r(p, data, data);
}

/// In-place unnormalized DST-I along contiguous rows of a rows-by-n matrix:
/// out_k = 2 sum_j in_j sin(pi (j+1)(k+1)/(n+1)).
inline void dst1_rows(double* data, int n, int rows) { exec(FFTW_RODFT00, data, n, rows, 1, n); }

/// In-place unnormalized DST-I along columns of a rows-by-cols matrix.
inline void dst1_cols(double* data, int rows, int cols) {
    exec(FFTW_RODFT00, data, rows, cols, cols, 1);
}

/// In-place unnormalized DCT-I (REDFT00) along rows; n >= 2 closed samples:
/// out_k = in_0 + (-1)^k in_{n-1} + 2 sum_{j=1}^{n-2} in_j cos(pi j k/(n-1)).
inline void dct1_rows(double* data, int n, int rows) { exec(FFTW_REDFT00, data, n, rows, 1, n); }

inline void dct1_cols(double* data, int rows, int cols) {
    exec(FFTW_REDFT00, data, rows, cols, cols, 1);
}

}  // namespace glory::fft

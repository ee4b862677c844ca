#include "roomrec/audio/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

#include "roomrec/error.hpp"

namespace roomrec::audio {

namespace {

struct FftwFree {
    void operator()(void *p) const noexcept { fftw_free(p); }
};

template <typename T>
using fftw_buffer = std::unique_ptr<T[], FftwFree>;

template <typename T>
fftw_buffer<T> fftw_alloc(std::size_t n) {
    auto *p = static_cast<T *>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1)));
    if (p == nullptr) throw std::bad_alloc();
    return fftw_buffer<T>(p);
}

// FFTW planning is not thread-safe; execution of an existing plan on fresh arrays is.
class PlanCache {
  public:
    fftw_plan r2c(std::size_t n) {
        std::lock_guard lock(mutex_);
        auto it = plans_.find(n);
        if (it != plans_.end()) return it->second;
        auto in = fftw_alloc<double>(n);
        auto out = fftw_alloc<fftw_complex>(n / 2 + 1);
        fftw_plan p = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE);
        plans_.emplace(n, p);
        return p;
    }

    ~PlanCache() {
        for (auto &[n, p] : plans_) fftw_destroy_plan(p);
    }

  private:
    std::mutex mutex_;
    std::map<std::size_t, fftw_plan> plans_;
};

PlanCache &plans() {
    static PlanCache cache;
    return cache;
}

std::vector<std::complex<double>> half_spectrum(std::span<const double> x, std::size_t n) {
    if (n == 0) throw ArgumentError("fft of an empty sequence");
    fftw_plan plan = plans().r2c(n);
    auto in = fftw_alloc<double>(n);
    auto out = fftw_alloc<fftw_complex>(n / 2 + 1);
    std::fill(in.get(), in.get() + n, 0.0);
    std::copy(x.begin(), x.end(), in.get());
    fftw_execute_dft_r2c(plan, in.get(), out.get());
    std::vector<std::complex<double>> result(n / 2 + 1);
    for (std::size_t k = 0; k < result.size(); ++k) result[k] = {out[k][0], out[k][1]};
    return result;
}

}  // namespace

std::vector<std::complex<double>> rfft(std::span<const double> x) { return half_spectrum(x, x.size()); }

std::vector<std::complex<double>> fft(std::span<const double> x) {
    const std::size_t n = x.size();
    auto half = half_spectrum(x, n);
    std::vector<std::complex<double>> full(n);
    std::copy(half.begin(), half.end(), full.begin());
    for (std::size_t k = half.size(); k < n; ++k) full[k] = std::conj(full[n - k]);
    return full;
}

std::vector<double> power_spectrum(std::span<const double> x, std::size_t n_fft) {
    if (x.size() > n_fft) throw ArgumentError("input longer than the transform length");
    auto half = half_spectrum(x, n_fft);
    std::vector<double> p(half.size());
    std::transform(half.begin(), half.end(), p.begin(), [](std::complex<double> c) { return std::norm(c); });
    return p;
}

}  // namespace roomrec::audio

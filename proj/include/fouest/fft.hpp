#pragma once

#include <fftw3.h>

#include <cstddef>
#include <mutex>

namespace fouest::detail {

// FFTW planning is not thread-safe; executing a plan on fresh arrays is.
// Every plan create/destroy in this library goes through this mutex.
inline std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

// fftw_malloc/fftw_free are not on FFTW's documented thread-safe list, so
// they take the plan mutex too.
template <typename T>
class FftwArray {
  public:
    explicit FftwArray(std::size_t n) : n_(n) {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        data_ = static_cast<T*>(fftw_malloc(sizeof(T) * n));
    }
    ~FftwArray() {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fftw_free(data_);
    }
    FftwArray(const FftwArray&) = delete;
    FftwArray& operator=(const FftwArray&) = delete;

    T* data() { return data_; }
    const T* data() const { return data_; }
    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }
    std::size_t size() const { return n_; }

  private:
    std::size_t n_;
    T* data_;
};

// Unnormalized backward half-complex-to-real transform of length m:
// out[k] = sum_j in[j] e^{+2*pi*i*jk/m}, in given as the first m/2+1 bins.
// The plan is built once (FFTW_ESTIMATE, deterministic) on internal scratch
// and re-executed on caller arrays; fftw_malloc'd arrays share the plan's
// alignment, so the new-array execute is valid and thread-safe.
class HalfComplexToReal {
  public:
    explicit HalfComplexToReal(std::size_t m)
        : m_(m), scratch_in_(m / 2 + 1), scratch_out_(m) {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        plan_ = fftw_plan_dft_c2r_1d(static_cast<int>(m), scratch_in_.data(),
                                     scratch_out_.data(), FFTW_ESTIMATE);
    }
    ~HalfComplexToReal() {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fftw_destroy_plan(plan_);
    }
    HalfComplexToReal(const HalfComplexToReal&) = delete;
    HalfComplexToReal& operator=(const HalfComplexToReal&) = delete;

    std::size_t size() const { return m_; }

    // Destroys `in`, as FFTW c2r transforms do.
    void execute(fftw_complex* in, double* out) const {
        fftw_execute_dft_c2r(plan_, in, out);
    }

  private:
    std::size_t m_;
    FftwArray<fftw_complex> scratch_in_;
    FftwArray<double> scratch_out_;
    fftw_plan plan_;
};

}  // namespace fouest::detail

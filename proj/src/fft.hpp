#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <stdexcept>

namespace mbm::detail {

template <typename T>
class FftwBuffer {
public:
    FftwBuffer() = default;
    explicit FftwBuffer(std::size_t n) : n_(n), data_(static_cast<T*>(fftw_malloc(sizeof(T) * n))) {
        if (!data_) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(data_); }
    FftwBuffer(FftwBuffer&& o) noexcept : n_(o.n_), data_(o.data_) { o.data_ = nullptr; o.n_ = 0; }
    FftwBuffer& operator=(FftwBuffer&& o) noexcept {
        std::swap(n_, o.n_);
        std::swap(data_, o.data_);
        return *this;
    }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;

    T* data() { return data_; }
    const T* data() const { return data_; }
    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }
    std::size_t size() const { return n_; }

private:
    std::size_t n_ = 0;
    T* data_ = nullptr;
};

class FftwPlan {
public:
    FftwPlan() = default;
    explicit FftwPlan(fftw_plan p) : plan_(p) {
        if (!plan_) throw std::runtime_error("fftw planning failed");
    }
    ~FftwPlan() {
        if (plan_) fftw_destroy_plan(plan_);
    }
    FftwPlan(FftwPlan&& o) noexcept : plan_(o.plan_) { o.plan_ = nullptr; }
    FftwPlan& operator=(FftwPlan&& o) noexcept {
        std::swap(plan_, o.plan_);
        return *this;
    }
    FftwPlan(const FftwPlan&) = delete;
    FftwPlan& operator=(const FftwPlan&) = delete;

    void execute() const { fftw_execute(plan_); }

private:
    fftw_plan plan_ = nullptr;
};

// smallest 2^a 3^b >= n
inline std::size_t fft_size(std::size_t n) {
    std::size_t best = 1;
    while (best < n) best <<= 1;
    for (std::size_t p3 = 3; p3 < 2 * n; p3 *= 3) {
        std::size_t v = p3;
        while (v < n) v <<= 1;
        if (v < best) best = v;
    }
    return best;
}

}  // namespace mbm::detail

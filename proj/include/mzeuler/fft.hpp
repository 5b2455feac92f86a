// Thin RAII wrapper over FFTW: per-size c2c plans plus an aligned buffer
// pool.  Plans are created once (FFTW_ESTIMATE, so repeated runs pick the
// same algorithm and stay bitwise reproducible) and executed on any buffer
// from the pool via the new-array interface.
#pragma once

#include <fftw3.h>

#include <cstring>
#include <mutex>
#include <vector>

#include "mzeuler/core.hpp"

namespace mze {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

class FftBuffer {
  public:
    FftBuffer() = default;
    explicit FftBuffer(std::size_t n) : n_(n) {
        ptr_ = fftw_alloc_complex(n);
        if (!ptr_) throw std::bad_alloc();
        std::memset(ptr_, 0, sizeof(fftw_complex) * n);
    }
    ~FftBuffer() { if (ptr_) fftw_free(ptr_); }
    FftBuffer(FftBuffer&& o) noexcept : ptr_(o.ptr_), n_(o.n_) { o.ptr_ = nullptr; o.n_ = 0; }
    FftBuffer& operator=(FftBuffer&& o) noexcept {
        if (this != &o) {
            if (ptr_) fftw_free(ptr_);
            ptr_ = o.ptr_; n_ = o.n_; o.ptr_ = nullptr; o.n_ = 0;
        }
        return *this;
    }
    FftBuffer(const FftBuffer&) = delete;
    FftBuffer& operator=(const FftBuffer&) = delete;

    cplx* data() { return reinterpret_cast<cplx*>(ptr_); }
    const cplx* data() const { return reinterpret_cast<const cplx*>(ptr_); }
    fftw_complex* raw() { return ptr_; }
    std::size_t size() const { return n_; }
    void zero() { std::memset(ptr_, 0, sizeof(fftw_complex) * n_); }

  private:
    fftw_complex* ptr_ = nullptr;
    std::size_t n_ = 0;
};

// In-place 3D c2c transforms of one cubic size.
class FftPlan3d {
  public:
    explicit FftPlan3d(int k) : k_(k) {
        FftBuffer probe(std::size_t(k) * k * k);
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fwd_ = fftw_plan_dft_3d(k, k, k, probe.raw(), probe.raw(), FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_3d(k, k, k, probe.raw(), probe.raw(), FFTW_BACKWARD, FFTW_ESTIMATE);
        align_ = fftw_alignment_of(reinterpret_cast<double*>(probe.raw()));
        if (!fwd_ || !bwd_) throw std::runtime_error("fftw plan creation failed");
    }
    ~FftPlan3d() {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        if (fwd_) fftw_destroy_plan(fwd_);
        if (bwd_) fftw_destroy_plan(bwd_);
    }
    FftPlan3d(const FftPlan3d&) = delete;
    FftPlan3d& operator=(const FftPlan3d&) = delete;

    int size1d() const { return k_; }
    std::size_t size() const { return std::size_t(k_) * k_ * k_; }

    void forward(FftBuffer& buf) const { exec(fwd_, buf); }
    void backward(FftBuffer& buf) const { exec(bwd_, buf); }

  private:
    void exec(fftw_plan p, FftBuffer& buf) const {
        if (fftw_alignment_of(reinterpret_cast<double*>(buf.raw())) != align_)
            throw std::runtime_error("fft buffer alignment mismatch");
        fftw_execute_dft(p, buf.raw(), buf.raw());
    }

    int k_;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
    int align_ = 0;
};

}  // namespace mze

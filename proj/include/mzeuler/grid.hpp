// Wavenumber bookkeeping: the resolved set F, the unresolved complement G,
// per-mode wavevectors in FFT wrap-around order, and the incompressibility
// projector A_k = I - k k^T / |k|^2.
#pragma once

#include <cstddef>
#include <vector>

#include "mzeuler/core.hpp"

namespace mze {

class WavenumberGrid {
  public:
    // n_resolved = N (modes per direction in F), m_total = M (modes per
    // direction in the full cube).  Dealiasing of the resolved-range product
    // requires M >= 2N.
    WavenumberGrid(int n_resolved, int m_total) : n_(n_resolved), m_(m_total) {
        if (n_ < 2 || n_ % 2 != 0)
            throw std::invalid_argument("n_resolved must be even and >= 2");
        if (m_ % 2 != 0)
            throw std::invalid_argument("m_total must be even");
        if (m_ < 2 * n_)
            throw std::invalid_argument("m_total must be >= 2*n_resolved (dealiasing premise)");
        m3_ = std::size_t(m_) * m_ * m_;
        kvec_.resize(m3_);
        klass_.resize(m3_);
        for (int i0 = 0; i0 < m_; ++i0)
            for (int i1 = 0; i1 < m_; ++i1)
                for (int i2 = 0; i2 < m_; ++i2) {
                    std::size_t idx = index_raw(i0, i1, i2);
                    Vec3i k{freq(i0), freq(i1), freq(i2)};
                    kvec_[idx] = k;
                    bool in_f = true, odd = false;
                    for (int a = 0; a < 3; ++a) {
                        if (k[a] < -n_ / 2 || k[a] > n_ / 2 - 1) in_f = false;
                        if (k[a] == -m_ / 2) odd = true;
                    }
                    unsigned char c = in_f ? 1 : 2;  // F : G
                    if (odd) c |= 4;
                    klass_[idx] = c;
                    if (in_f) f_indices_.push_back(idx);
                }
    }

    int n_resolved() const { return n_; }
    int m_total() const { return m_; }
    std::size_t size() const { return m3_; }

    const Vec3i& wavevector(std::size_t idx) const { return kvec_[idx]; }

    bool in_mask(std::size_t idx, Mask m) const {
        return (klass_[idx] & static_cast<unsigned char>(m)) != 0;
    }
    bool in_f(std::size_t idx) const { return klass_[idx] & 1; }
    // Modes with a component equal to -M/2 have no grid negation.
    bool oddball(std::size_t idx) const { return klass_[idx] & 4; }

    // Linear index of wavevector k; k must lie in [-M/2, M/2-1]^3.
    std::size_t index_of(const Vec3i& k) const {
        return index_raw(wrap(k[0]), wrap(k[1]), wrap(k[2]));
    }
    // Index of k if on the grid, npos otherwise.
    static constexpr std::size_t npos = ~std::size_t(0);
    std::size_t index_of_checked(const Vec3i& k) const {
        for (int a = 0; a < 3; ++a)
            if (k[a] < -m_ / 2 || k[a] > m_ / 2 - 1) return npos;
        return index_of(k);
    }
    std::size_t negation_index(std::size_t idx) const {
        const Vec3i& k = kvec_[idx];
        return index_of_checked({-k[0], -k[1], -k[2]});
    }

    // Indices of F in a fixed deterministic order (used for compact storage).
    const std::vector<std::size_t>& f_indices() const { return f_indices_; }
    std::size_t f_count() const { return f_indices_.size(); }
    std::size_t mask_count(Mask m) const {
        switch (m) {
            case Mask::Empty: return 0;
            case Mask::F:     return f_indices_.size();
            case Mask::G:     return m3_ - f_indices_.size();
            case Mask::FG:    return m3_;
        }
        return 0;
    }

  private:
    int freq(int i) const { return i <= m_ / 2 - 1 ? i : i - m_; }
    int wrap(int k) const { return k >= 0 ? k : k + m_; }
    std::size_t index_raw(int i0, int i1, int i2) const {
        return (std::size_t(i0) * m_ + i1) * m_ + i2;
    }

    int n_, m_;
    std::size_t m3_;
    std::vector<Vec3i> kvec_;
    std::vector<unsigned char> klass_;
    std::vector<std::size_t> f_indices_;
};

// A_k v = v - k (k.v)/|k|^2, with A_0 = I (the k=0 mode is zero throughout
// for zero-mean data, so the convention never matters dynamically).
inline Vec3c leray_apply(const Vec3i& k, const Vec3c& v) {
    const real k2 = real(k[0]) * k[0] + real(k[1]) * k[1] + real(k[2]) * k[2];
    if (k2 == 0.0) return v;
    const cplx s = dot(k, v) / k2;
    return Vec3c{{v[0] - real(k[0]) * s, v[1] - real(k[1]) * s, v[2] - real(k[2]) * s}};
}

}  // namespace mze

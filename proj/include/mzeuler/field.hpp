// Three-component complex Fourier coefficient arrays on the full wavenumber
// cube, plus the field-level operations every model term relies on:
// Hermitian symmetrization, divergence-free projection, masking, energy.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "mzeuler/grid.hpp"

namespace mze {

class SpectralField {
  public:
    SpectralField() = default;
    explicit SpectralField(const WavenumberGrid& grid)
        : grid_(&grid), data_(3 * grid.size(), cplx{}) {}

    const WavenumberGrid& grid() const { return *grid_; }
    bool valid() const { return grid_ != nullptr; }
    bool same_grid(const SpectralField& o) const { return grid_ == o.grid_; }

    cplx& at(int comp, std::size_t idx) { return data_[comp * grid_->size() + idx]; }
    const cplx& at(int comp, std::size_t idx) const { return data_[comp * grid_->size() + idx]; }

    cplx* comp(int c) { return data_.data() + c * grid_->size(); }
    const cplx* comp(int c) const { return data_.data() + c * grid_->size(); }

    Vec3c vec_at(std::size_t idx) const {
        return Vec3c{{at(0, idx), at(1, idx), at(2, idx)}};
    }
    void set_vec(std::size_t idx, const Vec3c& v) {
        at(0, idx) = v[0]; at(1, idx) = v[1]; at(2, idx) = v[2];
    }
    void add_vec(std::size_t idx, const Vec3c& v) {
        at(0, idx) += v[0]; at(1, idx) += v[1]; at(2, idx) += v[2];
    }

    std::size_t value_count() const { return data_.size(); }
    cplx* data() { return data_.data(); }
    const cplx* data() const { return data_.data(); }

    void set_zero() { std::fill(data_.begin(), data_.end(), cplx{}); }

    SpectralField& operator+=(const SpectralField& o) {
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o) {
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    SpectralField& operator*=(real s) {
        for (auto& v : data_) v *= s;
        return *this;
    }

  private:
    const WavenumberGrid* grid_ = nullptr;
    std::vector<cplx> data_;
};

inline void axpy(SpectralField& y, real a, const SpectralField& x) {
    cplx* yd = y.data();
    const cplx* xd = x.data();
    const std::size_t n = y.value_count();
    for (std::size_t i = 0; i < n; ++i) yd[i] += a * xd[i];
}

inline void scale(SpectralField& y, real a) { y *= a; }

// Zero every coefficient outside the mask.
inline void restrict_to_mask(SpectralField& f, Mask m) {
    const WavenumberGrid& g = f.grid();
    for (int c = 0; c < 3; ++c) {
        cplx* d = f.comp(c);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (!g.in_mask(i, m)) d[i] = cplx{};
    }
}

inline bool has_support_outside(const SpectralField& f, Mask m, real tol = 0.0) {
    const WavenumberGrid& g = f.grid();
    for (int c = 0; c < 3; ++c) {
        const cplx* d = f.comp(c);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (!g.in_mask(i, m) && std::abs(d[i]) > tol) return true;
    }
    return false;
}

// Zero every coefficient whose mode (or its negation) falls outside the
// mask.  A Hermitian field restricted to a mask can only be supported where
// the mask contains both k and -k; the leftover -N/2 faces behave like the
// grid-level oddballs and are forced to zero.
inline void restrict_to_hermitian_support(SpectralField& f, Mask m) {
    const WavenumberGrid& g = f.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        bool keep = g.in_mask(i, m);
        if (keep) {
            std::size_t j = g.negation_index(i);
            keep = j != WavenumberGrid::npos && g.in_mask(j, m);
        }
        if (!keep) f.set_vec(i, Vec3c{});
    }
}

// Largest pairwise symmetry violation |u_{-k} - conj(u_k)| over modes whose
// negation is on the grid.
inline real hermitian_defect(const SpectralField& f) {
    const WavenumberGrid& g = f.grid();
    real worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        std::size_t j = g.negation_index(i);
        if (j == WavenumberGrid::npos) continue;
        for (int c = 0; c < 3; ++c)
            worst = std::max(worst, std::abs(f.at(c, j) - std::conj(f.at(c, i))));
    }
    return worst;
}

// u_k <- (u_k + conj(u_{-k}))/2; oddball modes are zeroed (no grid negation).
inline void hermitian_enforce(SpectralField& f) {
    const WavenumberGrid& g = f.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g.oddball(i)) {
            f.set_vec(i, Vec3c{});
            continue;
        }
        std::size_t j = g.negation_index(i);
        if (j < i) continue;  // pair already handled
        for (int c = 0; c < 3; ++c) {
            cplx a = f.at(c, i), b = f.at(c, j);
            cplx s = 0.5 * (a + std::conj(b));
            f.at(c, i) = s;
            f.at(c, j) = std::conj(s);
        }
    }
}

// Projection onto the physical state space of a model whose retained set is
// `m`: restrict to the mask, symmetrize, and zero the unpairable face modes.
// Applied to every assembled right-hand side so that states stay Hermitian
// even though the literal box masks are not negation-symmetric at the N/2
// shell.
inline void sym_state_project(SpectralField& f, Mask m) {
    restrict_to_mask(f, m);
    hermitian_enforce(f);
    restrict_to_hermitian_support(f, m);
}

inline void project_divergence_free(SpectralField& f) {
    const WavenumberGrid& g = f.grid();
    for (std::size_t i = 0; i < g.size(); ++i)
        f.set_vec(i, leray_apply(g.wavevector(i), f.vec_at(i)));
}

// max_k |k . u_k|
inline real divergence_norm(const SpectralField& f) {
    const WavenumberGrid& g = f.grid();
    real worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        worst = std::max(worst, std::abs(dot(g.wavevector(i), f.vec_at(i))));
    return worst;
}

// Resolved energy E = 1/2 sum_{k in F} |u_k|^2.
inline real energy_resolved(const SpectralField& f) {
    const WavenumberGrid& g = f.grid();
    real e = 0.0;
    for (std::size_t i : g.f_indices())
        for (int c = 0; c < 3; ++c)
            e += std::norm(f.at(c, i));
    return 0.5 * e;
}

inline real energy_total(const SpectralField& f) {
    real e = 0.0;
    const cplx* d = f.data();
    for (std::size_t i = 0; i < f.value_count(); ++i) e += std::norm(d[i]);
    return 0.5 * e;
}

inline real max_abs(const SpectralField& f) {
    real m = 0.0;
    const cplx* d = f.data();
    for (std::size_t i = 0; i < f.value_count(); ++i) m = std::max(m, std::abs(d[i]));
    return m;
}

inline real max_abs_diff(const SpectralField& a, const SpectralField& b) {
    real m = 0.0;
    const cplx* ad = a.data();
    const cplx* bd = b.data();
    for (std::size_t i = 0; i < a.value_count(); ++i)
        m = std::max(m, std::abs(ad[i] - bd[i]));
    return m;
}

// Relative sup-norm difference, normalized by the sup of the reference.
inline real rel_error(const SpectralField& got, const SpectralField& ref) {
    real r = max_abs(ref);
    real d = max_abs_diff(got, ref);
    if (r == 0.0) return d == 0.0 ? 0.0 : d;
    return d / r;
}

inline bool all_finite(const SpectralField& f) {
    const cplx* d = f.data();
    for (std::size_t i = 0; i < f.value_count(); ++i)
        if (!std::isfinite(d[i].real()) || !std::isfinite(d[i].imag())) return false;
    return true;
}

// Taylor-Green vortex v = (sin x1 cos x2 cos x3, -cos x1 sin x2 cos x3, 0):
// eight modes at k = (+-1,+-1,+-1), u^1_k = -i k1/8, u^2_k = +i k2/8.
inline SpectralField taylor_green_field(const WavenumberGrid& grid) {
    if (grid.n_resolved() < 4)
        throw std::invalid_argument("taylor_green_field requires n_resolved >= 4");
    SpectralField f(grid);
    for (int s1 : {-1, 1})
        for (int s2 : {-1, 1})
            for (int s3 : {-1, 1}) {
                std::size_t idx = grid.index_of({s1, s2, s3});
                f.at(0, idx) = -imag_unit * (real(s1) / 8.0);
                f.at(1, idx) = imag_unit * (real(s2) / 8.0);
            }
    return f;
}

}  // namespace mze

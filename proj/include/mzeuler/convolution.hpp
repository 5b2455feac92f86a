// The masked bilinear convolution
//
//     b_k(x,y) = -i sum_{p+q=k, p in mx, q in my} (k . x_p) A_k y_q
//
// evaluated pseudospectrally: scatter the masked inputs into a zero-padded
// cube, transform to physical space, form the nine component products
// X^b Y^d, transform back, and contract with k_b and A_k mode by mode.
// Padding follows the dealiasing bound for the masks involved: products of
// F-supported inputs use a 2N cube (the circular convolution is then exact
// for every retained output), anything touching F u G uses the 3/2 rule on
// the full cube.  A direct O(M^6) double-sum evaluator of the same formula
// serves as the reference oracle in the tests.
#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <thread>

#include "mzeuler/fft.hpp"
#include "mzeuler/field.hpp"

namespace mze {

class ConvolutionEngine {
  public:
    explicit ConvolutionEngine(const WavenumberGrid& grid, int threads = 1)
        : grid_(&grid), threads_(threads < 1 ? 1 : threads) {
        const int m = grid.m_total();
        const int n = grid.n_resolved();
        kf_ = 2 * n;                    // exact for F x F products
        kfg_ = 2 * ((3 * m + 3) / 4);   // >= 3M/2, even
        pads_[0] = std::make_unique<Pad>(grid, kf_);
        pads_[1] = std::make_unique<Pad>(grid, kfg_);
        for (int i = 0; i < 16; ++i)
            pool_.emplace_back(pads_[1]->plan.size());
    }

    const WavenumberGrid& grid() const { return *grid_; }
    int padded_size(Mask mx, Mask my) const {
        return (mx == Mask::F && my == Mask::F) ? kf_ : kfg_;
    }
    void set_threads(int t) { threads_ = t < 1 ? 1 : t; }

    SpectralField bilinear(const SpectralField& x, Mask mx,
                           const SpectralField& y, Mask my, Mask mout) {
        SpectralField out(*grid_);
        accumulate(out, nullptr, 1.0, x, mx, y, my, mout);
        return out;
    }

    // out += coeff * b(x|mx, y|my) restricted to mout.
    void accumulate(SpectralField& out, real coeff, const SpectralField& x, Mask mx,
                    const SpectralField& y, Mask my, Mask mout) {
        accumulate(out, nullptr, coeff, x, mx, y, my, mout);
    }

    // The mirror pair b(x|mx, y|my) + b(y|my, x|mx) shares one product
    // tensor; every printed model term comes in such pairs.
    SpectralField bilinear_pair(const SpectralField& x, Mask mx,
                                const SpectralField& y, Mask my, Mask mout) {
        SpectralField out(*grid_);
        accumulate_pair(out, 1.0, x, mx, y, my, mout);
        return out;
    }

    void accumulate_pair(SpectralField& out, real coeff, const SpectralField& x, Mask mx,
                         const SpectralField& y, Mask my, Mask mout) {
        SpectralField* second = &out;
        accumulate(out, second, coeff, x, mx, y, my, mout);
    }

  private:
    struct Pad {
        Pad(const WavenumberGrid& g, int k) : plan(k) {
            // map each grid mode into the padded cube; npos when the padded
            // cube cannot represent it (its true product value is zero there)
            scatter.resize(g.size());
            for (std::size_t i = 0; i < g.size(); ++i) {
                const Vec3i& kv = g.wavevector(i);
                bool ok = true;
                std::size_t idx = 0;
                for (int a = 0; a < 3; ++a) {
                    if (kv[a] < -k / 2 || kv[a] > k / 2 - 1) { ok = false; break; }
                    int w = kv[a] >= 0 ? kv[a] : kv[a] + k;
                    idx = idx * k + std::size_t(w);
                }
                scatter[i] = ok ? idx : WavenumberGrid::npos;
            }
        }
        FftPlan3d plan;
        std::vector<std::size_t> scatter;
    };

    Pad& pad_for(Mask mx, Mask my) {
        return (mx == Mask::F && my == Mask::F) ? *pads_[0] : *pads_[1];
    }

    void scatter_component(Pad& pad, const SpectralField& f, Mask m, int c, FftBuffer& buf) {
        buf.zero();
        cplx* b = buf.data();
        const cplx* d = f.comp(c);
        const WavenumberGrid& g = *grid_;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!g.in_mask(i, m)) continue;
            std::size_t t = pad.scatter[i];
            if (t != WavenumberGrid::npos) b[t] = d[i];
        }
    }

    void run_batch(const std::vector<std::function<void()>>& jobs) {
        if (threads_ <= 1 || jobs.size() <= 1) {
            for (auto& j : jobs) j();
            return;
        }
        std::vector<std::thread> ts;
        std::atomic<std::size_t> next{0};
        int nt = std::min<std::size_t>(threads_, jobs.size());
        for (int t = 0; t < nt; ++t)
            ts.emplace_back([&] {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= jobs.size()) return;
                    jobs[i]();
                }
            });
        for (auto& t : ts) t.join();
    }

    // Core: compute the product tensor T^{bd} = conv(x|mx ^b, y|my ^d) and
    // contract.  If `mirror` is non-null the transposed contraction is added
    // as well (into the same or another field).
    void accumulate(SpectralField& out, SpectralField* mirror, real coeff,
                    const SpectralField& x, Mask mx,
                    const SpectralField& y, Mask my, Mask mout) {
        if (!x.same_grid(out) || !y.same_grid(out) || x.grid().m_total() != grid_->m_total())
            throw std::invalid_argument("masked_bilinear: fields on mismatched grids");
        if (mask_empty(mx) || mask_empty(my) || mask_empty(mout)) return;

        Pad& pad = pad_for(mx, my);
        const std::size_t kn = pad.plan.size();

        FftBuffer* xb[3];
        FftBuffer* yb[3];
        FftBuffer* pr[9];
        const bool same_input = (&x == &y && mx == my);
        int used = 0;
        for (int c = 0; c < 3; ++c) xb[c] = &pool_[used++];
        if (same_input)
            for (int c = 0; c < 3; ++c) yb[c] = xb[c];
        else
            for (int c = 0; c < 3; ++c) yb[c] = &pool_[used++];
        for (int j = 0; j < 9; ++j) pr[j] = &pool_[used++];

        std::vector<std::function<void()>> jobs;
        for (int c = 0; c < 3; ++c)
            jobs.push_back([&, c] {
                scatter_component(pad, x, mx, c, *xb[c]);
                pad.plan.backward(*xb[c]);
            });
        if (!same_input)
            for (int c = 0; c < 3; ++c)
                jobs.push_back([&, c] {
                    scatter_component(pad, y, my, c, *yb[c]);
                    pad.plan.backward(*yb[c]);
                });
        run_batch(jobs);

        jobs.clear();
        for (int b = 0; b < 3; ++b)
            for (int d = 0; d < 3; ++d)
                jobs.push_back([&, b, d] {
                    FftBuffer& p = *pr[3 * b + d];
                    const cplx* xa = xb[b]->data();
                    const cplx* ya = yb[d]->data();
                    cplx* pa = p.data();
                    for (std::size_t i = 0; i < kn; ++i) pa[i] = xa[i] * ya[i];
                    pad.plan.forward(p);
                });
        run_batch(jobs);

        const real norm = coeff / real(kn);
        const WavenumberGrid& g = *grid_;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!g.in_mask(i, mout)) continue;
            std::size_t t = pad.scatter[i];
            if (t == WavenumberGrid::npos) continue;  // true value zero
            const Vec3i& kv = g.wavevector(i);
            Vec3c s{}, s2{};
            for (int b = 0; b < 3; ++b) {
                const real kb = real(kv[b]);
                if (kb == 0.0) continue;
                for (int d = 0; d < 3; ++d) {
                    s[d] += kb * pr[3 * b + d]->data()[t];
                    if (mirror) s2[d] += kb * pr[3 * d + b]->data()[t];
                }
            }
            const cplx fac = -imag_unit * norm;
            out.add_vec(i, leray_apply(kv, s) * fac);
            if (mirror) mirror->add_vec(i, leray_apply(kv, s2) * fac);
        }
    }

    const WavenumberGrid* grid_;
    int threads_;
    int kf_, kfg_;
    std::unique_ptr<Pad> pads_[2];
    std::vector<FftBuffer> pool_;
};

// Reference evaluation of the same masked sum by direct double summation,
// O(|mout| * |mx|).  Deliberately independent of the FFT path.
inline SpectralField masked_bilinear_direct(const SpectralField& x, Mask mx,
                                            const SpectralField& y, Mask my, Mask mout) {
    if (!x.same_grid(y))
        throw std::invalid_argument("masked_bilinear_direct: fields on mismatched grids");
    const WavenumberGrid& g = x.grid();
    SpectralField out(g);
    if (mask_empty(mx) || mask_empty(my) || mask_empty(mout)) return out;
    for (std::size_t ki = 0; ki < g.size(); ++ki) {
        if (!g.in_mask(ki, mout)) continue;
        const Vec3i& k = g.wavevector(ki);
        Vec3c acc{};
        for (std::size_t pi = 0; pi < g.size(); ++pi) {
            if (!g.in_mask(pi, mx)) continue;
            const Vec3i& p = g.wavevector(pi);
            std::size_t qi = g.index_of_checked({k[0] - p[0], k[1] - p[1], k[2] - p[2]});
            if (qi == WavenumberGrid::npos || !g.in_mask(qi, my)) continue;
            const cplx kx = dot(k, x.vec_at(pi));
            if (kx == cplx{}) continue;
            Vec3c yq = y.vec_at(qi);
            acc += yq * kx;
        }
        out.set_vec(ki, leray_apply(k, acc) * (-imag_unit));
    }
    return out;
}

}  // namespace mze

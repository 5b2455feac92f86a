// Truncated memory integrals
//
//   I_j(t) = (1/j!) int_{max(0, t-t0)}^{t} (t - s)^j Z_j(u(s)) ds
//
// maintained incrementally: per step the trapezoid contribution of the new
// subinterval is added and that of the expired one subtracted, using moment
// accumulators M_{j,m} = int (s - b)^m Z_j(u(s)) ds about a shiftable origin
// b.  The age weights assemble from the moments through
// (t-s)^j = sum_m C(j,m) (t-b)^{j-m} (-(s-b))^m.  A history window of the
// last [t0/dt]+1 integrand snapshots supplies the expiring endpoint values.
// An O(window) direct summation (trapezoid or Simpson) provides the
// reference mode.
//
// The engine is generic over the integrand payload (a compact field in the
// solver, plain doubles in the unit tests); payloads provide mem_zero_like
// and mem_axpy.
#pragma once

#include <cmath>
#include <deque>
#include <limits>

#include "mzeuler/field.hpp"

namespace mze {

// Compact storage for a field restricted to the resolved range.
struct ResolvedVec {
    std::vector<cplx> v;
};

inline ResolvedVec gather_resolved(const SpectralField& f) {
    const WavenumberGrid& g = f.grid();
    ResolvedVec out;
    out.v.reserve(3 * g.f_count());
    for (std::size_t i : g.f_indices())
        for (int c = 0; c < 3; ++c) out.v.push_back(f.at(c, i));
    return out;
}

inline void scatter_resolved(const WavenumberGrid& g, const ResolvedVec& rv, SpectralField& f) {
    f.set_zero();
    std::size_t n = 0;
    for (std::size_t i : g.f_indices())
        for (int c = 0; c < 3; ++c) f.at(c, i) = rv.v[n++];
}

inline ResolvedVec mem_zero_like(const ResolvedVec& x) {
    return ResolvedVec{std::vector<cplx>(x.v.size(), cplx{})};
}
inline void mem_axpy(ResolvedVec& y, real a, const ResolvedVec& x) {
    for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] += a * x.v[i];
}
inline real rms(const ResolvedVec& x) {
    real s = 0.0;
    for (const cplx& c : x.v) s += std::norm(c);
    return x.v.empty() ? 0.0 : std::sqrt(s / real(x.v.size()));
}

inline double mem_zero_like(const double&) { return 0.0; }
inline void mem_axpy(double& y, real a, const double& x) { y += a * x; }

enum class Quadrature { Trapezoid, Simpson };
enum class MemoryMode { Incremental, Direct };

struct MemoryConfig {
    double t0 = std::numeric_limits<double>::infinity();  // window length; inf = untruncated
    double dt = 1e-3;
    int order = 0;
    double rebase_interval = 0.0;  // 0: rebase every t0 (or never when untruncated)
    Quadrature quadrature = Quadrature::Trapezoid;
    MemoryMode mode = MemoryMode::Incremental;

    bool truncated() const { return std::isfinite(t0); }

    void validate() const {
        if (dt <= 0.0) throw std::invalid_argument("memory: dt must be positive");
        if (order < 0) throw std::invalid_argument("memory: order must be >= 0");
        if (truncated()) {
            if (t0 <= 0.0) throw std::invalid_argument("memory: t0 must be positive");
            double w = t0 / dt;
            if (std::abs(w - std::round(w)) > 1e-9 * std::max(1.0, w))
                throw std::invalid_argument("memory: t0 must be an integer multiple of dt");
        }
        if (quadrature == Quadrature::Simpson && mode == MemoryMode::Incremental)
            throw std::invalid_argument(
                "memory: Simpson quadrature is available in direct mode only");
    }
};

template <class V>
class MemoryEngine {
  public:
    explicit MemoryEngine(const MemoryConfig& cfg) : cfg_(cfg) {
        cfg_.validate();
        if (cfg_.truncated()) wcap_ = std::size_t(std::llround(cfg_.t0 / cfg_.dt));
        if (cfg_.rebase_interval <= 0.0 && cfg_.truncated())
            cfg_.rebase_interval = cfg_.t0;
    }

    const MemoryConfig& config() const { return cfg_; }
    std::size_t window_size() const { return window_.size(); }
    bool window_full() const { return cfg_.truncated() && window_.size() == wcap_ + 1; }
    double newest_time() const { return window_.empty() ? 0.0 : window_.back().t; }
    double t_base() const { return t_base_; }

    // Store the integrand snapshots of the accepted step at time t and roll
    // the moments forward by one subinterval.
    void push(double t, std::vector<V> z) {
        if (int(z.size()) != cfg_.order + 1)
            throw std::invalid_argument("memory: wrong number of integrand snapshots");
        if (window_.empty()) {
            t_base_ = t;
            moments_.clear();
            for (int j = 0; j <= cfg_.order; ++j)
                for (int m = 0; m <= j; ++m) moments_.push_back(mem_zero_like(z[0]));
        } else {
            const double expect = window_.back().t + cfg_.dt;
            if (std::abs(t - expect) > 1e-9 * std::max(1.0, std::abs(expect)))
                throw std::invalid_argument(
                    "memory: non-contiguous push (expected t = previous + dt)");
        }
        window_.push_back({t, std::move(z)});

        if (window_.size() >= 2) {
            const Slot& a = window_[window_.size() - 2];
            const Slot& b = window_.back();
            add_trapezoid(a, b, 1.0);
        }
        if (cfg_.truncated() && window_.size() == wcap_ + 2) {
            add_trapezoid(window_[0], window_[1], -1.0);
            window_.pop_front();
        }
        if (cfg_.rebase_interval > 0.0 && t - t_base_ >= cfg_.rebase_interval - 1e-12)
            rebase(t);
    }

    // Memory term at the newest accepted time, assembled from the moments
    // (or by direct summation in direct mode).
    V memory_term(double t) const { return memory_term(t, nullptr); }

    // Memory term at a stage time tau in [t, t + dt]: window part, plus the
    // trapezoid of the fresh piece [t, tau] using the stage's own integrand,
    // minus the expired sliver [tau - t0, ...] when the window is full.
    V memory_term(double tau, const std::vector<V>* stage_z) const {
        if (window_.empty()) throw std::logic_error("memory: no snapshots pushed");
        const double tn = window_.back().t;
        V out = cfg_.mode == MemoryMode::Incremental ? from_moments(tau)
                                                     : direct_window_integral(tau);
        const double h = tau - tn;
        if (h > 1e-14) {
            if (!stage_z) throw std::invalid_argument("memory: stage integrand required");
            const Slot& nb = window_.back();
            for (int j = 0; j <= cfg_.order; ++j) {
                mem_axpy(out, 0.5 * h * age_weight(j, tau - tn), nb.z[j]);
                if (j == 0) mem_axpy(out, 0.5 * h, (*stage_z)[0]);
            }
            if (window_full()) {
                // subtract the sliver [t_old, t_old + h]; its far endpoint is
                // linearly interpolated between the two oldest snapshots
                const Slot& s0 = window_[0];
                const Slot& s1 = window_[1];
                const double th = h / cfg_.dt;
                for (int j = 0; j <= cfg_.order; ++j) {
                    mem_axpy(out, -0.5 * h * age_weight(j, tau - s0.t), s0.z[j]);
                    const double w = 0.5 * h * age_weight(j, tau - s0.t - h);
                    mem_axpy(out, -w * (1.0 - th), s0.z[j]);
                    mem_axpy(out, -w * th, s1.z[j]);
                }
            }
        }
        return out;
    }

    // O(window) reference: trapezoid or Simpson sum of the age-weighted
    // snapshots.
    V direct_window_integral(double tau) const {
        V acc = mem_zero_like(window_.front().z[0]);
        const std::size_t n = window_.size();
        if (n < 2) return acc;
        const double dt = cfg_.dt;
        std::vector<double> w(n, 0.0);
        std::size_t first = 0;
        if (cfg_.quadrature == Quadrature::Simpson) {
            // composite Simpson needs an even interval count; an odd leading
            // interval is handled by trapezoid
            if ((n - 1) % 2 != 0) {
                w[0] += 0.5 * dt;
                w[1] += 0.5 * dt;
                first = 1;
            }
            for (std::size_t i = first; i + 2 <= n - 1; i += 2) {
                w[i] += dt / 3.0;
                w[i + 1] += 4.0 * dt / 3.0;
                w[i + 2] += dt / 3.0;
            }
        } else {
            w[0] = w[n - 1] = 0.5 * dt;
            for (std::size_t i = 1; i + 1 < n; ++i) w[i] = dt;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const Slot& s = window_[i];
            for (int j = 0; j <= cfg_.order; ++j)
                mem_axpy(acc, w[i] * age_weight(j, tau - s.t), s.z[j]);
        }
        return acc;
    }

    // Exact binomial re-expansion of the moments about a new origin.
    void rebase(double new_base) {
        const double d = new_base - t_base_;
        if (d == 0.0) return;
        for (int j = 0; j <= cfg_.order; ++j) {
            std::vector<V> old;
            for (int m = 0; m <= j; ++m) old.push_back(moment(j, m));
            for (int m = 0; m <= j; ++m) {
                V acc = mem_zero_like(old[0]);
                for (int i = 0; i <= m; ++i)
                    mem_axpy(acc, binom(m, i) * std::pow(-d, m - i), old[i]);
                moment(j, m) = std::move(acc);
            }
        }
        t_base_ = new_base;
    }

    // Recompute every moment from the stored window (test oracle).
    std::vector<V> moments_from_scratch() const {
        std::vector<V> out;
        for (int j = 0; j <= cfg_.order; ++j)
            for (int m = 0; m <= j; ++m) {
                V acc = mem_zero_like(window_.front().z[0]);
                for (std::size_t i = 0; i + 1 < window_.size(); ++i) {
                    const Slot& a = window_[i];
                    const Slot& b = window_[i + 1];
                    mem_axpy(acc, 0.5 * cfg_.dt * std::pow(a.t - t_base_, m), a.z[j]);
                    mem_axpy(acc, 0.5 * cfg_.dt * std::pow(b.t - t_base_, m), b.z[j]);
                }
                out.push_back(std::move(acc));
            }
        return out;
    }

    const std::vector<V>& moments() const { return moments_; }

    const V& snapshot(std::size_t slot, int j) const { return window_[slot].z[j]; }
    double snapshot_time(std::size_t slot) const { return window_[slot].t; }

  private:
    struct Slot {
        double t;
        std::vector<V> z;
    };

    static double binom(int n, int k) {
        double r = 1.0;
        for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
        return r;
    }

    static double factorial(int n) {
        double r = 1.0;
        for (int i = 2; i <= n; ++i) r *= i;
        return r;
    }

    // (tau - s)^j / j! evaluated at age a = tau - s
    static double age_weight(int j, double a) {
        return std::pow(a, j) / factorial(j);
    }

    V& moment(int j, int m) { return moments_[std::size_t(j) * (j + 1) / 2 + m]; }
    const V& moment(int j, int m) const { return moments_[std::size_t(j) * (j + 1) / 2 + m]; }

    void add_trapezoid(const Slot& a, const Slot& b, double sign) {
        const double half = 0.5 * cfg_.dt * sign;
        for (int j = 0; j <= cfg_.order; ++j)
            for (int m = 0; m <= j; ++m) {
                mem_axpy(moment(j, m), half * std::pow(a.t - t_base_, m), a.z[j]);
                mem_axpy(moment(j, m), half * std::pow(b.t - t_base_, m), b.z[j]);
            }
    }

    V from_moments(double tau) const {
        V acc = mem_zero_like(moments_.front());
        for (int j = 0; j <= cfg_.order; ++j) {
            const double fj = factorial(j);
            for (int m = 0; m <= j; ++m) {
                const double c =
                    binom(j, m) * std::pow(tau - t_base_, j - m) * (m % 2 ? -1.0 : 1.0) / fj;
                mem_axpy(acc, c, moment(j, m));
            }
        }
        return acc;
    }

    MemoryConfig cfg_;
    std::size_t wcap_ = 0;
    std::deque<Slot> window_;
    std::vector<V> moments_;
    double t_base_ = 0.0;
};

}  // namespace mze

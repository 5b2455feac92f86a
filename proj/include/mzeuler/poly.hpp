// Exact polynomial-algebra route to the model terms, independent of the FFT
// and expression-tree machinery.
//
// Z^n_k = PL(QL)^n QL u_k is evaluated at a resolved state u0 by polynomial
// arithmetic in the deviation variables d = u - u0 (one complex variable per
// mode and component).  Each R_i is the exact quadratic
//
//   R_i(u0 + d) = R_i(u0) + [linear in d] + [quadratic in d],
//
// L differentiates and substitutes R exactly, P zeroes the unresolved
// variables (here: drops every monomial containing a G variable, since u0
// has no unresolved part), and Q keeps exactly the monomials P drops.  The
// final value is the constant term, so a polynomial entering stage j can be
// truncated to order n+2-j: every remaining operator application lowers a
// monomial's order by at most one, making the truncation exact for the
// output.  The three output components are carried together as one
// 3-vector coefficient per monomial.
//
// Monomials are packed into 64 bits: up to 5 variables of 12 bits each
// (sorted descending, value = id+1), which bounds the usable grid at
// 3 M^3 <= 4095 (M <= 10) and the polynomial degree at 5 -- ample for the
// tiny oracle grids.
#pragma once

#include <cstring>

#include "mzeuler/field.hpp"

namespace mze {

namespace poly_detail {

constexpr int kSlotBits = 12;
constexpr std::uint64_t kSlotMask = (1ull << kSlotBits) - 1;
constexpr int kMaxVars = 5;

inline int key_order(std::uint64_t key) {
    int n = 0;
    while (key) {
        ++n;
        key >>= kSlotBits;
    }
    return n;
}

// insert variable id (slots sorted descending)
inline std::uint64_t key_insert(std::uint64_t key, std::uint32_t var) {
    std::uint64_t v = var + 1;
    std::uint64_t out = 0;
    int pos = 0;
    bool placed = false;
    for (int s = 0; s < kMaxVars; ++s) {
        std::uint64_t slot = (key >> (kSlotBits * s)) & kSlotMask;
        if (!placed && v >= slot) {
            out |= v << (kSlotBits * pos++);
            placed = true;
        }
        if (slot) out |= slot << (kSlotBits * pos++);
    }
    if (!placed) out |= v << (kSlotBits * pos++);
    return out;
}

// remove one occurrence of a variable id
inline std::uint64_t key_remove(std::uint64_t key, std::uint32_t var) {
    std::uint64_t v = var + 1;
    std::uint64_t out = 0;
    int pos = 0;
    bool removed = false;
    for (int s = 0; s < kMaxVars; ++s) {
        std::uint64_t slot = (key >> (kSlotBits * s)) & kSlotMask;
        if (!slot) break;
        if (!removed && slot == v) {
            removed = true;
            continue;
        }
        out |= slot << (kSlotBits * pos++);
    }
    return out;
}

// Open-addressing map from monomial key to 3-vector coefficient.
class MonoMap {
  public:
    MonoMap() = default;

    std::size_t size() const { return count_; }
    bool empty() const { return count_ == 0; }

    void clear() {
        keys_.clear();
        vals_.clear();
        count_ = 0;
        cap_ = 0;
    }

    void add(std::uint64_t key, const Vec3c& v) {
        if (count_ * 10 >= cap_ * 7) grow();
        std::size_t i = mix64(key) & (cap_ - 1);
        for (;;) {
            if (keys_[i] == 0) {
                keys_[i] = key;
                vals_[i] = v;
                ++count_;
                return;
            }
            if (keys_[i] == key) {
                vals_[i] += v;
                return;
            }
            i = (i + 1) & (cap_ - 1);
        }
    }

    template <class Fn>
    void for_each(Fn&& fn) const {
        for (std::size_t i = 0; i < cap_; ++i)
            if (keys_[i]) fn(keys_[i], vals_[i]);
    }

    template <class Pred>
    void filter(Pred&& keep) {
        MonoMap out;
        out.reserve(count_);
        for (std::size_t i = 0; i < cap_; ++i)
            if (keys_[i] && keep(keys_[i])) out.add(keys_[i], vals_[i]);
        *this = std::move(out);
    }

    void reserve(std::size_t n) {
        std::size_t want = 16;
        while (want * 7 < n * 10) want <<= 1;
        if (want > cap_) rehash(want);
    }

  private:
    void grow() { rehash(cap_ ? cap_ * 2 : 16); }

    void rehash(std::size_t newcap) {
        std::vector<std::uint64_t> ok = std::move(keys_);
        std::vector<Vec3c> ov = std::move(vals_);
        keys_.assign(newcap, 0);
        vals_.assign(newcap, Vec3c{});
        std::size_t oldcap = cap_;
        cap_ = newcap;
        count_ = 0;
        for (std::size_t i = 0; i < oldcap; ++i)
            if (ok[i]) add(ok[i], ov[i]);
    }

    std::vector<std::uint64_t> keys_;
    std::vector<Vec3c> vals_;
    std::size_t cap_ = 0;
    std::size_t count_ = 0;
};

}  // namespace poly_detail

// A polynomial in the deviation variables, coefficients in C^3, organized by
// monomial order (constant separate).
struct PolyFunction {
    Vec3c constant{};
    std::array<poly_detail::MonoMap, poly_detail::kMaxVars> ord;  // orders 1..5

    std::size_t entries() const {
        std::size_t n = 0;
        for (const auto& m : ord) n += m.size();
        return n;
    }
};

class PolyOracle {
  public:
    PolyOracle(const WavenumberGrid& grid, const SpectralField& u0,
               std::size_t max_entries = 60'000'000)
        : grid_(&grid), max_entries_(max_entries) {
        if (3 * grid.size() > poly_detail::kSlotMask)
            throw std::invalid_argument("poly oracle: grid too large (M <= 10 required)");
        if (has_support_outside(u0, Mask::F))
            throw std::invalid_argument("poly oracle: state has unresolved support");
        build_tables(u0);
    }

    // Z^0..Z^nmax at every resolved mode, as fields supported on F.
    std::vector<SpectralField> chain(int nmax) {
        if (nmax < 0) throw std::invalid_argument("poly oracle: order must be >= 0");
        std::vector<SpectralField> zs(nmax + 1, SpectralField(*grid_));
        for (std::size_t ki : grid_->f_indices()) {
            std::vector<Vec3c> vals = chain_at(ki, nmax);
            for (int n = 0; n <= nmax; ++n) zs[n].set_vec(ki, vals[n]);
        }
        return zs;
    }

    // All orders at a single output mode.
    std::vector<Vec3c> chain_at(std::size_t kidx, int nmax) {
        using namespace poly_detail;
        std::vector<Vec3c> out(nmax + 1);
        PolyFunction h = initial_stage(kidx, nmax + 1);
        out[0] = pl_constant(h);
        for (int j = 2; j <= nmax + 1; ++j) {
            h = apply_QL(h, nmax + 2 - j);
            out[j - 1] = pl_constant(h);
        }
        return out;
    }

  private:
    std::uint32_t var_id(std::size_t mode, int comp) const {
        return std::uint32_t(3 * mode + comp);
    }
    std::size_t var_mode(std::uint32_t var) const { return var / 3; }
    int var_comp(std::uint32_t var) const { return int(var % 3); }

    void build_tables(const SpectralField& u0) {
        const WavenumberGrid& g = *grid_;
        const std::size_t m3 = g.size();
        is_g_var_.assign(3 * m3, 0);
        for (std::size_t i = 0; i < m3; ++i)
            if (g.in_mask(i, Mask::G))
                for (int c = 0; c < 3; ++c) is_g_var_[var_id(i, c)] = 1;

        // R_i(u0): direct resolved-range convolution
        rconst_.assign(m3, Vec3c{});
        for (std::size_t i = 0; i < m3; ++i) {
            const Vec3i& k = g.wavevector(i);
            Vec3c acc{};
            for (std::size_t pi : g.f_indices()) {
                const Vec3i& p = g.wavevector(pi);
                std::size_t qi = g.index_of_checked({k[0] - p[0], k[1] - p[1], k[2] - p[2]});
                if (qi == WavenumberGrid::npos || !g.in_f(qi)) continue;
                acc += u0.vec_at(qi) * dot(k, u0.vec_at(pi));
            }
            rconst_[i] = leray_apply(k, acc) * (-imag_unit);
        }

        // linear part of R_i(u0 + d): entries (variable, coefficient per
        // output component b)
        rlin_.assign(m3, {});
        for (std::size_t i = 0; i < m3; ++i) {
            const Vec3i& k = g.wavevector(i);
            auto& list = rlin_[i];
            for (std::size_t fi : g.f_indices()) {
                const Vec3i& f = g.wavevector(fi);
                std::size_t ri = g.index_of_checked({k[0] - f[0], k[1] - f[1], k[2] - f[2]});
                if (ri == WavenumberGrid::npos) continue;
                // d in the first slot at mode r = k - f: -i k_c (A_k u0_f)_b
                Vec3c au = leray_apply(k, u0.vec_at(fi));
                for (int c = 0; c < 3; ++c) {
                    if (k[c] == 0) continue;
                    Vec3c coef = au * (-imag_unit * real(k[c]));
                    add_lin(list, var_id(ri, c), coef);
                }
                // d in the second slot: -i (k . u0_f) A_k e_c
                cplx ku = dot(k, u0.vec_at(fi));
                if (ku != cplx{}) {
                    for (int c = 0; c < 3; ++c) {
                        Vec3c e{};
                        e[c] = 1.0;
                        Vec3c coef = leray_apply(k, e) * (-imag_unit * ku);
                        add_lin(list, var_id(ri, c), coef);
                    }
                }
            }
        }
    }

    static void add_lin(std::vector<std::pair<std::uint32_t, Vec3c>>& list,
                        std::uint32_t var, const Vec3c& coef) {
        for (auto& e : list)
            if (e.first == var) {
                e.second += coef;
                return;
            }
        list.push_back({var, coef});
    }

    // quadratic part of R_i: iterate all ordered mode pairs p + q = i
    template <class Fn>
    void for_quad(std::size_t i, Fn&& fn) const {
        const WavenumberGrid& g = *grid_;
        const Vec3i& k = g.wavevector(i);
        for (std::size_t pi = 0; pi < g.size(); ++pi) {
            const Vec3i& p = g.wavevector(pi);
            std::size_t qi = g.index_of_checked({k[0] - p[0], k[1] - p[1], k[2] - p[2]});
            if (qi == WavenumberGrid::npos) continue;
            for (int b = 0; b < 3; ++b) {
                if (k[b] == 0) continue;
                for (int c = 0; c < 3; ++c) {
                    Vec3c e{};
                    e[c] = 1.0;
                    Vec3c coef = leray_apply(k, e) * (-imag_unit * real(k[b]));
                    fn(var_id(pi, b), var_id(qi, c), coef);
                }
            }
        }
    }

    bool has_g_var(std::uint64_t key) const {
        using namespace poly_detail;
        while (key) {
            if (is_g_var_[std::uint32_t(key & kSlotMask) - 1]) return true;
            key >>= kSlotBits;
        }
        return false;
    }

    // h1 = QL u_k truncated: the G-containing part of R_k's expansion.
    PolyFunction initial_stage(std::size_t kidx, int budget) {
        using namespace poly_detail;
        PolyFunction h;
        if (budget >= 1)
            for (const auto& [var, coef] : rlin_[kidx])
                if (is_g_var_[var]) h.ord[0].add(key_insert(0, var), coef);
        if (budget >= 2)
            for_quad(kidx, [&](std::uint32_t v1, std::uint32_t v2, const Vec3c& coef) {
                std::uint64_t key = key_insert(key_insert(0, v1), v2);
                if (has_g_var(key)) h.ord[1].add(key, coef);
            });
        return h;
    }

    // out = Q L g, truncated to `budget`.
    PolyFunction apply_QL(const PolyFunction& g, int budget) {
        using namespace poly_detail;
        PolyFunction out;
        for (int o = 1; o <= kMaxVars; ++o) {
            if (g.ord[o - 1].empty()) continue;
            const bool want_lin = o <= budget;
            const bool want_quad = o + 1 <= budget;
            if (o + 1 > kMaxVars && want_quad)
                throw std::runtime_error("poly oracle: monomial degree guard exceeded");
            g.ord[o - 1].for_each([&](std::uint64_t key, const Vec3c& coef) {
                std::uint64_t rest = key;
                std::uint32_t prev = ~0u;
                while (rest) {
                    std::uint32_t var = std::uint32_t(rest & kSlotMask) - 1;
                    rest >>= kSlotBits;
                    if (var == prev) continue;  // handled with its multiplicity
                    prev = var;
                    int mult = 1;
                    std::uint64_t r2 = rest;
                    while (r2 && std::uint32_t(r2 & kSlotMask) - 1 == var) {
                        ++mult;
                        r2 >>= kSlotBits;
                    }
                    std::uint64_t base = key_remove(key, var);
                    Vec3c cmu = coef * real(mult);
                    const std::size_t mode = var_mode(var);
                    const int comp = var_comp(var);
                    if (o >= 2) {
                        const cplx rc = rconst_[mode][comp];
                        if (rc != cplx{}) out.ord[o - 2].add(base, cmu * rc);
                    }
                    if (want_lin)
                        for (const auto& [u, c3] : rlin_[mode]) {
                            const cplx c = c3[comp];
                            if (c != cplx{}) out.ord[o - 1].add(key_insert(base, u), cmu * c);
                        }
                    if (want_quad)
                        for_quad(mode, [&](std::uint32_t v1, std::uint32_t v2, const Vec3c& c3) {
                            const cplx c = c3[comp];
                            if (c != cplx{})
                                out.ord[o].add(key_insert(key_insert(base, v1), v2), cmu * c);
                        });
                }
            });
            if (out.entries() > max_entries_)
                throw std::runtime_error("poly oracle: memory guard exceeded");
        }
        // Q: keep only monomials with at least one unresolved variable
        for (auto& m : out.ord)
            m.filter([&](std::uint64_t key) { return has_g_var(key); });
        return out;
    }

    // constant term of P L h (the final evaluation at the state).
    Vec3c pl_constant(const PolyFunction& h) const {
        using namespace poly_detail;
        Vec3c acc{};
        h.ord[0].for_each([&](std::uint64_t key, const Vec3c& coef) {
            std::uint32_t var = std::uint32_t(key & kSlotMask) - 1;
            acc += coef * rconst_[var_mode(var)][var_comp(var)];
        });
        return acc;
    }

    const WavenumberGrid* grid_;
    std::size_t max_entries_;
    std::vector<Vec3c> rconst_;
    std::vector<std::vector<std::pair<std::uint32_t, Vec3c>>> rlin_;
    std::vector<char> is_g_var_;
};

// Z^n(u0) on the resolved range by the polynomial route.
inline SpectralField poly_oracle_Z(const WavenumberGrid& grid, const SpectralField& u0, int n,
                                   std::size_t max_entries = 60'000'000) {
    PolyOracle oracle(grid, u0, max_entries);
    return oracle.chain(n).back();
}

}  // namespace mze

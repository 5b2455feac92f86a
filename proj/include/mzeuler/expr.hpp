// Symbolic operator algebra over bilinear expression trees.
//
// A tree denotes a field on the wavenumber cube:
//   Leaf(m)          : the state u restricted to mask m
//   Node(out, l, r)  : restriction to `out` of  b(l, r), where
//                      b(x,y)_k = -i sum_{p+q=k, p in out(x), q in out(y)}
//                                  (k . x_p) A_k y_q
// i.e. a child's own output mask doubles as its summation range.  Sums of
// trees carry integer coefficients.  The generator L acts by the Leibniz
// rule with L u|m = R|m; the projection P substitutes zero for every
// unresolved coordinate, which on trees is intersection of every leaf mask
// with F; Q = I - P is a formal difference.  simplify() merges structurally
// identical trees and normalizes single-slot mask differences
// (t[FG] - t[F] -> t[G] and friends), which is what turns the raw operator
// output into the compact printed form of the model terms.
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "mzeuler/core.hpp"

namespace mze {

struct ExprNode {
    Mask out;
    const ExprNode* left = nullptr;   // null for leaves
    const ExprNode* right = nullptr;
    int degree = 1;                   // number of leaves
    std::uint64_t hash = 0;

    bool is_leaf() const { return left == nullptr; }
};

using ExprPtr = const ExprNode*;

// Interning factory: structural equality becomes pointer equality.
// Returns nullptr for trees that denote the zero field (empty mask anywhere).
class ExprFactory {
  public:
    ExprPtr leaf(Mask m) {
        if (m == Mask::Empty) return nullptr;
        return intern(m, nullptr, nullptr);
    }

    ExprPtr node(Mask out, ExprPtr l, ExprPtr r) {
        if (out == Mask::Empty || !l || !r) return nullptr;
        return intern(out, l, r);
    }

    ExprPtr with_out(ExprPtr t, Mask out) {
        if (!t) return nullptr;
        if (t->out == out) return t;
        return t->is_leaf() ? leaf(out) : node(out, t->left, t->right);
    }

  private:
    ExprPtr intern(Mask out, ExprPtr l, ExprPtr r) {
        std::uint64_t h = mix64(static_cast<std::uint64_t>(out) + 0x11);
        if (l) h = mix64(h ^ l->hash);
        if (r) h = mix64(h ^ (r->hash + 0x9e37));
        auto range = table_.equal_range(h);
        for (auto it = range.first; it != range.second; ++it) {
            const ExprNode* c = it->second.get();
            if (c->out == out && c->left == l && c->right == r) return c;
        }
        auto owned = std::make_unique<ExprNode>();
        owned->out = out;
        owned->left = l;
        owned->right = r;
        owned->degree = l ? l->degree + r->degree : 1;
        owned->hash = h;
        ExprPtr p = owned.get();
        table_.emplace(h, std::move(owned));
        return p;
    }

    std::unordered_multimap<std::uint64_t, std::unique_ptr<ExprNode>> table_;
};

struct Term {
    long long coeff = 0;
    ExprPtr tree = nullptr;
};
using TermSum = std::vector<Term>;

// Total order on interned trees, used to keep sums in a canonical order.
inline int expr_cmp(ExprPtr a, ExprPtr b) {
    if (a == b) return 0;
    if (!a) return -1;
    if (!b) return 1;
    if (a->degree != b->degree) return a->degree < b->degree ? -1 : 1;
    if (a->is_leaf() != b->is_leaf()) return a->is_leaf() ? -1 : 1;
    if (a->out != b->out) return int(a->out) < int(b->out) ? -1 : 1;
    if (a->is_leaf()) return 0;
    if (int c = expr_cmp(a->left, b->left)) return c;
    return expr_cmp(a->right, b->right);
}

inline bool contains_leaf_mask(ExprPtr t, Mask m) {
    if (!t) return false;
    if (t->is_leaf()) return t->out == m;
    return contains_leaf_mask(t->left, m) || contains_leaf_mask(t->right, m);
}

// ------------------------------------------------------------------ operators

// L(leaf m) = R restricted to m = Node(m, u|FG, u|FG); on nodes, Leibniz.
inline void apply_L_tree(ExprFactory& fac, ExprPtr t, std::vector<ExprPtr>& out) {
    if (!t) return;
    if (t->is_leaf()) {
        ExprPtr ufg = fac.leaf(Mask::FG);
        out.push_back(fac.node(t->out, ufg, ufg));
        return;
    }
    std::vector<ExprPtr> sub;
    apply_L_tree(fac, t->left, sub);
    for (ExprPtr l : sub) out.push_back(fac.node(t->out, l, t->right));
    sub.clear();
    apply_L_tree(fac, t->right, sub);
    for (ExprPtr r : sub) out.push_back(fac.node(t->out, t->left, r));
}

inline TermSum apply_L(ExprFactory& fac, const TermSum& s) {
    TermSum out;
    for (const Term& t : s) {
        std::vector<ExprPtr> grown;
        apply_L_tree(fac, t.tree, grown);
        for (ExprPtr g : grown)
            if (g) out.push_back({t.coeff, g});
    }
    return out;
}

// P substitutes zero for the unresolved coordinates: every leaf mask is
// intersected with F; node masks (summation ranges) are untouched.
inline ExprPtr apply_P_tree(ExprFactory& fac, ExprPtr t) {
    if (!t) return nullptr;
    if (t->is_leaf()) return fac.leaf(t->out & Mask::F);
    ExprPtr l = apply_P_tree(fac, t->left);
    ExprPtr r = apply_P_tree(fac, t->right);
    return fac.node(t->out, l, r);
}

inline TermSum apply_P(ExprFactory& fac, const TermSum& s) {
    TermSum out;
    for (const Term& t : s)
        if (ExprPtr p = apply_P_tree(fac, t.tree)) out.push_back({t.coeff, p});
    return out;
}

// ------------------------------------------------------------------ simplify

namespace detail {

// Count mask-slot differences between two trees of identical shape; abort
// beyond one.  On a single difference, report the two masks and the degree
// of the subtree rooted at the differing slot.
inline int diff_slots(ExprPtr a, ExprPtr b, Mask& ma, Mask& mb, int& slot_degree) {
    if (a == b) return 0;
    if (a->is_leaf() != b->is_leaf()) return 2;
    int n = 0;
    if (a->out != b->out) {
        ma = a->out;
        mb = b->out;
        slot_degree = a->degree;
        n = 1;
    }
    if (!a->is_leaf()) {
        Mask xa, xb;
        int xd;
        int dl = diff_slots(a->left, b->left, xa, xb, xd);
        if (dl) {
            n += dl;
            if (n > 1) return 2;
            ma = xa; mb = xb; slot_degree = xd;
        }
        int dr = diff_slots(a->right, b->right, xa, xb, xd);
        if (dr) {
            n += dr;
            if (n > 1) return 2;
            ma = xa; mb = xb; slot_degree = xd;
        }
    } else if (n == 0) {
        return 2;  // distinct interned leaves always differ in mask
    }
    return n;
}

// Rebuild `a` with its single differing slot (relative to `b`) set to m.
inline ExprPtr merge_single(ExprFactory& fac, ExprPtr a, ExprPtr b, Mask m) {
    if (a == b) return a;
    Mask out = a->out == b->out ? a->out : m;
    if (a->is_leaf()) return fac.leaf(out);
    return fac.node(out, merge_single(fac, a->left, b->left, m),
                    merge_single(fac, a->right, b->right, m));
}

// Structural hash of `t` with the mask at `path` blanked out; two trees get
// the same value iff they are identical except possibly at that slot.
// Mirrors the factory's interning hash so no sentinel trees are built.
inline std::uint64_t hash_with_hole(ExprPtr t, const std::vector<int>& path,
                                    std::size_t depth = 0) {
    std::uint64_t h;
    if (depth == path.size()) {
        h = mix64(0xF + 0x11);  // hole marker in place of the mask
        if (!t->is_leaf()) {
            h = mix64(h ^ t->left->hash);
            h = mix64(h ^ (t->right->hash + 0x9e37));
        }
        return h;
    }
    h = mix64(static_cast<std::uint64_t>(t->out) + 0x11);
    std::uint64_t lh = path[depth] == 0 ? hash_with_hole(t->left, path, depth + 1)
                                        : t->left->hash;
    std::uint64_t rh = path[depth] == 1 ? hash_with_hole(t->right, path, depth + 1)
                                        : t->right->hash;
    h = mix64(h ^ lh);
    h = mix64(h ^ (rh + 0x9e37));
    return h;
}

inline ExprPtr replace_slot(ExprFactory& fac, ExprPtr t, const std::vector<int>& path,
                            Mask m, std::size_t depth = 0) {
    if (depth == path.size())
        return t->is_leaf() ? fac.leaf(m) : fac.node(m, t->left, t->right);
    ExprPtr l = t->left, r = t->right;
    if (path[depth] == 0)
        l = replace_slot(fac, l, path, m, depth + 1);
    else
        r = replace_slot(fac, r, path, m, depth + 1);
    return fac.node(t->out, l, r);
}

inline void collect_slot_paths(ExprPtr t, std::vector<int>& cur,
                               std::vector<std::pair<std::vector<int>, int>>& out) {
    out.push_back({cur, t->degree});
    if (t->is_leaf()) return;
    cur.push_back(0);
    collect_slot_paths(t->left, cur, out);
    cur.back() = 1;
    collect_slot_paths(t->right, cur, out);
    cur.pop_back();
}

inline Mask mask_at_path(ExprPtr t, const std::vector<int>& path) {
    for (int step : path) t = step == 0 ? t->left : t->right;
    return t->out;
}

// Split every FG slot into its F and G parts: the canonical atomic form in
// which sums cancel exactly (P keeps or kills whole atomic trees).
inline void atomize_tree(ExprFactory& fac, ExprPtr t, long long coeff, TermSum& out) {
    if (!t) return;
    if (t->out == Mask::FG) {
        atomize_tree(fac, fac.with_out(t, Mask::F), coeff, out);
        atomize_tree(fac, fac.with_out(t, Mask::G), coeff, out);
        return;
    }
    if (t->is_leaf()) {
        out.push_back({coeff, t});
        return;
    }
    TermSum ls, rs;
    atomize_tree(fac, t->left, 1, ls);
    atomize_tree(fac, t->right, 1, rs);
    for (const Term& l : ls)
        for (const Term& r : rs)
            out.push_back({coeff * l.coeff * r.coeff, fac.node(t->out, l.tree, r.tree)});
}

}  // namespace detail

// Merge identical trees, drop zeros, keep a canonical order.
inline void canonicalize(TermSum& s) {
    std::sort(s.begin(), s.end(), [](const Term& a, const Term& b) {
        int c = expr_cmp(a.tree, b.tree);
        return c < 0;
    });
    TermSum out;
    for (const Term& t : s) {
        if (!t.tree || t.coeff == 0) continue;
        if (!out.empty() && out.back().tree == t.tree)
            out.back().coeff += t.coeff;
        else
            out.push_back(t);
    }
    out.erase(std::remove_if(out.begin(), out.end(),
                             [](const Term& t) { return t.coeff == 0; }),
              out.end());
    s = std::move(out);
}

// Full normalization.  The sum is first expanded to its atomic form (every
// mask slot split into F and G parts), where structurally identical terms
// cancel exactly; the compact form is then rebuilt by greedily merging
// single-slot F/G siblings back into FG (partial coefficient units,
// higher-degree slots first).  This reproduces the papers' printed
// groupings for the low orders and is deterministic.
// Expand to atomic form and cancel exactly.
inline TermSum atomize(ExprFactory& fac, const TermSum& s) {
    TermSum atomic;
    for (const Term& t : s)
        if (t.tree && t.coeff) detail::atomize_tree(fac, t.tree, t.coeff, atomic);
    canonicalize(atomic);
    return atomic;
}

// In atomic form the projection is a filter: P keeps exactly the monomial
// trees with no unresolved leaf, Q keeps the complement.
inline TermSum atomic_project(TermSum atoms, bool keep_unresolved) {
    atoms.erase(std::remove_if(atoms.begin(), atoms.end(),
                               [&](const Term& t) {
                                   return contains_leaf_mask(t.tree, Mask::G) !=
                                          keep_unresolved;
                               }),
                atoms.end());
    return atoms;
}

// Rebuild a compact form from atomic input: bucket (term, slot) pairs by the
// tree with that slot blanked, then merge F/G siblings of equal sign into
// FG, higher-degree slots first.  Deterministic: structural hashes and
// canonical term order only.
inline TermSum reconstruct(ExprFactory& fac, TermSum atomic) {
    bool changed = true;
    while (changed) {
        changed = false;
        struct Entry {
            std::size_t term;
            std::vector<int> path;
            Mask mask;
        };
        struct Bucket {
            int deg = 0;
            std::vector<Entry> entries;
        };
        std::unordered_map<std::uint64_t, Bucket> buckets;
        for (std::size_t i = 0; i < atomic.size(); ++i) {
            std::vector<std::pair<std::vector<int>, int>> slots;
            std::vector<int> cur;
            detail::collect_slot_paths(atomic[i].tree, cur, slots);
            for (auto& [path, deg] : slots) {
                std::uint64_t h = detail::hash_with_hole(atomic[i].tree, path);
                Bucket& b = buckets[h];
                b.deg = deg;
                b.entries.push_back({i, path, detail::mask_at_path(atomic[i].tree, path)});
            }
        }
        std::vector<std::pair<std::uint64_t, const Bucket*>> order;
        order.reserve(buckets.size());
        for (auto& [h, b] : buckets)
            if (b.entries.size() >= 2) order.push_back({h, &b});
        std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
            if (a.second->deg != b.second->deg) return a.second->deg > b.second->deg;
            return a.first < b.first;
        });

        TermSum merged_terms;
        for (auto& [h, b] : order) {
            for (std::size_t x = 0; x < b->entries.size(); ++x) {
                const Entry& ef = b->entries[x];
                if (ef.mask != Mask::F || atomic[ef.term].coeff == 0) continue;
                for (std::size_t y = 0; y < b->entries.size(); ++y) {
                    const Entry& eg = b->entries[y];
                    if (eg.mask != Mask::G || atomic[eg.term].coeff == 0) continue;
                    long long cf = atomic[ef.term].coeff, cg = atomic[eg.term].coeff;
                    if ((cf > 0) != (cg > 0)) continue;
                    ExprPtr mf = detail::replace_slot(fac, atomic[ef.term].tree, ef.path, Mask::FG);
                    ExprPtr mg = detail::replace_slot(fac, atomic[eg.term].tree, eg.path, Mask::FG);
                    if (mf != mg) continue;  // hash collision, not a real pair
                    const long long m = std::min(std::llabs(cf), std::llabs(cg));
                    const long long unit = cf > 0 ? m : -m;
                    atomic[ef.term].coeff -= unit;
                    atomic[eg.term].coeff -= unit;
                    merged_terms.push_back({unit, mf});
                    changed = true;
                    if (atomic[ef.term].coeff == 0) break;
                }
            }
        }
        if (changed) {
            for (const Term& t : merged_terms) atomic.push_back(t);
            canonicalize(atomic);
        }
    }
    return atomic;
}

// Full normalization: canonical atomic cancellation plus compact rebuild.
inline TermSum simplify(ExprFactory& fac, TermSum s) {
    return reconstruct(fac, atomize(fac, s));
}

inline TermSum apply_Q(ExprFactory& fac, const TermSum& s) {
    TermSum out = s;
    for (const Term& t : apply_P(fac, s)) out.push_back({-t.coeff, t.tree});
    return simplify(fac, std::move(out));
}

namespace detail {

// Count positions where both trees carry FG vs F; used by the two-slot
// ledger rewrite below.
inline int diff_slots_fg_f(ExprPtr a, ExprPtr b, int max_allowed) {
    if (a == b) return 0;
    if (a->is_leaf() != b->is_leaf()) return max_allowed + 1;
    int n = 0;
    if (a->out != b->out) {
        if (!(a->out == Mask::FG && b->out == Mask::F)) return max_allowed + 1;
        n = 1;
    }
    if (!a->is_leaf()) {
        n += diff_slots_fg_f(a->left, b->left, max_allowed);
        if (n > max_allowed) return n;
        n += diff_slots_fg_f(a->right, b->right, max_allowed);
    } else if (n == 0) {
        return max_allowed + 1;
    }
    return n;
}

// For a pair differing in exactly two FG-vs-F slots, build the two trees of
//   X_FG (x) Y_FG - X_F (x) Y_F = X_FG (x) Y_G + X_G (x) Y_F
// `which` selects the first or second product (slots numbered in DFS order).
inline ExprPtr split_two_slot(ExprFactory& fac, ExprPtr a, ExprPtr b, int which,
                              int& seen) {
    if (a == b) return a;
    Mask out = a->out;
    if (a->out != b->out) {
        const int slot = seen++;
        if (which == 0)
            out = slot == 0 ? Mask::FG : Mask::G;
        else
            out = slot == 0 ? Mask::G : Mask::F;
    }
    if (a->is_leaf()) return fac.leaf(out);
    ExprPtr l = split_two_slot(fac, a->left, b->left, which, seen);
    ExprPtr r = split_two_slot(fac, a->right, b->right, which, seen);
    return fac.node(out, l, r);
}

}  // namespace detail

// "Ledger" normalization: preserves the hand-derivation presentation in
// which the term types are distinguishable.  Applies the single-slot rules
// by partial coefficient units plus the two-slot split rewrite; no atomic
// expansion, so difference pairs h - Ph survive as separate trees.  Trees in
// `keep` (the previous-order term, whose negation is the "-Ph" bookkeeping
// entry) are never consumed by a rewrite.
inline TermSum simplify_ledger(ExprFactory& fac, TermSum s,
                               const std::vector<ExprPtr>& keep = {}) {
    auto kept = [&](ExprPtr t) {
        for (ExprPtr k : keep)
            if (k == t) return true;
        return false;
    };
    canonicalize(s);
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < s.size() && !changed; ++i)
            for (std::size_t j = i + 1; j < s.size() && !changed; ++j) {
                if (kept(s[i].tree) || kept(s[j].tree)) continue;
                if (s[i].tree->degree != s[j].tree->degree) continue;
                Mask mi, mj;
                int deg;
                if (detail::diff_slots(s[i].tree, s[j].tree, mi, mj, deg) != 1) continue;
                const long long ci = s[i].coeff, cj = s[j].coeff;
                auto pair_is = [&](Mask x, Mask y) {
                    return (mi == x && mj == y) || (mi == y && mj == x);
                };
                Mask merged = Mask::Empty;
                if (pair_is(Mask::FG, Mask::F) && (ci > 0) != (cj > 0))
                    merged = Mask::G;
                else if (pair_is(Mask::FG, Mask::G) && (ci > 0) != (cj > 0))
                    merged = Mask::F;
                else if (pair_is(Mask::F, Mask::G) && (ci > 0) == (cj > 0))
                    merged = Mask::FG;
                else
                    continue;
                const long long m = std::min(std::llabs(ci), std::llabs(cj));
                long long c;
                if (merged == Mask::FG)
                    c = ci > 0 ? m : -m;
                else
                    c = (mi == Mask::FG ? ci : cj) > 0 ? m : -m;
                ExprPtr t = detail::merge_single(fac, s[i].tree, s[j].tree, merged);
                s[i].coeff -= ci > 0 ? m : -m;
                s[j].coeff -= cj > 0 ? m : -m;
                s.push_back({c, t});
                canonicalize(s);
                changed = true;
            }
        if (changed) continue;
        // two-slot rewrite, fired only once no single-slot rule applies
        for (std::size_t i = 0; i < s.size() && !changed; ++i)
            for (std::size_t j = 0; j < s.size() && !changed; ++j) {
                if (i == j || s[i].tree->degree != s[j].tree->degree) continue;
                if (kept(s[i].tree) || kept(s[j].tree)) continue;
                if (!((s[i].coeff > 0) != (s[j].coeff > 0))) continue;
                if (detail::diff_slots_fg_f(s[i].tree, s[j].tree, 2) != 2) continue;
                const long long m = std::min(std::llabs(s[i].coeff), std::llabs(s[j].coeff));
                const long long c = s[i].coeff > 0 ? m : -m;
                int seen = 0;
                ExprPtr t0 = detail::split_two_slot(fac, s[i].tree, s[j].tree, 0, seen);
                seen = 0;
                ExprPtr t1 = detail::split_two_slot(fac, s[i].tree, s[j].tree, 1, seen);
                s[i].coeff -= c;
                s[j].coeff += c;
                s.push_back({c, t0});
                s.push_back({c, t1});
                canonicalize(s);
                changed = true;
            }
    }
    return s;
}

}  // namespace mze

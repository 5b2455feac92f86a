// Generation of the order-n model terms Z^n = P L (QL)^n Q L u by direct
// operator application on expression trees, classification of the
// pre-projection stages into the three bookkeeping types, and factorization
// of the flat tree sums into bilinear sums over named intermediates
// (u, Rhat, B, Z0, Z1, ...) for display and counting.
#pragma once

#include <optional>
#include <sstream>

#include "mzeuler/expr.hpp"

namespace mze {

enum class TermType { I, II, III };

struct ClassifiedTerm {
    Term term;
    TermType type;
};

// One bilinear sum over named operands: coeff * b(left|ml, right|mr).
struct FactoredTerm {
    long long coeff;
    std::string left;
    Mask ml;
    std::string right;
    Mask mr;
};

struct FactoredSum {
    std::vector<FactoredTerm> terms;
    // term count with multiplicity: the printed form of the papers' sums
    long long weighted_count() const {
        long long n = 0;
        for (const auto& t : terms) n += t.coeff < 0 ? -t.coeff : t.coeff;
        return n;
    }
};

class TermCompiler {
  public:
    explicit TermCompiler(int max_order = 6) : max_order_(max_order) {}

    ExprFactory& factory() { return fac_; }
    int max_order() const { return max_order_; }

    // (QL)^n QL u in atomic form (the internal chain representation).
    const TermSum& stage_atoms(int n) {
        guard(n);
        for (int j = atom_stages_.size(); j <= n; ++j) {
            TermSum prev = j == 0 ? TermSum{{1, fac_.leaf(Mask::FG)}} : atom_stages_[j - 1];
            atom_stages_.push_back(
                atomic_project(atomize(fac_, apply_L(fac_, prev)), true));
        }
        return atom_stages_[n];
    }

    // (QL)^n QL u, simplified compact form.
    const TermSum& stage_trees(int n) {
        guard(n);
        for (int j = stages_.size(); j <= n; ++j)
            stages_.push_back(reconstruct(fac_, stage_atoms(j)));
        return stages_[n];
    }

    // Same stages in the hand-derivation ("ledger") presentation, where the
    // h - Ph difference pairs survive as separate trees and the three term
    // types are distinguishable.
    const TermSum& stage_ledger(int n) {
        guard(n);
        for (int j = ledger_stages_.size(); j <= n; ++j) {
            TermSum prev =
                j == 0 ? TermSum{{1, fac_.leaf(Mask::FG)}} : ledger_stages_[j - 1];
            TermSum grown = apply_L(fac_, prev);
            TermSum q = grown;
            std::vector<ExprPtr> keep;
            if (j == 0) {
                for (const Term& t : apply_P(fac_, grown)) q.push_back({-t.coeff, t.tree});
            } else {
                // subtract the previous-order term in its printed form; those
                // trees are the -Ph bookkeeping entries and stay intact
                for (const Term& t : z_ledger(j - 1)) {
                    q.push_back({-t.coeff, t.tree});
                    keep.push_back(t.tree);
                }
            }
            ledger_stages_.push_back(simplify_ledger(fac_, std::move(q), keep));
        }
        return ledger_stages_[n];
    }

    const TermSum& z_ledger(int n) {
        guard(n);
        for (int j = z_ledger_.size(); j <= n; ++j)
            z_ledger_.push_back(
                simplify_ledger(fac_, apply_P(fac_, apply_L(fac_, stage_ledger(j)))));
        return z_ledger_[n];
    }

    // Z^n = P L (QL)^n Q L u, simplified; every tree has degree n+3.
    const TermSum& z_trees(int n) {
        guard(n);
        for (int j = zs_.size(); j <= n; ++j) {
            TermSum zn = reconstruct(
                fac_, atomic_project(atomize(fac_, apply_L(fac_, stage_atoms(j))), false));
            for (const Term& t : zn)
                if (t.tree->degree != j + 3)
                    throw std::logic_error("generate_Z: tree degree != n+3");
            zs_.push_back(std::move(zn));
        }
        return zs_[n];
    }

    // Classify the trees of QL(QL)^{n-1}QLu against Z^{n-1}:
    //   type i   - killed from Z^{n-1} by the special projection property
    //              (a leaf restricted to G),
    //   type iii - pairs h - Ph: either an all-resolved tree (a -Ph) or a
    //              tree whose projection survives into Z^{n-1},
    //   type ii  - projection nonzero but annihilated inside Z^{n-1} by
    //              PQ = 0.
    std::vector<ClassifiedTerm> classify_terms(int n) {
        if (n < 1) throw std::invalid_argument("classify_terms: n >= 1");
        const TermSum& input = stage_ledger(n);
        const TermSum& zprev = z_ledger(n - 1);
        std::vector<ClassifiedTerm> out;
        for (const Term& t : input) {
            TermType ty;
            if (contains_leaf_mask(t.tree, Mask::G)) {
                ty = TermType::I;
            } else {
                ExprPtr p = apply_P_tree(fac_, t.tree);
                if (!p) throw std::logic_error("classify_terms: unclassifiable tree");
                if (p == t.tree) {
                    ty = TermType::III;  // already resolved: a -Ph partner
                } else {
                    bool in_prev = false;
                    for (const Term& z : zprev)
                        if (fac_.with_out(z.tree, Mask::FG) == fac_.with_out(p, Mask::FG)) {
                            in_prev = true;
                            break;
                        }
                    ty = in_prev ? TermType::III : TermType::II;
                }
            }
            out.push_back({t, ty});
        }
        return out;
    }

    // Factor the flat Z^n sum into bilinear sums over named operands.
    FactoredSum factor_z(int n) {
        const TermSum& zn = z_trees(n);
        build_names(n);
        FactoredSum fs;

        // Work on a mutable pool of (coeff, tree).
        TermSum pool = zn;
        while (!pool.empty()) {
            ExprPtr t = pool.front().tree;
            if (t->is_leaf()) throw std::logic_error("factor_z: bare leaf at top level");
            // Prefer recognizing a multi-tree name in whichever slot needs it;
            // a slot holding a registered single tree is matched directly.
            std::optional<std::string> ln = single_name(t->left);
            std::optional<std::string> rn = single_name(t->right);
            if (ln && rn) {
                fs.terms.push_back({pool.front().coeff, *ln, t->left->out, *rn, t->right->out});
                pool.erase(pool.begin());
                continue;
            }
            bool done = false;
            if (rn && !ln) done = extract_group(pool, fs, /*left_hole=*/true, t, *rn);
            else if (ln && !rn) done = extract_group(pool, fs, /*left_hole=*/false, t, *ln);
            if (!done) {
                // fall back to an automatically named operand
                if (!ln) ln = auto_name(t->left);
                if (!rn) rn = auto_name(t->right);
                fs.terms.push_back({pool.front().coeff, *ln, t->left->out, *rn, t->right->out});
                pool.erase(pool.begin());
            }
        }
        std::sort(fs.terms.begin(), fs.terms.end(), [](const FactoredTerm& a, const FactoredTerm& b) {
            if (a.left != b.left) return a.left < b.left;
            if (b.right != a.right) return a.right < b.right;
            if (a.ml != b.ml) return int(a.ml) < int(b.ml);
            return int(a.mr) < int(b.mr);
        });
        return fs;
    }

    // Named operands registered so far (definitions for printing).
    const std::vector<std::pair<std::string, TermSum>>& names() const { return names_; }

    std::string describe(ExprPtr t) {
        if (auto n = single_name(t)) return *n + "|" + mask_name(t->out);
        if (t->is_leaf()) return std::string("u|") + mask_name(t->out);
        std::string s = "b[" + describe(t->left) + ", " + describe(t->right) + "]";
        return s + "|" + mask_name(t->out);
    }

  private:
    void guard(int n) const {
        if (n < 0) throw std::invalid_argument("order must be >= 0");
        if (n > max_order_)
            throw std::invalid_argument("order exceeds the configured bound (term count grows rapidly)");
    }

    void build_names(int n) {
        if (!names_.empty()) names_.clear();
        ExprPtr u = fac_.leaf(Mask::FG);
        ExprPtr rhat = fac_.node(Mask::FG, fac_.leaf(Mask::F), fac_.leaf(Mask::F));
        ExprPtr b = fac_.node(Mask::FG, fac_.with_out(rhat, Mask::F), fac_.leaf(Mask::F));
        names_.push_back({"u", {{1, u}}});
        names_.push_back({"Rhat", {{1, rhat}}});
        names_.push_back({"B", {{1, b}}});
        for (int j = 0; j < n; ++j) {
            TermSum zj = z_trees(j);
            for (Term& t : zj) t.tree = fac_.with_out(t.tree, Mask::FG);
            names_.push_back({"Z" + std::to_string(j), std::move(zj)});
        }
        auto_count_ = 0;
    }

    std::optional<std::string> single_name(ExprPtr t) {
        ExprPtr c = fac_.with_out(t, Mask::FG);
        for (const auto& [name, trees] : names_)
            if (trees.size() == 1 && trees.front().coeff == 1 && trees.front().tree == c)
                return name;
        return std::nullopt;
    }

    std::string auto_name(ExprPtr t) {
        if (auto n = single_name(t)) return *n;
        std::string name = "T" + std::to_string(++auto_count_);
        names_.push_back({name, {{1, fac_.with_out(t, Mask::FG)}}});
        return name;
    }

    // Try to recognize, in the hole slot of `t`, a registered multi-tree name
    // whose component trees all appear in the pool alongside the same fixed
    // other slot.  On success emit one factored term and consume the pool
    // entries.
    bool extract_group(TermSum& pool, FactoredSum& fs, bool left_hole, ExprPtr t,
                       const std::string& fixed_name) {
        ExprPtr fixed = left_hole ? t->right : t->left;
        Mask hole_mask = (left_hole ? t->left : t->right)->out;
        // candidate names, largest degree first
        for (auto it = names_.rbegin(); it != names_.rend(); ++it) {
            const auto& [name, trees] = *it;
            if (trees.size() < 2) continue;
            // the current tree's hole content must belong to the candidate
            ExprPtr hole = left_hole ? t->left : t->right;
            bool contains = false;
            for (const Term& nt : trees)
                if (fac_.with_out(nt.tree, Mask::FG) == fac_.with_out(hole, Mask::FG)) contains = true;
            if (!contains) continue;
            // find the extraction multiplicity
            long long lambda = 0;
            bool feasible = true;
            std::vector<std::size_t> where(trees.size());
            for (std::size_t i = 0; i < trees.size() && feasible; ++i) {
                ExprPtr want_hole = fac_.with_out(trees[i].tree, hole_mask);
                ExprPtr want = left_hole ? fac_.node(t->out, want_hole, fixed)
                                         : fac_.node(t->out, fixed, want_hole);
                feasible = false;
                for (std::size_t p = 0; p < pool.size(); ++p)
                    if (pool[p].tree == want && pool[p].coeff % trees[i].coeff == 0 &&
                        pool[p].coeff / trees[i].coeff > 0) {
                        long long lam = pool[p].coeff / trees[i].coeff;
                        lambda = lambda == 0 ? lam : std::min(lambda, lam);
                        where[i] = p;
                        feasible = true;
                        break;
                    }
            }
            if (!feasible || lambda <= 0) continue;
            for (std::size_t i = 0; i < trees.size(); ++i)
                pool[where[i]].coeff -= lambda * trees[i].coeff;
            pool.erase(std::remove_if(pool.begin(), pool.end(),
                                      [](const Term& x) { return x.coeff == 0; }),
                       pool.end());
            if (left_hole)
                fs.terms.push_back({lambda, name, hole_mask, fixed_name, fixed->out});
            else
                fs.terms.push_back({lambda, fixed_name, fixed->out, name, hole_mask});
            return true;
        }
        return false;
    }

    ExprFactory fac_;
    int max_order_;
    std::vector<TermSum> atom_stages_;
    std::vector<TermSum> stages_;
    std::vector<TermSum> zs_;
    std::vector<TermSum> ledger_stages_;
    std::vector<TermSum> z_ledger_;
    std::vector<std::pair<std::string, TermSum>> names_;
    int auto_count_ = 0;
};

}  // namespace mze

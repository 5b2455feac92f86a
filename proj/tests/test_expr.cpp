#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "mzeuler/plan.hpp"
#include "mzeuler/testing.hpp"

using namespace mze;

namespace {

TermSum random_sum(ExprFactory& fac, std::mt19937_64& rng, int max_terms = 6) {
    auto rmask = [&]() {
        switch (rng() % 3) {
            case 0: return Mask::F;
            case 1: return Mask::G;
            default: return Mask::FG;
        }
    };
    std::function<ExprPtr(int)> rtree = [&](int depth) -> ExprPtr {
        if (depth <= 0 || rng() % 2 == 0) return fac.leaf(rmask());
        return fac.node(rmask(), rtree(depth - 1), rtree(depth - 1));
    };
    TermSum s;
    int n = 1 + int(rng() % max_terms);
    for (int i = 0; i < n; ++i)
        s.push_back({(long long)(rng() % 5) - 2, rtree(int(rng() % 3))});
    return s;
}

}  // namespace

TEST_CASE("L acts as a derivation and raises every degree by one") {
    ExprFactory fac;
    // L u|FG is the single tree for R
    TermSum u{{1, fac.leaf(Mask::FG)}};
    TermSum lu = apply_L(fac, u);
    REQUIRE(lu.size() == 1);
    CHECK(lu[0].tree->degree == 2);
    CHECK(lu[0].tree->out == Mask::FG);
    CHECK(lu[0].tree->left == fac.leaf(Mask::FG));
    CHECK(lu[0].tree->right == fac.leaf(Mask::FG));

    // L applied to the Z0 tree sum gives 6 trees before simplification
    TermCompiler tc;
    TermSum z0 = tc.z_trees(0);
    REQUIRE(z0.size() == 2);
    TermSum lz0 = apply_L(tc.factory(), z0);
    CHECK(lz0.size() == 6);
    for (const Term& t : lz0) CHECK(t.tree->degree == 4);
}

TEST_CASE("P is the resolved-range substitution homomorphism") {
    ExprFactory fac;
    CHECK(apply_P_tree(fac, fac.leaf(Mask::G)) == nullptr);
    CHECK(apply_P_tree(fac, fac.leaf(Mask::FG)) == fac.leaf(Mask::F));

    // P of the R tree is the Rhat tree over F x F (node range untouched)
    ExprPtr r = fac.node(Mask::FG, fac.leaf(Mask::FG), fac.leaf(Mask::FG));
    ExprPtr pr = apply_P_tree(fac, r);
    CHECK(pr == fac.node(Mask::FG, fac.leaf(Mask::F), fac.leaf(Mask::F)));

    // idempotence on random sums
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        TermSum s = random_sum(fac, rng);
        TermSum p1 = apply_P(fac, s);
        TermSum p2 = apply_P(fac, p1);
        canonicalize(p1);
        canonicalize(p2);
        REQUIRE(p1.size() == p2.size());
        for (std::size_t i = 0; i < p1.size(); ++i) {
            CHECK(p1[i].tree == p2[i].tree);
            CHECK(p1[i].coeff == p2[i].coeff);
        }
    }
}

TEST_CASE("Q complements P: Q u|F = 0, Q u|FG = u|G, PQ = 0") {
    ExprFactory fac;
    TermSum qf = apply_Q(fac, {{1, fac.leaf(Mask::F)}});
    CHECK(qf.empty());

    TermSum qfg = apply_Q(fac, {{1, fac.leaf(Mask::FG)}});
    REQUIRE(qfg.size() == 1);
    CHECK(qfg[0].tree == fac.leaf(Mask::G));
    CHECK(qfg[0].coeff == 1);

    std::mt19937_64 rng(123);
    for (int trial = 0; trial < 20; ++trial) {
        TermSum s = random_sum(fac, rng);
        TermSum pq = simplify(fac, apply_P(fac, apply_Q(fac, s)));
        CHECK(pq.empty());
    }
}

TEST_CASE("simplify removes empty trees, merges duplicates, and is idempotent") {
    ExprFactory fac;
    CHECK(fac.leaf(Mask::Empty) == nullptr);
    CHECK(fac.node(Mask::F, fac.leaf(Mask::Empty), fac.leaf(Mask::F)) == nullptr);

    ExprPtr t = fac.node(Mask::FG, fac.leaf(Mask::F), fac.leaf(Mask::G));
    TermSum dup = simplify(fac, {{1, t}, {1, t}});
    REQUIRE(dup.size() == 1);
    CHECK(dup[0].coeff == 2);

    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        TermSum s = simplify(fac, random_sum(fac, rng));
        TermSum s2 = simplify(fac, s);
        REQUIRE(s.size() == s2.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            CHECK(s[i].tree == s2[i].tree);
            CHECK(s[i].coeff == s2[i].coeff);
        }
    }
}

TEST_CASE("single-slot mask differences are normalized") {
    ExprFactory fac;
    ExprPtr u = fac.leaf(Mask::F);
    auto tree = [&](Mask inner) { return fac.node(Mask::FG, fac.node(inner, u, u), u); };
    // t[FG] - t[F] -> t[G]
    TermSum s = simplify(fac, {{1, tree(Mask::FG)}, {-1, tree(Mask::F)}});
    REQUIRE(s.size() == 1);
    CHECK(s[0].tree == tree(Mask::G));
    CHECK(s[0].coeff == 1);
    // t[F] + t[G] -> t[FG]
    s = simplify(fac, {{2, tree(Mask::F)}, {2, tree(Mask::G)}});
    REQUIRE(s.size() == 1);
    CHECK(s[0].tree == tree(Mask::FG));
    CHECK(s[0].coeff == 2);
}

TEST_CASE("generated Z0, Z1, Z2 have the printed sum counts and degrees") {
    TermCompiler tc;

    FactoredSum f0 = tc.factor_z(0);
    CHECK(f0.weighted_count() == 2);
    for (const Term& t : tc.z_trees(0)) CHECK(t.tree->degree == 3);

    FactoredSum f1 = tc.factor_z(1);
    CHECK(f1.weighted_count() == 4);
    for (const Term& t : tc.z_trees(1)) CHECK(t.tree->degree == 4);

    FactoredSum f2 = tc.factor_z(2);
    CHECK(f2.weighted_count() == 12);
    for (const Term& t : tc.z_trees(2)) CHECK(t.tree->degree == 5);

    // Z0's two sums carry the (G,F) and (F,G) mask pairs
    REQUIRE(f0.terms.size() == 2);
    CHECK(f0.terms[0].left == "Rhat");
    CHECK(f0.terms[0].ml == Mask::G);
    CHECK(f0.terms[0].right == "u");
    CHECK(f0.terms[0].mr == Mask::F);
    CHECK(f0.terms[1].left == "u");
    CHECK(f0.terms[1].mr == Mask::G);

    // Z1: two Rhat x Rhat sums over (FG,G)/(G,FG) plus the Z0 x u pair
    REQUIRE(f1.terms.size() == 4);
    long long rr = 0, zu = 0;
    for (const auto& t : f1.terms) {
        if (t.left == "Rhat" && t.right == "Rhat") {
            ++rr;
            CHECK(((t.ml == Mask::FG && t.mr == Mask::G) ||
                   (t.ml == Mask::G && t.mr == Mask::FG)));
        }
        if ((t.left == "Z0" && t.right == "u") || (t.left == "u" && t.right == "Z0")) ++zu;
    }
    CHECK(rr == 2);
    CHECK(zu == 2);

    // Z2 factors into twelve unit-coefficient sums whose operands are u,
    // Rhat, Z0, Z1 and the two Leibniz halves of PL R (auto-named)
    CHECK(f2.terms.size() == 12);
    std::set<std::string> ops;
    for (const auto& t : f2.terms) {
        CHECK(t.coeff == 1);
        ops.insert(t.left);
        ops.insert(t.right);
    }
    CHECK(ops.count("u") == 1);
    CHECK(ops.count("Rhat") == 1);
    CHECK(ops.count("Z0") == 1);
    CHECK(ops.count("Z1") == 1);
}

TEST_CASE("the compiler enforces its resource bound") {
    TermCompiler tc(2);
    CHECK_THROWS_AS(tc.z_trees(3), std::invalid_argument);
    CHECK_THROWS_AS(tc.z_trees(-1), std::invalid_argument);
}

TEST_CASE("classification covers every tree and matches the worked examples") {
    TermCompiler tc;
    auto cls = tc.classify_terms(2);
    REQUIRE(!cls.empty());

    int n_i = 0, n_ii = 0, n_iii = 0;
    bool found_qlu_r = false;
    ExprFactory& fac = tc.factory();
    ExprPtr u_fg = fac.leaf(Mask::FG);
    ExprPtr u_f = fac.leaf(Mask::F);
    // the 2+2 "QLu x R" family of the second-order derivation: the pair of
    // trees b[R|G, R|F] and -b[Rhat|G, R|F]
    ExprPtr r_g = fac.node(Mask::G, u_fg, u_fg);
    ExprPtr r_f = fac.node(Mask::F, u_fg, u_fg);
    ExprPtr rhat_g = fac.node(Mask::G, u_f, u_f);
    ExprPtr qlu_r_a = fac.node(Mask::FG, r_g, r_f);
    ExprPtr qlu_r_b = fac.node(Mask::FG, rhat_g, r_f);
    for (const auto& c : cls) {
        switch (c.type) {
            case TermType::I: ++n_i; CHECK(contains_leaf_mask(c.term.tree, Mask::G)); break;
            case TermType::II: ++n_ii; break;
            case TermType::III: ++n_iii; break;
        }
        if (c.term.tree == qlu_r_a || c.term.tree == qlu_r_b) {
            found_qlu_r = true;
            CHECK(c.type == TermType::II);
        }
    }
    CHECK(n_i > 0);
    CHECK(n_ii > 0);
    CHECK(n_iii > 0);
    CHECK(found_qlu_r);

    // every tree of -Z1 (ledger presentation) shows up as a type iii partner
    for (const Term& z : tc.z_ledger(1)) {
        bool found = false;
        for (const auto& c : cls)
            if (tc.factory().with_out(c.term.tree, Mask::FG) ==
                tc.factory().with_out(z.tree, Mask::FG)) {
                found = true;
                CHECK(c.type == TermType::III);
            }
        CHECK(found);
    }
}

TEST_CASE("compiled plans reproduce the hand-coded evaluators") {
    WavenumberGrid g(4, 8);
    TermEvaluator ev(g);
    TermCompiler tc;
    SpectralField uh = testing::random_field(g, Mask::F, 2024, 0.7);

    EvaluationPlan p0 = compile_plan(tc, 0);
    SpectralField z0 = ev.z0(uh).field;
    restrict_to_mask(z0, Mask::F);
    CHECK(rel_error(execute_plan(p0, ev.conv(), uh).field, z0) < 1e-13);

    EvaluationPlan p1 = compile_plan(tc, 1);
    SpectralField z1 = ev.z1(uh).field;
    restrict_to_mask(z1, Mask::F);
    CHECK(rel_error(execute_plan(p1, ev.conv(), uh).field, z1) < 1e-13);

    EvaluationPlan p2 = compile_plan(tc, 2);
    SpectralField z2 = ev.z2(uh).field;
    CHECK(rel_error(execute_plan(p2, ev.conv(), uh).field, z2) < 1e-13);
}

TEST_CASE("plan text uses the line format and shares intermediates") {
    TermCompiler tc;
    EvaluationPlan p1 = compile_plan(tc, 1);
    std::string text = p1.to_text();
    CHECK(text.find("t1 = BILIN(1, u, F, u, F, FG)") != std::string::npos);
    CHECK(text.find("z1 = SUM(") != std::string::npos);

    // Rhat appears as one step even though Z1 references it at three masks
    int rhat_steps = 0;
    for (const PlanStep& s : p1.steps)
        if (s.left == "u" && s.right == "u") ++rhat_steps;
    CHECK(rhat_steps == 1);
}

TEST_CASE("plan execution validates its input") {
    WavenumberGrid g(4, 8);
    TermEvaluator ev(g);
    TermCompiler tc;
    EvaluationPlan p0 = compile_plan(tc, 0);
    SpectralField bad = testing::random_field(g, Mask::FG, 5);
    CHECK_THROWS_AS(execute_plan(p0, ev.conv(), bad), std::invalid_argument);
}

// Executable form of a compiled term: an ordered list of masked bilinear
// steps over named intermediates, deduplicated by tree identity so shared
// subterms (Rhat, the Z0 components, ...) are evaluated once.  The textual
// format is one step per line:
//
//     name = BILIN(coeff, left, maskL, right, maskR, maskOut)
//     name = SUM(c1*a, c2*b, ...)
//
// with "u" the plan input.
#pragma once

#include <functional>
#include <map>
#include <sstream>

#include "mzeuler/compiler.hpp"
#include "mzeuler/terms.hpp"

namespace mze {

struct PlanStep {
    std::string name;
    long long coeff = 1;
    std::string left, right;
    Mask ml = Mask::Empty, mr = Mask::Empty, mout = Mask::FG;
};

struct PlanSumEntry {
    long long coeff;
    std::string name;
};

struct EvaluationPlan {
    std::string output_name;
    std::vector<PlanStep> steps;          // topological order
    std::vector<PlanSumEntry> output;     // final weighted sum
    Mask output_mask = Mask::F;

    std::string to_text() const {
        std::ostringstream os;
        for (const PlanStep& s : steps)
            os << s.name << " = BILIN(" << s.coeff << ", " << s.left << ", "
               << mask_name(s.ml) << ", " << s.right << ", " << mask_name(s.mr)
               << ", " << mask_name(s.mout) << ")\n";
        os << output_name << " = SUM(";
        for (std::size_t i = 0; i < output.size(); ++i) {
            if (i) os << ", ";
            if (output[i].coeff != 1) os << output[i].coeff << "*";
            os << output[i].name;
        }
        os << ")\n";
        return os.str();
    }
};

// Compile the flat tree sum of Z^n into a plan.  Intermediates are computed
// on the full cube (their consumers apply the masks), deduplicated by the
// tree with its top restriction stripped.
inline EvaluationPlan compile_plan(TermCompiler& tc, int n) {
    const TermSum& zn = tc.z_trees(n);
    ExprFactory& fac = tc.factory();
    EvaluationPlan plan;
    plan.output_name = "z" + std::to_string(n);
    plan.output_mask = Mask::F;

    std::map<ExprPtr, std::string> named;
    named[fac.leaf(Mask::FG)] = "u";
    int counter = 0;

    // bottom-up emission
    std::function<std::string(ExprPtr)> emit = [&](ExprPtr t) -> std::string {
        ExprPtr key = fac.with_out(t, Mask::FG);
        auto it = named.find(key);
        if (it != named.end()) return it->second;
        if (t->is_leaf()) return named[key] = "u";  // leaves are always the input
        std::string l = emit(t->left);
        std::string r = emit(t->right);
        std::string name = "t" + std::to_string(++counter);
        plan.steps.push_back({name, 1, l, r, t->left->out, t->right->out, Mask::FG});
        named[key] = name;
        return name;
    };

    for (const Term& t : zn)
        plan.output.push_back({t.coeff, emit(t.tree)});
    return plan;
}

// Run a plan through the convolution engine.  The input must be supported on
// the resolved range; the output is restricted to the plan's output mask.
inline TermOutput execute_plan(const EvaluationPlan& plan, ConvolutionEngine& conv,
                               const SpectralField& uh) {
    const WavenumberGrid& grid = conv.grid();
    if (&uh.grid() != &grid)
        throw std::invalid_argument("execute_plan: field/engine grid mismatch");
    if (has_support_outside(uh, Mask::F))
        throw std::invalid_argument("execute_plan: input has unresolved support");

    std::map<std::string, SpectralField> fields;
    fields.emplace("u", uh);
    for (const PlanStep& s : plan.steps) {
        auto li = fields.find(s.left);
        auto ri = fields.find(s.right);
        if (li == fields.end() || ri == fields.end())
            throw std::invalid_argument("execute_plan: step references unknown name " +
                                        s.left + "/" + s.right);
        SpectralField val(grid);
        conv.accumulate(val, real(s.coeff), li->second, s.ml, ri->second, s.mr, s.mout);
        fields.emplace(s.name, std::move(val));
    }
    SpectralField out(grid);
    for (const PlanSumEntry& e : plan.output) {
        auto it = fields.find(e.name);
        if (it == fields.end())
            throw std::invalid_argument("execute_plan: sum references unknown name " + e.name);
        axpy(out, real(e.coeff), it->second);
    }
    restrict_to_mask(out, plan.output_mask);
    return {std::move(out), plan.output_mask};
}

}  // namespace mze

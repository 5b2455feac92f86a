// Hand-coded evaluators for the model terms.  With b(x|mx, y|my) the masked
// bilinear kernel and Rhat = b(u|F, u|F):
//
//   R   = b(u|FG, u|FG)                                    (full right-hand side)
//   Z0  = b(Rhat|G, u|F) + b(u|F, Rhat|G)
//   B   = b(Rhat|F, u|F),   B' = b(u|F, Rhat|F)
//   Z1  = b(Rhat|FG, Rhat|G) + b(Rhat|G, Rhat|FG)
//       + b(Z0|G, u|F)      + b(u|F, Z0|G)
//   Z2  = the (Z0|FG, Rhat|G) pair twice, plus the (B|FG, Rhat|G),
//         (B'|FG, Rhat|G), (Z0|G, Rhat|F), (Z0|G, Rhat|FG) and (Z1|G, u|F)
//         pairs.
//
// Note on Z2: the commonly printed form keeps only B where the operator
// identity PL R = Z0 + B + B' holds, dropping the mirrored F x F sum B'.
// The recursive derivation (and the exact polynomial route) produce B',
// so it is included here; the term-compiler output cross-checks this.
//
// Rhat, Z0, B and Z1 are computed on the whole cube because the next-order
// term consumes them at unresolved wavenumbers; Z2 is only ever needed on F.
// Intermediates are computed once per evaluation and shared across sums.
#pragma once

#include "mzeuler/convolution.hpp"

namespace mze {

struct TermOutput {
    SpectralField field;
    Mask support = Mask::Empty;
};

// The u-dependent intermediates shared by one right-hand-side evaluation.
struct TermChain {
    int order = 0;  // highest Z_n present
    SpectralField rhat;
    SpectralField z0;
    SpectralField b;
    SpectralField bprime;
    SpectralField z1;
    SpectralField z2;

    const SpectralField& z(int n) const {
        switch (n) {
            case 0: return z0;
            case 1: return z1;
            case 2: return z2;
        }
        throw std::out_of_range("TermChain holds Z0..Z2 only");
    }
};

class TermEvaluator {
  public:
    explicit TermEvaluator(const WavenumberGrid& grid, int threads = 1)
        : grid_(&grid), conv_(grid, threads) {}

    const WavenumberGrid& grid() const { return *grid_; }
    ConvolutionEngine& conv() { return conv_; }

    TermOutput rhs_full(const SpectralField& u) {
        return {conv_.bilinear(u, Mask::FG, u, Mask::FG, Mask::FG), Mask::FG};
    }

    TermOutput rhs_resolved(const SpectralField& uh) {
        require_resolved(uh, "rhs_resolved");
        return {conv_.bilinear(uh, Mask::F, uh, Mask::F, Mask::FG), Mask::FG};
    }

    TermOutput z0(const SpectralField& uh) {
        TermChain c = chain(uh, 0);
        return {std::move(c.z0), Mask::FG};
    }

    TermOutput b_term(const SpectralField& uh) {
        require_resolved(uh, "b_term");
        SpectralField rhat = conv_.bilinear(uh, Mask::F, uh, Mask::F, Mask::FG);
        return {conv_.bilinear(rhat, Mask::F, uh, Mask::F, Mask::FG), Mask::FG};
    }

    TermOutput z1(const SpectralField& uh) {
        TermChain c = chain(uh, 1);
        return {std::move(c.z1), Mask::FG};
    }

    TermOutput z2(const SpectralField& uh) {
        TermChain c = chain(uh, 2);
        return {std::move(c.z2), Mask::F};
    }

    // t-model closure: t * Z0 restricted to the resolved range.
    TermOutput tmodel_term(const SpectralField& uh, real t) {
        if (t < 0.0) throw std::invalid_argument("tmodel_term: t must be >= 0");
        TermChain c = chain(uh, 0);
        restrict_to_mask(c.z0, Mask::F);
        c.z0 *= t;
        return {std::move(c.z0), Mask::F};
    }

    TermChain chain(const SpectralField& uh, int order) {
        require_resolved(uh, "model term");
        if (order < 0 || order > 2)
            throw std::invalid_argument("hand-coded terms cover orders 0..2");
        TermChain c;
        c.order = order;
        c.rhat = conv_.bilinear(uh, Mask::F, uh, Mask::F, Mask::FG);
        c.z0 = SpectralField(*grid_);
        conv_.accumulate_pair(c.z0, 1.0, c.rhat, Mask::G, uh, Mask::F, Mask::FG);
        if (order >= 1) {
            c.z1 = SpectralField(*grid_);
            conv_.accumulate_pair(c.z1, 1.0, c.rhat, Mask::FG, c.rhat, Mask::G, Mask::FG);
            conv_.accumulate_pair(c.z1, 1.0, c.z0, Mask::G, uh, Mask::F, Mask::FG);
        }
        if (order >= 2) {
            c.b = conv_.bilinear(c.rhat, Mask::F, uh, Mask::F, Mask::FG);
            c.bprime = conv_.bilinear(uh, Mask::F, c.rhat, Mask::F, Mask::FG);
            c.z2 = SpectralField(*grid_);
            // the two Z0 pairs of the derivation coincide, hence weight 2
            conv_.accumulate_pair(c.z2, 2.0, c.z0, Mask::FG, c.rhat, Mask::G, Mask::F);
            conv_.accumulate_pair(c.z2, 1.0, c.b, Mask::FG, c.rhat, Mask::G, Mask::F);
            conv_.accumulate_pair(c.z2, 1.0, c.bprime, Mask::FG, c.rhat, Mask::G, Mask::F);
            conv_.accumulate_pair(c.z2, 1.0, c.z0, Mask::G, c.rhat, Mask::F, Mask::F);
            conv_.accumulate_pair(c.z2, 1.0, c.z0, Mask::G, c.rhat, Mask::FG, Mask::F);
            conv_.accumulate_pair(c.z2, 1.0, c.z1, Mask::G, uh, Mask::F, Mask::F);
        }
        return c;
    }

  private:
    void require_resolved(const SpectralField& uh, const char* who) const {
        if (has_support_outside(uh, Mask::F))
            throw std::invalid_argument(std::string(who) +
                                        ": input has nonzero unresolved-range support");
    }

    const WavenumberGrid* grid_;
    ConvolutionEngine conv_;
};

}  // namespace mze

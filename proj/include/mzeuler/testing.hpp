// Helpers shared by the test suites and the desk-check run mode: random
// Hermitian incompressible fields and error metrics.
#pragma once

#include <random>

#include "mzeuler/field.hpp"

namespace mze::testing {

// Random field supported on `support`, Hermitian, incompressible, zero mean,
// oddball-free.  Coefficient magnitudes are O(amplitude).
inline SpectralField random_field(const WavenumberGrid& grid, Mask support,
                                  std::uint64_t seed, real amplitude = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<real> u(-1.0, 1.0);
    SpectralField f(grid);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (grid.in_mask(i, support))
                f.at(c, i) = amplitude * cplx{u(rng), u(rng)};
    restrict_to_hermitian_support(f, support);  // drop unpairable face modes
    hermitian_enforce(f);
    project_divergence_free(f);
    f.set_vec(grid.index_of({0, 0, 0}), Vec3c{});
    return f;
}

}  // namespace mze::testing

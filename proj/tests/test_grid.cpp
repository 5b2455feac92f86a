#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "mzeuler/grid.hpp"

using namespace mze;

TEST_CASE("build_grid partitions the cube into F and G") {
    WavenumberGrid g(4, 8);
    CHECK(g.mask_count(Mask::F) == 64);
    CHECK(g.mask_count(Mask::G) == 512 - 64);
    CHECK(g.mask_count(Mask::FG) == 512);
    CHECK(g.mask_count(Mask::Empty) == 0);

    // F and G are disjoint and exhaustive
    std::size_t nf = 0, ng = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        bool in_f = g.in_mask(i, Mask::F);
        bool in_g = g.in_mask(i, Mask::G);
        CHECK(in_f != in_g);
        CHECK(g.in_mask(i, Mask::FG));
        in_f ? ++nf : ++ng;
    }
    CHECK(nf == 64);
    CHECK(ng == 448);
}

TEST_CASE("grid ranges follow the FFT wrap-around convention") {
    WavenumberGrid g(8, 16);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Vec3i& k = g.wavevector(i);
        for (int a = 0; a < 3; ++a) {
            CHECK(k[a] >= -8);
            CHECK(k[a] <= 7);
        }
        bool expect_f = true;
        for (int a = 0; a < 3; ++a)
            if (k[a] < -4 || k[a] > 3) expect_f = false;
        CHECK(g.in_mask(i, Mask::F) == expect_f);
        CHECK(g.index_of(k) == i);
    }
}

TEST_CASE("build_grid rejects invalid sizes") {
    CHECK_THROWS_AS(WavenumberGrid(4, 6), std::invalid_argument);
    CHECK_THROWS_AS(WavenumberGrid(3, 8), std::invalid_argument);
    CHECK_THROWS_AS(WavenumberGrid(4, 9), std::invalid_argument);
    CHECK_THROWS_AS(WavenumberGrid(0, 8), std::invalid_argument);
}

TEST_CASE("oddball modes are flagged and have no negation") {
    WavenumberGrid g(4, 8);
    std::size_t idx = g.index_of({-4, 0, 1});
    CHECK(g.oddball(idx));
    CHECK(g.negation_index(idx) == WavenumberGrid::npos);
    std::size_t reg = g.index_of({3, -2, 1});
    CHECK_FALSE(g.oddball(reg));
    CHECK(g.wavevector(g.negation_index(reg)) == Vec3i{-3, 2, -1});
}

TEST_CASE("leray projector removes the parallel component") {
    Vec3c ex{{1.0, 0.0, 0.0}};
    Vec3c ey{{0.0, 1.0, 0.0}};

    Vec3c r1 = leray_apply({1, 0, 0}, ex);
    CHECK(std::abs(r1[0]) == 0.0);
    CHECK(std::abs(r1[1]) == 0.0);
    CHECK(std::abs(r1[2]) == 0.0);

    Vec3c r2 = leray_apply({1, 0, 0}, ey);
    CHECK(r2[1] == cplx{1.0, 0.0});

    Vec3c r3 = leray_apply({1, 1, 0}, ex);
    CHECK(std::abs(r3[0] - cplx{0.5, 0.0}) < 1e-15);
    CHECK(std::abs(r3[1] - cplx{-0.5, 0.0}) < 1e-15);
    CHECK(std::abs(r3[2]) == 0.0);
}

TEST_CASE("leray projector is symmetric, idempotent, annihilates k") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        Vec3i k{int(rng() % 9) - 4, int(rng() % 9) - 4, int(rng() % 9) - 4};
        Vec3c v{{cplx{u(rng), u(rng)}, cplx{u(rng), u(rng)}, cplx{u(rng), u(rng)}}};
        Vec3c av = leray_apply(k, v);
        Vec3c aav = leray_apply(k, av);
        for (int a = 0; a < 3; ++a)
            CHECK(std::abs(aav[a] - av[a]) < 1e-14);
        if (k != Vec3i{0, 0, 0})
            CHECK(std::abs(dot(k, av)) < 1e-13);
    }
}

TEST_CASE("mask algebra is closed") {
    CHECK((Mask::F & Mask::G) == Mask::Empty);
    CHECK((Mask::F | Mask::G) == Mask::FG);
    CHECK((Mask::FG & Mask::F) == Mask::F);
    CHECK((Mask::FG & Mask::G) == Mask::G);
    CHECK(mask_empty(Mask::F & Mask::G));
}

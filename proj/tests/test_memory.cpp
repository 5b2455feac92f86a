#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "mzeuler/memory.hpp"

using namespace mze;

namespace {

MemoryConfig cfg(double t0, double dt, int order,
                 MemoryMode mode = MemoryMode::Incremental,
                 Quadrature quad = Quadrature::Trapezoid) {
    MemoryConfig c;
    c.t0 = t0;
    c.dt = dt;
    c.order = order;
    c.mode = mode;
    c.quadrature = quad;
    return c;
}

double rel(double a, double b) {
    return std::abs(a - b) / std::max(1.0, std::abs(b));
}

}  // namespace

TEST_CASE("config validation") {
    CHECK_THROWS_AS(MemoryEngine<double>(cfg(0.0015, 1e-3, 0)), std::invalid_argument);
    CHECK_THROWS_AS(MemoryEngine<double>(cfg(-1.0, 1e-3, 0)), std::invalid_argument);
    CHECK_THROWS_AS(
        MemoryEngine<double>(cfg(1.0, 1e-3, 0, MemoryMode::Incremental, Quadrature::Simpson)),
        std::invalid_argument);
    CHECK_NOTHROW(MemoryEngine<double>(cfg(2.0, 1e-3, 2)));
}

TEST_CASE("window capacity, eviction, and push validation") {
    const double dt = 0.1, t0 = 0.5;  // W = 5
    MemoryEngine<double> eng(cfg(t0, dt, 0));
    for (int i = 0; i <= 8; ++i) eng.push(i * dt, {1.0});
    // after W+3 pushes the window covers [t - t0, t]
    CHECK(eng.window_size() == 6);  // W + 1 snapshot instants
    CHECK(eng.snapshot_time(0) == Catch::Approx(0.8 - t0));
    CHECK(eng.newest_time() == Catch::Approx(0.8));

    CHECK_THROWS_AS(eng.push(0.8, {1.0}), std::invalid_argument);   // repeated time
    CHECK_THROWS_AS(eng.push(1.05, {1.0}), std::invalid_argument);  // gap
    CHECK_THROWS_AS(eng.push(0.9, {1.0, 2.0}), std::invalid_argument);  // wrong order count
}

TEST_CASE("trapezoid moments are exact on constants and linears") {
    const double dt = 0.01, t0 = 0.6;
    MemoryEngine<double> eng(cfg(t0, dt, 1));
    double t = 0.0;
    for (int i = 0; i <= 200; ++i) {
        t = i * dt;
        eng.push(t, {1.0, t});
    }
    // full window: M_{0,0} = t0 exactly
    // memory_term for order-1 payload f0=1, f1(s)=s:
    //   int_{t-t0}^t 1 ds + int (t-s) s ds; the weighted integrand is
    //   quadratic, so the value carries the trapezoid's O(dt^2) error
    double i0 = t0;
    double a = t - t0;
    double i1 = (t * (t * t - a * a) / 2.0) - (t * t * t - a * a * a) / 3.0;
    double got = eng.memory_term(t);
    CHECK(std::abs(got - (i0 + i1)) < dt * dt * t0);
    CHECK(rel(got, eng.direct_window_integral(t)) < 1e-13);

    // the M_{0,0} accumulator itself (index j=0,m=0)
    CHECK(eng.moments()[0] == Catch::Approx(t0).epsilon(1e-12));

    // f(s) = s with m = 0: integral (t^2 - (t-t0)^2)/2
    MemoryEngine<double> eng2(cfg(t0, dt, 0));
    for (int i = 0; i <= 200; ++i) eng2.push(i * dt, {i * dt});
    CHECK(rel(eng2.moments()[0], (t * t - a * a) / 2.0) < 1e-12);
}

TEST_CASE("incremental moments equal from-scratch recomputation over a long random stream") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double dt = 1e-3, t0 = 0.05;  // W = 50
    MemoryEngine<double> eng(cfg(t0, dt, 2));
    double worst = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        eng.push(i * dt, {u(rng), u(rng), u(rng)});
        auto scratch = eng.moments_from_scratch();
        for (std::size_t m = 0; m < scratch.size(); ++m)
            worst = std::max(worst, rel(eng.moments()[m], scratch[m]));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("memory_term equals the direct window integral over a run") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double dt = 1e-3, t0 = 0.03;
    MemoryEngine<double> eng(cfg(t0, dt, 2));
    double worst = 0.0;
    for (int i = 0; i <= 500; ++i) {
        double t = i * dt;
        eng.push(t, {u(rng), u(rng), u(rng)});
        worst = std::max(worst, rel(eng.memory_term(t), eng.direct_window_integral(t)));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("memory term is zero at t = 0 and c*t0 for constant order-0 integrands") {
    MemoryEngine<double> eng(cfg(0.5, 0.1, 0));
    eng.push(0.0, {3.0});
    CHECK(eng.memory_term(0.0) == 0.0);
    for (int i = 1; i <= 20; ++i) eng.push(i * 0.1, {3.0});
    CHECK(rel(eng.memory_term(2.0), 3.0 * 0.5) < 1e-13);
}

TEST_CASE("two-snapshot window gives the half-dt-weighted endpoint trapezoid") {
    MemoryEngine<double> eng(cfg(1.0, 0.5, 0, MemoryMode::Direct));
    eng.push(0.0, {2.0});
    eng.push(0.5, {4.0});
    CHECK(eng.direct_window_integral(0.5) == Catch::Approx(0.25 * 2.0 + 0.25 * 4.0));
    // empty-range window
    MemoryEngine<double> one(cfg(1.0, 0.5, 0, MemoryMode::Direct));
    one.push(0.0, {7.0});
    CHECK(one.direct_window_integral(0.0) == 0.0);
}

TEST_CASE("rebase is exact") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double dt = 1e-2, t0 = 0.2;
    MemoryConfig c = cfg(t0, dt, 2);
    c.rebase_interval = 1e9;  // manual rebasing only
    MemoryEngine<double> eng(c);
    double t = 0.0;
    for (int i = 0; i <= 100; ++i) {
        t = i * dt;
        eng.push(t, {u(rng), u(rng), u(rng)});
    }
    const double before = eng.memory_term(t);

    MemoryEngine<double> same = eng;
    same.rebase(eng.t_base());
    CHECK(same.memory_term(t) == before);  // identity rebase

    MemoryEngine<double> moved = eng;
    moved.rebase(0.37);
    CHECK(rel(moved.memory_term(t), before) < 1e-13);

    MemoryEngine<double> twice = eng;
    twice.rebase(0.2);
    twice.rebase(0.55);
    MemoryEngine<double> once = eng;
    once.rebase(0.55);
    CHECK(rel(twice.memory_term(t), once.memory_term(t)) < 1e-13);
}

TEST_CASE("automatic rebasing keeps the incremental mode exact over long runs") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double dt = 1e-2, t0 = 0.3;
    MemoryEngine<double> eng(cfg(t0, dt, 2));  // rebase_interval defaults to t0
    double worst = 0.0;
    for (int i = 0; i <= 3000; ++i) {
        double t = i * dt;
        eng.push(t, {u(rng), u(rng), u(rng)});
        worst = std::max(worst, rel(eng.memory_term(t), eng.direct_window_integral(t)));
    }
    CHECK(worst < 1e-10);
    CHECK(eng.t_base() > 20.0);  // rebasing actually happened
}

TEST_CASE("simpson direct mode agrees with trapezoid to quadrature order on smooth integrands") {
    auto run = [](Quadrature q, double dt) {
        MemoryEngine<double> eng(cfg(0.4, dt, 0, MemoryMode::Direct, q));
        double t = 0.0;
        int n = int(std::round(1.0 / dt));
        for (int i = 0; i <= n; ++i) {
            t = i * dt;
            eng.push(t, {std::sin(3.0 * t)});
        }
        return eng.direct_window_integral(t);
    };
    // exact integral of sin(3s) over [0.6, 1.0]
    const double exact = (std::cos(3.0 * 0.6) - std::cos(3.0 * 1.0)) / 3.0;
    double et1 = std::abs(run(Quadrature::Trapezoid, 2e-2) - exact);
    double et2 = std::abs(run(Quadrature::Trapezoid, 1e-2) - exact);
    double es2 = std::abs(run(Quadrature::Simpson, 1e-2) - exact);
    CHECK(et2 < et1 / 3.5);     // trapezoid converges at second order
    CHECK(es2 < et2 * 1e-2);    // simpson is markedly more accurate
    CHECK(std::abs(run(Quadrature::Simpson, 1e-2) - run(Quadrature::Trapezoid, 1e-2)) <
          2.0 * et2);           // schemes differ by the trapezoid error scale
}

TEST_CASE("stage evaluation reduces to the accepted evaluation at tau = t") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    MemoryEngine<double> eng(cfg(0.05, 1e-3, 1));
    for (int i = 0; i <= 120; ++i) eng.push(i * 1e-3, {u(rng), u(rng)});
    const double t = 0.120;
    CHECK(eng.memory_term(t) == eng.memory_term(t, nullptr));

    // a stage at t + dt matches a fresh engine that actually took that step
    std::vector<double> stage{0.4, -0.2};
    double staged = eng.memory_term(t + 1e-3, &stage);

    MemoryEngine<double> taken(cfg(0.05, 1e-3, 1));
    std::mt19937_64 rng2(31);
    for (int i = 0; i <= 120; ++i) taken.push(i * 1e-3, {u(rng2), u(rng2)});
    taken.push(0.121, stage);
    CHECK(rel(staged, taken.memory_term(0.121)) < 1e-12);
}

TEST_CASE("resolved-vector payload arithmetic") {
    ResolvedVec a{{cplx{1, 2}, cplx{3, -1}}};
    ResolvedVec z = mem_zero_like(a);
    CHECK(z.v.size() == 2);
    mem_axpy(z, 2.0, a);
    CHECK(z.v[0] == cplx{2, 4});
    CHECK(rms(a) == Catch::Approx(std::sqrt((5.0 + 10.0) / 2.0)));
}

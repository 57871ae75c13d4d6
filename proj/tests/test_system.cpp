#include <catch2/catch_amalgamated.hpp>

#include "delayreach/system.hpp"
#include "test_util.hpp"

using namespace delayreach;
using testutil::Rng;

TEST_CASE("build_QP places the atoms of the defining formula") {
    SECTION("scalar hand spec") {
        SystemSpec spec = testutil::scalar_spec();
        auto [Q, P] = build_QP(spec);
        CHECK(Q(0, 0).atom_at(-4) == 1.0);
        CHECK(Q(0, 0).atom_at(0) == -0.5);
        CHECK(Q(0, 0).atoms().size() == 2);
        CHECK(P(0, 0).atom_at(0) == 1.0);
    }
    SECTION("pure shift when A and g vanish") {
        SystemSpec spec;
        spec.d = 2;
        spec.m = 1;
        spec.h = 0.25;
        spec.delay_idx = {8};
        spec.A = {Eigen::MatrixXd::Zero(2, 2)};
        spec.B = Eigen::MatrixXd::Ones(2, 1);
        auto [Q, P] = build_QP(spec);
        (void)P;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                CHECK(Q(i, j).atom_at(-8) == (i == j ? 1.0 : 0.0));
                CHECK(Q(i, j).total_variation() == (i == j ? 1.0 : 0.0));
            }
    }
    SECTION("identity atom at -Lambda_N, support bounded below") {
        Rng rng(21);
        for (int t = 0; t < 10; ++t) {
            SystemSpec spec = testutil::random_spec(rng, testutil::uniform_int(rng, 1, 3),
                                                    t % 2 == 0);
            auto [Q, P] = build_QP(spec);
            (void)P;
            const Index L = spec.largest_delay_idx();
            for (int i = 0; i < spec.d; ++i) {
                CHECK(Q(i, i).atom_at(-L) == 1.0);
                for (int j = 0; j < spec.d; ++j) {
                    Index s;
                    if (Q(i, j).support_inf_index(s)) CHECK(s >= -L);
                }
            }
        }
    }
}

TEST_CASE("minimal_time_bound equals d * Lambda_N") {
    CHECK(minimal_time_bound(testutil::scalar_spec()) == 1.0);

    SystemSpec d2;
    d2.d = 2;
    d2.m = 1;
    d2.h = 0.25;
    d2.delay_idx = {4, 8};
    d2.A = {0.2 * Eigen::MatrixXd::Ones(2, 2), 0.1 * Eigen::MatrixXd::Ones(2, 2)};
    d2.B = Eigen::MatrixXd::Ones(2, 1);
    CHECK(minimal_time_bound(d2) == 4.0);

    SystemSpec shift;
    shift.d = 3;
    shift.m = 1;
    shift.h = 0.25;
    shift.delay_idx = {4};
    shift.A = {Eigen::MatrixXd::Zero(3, 3)};
    shift.B = Eigen::MatrixXd::Ones(3, 1);
    CHECK(minimal_time_bound(shift) == 3.0);  // det Q = delta_{-3}
}

TEST_CASE("simulate runs the hand recursion") {
    SystemSpec spec = testutil::scalar_spec();
    GridSignal u(spec.h, 1, -4, 4);
    for (Index k = -4; k < 0; ++k) u.at(k, 0) = 1.0;
    auto sim = simulate(spec, u, 2.0);
    // x = 1 on [-1,0), 0.5 on [0,1), 0.25 on [1,2)
    for (Index k = -4; k < 0; ++k) CHECK(sim.x.value(k, 0) == 1.0);
    for (Index k = 0; k < 4; ++k) CHECK(sim.x.value(k, 0) == 0.5);
    for (Index k = 4; k < 8; ++k) CHECK(sim.x.value(k, 0) == 0.25);
    // y = x delayed by 1
    for (Index k = 0; k < 4; ++k) CHECK(sim.y.value(k, 0) == 1.0);
    for (Index k = 4; k < 8; ++k) CHECK(sim.y.value(k, 0) == 0.5);

    auto zero = simulate(spec, GridSignal(spec.h, 1), 2.0);
    CHECK(zero.y.max_abs() == 0.0);
}

TEST_CASE("simulate is linear and satisfies the restart property") {
    Rng rng(22);
    for (int t = 0; t < 5; ++t) {
        SystemSpec spec = testutil::random_spec(rng, 2, t % 2 == 0);
        GridSignal u1 = testutil::random_signal(rng, spec.h, spec.m, -8, 8);
        GridSignal u2 = testutil::random_signal(rng, spec.h, spec.m, -6, 10);
        const double T = 3.0 * spec.largest_delay();
        GridSignal lhs = simulate(spec, u1 + u2, T).y;
        GridSignal rhs = simulate(spec, u1, T).y + simulate(spec, u2, T).y;
        CHECK((lhs - rhs).max_abs() <= 1e-13);

        // restart: recompute the tail from the stored window only
        auto full = simulate(spec, u1, T);
        const Index k_mid = static_cast<Index>(std::llround(T / spec.h)) / 2;
        GridSignal x2 = full.x.restricted(full.x.start(), k_mid);
        GridSignal cont(spec.h, spec.d, x2.start(),
                        static_cast<std::size_t>(full.x.end() - x2.start()));
        for (Index k = x2.start(); k < k_mid; ++k)
            for (int c = 0; c < spec.d; ++c) cont.at(k, c) = x2.value(k, c);
        for (Index k = k_mid; k < full.x.end(); ++k) {
            Eigen::VectorXd v = spec.B * u1.vector_at(k);
            for (int j = 0; j < spec.N(); ++j)
                v += spec.A[static_cast<std::size_t>(j)] *
                     cont.vector_at(k - spec.delay_idx[static_cast<std::size_t>(j)]);
            for (std::size_t i = 0; i < spec.g.size(); ++i)
                v += spec.h * (spec.g[i] * cont.vector_at(k - static_cast<Index>(i) - 1));
            for (int c = 0; c < spec.d; ++c) cont.at(k, c) = v(c);
        }
        CHECK((cont - full.x).max_abs() == 0.0);
    }
}

TEST_CASE("state_residual detects membership of the state space") {
    SystemSpec spec = testutil::scalar_spec();
    SECTION("zero signal") {
        GridSignal y(spec.h, 1, 0, 16);
        CHECK(state_residual(spec, y) == 0.0);
    }
    SECTION("constant 1 on [0,2) violates the recursion by 0.5") {
        GridSignal y(spec.h, 1, 0, 8);
        for (Index k = 0; k < 8; ++k) y.at(k, 0) = 1.0;
        CHECK(state_residual(spec, y) == Catch::Approx(0.5).margin(1e-15));
    }
    SECTION("extended targets have vanishing residual") {
        Rng rng(23);
        for (int t = 0; t < 5; ++t) {
            SystemSpec sp = testutil::random_spec(rng, 2, false);
            const Index L = sp.largest_delay_idx();
            GridSignal y0 = testutil::random_signal(rng, sp.h, sp.d, 0, L);
            GridSignal y = extend_to_state(sp, y0, 6.0 * sp.largest_delay());
            CHECK(state_residual(sp, y) <= 1e-12);
        }
    }
}

TEST_CASE("extend_to_state runs the homogeneous recursion") {
    SystemSpec spec = testutil::scalar_spec();
    GridSignal y0(spec.h, 1, 0, 4);
    for (Index k = 0; k < 4; ++k) y0.at(k, 0) = 1.0;
    GridSignal y = extend_to_state(spec, y0, 3.0);
    for (Index k = 0; k < 4; ++k) CHECK(y.value(k, 0) == 1.0);
    for (Index k = 4; k < 8; ++k) CHECK(y.value(k, 0) == 0.5);
    for (Index k = 8; k < 12; ++k) CHECK(y.value(k, 0) == 0.25);

    GridSignal z = extend_to_state(spec, GridSignal(spec.h, 1, 0, 4), 3.0);
    CHECK(z.max_abs() == 0.0);

    CHECK_THROWS_AS(extend_to_state(spec, GridSignal(spec.h, 1, 0, 3), 3.0),
                    std::invalid_argument);
}

#include <catch2/catch_amalgamated.hpp>

#include "delayreach/hautus.hpp"
#include "delayreach/polynomial.hpp"
#include "test_util.hpp"

using namespace delayreach;
using testutil::Rng;

TEST_CASE("polynomial arithmetic, gcd, roots") {
    Polynomial a({-1.0, 0.0, 1.0});       // z^2 - 1
    Polynomial b({1.0, 1.0});             // z + 1
    Polynomial g = poly_gcd(a, b);
    REQUIRE(g.degree() == 1);
    CHECK(g.coeff(0) == Catch::Approx(1.0).margin(1e-12));
    CHECK(g.coeff(1) == Catch::Approx(1.0).margin(1e-12));

    Polynomial c({2.0, 1.0});             // z + 2, coprime with b
    CHECK(poly_gcd(b, c).degree() == 0);

    auto roots = Polynomial({-2.0, 1.0, -2.0, 1.0}).roots();  // (z-2)(z^2+1)
    REQUIRE(roots.size() == 3);
    double best = 1e9;
    for (auto z : roots) best = std::min(best, std::abs(z - std::complex<double>(2.0, 0.0)));
    CHECK(best <= 1e-10);
}

TEST_CASE("grid check on the scalar pass example") {
    HautusReport rep = hautus_grid_check(testutil::scalar_spec());
    CHECK(rep.verdict == Verdict::Pass);
    CHECK(rep.min_margin >= 0.7);
    CHECK(rep.method == "grid");
}

TEST_CASE("grid check pass when B has full row rank") {
    Rng rng(51);
    for (int t = 0; t < 3; ++t) {
        SystemSpec spec = testutil::random_spec(rng, 2, t == 2);
        spec.m = 2;
        spec.B = Eigen::MatrixXd::Identity(2, 2);
        HautusReport rep = hautus_grid_check(spec);
        CHECK(rep.verdict == Verdict::Pass);
        CHECK(rep.min_margin > 0.5);
    }
}

TEST_CASE("grid check fails the negative controls with a certified witness") {
    const double tol = 1e-6;
    SECTION("scalar spec with B = 0") {
        SystemSpec spec = testutil::scalar_spec(0.5, 0.0);
        HautusReport rep = hautus_grid_check(spec, 0.05, tol);
        REQUIRE(rep.verdict == Verdict::Fail);
        REQUIRE(rep.witness.has_value());
        CHECK_FALSE(rep.witness->at_limit);
        // the polished witness annihilates [Qhat(p), B]
        TransferData td = eval_transfer(spec, rep.witness->location);
        Eigen::MatrixXcd concat(1, 2);
        concat << td.Qhat(0, 0), Complex(0.0);
        CHECK((rep.witness->g.transpose() * concat).norm() <= 1e-9);
    }
    SECTION("nilpotent d=2 example fails at the limit pair") {
        SystemSpec spec = testutil::nilpotent_spec();
        HautusReport rep = hautus_grid_check(spec, 0.05, tol);
        REQUIRE(rep.verdict == Verdict::Fail);
        REQUIRE(rep.witness.has_value());
        CHECK(rep.witness->at_limit);
        Eigen::MatrixXcd concat(2, 3);
        concat.leftCols(2) = -spec.A[0].cast<Complex>();
        concat.rightCols(1) = spec.B.cast<Complex>();
        CHECK((rep.witness->g.transpose() * concat).norm() <= 1e-12);
    }
}

TEST_CASE("exact commensurate test on the hand examples") {
    SECTION("scalar A=0.5, B=1 passes") {
        HautusReport rep = hautus_exact_commensurate(testutil::scalar_spec());
        CHECK(rep.verdict == Verdict::Pass);
        CHECK(rep.method == "exact-commensurate");
    }
    SECTION("scalar A=0.5, B=0 fails with witness z=2") {
        HautusReport rep = hautus_exact_commensurate(testutil::scalar_spec(0.5, 0.0));
        REQUIRE(rep.verdict == Verdict::Fail);
        REQUIRE(rep.witness.has_value());
        CHECK(std::abs(rep.witness->location - std::complex<double>(2.0, 0.0)) <= 1e-8);
    }
    SECTION("nilpotent d=2 example fails, consistent with the grid check") {
        HautusReport rep = hautus_exact_commensurate(testutil::nilpotent_spec());
        CHECK(rep.verdict == Verdict::Fail);
        HautusReport grid = hautus_grid_check(testutil::nilpotent_spec());
        CHECK(grid.verdict != Verdict::Pass);
    }
    SECTION("distributed density is rejected") {
        Rng rng(52);
        SystemSpec spec = testutil::random_spec(rng, 2, true);
        CHECK_THROWS_AS(hautus_exact_commensurate(spec), std::invalid_argument);
    }
}

TEST_CASE("exact fail implies grid does not pass") {
    Rng rng(53);
    int fails = 0;
    for (int t = 0; t < 30 && fails < 5; ++t) {
        SystemSpec spec = testutil::random_commensurate_spec(rng, 2, 1, 2, 3);
        if (t % 2 == 0) {
            // plant a rank drop at z = 1 shared with a zero B row
            spec.A[0](1, 0) = 0.0;
            spec.A[0](1, 1) = 1.0;
            for (std::size_t j = 1; j < spec.A.size(); ++j) {
                spec.A[j](1, 0) = 0.0;
                spec.A[j](1, 1) = 0.0;
            }
            spec.B(1, 0) = 0.0;
        }
        HautusReport ex = hautus_exact_commensurate(spec);
        if (ex.verdict != Verdict::Fail) continue;
        ++fails;
        HautusReport grid = hautus_grid_check(spec);
        CHECK(grid.verdict != Verdict::Pass);
    }
    CHECK(fails >= 3);
}

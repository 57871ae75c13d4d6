#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "delayreach/bezout.hpp"
#include "delayreach/io.hpp"
#include "test_util.hpp"

using namespace delayreach;

namespace {

const char* kScalarSpec = R"({
  "schema": "delay-reach/1",
  "d": 1, "m": 1,
  "h": "0.25",
  "delays": ["1"],
  "A": [[[0.5]]],
  "B": [[1]]
})";

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) {
        path = (std::filesystem::temp_directory_path() / name).string();
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("spec parsing") {
    SECTION("minimal scalar spec") {
        LoadedSpec loaded = parse_spec_text(kScalarSpec);
        CHECK(loaded.spec.d == 1);
        CHECK(loaded.spec.m == 1);
        CHECK(loaded.spec.h == 0.25);
        REQUIRE(loaded.spec.delay_idx == std::vector<Index>{4});
        CHECK(loaded.spec.A[0](0, 0) == 0.5);
        CHECK(loaded.spec.B(0, 0) == 1.0);
        CHECK(loaded.spec.g.empty());
        CHECK(loaded.hash.size() == 16);
    }
    SECTION("delay not a multiple of the grid step") {
        std::string text = kScalarSpec;
        text.replace(text.find("\"1\""), 3, "\"0.3\"");
        try {
            parse_spec_text(text);
            FAIL("expected grid error");
        } catch (const IoError& e) {
            CHECK(e.kind == IoError::Grid);
            CHECK(std::string(e.what()).find("delay") != std::string::npos);
        }
    }
    SECTION("wrong g sample count") {
        std::string text = kScalarSpec;
        text.insert(text.rfind('}'), ", \"g\": [[[0.1]], [[0.1]]]");
        try {
            parse_spec_text(text);
            FAIL("expected shape error");
        } catch (const IoError& e) {
            CHECK(e.kind == IoError::Shape);
        }
    }
    SECTION("missing schema") {
        try {
            parse_spec_text("{\"d\": 1}");
            FAIL("expected schema error");
        } catch (const IoError& e) {
            CHECK(e.kind == IoError::Schema);
        }
    }
}

TEST_CASE("signal CSV round trip") {
    testutil::Rng rng(71);
    GridSignal sig = testutil::random_signal(rng, 0.25, 2, -5, 12);
    TempFile tmp("delayreach_test_signal.csv");
    write_signal_csv(tmp.path, sig);
    GridSignal back = read_signal_csv(tmp.path, 0.25, 2);
    REQUIRE(back.start() == sig.start());
    REQUIRE(back.cells() == sig.cells());
    CHECK((back - sig).max_abs() == 0.0);

    CHECK_THROWS_AS(read_signal_csv(tmp.path, 0.25, 3), IoError);
}

TEST_CASE("bezout pair file round trip") {
    SystemSpec spec = testutil::scalar_spec();
    auto pair = solve_bezout_commensurate(spec);
    REQUIRE(pair.has_value());
    TempFile tmp("delayreach_test_bezout.json");
    write_bezout(tmp.path, pair->R, pair->S, spec.h);
    BezoutFile back = read_bezout(tmp.path, spec.h);
    auto [Q, P] = build_QP(spec);
    auto [ok, res] = verify_bezout(Q, P, back.R, back.S, 1e-9);
    CHECK(ok);
    CHECK(res <= 1e-12);
}

TEST_CASE("measure matrix with density round trips") {
    const double h = 0.25;
    MatrixMeasure m(2, 2, h);
    m(0, 0) = ScalarMeasure(h, {{-4, 1.0}, {0, -0.5}}, -3, {0.125, -0.25});
    m(1, 0) = ScalarMeasure(h, {{-2, 0.75}});
    m(1, 1) = ScalarMeasure(h, {{0, 1.0}});
    json j = detail::dump_measure_matrix(m);
    MatrixMeasure back = detail::parse_measure_matrix(j, h, "test");
    for (Index k = -5; k <= 1; ++k) {
        CHECK((back.atom_at(k) - m.atom_at(k)).cwiseAbs().maxCoeff() == 0.0);
        CHECK((back.mass_at(k) - m.mass_at(k)).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("report writing is deterministic") {
    json rep;
    rep["b_field"] = 0.1;
    rep["a_field"] = "x";
    rep["nested"] = {{"z", 1}, {"a", 2.5}};
    TempFile t1("delayreach_test_rep1.json"), t2("delayreach_test_rep2.json");
    write_report(t1.path, rep);
    write_report(t2.path, rep);
    CHECK(read_file(t1.path) == read_file(t2.path));
    CHECK(read_file(t1.path).find("\"a_field\"") < read_file(t1.path).find("\"b_field\""));
}

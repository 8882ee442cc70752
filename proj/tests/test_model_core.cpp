#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "avol/errors.hpp"
#include "avol/geometric_lorenz.hpp"
#include "avol/model.hpp"
#include "avol/rng.hpp"

#include <cmath>

using namespace avol;

TEST_CASE("orbit of the halving map") {
    ModelHandle model(LinearMap1D{0.5, 0.0, -1, 1}, EvalMode::Floating);
    auto orb = orbit(model, ModelPoint::interval(1.0), 3);
    REQUIRE(orb.points.size() == 4);
    CHECK(orb.points[0][0] == 1.0);
    CHECK(orb.points[1][0] == 0.5);
    CHECK(orb.points[2][0] == 0.25);
    CHECK(orb.points[3][0] == 0.125);
    CHECK_FALSE(orb.stopped_early);
}

TEST_CASE("orbit from the singular point stops at index 0") {
    ModelHandle model(LorenzMapSpec{PowerLawParams{}}, EvalMode::Floating);
    auto orb = orbit(model, ModelPoint::interval(0.0), 10);
    CHECK(orb.stopped_early);
    CHECK(orb.stop_index == 0);
    CHECK(orb.points.size() == 1);
}

TEST_CASE("lorenz orbit matches two direct branch evaluations") {
    LorenzMapSpec spec{PowerLawParams{0.75, 1.8}};
    ModelHandle model(spec, EvalMode::Floating);
    auto orb = orbit(model, ModelPoint::interval(0.5), 2);
    REQUIRE(orb.points.size() == 3);
    const double f1 = 1.8 * std::pow(0.5, 0.75) - 0.75;
    CHECK(orb.points[1][0] == doctest::Approx(f1).epsilon(1e-15));
    const double f2 = 1.8 * std::pow(std::abs(f1), 0.75) - 0.75;  // f1 > 0
    CHECK(orb.points[2][0] == doctest::Approx(f2).epsilon(1e-15));
}

TEST_CASE("start outside the chart is a domain error") {
    ModelHandle model(LorenzMapSpec{PowerLawParams{}}, EvalMode::Floating);
    CHECK_THROWS_AS(orbit(model, ModelPoint::interval(0.9), 1), domain_error);
}

TEST_CASE("tangents of a diagonal map") {
    ModelHandle model(LinearMap2D::diagonal(0.5, 3.0), EvalMode::Floating);
    auto ts = tangent_along(model, ModelPoint::square(0.01, 0.02), 2);
    REQUIRE(ts.size() == 2);
    for (const auto& t : ts) {
        CHECK(t.at(0, 0) == 0.5);
        CHECK(t.at(1, 1) == 3.0);
        CHECK(t.at(0, 1) == 0.0);
        CHECK(t.at(1, 0) == 0.0);
    }
}

TEST_CASE("one-step tangent of the power-law map is the derivative formula") {
    ModelHandle model(LorenzMapSpec{PowerLawParams{0.75, 1.8}}, EvalMode::Floating);
    auto ts = tangent_along(model, ModelPoint::interval(0.5), 1);
    REQUIRE(ts.size() == 1);
    CHECK(ts[0].at(0, 0) ==
          doctest::Approx(1.8 * 0.75 * std::pow(0.5, -0.25)).epsilon(1e-15));
}

TEST_CASE("chain rule: tangent products match finite differences") {
    ModelHandle model(LorenzMapSpec{PowerLawParams{0.75, 1.8}}, EvalMode::Floating);
    SplitMix64 rng(99);
    int tested = 0;
    for (int trial = 0; trial < 60 && tested < 12; ++trial) {
        const double x0 = -0.7 + 1.4 * rng.next_unit();
        if (std::abs(x0) < 0.05) continue;
        const long n = 1 + static_cast<long>(rng.next() % 10);
        OrbitResult orb = orbit(model, ModelPoint::interval(x0), n);
        if (orb.stopped_early || static_cast<long>(orb.points.size()) != n + 1) continue;
        // keep clear of the singular line so the difference stencil stays valid
        bool safe = true;
        for (const auto& p : orb.points) safe = safe && std::abs(p[0]) > 0.05;
        if (!safe) continue;

        auto ts = tangent_along(model, ModelPoint::interval(x0), n);
        double prod = 1;
        for (const auto& t : ts) prod *= t.at(0, 0);

        const double h = 1e-8;
        auto iterate = [&](double x) {
            for (long k = 0; k < n; ++k) x = model.step(ModelPoint::interval(x))->coords[0];
            return x;
        };
        const double fd = (iterate(x0 + h) - iterate(x0 - h)) / (2 * h);
        CHECK(prod == doctest::Approx(fd).epsilon(1e-6));
        ++tested;
    }
    CHECK(tested >= 8);
}

TEST_CASE("composition consistency is exact") {
    for (EvalMode mode : {EvalMode::Floating, EvalMode::ExactPiecewise}) {
        CantorExtensionParams p;
        p.cantor = CantorMapSpec{GapSchedule::inverse_square(), 30};
        ModelHandle model(LorenzMapSpec{p}, mode);
        // a point of the invariant core (bridge endpoint), orbit stays exact
        const double x0 = -0.5;
        auto full = orbit(model, ModelPoint::interval(x0), 7);
        auto head = orbit(model, ModelPoint::interval(x0), 3);
        auto tail = orbit(model, head.points.back(), 4);
        REQUIRE(full.points.size() == 8);
        for (std::size_t k = 0; k < 4; ++k)
            CHECK(full.points[4 + k][0] == tail.points[1 + k][0]);
    }
}

TEST_CASE("exact-mode orbits carry exact coordinates on the cantor core") {
    CantorExtensionParams p;
    p.cantor = CantorMapSpec{GapSchedule::constant(Rational(1, 3)), 30};
    ModelHandle model(LorenzMapSpec{p}, EvalMode::ExactPiecewise);
    auto orb = orbit(model, ModelPoint::interval(-0.5), 5);
    REQUIRE(orb.points.size() == 6);
    for (std::size_t k = 1; k < orb.points.size(); ++k) {
        REQUIRE(orb.points[k].exact != nullptr);
        CHECK(*orb.points[k].exact == Rational(-1, 2));  // fixed endpoint
    }
}

TEST_CASE("determinism: identical runs produce identical doubles") {
    ModelHandle model(LorenzMapSpec{PowerLawParams{}}, EvalMode::Floating);
    auto a = orbit(model, ModelPoint::interval(0.37), 50);
    auto b = orbit(model, ModelPoint::interval(0.37), 50);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i)
        CHECK(a.points[i][0] == b.points[i][0]);
}

TEST_CASE("validate_model mirrors the spec validators") {
    ModelHandle good(LorenzMapSpec{PowerLawParams{0.75, 1.8}}, EvalMode::Floating);
    CHECK(validate_model(good).usable());

    ModelHandle bad(LorenzMapSpec{PowerLawParams{0.75, 3.0}}, EvalMode::Floating);
    CHECK_FALSE(validate_model(bad).usable());

    CantorExtensionParams p;
    p.cantor = CantorMapSpec{GapSchedule::constant(Rational(0)), 30};
    ModelHandle zero_gap(LorenzMapSpec{p}, EvalMode::Floating);
    CHECK_FALSE(validate_model(zero_gap).usable());
}

TEST_CASE("doubling map wraps into [0,1)") {
    ModelHandle model(DoublingMap{}, EvalMode::Floating);
    auto orb = orbit(model, ModelPoint::interval(0.7), 2);
    CHECK(orb.points[1][0] == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(orb.points[2][0] == doctest::Approx(0.8).epsilon(1e-15));
}

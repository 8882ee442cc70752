#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "avol/errors.hpp"
#include "avol/geometric_lorenz.hpp"
#include "avol/rng.hpp"
#include "avol/volume_lab.hpp"

#include <cmath>

using namespace avol;

namespace {
SuspensionSpec defaults() { return SuspensionSpec{}; }
}  // namespace

TEST_CASE("derived exponents from the saddle eigenvalues") {
    auto rm = derive_return_map(defaults());
    const auto& pw = std::get<PowerLawParams>(rm.base.params);
    CHECK(pw.rho == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(rm.stable_exponent == doctest::Approx(1.2).epsilon(1e-15));
    CHECK(rm.validate().empty());
}

TEST_CASE("exit time formula is exact in the linear chart") {
    CHECK(return_time(defaults(), std::exp(-2.0)) ==
          doctest::Approx(2.0 + 0.5).epsilon(1e-15));
    // exit-face coordinates from the closed-form flow
    auto p = flow_integrate(defaults(), FlowPoint::on_section(std::exp(-2.0), 0.3),
                            2.0);
    CHECK(p.region == FlowPoint::Region::Tube);
    CHECK(p.u == doctest::Approx(0.0));
    CHECK(p.fy == doctest::Approx(0.3 * std::exp(-1.2 * 2.0)).epsilon(1e-12));
    CHECK(p.fz == doctest::Approx(std::exp(-0.75 * 2.0)).epsilon(1e-12));
}

TEST_CASE("volume-expansion violation is a contract error") {
    SuspensionSpec s = defaults();
    s.lambda3 = -1.5;  // lambda1 + lambda3 <= 0
    CHECK_THROWS_AS(derive_return_map(s), contract_error);
}

TEST_CASE("return step values at (0.5, 0)") {
    auto rm = derive_return_map(defaults());
    auto r = return_step(rm, 0.5, 0.0);
    CHECK(r.x == doctest::Approx(1.8 * std::pow(0.5, 0.75) - 0.75).epsilon(1e-15));
    CHECK(r.y == doctest::Approx(0.4 * std::pow(0.5, 1.2)).epsilon(1e-15));
    CHECK(r.tangent.at(1, 1) == doctest::Approx(0.25 * std::pow(0.5, 1.2)).epsilon(1e-15));
    CHECK(r.tangent.at(0, 1) == 0.0);
}

TEST_CASE("fiber map is odd: g(x,-y) + g(-x,y) = 0") {
    auto rm = derive_return_map(defaults());
    SplitMix64 rng(5);
    for (int i = 0; i < 200; ++i) {
        const double x = -0.7 + 1.4 * rng.next_unit();
        const double y = -0.7 + 1.4 * rng.next_unit();
        if (std::abs(x) < 1e-6) continue;
        const double a = return_step(rm, x, -y).y;
        const double b = return_step(rm, -x, y).y;
        CHECK(a + b == doctest::Approx(0.0).epsilon(1e-14));
    }
}

TEST_CASE("semi-conjugacy: the x-coordinate is the base map, same code path") {
    auto rm = derive_return_map(defaults());
    const LorenzMap base(rm.base);
    SplitMix64 rng(6);
    for (int i = 0; i < 100; ++i) {
        const double x = -0.7 + 1.4 * rng.next_unit();
        if (std::abs(x) < 1e-9) continue;
        CHECK(return_step(rm, base, x, 0.1).x == base.eval(x).value);
    }
}

TEST_CASE("fiber contraction: vertical distances shrink uniformly") {
    auto rm = derive_return_map(defaults());
    const double bound = rm.fiber_contraction_bound();
    CHECK(bound < 1.0);
    SplitMix64 rng(7);
    for (int i = 0; i < 100; ++i) {
        const double x = -0.7 + 1.4 * rng.next_unit();
        if (std::abs(x) < 1e-6) continue;
        const double y1 = -0.7 + 1.4 * rng.next_unit();
        const double y2 = -0.7 + 1.4 * rng.next_unit();
        const double d = std::abs(return_step(rm, x, y1).y - return_step(rm, x, y2).y);
        CHECK(d <= bound * std::abs(y1 - y2) + 1e-15);
    }
}

TEST_CASE("flow: t = 0 is the identity, time is additive") {
    auto susp = defaults();
    FlowPoint p = FlowPoint::on_section(0.31, -0.2);
    auto q = flow_integrate(susp, p, 0.0);
    CHECK(q.x == p.x);
    CHECK(q.y == p.y);
    CHECK(q.z == p.z);
    auto a = flow_integrate(susp, p, 1.7);
    auto b = flow_integrate(susp, flow_integrate(susp, p, 0.9), 0.8);
    CHECK(a.region == b.region);
    CHECK(std::abs(a.x - b.x) + std::abs(a.y - b.y) + std::abs(a.z - b.z) < 1e-12);
}

TEST_CASE("flow round trip equals the return map within 1e-10") {
    auto susp = defaults();
    auto rm = derive_return_map(susp);
    const LorenzMap base(rm.base);
    SplitMix64 rng(42);
    int checked = 0;
    for (int i = 0; i < 10000; ++i) {
        const double x = -0.75 + 1.5 * rng.next_unit();
        const double y = -0.75 + 1.5 * rng.next_unit();
        if (std::abs(x) < 1e-8) continue;
        const double t = return_time(susp, x);
        auto fp = flow_integrate(susp, FlowPoint::on_section(x, y), t);
        REQUIRE(fp.region == FlowPoint::Region::Saddle);
        auto r = return_step(rm, base, x, y);
        CHECK(std::abs(fp.x - r.x) < 1e-10);
        CHECK(std::abs(fp.y - r.y) < 1e-10);
        CHECK(std::abs(fp.z - 1.0) < 1e-12);
        ++checked;
    }
    CHECK(checked > 9990);
}

TEST_CASE("out-of-chart starts are rejected") {
    CHECK_THROWS_AS(flow_integrate(defaults(), FlowPoint::on_section(1.2, 0.0), 1.0),
                    domain_error);
}

TEST_CASE("flow box volume is the exact product") {
    auto est = flow_box_volume(defaults(), 0.4, 0.01);
    CHECK(est.volume == 2.0 * 0.01 * 0.4 * 0.75);
    CHECK(est.speed_factor == 0.75);
    auto zero = flow_box_volume(defaults(), 0.4, 0.0);
    CHECK(zero.volume == 0.0);
    CHECK_THROWS_AS(flow_box_volume(defaults(), 0.4, 0.2), contract_error);
}

TEST_CASE("cross-section stats: depth 0 is the whole section") {
    auto rm = derive_return_map(defaults());
    SubdivisionConfig cfg;
    cfg.seed = 3;
    auto stats = cross_section_stats(rm, 0, cfg, nullptr);
    CHECK(stats.areas[0] == doctest::Approx(2.25));
    CHECK(stats.projections[0] == doctest::Approx(1.5));
}

TEST_CASE("cross-section stats: areas shrink and covers nest") {
    auto rm = derive_return_map(defaults());
    SubdivisionConfig cfg;
    cfg.seed = 3;
    BoxCollection cover;
    auto stats = cross_section_stats(rm, 6, cfg, &cover);
    for (std::size_t i = 1; i < stats.areas.size(); ++i)
        CHECK(stats.areas[i] <= stats.areas[i - 1] + 1e-12);
    CHECK(cover.depth() == 6);
    CHECK(stats.areas.back() < 0.8 * stats.areas.front());
}

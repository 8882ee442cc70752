#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "avol/errors.hpp"
#include "avol/geometric_lorenz.hpp"
#include "avol/parallel.hpp"
#include "avol/rng.hpp"
#include "avol/volume_lab.hpp"

#include <cmath>

using namespace avol;

namespace {

BoxCollection run_levels(const ModelHandle& model, BoxCollection cover,
                         const SubdivisionConfig& cfg, int levels) {
    for (int i = 0; i < levels; ++i) cover = subdivide_select(model, cover, cfg);
    return cover;
}

}  // namespace

TEST_CASE("contraction to the origin keeps only boxes at 0") {
    ModelHandle model(LinearMap1D{0.5, 0.0, -1, 1}, EvalMode::Floating);
    SubdivisionConfig cfg;
    cfg.seed = 11;
    auto root = BoxCollection::whole_root(1, {-1, 0, 0, 0}, {1, 0, 0, 0});
    BoxCollection cover = root;
    for (int k = 1; k <= 10; ++k) {
        cover = subdivide_select(model, cover, cfg);
        if (k >= 2) CHECK(cover.measure() <= 4.0 * std::pow(2.0, -k) + 1e-12);
    }
    // the origin stays covered
    CHECK(cover.contains_point(ModelPoint::interval(1e-12)));
}

TEST_CASE("doubling map keeps everything") {
    ModelHandle model(DoublingMap{}, EvalMode::Floating);
    SubdivisionConfig cfg;
    cfg.seed = 12;
    auto cover = run_levels(model, BoxCollection::whole_root(1, {0, 0, 0, 0}, {1, 0, 0, 0}),
                            cfg, 8);
    CHECK(cover.measure() == doctest::Approx(1.0));
    CHECK(cover.size() == std::size_t{1} << 8);
}

TEST_CASE("covers nest across depths") {
    auto rm = std::make_shared<const ReturnMapSpec>(derive_return_map(SuspensionSpec{}));
    ModelHandle model(rm, EvalMode::Floating);
    SubdivisionConfig cfg;
    cfg.seed = 13;
    BoxCollection prev = BoxCollection::whole_root(2, {-0.75, -0.75, 0, 0},
                                                   {0.75, 0.75, 0, 0});
    for (int k = 0; k < 5; ++k) {
        BoxCollection cur = subdivide_select(model, prev, cfg);
        CHECK(cur.depth() == prev.depth() + 1);
        CHECK(cur.measure() <= prev.measure() + 1e-12);
        // every kept child has its parent in the previous cover
        for (auto key : cur.boxes()) {
            auto idx = cur.unpack(key);
            std::array<std::uint32_t, 4> pidx{};
            for (int i = 0; i < 2; ++i) pidx[static_cast<std::size_t>(i)] =
                idx[static_cast<std::size_t>(i)] >> 1;
            CHECK(std::binary_search(prev.boxes().begin(), prev.boxes().end(),
                                     prev.pack(pidx)));
        }
        prev = std::move(cur);
    }
}

TEST_CASE("determinism across worker counts") {
    auto rm = std::make_shared<const ReturnMapSpec>(derive_return_map(SuspensionSpec{}));
    ModelHandle model(rm, EvalMode::Floating);
    SubdivisionConfig cfg;
    cfg.seed = 14;
    auto root = BoxCollection::whole_root(2, {-0.75, -0.75, 0, 0}, {0.75, 0.75, 0, 0});
    set_worker_count(1);
    auto a = run_levels(model, root, cfg, 6);
    set_worker_count(3);
    auto b = run_levels(model, root, cfg, 6);
    set_worker_count(1);
    CHECK(a.boxes() == b.boxes());
}

TEST_CASE("box cap raises a resource error") {
    ModelHandle model(DoublingMap{}, EvalMode::Floating);
    SubdivisionConfig cfg;
    cfg.box_cap = 4;
    auto cover = BoxCollection::whole_root(1, {0, 0, 0, 0}, {1, 0, 0, 0});
    cover = subdivide_select(model, cover, cfg);
    cover = subdivide_select(model, cover, cfg);
    CHECK_THROWS_AS(subdivide_select(model, cover, cfg), resource_error);
}

TEST_CASE("cover soundness: post-transient orbit boxes stay inside the cover") {
    auto rm = std::make_shared<const ReturnMapSpec>(derive_return_map(SuspensionSpec{}));
    ModelHandle model(rm, EvalMode::Floating);
    SubdivisionConfig cfg;
    cfg.seed = 15;
    BoxCollection cover = BoxCollection::whole_root(2, {-0.75, -0.75, 0, 0},
                                                    {0.75, 0.75, 0, 0});
    std::vector<BoxCollection> covers;
    for (int k = 0; k < 7; ++k) {
        cover = subdivide_select(model, cover, cfg);
        covers.push_back(cover);
    }
    SplitMix64 rng(2024);
    std::size_t outside = 0, total = 0;
    for (int seed_i = 0; seed_i < 200; ++seed_i) {
        ModelPoint p = ModelPoint::square(-0.75 + 1.5 * rng.next_unit(),
                                          -0.75 + 1.5 * rng.next_unit());
        // transient burn-in, then the tail must lie in every cover
        bool dead = false;
        for (int k = 0; k < 300 && !dead; ++k) {
            auto next = model.step(p);
            if (!next) dead = true;
            else p = *next;
        }
        if (dead) continue;
        for (int k = 0; k < 50 && !dead; ++k) {
            for (const auto& c : covers) {
                ++total;
                if (!c.contains_point(p)) ++outside;
            }
            auto next = model.step(p);
            if (!next) dead = true;
            else p = *next;
        }
    }
    CHECK(total > 10000);
    CHECK(outside == 0);
}

TEST_CASE("fit_classify on geometric and plateau series") {
    VolumeSeries geo;
    for (int k = 0; k < 20; ++k) {
        geo.parameter.push_back(k);
        geo.measure.push_back(std::pow(0.9, k));
    }
    auto res = fit_classify(geo, 5);
    CHECK(res.cls == SeriesClass::DecayToZero);
    CHECK(res.slope == doctest::Approx(std::log(0.9)).epsilon(1e-9));

    VolumeSeries plat;
    for (int k = 10; k <= 20; ++k) {
        plat.parameter.push_back(k);
        plat.measure.push_back(0.3582 + 0.1 * std::pow(2.0, -k));
    }
    auto res2 = fit_classify(plat, 5);
    CHECK(res2.cls == SeriesClass::Plateau);
    CHECK(std::abs(res2.slope) < 0.01);

    VolumeSeries flat;
    for (int k = 0; k < 6; ++k) {
        flat.parameter.push_back(k);
        flat.measure.push_back(0.25);
    }
    auto res3 = fit_classify(flat, 4);
    CHECK(res3.cls == SeriesClass::Plateau);
    CHECK(res3.slope == doctest::Approx(0.0));

    CHECK_THROWS_AS(fit_classify(flat, 10), domain_error);

    VolumeSeries zeros = geo;
    zeros.measure.back() = 0.0;
    CHECK(fit_classify(zeros, 5).cls == SeriesClass::DecayToZero);
}

TEST_CASE("escape fraction: invariant region survives, moved region empties") {
    ModelHandle model(LinearMap1D{0.5, 0.0, -1, 1}, EvalMode::Floating);
    auto inv = escape_fraction(model, {-1, 0, 0, 0}, {1, 0, 0, 0}, 2000, 5, 21);
    CHECK(inv.fraction == 1.0);
    auto out = escape_fraction(model, {0.5, 0, 0, 0}, {1, 0, 0, 0}, 2000, 1, 21);
    CHECK(out.fraction == 0.0);
    CHECK(out.std_error > 0.0);
}

TEST_CASE("escape fraction is deterministic in the seed") {
    auto rm = std::make_shared<const ReturnMapSpec>(derive_return_map(SuspensionSpec{}));
    ModelHandle model(rm, EvalMode::Floating);
    auto a = escape_fraction(model, {-0.75, -0.75, 0, 0}, {0.75, 0.75, 0, 0}, 20000, 2, 77,
                             FlowDirection::Backward);
    auto b = escape_fraction(model, {-0.75, -0.75, 0, 0}, {0.75, 0.75, 0, 0}, 20000, 2, 77,
                             FlowDirection::Backward);
    CHECK(a.fraction == b.fraction);
    CHECK(a.fraction < 0.5);
    CHECK(a.fraction > 0.0);
}

TEST_CASE("backward escape is bounded by the cover measure and both decay") {
    // the sampled cover is an outer approximation of the forward image whose
    // fraction the backward escape estimates; quantization keeps it above
    auto rmspec = derive_return_map(SuspensionSpec{});
    auto rm = std::make_shared<const ReturnMapSpec>(rmspec);
    ModelHandle model(rm, EvalMode::Floating);
    SubdivisionConfig cfg;
    cfg.seed = 31;
    BoxCollection cover;
    auto stats = cross_section_stats(rmspec, 8, cfg, &cover);
    for (int t : {2, 4, 8}) {
        auto mc = escape_fraction(model, {-0.75, -0.75, 0, 0}, {0.75, 0.75, 0, 0}, 20000,
                                  t, 123, FlowDirection::Backward);
        const double cover_fraction = stats.areas[static_cast<std::size_t>(t)] / 2.25;
        CHECK(cover_fraction >= mc.fraction - 3 * mc.std_error);
    }
    // decay on both estimators
    auto mc2 = escape_fraction(model, {-0.75, -0.75, 0, 0}, {0.75, 0.75, 0, 0}, 20000, 2,
                               123, FlowDirection::Backward);
    auto mc6 = escape_fraction(model, {-0.75, -0.75, 0, 0}, {0.75, 0.75, 0, 0}, 20000, 6,
                               123, FlowDirection::Backward);
    CHECK(mc6.fraction < mc2.fraction);
    CHECK(stats.areas[8] < stats.areas[2]);
}

TEST_CASE("trapped volume series: monotone, decaying, cross-validated") {
    SuspensionSpec susp;
    TrapRegion region;
    region.tau_cap = 3.0;
    region.samples_per_box = 2;
    auto series = trapped_volume_series(susp, region, 12.0, 5, 99);
    REQUIRE(series.measure.size() == 13);
    CHECK(series.measure[0] > 0.0);
    for (std::size_t i = 1; i < series.measure.size(); ++i)
        CHECK(series.measure[i] <= series.measure[i - 1]);
    auto cls = fit_classify(series, 5);
    CHECK(cls.cls == SeriesClass::DecayToZero);

    // independent uniform MC vs the stratified fraction at a mid-series time
    auto mc = escape_fraction(susp, region, 40000, 4.0, 1234);
    const double strat = series.fraction[4];
    const double se = std::max(mc.std_error, 1e-4);
    CHECK(std::abs(mc.fraction - strat) <= 3 * se + 0.01);
}

TEST_CASE("singular saturation raises a diagnostic error") {
    // the lorenz interval map with an absurd floor makes every point singular
    LorenzMapSpec spec{PowerLawParams{}};
    spec.singular_floor = 10.0;
    ModelHandle model(spec, EvalMode::Floating);
    SubdivisionConfig cfg;
    auto cover = BoxCollection::whole_root(1, {-0.75, 0, 0, 0}, {0.75, 0, 0, 0});
    CHECK_THROWS_AS(subdivide_select(model, cover, cfg), numeric_error);
}

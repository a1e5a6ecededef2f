#include "doctest.h"

#include <cmath>
#include <set>

#include "anystar/appearance.hpp"
#include "anystar/labelgen.hpp"
#include "oracles.hpp"

using namespace anystar;

namespace {

LabelVolume two_balls() {
    return oracle::ball_phantom({32, 32, 32}, {{10, 10, 10, 6}, {22, 20, 18, 7}});
}

double mean_where(const Image& img, const LabelVolume& L, Label l) {
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t j = 0; j < img.size(); ++j) {
        if (L[j] == l) {
            s += img[j];
            ++n;
        }
    }
    return n ? s / double(n) : 0.0;
}

}  // namespace

TEST_CASE("mode strings round trip") {
    for (auto m : {BackgroundMode::PlainBright, BackgroundMode::PlainRand, BackgroundMode::PerlinShapes}) {
        CHECK(background_mode_from_string(to_string(m)) == m);
    }
    for (auto m : {GeneratorMode::Mix, GeneratorMode::BrightFG_PlainBG, GeneratorMode::RandFG_PlainBG,
                   GeneratorMode::RandFG_PerlinBG}) {
        CHECK(generator_mode_from_string(to_string(m)) == m);
    }
    CHECK_THROWS_AS(generator_mode_from_string("bogus"), std::invalid_argument);
}

TEST_CASE("zero std renders flat instances") {
    const auto L = two_balls();
    GmmParams p{{0.3, 0.7, 0.1}, {0.0, 0.0, 0.0}};
    const Image img = render_foreground(L, p, 1);
    for (std::size_t j = 0; j < L.size(); ++j) {
        if (L[j] == 1) REQUIRE(img[j] == doctest::Approx(0.3f));
        if (L[j] == 2) REQUIRE(img[j] == doctest::Approx(0.7f));
        if (L[j] == 0) REQUIRE(img[j] == 0.0f);
    }
}

TEST_CASE("instance means follow the drawn parameters") {
    const auto L = two_balls();
    GmmParams p{{0.3, 0.7, 0.1}, {0.1, 0.05, 0.0}};
    const Image img = render_foreground(L, p, 2);
    std::size_t n1 = 0;
    for (auto v : L.data()) n1 += v == 1;
    // Five standard errors.
    CHECK(std::abs(mean_where(img, L, 1) - 0.3) < 5.0 * 0.1 / std::sqrt(double(n1)));
    CHECK_THROWS_AS(render_foreground(L, GmmParams{{0.3, 0.1}, {0.0, 0.0}}, 1), std::invalid_argument);
}

TEST_CASE("bright mode keeps the background darker than every instance") {
    AppearanceConfig cfg;
    for (std::uint64_t s = 0; s < 1000; ++s) {
        const auto p = sample_gmm_params(12, BackgroundMode::PlainBright, cfg, s);
        REQUIRE(p.instances() == 12);
        for (int i = 0; i < 12; ++i) {
            REQUIRE(p.means[std::size_t(i)] >= cfg.mean_range[0]);
            REQUIRE(p.means[std::size_t(i)] <= cfg.mean_range[1]);
            REQUIRE(p.background_mean() < p.means[std::size_t(i)]);
        }
        REQUIRE(p.background_mean() >= 0.0);
    }
    cfg.mean_range = {0.0, 0.5};
    CHECK_NOTHROW(sample_gmm_params(3, BackgroundMode::PlainRand, cfg, 0));
}

TEST_CASE("background rendering never touches instances") {
    const auto L = two_balls();
    AppearanceConfig cfg;
    const auto p = sample_gmm_params(2, BackgroundMode::PlainRand, cfg, 4);
    for (auto mode : {BackgroundMode::PlainRand, BackgroundMode::PerlinShapes}) {
        const Image bg = render_background(L, mode, p, cfg, 7);
        std::size_t nonzero = 0;
        for (std::size_t j = 0; j < L.size(); ++j) {
            if (L[j] != 0) REQUIRE(bg[j] == 0.0f);
            else nonzero += bg[j] != 0.0f;
        }
        CHECK(nonzero > 0);
    }
}

TEST_CASE("background sub-categories") {
    AppearanceConfig cfg;
    const Dims d{40, 40, 40};
    const auto one = background_subcategories(d, 1, cfg, 3);
    for (auto v : one.data()) REQUIRE(v == 0);

    for (int b : {2, 5, 10}) {
        const auto cat = background_subcategories(d, b, cfg, 11);
        std::set<int> present;
        for (auto v : cat.data()) present.insert(v);
        CHECK(int(present.size()) <= b);
        CHECK(*present.rbegin() < b);
        CHECK(present.size() >= 2);
    }
    for (std::uint64_t s = 0; s < 200; ++s) {
        const int b = draw_shape_count(cfg, s);
        REQUIRE(b >= 1);
        REQUIRE(b <= cfg.max_background_shapes);
    }
}

TEST_CASE("texture modulation") {
    Image img({48, 48, 48}, 0.5f);
    PerlinSpec spec;
    spec.seed = 21;
    CHECK(modulate_texture(img, spec, 0.0) == img);
    const Image t = modulate_texture(img, spec, 0.5);
    double mean = 0.0;
    for (float v : t.data()) {
        REQUIRE(v >= 0.0f);
        REQUIRE(v <= 1.0f);
        mean += v;
    }
    mean /= double(t.size());
    CHECK(std::abs(mean - 0.5) < 0.05);
    CHECK_FALSE(t == img);
    CHECK_THROWS_AS(modulate_texture(img, spec, 1.5), std::invalid_argument);
}

TEST_CASE("bright foreground generator keeps instances brighter on average") {
    LabelGenConfig lcfg;
    lcfg.canvas_dims = lcfg.output_dims = {48, 48, 48};
    lcfg.base_radius = 5.0;
    AppearanceConfig cfg;
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto L = synthesize_labels(lcfg, s);
        const auto syn = synthesize(L, GeneratorMode::BrightFG_PlainBG, cfg, s);
        CHECK(syn.background == BackgroundMode::PlainBright);
        double fg = 0.0, bg = 0.0;
        std::size_t nf = 0, nb = 0;
        for (std::size_t j = 0; j < L.size(); ++j) {
            if (L[j]) {
                fg += syn.image[j];
                ++nf;
            } else {
                bg += syn.image[j];
                ++nb;
            }
        }
        REQUIRE(nf > 0);
        REQUIRE(nb > 0);
        CHECK(fg / double(nf) > bg / double(nb));
    }
}

TEST_CASE("mix chooses each background about a third of the time") {
    int counts[3] = {0, 0, 0};
    const int trials = 300;
    for (int s = 0; s < trials; ++s) counts[int(resolve_background(GeneratorMode::Mix, std::uint64_t(s)))]++;
    for (int c : counts) CHECK(std::abs(double(c) / trials - 1.0 / 3.0) < 0.07);
    CHECK(resolve_background(GeneratorMode::RandFG_PerlinBG, 1) == BackgroundMode::PerlinShapes);
    CHECK(resolve_background(GeneratorMode::RandFG_PlainBG, 1) == BackgroundMode::PlainRand);
}

TEST_CASE("synthesize output range and determinism") {
    const auto L = two_balls();
    AppearanceConfig cfg;
    for (auto mode : {GeneratorMode::Mix, GeneratorMode::RandFG_PerlinBG}) {
        const auto a = synthesize(L, mode, cfg, 99);
        const auto b = synthesize(L, mode, cfg, 99);
        CHECK(a.image == b.image);
        CHECK(a.image.dims() == L.dims());
        for (float v : a.image.data()) {
            REQUIRE(v >= 0.0f);
            REQUIRE(v <= 1.0f);
        }
    }
    LabelVolume gaps = L;
    for (auto& v : gaps.data())
        if (v == 2) v = 3;
    CHECK_THROWS_AS(synthesize(gaps, GeneratorMode::Mix, cfg, 1), std::invalid_argument);
}

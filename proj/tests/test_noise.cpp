#include "doctest.h"

#include <algorithm>
#include <set>

#include "anystar/noise.hpp"
#include "anystar/rng.hpp"

using namespace anystar;

TEST_CASE("perlin3 is deterministic and bounded") {
    PerlinSpec spec;
    spec.seed = 99;
    const auto a = perlin3(Dims{64, 64, 64}, spec);
    const auto b = perlin3(Dims{64, 64, 64}, spec);
    CHECK(a == b);
    const auto [mn, mx] = std::minmax_element(a.data().begin(), a.data().end());
    CHECK(*mn >= -1.0f);
    CHECK(*mx <= 1.0f);
    CHECK(*mx - *mn > 0.5f);

    for (int octaves = 1; octaves <= 6; ++octaves) {
        PerlinSpec s;
        s.octaves = octaves;
        s.persistence = 1.0;
        s.lattice_period = {2.0, 3.5, 7.0};
        s.seed = static_cast<std::uint64_t>(octaves);
        const auto vol = perlin3(Dims{24, 24, 24}, s);
        for (float v : vol.data()) {
            REQUIRE(v >= -1.0f);
            REQUIRE(v <= 1.0f);
        }
    }
}

TEST_CASE("single-octave perlin vanishes at lattice corners") {
    PerlinSpec spec;
    spec.octaves = 1;
    spec.lattice_period = {8.0, 8.0, 8.0};
    spec.seed = 3;
    const auto p = perlin3(Dims{33, 33, 33}, spec);
    for (int z = 0; z <= 32; z += 8)
        for (int y = 0; y <= 32; y += 8)
            for (int x = 0; x <= 32; x += 8) CHECK(p(x, y, z) == 0.0f);
    int nonzero = 0;
    for (int x = 1; x < 8; ++x) nonzero += p(x, 3, 5) != 0.0f;
    CHECK(nonzero > 0);
}

TEST_CASE("perlin spec validation") {
    PerlinSpec s;
    s.lattice_period[1] = 1.5;
    CHECK_THROWS_AS(perlin3(Dims{4, 4, 4}, s), std::invalid_argument);
    s = PerlinSpec{};
    s.octaves = 0;
    CHECK_THROWS_AS(perlin3(Dims{4, 4, 4}, s), std::invalid_argument);
    s = PerlinSpec{};
    s.persistence = 0.0;
    CHECK_THROWS_AS(perlin3(Dims{4, 4, 4}, s), std::invalid_argument);
}

TEST_CASE("perlin_multichannel") {
    PerlinSpec spec;
    spec.seed = 17;
    const auto one = perlin_multichannel(Dims{16, 16, 16}, 1, spec);
    PerlinSpec s0 = spec;
    s0.seed = perlin_channel_seed(spec.seed, 0);
    CHECK(one.at(0) == perlin3(Dims{16, 16, 16}, s0));

    const auto two = perlin_multichannel(Dims{32, 32, 32}, 2, spec);
    std::size_t differ = 0;
    for (std::size_t i = 0; i < two[0].size(); ++i) differ += two[0][i] != two[1][i];
    CHECK(static_cast<double>(differ) / static_cast<double>(two[0].size()) > 0.99);
    CHECK(perlin_multichannel(Dims{32, 32, 32}, 2, spec)[1] == two[1]);
    CHECK_THROWS_AS(perlin_multichannel(Dims{4, 4, 4}, 0, spec), std::invalid_argument);
}

TEST_CASE("smooth_deform_field contracts") {
    const auto zero = smooth_deform_field(Dims{10, 10, 10}, 4.0, 0.0, 1);
    for (const auto& v : zero.data()) CHECK(v == Vec3{});

    const double max_disp = 3.0, spacing = 5.0;
    const auto f = smooth_deform_field(Dims{31, 27, 20}, spacing, max_disp, 5);
    double largest = 0.0;
    for (const auto& v : f.data()) {
        for (int a = 0; a < 3; ++a) {
            REQUIRE(std::abs(v[a]) <= max_disp);
            largest = std::max(largest, std::abs(v[a]));
        }
    }
    CHECK(largest > 0.5);

    // Slope of a linear interpolant of values in [-m, m] at knots `spacing`
    // apart is at most 2m / spacing.
    const double bound = 2.0 * max_disp / spacing + 1e-9;
    const Dims& d = f.dims();
    for (int z = 0; z < d[2]; ++z)
        for (int y = 0; y < d[1]; ++y)
            for (int x = 0; x < d[0]; ++x) {
                for (int a = 0; a < 3; ++a) {
                    if (x + 1 < d[0]) REQUIRE(std::abs(f(x + 1, y, z)[a] - f(x, y, z)[a]) <= bound);
                    if (y + 1 < d[1]) REQUIRE(std::abs(f(x, y + 1, z)[a] - f(x, y, z)[a]) <= bound);
                    if (z + 1 < d[2]) REQUIRE(std::abs(f(x, y, z + 1)[a] - f(x, y, z)[a]) <= bound);
                }
            }

    CHECK_THROWS_AS(smooth_deform_field(Dims{4, 4, 4}, 1.0, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(smooth_deform_field(Dims{4, 4, 4}, 4.0, -1.0, 1), std::invalid_argument);
}

TEST_CASE("warp") {
    Rng rng(8);
    Image img(Dims{9, 8, 7});
    for (auto& v : img.data()) v = static_cast<float>(rng.uniform());
    LabelVolume L(img.dims());
    for (auto& v : L.data()) v = static_cast<Label>(rng.uniform_int(0, 4));

    SUBCASE("zero field is the identity") {
        DeformField zero(img.dims(), Vec3{});
        CHECK(warp(img, zero, Interp::Trilinear, PadMode::Zero) == img);
        CHECK(warp(img, zero, Interp::Nearest, PadMode::Reflect) == img);
        CHECK(warp(L, zero, PadMode::Zero) == L);
    }
    SUBCASE("integer translation is a shifted copy") {
        DeformField shift(img.dims(), Vec3{2.0, -1.0, 0.0});
        for (PadMode pad : {PadMode::Zero, PadMode::Reflect}) {
            const auto wi = warp(img, shift, Interp::Trilinear, pad);
            const auto wl = warp(L, shift, pad);
            for (int z = 0; z < img.nz(); ++z)
                for (int y = 0; y < img.ny(); ++y)
                    for (int x = 0; x < img.nx(); ++x) {
                        int sx = x + 2, sy = y - 1;
                        const bool inside = img.contains(sx, sy, z);
                        float ei = 0.0f;
                        Label el = 0;
                        if (inside || pad == PadMode::Reflect) {
                            sx = reflect_index(sx, img.nx());
                            sy = reflect_index(sy, img.ny());
                            ei = img(sx, sy, z);
                            el = L(sx, sy, z);
                        }
                        CHECK(wi(x, y, z) == ei);
                        CHECK(wl(x, y, z) == el);
                    }
        }
    }
    SUBCASE("dims mismatch") {
        DeformField bad(Dims{2, 2, 2}, Vec3{});
        CHECK_THROWS_AS(warp(img, bad, Interp::Trilinear, PadMode::Zero), std::invalid_argument);
        CHECK_THROWS_AS(warp(L, bad, PadMode::Zero), std::invalid_argument);
    }
    SUBCASE("warped labels are a subset of the source labels") {
        const auto f = smooth_deform_field(L.dims(), 3.0, 2.5, 77);
        std::set<Label> src(L.data().begin(), L.data().end());
        src.insert(0);
        const auto w = warp(L, f, PadMode::Zero);
        for (Label v : w.data()) CHECK(src.count(v) == 1);
    }
}

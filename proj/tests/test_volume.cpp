#include "doctest.h"

#include <limits>
#include <set>

#include "anystar/noise.hpp"
#include "anystar/rng.hpp"
#include "anystar/volume.hpp"

using namespace anystar;

TEST_CASE("volume invariants") {
    CHECK_THROWS_AS(Image(Dims{0, 4, 4}), std::invalid_argument);
    CHECK_THROWS_AS(Image(Dims{2, 2, 2}, std::vector<float>(7)), std::invalid_argument);
    Image v(Dims{3, 4, 5});
    CHECK(v.size() == 60);
    CHECK(v.index(1, 2, 3) == 1 + 3 * (2 + 4 * 3));
}

TEST_CASE("trilinear_sample") {
    SUBCASE("constant field") {
        Image v(Dims{4, 4, 4}, 0.7f);
        CHECK(trilinear_sample(v, {1.5, 1.5, 1.5}, PadMode::Zero) == doctest::Approx(0.7).epsilon(1e-7));
    }
    SUBCASE("on-grid query returns the voxel") {
        Image v(Dims{5, 5, 5}, 0.0f);
        v(2, 3, 1) = 1.0f;
        CHECK(trilinear_sample(v, {2, 3, 1}, PadMode::Zero) == 1.0);
    }
    SUBCASE("linear interpolation between two voxels") {
        Image v(Dims{2, 1, 1}, std::vector<float>{0.0f, 1.0f});
        CHECK(trilinear_sample(v, {0.25, 0, 0}, PadMode::Zero) == doctest::Approx(0.25));
    }
    SUBCASE("padding") {
        Image v(Dims{4, 1, 1}, std::vector<float>{1, 2, 3, 4});
        CHECK(trilinear_sample(v, {-1, 0, 0}, PadMode::Zero) == 0.0);
        CHECK(trilinear_sample(v, {-1, 0, 0}, PadMode::Reflect) == 1.0);
        CHECK(trilinear_sample(v, {-2, 0, 0}, PadMode::Reflect) == 2.0);
        CHECK(trilinear_sample(v, {5, 0, 0}, PadMode::Reflect) == 3.0);
    }
    SUBCASE("non-finite coordinate") {
        Image v(Dims{2, 2, 2});
        CHECK_THROWS_AS(trilinear_sample(v, {std::nan(""), 0, 0}, PadMode::Zero), std::invalid_argument);
        CHECK_THROWS_AS(trilinear_sample(v, {0, std::numeric_limits<double>::infinity(), 0}, PadMode::Reflect),
                        std::invalid_argument);
    }
}

TEST_CASE("nearest_sample") {
    LabelVolume u(Dims{3, 3, 3}, 3);
    CHECK(nearest_sample(u, {1.2, 0.7, 1.9}, PadMode::Zero) == 3);

    LabelVolume two(Dims{2, 1, 1}, std::vector<Label>{1, 2});
    CHECK(nearest_sample(two, {0.5, 0, 0}, PadMode::Zero) == 1);
    CHECK(nearest_sample(two, {0.51, 0, 0}, PadMode::Zero) == 2);
    CHECK(nearest_sample(two, {40, 0, 0}, PadMode::Zero) == 0);
    CHECK(nearest_sample(two, {-100, 3, 0}, PadMode::Zero) == 0);
    CHECK(nearest_sample(two, {-1, 0, 0}, PadMode::Reflect) == 1);
    CHECK(nearest_sample(two, {2, 0, 0}, PadMode::Reflect) == 2);
    CHECK_THROWS_AS(nearest_sample(two, {std::nan(""), 0, 0}, PadMode::Zero), std::invalid_argument);
}

TEST_CASE("reflect helpers") {
    CHECK(reflect_index(-1, 4) == 0);
    CHECK(reflect_index(-4, 4) == 3);
    CHECK(reflect_index(4, 4) == 3);
    CHECK(reflect_index(8, 4) == 0);
    CHECK(reflect_index(5, 1) == 0);
    CHECK(reflect_tile(-1, 4) == -1);
    CHECK(reflect_tile(-4, 4) == -1);
    CHECK(reflect_tile(-5, 4) == -2);
    CHECK(reflect_tile(3, 4) == 0);
    CHECK(reflect_tile(4, 4) == 1);
}

TEST_CASE("resample_to_grid") {
    SUBCASE("identity dims copy") {
        Image v(Dims{5, 6, 7});
        Rng rng(1);
        for (auto& x : v.data()) x = static_cast<float>(rng.uniform());
        CHECK(resample_to_grid(v, v.dims()) == v);
        LabelVolume L(Dims{5, 6, 7});
        for (auto& x : L.data()) x = static_cast<Label>(rng.uniform_int(0, 9));
        CHECK(resample_to_grid(L, L.dims()) == L);
    }
    SUBCASE("constant label upsampled") {
        LabelVolume L(Dims{8, 8, 8}, 5);
        const auto up = resample_to_grid(L, Dims{16, 16, 16});
        for (Label v : up.data()) CHECK(v == 5);
    }
    SUBCASE("checkerboard round trip 64 -> 128 -> 64") {
        LabelVolume L(Dims{64, 64, 64});
        for (int z = 0; z < 64; ++z)
            for (int y = 0; y < 64; ++y)
                for (int x = 0; x < 64; ++x) L(x, y, z) = 1 + ((x + y + z) & 1);
        const auto up = resample_to_grid(L, Dims{128, 128, 128});
        const auto back = resample_to_grid(up, Dims{64, 64, 64});
        CHECK(back.data() == L.data());
    }
    SUBCASE("zero target dimension") {
        CHECK_THROWS_AS(resample_to_grid(Image(Dims{2, 2, 2}), Dims{0, 2, 2}), std::invalid_argument);
        CHECK_THROWS_AS(resample_to_grid(LabelVolume(Dims{2, 2, 2}), Dims{2, 2, 0}), std::invalid_argument);
    }
    SUBCASE("scalar downsample of a linear ramp stays linear") {
        Image v(Dims{8, 1, 1}, std::vector<float>{0, 1, 2, 3, 4, 5, 6, 7});
        const auto d = resample_to_grid(v, Dims{4, 1, 1});
        CHECK(d[0] == doctest::Approx(0.5));
        CHECK(d[3] == doctest::Approx(6.5));
    }
}

TEST_CASE("nearest warp never invents labels") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        LabelVolume L(Dims{12, 10, 9});
        for (auto& v : L.data()) v = static_cast<Label>(rng.uniform_int(0, 3) * 3);
        std::set<Label> src(L.data().begin(), L.data().end());
        const auto field = smooth_deform_field(L.dims(), 3.0, 4.0, rng.next_u64());
        for (PadMode pad : {PadMode::Zero, PadMode::Reflect}) {
            const auto w = warp(L, field, pad);
            for (Label v : w.data()) {
                CHECK((src.count(v) == 1 || (v == 0 && pad == PadMode::Zero)));
            }
        }
    }
}

TEST_CASE("relabel and counting") {
    LabelVolume L(Dims{4, 1, 1}, std::vector<Label>{0, 7, 3, 7});
    CHECK(count_instances(L) == 2);
    CHECK_FALSE(has_consecutive_ids(L));
    const auto r = relabel_consecutive(L);
    CHECK(r.data() == std::vector<Label>{0, 2, 1, 2});
    CHECK(has_consecutive_ids(r));
}

TEST_CASE("crop window") {
    LabelVolume L(Dims{4, 4, 4});
    L(2, 3, 1) = 9;
    const auto c = crop(L, Dims{1, 2, 0}, Dims{2, 2, 2});
    CHECK(c(1, 1, 1) == 9);
    CHECK_THROWS_AS(crop(L, Dims{3, 0, 0}, Dims{2, 2, 2}), std::invalid_argument);
}

TEST_CASE("rng basics") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng r(3);
    double mean = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const auto k = r.uniform_int(2, 5);
        CHECK(k >= 2);
        CHECK(k <= 5);
        mean += static_cast<double>(r.poisson(100.0));
    }
    CHECK(mean / 20000.0 == doctest::Approx(100.0).epsilon(0.01));
    CHECK(stream_key(1, 2, "crop") != stream_key(1, 2, "affine"));
    CHECK(stream_key(1, 2, "crop") != stream_key(1, 3, "crop"));
}

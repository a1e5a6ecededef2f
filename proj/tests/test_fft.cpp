#include "doctest.h"

#include <algorithm>

#include "anystar/fft.hpp"
#include "anystar/rng.hpp"
#include "oracles.hpp"

using namespace anystar;

TEST_CASE("dft3 of a constant volume puts the sum in the DC bin") {
    Image v(Dims{4, 5, 6}, 2.0f);
    const auto s = dft3(v);
    CHECK(s(0, 0, 0).real() == doctest::Approx(2.0 * 120));
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(std::abs(s[i]) < 1e-9);
}

TEST_CASE("unit impulse has a flat unit spectrum") {
    Image v(Dims{8, 4, 6}, 0.0f);
    v(0, 0, 0) = 1.0f;
    const auto s = dft3(v);
    for (const auto& c : s.data()) CHECK(std::abs(c) == doctest::Approx(1.0));
}

TEST_CASE("dft3 matches direct DFT on 4^3") {
    Rng rng(11);
    ComplexVolume v(Dims{4, 4, 4});
    for (auto& c : v.data()) c = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
    const auto fast = dft3(v);
    const auto slow = oracle::direct_dft(v);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::abs(fast[i] - slow[i]) < 1e-10);
    // Non power-of-two shape as well.
    ComplexVolume w(Dims{3, 5, 2});
    for (auto& c : w.data()) c = Complex(rng.uniform(-1, 1), 0.0);
    const auto fw = dft3(w);
    const auto sw = oracle::direct_dft(w);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(std::abs(fw[i] - sw[i]) < 1e-10);
}

TEST_CASE("round trip is identity on random volumes up to 32^3") {
    Rng rng(5);
    for (Dims d : {Dims{16, 16, 16}, Dims{32, 32, 32}, Dims{7, 9, 11}, Dims{1, 1, 1}}) {
        ComplexVolume v(d);
        double scale = 0.0;
        for (auto& c : v.data()) {
            c = Complex(rng.uniform(-1, 1), 0.0);
            scale = std::max(scale, std::abs(c));
        }
        const auto back = idft3(dft3(v));
        double err = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) err = std::max(err, std::abs(back[i] - v[i]));
        CHECK(err / scale < 1e-6);
    }
}

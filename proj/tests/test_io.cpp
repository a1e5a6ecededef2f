#include "doctest.h"

#include <zlib.h>

#include <cstring>
#include <filesystem>

#include "anystar/io.hpp"
#include "anystar/rng.hpp"

using namespace anystar;
namespace fs = std::filesystem;

namespace {

fs::path tmpdir() {
    const fs::path p = fs::temp_directory_path() / "anystar_test_io";
    fs::create_directories(p);
    return p;
}

Image random_image(Dims d, std::uint64_t seed) {
    Image img(d, 0.0f, {0.5, 1.0, 2.0});
    Rng rng(seed);
    for (auto& v : img.data()) v = static_cast<float>(rng.uniform(-1.0, 2.0));
    return img;
}

template <typename T>
T load_at(const std::vector<std::uint8_t>& b, std::size_t off) {
    T v;
    std::memcpy(&v, b.data() + off, sizeof v);
    return v;
}

std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t off) {
    return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) | (std::uint32_t(b[off + 2]) << 8) | b[off + 3];
}

}  // namespace

TEST_CASE("image round trip in every format") {
    const Image img = random_image({7, 5, 3}, 1);
    for (const char* name : {"a.nii", "a.nii.gz", "a.raw"}) {
        const auto p = (tmpdir() / name).string();
        write_image(p, img);
        const Image back = read_image(p);
        CHECK(back == img);
    }
}

TEST_CASE("nifti header layout") {
    const Image img = random_image({7, 5, 3}, 2);
    const auto p = (tmpdir() / "h.nii").string();
    write_image(p, img);
    const auto b = read_file(p);
    REQUIRE(b.size() == 352 + img.size() * 4);
    CHECK(load_at<std::int32_t>(b, 0) == 348);
    CHECK(load_at<std::int16_t>(b, 40) == 3);
    CHECK(load_at<std::int16_t>(b, 42) == 7);
    CHECK(load_at<std::int16_t>(b, 44) == 5);
    CHECK(load_at<std::int16_t>(b, 46) == 3);
    CHECK(load_at<std::int16_t>(b, 70) == 16);  // float32
    CHECK(load_at<std::int16_t>(b, 72) == 32);
    CHECK(load_at<float>(b, 80) == 0.5f);
    CHECK(load_at<float>(b, 84) == 1.0f);
    CHECK(load_at<float>(b, 88) == 2.0f);
    CHECK(load_at<float>(b, 108) == 352.0f);
    CHECK(std::memcmp(b.data() + 344, "n+1\0", 4) == 0);
    // x-fastest voxel order
    CHECK(load_at<float>(b, 352 + 4 * (2 + 7 * (1 + 5 * 2))) == img(2, 1, 2));

    LabelVolume L({4, 3, 2}, 0);
    L(3, 2, 1) = 65535;
    L(1, 0, 0) = 7;
    const auto lp = (tmpdir() / "l.nii").string();
    write_labels(lp, L);
    const auto lb = read_file(lp);
    CHECK(load_at<std::int16_t>(lb, 70) == 512);  // uint16
    CHECK(load_at<std::int16_t>(lb, 72) == 16);
    CHECK(load_at<std::uint16_t>(lb, 352 + 2 * 1) == 7);
}

TEST_CASE("gzip output is a standard gzip stream") {
    const Image img = random_image({6, 6, 6}, 3);
    const auto p = (tmpdir() / "g.nii.gz").string();
    write_image(p, img);
    gzFile f = gzopen(p.c_str(), "rb");
    REQUIRE(f != nullptr);
    std::vector<std::uint8_t> buf(352 + img.size() * 4 + 16);
    const int n = gzread(f, buf.data(), static_cast<unsigned>(buf.size()));
    gzclose(f);
    CHECK(n == int(352 + img.size() * 4));
    CHECK(load_at<float>(buf, 352) == img[0]);
    // deterministic bytes
    const auto first = read_file(p);
    write_image(p, img);
    CHECK(read_file(p) == first);
}

TEST_CASE("labels round trip and range") {
    LabelVolume L({9, 4, 5}, 0, {1.0, 1.0, 3.0});
    Rng rng(4);
    for (auto& v : L.data()) v = static_cast<Label>(rng.uniform_int(0, 65535));
    for (const char* name : {"l.nii", "l.nii.gz", "l.raw"}) {
        const auto p = (tmpdir() / name).string();
        write_labels(p, L);
        CHECK(read_labels(p) == L);
    }
    L[0] = 65536;
    CHECK_THROWS_AS(write_labels((tmpdir() / "big.nii").string(), L), IoError);
    // non-integral data is not a label volume
    const auto p = (tmpdir() / "f.nii").string();
    write_image(p, random_image({3, 3, 3}, 5));
    CHECK_THROWS_AS(read_labels(p), IoError);
}

TEST_CASE("encoding round trip") {
    StarEncoding enc;
    enc.dims = {5, 4, 3};
    enc.n_rays = 6;
    enc.prob = random_image({5, 4, 3}, 6);
    enc.prob.set_spacing({1, 1, 1});
    Rng rng(7);
    enc.dists.resize(60 * 6);
    for (auto& d : enc.dists) d = static_cast<float>(rng.uniform(0, 20));
    for (const char* name : {"e.nii.gz", "e.raw"}) {
        const auto p = (tmpdir() / name).string();
        write_encoding(p, enc);
        const auto back = read_encoding(p);
        CHECK(back.dims == enc.dims);
        CHECK(back.n_rays == 6);
        CHECK(back.dists == enc.dists);
        CHECK(back.prob == enc.prob);
    }
    const auto b = read_file((tmpdir() / "e.raw").string());
    // channel-major: ray 2 at voxel 11 sits in channel 3
    CHECK(load_at<float>(b, 4 * (60 * 3 + 11)) == enc.dists[11 * 6 + 2]);
}

TEST_CASE("big-endian nifti is read") {
    const Image img = random_image({4, 3, 2}, 8);
    const auto p = (tmpdir() / "le.nii").string();
    write_image(p, img);
    auto b = read_file(p);
    auto flip = [&](std::size_t off, std::size_t n) { std::reverse(b.begin() + long(off), b.begin() + long(off + n)); };
    flip(0, 4);
    for (std::size_t i = 0; i < 8; ++i) flip(40 + 2 * i, 2);
    flip(70, 2);
    flip(72, 2);
    for (std::size_t i = 0; i < 8; ++i) flip(76 + 4 * i, 4);
    flip(108, 4);
    flip(112, 4);
    flip(116, 4);
    for (std::size_t i = 0; i < img.size(); ++i) flip(352 + 4 * i, 4);
    const auto q = (tmpdir() / "be.nii").string();
    write_file(q, b);
    CHECK(read_image(q) == img);
}

TEST_CASE("read errors") {
    CHECK_THROWS_AS(read_image((tmpdir() / "missing.nii").string()), IoError);
    CHECK_THROWS_AS(read_image((tmpdir() / "x.tif").string()), IoError);
    const auto p = (tmpdir() / "short.nii").string();
    write_file(p, std::vector<std::uint8_t>(100, 0));
    CHECK_THROWS_AS(read_image(p), IoError);
    const Image img = random_image({4, 4, 4}, 9);
    const auto q = (tmpdir() / "trunc.nii").string();
    write_image(q, img);
    auto b = read_file(q);
    b.resize(b.size() - 10);
    write_file(q, b);
    CHECK_THROWS_AS(read_image(q), IoError);
    const auto r = (tmpdir() / "nosidecar.raw").string();
    write_file(r, std::vector<std::uint8_t>(64, 0));
    fs::remove(r + ".json");
    CHECK_THROWS_AS(read_image(r), IoError);
    CHECK_THROWS_AS(write_image("/nonexistent-dir/x.nii", img), IoError);
}

TEST_CASE("sha256 known vectors") {
    CHECK(sha256_hex({}) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex({'a', 'b', 'c'}) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    const auto p = (tmpdir() / "abc.bin").string();
    write_file(p, {'a', 'b', 'c'});
    CHECK(sha256_file(p) == sha256_hex({'a', 'b', 'c'}));
}

TEST_CASE("png structure and pixels") {
    const int w = 5, h = 3;
    std::vector<std::uint8_t> px(std::size_t(w * h * 3));
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<std::uint8_t>(i * 7);
    const auto p = (tmpdir() / "t.png").string();
    write_png(p, w, h, 3, px);
    const auto b = read_file(p);
    const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    REQUIRE(std::memcmp(b.data(), sig, 8) == 0);
    std::size_t off = 8;
    std::vector<std::uint8_t> idat;
    std::vector<std::string> types;
    while (off < b.size()) {
        const std::uint32_t len = be32(b, off);
        const std::string type(b.begin() + long(off + 4), b.begin() + long(off + 8));
        types.push_back(type);
        const std::uint32_t crc = be32(b, off + 8 + len);
        CHECK(crc == crc32(0L, b.data() + off + 4, len + 4));
        if (type == "IHDR") {
            CHECK(be32(b, off + 8) == std::uint32_t(w));
            CHECK(be32(b, off + 12) == std::uint32_t(h));
            CHECK(b[off + 16] == 8);
            CHECK(b[off + 17] == 2);
        }
        if (type == "IDAT") idat.insert(idat.end(), b.begin() + long(off + 8), b.begin() + long(off + 8 + len));
        off += 12 + len;
    }
    CHECK(types == std::vector<std::string>{"IHDR", "IDAT", "IEND"});
    std::vector<std::uint8_t> raw(std::size_t(h * (1 + w * 3)));
    uLongf rl = raw.size();
    REQUIRE(uncompress(raw.data(), &rl, idat.data(), uLong(idat.size())) == Z_OK);
    REQUIRE(rl == raw.size());
    for (int y = 0; y < h; ++y) {
        CHECK(raw[std::size_t(y * (1 + w * 3))] == 0);
        for (int i = 0; i < w * 3; ++i) CHECK(raw[std::size_t(y * (1 + w * 3) + 1 + i)] == px[std::size_t(y * w * 3 + i)]);
    }
    CHECK_THROWS_AS(write_png(p, 2, 2, 3, px), std::invalid_argument);
}

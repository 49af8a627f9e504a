#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "sdof/error.hpp"
#include "sdof/imaging.hpp"

using namespace sdof;
using namespace sdof::imaging;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

template <typename Fn>
Errc code_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected sdof::Error");
    return Errc::InvalidArgument;
}

ImageF affine_field(int w, int h, double a, double b, double c) {
    ImageF img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) img.at(x, y) = a * x + b * y + c;
    return img;
}

// Straightforward reading of the 3x3 all-neighbours rule.
BitMask erode_once_reference(const BitMask& m) {
    BitMask out(m.width(), m.height(), 0);
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) {
            bool all = true;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx)
                    all = all && m.contains(x + dx, y + dy) && m.at(x + dx, y + dy);
            out.at(x, y) = all ? 1 : 0;
        }
    return out;
}

}  // namespace

TEST_CASE("raster rejects empty or mismatched buffers") {
    CHECK(code_of([] { Image8(0, 3); }) == Errc::InvalidArgument);
    CHECK(code_of([] { Image8(2, 2, std::vector<std::uint8_t>(3)); }) == Errc::InvalidArgument);
}

TEST_CASE("load_pgm reads binary P5") {
    auto data = bytes_of("P5 2 2 255\n");
    for (std::uint8_t v : {0, 64, 128, 255}) data.push_back(v);
    const auto img = load_pgm(data);
    CHECK(img.width() == 2);
    CHECK(img.height() == 2);
    CHECK(img.at(0, 0) == 0);
    CHECK(img.at(1, 0) == 64);
    CHECK(img.at(0, 1) == 128);
    CHECK(img.at(1, 1) == 255);
}

TEST_CASE("load_pgm reads ASCII P2 with comments") {
    const auto img = load_pgm(bytes_of("P2\n# a comment\n1 1\n255\n7\n"));
    CHECK(img == Image8(1, 1, std::vector<std::uint8_t>{7}));
}

TEST_CASE("load_pgm keeps raw values when maxval is below 255") {
    const auto img = load_pgm(bytes_of("P2 2 1 15 3 15"));
    CHECK(img.at(0, 0) == 3);
    CHECK(img.at(1, 0) == 15);
}

TEST_CASE("load_pgm error paths") {
    CHECK(code_of([] { load_pgm({}); }) == Errc::MalformedHeader);
    CHECK(code_of([] { load_pgm(bytes_of("P7 1 1 255\n\x01")); }) == Errc::MalformedHeader);
    CHECK(code_of([] { load_pgm(bytes_of("P5 2 2 255\n\x01\x02")); }) == Errc::TruncatedData);
    CHECK(code_of([] { load_pgm(bytes_of("P5 1 1 65535\n\x01\x02")); }) == Errc::UnsupportedMaxval);
    CHECK(code_of([] { load_pgm(bytes_of("P2 2 1 255 3")); }) == Errc::TruncatedData);
    CHECK(code_of([] { load_pgm(bytes_of("P5 99999999 99999999 255\n\x01")); }) == Errc::TruncatedData);

    try {
        load_pgm(bytes_of("P5 2 2 255\n\x01\x02"));
    } catch (const Error& e) {
        CHECK(e.position() >= 0);
    }
}

TEST_CASE("PGM round trip is bit exact") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const int w = 1 + static_cast<int>(rng() % 40), h = 1 + static_cast<int>(rng() % 40);
        Image8 img(w, h);
        for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(rng());
        CHECK(load_pgm(write_pgm(img)) == img);
    }
}

TEST_CASE("write_ppm of a red pixel") {
    RgbImage img(1, 1, Rgb{255, 0, 0});
    const auto bytes = write_ppm(img);
    auto expected = bytes_of("P6\n1 1\n255\n");
    expected.insert(expected.end(), {255, 0, 0});
    CHECK(bytes == expected);
    CHECK(load_ppm(bytes) == img);
}

TEST_CASE("PPM round trip") {
    std::mt19937_64 rng(4);
    RgbImage img(7, 5);
    for (auto& p : img.pixels()) p = {static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()),
                                      static_cast<std::uint8_t>(rng())};
    CHECK(load_ppm(write_ppm(img)) == img);
}

TEST_CASE("PBM round trip with row padding") {
    std::mt19937_64 rng(5);
    for (int w : {1, 7, 8, 9, 17}) {
        BitMask m(w, 3);
        for (auto& p : m.pixels()) p = static_cast<std::uint8_t>(rng() & 1);
        const auto bytes = write_pbm(m);
        CHECK(bytes.size() == std::to_string(w).size() + 6 + 3 * static_cast<std::size_t>((w + 7) / 8));
        CHECK(load_pbm(bytes) == m);
    }
    CHECK(code_of([] { load_pbm(bytes_of("P4 9 2\n\x01")); }) == Errc::MalformedPbm);
}

TEST_CASE("to_float converts exactly") {
    const Image8 img(2, 2, std::vector<std::uint8_t>{0, 17, 200, 255});
    const auto f = to_float(img);
    CHECK(f.at(0, 0) == 0.0);
    CHECK(f.at(1, 0) == 17.0);
    CHECK(f.at(0, 1) == 200.0);
    CHECK(f.at(1, 1) == 255.0);
}

TEST_CASE("pyramid dimensions and constant preservation") {
    const ImageF flat(37, 21, 93.5);
    const auto p = build_pyramid(flat, 3);
    REQUIRE(p.size() == 3);
    CHECK(p[1].width() == 18);
    CHECK(p[1].height() == 10);
    CHECK(p[2].width() == 9);
    CHECK(p[2].height() == 5);
    for (const auto& level : p.levels)
        for (double v : level.pixels()) CHECK(v == doctest::Approx(93.5).epsilon(1e-12));

    const auto small = build_pyramid(ImageF(4, 4, 1.0), 2);
    CHECK(small[1].width() == 2);
    CHECK(small[1].height() == 2);
    CHECK(code_of([] { build_pyramid(ImageF(4, 4), 4); }) == Errc::TooManyLevels);
    CHECK(max_pyramid_levels(4, 4) == 3);
}

TEST_CASE("pyramid of a ramp halves the sampling") {
    const auto ramp = affine_field(64, 64, 1.0, 0.0, 0.0);
    const auto p = build_pyramid(ramp, 2);
    // Level-1 pixel i samples level-0 pixel 2i, so the slope is 2 away from
    // the clamped borders, and the symmetric kernel keeps the value exact.
    for (int x = 2; x < 30; ++x) {
        CHECK(p[1].at(x, 10) == doctest::Approx(2.0 * x).epsilon(1e-12));
        CHECK(p[1].at(x + 1, 10) - p[1].at(x, 10) == doctest::Approx(2.0));
    }
}

TEST_CASE("gradient of affine fields is exact in the interior") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int trial = 0; trial < 20; ++trial) {
        const double a = u(rng), b = u(rng), c = u(rng);
        const auto [gx, gy] = gradient(affine_field(9, 7, a, b, c));
        for (int y = 1; y < 6; ++y)
            for (int x = 1; x < 8; ++x) {
                CHECK(std::abs(gx.at(x, y) - a) < 1e-9);
                CHECK(std::abs(gy.at(x, y) - b) < 1e-9);
            }
        // One-sided differences are also exact for linear data.
        CHECK(std::abs(gx.at(0, 0) - a) < 1e-9);
        CHECK(std::abs(gy.at(8, 6) - b) < 1e-9);
    }
    const auto [zx, zy] = gradient(ImageF(5, 5, 3.0));
    for (double v : zx.pixels()) CHECK(v == 0.0);
    for (double v : zy.pixels()) CHECK(v == 0.0);
    CHECK(code_of([] { gradient(ImageF(2, 5)); }) == Errc::ImageTooSmall);
}

TEST_CASE("bilinear sampling") {
    ImageF img(2, 2, std::vector<double>{0, 10, 20, 40});
    CHECK(bilinear_sample(img, 0, 0) == 0.0);
    CHECK(bilinear_sample(img, 0.5, 0) == 5.0);
    CHECK(bilinear_sample(img, 1, 1) == 40.0);
    CHECK(bilinear_sample(img, 0.5, 0.5) == doctest::Approx(17.5));
    CHECK(code_of([&] { bilinear_sample(img, 1.01, 0); }) == Errc::OutOfBounds);
    CHECK(code_of([&] { bilinear_sample(img, 0, -0.01); }) == Errc::OutOfBounds);

    std::mt19937_64 rng(8);
    ImageF noise(6, 4);
    for (auto& v : noise.pixels()) v = static_cast<double>(rng() % 256);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 6; ++x) CHECK(bilinear_sample(noise, x, y) == noise.at(x, y));
}

TEST_CASE("erosion of a full 5x5 leaves the inner 3x3") {
    const BitMask full(5, 5, 1);
    const auto e = erode(full, 1);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x) CHECK(e.at(x, y) == ((x >= 1 && x <= 3 && y >= 1 && y <= 3) ? 1 : 0));
    CHECK(count_set(erode(full, 2)) == 1);
    CHECK(count_set(erode(BitMask(4, 4, 0), 3)) == 0);
    CHECK(erode(full, 0) == full);
}

TEST_CASE("erosion matches the reference rule, is monotone and composes") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 40; ++trial) {
        BitMask m(3 + static_cast<int>(rng() % 12), 3 + static_cast<int>(rng() % 12));
        for (auto& p : m.pixels()) p = (rng() % 5) != 0;
        CHECK(erode(m, 1) == erode_once_reference(m));
        std::size_t prev = count_set(m);
        for (int k = 1; k <= 4; ++k) {
            const std::size_t now = count_set(erode(m, k));
            CHECK(now <= prev);
            prev = now;
        }
        CHECK(erode(m, 3) == erode(erode(m, 1), 2));
    }
}

#include "sdof/imaging.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string_view>

namespace sdof::imaging {

namespace {

// Tokenizer for Netpbm headers: whitespace-separated tokens, '#' comments
// run to end of line.
class HeaderReader {
public:
    HeaderReader(std::span<const std::uint8_t> bytes, Errc malformed)
        : bytes_(bytes), malformed_(malformed) {}

    std::size_t offset() const { return pos_; }

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const auto c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
            } else if (is_space(c)) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::string_view magic() {
        if (bytes_.size() < 2 || bytes_[0] != 'P')
            throw Error(malformed_, "missing magic number", {}, 0);
        pos_ = 2;
        return {reinterpret_cast<const char*>(bytes_.data()), 2};
    }

    // Unsigned decimal header field.
    long number(const char* what) {
        skip_space_and_comments();
        const std::size_t start = pos_;
        long value = 0;
        while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > 1'000'000'000L)
                throw Error(malformed_, std::string(what) + " is too large", {}, static_cast<std::int64_t>(start));
            ++pos_;
        }
        if (pos_ == start)
            throw Error(malformed_, std::string("expected ") + what, {}, static_cast<std::int64_t>(start));
        return value;
    }

    // Exactly one whitespace byte separates the header from binary data.
    void single_separator() {
        if (pos_ >= bytes_.size() || !is_space(bytes_[pos_]))
            throw Error(malformed_, "expected whitespace after header", {}, static_cast<std::int64_t>(pos_));
        ++pos_;
    }

    static bool is_space(std::uint8_t c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
    }

private:
    std::span<const std::uint8_t> bytes_;
    Errc malformed_;
    std::size_t pos_ = 0;
};

void check_dims(long w, long h, Errc code, std::size_t offset) {
    if (w < 1 || h < 1)
        throw Error(code, "image dimensions must be positive", {}, static_cast<std::int64_t>(offset));
}

std::vector<std::uint8_t> header_bytes(std::string_view magic, int w, int h, int maxval) {
    std::string header(magic);
    header += "\n" + std::to_string(w) + " " + std::to_string(h) + "\n";
    if (maxval > 0) header += std::to_string(maxval) + "\n";
    return {header.begin(), header.end()};
}

}  // namespace

Image8 load_pgm(std::span<const std::uint8_t> bytes) {
    HeaderReader reader(bytes, Errc::MalformedHeader);
    const auto magic = reader.magic();
    const bool binary = magic == "P5";
    if (!binary && magic != "P2") throw Error(Errc::MalformedHeader, "not a PGM (expected P5 or P2)", {}, 0);

    const long w = reader.number("width");
    const long h = reader.number("height");
    check_dims(w, h, Errc::MalformedHeader, reader.offset());
    const std::size_t maxval_at = reader.offset();
    const long maxval = reader.number("maxval");
    if (maxval == 0) throw Error(Errc::MalformedHeader, "maxval must be positive", {}, static_cast<std::int64_t>(maxval_at));
    if (maxval > 255)
        throw Error(Errc::UnsupportedMaxval, "maxval " + std::to_string(maxval) + " exceeds 255", {},
                    static_cast<std::int64_t>(maxval_at));

    const std::size_t count = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    const std::size_t data_start = reader.offset();
    // Every sample needs at least one byte, in either encoding.
    if (bytes.size() - data_start < count)
        throw Error(Errc::TruncatedData,
                    "expected " + std::to_string(count) + " samples, only " +
                        std::to_string(bytes.size() - data_start) + " bytes remain",
                    {}, static_cast<std::int64_t>(bytes.size()));
    std::vector<std::uint8_t> pixels(count);
    if (binary) {
        reader.single_separator();
        const std::size_t start = reader.offset();
        if (bytes.size() - start < count)
            throw Error(Errc::TruncatedData,
                        "expected " + std::to_string(count) + " pixel bytes, found " + std::to_string(bytes.size() - start),
                        {}, static_cast<std::int64_t>(bytes.size()));
        std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(start), count, pixels.begin());
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            reader.skip_space_and_comments();
            if (reader.offset() >= bytes.size())
                throw Error(Errc::TruncatedData, "ran out of ASCII samples at sample " + std::to_string(i), {},
                            static_cast<std::int64_t>(reader.offset()));
            const std::size_t at = reader.offset();
            const long v = reader.number("sample");
            if (v > maxval)
                throw Error(Errc::MalformedHeader, "sample exceeds maxval", {}, static_cast<std::int64_t>(at));
            pixels[i] = static_cast<std::uint8_t>(v);
        }
    }
    return Image8(static_cast<int>(w), static_cast<int>(h), std::move(pixels));
}

std::vector<std::uint8_t> write_pgm(const Image8& image) {
    auto out = header_bytes("P5", image.width(), image.height(), 255);
    out.insert(out.end(), image.pixels().begin(), image.pixels().end());
    return out;
}

std::vector<std::uint8_t> write_ppm(const RgbImage& image) {
    if (image.empty()) throw Error(Errc::InvalidArgument, "cannot write a zero-area image");
    auto out = header_bytes("P6", image.width(), image.height(), 255);
    out.reserve(out.size() + image.pixels().size() * 3);
    for (const Rgb& p : image.pixels()) {
        out.push_back(p.r);
        out.push_back(p.g);
        out.push_back(p.b);
    }
    return out;
}

RgbImage load_ppm(std::span<const std::uint8_t> bytes) {
    HeaderReader reader(bytes, Errc::MalformedHeader);
    if (reader.magic() != "P6") throw Error(Errc::MalformedHeader, "not a binary PPM", {}, 0);
    const long w = reader.number("width");
    const long h = reader.number("height");
    check_dims(w, h, Errc::MalformedHeader, reader.offset());
    const std::size_t maxval_at = reader.offset();
    const long maxval = reader.number("maxval");
    if (maxval == 0 || maxval > 255)
        throw Error(Errc::UnsupportedMaxval, "only 8-bit PPM is supported", {}, static_cast<std::int64_t>(maxval_at));
    reader.single_separator();
    const std::size_t count = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    const std::size_t start = reader.offset();
    if (bytes.size() - start < count * 3)
        throw Error(Errc::TruncatedData, "PPM payload is truncated", {}, static_cast<std::int64_t>(bytes.size()));
    std::vector<Rgb> pixels(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto* p = bytes.data() + start + 3 * i;
        pixels[i] = {p[0], p[1], p[2]};
    }
    return RgbImage(static_cast<int>(w), static_cast<int>(h), std::move(pixels));
}

BitMask load_pbm(std::span<const std::uint8_t> bytes) {
    HeaderReader reader(bytes, Errc::MalformedPbm);
    if (reader.magic() != "P4") throw Error(Errc::MalformedPbm, "not a binary PBM (expected P4)", {}, 0);
    const long w = reader.number("width");
    const long h = reader.number("height");
    check_dims(w, h, Errc::MalformedPbm, reader.offset());
    reader.single_separator();
    const std::size_t stride = (static_cast<std::size_t>(w) + 7) / 8;
    const std::size_t start = reader.offset();
    if (bytes.size() - start < stride * static_cast<std::size_t>(h))
        throw Error(Errc::MalformedPbm, "PBM payload is truncated", {}, static_cast<std::int64_t>(bytes.size()));
    BitMask mask(static_cast<int>(w), static_cast<int>(h), 0);
    for (int y = 0; y < h; ++y) {
        const auto* row = bytes.data() + start + stride * static_cast<std::size_t>(y);
        for (int x = 0; x < w; ++x) mask.at(x, y) = (row[x / 8] >> (7 - x % 8)) & 1U;
    }
    return mask;
}

std::vector<std::uint8_t> write_pbm(const BitMask& mask) {
    auto out = header_bytes("P4", mask.width(), mask.height(), 0);
    const std::size_t stride = (static_cast<std::size_t>(mask.width()) + 7) / 8;
    for (int y = 0; y < mask.height(); ++y) {
        std::vector<std::uint8_t> row(stride, 0);
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) row[x / 8] |= static_cast<std::uint8_t>(1U << (7 - x % 8));
        out.insert(out.end(), row.begin(), row.end());
    }
    return out;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open " + path, path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write " + path, path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::IoError, "write failed for " + path, path);
}

ImageF to_float(const Image8& image) {
    std::vector<double> pixels(image.pixels().begin(), image.pixels().end());
    return ImageF(image.width(), image.height(), std::move(pixels));
}

RgbImage to_rgb(const Image8& image) {
    std::vector<Rgb> pixels;
    pixels.reserve(image.pixels().size());
    for (auto v : image.pixels()) pixels.push_back({v, v, v});
    return RgbImage(image.width(), image.height(), std::move(pixels));
}

int max_pyramid_levels(int width, int height, int min_size) {
    int levels = 0;
    while (width >= std::max(min_size, 1) && height >= std::max(min_size, 1)) {
        ++levels;
        width /= 2;
        height /= 2;
    }
    return levels;
}

namespace {

constexpr std::array<double, 5> kBinomial = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};

ImageF downsample(const ImageF& src) {
    const int w = src.width();
    const int h = src.height();
    const int dw = w / 2;
    const int dh = h / 2;

    // Horizontal pass only at the even columns kept by decimation.
    ImageF horiz(dw, h);
    for (int y = 0; y < h; ++y) {
        const auto row = src.row(y);
        for (int xo = 0; xo < dw; ++xo) {
            const int x = 2 * xo;
            double acc = 0.0;
            for (int k = -2; k <= 2; ++k) acc += kBinomial[k + 2] * row[std::clamp(x + k, 0, w - 1)];
            horiz.at(xo, y) = acc;
        }
    }
    ImageF out(dw, dh);
    for (int yo = 0; yo < dh; ++yo) {
        const int y = 2 * yo;
        for (int xo = 0; xo < dw; ++xo) {
            double acc = 0.0;
            for (int k = -2; k <= 2; ++k) acc += kBinomial[k + 2] * horiz.at(xo, std::clamp(y + k, 0, h - 1));
            out.at(xo, yo) = acc;
        }
    }
    return out;
}

}  // namespace

Pyramid build_pyramid(const ImageF& image, int levels) {
    if (levels < 1) throw Error(Errc::InvalidArgument, "pyramid needs at least one level");
    if (image.empty()) throw Error(Errc::InvalidArgument, "pyramid input is empty");
    if (levels > max_pyramid_levels(image.width(), image.height()))
        throw Error(Errc::TooManyLevels, std::to_string(levels) + " levels would produce a zero-size level");
    Pyramid pyr;
    pyr.levels.reserve(static_cast<std::size_t>(levels));
    pyr.levels.push_back(image);
    for (int k = 1; k < levels; ++k) pyr.levels.push_back(downsample(pyr.levels.back()));
    return pyr;
}

std::pair<ImageF, ImageF> gradient(const ImageF& image) {
    const int w = image.width();
    const int h = image.height();
    if (w < 3 || h < 3) throw Error(Errc::ImageTooSmall, "gradient needs at least 3x3 pixels");
    ImageF gx(w, h);
    ImageF gy(w, h);
    for (int y = 0; y < h; ++y) {
        const auto row = image.row(y);
        auto out = gx.row(y);
        out[0] = row[1] - row[0];
        for (int x = 1; x < w - 1; ++x) out[x] = 0.5 * (row[x + 1] - row[x - 1]);
        out[w - 1] = row[w - 1] - row[w - 2];
    }
    for (int y = 0; y < h; ++y) {
        const int up = y == 0 ? 0 : y - 1;
        const int down = y == h - 1 ? h - 1 : y + 1;
        const double scale = (y == 0 || y == h - 1) ? 1.0 : 0.5;
        const auto a = image.row(up);
        const auto b = image.row(down);
        auto out = gy.row(y);
        for (int x = 0; x < w; ++x) out[x] = scale * (b[x] - a[x]);
    }
    return {std::move(gx), std::move(gy)};
}

double bilinear_sample(const ImageF& image, double x, double y) {
    if (!(x >= 0.0 && y >= 0.0 && x <= image.width() - 1 && y <= image.height() - 1))
        throw Error(Errc::OutOfBounds, "sample position outside image");
    const int x0 = std::min(static_cast<int>(x), image.width() - 1);
    const int y0 = std::min(static_cast<int>(y), image.height() - 1);
    const int x1 = std::min(x0 + 1, image.width() - 1);
    const int y1 = std::min(y0 + 1, image.height() - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const double top = image.at(x0, y0) + fx * (image.at(x1, y0) - image.at(x0, y0));
    const double bottom = image.at(x0, y1) + fx * (image.at(x1, y1) - image.at(x0, y1));
    return top + fy * (bottom - top);
}

BitMask erode(const BitMask& mask, int iterations) {
    if (iterations < 0) throw Error(Errc::InvalidArgument, "erosion iterations must be non-negative");
    BitMask current = mask;
    const int w = mask.width();
    const int h = mask.height();
    for (int it = 0; it < iterations; ++it) {
        BitMask next(w, h, 0);
        for (int y = 1; y < h - 1; ++y) {
            for (int x = 1; x < w - 1; ++x) {
                bool keep = true;
                for (int dy = -1; dy <= 1 && keep; ++dy)
                    for (int dx = -1; dx <= 1 && keep; ++dx) keep = current.at(x + dx, y + dy) != 0;
                next.at(x, y) = keep ? 1 : 0;
            }
        }
        current = std::move(next);
    }
    return current;
}

std::size_t count_set(const BitMask& mask) {
    return static_cast<std::size_t>(
        std::count_if(mask.pixels().begin(), mask.pixels().end(), [](std::uint8_t v) { return v != 0; }));
}

}  // namespace sdof::imaging

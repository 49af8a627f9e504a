#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sdof/error.hpp"

namespace sdof::imaging {

/// Row-major raster with a fixed element type. Width and height are at least 1.
template <typename T>
class Raster {
public:
    using value_type = T;

    Raster() = default;
    Raster(int width, int height, T fill = T{});
    Raster(int width, int height, std::vector<T> pixels);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return pixels_.empty(); }

    T& at(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
    const T& at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }

    std::span<T> row(int y) { return {pixels_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)}; }
    std::span<const T> row(int y) const { return {pixels_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)}; }

    std::vector<T>& pixels() noexcept { return pixels_; }
    const std::vector<T>& pixels() const noexcept { return pixels_; }

    bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> pixels_;
};

template <typename T>
Raster<T>::Raster(int width, int height, T fill) : width_(width), height_(height) {
    if (width < 1 || height < 1) throw Error(Errc::InvalidArgument, "raster dimensions must be positive");
    pixels_.assign(static_cast<std::size_t>(width) * height, fill);
}

template <typename T>
Raster<T>::Raster(int width, int height, std::vector<T> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width < 1 || height < 1) throw Error(Errc::InvalidArgument, "raster dimensions must be positive");
    if (pixels_.size() != static_cast<std::size_t>(width) * height)
        throw Error(Errc::InvalidArgument, "pixel buffer length must equal width*height");
}

using Image8 = Raster<std::uint8_t>;
using ImageF = Raster<double>;

/// Binary mask; a set pixel belongs to the region.
using BitMask = Raster<std::uint8_t>;

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

using RgbImage = Raster<Rgb>;

/// Level 0 is full resolution; each further level halves both dimensions.
struct Pyramid {
    std::vector<ImageF> levels;

    std::size_t size() const noexcept { return levels.size(); }
    const ImageF& operator[](std::size_t k) const { return levels[k]; }
};

// Netpbm I/O. Readers throw sdof::Error carrying the byte offset of the fault.
Image8 load_pgm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> write_pgm(const Image8& image);
std::vector<std::uint8_t> write_ppm(const RgbImage& image);
RgbImage load_ppm(std::span<const std::uint8_t> bytes);
BitMask load_pbm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> write_pbm(const BitMask& mask);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

ImageF to_float(const Image8& image);
RgbImage to_rgb(const Image8& image);

/// Largest level count whose coarsest level is at least `min_size` pixels
/// in each dimension.
int max_pyramid_levels(int width, int height, int min_size = 1);

/// Separable (1,4,6,4,1)/16 smoothing with clamped borders, then 2x decimation.
Pyramid build_pyramid(const ImageF& image, int levels);

/// Central differences in the interior, one-sided differences on the border.
std::pair<ImageF, ImageF> gradient(const ImageF& image);

/// Bilinear interpolation; requires 0 <= x <= width-1 and 0 <= y <= height-1.
double bilinear_sample(const ImageF& image, double x, double y);

/// 3x3 square erosion; pixels outside the mask count as unset.
BitMask erode(const BitMask& mask, int iterations);

std::size_t count_set(const BitMask& mask);

}  // namespace sdof::imaging

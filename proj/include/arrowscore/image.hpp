#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

#include <arrowscore/error.hpp>

namespace arrowscore {

/// Row-major 2-D array; (x, y) indexing with x the column.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int width, int height, T fill = T{})
        : width_(width), height_(height),
          data_(static_cast<std::size_t>(checked(width, height)), fill) {}

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& operator()(int x, int y) { return data_[index(x, y)]; }
    const T& operator()(int x, int y) const { return data_[index(x, y)]; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }
    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    std::vector<T>& values() { return data_; }
    const std::vector<T>& values() const { return data_; }

    template <typename U>
    bool same_shape(const Grid<U>& other) const {
        return width_ == other.width() && height_ == other.height();
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    static long long checked(int width, int height) {
        require(width >= 0 && height >= 0, "grid dimensions must be non-negative");
        return static_cast<long long>(width) * height;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

using Rgb = std::array<std::uint8_t, 3>;

/// 8-bit sRGB image, interleaved RGB.
class RgbImage {
public:
    RgbImage() = default;
    RgbImage(int width, int height, Rgb fill = {255, 255, 255}) : pixels_(width, height, fill) {}

    int width() const { return pixels_.width(); }
    int height() const { return pixels_.height(); }
    bool empty() const { return pixels_.empty(); }

    Rgb& operator()(int x, int y) { return pixels_(x, y); }
    const Rgb& operator()(int x, int y) const { return pixels_(x, y); }
    bool contains(int x, int y) const { return pixels_.contains(x, y); }

    const Grid<Rgb>& grid() const { return pixels_; }
    Grid<Rgb>& grid() { return pixels_; }

    friend bool operator==(const RgbImage&, const RgbImage&) = default;

private:
    Grid<Rgb> pixels_;
};

/// Bilinear sample at continuous position (x, y) under the pixel-center
/// convention (pixel i has its center at i + 0.5). Positions outside
/// [0, width) x [0, height) return `outside`.
Rgb sample_bilinear(const RgbImage& image, double x, double y, Rgb outside = {255, 255, 255});

/// Image rotated 90 degrees clockwise (pixel (x, y) -> (h - 1 - y, x)).
RgbImage rotate90_cw(const RgbImage& image);

}  // namespace arrowscore

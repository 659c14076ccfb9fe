#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "visionguide/error.hpp"

namespace visionguide {

/// Axis-aligned window in pixel indices. Covers rows [top, top + height) and
/// columns [left, left + width).
struct Rect {
    int top = 0;
    int left = 0;
    int height = 0;
    int width = 0;

    int bottom() const { return top + height; }  // exclusive
    int right() const { return left + width; }   // exclusive

    bool contains(int row, int col) const {
        return row >= top && row < bottom() && col >= left && col < right();
    }

    friend bool operator==(const Rect&, const Rect&) = default;
};

/// Continuous image coordinates: x = column, y = row.
struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

/// Dense row-major 2-D raster.
template <typename T>
class Grid {
public:
    using value_type = T;

    Grid() = default;

    Grid(int width, int height, T fill = T{}) : width_(width), height_(height) {
        if (width < 1 || height < 1) {
            throw InvalidArgument("raster dimensions must be at least 1x1, got " +
                                  std::to_string(width) + "x" + std::to_string(height));
        }
        data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    }

    Grid(int width, int height, std::vector<T> data) : Grid(width, height) {
        if (data.size() != data_.size()) {
            throw DimensionMismatch("raster data size does not match " + std::to_string(width) +
                                    "x" + std::to_string(height));
        }
        data_ = std::move(data);
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& operator()(int row, int col) { return data_[index(row, col)]; }
    const T& operator()(int row, int col) const { return data_[index(row, col)]; }

    std::span<T> row(int r) {
        return {data_.data() + static_cast<std::size_t>(r) * width_, static_cast<std::size_t>(width_)};
    }
    std::span<const T> row(int r) const {
        return {data_.data() + static_cast<std::size_t>(r) * width_, static_cast<std::size_t>(width_)};
    }

    std::span<T> pixels() { return data_; }
    std::span<const T> pixels() const { return data_; }
    const std::vector<T>& data() const { return data_; }

    bool same_shape(const Grid& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    std::size_t index(int row, int col) const {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(col);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// 8-bit colour image, as decoded from disk.
class RgbImage : public Grid<Rgb> {
public:
    using Grid<Rgb>::Grid;
};

/// Single-channel real-valued intensity image, nominal range [0, 255].
class GrayImage : public Grid<double> {
public:
    using Grid<double>::Grid;
};

/// Accumulated window scores; same dimensions as the source image, values >= 0.
class Heatmap : public Grid<double> {
public:
    using Grid<double>::Grid;
};

template <typename G>
concept RealRaster = std::derived_from<G, Grid<double>>;

/// Non-owning read-only view of a rectangular region of a real raster.
class GrayView {
public:
    GrayView(const Grid<double>& source, Rect rect) : source_(&source), rect_(rect) {}
    explicit GrayView(const Grid<double>& source)
        : GrayView(source, Rect{0, 0, source.height(), source.width()}) {}

    int width() const { return rect_.width; }
    int height() const { return rect_.height; }
    const Rect& rect() const { return rect_; }

    double operator()(int row, int col) const {
        return (*source_)(rect_.top + row, rect_.left + col);
    }

private:
    const Grid<double>* source_;
    Rect rect_;
};

/// Round-half-up quantisation to 8 bits, saturating outside [0, 255].
inline std::uint8_t quantize_u8(double v) {
    const double q = std::floor(v + 0.5);
    return static_cast<std::uint8_t>(std::clamp(q, 0.0, 255.0));
}

}  // namespace visionguide

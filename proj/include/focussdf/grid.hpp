// Core grid containers for the FocusSDF toolkit: binary masks, signed
// distance maps and the plain Grid<T> storage they share. All types are
// value types; library functions never mutate their inputs.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace focussdf {

struct GridIndex {
    int row = 0;
    int col = 0;
    friend bool operator==(const GridIndex&, const GridIndex&) = default;
};

/// Row-major 2-D array with bounds-checked construction. Dimensions are
/// fixed at construction; elements stay mutable so builders can fill them.
template <typename T>
class Grid {
public:
    Grid() = default;

    Grid(int height, int width, T fill = T{})
        : height_(height), width_(width), data_(checked_size(height, width), fill) {}

    static Grid from_data(int height, int width, std::vector<T> data) {
        Grid g;
        g.height_ = height;
        g.width_ = width;
        if (data.size() != checked_size(height, width))
            throw std::invalid_argument("Grid::from_data: data length does not match height*width");
        g.data_ = std::move(data);
        return g;
    }

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return data_.size(); }

    T& operator()(int r, int c) { return data_[index(r, c)]; }
    const T& operator()(int r, int c) const { return data_[index(r, c)]; }
    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    std::vector<T>& data() noexcept { return data_; }
    const std::vector<T>& data() const noexcept { return data_; }

    bool in_bounds(int r, int c) const noexcept {
        return r >= 0 && r < height_ && c >= 0 && c < width_;
    }

    template <typename U>
    bool same_shape(const Grid<U>& other) const noexcept {
        return height_ == other.height() && width_ == other.width();
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    static std::size_t checked_size(int height, int width) {
        if (height < 1 || width < 1)
            throw std::invalid_argument("Grid: height and width must be >= 1");
        return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
    }

    std::size_t index(int r, int c) const { return static_cast<std::size_t>(r) * width_ + c; }

    int height_ = 0;
    int width_ = 0;
    std::vector<T> data_;
};

using DistanceMap = Grid<double>;  // nonnegative distances, zero exactly at seeds
using WeightMap = Grid<double>;    // per-pixel loss weights in (0, 1]

/// Binary foreground/background labels; every element is exactly 0 or 1.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int height, int width) : cells_(height, width, std::uint8_t{0}) {}

    static BinaryMask from_data(int height, int width, std::vector<std::uint8_t> labels) {
        for (std::uint8_t v : labels)
            if (v > 1)
                throw std::invalid_argument("BinaryMask: labels must be 0 or 1");
        BinaryMask m;
        m.cells_ = Grid<std::uint8_t>::from_data(height, width, std::move(labels));
        return m;
    }

    int height() const noexcept { return cells_.height(); }
    int width() const noexcept { return cells_.width(); }
    std::size_t size() const noexcept { return cells_.size(); }

    std::uint8_t operator()(int r, int c) const { return cells_(r, c); }
    std::uint8_t operator[](std::size_t i) const { return cells_[i]; }

    void set(int r, int c, bool foreground) { cells_(r, c) = foreground ? 1 : 0; }

    const std::vector<std::uint8_t>& data() const noexcept { return cells_.data(); }

    bool in_bounds(int r, int c) const noexcept { return cells_.in_bounds(r, c); }

    template <typename U>
    bool same_shape(const Grid<U>& g) const noexcept {
        return cells_.same_shape(g);
    }
    bool same_shape(const BinaryMask& o) const noexcept { return cells_.same_shape(o.cells_); }

    std::size_t foreground_count() const noexcept {
        std::size_t n = 0;
        for (std::uint8_t v : cells_.data()) n += v;
        return n;
    }

    BinaryMask complement() const {
        BinaryMask out(height(), width());
        for (std::size_t i = 0; i < size(); ++i) out.cells_[i] = cells_[i] ? 0 : 1;
        return out;
    }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    Grid<std::uint8_t> cells_;
};

/// z-score parameters of a normalized map, in pixel units.
struct NormParams {
    double mean = 0.0;
    double std = 1.0;
    friend bool operator==(const NormParams&, const NormParams&) = default;
};

/// Signed distance map. Values are pixel units unless normalized() is set,
/// in which case norm_params() holds the z-score statistics that undo it.
class SdfMap {
public:
    SdfMap() = default;
    SdfMap(int height, int width, double fill = 0.0) : values_(height, width, fill) {}

    static SdfMap from_data(int height, int width, std::vector<double> values,
                            std::optional<NormParams> norm = std::nullopt) {
        for (double v : values)
            if (!std::isfinite(v))
                throw std::invalid_argument("SdfMap: values must be finite");
        if (norm && !(norm->std > 0.0))
            throw std::invalid_argument("SdfMap: norm std must be > 0");
        SdfMap m;
        m.values_ = Grid<double>::from_data(height, width, std::move(values));
        m.norm_ = norm;
        return m;
    }

    int height() const noexcept { return values_.height(); }
    int width() const noexcept { return values_.width(); }
    std::size_t size() const noexcept { return values_.size(); }

    double& operator()(int r, int c) { return values_(r, c); }
    double operator()(int r, int c) const { return values_(r, c); }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    std::vector<double>& data() noexcept { return values_.data(); }
    const std::vector<double>& data() const noexcept { return values_.data(); }
    const Grid<double>& values() const noexcept { return values_; }

    bool normalized() const noexcept { return norm_.has_value(); }
    const std::optional<NormParams>& norm_params() const noexcept { return norm_; }
    void set_norm_params(std::optional<NormParams> norm) {
        if (norm && !(norm->std > 0.0))
            throw std::invalid_argument("SdfMap: norm std must be > 0");
        norm_ = std::move(norm);
    }

    template <typename U>
    bool same_shape(const Grid<U>& g) const noexcept {
        return values_.same_shape(g);
    }
    bool same_shape(const SdfMap& o) const noexcept { return values_.same_shape(o.values_); }
    bool same_shape(const BinaryMask& m) const noexcept { return m.same_shape(values_); }

    friend bool operator==(const SdfMap&, const SdfMap&) = default;

private:
    Grid<double> values_;
    std::optional<NormParams> norm_;
};

/// Threshold an SDF back into a mask: foreground where value < threshold.
/// Inside is negative, so thresholding at 0 inverts signed_distance().
inline BinaryMask mask_from_sdf(const SdfMap& sdf, double threshold = 0.0) {
    BinaryMask out(sdf.height(), sdf.width());
    for (int r = 0; r < sdf.height(); ++r)
        for (int c = 0; c < sdf.width(); ++c)
            out.set(r, c, sdf(r, c) < threshold);
    return out;
}

}  // namespace focussdf

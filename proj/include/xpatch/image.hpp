#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace xpatch {

/// Interleaved 8-bit image, row-major, `channels` samples per pixel.
class Image {
public:
    Image() = default;
    Image(int height, int width, int channels, std::uint8_t fill = 0)
        : height_(height), width_(width), channels_(channels) {
        if (height < 0 || width < 0 || channels < 1)
            throw std::invalid_argument("Image: bad dimensions");
        data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
    }

    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return channels_; }
    bool same_shape(const Image& o) const {
        return height_ == o.height_ && width_ == o.width_ && channels_ == o.channels_;
    }

    std::uint8_t& at(int row, int col, int ch = 0) { return data_[index(row, col, ch)]; }
    std::uint8_t at(int row, int col, int ch = 0) const { return data_[index(row, col, ch)]; }

    std::span<std::uint8_t> pixel(int row, int col) {
        return {data_.data() + index(row, col, 0), static_cast<std::size_t>(channels_)};
    }
    std::span<const std::uint8_t> pixel(int row, int col) const {
        return {data_.data() + index(row, col, 0), static_cast<std::size_t>(channels_)};
    }

    std::vector<std::uint8_t>& data() { return data_; }
    const std::vector<std::uint8_t>& data() const { return data_; }

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t index(int row, int col, int ch) const {
        return (static_cast<std::size_t>(row) * width_ + col) * channels_ + ch;
    }

    int height_ = 0;
    int width_ = 0;
    int channels_ = 1;
    std::vector<std::uint8_t> data_;
};

/// h x w raster over {0,1}. Cell (row, col) has its center at (col + 0.5, row + 0.5).
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int height, int width) : height_(height), width_(width) {
        if (height < 0 || width < 0) throw std::invalid_argument("BinaryMask: bad dimensions");
        bits_.assign(static_cast<std::size_t>(height) * width, 0);
    }

    int height() const { return height_; }
    int width() const { return width_; }
    bool same_shape(const BinaryMask& o) const { return height_ == o.height_ && width_ == o.width_; }

    bool get(int row, int col) const { return bits_[static_cast<std::size_t>(row) * width_ + col] != 0; }
    void set(int row, int col, bool v = true) {
        bits_[static_cast<std::size_t>(row) * width_ + col] = v ? 1 : 0;
    }
    bool in_frame(int row, int col) const { return row >= 0 && row < height_ && col >= 0 && col < width_; }

    std::size_t area() const {
        std::size_t n = 0;
        for (auto b : bits_) n += b;
        return n;
    }

    std::span<std::uint8_t> row(int r) {
        return {bits_.data() + static_cast<std::size_t>(r) * width_, static_cast<std::size_t>(width_)};
    }
    std::span<const std::uint8_t> row(int r) const {
        return {bits_.data() + static_cast<std::size_t>(r) * width_, static_cast<std::size_t>(width_)};
    }
    const std::vector<std::uint8_t>& bits() const { return bits_; }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<std::uint8_t> bits_;
};

}  // namespace xpatch

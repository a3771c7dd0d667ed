#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>

#include "xpatch/image.hpp"
#include "xpatch/types.hpp"

namespace xpatch {

/// Synchronized visible/infrared capture of one pedestrian.
struct ScenePair {
    Image visible;   // 3 channels
    Image infrared;  // 1 channel
    Box gt_box;
    std::string id;

    int height() const { return visible.height(); }
    int width() const { return visible.width(); }
    void validate() const;
};

/// What the patch material looks like to each sensor.
struct CoverModel {
    std::array<std::uint8_t, 3> visible_value{255, 255, 255};
    std::uint8_t infrared_value = 32;
};

namespace compose {

/// x * (1 - M) + cover * M, per modality.
ScenePair apply(const ScenePair& pair, const BinaryMask& mask, const CoverModel& cover);

/// Single-image form; `value` must have one entry per channel.
Image apply_to_image(const Image& image, const BinaryMask& mask, std::span<const std::uint8_t> value);

BinaryMask union_masks(std::span<const BinaryMask> masks);

/// Shift by (dx, dy) cells. Cells leaving the frame are dropped.
BinaryMask translate_mask(const BinaryMask& mask, int dx, int dy);

/// Peels ceil(fraction * area) cells off the mask boundary, one 4-connected
/// boundary layer at a time, choosing randomly within the last partial layer.
BinaryMask erode_fraction(const BinaryMask& mask, double fraction, std::mt19937_64& rng);

std::size_t cells_to_remove(std::size_t area, double fraction);

/// Cells of `mask` whose full (2*radius+1)^2 neighbourhood lies inside the mask.
BinaryMask erode_square(const BinaryMask& mask, int radius);

}  // namespace compose
}  // namespace xpatch

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "xpatch/harness.hpp"
#include "xpatch/image.hpp"

namespace xpatch::render {

inline constexpr std::array<std::uint8_t, 3> kOutline{255, 0, 0};

/// Cells of the mask with at least one 4-neighbour outside it (frame edge counts as outside).
BinaryMask outline(const BinaryMask& mask);

/// RGB copy of `base` (gray is replicated) with the mask outline painted on.
Image overlay(const Image& base, const BinaryMask& mask, std::array<std::uint8_t, 3> color = kOutline);

/// Grouped bar chart of ASR: one group per lambda, one bar per patch count.
Image sweep_plot(const std::vector<harness::SweepCell>& grid, int height = 240, int width = 480);

}  // namespace xpatch::render

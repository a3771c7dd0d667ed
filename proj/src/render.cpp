#include "xpatch/render.hpp"

#include <algorithm>
#include <cmath>

namespace xpatch::render {

BinaryMask outline(const BinaryMask& mask) {
    BinaryMask out(mask.height(), mask.width());
    for (int r = 0; r < mask.height(); ++r)
        for (int c = 0; c < mask.width(); ++c) {
            if (!mask.get(r, c)) continue;
            bool edge = false;
            for (auto [dr, dc] : {std::pair{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
                int rr = r + dr, cc = c + dc;
                if (!mask.in_frame(rr, cc) || !mask.get(rr, cc)) edge = true;
            }
            if (edge) out.set(r, c, true);
        }
    return out;
}

Image overlay(const Image& base, const BinaryMask& mask, std::array<std::uint8_t, 3> color) {
    if (base.height() != mask.height() || base.width() != mask.width())
        throw std::invalid_argument("overlay: mask and image differ in size");
    Image out(base.height(), base.width(), 3);
    for (int r = 0; r < base.height(); ++r)
        for (int c = 0; c < base.width(); ++c) {
            auto src = base.pixel(r, c);
            auto dst = out.pixel(r, c);
            for (int k = 0; k < 3; ++k) dst[k] = src[base.channels() == 3 ? k : 0];
        }
    auto line = outline(mask);
    for (int r = 0; r < base.height(); ++r)
        for (int c = 0; c < base.width(); ++c)
            if (line.get(r, c)) std::copy(color.begin(), color.end(), out.pixel(r, c).begin());
    return out;
}

namespace {

void fill_rect(Image& img, int x0, int y0, int x1, int y1, std::array<std::uint8_t, 3> color) {
    x0 = std::clamp(x0, 0, img.width());
    x1 = std::clamp(x1, 0, img.width());
    y0 = std::clamp(y0, 0, img.height());
    y1 = std::clamp(y1, 0, img.height());
    for (int r = y0; r < y1; ++r)
        for (int c = x0; c < x1; ++c) std::copy(color.begin(), color.end(), img.pixel(r, c).begin());
}

// A small fixed palette, cycled by patch-count index.
constexpr std::array<std::array<std::uint8_t, 3>, 6> kPalette{{{31, 119, 180},
                                                                {255, 127, 14},
                                                                {44, 160, 44},
                                                                {214, 39, 40},
                                                                {148, 103, 189},
                                                                {140, 86, 75}}};

}  // namespace

Image sweep_plot(const std::vector<harness::SweepCell>& grid, int height, int width) {
    Image img(height, width, 3, 255);
    std::vector<double> lambdas;
    std::vector<int> counts;
    for (const auto& c : grid) {
        if (std::find(lambdas.begin(), lambdas.end(), c.lambda) == lambdas.end()) lambdas.push_back(c.lambda);
        if (std::find(counts.begin(), counts.end(), c.patch_count) == counts.end()) counts.push_back(c.patch_count);
    }
    const int margin = 20;
    const int plot_h = height - 2 * margin, plot_w = width - 2 * margin;
    const std::array<std::uint8_t, 3> black{0, 0, 0}, grey{200, 200, 200};
    // gridlines at 0.25 steps
    for (int k = 1; k <= 4; ++k) {
        int y = height - margin - static_cast<int>(std::lround(plot_h * k / 4.0));
        fill_rect(img, margin, y, width - margin, y + 1, grey);
    }
    if (!lambdas.empty()) {
        const double group_w = static_cast<double>(plot_w) / lambdas.size();
        const double bar_w = group_w * 0.8 / std::max<std::size_t>(1, counts.size());
        for (const auto& c : grid) {
            auto gi = std::find(lambdas.begin(), lambdas.end(), c.lambda) - lambdas.begin();
            auto bi = std::find(counts.begin(), counts.end(), c.patch_count) - counts.begin();
            int x0 = margin + static_cast<int>(std::lround(gi * group_w + group_w * 0.1 + bi * bar_w));
            int x1 = margin + static_cast<int>(std::lround(gi * group_w + group_w * 0.1 + (bi + 1) * bar_w)) - 1;
            int bar_h = static_cast<int>(std::lround(plot_h * std::clamp(c.report.asr, 0.0, 1.0)));
            fill_rect(img, x0, height - margin - bar_h, x1, height - margin, kPalette[bi % kPalette.size()]);
        }
    }
    fill_rect(img, margin, margin, margin + 1, height - margin, black);
    fill_rect(img, margin, height - margin, width - margin, height - margin + 1, black);
    return img;
}

}  // namespace xpatch::render

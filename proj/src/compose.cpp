#include "xpatch/compose.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace xpatch {

void ScenePair::validate() const {
    if (visible.channels() != 3) throw CorpusError("scene " + id + ": visible image must be RGB");
    if (infrared.channels() != 1) throw CorpusError("scene " + id + ": infrared image must be grayscale");
    if (visible.height() != infrared.height() || visible.width() != infrared.width())
        throw CorpusError("scene " + id + ": modality dimensions differ");
    if (!(gt_box.x1 >= 0 && gt_box.y1 >= 0 && gt_box.x2 <= width() && gt_box.y2 <= height() &&
          gt_box.width() > 0 && gt_box.height() > 0))
        throw CorpusError("scene " + id + ": ground-truth box outside frame");
}

namespace compose {

Image apply_to_image(const Image& image, const BinaryMask& mask, std::span<const std::uint8_t> value) {
    if (image.height() != mask.height() || image.width() != mask.width())
        throw std::invalid_argument("apply: mask and image dimensions differ");
    if (value.size() != static_cast<std::size_t>(image.channels()))
        throw std::invalid_argument("apply: cover value channel count mismatch");
    Image out = image;
    for (int r = 0; r < image.height(); ++r) {
        auto bits = mask.row(r);
        for (int c = 0; c < image.width(); ++c)
            if (bits[c]) std::copy(value.begin(), value.end(), out.pixel(r, c).begin());
    }
    return out;
}

ScenePair apply(const ScenePair& pair, const BinaryMask& mask, const CoverModel& cover) {
    ScenePair out;
    out.id = pair.id;
    out.gt_box = pair.gt_box;
    out.visible = apply_to_image(pair.visible, mask, cover.visible_value);
    std::uint8_t inf = cover.infrared_value;
    out.infrared = apply_to_image(pair.infrared, mask, std::span<const std::uint8_t>(&inf, 1));
    return out;
}

BinaryMask union_masks(std::span<const BinaryMask> masks) {
    if (masks.empty()) throw std::invalid_argument("union_masks: no masks");
    BinaryMask out(masks[0].height(), masks[0].width());
    for (const auto& m : masks) {
        if (!m.same_shape(out)) throw std::invalid_argument("union_masks: dimension mismatch");
        for (int r = 0; r < m.height(); ++r) {
            auto dst = out.row(r);
            auto src = m.row(r);
            for (int c = 0; c < m.width(); ++c) dst[c] |= src[c];
        }
    }
    return out;
}

BinaryMask translate_mask(const BinaryMask& mask, int dx, int dy) {
    BinaryMask out(mask.height(), mask.width());
    for (int r = 0; r < mask.height(); ++r)
        for (int c = 0; c < mask.width(); ++c)
            if (mask.get(r, c) && out.in_frame(r + dy, c + dx)) out.set(r + dy, c + dx);
    return out;
}

std::size_t cells_to_remove(std::size_t area, double fraction) {
    if (!(fraction >= 0 && fraction < 1)) throw std::invalid_argument("erode_fraction: fraction must lie in [0, 1)");
    // Guard against 0.1 * 200 landing a hair above 20.
    return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(area) - 1e-9));
}

BinaryMask erode_fraction(const BinaryMask& mask, double fraction, std::mt19937_64& rng) {
    std::size_t remaining = cells_to_remove(mask.area(), fraction);
    BinaryMask out = mask;
    auto is_boundary = [&](int r, int c) {
        static constexpr int dr[] = {-1, 1, 0, 0}, dc[] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
            int rr = r + dr[k], cc = c + dc[k];
            if (!out.in_frame(rr, cc) || !out.get(rr, cc)) return true;
        }
        return false;
    };
    std::vector<std::pair<int, int>> layer;
    while (remaining > 0) {
        layer.clear();
        for (int r = 0; r < out.height(); ++r)
            for (int c = 0; c < out.width(); ++c)
                if (out.get(r, c) && is_boundary(r, c)) layer.emplace_back(r, c);
        if (layer.empty()) break;
        if (layer.size() > remaining) {
            std::shuffle(layer.begin(), layer.end(), rng);
            layer.resize(remaining);
        }
        for (auto [r, c] : layer) out.set(r, c, false);
        remaining -= layer.size();
    }
    return out;
}

BinaryMask erode_square(const BinaryMask& mask, int radius) {
    BinaryMask out(mask.height(), mask.width());
    for (int r = 0; r < mask.height(); ++r)
        for (int c = 0; c < mask.width(); ++c) {
            bool keep = mask.get(r, c);
            for (int dr = -radius; keep && dr <= radius; ++dr)
                for (int dc = -radius; keep && dc <= radius; ++dc)
                    keep = mask.in_frame(r + dr, c + dc) && mask.get(r + dr, c + dc);
            if (keep) out.set(r, c);
        }
    return out;
}

}  // namespace compose
}  // namespace xpatch

#pragma once

#include <functional>
#include <memory>
#include <random>

#include "xpatch/compose.hpp"
#include "xpatch/optimizer.hpp"

namespace xpatch::testing {

// Textured scene whose pixels never equal the default cover values.
inline ScenePair make_scene(int h, int w, Box box, unsigned seed = 1) {
    ScenePair s;
    s.visible = Image(h, w, 3);
    s.infrared = Image(h, w, 1);
    std::mt19937 rng(seed);
    for (auto& v : s.visible.data()) v = static_cast<std::uint8_t>(40 + rng() % 180);
    for (auto& v : s.infrared.data()) v = static_cast<std::uint8_t>(60 + rng() % 180);
    s.gt_box = box;
    s.id = "scene";
    return s;
}

// Salience proportional to weight(x, y) on cells inside the box, normalized.
inline oracle::SalienceMap salience(int h, int w, Box box, const std::function<double(double, double)>& weight) {
    oracle::SalienceMap m{h, w, std::vector<double>(static_cast<std::size_t>(h) * w, 0.0)};
    double total = 0;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            double x = c + 0.5, y = r + 0.5;
            if (x < box.x1 || x > box.x2 || y < box.y1 || y > box.y2) continue;
            double v = weight(x, y);
            m.weights[static_cast<std::size_t>(r) * w + c] = v;
            total += v;
        }
    for (auto& v : m.weights) v /= total;
    return m;
}

inline optimizer::Oracles synthetic_pair(const ScenePair& s, const oracle::SalienceMap& vis,
                                         const oracle::SalienceMap& inf, double base_vis = 0.9,
                                         double base_inf = 0.9) {
    CoverModel cover;
    return {std::make_shared<oracle::SyntheticCoverageOracle>(
                Modality::visible, vis, base_vis, s.gt_box,
                std::vector<std::uint8_t>(cover.visible_value.begin(), cover.visible_value.end())),
            std::make_shared<oracle::SyntheticCoverageOracle>(Modality::infrared, inf, base_inf, s.gt_box,
                                                              std::vector<std::uint8_t>{cover.infrared_value})};
}

// Bit-level comparison of two attack results.
inline bool same_result(const optimizer::AttackResult& a, const optimizer::AttackResult& b) {
    if (a.success != b.success || a.stop_generation != b.stop_generation) return false;
    if (a.best.flat() != b.best.flat() || a.masks != b.masks) return false;
    if (!(a.adv_pair.visible == b.adv_pair.visible) || !(a.adv_pair.infrared == b.adv_pair.infrared)) return false;
    if (a.f_vis_adv != b.f_vis_adv || a.f_inf_adv != b.f_inf_adv || a.queries_used != b.queries_used) return false;
    if (a.best_fitness.joint != b.best_fitness.joint || a.best_fitness.objective != b.best_fitness.objective)
        return false;
    if (a.history.size() != b.history.size()) return false;
    for (std::size_t i = 0; i < a.history.size(); ++i)
        if (a.history[i].to_line() != b.history[i].to_line()) return false;
    return true;
}

}  // namespace xpatch::testing

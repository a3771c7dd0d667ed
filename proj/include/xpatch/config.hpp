#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "xpatch/compose.hpp"
#include "xpatch/fitness.hpp"
#include "xpatch/types.hpp"

namespace xpatch {

enum class TranslateMode { joint, per_patch };

/// Every knob of an attack run. Stored on disk as `key = value` lines.
struct RunConfig {
    int population_size = 30;
    int max_generations = 200;
    double lambda = fitness::kDefaultLambda;
    double thre = fitness::kDefaultThreshold;
    int patch_count = 2;
    int anchors_per_patch = 8;
    double de_F = 0.5;
    double de_CR = 0.7;
    double radius_fraction = 0.16;
    double inner_fraction = 0.3;
    double outer_shrink = 0.8;
    std::vector<Point2> patch_centers{{0.5, 0.35}, {0.5, 0.6}};  // fractions of the detection box
    CoverModel cover;
    int samples_per_segment = 32;
    fitness::Mode fitness_mode = fitness::Mode::joint;
    std::uint64_t seed = 0;
    double jitter_fraction = 0.2;  // initial-population jitter, fraction of the patch radius
    TranslateMode translate_mode = TranslateMode::joint;

    void validate() const;
    void set(const std::string& key, const std::string& value);
    std::string serialize() const;
    static RunConfig parse(const std::string& text);
    static RunConfig load(const std::string& path);

    friend bool operator==(const RunConfig& a, const RunConfig& b) { return a.serialize() == b.serialize(); }
};

/// Vertical placements used when sweeping the patch count.
std::vector<Point2> default_patch_centers(int count);

}  // namespace xpatch

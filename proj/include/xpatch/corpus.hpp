#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "xpatch/compose.hpp"
#include "xpatch/oracle.hpp"

namespace xpatch {

struct RunConfig;

/// Ground truth behind a synthetic scene's two coverage oracles.
struct SyntheticTruth {
    oracle::SalienceMap visible;
    oracle::SalienceMap infrared;
    double base_visible = 0.9;
    double base_infrared = 0.9;
};

struct Corpus {
    std::vector<ScenePair> scenes;
    std::vector<SyntheticTruth> truth;  // empty, or one per scene

    bool synthetic() const { return !truth.empty(); }
    std::size_t size() const { return scenes.size(); }
};

/// Directory layout: vis/<id>.png, inf/<id>.png, annotations.json
/// ({"<id>": [x1, y1, x2, y2]}), plus synthetic.json for synthetic corpora.
Corpus load_corpus(const std::filesystem::path& dir);
void save_corpus(const std::filesystem::path& dir, const Corpus& corpus);

/// Parameters of the procedural scene generator.
struct SyntheticSuiteSpec {
    int count = 20;
    int height = 144;
    int width = 112;
    std::uint64_t seed = 1;
    double background = 0.3;       // salience mass spread evenly over the box
    int blobs_per_modality = 4;    // remaining mass split over Gaussian blobs
    double blob_sigma = 2.0;       // px
    double blob_reach_min = 1.55;  // blob distance from its patch center, in patch radii
    double blob_reach_max = 1.95;
    double base_visible_min = 0.85, base_visible_max = 0.95;
    double base_infrared_min = 0.85, base_infrared_max = 0.95;
    /// Place each infrared blob in the same sector as a visible blob, on the
    /// opposite side of the sector bisector, so one anchor cannot serve both.
    bool paired_conflict = false;
    double conflict_offset = 0.3;  // fraction of the sector half-angle
};

/// 20-scene suite used for the shape ablation and robustness experiments.
SyntheticSuiteSpec standard_suite_spec();
/// Suite whose modalities pull the anchors in different directions.
SyntheticSuiteSpec conflict_suite_spec();

/// Patch layout (centers, radii, regions) is taken from `config`.
Corpus generate_synthetic_corpus(const SyntheticSuiteSpec& spec, const RunConfig& config);

}  // namespace xpatch

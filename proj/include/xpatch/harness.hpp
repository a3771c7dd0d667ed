#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xpatch/config.hpp"
#include "xpatch/corpus.hpp"
#include "xpatch/optimizer.hpp"

namespace xpatch::harness {

/// Oracles for the i-th scene of a corpus.
using OracleProvider = std::function<optimizer::Oracles(std::size_t scene_index)>;

OracleProvider synthetic_provider(const Corpus& corpus, const CoverModel& cover);
OracleProvider shared_provider(optimizer::Oracles oracles);

// ---------------------------------------------------------------- metrics

struct ImageDetections {
    std::vector<Box> ground_truth;
    std::vector<oracle::Detection> detections;
};

/// AP at IoU 0.5 with 11-point interpolated precision. Detections scoring
/// below `score_floor` are discarded first.
double average_precision(std::span<const ImageDetections> images, double score_floor = 0.0);

double median(std::vector<double> values);

// ---------------------------------------------------------------- reports

struct SceneRow {
    std::string id;
    bool included = true;
    std::string note;
    bool success = false;
    bool success_vis = false;
    bool success_inf = false;
    double clean_vis = 0, clean_inf = 0;
    double adv_vis = 0, adv_inf = 0;
    double dis_vis = 0, dis_inf = 0;
    int stop_generation = 0;
    std::uint64_t queries = 0;
    std::uint64_t seed = 0;
};

struct ApPair {
    double clean = 0;
    double adv = 0;
    double drop() const { return clean - adv; }
};

struct ExperimentReport {
    std::string name;
    std::string condition;
    RunConfig config;
    std::vector<SceneRow> rows;
    double asr = 0, asr_vis = 0, asr_inf = 0;
    ApPair ap_visible, ap_infrared;
    std::map<std::string, double> metrics;
    double runtime_seconds = 0;  // kept out of the JSON so reruns are byte-identical

    std::vector<std::string> excluded() const;
    /// Recomputes the ASR fields from the rows.
    void aggregate();
    std::string to_json() const;
    std::string to_csv() const;
};

struct SuiteRun {
    ExperimentReport report;
    std::vector<std::optional<optimizer::AttackResult>> attacks;  // nullopt for excluded scenes
};

struct SuiteOptions {
    int jobs = 1;  // scenes attacked concurrently
    std::function<void(std::size_t scene, const optimizer::ProgressRecord&)> on_progress;
};

std::uint64_t scene_seed(std::uint64_t base_seed, std::size_t scene_index);

/// Attacks every scene and aggregates cross-modal ASR and AP drop.
SuiteRun run_suite(const Corpus& corpus, const OracleProvider& oracles, const RunConfig& config,
                   const SuiteOptions& options = {});

enum class ShapeKind { circle, square, rectangle, triangle, initial };
std::string to_string(ShapeKind k);
ShapeKind parse_shape_kind(const std::string& s);
inline constexpr ShapeKind kAllShapeKinds[] = {ShapeKind::circle, ShapeKind::square, ShapeKind::rectangle,
                                               ShapeKind::triangle, ShapeKind::initial};

/// Non-optimized mask of the given shape for one patch region, with the area
/// of the initial contour.
BinaryMask baseline_mask(const boundary::FeasibleRegion& region, ShapeKind kind, int height, int width,
                         int samples_per_segment);

ExperimentReport fixed_shape_baseline(const Corpus& corpus, const OracleProvider& oracles, const RunConfig& config,
                                      ShapeKind kind, const SuiteOptions& options = {});

struct AblationResult {
    SuiteRun joint;
    SuiteRun sum;
};

/// Same suite, seeds and budget; only fitness_mode differs.
AblationResult fitness_ablation(const Corpus& corpus, const OracleProvider& oracles, const RunConfig& config,
                                const SuiteOptions& options = {});

struct SweepCell {
    double lambda = 0;
    int patch_count = 0;
    ExperimentReport report;
};

std::vector<SweepCell> sweep(const Corpus& corpus, const OracleProvider& oracles, const RunConfig& config,
                             const std::vector<double>& lambdas, const std::vector<int>& patch_counts,
                             const SuiteOptions& options = {});
std::string sweep_to_json(const std::vector<SweepCell>& grid);

/// Saved adversarial masks per scene (one mask per patch), as produced by an attack run.
struct SavedAttack {
    std::string id;
    std::vector<BinaryMask> masks;
};

std::vector<std::optional<SavedAttack>> saved_attacks(const SuiteRun& run);

/// Re-scores saved masks under translation and incompleteness without
/// re-optimizing. First report is the identity condition. A translation of d
/// pixels is tried in the four axis directions; each (scene, direction) pair
/// is one row.
std::vector<ExperimentReport> robustness_eval(const Corpus& corpus, const OracleProvider& oracles,
                                              const std::vector<std::optional<SavedAttack>>& attacks,
                                              const RunConfig& config, const std::vector<int>& translations,
                                              const std::vector<double>& fractions);

/// Re-scores adversarial images through median smoothing of the given window.
ExperimentReport defense_eval(const Corpus& corpus, const OracleProvider& oracles,
                              const std::vector<std::optional<SavedAttack>>& attacks, const RunConfig& config,
                              int window);

/// Pixels inside the mask (eroded by the window radius) that smoothing changed.
std::size_t smoothing_changed_interior(const Image& adversarial, const BinaryMask& mask, int window);

}  // namespace xpatch::harness

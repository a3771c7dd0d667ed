#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "xpatch/boundary.hpp"
#include "xpatch/compose.hpp"
#include "xpatch/config.hpp"
#include "xpatch/fitness.hpp"
#include "xpatch/oracle.hpp"

namespace xpatch::optimizer {

using Region = std::shared_ptr<const boundary::FeasibleRegion>;

struct PatchGene {
    Region region;
    std::vector<AnchorPoint> anchors;
};

/// One candidate: the anchors of every patch, optimized jointly.
struct ShapeGenome {
    std::vector<PatchGene> patches;

    /// x0, y0, x1, y1, ... over all patches in order.
    std::vector<double> flat() const;
    void assign_flat(std::span<const double> values);
    bool all_feasible() const;
    friend bool operator==(const ShapeGenome& a, const ShapeGenome& b) { return a.flat() == b.flat(); }
};

struct Population {
    int generation = 0;
    std::vector<ShapeGenome> members;
    std::vector<fitness::FitnessValue> fitness;
    std::uint64_t rng_seed = 0;

    /// Index of the highest objective; ties go to the lowest index.
    std::size_t best_index() const;
};

struct Oracles {
    std::shared_ptr<oracle::DetectorOracle> visible;
    std::shared_ptr<oracle::DetectorOracle> infrared;

    int max_concurrency() const;
    std::uint64_t total_queries() const;
};

struct CleanScores {
    double visible = 0;
    double infrared = 0;
    std::vector<oracle::Detection> visible_detections;
    std::vector<oracle::Detection> infrared_detections;
};

struct ProgressRecord {
    int generation = 0;
    double best_joint = 0;
    double best_objective = 0;
    double dis_vis = 0;
    double dis_inf = 0;
    std::uint64_t queries = 0;

    /// One line of newline-delimited JSON.
    std::string to_line() const;
};

struct AttackResult {
    bool success = false;
    int stop_generation = 0;
    ShapeGenome best;
    fitness::FitnessValue best_fitness;
    std::vector<BinaryMask> masks;  // one per patch
    ScenePair adv_pair;
    double f_vis_adv = 0;
    double f_inf_adv = 0;
    CleanScores clean;
    std::uint64_t queries_used = 0;
    std::vector<ProgressRecord> history;

    BinaryMask union_mask() const;
};

struct RunOptions {
    int jobs = 1;
    std::function<void(const ProgressRecord&)> on_progress;
};

/// Deterministic random stream for (seed, generation, member).
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t generation, std::uint64_t member);

/// Feasible regions for every patch of `config` placed on `gt_box`.
std::vector<Region> build_regions(const RunConfig& config, const Box& gt_box);

/// Member 0 holds the exact circle anchors; the rest are jittered copies.
Population init_population(const RunConfig& config, std::span<const Region> regions, std::uint64_t seed);

/// DE/rand/1/bin child of member i, repaired back into the feasible regions.
ShapeGenome propose_child(const Population& pop, std::size_t i, double F, double CR, std::mt19937_64& rng);

std::vector<BinaryMask> render_masks(const ShapeGenome& genome, int height, int width, int samples_per_segment);

/// Queries both oracles once on the clean scene.
CleanScores clean_scores(const ScenePair& scene, const Oracles& oracles);

/// Renders, composes and scores one genome: exactly two oracle queries
/// unless the geometry is degenerate (then none, and the worst value).
fitness::FitnessValue evaluate(const ShapeGenome& genome, const ScenePair& scene, const Oracles& oracles,
                               const RunConfig& config, const CleanScores& clean);

/// Scene whose clean score does not exceed the threshold in some modality.
struct SceneRejected : std::runtime_error {
    using std::runtime_error::runtime_error;
};

AttackResult run_attack(const ScenePair& scene, const Oracles& oracles, const RunConfig& config, std::uint64_t seed,
                        const RunOptions& options = {});

}  // namespace xpatch::optimizer

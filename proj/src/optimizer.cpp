#include "xpatch/optimizer.hpp"

#include <algorithm>
#include <exception>

#include <json.hpp>

#include "xpatch/geometry.hpp"

namespace xpatch::optimizer {

std::vector<double> ShapeGenome::flat() const {
    std::vector<double> v;
    for (const auto& p : patches)
        for (Point2 a : p.anchors) {
            v.push_back(a.x);
            v.push_back(a.y);
        }
    return v;
}

void ShapeGenome::assign_flat(std::span<const double> values) {
    std::size_t k = 0;
    for (auto& p : patches)
        for (auto& a : p.anchors) {
            if (k + 2 > values.size()) throw std::invalid_argument("assign_flat: too few values");
            a = {values[k], values[k + 1]};
            k += 2;
        }
    if (k != values.size()) throw std::invalid_argument("assign_flat: length mismatch");
}

bool ShapeGenome::all_feasible() const {
    for (const auto& p : patches)
        for (std::size_t j = 0; j < p.anchors.size(); ++j)
            if (!boundary::feasible(*p.region, static_cast<int>(j), p.anchors[j]).rho()) return false;
    return true;
}

std::size_t Population::best_index() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < fitness.size(); ++i)
        if (fitness[i].objective > fitness[best].objective) best = i;
    return best;
}

int Oracles::max_concurrency() const { return std::min(visible->max_concurrency(), infrared->max_concurrency()); }

std::uint64_t Oracles::total_queries() const { return visible->query_count() + infrared->query_count(); }

std::string ProgressRecord::to_line() const {
    nlohmann::json j = {{"generation", generation}, {"best_joint", best_joint}, {"best_objective", best_objective},
                        {"dis_vis", dis_vis},       {"dis_inf", dis_inf},       {"queries", queries}};
    return j.dump();
}

BinaryMask AttackResult::union_mask() const { return compose::union_masks(masks); }

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t generation, std::uint64_t member) {
    std::uint64_t s = splitmix(seed);
    s = splitmix(s ^ splitmix(generation + 0x632be59bd9b4e019ULL));
    s = splitmix(s ^ splitmix(member + 0x8cb92ba72f3d8dd7ULL));
    return std::mt19937_64(s);
}

std::vector<Region> build_regions(const RunConfig& config, const Box& gt_box) {
    std::vector<Region> regions;
    for (Point2 f : config.patch_centers) {
        Point2 center{gt_box.x1 + f.x * gt_box.width(), gt_box.y1 + f.y * gt_box.height()};
        regions.push_back(std::make_shared<const boundary::FeasibleRegion>(
            boundary::build_region(center, config.radius_fraction * gt_box.height(), config.inner_fraction,
                                   config.anchors_per_patch, gt_box, config.outer_shrink)));
    }
    return regions;
}

Population init_population(const RunConfig& config, std::span<const Region> regions, std::uint64_t seed) {
    if (config.population_size < 4) throw ConfigError("population_size must be >= 4");
    Population pop;
    pop.rng_seed = seed;
    ShapeGenome circle;
    for (const auto& reg : regions) circle.patches.push_back({reg, geometry::initial_anchors(reg->center, reg->radius, reg->n)});
    pop.members.push_back(circle);

    constexpr int kMaxTries = 256;
    for (int m = 1; m < config.population_size; ++m) {
        auto rng = substream(seed, 0, static_cast<std::uint64_t>(m));
        ShapeGenome g = circle;
        for (auto& patch : g.patches) {
            double amp = config.jitter_fraction * patch.region->radius;
            std::uniform_real_distribution<double> jitter(-amp, amp);
            for (std::size_t j = 0; j < patch.anchors.size(); ++j) {
                Point2 base = patch.anchors[j];
                for (int t = 0; t < kMaxTries; ++t) {
                    Point2 q{base.x + jitter(rng), base.y + jitter(rng)};
                    if (boundary::feasible(*patch.region, static_cast<int>(j), q).rho()) {
                        patch.anchors[j] = q;
                        break;
                    }
                }
            }
        }
        pop.members.push_back(std::move(g));
    }
    return pop;
}

ShapeGenome propose_child(const Population& pop, std::size_t i, double F, double CR, std::mt19937_64& rng) {
    const std::size_t q = pop.members.size();
    if (q < 4) throw std::invalid_argument("propose_child: population needs at least 4 members");
    std::uniform_int_distribution<std::size_t> pick(0, q - 1);
    std::size_t r1, r2, r3;
    do r1 = pick(rng); while (r1 == i);
    do r2 = pick(rng); while (r2 == i || r2 == r1);
    do r3 = pick(rng); while (r3 == i || r3 == r1 || r3 == r2);

    const ShapeGenome& parent = pop.members[i];
    const auto x = parent.flat();
    const auto a = pop.members[r1].flat();
    const auto b = pop.members[r2].flat();
    const auto c = pop.members[r3].flat();
    const std::size_t anchors = x.size() / 2;

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick_anchor(0, anchors - 1);
    const std::size_t forced = pick_anchor(rng);
    std::vector<double> trial = x;
    for (std::size_t k = 0; k < anchors; ++k) {
        bool cross = unit(rng) < CR || k == forced;
        if (!cross) continue;
        for (std::size_t d = 2 * k; d < 2 * k + 2; ++d) trial[d] = a[d] + F * (b[d] - c[d]);
    }

    ShapeGenome child = parent;
    child.assign_flat(trial);
    for (std::size_t p = 0; p < child.patches.size(); ++p) {
        auto& patch = child.patches[p];
        for (std::size_t j = 0; j < patch.anchors.size(); ++j)
            patch.anchors[j] = boundary::repair(*patch.region, static_cast<int>(j), patch.anchors[j],
                                                parent.patches[p].anchors[j]);
    }
    return child;
}

std::vector<BinaryMask> render_masks(const ShapeGenome& genome, int height, int width, int samples_per_segment) {
    std::vector<BinaryMask> masks;
    masks.reserve(genome.patches.size());
    for (const auto& p : genome.patches)
        masks.push_back(geometry::rasterize(geometry::close_contour(p.anchors, samples_per_segment), height, width));
    return masks;
}

CleanScores clean_scores(const ScenePair& scene, const Oracles& oracles) {
    CleanScores c;
    c.visible_detections = oracles.visible->detect(scene.visible, Modality::visible);
    c.infrared_detections = oracles.infrared->detect(scene.infrared, Modality::infrared);
    c.visible = oracle::target_score(c.visible_detections, scene.gt_box);
    c.infrared = oracle::target_score(c.infrared_detections, scene.gt_box);
    return c;
}

fitness::FitnessValue evaluate(const ShapeGenome& genome, const ScenePair& scene, const Oracles& oracles,
                               const RunConfig& config, const CleanScores& clean) {
    std::vector<BinaryMask> masks;
    try {
        masks = render_masks(genome, scene.height(), scene.width(), config.samples_per_segment);
    } catch (const GeometryError&) {
        return fitness::degenerate_value();
    }
    ScenePair adv = compose::apply(scene, compose::union_masks(masks), config.cover);
    auto vis = oracles.visible->detect(adv.visible, Modality::visible);
    auto inf = oracles.infrared->detect(adv.infrared, Modality::infrared);
    return fitness::score(clean.visible, oracle::target_score(vis, scene.gt_box), clean.infrared,
                          oracle::target_score(inf, scene.gt_box), config.thre, config.lambda, config.fitness_mode);
}

namespace {

std::vector<fitness::FitnessValue> evaluate_all(std::span<const ShapeGenome> genomes, const ScenePair& scene,
                                                const Oracles& oracles, const RunConfig& config,
                                                const CleanScores& clean, int workers, std::uint64_t& queries) {
    const int n = static_cast<int>(genomes.size());
    std::vector<fitness::FitnessValue> out(genomes.size());
    std::vector<std::exception_ptr> errors(genomes.size());
#pragma omp parallel for num_threads(workers) schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        try {
            out[i] = evaluate(genomes[i], scene, oracles, config, clean);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    for (const auto& f : out)
        if (!f.degenerate) queries += 2;
    return out;
}

ProgressRecord progress(const Population& pop, std::uint64_t queries) {
    const auto& f = pop.fitness[pop.best_index()];
    return {pop.generation, f.joint, f.objective, f.dis_vis, f.dis_inf, queries};
}

}  // namespace

AttackResult run_attack(const ScenePair& scene, const Oracles& oracles, const RunConfig& config, std::uint64_t seed,
                        const RunOptions& options) {
    config.validate();
    scene.validate();
    if (!oracles.visible || !oracles.infrared) throw std::invalid_argument("run_attack: both oracles are required");

    AttackResult result;
    result.clean = clean_scores(scene, oracles);
    std::uint64_t queries = 2;
    if (!(result.clean.visible > config.thre) || !(result.clean.infrared > config.thre))
        throw SceneRejected("scene " + scene.id + " is not detectable above the threshold in both modalities");

    const int workers = std::max(1, std::min(options.jobs, oracles.max_concurrency()));
    auto regions = build_regions(config, scene.gt_box);
    Population pop = init_population(config, regions, seed);
    pop.fitness = evaluate_all(pop.members, scene, oracles, config, result.clean, workers, queries);

    auto emit = [&](const ProgressRecord& rec) {
        result.history.push_back(rec);
        if (options.on_progress) options.on_progress(rec);
    };

    result.stop_generation = config.max_generations;
    for (int k = 0; k < config.max_generations; ++k) {
        pop.generation = k;
        emit(progress(pop, queries));
        const auto& best = pop.fitness[pop.best_index()];
        if (fitness::attack_success(best.f_vis_adv, best.f_inf_adv, config.thre)) {
            result.stop_generation = k;
            break;
        }
        std::vector<ShapeGenome> children;
        children.reserve(pop.members.size());
        for (std::size_t i = 0; i < pop.members.size(); ++i) {
            auto rng = substream(seed, static_cast<std::uint64_t>(k) + 1, i);
            children.push_back(propose_child(pop, i, config.de_F, config.de_CR, rng));
        }
        auto child_fitness = evaluate_all(children, scene, oracles, config, result.clean, workers, queries);
        for (std::size_t i = 0; i < children.size(); ++i) {
            if (child_fitness[i].objective > pop.fitness[i].objective) {
                pop.members[i] = std::move(children[i]);
                pop.fitness[i] = child_fitness[i];
            }
        }
        pop.generation = k + 1;
    }
    if (result.stop_generation == config.max_generations) emit(progress(pop, queries));

    const std::size_t best = pop.best_index();
    result.best = pop.members[best];
    result.best_fitness = pop.fitness[best];
    result.f_vis_adv = result.best_fitness.f_vis_adv;
    result.f_inf_adv = result.best_fitness.f_inf_adv;
    result.success = fitness::attack_success(result.f_vis_adv, result.f_inf_adv, config.thre);
    result.masks = render_masks(result.best, scene.height(), scene.width(), config.samples_per_segment);
    result.adv_pair = compose::apply(scene, result.union_mask(), config.cover);
    result.queries_used = queries;
    return result;
}

}  // namespace xpatch::optimizer

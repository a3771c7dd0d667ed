#include "xpatch/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numbers>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "xpatch/geometry.hpp"

namespace xpatch::harness {

using json = nlohmann::json;

OracleProvider synthetic_provider(const Corpus& corpus, const CoverModel& cover) {
    if (!corpus.synthetic()) throw CorpusError("corpus has no synthetic ground truth");
    return [&corpus, cover](std::size_t i) {
        const auto& t = corpus.truth.at(i);
        const auto& s = corpus.scenes.at(i);
        std::vector<std::uint8_t> vis(cover.visible_value.begin(), cover.visible_value.end());
        return optimizer::Oracles{
            std::make_shared<oracle::SyntheticCoverageOracle>(Modality::visible, t.visible, t.base_visible, s.gt_box, vis),
            std::make_shared<oracle::SyntheticCoverageOracle>(Modality::infrared, t.infrared, t.base_infrared, s.gt_box,
                                                              std::vector<std::uint8_t>{cover.infrared_value})};
    };
}

OracleProvider shared_provider(optimizer::Oracles oracles) {
    return [oracles](std::size_t) { return oracles; };
}

double average_precision(std::span<const ImageDetections> images, double score_floor) {
    struct Ranked {
        double score;
        std::size_t image;
        Box box;
    };
    std::vector<Ranked> ranked;
    std::size_t total_gt = 0;
    for (std::size_t i = 0; i < images.size(); ++i) {
        total_gt += images[i].ground_truth.size();
        for (const auto& d : images[i].detections)
            if (d.score >= score_floor) ranked.push_back({d.score, i, d.box});
    }
    if (total_gt == 0) return 0.0;
    std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) { return a.score > b.score; });

    std::vector<std::vector<bool>> matched(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) matched[i].assign(images[i].ground_truth.size(), false);
    std::vector<double> precision, recall;
    std::size_t tp = 0, fp = 0;
    for (const auto& r : ranked) {
        const auto& gts = images[r.image].ground_truth;
        double best = 0;
        std::size_t best_k = gts.size();
        for (std::size_t k = 0; k < gts.size(); ++k) {
            double o = iou(r.box, gts[k]);
            if (o > best) {
                best = o;
                best_k = k;
            }
        }
        if (best_k < gts.size() && best >= oracle::kTargetIou && !matched[r.image][best_k]) {
            matched[r.image][best_k] = true;
            ++tp;
        } else {
            ++fp;
        }
        precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
        recall.push_back(static_cast<double>(tp) / static_cast<double>(total_gt));
    }
    double ap = 0;
    for (int k = 0; k <= 10; ++k) {
        double t = k / 10.0;
        double p = 0;
        for (std::size_t i = 0; i < precision.size(); ++i)
            if (recall[i] >= t - 1e-12) p = std::max(p, precision[i]);
        ap += p;
    }
    return ap / 11.0;
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------- reports

std::vector<std::string> ExperimentReport::excluded() const {
    std::vector<std::string> out;
    for (const auto& r : rows)
        if (!r.included) out.push_back(r.id);
    return out;
}

void ExperimentReport::aggregate() {
    double n = 0, s = 0, sv = 0, si = 0;
    for (const auto& r : rows) {
        if (!r.included) continue;
        n += 1;
        s += r.success;
        sv += r.success_vis;
        si += r.success_inf;
    }
    asr = n > 0 ? s / n : 0;
    asr_vis = n > 0 ? sv / n : 0;
    asr_inf = n > 0 ? si / n : 0;
}

std::string ExperimentReport::to_json() const {
    json cfg = json::object();
    std::istringstream is(config.serialize());
    for (std::string line; std::getline(is, line);) {
        auto eq = line.find(" = ");
        if (eq != std::string::npos) cfg[line.substr(0, eq)] = line.substr(eq + 3);
    }
    json rows_json = json::array();
    for (const auto& r : rows)
        rows_json.push_back({{"id", r.id},
                             {"included", r.included},
                             {"note", r.note},
                             {"success", r.success},
                             {"success_visible", r.success_vis},
                             {"success_infrared", r.success_inf},
                             {"clean_visible", r.clean_vis},
                             {"clean_infrared", r.clean_inf},
                             {"adv_visible", r.adv_vis},
                             {"adv_infrared", r.adv_inf},
                             {"dis_visible", r.dis_vis},
                             {"dis_infrared", r.dis_inf},
                             {"stop_generation", r.stop_generation},
                             {"queries", r.queries},
                             {"seed", r.seed}});
    json j = {{"name", name},
              {"condition", condition},
              {"config", cfg},
              {"asr", asr},
              {"asr_visible", asr_vis},
              {"asr_infrared", asr_inf},
              {"ap",
               {{"visible", {{"clean", ap_visible.clean}, {"adv", ap_visible.adv}, {"drop", ap_visible.drop()}}},
                {"infrared", {{"clean", ap_infrared.clean}, {"adv", ap_infrared.adv}, {"drop", ap_infrared.drop()}}}}},
              {"metrics", metrics},
              {"excluded", excluded()},
              {"scenes", rows_json}};
    return j.dump(2) + "\n";
}

std::string ExperimentReport::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "id,included,success,success_visible,success_infrared,clean_visible,clean_infrared,adv_visible,adv_infrared,"
          "dis_visible,dis_infrared,stop_generation,queries,seed,note\n";
    for (const auto& r : rows)
        os << r.id << ',' << r.included << ',' << r.success << ',' << r.success_vis << ',' << r.success_inf << ','
           << r.clean_vis << ',' << r.clean_inf << ',' << r.adv_vis << ',' << r.adv_inf << ',' << r.dis_vis << ','
           << r.dis_inf << ',' << r.stop_generation << ',' << r.queries << ',' << r.seed << ',' << r.note << '\n';
    return os.str();
}

// ---------------------------------------------------------------- suite

std::uint64_t scene_seed(std::uint64_t base_seed, std::size_t scene_index) {
    return optimizer::substream(base_seed, 0xfeedULL, scene_index)();
}

namespace {

// Runs fn(i) for every scene on `jobs` threads; exceptions are rethrown in scene order.
template <class Fn>
void for_each_scene(std::size_t n, int jobs, Fn&& fn) {
    std::vector<std::exception_ptr> errors(n);
    const int count = static_cast<int>(n);
#pragma omp parallel for num_threads(std::max(1, jobs)) schedule(dynamic)
    for (int i = 0; i < count; ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

SceneRow row_from_scores(const std::string& id, double clean_vis, double clean_inf, double adv_vis, double adv_inf,
                         const RunConfig& config) {
    SceneRow row;
    row.id = id;
    row.clean_vis = clean_vis;
    row.clean_inf = clean_inf;
    row.adv_vis = adv_vis;
    row.adv_inf = adv_inf;
    row.success_vis = adv_vis < config.thre;
    row.success_inf = adv_inf < config.thre;
    row.success = fitness::attack_success(adv_vis, adv_inf, config.thre);
    if (clean_vis > config.thre && clean_inf > config.thre) {
        row.dis_vis = fitness::dis(clean_vis, adv_vis, config.thre);
        row.dis_inf = fitness::dis(clean_inf, adv_inf, config.thre);
    }
    return row;
}

struct Rescored {
    double vis = 0, inf = 0;
    std::vector<oracle::Detection> vis_dets, inf_dets;
};

Rescored rescore(const ScenePair& scene, const BinaryMask& mask, const optimizer::Oracles& oracles,
                 const CoverModel& cover) {
    ScenePair adv = compose::apply(scene, mask, cover);
    Rescored r;
    r.vis_dets = oracles.visible->detect(adv.visible, Modality::visible);
    r.inf_dets = oracles.infrared->detect(adv.infrared, Modality::infrared);
    r.vis = oracle::target_score(r.vis_dets, scene.gt_box);
    r.inf = oracle::target_score(r.inf_dets, scene.gt_box);
    return r;
}

void fill_ap(ExperimentReport& report, const std::vector<ImageDetections>& clean_vis,
             const std::vector<ImageDetections>& clean_inf, const std::vector<ImageDetections>& adv_vis,
             const std::vector<ImageDetections>& adv_inf, double floor) {
    report.ap_visible = {average_precision(clean_vis, floor), average_precision(adv_vis, floor)};
    report.ap_infrared = {average_precision(clean_inf, floor), average_precision(adv_inf, floor)};
}

}  // namespace

SuiteRun run_suite(const Corpus& corpus, const OracleProvider& oracles, const RunConfig& config,
                   const SuiteOptions& options) {
    config.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t n = corpus.size();
    SuiteRun run;
    run.report.name = "attack";
    run.report.config = config;
    run.report.rows.resize(n);
    run.attacks.resize(n);
    std::vector<ImageDetections> cv(n), ci(n), av(n), ai(n);
    std::vector<bool> used(n, false);

    for_each_scene(n, options.jobs, [&](std::size_t i) {
        const ScenePair& scene = corpus.scenes[i];
        auto orc = oracles(i);
        const std::uint64_t seed = scene_seed(config.seed, i);
        optimizer::RunOptions ro;
        if (options.on_progress) ro.on_progress = [&, i](const optimizer::ProgressRecord& r) { options.on_progress(i, r); };
        SceneRow& row = run.report.rows[i];
        try {
            auto result = optimizer::run_attack(scene, orc, config, seed, ro);
            auto adv = rescore(scene, result.union_mask(), orc, config.cover);
            row = row_from_scores(scene.id, result.clean.visible, result.clean.infrared, result.f_vis_adv,
                                  result.f_inf_adv, config);
            row.dis_vis = result.best_fitness.dis_vis;
            row.dis_inf = result.best_fitness.dis_inf;
            row.stop_generation = result.stop_generation;
            row.queries = result.queries_used;
            cv[i] = {{scene.gt_box}, result.clean.visible_detections};
            ci[i] = {{scene.gt_box}, result.clean.infrared_detections};
            av[i] = {{scene.gt_box}, adv.vis_dets};
            ai[i] = {{scene.gt_box}, adv.inf_dets};
            used[i] = true;
            run.attacks[i] = std::move(result);
        } catch (const optimizer::SceneRejected& e) {
            row = SceneRow{};
            row.id = scene.id;
            row.included = false;
            row.note = "excluded: not detectable above threshold";
        }
        row.seed = seed;
    });

    auto keep = [&](std::vector<ImageDetections>& v) {
        std::vector<ImageDetections> out;
        for (std::size_t i = 0; i < n; ++i)
            if (used[i]) out.push_back(std::move(v[i]));
        return out;
    };
    fill_ap(run.report, keep(cv), keep(ci), keep(av), keep(ai), config.thre);
    run.report.aggregate();
    std::vector<double> gaps;
    for (const auto& r : run.report.rows)
        if (r.included) gaps.push_back(std::abs(r.dis_vis - r.dis_inf));
    run.report.metrics["median_dis_gap"] = median(gaps);
    run.report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return run;
}

// ---------------------------------------------------------------- baselines

std::string to_string(ShapeKind k) {
    switch (k) {
        case ShapeKind::circle: return "circle";
        case ShapeKind::square: return "square";
        case ShapeKind::rectangle: return "rectangle";
        case ShapeKind::triangle: return "triangle";
        case ShapeKind::initial: return "initial";
    }
    return "?";
}

ShapeKind parse_shape_kind(const std::string& s) {
    for (auto k : kAllShapeKinds)
        if (to_string(k) == s) return k;
    throw ConfigError("unknown shape kind '" + s + "'");
}

namespace {

// Unit-area polygon of the given kind centered on the origin.
std::vector<Point2> unit_shape(ShapeKind kind) {
    std::vector<Point2> poly;
    switch (kind) {
        case ShapeKind::square:
            poly = {{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}};
            break;
        case ShapeKind::rectangle: {
            // upright, 1:2
            double hw = std::sqrt(0.5) / 2, hh = 2 * hw;
            poly = {{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}};
            break;
        }
        case ShapeKind::triangle: {
            // equilateral, apex up, centroid at the origin
            double circum = std::sqrt(4 / std::sqrt(3.0)) / std::sqrt(3.0);
            for (int k = 0; k < 3; ++k) {
                double a = -std::numbers::pi / 2 + 2 * std::numbers::pi * k / 3;
                poly.push_back({circum * std::cos(a), circum * std::sin(a)});
            }
            break;
        }
        default:
            break;
    }
    return poly;
}

BinaryMask place(const std::vector<Point2>& unit, Point2 c, double scale, int height, int width) {
    std::vector<Point2> poly;
    for (Point2 p : unit) poly.push_back(c + p * scale);
    return geometry::rasterize_polygon(poly, height, width);
}

}  // namespace

BinaryMask baseline_mask(const boundary::FeasibleRegion& region, ShapeKind kind, int height, int width,
                         int samples_per_segment) {
    auto contour = geometry::close_contour(geometry::initial_anchors(region.center, region.radius, region.n),
                                           samples_per_segment);
    BinaryMask circle = geometry::rasterize(contour, height, width);
    if (kind == ShapeKind::circle || kind == ShapeKind::initial) return circle;

    // Start from the polygon area, then tune the scale so the cell count
    // matches the rasterized circle as closely as the grid allows.
    const auto unit = unit_shape(kind);
    const double area = std::abs(geometry::polygon_area(contour.loop()));
    const std::size_t target = circle.area();
    auto gap = [&](const BinaryMask& m) {
        return m.area() > target ? m.area() - target : target - m.area();
    };
    // Half-pixel shifts of the center break the parity a fixed center forces
    // on the per-row and per-column cell counts.
    std::optional<BinaryMask> best;
    for (Point2 shift : {Point2{0, 0}, Point2{0.5, 0}, Point2{0, 0.5}, Point2{0.5, 0.5}}) {
        Point2 c = region.center + shift;
        double lo = 0.7 * std::sqrt(area), hi = 1.3 * std::sqrt(area);
        for (int it = 0; it < 40; ++it) {
            double mid = 0.5 * (lo + hi);
            if (place(unit, c, mid, height, width).area() < target)
                lo = mid;
            else
                hi = mid;
        }
        for (double s : {lo, hi}) {
            BinaryMask m = place(unit, c, s, height, width);
            if (!best || gap(m) < gap(*best)) best = std::move(m);
        }
    }
    return *best;
}

ExperimentReport fixed_shape_baseline(const Corpus& corpus, const OracleProvider& oracles, const RunConfig& config,
                                      ShapeKind kind, const SuiteOptions& options) {
    config.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t n = corpus.size();
    ExperimentReport report;
    report.name = "baseline";
    report.condition = to_string(kind);
    report.config = config;
    report.rows.resize(n);
    std::vector<ImageDetections> cv(n), ci(n), av(n), ai(n);
    std::vector<bool> used(n, false);

    for_each_scene(n, options.jobs, [&](std::size_t i) {
        const ScenePair& scene = corpus.scenes[i];
        auto orc = oracles(i);
        SceneRow& row = report.rows[i];
        const std::uint64_t seed = scene_seed(config.seed, i);
        if (kind == ShapeKind::initial) {
            // Best member of the initial population: no evolution at all.
            RunConfig c0 = config;
            c0.max_generations = 0;
            try {
                auto result = optimizer::run_attack(scene, orc, c0, seed);
                auto adv = rescore(scene, result.union_mask(), orc, config.cover);
                row = row_from_scores(scene.id, result.clean.visible, result.clean.infrared, adv.vis, adv.inf, config);
                row.queries = result.queries_used;
                cv[i] = {{scene.gt_box}, result.clean.visible_detections};
                ci[i] = {{scene.gt_box}, result.clean.infrared_detections};
                av[i] = {{scene.gt_box}, adv.vis_dets};
                ai[i] = {{scene.gt_box}, adv.inf_dets};
                used[i] = true;
            } catch (const optimizer::SceneRejected&) {
                row = SceneRow{};
                row.id = scene.id;
                row.included = false;
                row.note = "excluded: not detectable above threshold";
            }
            row.seed = seed;
            return;
        }
        auto clean = optimizer::clean_scores(scene, orc);
        if (!(clean.visible > config.thre && clean.infrared > config.thre)) {
            row.id = scene.id;
            row.included = false;
            row.note = "excluded: not detectable above threshold";
            return;
        }
        std::vector<BinaryMask> masks;
        for (const auto& reg : optimizer::build_regions(config, scene.gt_box))
            masks.push_back(baseline_mask(*reg, kind, scene.height(), scene.width(), config.samples_per_segment));
        auto adv = rescore(scene, compose::union_masks(masks), orc, config.cover);
        row = row_from_scores(scene.id, clean.visible, clean.infrared, adv.vis, adv.inf, config);
        row.queries = 4;
        cv[i] = {{scene.gt_box}, clean.visible_detections};
        ci[i] = {{scene.gt_box}, clean.infrared_detections};
        av[i] = {{scene.gt_box}, adv.vis_dets};
        ai[i] = {{scene.gt_box}, adv.inf_dets};
        used[i] = true;
    });
    std::vector<ImageDetections> kcv, kci, kav, kai;
    for (std::size_t i = 0; i < n; ++i)
        if (used[i]) {
            kcv.push_back(cv[i]);
            kci.push_back(ci[i]);
            kav.push_back(av[i]);
            kai.push_back(ai[i]);
        }
    fill_ap(report, kcv, kci, kav, kai, config.thre);
    report.aggregate();
    report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

AblationResult fitness_ablation(const Corpus& corpus, const OracleProvider& oracles, const RunConfig& config,
                                const SuiteOptions& options) {
    RunConfig joint_cfg = config, sum_cfg = config;
    joint_cfg.fitness_mode = fitness::Mode::joint;
    sum_cfg.fitness_mode = fitness::Mode::sum;
    AblationResult out{run_suite(corpus, oracles, joint_cfg, options), run_suite(corpus, oracles, sum_cfg, options)};
    out.joint.report.name = "ablate-fitness";
    out.joint.report.condition = "joint";
    out.sum.report.name = "ablate-fitness";
    out.sum.report.condition = "sum";
    return out;
}

std::vector<SweepCell> sweep(const Corpus& corpus, const OracleProvider& oracles, const RunConfig& config,
                             const std::vector<double>& lambdas, const std::vector<int>& patch_counts,
                             const SuiteOptions& options) {
    std::vector<SweepCell> grid;
    for (double lambda : lambdas)
        for (int p : patch_counts) {
            RunConfig c = config;
            c.lambda = lambda;
            c.patch_count = p;
            c.patch_centers = default_patch_centers(p);
            auto run = run_suite(corpus, oracles, c, options);
            run.report.name = "sweep";
            std::ostringstream cond;
            cond << "lambda=" << lambda << ",patch_count=" << p;
            run.report.condition = cond.str();
            grid.push_back({lambda, p, std::move(run.report)});
        }
    return grid;
}

std::string sweep_to_json(const std::vector<SweepCell>& grid) {
    json cells = json::array();
    for (const auto& c : grid)
        cells.push_back({{"lambda", c.lambda},
                         {"patch_count", c.patch_count},
                         {"asr", c.report.asr},
                         {"ap_drop_visible", c.report.ap_visible.drop()},
                         {"ap_drop_infrared", c.report.ap_infrared.drop()},
                         {"report", json::parse(c.report.to_json())}});
    return json{{"name", "sweep"}, {"cells", cells}}.dump(2) + "\n";
}

// ---------------------------------------------------------------- re-scoring

std::vector<std::optional<SavedAttack>> saved_attacks(const SuiteRun& run) {
    std::vector<std::optional<SavedAttack>> out;
    for (std::size_t i = 0; i < run.attacks.size(); ++i) {
        if (run.attacks[i])
            out.push_back(SavedAttack{run.report.rows[i].id, run.attacks[i]->masks});
        else
            out.push_back(std::nullopt);
    }
    return out;
}

namespace {

ExperimentReport rescore_condition(const Corpus& corpus, const OracleProvider& oracles,
                                   const std::vector<std::optional<SavedAttack>>& attacks, const RunConfig& config,
                                   const std::string& condition,
                                   const std::function<std::vector<std::pair<std::string, BinaryMask>>(
                                       std::size_t, const SavedAttack&)>& variants) {
    ExperimentReport report;
    report.name = "simulate-errors";
    report.condition = condition;
    report.config = config;
    std::vector<ImageDetections> cv, ci, av, ai;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const ScenePair& scene = corpus.scenes[i];
        if (i >= attacks.size() || !attacks[i]) {
            SceneRow row;
            row.id = scene.id;
            row.included = false;
            row.note = "excluded: no saved attack";
            report.rows.push_back(row);
            continue;
        }
        auto orc = oracles(i);
        auto clean = optimizer::clean_scores(scene, orc);
        for (auto& [suffix, mask] : variants(i, *attacks[i])) {
            auto adv = rescore(scene, mask, orc, config.cover);
            auto row = row_from_scores(scene.id + suffix, clean.visible, clean.infrared, adv.vis, adv.inf, config);
            report.rows.push_back(row);
            cv.push_back({{scene.gt_box}, clean.visible_detections});
            ci.push_back({{scene.gt_box}, clean.infrared_detections});
            av.push_back({{scene.gt_box}, adv.vis_dets});
            ai.push_back({{scene.gt_box}, adv.inf_dets});
        }
    }
    fill_ap(report, cv, ci, av, ai, config.thre);
    report.aggregate();
    return report;
}

}  // namespace

std::vector<ExperimentReport> robustness_eval(const Corpus& corpus, const OracleProvider& oracles,
                                              const std::vector<std::optional<SavedAttack>>& attacks,
                                              const RunConfig& config, const std::vector<int>& translations,
                                              const std::vector<double>& fractions) {
    std::vector<ExperimentReport> out;
    out.push_back(rescore_condition(corpus, oracles, attacks, config, "identity", [](std::size_t, const SavedAttack& a) {
        return std::vector<std::pair<std::string, BinaryMask>>{{"", compose::union_masks(a.masks)}};
    }));
    static constexpr int dirs[4][2] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    for (int d : translations) {
        out.push_back(rescore_condition(
            corpus, oracles, attacks, config, "translate:" + std::to_string(d) + "px",
            [&](std::size_t, const SavedAttack& a) {
                std::vector<std::pair<std::string, BinaryMask>> v;
                for (int k = 0; k < 4; ++k) {
                    std::vector<BinaryMask> moved;
                    for (std::size_t p = 0; p < a.masks.size(); ++p) {
                        int dk = config.translate_mode == TranslateMode::joint ? k : static_cast<int>((k + p) % 4);
                        moved.push_back(compose::translate_mask(a.masks[p], d * dirs[dk][0], d * dirs[dk][1]));
                    }
                    v.emplace_back("@" + std::to_string(d * dirs[k][0]) + "," + std::to_string(d * dirs[k][1]),
                                   compose::union_masks(moved));
                }
                return v;
            }));
    }
    for (std::size_t f = 0; f < fractions.size(); ++f) {
        const double frac = fractions[f];
        std::ostringstream name;
        name << "incomplete:" << frac;
        out.push_back(rescore_condition(corpus, oracles, attacks, config, name.str(),
                                        [&](std::size_t i, const SavedAttack& a) {
                                            std::vector<BinaryMask> cut;
                                            for (std::size_t p = 0; p < a.masks.size(); ++p) {
                                                auto rng = optimizer::substream(config.seed, 0xc0ffeeULL + f, i * 64 + p);
                                                cut.push_back(compose::erode_fraction(a.masks[p], frac, rng));
                                            }
                                            return std::vector<std::pair<std::string, BinaryMask>>{
                                                {"", compose::union_masks(cut)}};
                                        }));
    }
    const double base = out.front().asr;
    for (auto& r : out) r.metrics["asr_delta"] = r.asr - base;
    return out;
}

std::size_t smoothing_changed_interior(const Image& adversarial, const BinaryMask& mask, int window) {
    Image smoothed = oracle::smooth(adversarial, window);
    BinaryMask interior = compose::erode_square(mask, window / 2);
    std::size_t changed = 0;
    for (int r = 0; r < mask.height(); ++r)
        for (int c = 0; c < mask.width(); ++c)
            if (interior.get(r, c)) {
                auto a = adversarial.pixel(r, c);
                auto b = std::as_const(smoothed).pixel(r, c);
                if (!std::equal(a.begin(), a.end(), b.begin())) ++changed;
            }
    return changed;
}

ExperimentReport defense_eval(const Corpus& corpus, const OracleProvider& oracles,
                              const std::vector<std::optional<SavedAttack>>& attacks, const RunConfig& config,
                              int window) {
    auto undefended = rescore_condition(corpus, oracles, attacks, config, "undefended",
                                        [](std::size_t, const SavedAttack& a) {
                                            return std::vector<std::pair<std::string, BinaryMask>>{
                                                {"", compose::union_masks(a.masks)}};
                                        });
    OracleProvider defended = [&](std::size_t i) {
        auto o = oracles(i);
        return optimizer::Oracles{std::make_shared<oracle::SmoothedOracle>(o.visible, window),
                                  std::make_shared<oracle::SmoothedOracle>(o.infrared, window)};
    };
    // Clean scores are taken through the same defense so dis terms stay comparable.
    auto report = rescore_condition(corpus, defended, attacks, config, "median:" + std::to_string(window),
                                    [](std::size_t, const SavedAttack& a) {
                                        return std::vector<std::pair<std::string, BinaryMask>>{
                                            {"", compose::union_masks(a.masks)}};
                                    });
    report.name = "defend";
    std::size_t changed = 0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (i >= attacks.size() || !attacks[i]) continue;
        auto mask = compose::union_masks(attacks[i]->masks);
        auto adv = compose::apply(corpus.scenes[i], mask, config.cover);
        changed += smoothing_changed_interior(adv.visible, mask, window);
        changed += smoothing_changed_interior(adv.infrared, mask, window);
    }
    report.metrics["asr_undefended"] = undefended.asr;
    report.metrics["asr_delta"] = report.asr - undefended.asr;
    report.metrics["interior_pixels_changed"] = static_cast<double>(changed);
    return report;
}

}  // namespace xpatch::harness

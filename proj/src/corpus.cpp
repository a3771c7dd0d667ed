#include "xpatch/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "xpatch/config.hpp"
#include "xpatch/optimizer.hpp"
#include "xpatch/png_io.hpp"

namespace xpatch {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

json salience_to_json(const oracle::SalienceMap& m) {
    json cells = json::array();
    for (int r = 0; r < m.height; ++r)
        for (int c = 0; c < m.width; ++c)
            if (double w = m.at(r, c); w != 0) cells.push_back({r, c, w});
    return cells;
}

oracle::SalienceMap salience_from_json(const json& cells, int height, int width) {
    oracle::SalienceMap m{height, width, std::vector<double>(static_cast<std::size_t>(height) * width, 0.0)};
    for (const auto& cell : cells) {
        int r = cell.at(0).get<int>(), c = cell.at(1).get<int>();
        if (r < 0 || r >= height || c < 0 || c >= width) throw CorpusError("synthetic.json: salience cell out of frame");
        m.weights[static_cast<std::size_t>(r) * width + c] = cell.at(2).get<double>();
    }
    return m;
}

json read_json(const fs::path& p) {
    std::ifstream f(p);
    if (!f) throw CorpusError("cannot open " + p.string());
    try {
        return json::parse(f);
    } catch (const json::exception& e) {
        throw CorpusError(p.string() + ": " + e.what());
    }
}

}  // namespace

Corpus load_corpus(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw CorpusError("corpus directory " + dir.string() + " does not exist");
    json ann = read_json(dir / "annotations.json");
    if (!ann.is_object()) throw CorpusError("annotations.json must map id -> [x1,y1,x2,y2]");
    Corpus corpus;
    for (const auto& [id, box] : ann.items()) {
        if (!box.is_array() || box.size() != 4) throw CorpusError("annotation for " + id + " must be [x1,y1,x2,y2]");
        ScenePair s;
        s.id = id;
        s.gt_box = {box[0].get<double>(), box[1].get<double>(), box[2].get<double>(), box[3].get<double>()};
        try {
            s.visible = io::read_png(dir / "vis" / (id + ".png"));
            s.infrared = io::read_png(dir / "inf" / (id + ".png"));
        } catch (const std::runtime_error& e) {
            throw CorpusError(e.what());
        }
        if (s.infrared.channels() == 3) {
            // Accept RGB-encoded thermal frames; keep the first channel.
            Image gray(s.infrared.height(), s.infrared.width(), 1);
            for (int r = 0; r < gray.height(); ++r)
                for (int c = 0; c < gray.width(); ++c) gray.at(r, c) = s.infrared.at(r, c, 0);
            s.infrared = std::move(gray);
        }
        if (s.visible.channels() == 1) {
            Image rgb(s.visible.height(), s.visible.width(), 3);
            for (int r = 0; r < rgb.height(); ++r)
                for (int c = 0; c < rgb.width(); ++c)
                    for (int k = 0; k < 3; ++k) rgb.at(r, c, k) = s.visible.at(r, c);
            s.visible = std::move(rgb);
        }
        s.validate();
        corpus.scenes.push_back(std::move(s));
    }
    if (fs::exists(dir / "synthetic.json")) {
        json syn = read_json(dir / "synthetic.json");
        for (const auto& s : corpus.scenes) {
            if (!syn.contains(s.id)) throw CorpusError("synthetic.json lacks scene " + s.id);
            const json& t = syn[s.id];
            SyntheticTruth truth;
            truth.base_visible = t.at("base_visible").get<double>();
            truth.base_infrared = t.at("base_infrared").get<double>();
            truth.visible = salience_from_json(t.at("visible"), s.height(), s.width());
            truth.infrared = salience_from_json(t.at("infrared"), s.height(), s.width());
            corpus.truth.push_back(std::move(truth));
        }
    }
    return corpus;
}

void save_corpus(const fs::path& dir, const Corpus& corpus) {
    fs::create_directories(dir / "vis");
    fs::create_directories(dir / "inf");
    json ann = json::object();
    json syn = json::object();
    for (std::size_t i = 0; i < corpus.scenes.size(); ++i) {
        const auto& s = corpus.scenes[i];
        io::write_png(dir / "vis" / (s.id + ".png"), s.visible);
        io::write_png(dir / "inf" / (s.id + ".png"), s.infrared);
        ann[s.id] = {s.gt_box.x1, s.gt_box.y1, s.gt_box.x2, s.gt_box.y2};
        if (corpus.synthetic()) {
            const auto& t = corpus.truth[i];
            syn[s.id] = {{"base_visible", t.base_visible},
                         {"base_infrared", t.base_infrared},
                         {"visible", salience_to_json(t.visible)},
                         {"infrared", salience_to_json(t.infrared)}};
        }
    }
    std::ofstream(dir / "annotations.json") << ann.dump(2) << '\n';
    if (corpus.synthetic()) std::ofstream(dir / "synthetic.json") << syn.dump() << '\n';
}

SyntheticSuiteSpec standard_suite_spec() { return {}; }

SyntheticSuiteSpec conflict_suite_spec() {
    SyntheticSuiteSpec s;
    s.seed = 2;
    s.paired_conflict = true;
    s.background = 0.2;
    s.blobs_per_modality = 6;
    s.base_visible_min = 0.74;
    s.base_visible_max = 0.76;
    s.base_infrared_min = 0.92;
    s.base_infrared_max = 0.95;
    return s;
}

namespace {

struct BlobSite {
    Point2 center;
    double mass;
};

void add_blob(oracle::SalienceMap& m, const Box& box, Point2 c, double sigma, double mass) {
    const int r0 = std::max(0, static_cast<int>(std::floor(c.y - 3 * sigma)));
    const int r1 = std::min(m.height - 1, static_cast<int>(std::ceil(c.y + 3 * sigma)));
    const int c0 = std::max(0, static_cast<int>(std::floor(c.x - 3 * sigma)));
    const int c1 = std::min(m.width - 1, static_cast<int>(std::ceil(c.x + 3 * sigma)));
    std::vector<std::pair<std::size_t, double>> cells;
    double total = 0;
    for (int r = r0; r <= r1; ++r)
        for (int col = c0; col <= c1; ++col) {
            Point2 p{col + 0.5, r + 0.5};
            if (!box.contains(p)) continue;
            double d2 = (p.x - c.x) * (p.x - c.x) + (p.y - c.y) * (p.y - c.y);
            if (d2 > 9 * sigma * sigma) continue;
            double w = std::exp(-d2 / (2 * sigma * sigma));
            cells.emplace_back(static_cast<std::size_t>(r) * m.width + col, w);
            total += w;
        }
    for (auto [idx, w] : cells) m.weights[idx] += mass * w / total;
}

oracle::SalienceMap build_salience(int h, int w, const Box& box, double background, const std::vector<BlobSite>& blobs,
                                   double sigma) {
    oracle::SalienceMap m{h, w, std::vector<double>(static_cast<std::size_t>(h) * w, 0.0)};
    std::vector<std::size_t> inside;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            if (box.contains({c + 0.5, r + 0.5})) inside.push_back(static_cast<std::size_t>(r) * w + c);
    for (auto idx : inside) m.weights[idx] += background / static_cast<double>(inside.size());
    for (const auto& b : blobs) add_blob(m, box, b.center, sigma, b.mass);
    double total = 0;
    for (double v : m.weights) total += v;
    for (double& v : m.weights) v /= total;
    return m;
}

// Sector j of a region spans angles (theta_j - 2pi/n, theta_j) with theta_j = pi/2 - 2pi j/n.
Point2 sector_point(const boundary::FeasibleRegion& reg, int j, double offset, double reach) {
    const double half = std::numbers::pi / reg.n;
    double phi = std::numbers::pi / 2 - 2 * std::numbers::pi * j / reg.n - half + offset * half;
    return {reg.center.x + reach * reg.radius * std::cos(phi), reg.center.y + reach * reg.radius * std::sin(phi)};
}

}  // namespace

Corpus generate_synthetic_corpus(const SyntheticSuiteSpec& spec, const RunConfig& config) {
    config.validate();
    Corpus corpus;
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](double a, double b) { return a + (b - a) * unit(rng); };

    for (int s = 0; s < spec.count; ++s) {
        ScenePair scene;
        char id[32];
        std::snprintf(id, sizeof id, "scene%03d", s);
        scene.id = id;
        double bw = uniform(0.68, 0.74) * spec.width, bh = uniform(0.8, 0.86) * spec.height;
        double x1 = std::floor(uniform(0.3, 0.7) * (spec.width - bw)), y1 = std::floor(uniform(0.3, 0.7) * (spec.height - bh));
        scene.gt_box = {x1, y1, std::floor(x1 + bw), std::floor(y1 + bh)};

        // Textured clean frames that never show either cover value.
        scene.visible = Image(spec.height, spec.width, 3);
        scene.infrared = Image(spec.height, spec.width, 1);
        std::uniform_int_distribution<int> noise(-12, 12);
        const int tint[3] = {static_cast<int>(uniform(60, 160)), static_cast<int>(uniform(60, 160)),
                             static_cast<int>(uniform(60, 160))};
        for (int r = 0; r < spec.height; ++r)
            for (int c = 0; c < spec.width; ++c) {
                bool body = scene.gt_box.contains({c + 0.5, r + 0.5});
                for (int k = 0; k < 3; ++k) {
                    int v = (body ? tint[k] : 110 + 40 * k) + noise(rng);
                    if (v == config.cover.visible_value[k]) ++v;
                    scene.visible.at(r, c, k) = static_cast<std::uint8_t>(std::clamp(v, 40, 220));
                }
                int t = (body ? 180 : 90) + noise(rng);
                if (t == config.cover.infrared_value) ++t;
                scene.infrared.at(r, c) = static_cast<std::uint8_t>(std::clamp(t, 40, 230));
            }
        // Clamping can still land on a cover value if covers were configured inside [40, 230].
        for (int r = 0; r < spec.height; ++r)
            for (int c = 0; c < spec.width; ++c) {
                auto px = scene.visible.pixel(r, c);
                if (std::equal(px.begin(), px.end(), config.cover.visible_value.begin())) px[0] ^= 1;
                if (scene.infrared.at(r, c) == config.cover.infrared_value) scene.infrared.at(r, c) ^= 1;
            }

        auto regions = optimizer::build_regions(config, scene.gt_box);
        const double blob_mass = (1.0 - spec.background) / std::max(1, spec.blobs_per_modality);
        const double margin = 2 * spec.blob_sigma + 1;
        Box inner{regions[0]->outer.x1 + margin, regions[0]->outer.y1 + margin, regions[0]->outer.x2 - margin,
                  regions[0]->outer.y2 - margin};
        auto acceptable = [&](Point2 p) {
            if (!inner.contains(p)) return false;
            for (const auto& reg : regions)
                if (distance(p, reg->center) < spec.blob_reach_min * reg->radius) return false;
            return true;
        };

        std::vector<BlobSite> vis, inf;
        for (int b = 0; b < spec.blobs_per_modality; ++b) {
            const auto& reg = *regions[b % regions.size()];
            for (int attempt = 0; attempt < 10000; ++attempt) {
                int j = static_cast<int>(unit(rng) * reg.n);
                double reach = uniform(spec.blob_reach_min, spec.blob_reach_max);
                if (spec.paired_conflict) {
                    double side = unit(rng) < 0.5 ? -1.0 : 1.0;
                    Point2 pv = sector_point(reg, j, side * spec.conflict_offset, reach);
                    Point2 pi = sector_point(reg, j, -side * spec.conflict_offset, reach);
                    if (!acceptable(pv) || !acceptable(pi)) continue;
                    vis.push_back({pv, blob_mass});
                    inf.push_back({pi, blob_mass});
                } else {
                    Point2 pv = sector_point(reg, j, uniform(-0.5, 0.5), reach);
                    int j2 = static_cast<int>(unit(rng) * reg.n);
                    Point2 pi = sector_point(reg, j2, uniform(-0.5, 0.5), uniform(spec.blob_reach_min, spec.blob_reach_max));
                    if (!acceptable(pv) || !acceptable(pi)) continue;
                    vis.push_back({pv, blob_mass});
                    inf.push_back({pi, blob_mass});
                }
                break;
            }
        }

        SyntheticTruth truth;
        truth.base_visible = uniform(spec.base_visible_min, spec.base_visible_max);
        truth.base_infrared = uniform(spec.base_infrared_min, spec.base_infrared_max);
        truth.visible = build_salience(spec.height, spec.width, scene.gt_box, spec.background, vis, spec.blob_sigma);
        truth.infrared = build_salience(spec.height, spec.width, scene.gt_box, spec.background, inf, spec.blob_sigma);
        corpus.scenes.push_back(std::move(scene));
        corpus.truth.push_back(std::move(truth));
    }
    return corpus;
}

}  // namespace xpatch

#include "xpatch/rundir.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "xpatch/geometry.hpp"
#include "xpatch/png_io.hpp"

namespace xpatch::rundir {

namespace fs = std::filesystem;
using json = nlohmann::json;

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    os << text;
    if (!os) throw std::runtime_error("cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw CorpusError("cannot read " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_report(const fs::path& dir, const harness::ExperimentReport& report, const std::string& stem) {
    write_text(dir / (stem + ".json"), report.to_json());
    write_text(dir / (stem + ".csv"), report.to_csv());
}

void write_attack_run(const fs::path& dir, const Corpus& corpus, const harness::SuiteRun& run, const RunInfo& info,
                      const std::vector<std::vector<std::string>>& progress) {
    fs::create_directories(dir);
    json scenes = json::array();
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& row = run.report.rows[i];
        const auto& attack = run.attacks[i];
        scenes.push_back({{"id", row.id}, {"patches", attack ? attack->masks.size() : 0}});
        if (!attack) continue;
        fs::path sd = dir / "scenes" / row.id;
        fs::create_directories(sd);
        for (std::size_t k = 0; k < attack->masks.size(); ++k) {
            io::write_mask_png(sd / ("mask_" + std::to_string(k) + ".png"), attack->masks[k]);
            const auto& gene = attack->best.patches[k];
            auto contour = geometry::close_contour(gene.anchors, run.report.config.samples_per_segment);
            std::ostringstream os;
            geometry::write_polygon_text(os, contour);
            write_text(sd / ("contour_" + std::to_string(k) + ".txt"), os.str());
        }
        io::write_png(sd / "adv_visible.png", attack->adv_pair.visible);
        io::write_png(sd / "adv_infrared.png", attack->adv_pair.infrared);
        json anchors = json::array();
        for (const auto& gene : attack->best.patches) {
            json a = json::array();
            for (const auto& p : gene.anchors) a.push_back({p.x, p.y});
            anchors.push_back(a);
        }
        json scores = {{"id", row.id},
                       {"success", row.success},
                       {"clean", {{"visible", row.clean_vis}, {"infrared", row.clean_inf}}},
                       {"adv", {{"visible", row.adv_vis}, {"infrared", row.adv_inf}}},
                       {"dis", {{"visible", row.dis_vis}, {"infrared", row.dis_inf}}},
                       {"joint", attack->best_fitness.joint},
                       {"stop_generation", row.stop_generation},
                       {"queries", row.queries},
                       {"seed", row.seed},
                       {"anchors", anchors}};
        write_text(sd / "scores.json", scores.dump(2) + "\n");
    }
    json meta = {{"corpus", info.corpus},
                 {"synthetic", info.synthetic},
                 {"oracle_visible", info.oracle_visible},
                 {"oracle_infrared", info.oracle_infrared},
                 {"scenes", scenes}};
    write_text(dir / "run.json", meta.dump(2) + "\n");
    write_text(dir / "config.txt", run.report.config.serialize());
    write_report(dir, run.report);
    write_text(dir / "timing.json", json{{"runtime_seconds", run.report.runtime_seconds}}.dump(2) + "\n");
    std::string lines;
    for (const auto& scene : progress)
        for (const auto& l : scene) lines += l + "\n";
    write_text(dir / "progress.ndjson", lines);
}

RunInfo read_run_info(const fs::path& dir) {
    if (!fs::exists(dir / "run.json")) throw CorpusError("not a run directory: " + dir.string());
    json meta;
    try {
        meta = json::parse(read_text(dir / "run.json"));
    } catch (const json::exception& e) {
        throw CorpusError("bad run.json: " + std::string(e.what()));
    }
    RunInfo info;
    info.corpus = meta.value("corpus", "");
    info.synthetic = meta.value("synthetic", true);
    info.oracle_visible = meta.value("oracle_visible", "");
    info.oracle_infrared = meta.value("oracle_infrared", "");
    return info;
}

LoadedRun load_run(const fs::path& dir, const Corpus& corpus) {
    LoadedRun out;
    out.info = read_run_info(dir);
    out.config = RunConfig::parse(read_text(dir / "config.txt"));
    json meta = json::parse(read_text(dir / "run.json"));
    std::map<std::string, std::size_t> patches;
    for (const auto& s : meta.at("scenes")) patches[s.at("id").get<std::string>()] = s.at("patches").get<std::size_t>();

    for (const auto& scene : corpus.scenes) {
        auto it = patches.find(scene.id);
        if (it == patches.end()) throw CorpusError("run has no entry for scene " + scene.id);
        if (it->second == 0) {
            out.attacks.push_back(std::nullopt);
            continue;
        }
        harness::SavedAttack a{scene.id, {}};
        for (std::size_t k = 0; k < it->second; ++k) {
            fs::path p = dir / "scenes" / scene.id / ("mask_" + std::to_string(k) + ".png");
            if (!fs::exists(p)) throw CorpusError("missing mask " + p.string());
            auto m = io::read_mask_png(p);
            if (m.height() != scene.height() || m.width() != scene.width())
                throw CorpusError("mask size does not match scene " + scene.id);
            a.masks.push_back(std::move(m));
        }
        out.attacks.push_back(std::move(a));
    }
    return out;
}

}  // namespace xpatch::rundir

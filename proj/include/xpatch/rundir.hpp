#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "xpatch/harness.hpp"

// On-disk layout of an attack run:
//   run.json, config.txt, report.json, report.csv, timing.json, progress.ndjson
//   scenes/<id>/mask_<k>.png, contour_<k>.txt, adv_visible.png, adv_infrared.png, scores.json

namespace xpatch::rundir {

/// Where the corpus and the oracles of a run came from, so later commands can
/// re-score it. `corpus` is a directory or "suite:<name>".
struct RunInfo {
    std::string corpus;
    bool synthetic = true;
    std::string oracle_visible;
    std::string oracle_infrared;
};

struct LoadedRun {
    RunInfo info;
    RunConfig config;
    std::vector<std::optional<harness::SavedAttack>> attacks;  // aligned with the corpus scenes
};

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

void write_report(const std::filesystem::path& dir, const harness::ExperimentReport& report,
                  const std::string& stem = "report");

/// `progress` holds one list of NDJSON lines per scene.
void write_attack_run(const std::filesystem::path& dir, const Corpus& corpus, const harness::SuiteRun& run,
                      const RunInfo& info, const std::vector<std::vector<std::string>>& progress);

RunInfo read_run_info(const std::filesystem::path& dir);

/// Throws CorpusError when the run directory or any saved mask is missing.
LoadedRun load_run(const std::filesystem::path& dir, const Corpus& corpus);

}  // namespace xpatch::rundir

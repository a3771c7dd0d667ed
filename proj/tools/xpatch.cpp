// xpatch: command-line front end for the cross-modal patch attack library.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "xpatch/corpus.hpp"
#include "xpatch/external_oracle.hpp"
#include "xpatch/harness.hpp"
#include "xpatch/png_io.hpp"
#include "xpatch/render.hpp"
#include "xpatch/rundir.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace xpatch;

namespace {

enum Exit { kOk = 0, kConfig = 2, kCorpus = 3, kOracle = 4, kInternal = 5 };

struct Common {
    std::string corpus;
    std::string suite = "standard";
    bool synthetic = false;
    std::string config_path;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    std::string out;
    std::string oracle_visible;
    std::string oracle_infrared;
    bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c, bool with_corpus = true) {
    if (with_corpus) {
        cmd->add_option("--corpus", c.corpus, "Corpus directory (vis/, inf/, annotations.json)");
        cmd->add_option("--suite", c.suite, "Built-in synthetic suite when --corpus is absent")
            ->check(CLI::IsMember({"standard", "conflict"}));
        cmd->add_flag("--synthetic", c.synthetic, "Use the corpus's synthetic coverage oracles");
        cmd->add_option("--oracle-visible", c.oracle_visible, "stdio:<cmd> or http://host:port");
        cmd->add_option("--oracle-infrared", c.oracle_infrared, "stdio:<cmd> or http://host:port");
    }
    cmd->add_option("--config", c.config_path, "Run configuration file (key = value)");
    cmd->add_option("--set", c.sets, "Override one config key: key=value")->allow_extra_args(false);
    cmd->add_option("--seed", c.seed, "Base seed");
    cmd->add_option("--jobs", c.jobs, "Scenes attacked concurrently")->check(CLI::PositiveNumber);
    cmd->add_flag("-q,--quiet", c.quiet, "No progress on stderr");
}

RunConfig load_config(const Common& c) {
    RunConfig cfg = c.config_path.empty() ? RunConfig{} : RunConfig::load(c.config_path);
    for (const auto& kv : c.sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (c.seed) cfg.seed = *c.seed;
    cfg.validate();
    return cfg;
}

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

struct Setup {
    Corpus corpus;
    harness::OracleProvider provider;
    rundir::RunInfo info;
};

Corpus open_corpus(const std::string& where, const RunConfig& cfg) {
    if (where.rfind("suite:", 0) == 0) {
        std::string name = where.substr(6);
        if (name == "standard") return generate_synthetic_corpus(standard_suite_spec(), cfg);
        if (name == "conflict") return generate_synthetic_corpus(conflict_suite_spec(), cfg);
        throw CorpusError("unknown suite '" + name + "'");
    }
    return load_corpus(where);
}

Setup open_setup(const rundir::RunInfo& info, const RunConfig& cfg) {
    Setup s;
    s.info = info;
    s.corpus = open_corpus(info.corpus, cfg);
    if (info.synthetic) {
        if (!s.corpus.synthetic()) throw CorpusError("--synthetic needs a corpus with synthetic.json");
        s.provider = harness::synthetic_provider(s.corpus, cfg.cover);
    } else {
        if (info.oracle_visible.empty() || info.oracle_infrared.empty())
            throw ConfigError(
                "no oracle endpoint: pass --synthetic, --oracle-visible/--oracle-infrared, or set XPATCH_ORACLE");
        s.provider = harness::shared_provider({oracle::external_oracle(info.oracle_visible, Modality::visible),
                                               oracle::external_oracle(info.oracle_infrared, Modality::infrared)});
    }
    return s;
}

rundir::RunInfo info_from(const Common& c) {
    rundir::RunInfo info;
    if (!c.corpus.empty()) {
        info.corpus = fs::absolute(c.corpus).lexically_normal().string();
    } else if (c.synthetic) {
        info.corpus = "suite:" + c.suite;
    } else {
        throw CorpusError("no corpus given (use --corpus, or --synthetic for a built-in suite)");
    }
    info.synthetic = c.synthetic;
    if (!c.synthetic) {
        std::string fallback = env_or("XPATCH_ORACLE", "");
        info.oracle_visible = !c.oracle_visible.empty() ? c.oracle_visible : env_or("XPATCH_ORACLE_VISIBLE", fallback);
        info.oracle_infrared =
            !c.oracle_infrared.empty() ? c.oracle_infrared : env_or("XPATCH_ORACLE_INFRARED", fallback);
    }
    return info;
}

// Run-dir commands accept the same oracle flags to override what run.json recorded.
rundir::RunInfo info_for_run(const fs::path& run, const Common& c) {
    auto info = rundir::read_run_info(run);
    if (!c.corpus.empty()) info.corpus = fs::absolute(c.corpus).lexically_normal().string();
    if (c.synthetic) info.synthetic = true;
    if (!c.oracle_visible.empty()) info.oracle_visible = c.oracle_visible, info.synthetic = false;
    if (!c.oracle_infrared.empty()) info.oracle_infrared = c.oracle_infrared, info.synthetic = false;
    return info;
}

harness::SuiteOptions suite_options(const Common& c, const Corpus& corpus,
                                    std::vector<std::vector<std::string>>* progress) {
    harness::SuiteOptions o;
    o.jobs = c.jobs;
    if (progress) progress->assign(corpus.size(), {});
    o.on_progress = [&c, &corpus, progress](std::size_t i, const optimizer::ProgressRecord& r) {
        json line = json::parse(r.to_line());
        line["scene"] = corpus.scenes[i].id;
        if (progress) (*progress)[i].push_back(line.dump());
        if (!c.quiet && (r.generation % 25 == 0)) std::cerr << line.dump() << "\n";
    };
    return o;
}

void print_summary(const harness::ExperimentReport& r) {
    std::cout << r.name;
    if (!r.condition.empty()) std::cout << " [" << r.condition << "]";
    std::cout << "  asr=" << r.asr << " asr_vis=" << r.asr_vis << " asr_inf=" << r.asr_inf
              << "  ap_drop_vis=" << r.ap_visible.drop() << " ap_drop_inf=" << r.ap_infrared.drop()
              << "  excluded=" << r.excluded().size() << "\n";
}

fs::path require_out(const std::string& out) {
    if (out.empty()) throw ConfigError("--out is required");
    return out;
}

// ------------------------------------------------------------------ commands

int cmd_attack(const Common& c) {
    auto cfg = load_config(c);
    auto info = info_from(c);
    fs::path out = require_out(c.out);
    auto setup = open_setup(info, cfg);
    std::vector<std::vector<std::string>> progress;
    auto run = harness::run_suite(setup.corpus, setup.provider, cfg, suite_options(c, setup.corpus, &progress));
    rundir::write_attack_run(out, setup.corpus, run, info, progress);
    print_summary(run.report);
    return kOk;
}

int cmd_eval(const Common& c, const std::string& run_dir) {
    if (run_dir.empty()) {
        // Clean detection quality of the oracles on the corpus.
        auto cfg = load_config(c);
        auto setup = open_setup(info_from(c), cfg);
        std::vector<harness::ImageDetections> vis, inf;
        json rows = json::array();
        for (std::size_t i = 0; i < setup.corpus.size(); ++i) {
            const auto& scene = setup.corpus.scenes[i];
            auto clean = optimizer::clean_scores(scene, setup.provider(i));
            vis.push_back({{scene.gt_box}, clean.visible_detections});
            inf.push_back({{scene.gt_box}, clean.infrared_detections});
            rows.push_back({{"id", scene.id},
                            {"clean_visible", clean.visible},
                            {"clean_infrared", clean.infrared},
                            {"attackable", clean.visible > cfg.thre && clean.infrared > cfg.thre}});
        }
        json j = {{"name", "eval"},
                  {"ap", {{"visible", harness::average_precision(vis, cfg.thre)},
                          {"infrared", harness::average_precision(inf, cfg.thre)}}},
                  {"scenes", rows}};
        std::string text = j.dump(2) + "\n";
        if (!c.out.empty())
            rundir::write_text(fs::path(c.out) / "eval.json", text);
        else
            std::cout << text;
        return kOk;
    }
    // Re-score a finished run from its saved masks.
    auto info = info_for_run(run_dir, c);
    auto base = RunConfig::parse(rundir::read_text(fs::path(run_dir) / "config.txt"));
    auto setup = open_setup(info, base);
    auto loaded = rundir::load_run(run_dir, setup.corpus);
    auto reports = harness::robustness_eval(setup.corpus, setup.provider, loaded.attacks, loaded.config, {}, {});
    auto& r = reports.front();
    r.name = "eval";
    fs::path out = c.out.empty() ? fs::path(run_dir) : fs::path(c.out);
    rundir::write_report(out, r, "eval");
    print_summary(r);
    return kOk;
}

int cmd_baseline(const Common& c, const std::vector<std::string>& shapes) {
    auto cfg = load_config(c);
    auto setup = open_setup(info_from(c), cfg);
    fs::path out = require_out(c.out);
    std::vector<harness::ShapeKind> kinds;
    if (shapes.empty() || (shapes.size() == 1 && shapes[0] == "all"))
        kinds.assign(std::begin(harness::kAllShapeKinds), std::end(harness::kAllShapeKinds));
    else
        for (const auto& s : shapes) kinds.push_back(harness::parse_shape_kind(s));
    json summary = json::array();
    for (auto k : kinds) {
        auto r = harness::fixed_shape_baseline(setup.corpus, setup.provider, cfg, k, suite_options(c, setup.corpus, nullptr));
        rundir::write_report(out, r, "baseline_" + harness::to_string(k));
        summary.push_back({{"shape", harness::to_string(k)}, {"asr", r.asr}, {"asr_visible", r.asr_vis},
                           {"asr_infrared", r.asr_inf}});
        print_summary(r);
    }
    rundir::write_text(out / "baseline.json", json{{"name", "baseline"}, {"shapes", summary}}.dump(2) + "\n");
    return kOk;
}

int cmd_ablate(const Common& c) {
    auto cfg = load_config(c);
    auto info = info_from(c);
    auto setup = open_setup(info, cfg);
    fs::path out = require_out(c.out);
    std::vector<std::vector<std::string>> pj, ps;
    auto opts_joint = suite_options(c, setup.corpus, &pj);
    auto opts_sum = suite_options(c, setup.corpus, &ps);
    RunConfig jc = cfg, sc = cfg;
    jc.fitness_mode = fitness::Mode::joint;
    sc.fitness_mode = fitness::Mode::sum;
    auto joint = harness::run_suite(setup.corpus, setup.provider, jc, opts_joint);
    auto sum = harness::run_suite(setup.corpus, setup.provider, sc, opts_sum);
    joint.report.name = sum.report.name = "ablate-fitness";
    joint.report.condition = "joint";
    sum.report.condition = "sum";
    rundir::write_attack_run(out / "joint", setup.corpus, joint, info, pj);
    rundir::write_attack_run(out / "sum", setup.corpus, sum, info, ps);
    auto arm = [](const harness::SuiteRun& r) {
        return json{{"asr", r.report.asr},
                    {"asr_visible", r.report.asr_vis},
                    {"asr_infrared", r.report.asr_inf},
                    {"median_dis_gap", r.report.metrics.at("median_dis_gap")}};
    };
    rundir::write_text(out / "ablation.json",
                       json{{"name", "ablate-fitness"}, {"joint", arm(joint)}, {"sum", arm(sum)}}.dump(2) + "\n");
    print_summary(joint.report);
    print_summary(sum.report);
    return kOk;
}

int cmd_sweep(const Common& c, const std::vector<double>& lambdas, const std::vector<int>& counts) {
    auto cfg = load_config(c);
    auto setup = open_setup(info_from(c), cfg);
    fs::path out = require_out(c.out);
    auto grid = harness::sweep(setup.corpus, setup.provider, cfg, lambdas, counts, suite_options(c, setup.corpus, nullptr));
    rundir::write_text(out / "sweep.json", harness::sweep_to_json(grid));
    std::string csv = "lambda,patch_count,asr,asr_visible,asr_infrared,ap_drop_visible,ap_drop_infrared\n";
    for (const auto& cell : grid) {
        std::ostringstream os;
        os.precision(17);
        os << cell.lambda << ',' << cell.patch_count << ',' << cell.report.asr << ',' << cell.report.asr_vis << ','
           << cell.report.asr_inf << ',' << cell.report.ap_visible.drop() << ',' << cell.report.ap_infrared.drop()
           << '\n';
        csv += os.str();
    }
    rundir::write_text(out / "sweep.csv", csv);
    for (const auto& cell : grid) print_summary(cell.report);
    return kOk;
}

int cmd_simulate(const Common& c, const std::string& run_dir, const std::vector<int>& translate,
                 const std::vector<double>& incomplete) {
    for (int d : translate)
        if (d < 0) throw ConfigError("--translate takes non-negative pixel offsets");
    for (double f : incomplete)
        if (!(f >= 0 && f < 1)) throw ConfigError("--incomplete takes fractions in [0, 1)");
    auto info = info_for_run(run_dir, c);
    auto base = RunConfig::parse(rundir::read_text(fs::path(run_dir) / "config.txt"));
    auto setup = open_setup(info, base);
    auto loaded = rundir::load_run(run_dir, setup.corpus);
    auto reports = harness::robustness_eval(setup.corpus, setup.provider, loaded.attacks, loaded.config, translate,
                                            incomplete);
    json conditions = json::array();
    for (const auto& r : reports) {
        conditions.push_back(json::parse(r.to_json()));
        print_summary(r);
    }
    fs::path out = c.out.empty() ? fs::path(run_dir) : fs::path(c.out);
    rundir::write_text(out / "robustness.json",
                       json{{"name", "simulate-errors"}, {"conditions", conditions}}.dump(2) + "\n");
    return kOk;
}

int cmd_defend(const Common& c, const std::string& run_dir, int window) {
    auto info = info_for_run(run_dir, c);
    auto base = RunConfig::parse(rundir::read_text(fs::path(run_dir) / "config.txt"));
    auto setup = open_setup(info, base);
    auto loaded = rundir::load_run(run_dir, setup.corpus);
    auto r = harness::defense_eval(setup.corpus, setup.provider, loaded.attacks, loaded.config, window);
    fs::path out = c.out.empty() ? fs::path(run_dir) : fs::path(c.out);
    rundir::write_report(out, r, "defense");
    print_summary(r);
    return kOk;
}

int cmd_render(const Common& c, const std::string& run_dir) {
    fs::path run = run_dir;
    fs::path out = require_out(c.out);
    fs::create_directories(out);
    bool any = false;
    if (fs::exists(run / "sweep.json")) {
        json j = json::parse(rundir::read_text(run / "sweep.json"));
        std::vector<harness::SweepCell> grid;
        for (const auto& cell : j.at("cells")) {
            harness::SweepCell s;
            s.lambda = cell.at("lambda").get<double>();
            s.patch_count = cell.at("patch_count").get<int>();
            s.report.asr = cell.at("asr").get<double>();
            grid.push_back(std::move(s));
        }
        io::write_png(out / "sweep.png", render::sweep_plot(grid));
        any = true;
    }
    if (fs::exists(run / "run.json")) {
        json meta = json::parse(rundir::read_text(run / "run.json"));
        for (const auto& s : meta.at("scenes")) {
            auto id = s.at("id").get<std::string>();
            auto patches = s.at("patches").get<std::size_t>();
            if (patches == 0) continue;
            fs::path sd = run / "scenes" / id;
            std::vector<BinaryMask> masks;
            for (std::size_t k = 0; k < patches; ++k) {
                fs::path p = sd / ("mask_" + std::to_string(k) + ".png");
                if (!fs::exists(p)) throw CorpusError("missing mask " + p.string());
                masks.push_back(io::read_mask_png(p));
            }
            auto mask = compose::union_masks(masks);
            for (const char* mod : {"visible", "infrared"}) {
                fs::path src = sd / (std::string("adv_") + mod + ".png");
                if (!fs::exists(src)) throw CorpusError("missing " + src.string());
                io::write_png(out / (id + "_" + mod + ".png"), render::overlay(io::read_png(src), mask));
            }
        }
        any = true;
    }
    if (!any) throw CorpusError("nothing to render in " + run.string());
    return kOk;
}

int cmd_gen_corpus(const Common& c, const std::string& suite, int count) {
    auto cfg = load_config(c);
    auto spec = suite == "conflict" ? conflict_suite_spec() : standard_suite_spec();
    if (count > 0) spec.count = count;
    if (c.seed) spec.seed = *c.seed;
    save_corpus(require_out(c.out), generate_synthetic_corpus(spec, cfg));
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cross-modal adversarial patch shapes against visible/infrared detectors"};
    app.require_subcommand(1);
    Common c;

    auto* attack = app.add_subcommand("attack", "Optimize patch shapes on every scene");
    add_common(attack, c);
    attack->add_option("--out", c.out, "Run directory")->required();

    std::string run_dir;
    auto* eval = app.add_subcommand("eval", "Clean AP of the oracles, or re-score a run with --run");
    add_common(eval, c);
    eval->add_option("--run", run_dir, "Run directory to re-score");
    eval->add_option("--out", c.out, "Output directory");

    std::vector<std::string> shapes;
    auto* baseline = app.add_subcommand("baseline", "Area-matched fixed-shape baselines");
    add_common(baseline, c);
    baseline->add_option("--shape", shapes, "circle square rectangle triangle initial, or all");
    baseline->add_option("--out", c.out)->required();

    auto* ablate = app.add_subcommand("ablate-fitness", "Joint vs summed fitness on the same suite");
    add_common(ablate, c);
    ablate->add_option("--out", c.out)->required();

    std::vector<double> lambdas{1, 2, 3};
    std::vector<int> counts{1, 2, 3};
    auto* sweep = app.add_subcommand("sweep", "ASR over lambda x patch count");
    add_common(sweep, c);
    sweep->add_option("--lambda", lambdas);
    sweep->add_option("--patches", counts);
    sweep->add_option("--out", c.out)->required();

    std::vector<int> translate;
    std::vector<double> incomplete;
    auto* simulate = app.add_subcommand("simulate-errors", "Re-score saved masks under shifts and erosion");
    add_common(simulate, c);
    simulate->add_option("run", run_dir, "Run directory")->required();
    simulate->add_option("--translate", translate, "Pixel offsets");
    simulate->add_option("--incomplete", incomplete, "Fractions of patch area removed");
    simulate->add_option("--out", c.out, "Output directory (default: the run directory)");

    int window = 3;
    auto* defend = app.add_subcommand("defend", "Re-score a run through median smoothing");
    add_common(defend, c);
    defend->add_option("run", run_dir, "Run directory")->required();
    defend->add_option("--window", window)->check(CLI::Range(1, 99));
    defend->add_option("--out", c.out);

    auto* render_cmd = app.add_subcommand("render", "Overlay PNGs and sweep plot");
    render_cmd->add_option("run", run_dir, "Run or sweep directory")->required();
    render_cmd->add_option("--out", c.out)->required();

    auto* print = app.add_subcommand("print-config", "Print the effective configuration");
    add_common(print, c, false);

    std::string suite = "standard";
    int count = 0;
    auto* gen = app.add_subcommand("gen-corpus", "Write a synthetic corpus to disk");
    add_common(gen, c, false);
    gen->add_option("--suite", suite)->check(CLI::IsMember({"standard", "conflict"}));
    gen->add_option("--count", count);
    gen->add_option("--out", c.out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (*attack) return cmd_attack(c);
        if (*eval) return cmd_eval(c, run_dir);
        if (*baseline) return cmd_baseline(c, shapes);
        if (*ablate) return cmd_ablate(c);
        if (*sweep) return cmd_sweep(c, lambdas, counts);
        if (*simulate) return cmd_simulate(c, run_dir, translate, incomplete);
        if (*defend) return cmd_defend(c, run_dir, window);
        if (*render_cmd) return cmd_render(c, run_dir);
        if (*print) {
            std::cout << load_config(c).serialize();
            return kOk;
        }
        if (*gen) return cmd_gen_corpus(c, suite, count);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const CorpusError& e) {
        std::cerr << "corpus error: " << e.what() << "\n";
        return kCorpus;
    } catch (const oracle::OracleError& e) {
        std::cerr << "oracle error: " << e.what() << "\n";
        return kOracle;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kInternal;
    }
    return kInternal;
}

// satkit: scale maps, token layouts, forward passes, evaluation and cost
// reports over scene files.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "satkit/error.hpp"
#include "satkit/pixmap.hpp"
#include "satkit/serialize.hpp"

namespace fs = std::filesystem;
using namespace satkit;

namespace {

enum ExitCode { kOk = 0, kParse = 2, kValidation = 3, kCompute = 4, kIo = 5, kUsage = 64 };

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

Level log_level() {
    static const Level level = [] {
        const char* env = std::getenv("SATKIT_LOG");
        const std::string v = env ? env : "warn";
        if (v == "error") return Level::error;
        if (v == "info") return Level::info;
        if (v == "debug") return Level::debug;
        return Level::warn;
    }();
    return level;
}

std::mutex log_mutex;

void log(Level level, const std::string& msg) {
    if (level > log_level()) return;
    static const char* names[] = {"error", "warn", "info", "debug"};
    std::lock_guard lock(log_mutex);
    std::cerr << "satkit [" << names[static_cast<int>(level)] << "] " << msg << '\n';
}

struct Options {
    std::vector<std::string> scenes;
    std::string config;
    std::string weights;
    std::string pred;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    bool gt_scale_map = false;
    int jobs = 1;
    int synth_count = 3;
};

struct Context {
    RunConfig cfg;
    BodyModelDef model;
    std::optional<NetworkWeights> weights;
};

Context load_context(const Options& opt, bool need_weights) {
    Context ctx;
    if (!opt.config.empty()) ctx.cfg = load_run_config(opt.config);
    if (opt.seed) {
        ctx.cfg.seed = *opt.seed;
        ctx.cfg.arch.seed = *opt.seed;
    }
    ctx.model = ctx.cfg.body_model ? body_model_from_json(read_json_file(*ctx.cfg.body_model))
                                   : make_mini_model(0);
    ctx.cfg.arch.joints = ctx.model.joint_count();
    validate(ctx.cfg);
    if (!opt.weights.empty()) {
        ctx.weights = weights_from_json(read_json_file(opt.weights), ctx.cfg.arch);
    } else if (need_weights) {
        ctx.weights = init_weights(ctx.cfg.arch);
    }
    return ctx;
}

fs::path scene_dir(const Options& opt, const Scene& scene) {
    fs::path dir = opt.out;
    if (opt.scenes.size() > 1) dir /= scene.name.empty() ? "scene" : scene.name;
    fs::create_directories(dir);
    return dir;
}

std::string counts_line(const std::string& name, const TokenCounts& k) {
    std::ostringstream s;
    s << name << ": k_lr=" << k.k_lr << " k_b=" << k.k_b << " k'_b=" << k.k_b_pooled
      << " k_small=" << k.k_small << " k_large=" << k.k_large << " k_hr=" << k.k_hr
      << " k_sa=" << k.k_sa;
    return s.str();
}

ForwardResult run_forward(const Scene& scene, const Context& ctx, ScaleSource source) {
    validate(scene, &ctx.model);
    if (scene.patch_size != ctx.cfg.arch.patch) {
        throw Error(Errc::invalid_argument, "scene patch_size differs from arch.patch");
    }
    const ImagePair images = make_image_pair(scene_image(scene, ctx.cfg.seed));
    const ScaleMap gt = gt_scale_map(scene);
    ForwardOptions fo;
    fo.thresholds = ctx.cfg.thresholds;
    fo.source = source;
    fo.gt_map = &gt;
    fo.pool_levels = ctx.cfg.pool_levels();
    return full_forward(images, ctx.cfg.arch, *ctx.weights, fo);
}

// Runs fn over every scene, up to opt.jobs at a time.
void for_each_scene(const Options& opt, const std::function<void(const Scene&)>& fn) {
    std::vector<Scene> scenes;
    for (const auto& path : opt.scenes) scenes.push_back(load_scene(path));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < scenes.size(); i = next++) {
            try {
                fn(scenes[i]);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(scenes.size())));
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

void cmd_scale_map(const Options& opt) {
    const Context ctx = load_context(opt, false);
    for_each_scene(opt, [&](const Scene& scene) {
        validate(scene, &ctx.model);
        const fs::path dir = scene_dir(opt, scene);
        const ScaleMap gt = gt_scale_map(scene);
        write_text_file(dir / "scale_map_gt.json", dump(to_json(gt)));
        write_ppm(dir / "scale_map_gt.ppm",
                  render_scale_map(gt, scene.image_hr, scene.patch_size, ctx.cfg.thresholds.alpha_c));
        if (ctx.weights) {
            const ForwardResult fwd = run_forward(scene, ctx, ScaleSource::predicted);
            write_text_file(dir / "scale_map_pred.json", dump(to_json(fwd.predicted_map)));
            write_ppm(dir / "scale_map_pred.ppm",
                      render_scale_map(fwd.predicted_map, scene.image_hr, scene.patch_size,
                                       ctx.cfg.thresholds.alpha_c));
        }
        log(Level::info, "wrote scale maps for " + scene.name + " to " + dir.string());
    });
}

void cmd_tokenize(const Options& opt) {
    const Context ctx = load_context(opt, false);
    std::mutex out_mutex;
    for_each_scene(opt, [&](const Scene& scene) {
        validate(scene, &ctx.model);
        const fs::path dir = scene_dir(opt, scene);
        TokenLayout layout;
        if (ctx.weights && !opt.gt_scale_map) {
            layout = run_forward(scene, ctx, ScaleSource::predicted).layout;
        } else {
            layout = assemble(classify(gt_scale_map(scene), ctx.cfg.thresholds), ctx.cfg.pool_levels());
        }
        write_text_file(dir / "token_layout.json", dump(to_json(layout)));
        write_text_file(dir / "token_counts.json", dump(to_json(layout.counts)));
        write_ppm(dir / "tokens.ppm", render_token_layout(layout, scene.image_hr, scene.patch_size));
        std::lock_guard lock(out_mutex);
        std::cout << counts_line(scene.name, layout.counts) << '\n';
    });
}

void cmd_forward(const Options& opt) {
    const Context ctx = load_context(opt, true);
    for_each_scene(opt, [&](const Scene& scene) {
        const fs::path dir = scene_dir(opt, scene);
        const ForwardResult fwd =
            run_forward(scene, ctx, opt.gt_scale_map ? ScaleSource::ground_truth : ScaleSource::predicted);
        PredictionSet set{scene.name, fwd.predictions, fwd.valid};
        write_text_file(dir / "predictions.json", dump(to_json(set)));
        write_text_file(dir / "scale_map_pred.json", dump(to_json(fwd.predicted_map)));
        write_text_file(dir / "token_counts.json", dump(to_json(fwd.layout.counts)));
        const bool supervised = std::all_of(scene.persons.begin(), scene.persons.end(), [](const auto& p) {
            return p.params.has_value() || p.joints.has_value();
        });
        if (supervised && scene.persons.size() <= fwd.predictions.size()) {
            const SceneLoss loss = scene_loss(scene, fwd, ctx.model, ctx.cfg);
            json lj = to_json(loss.breakdown);
            lj["match"] = loss.match.gt_to_pred;
            lj["match_cost"] = loss.match.cost;
            write_text_file(dir / "loss.json", dump(lj));
        }
        log(Level::info, scene.name + ": " + std::to_string(fwd.valid.size()) + " of " +
                             std::to_string(fwd.predictions.size()) + " predictions kept");
    });
}

void cmd_eval(const Options& opt) {
    if (opt.scenes.size() != 1) throw Error(Errc::invalid_argument, "eval takes exactly one --scene");
    if (opt.pred.empty()) throw Error(Errc::invalid_argument, "eval needs --pred");
    const Context ctx = load_context(opt, false);
    const Scene scene = load_scene(opt.scenes.front());
    validate(scene, &ctx.model);
    const PredictionSet set = prediction_set_from_json(read_json_file(opt.pred));
    std::vector<Prediction> kept;
    for (int i : set.valid) kept.push_back(set.predictions[i]);
    const EvalReport rep = evaluate(scene, kept, ctx.model, ctx.cfg);
    const fs::path dir = scene_dir(opt, scene);
    write_text_file(dir / "eval_report.json", dump(to_json(rep)));
    const std::string table = format_report_table(rep);
    write_text_file(dir / "eval_report.txt", table);
    std::cout << table;
}

void cmd_cost(const Options& opt) {
    const Context ctx = load_context(opt, false);
    struct Row {
        std::string scene;
        TokenCounts counts;
        PipelineCost cost;
    };
    std::vector<Row> rows(opt.scenes.size());
    std::vector<Scene> scenes;
    for (const auto& path : opt.scenes) scenes.push_back(load_scene(path));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < scenes.size(); i = next++) {
            try {
                const Scene& scene = scenes[i];
                validate(scene, &ctx.model);
                TokenLayout layout;
                if (ctx.weights && !opt.gt_scale_map) {
                    layout = run_forward(scene, ctx, ScaleSource::predicted).layout;
                } else {
                    layout = assemble(classify(gt_scale_map(scene), ctx.cfg.thresholds),
                                      ctx.cfg.pool_levels());
                }
                rows[i] = {scene.name, layout.counts, pipeline_cost(layout.counts, ctx.cfg.cost)};
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(scenes.size())));
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    std::ostringstream csv;
    csv.precision(17);
    csv << "scene,scheme,tokens,k_lr,k_b,k_b_pooled,k_small,k_large,k_hr,macs\n";
    for (const Row& r : rows) {
        const TokenCounts& k = r.counts;
        auto line = [&](const char* scheme, long tokens, double macs) {
            csv << r.scene << ',' << scheme << ',' << tokens << ',' << k.k_lr << ',' << k.k_b << ','
                << k.k_b_pooled << ',' << k.k_small << ',' << k.k_large << ',' << k.k_hr << ','
                << macs << '\n';
        };
        line("uniform_lr", k.k_lr, r.cost.uniform_lr);
        line("uniform_hr", 4L * k.k_lr, r.cost.uniform_hr);
        line("scale_adaptive", k.k_sa, r.cost.scale_adaptive);
    }
    fs::create_directories(opt.out);
    write_text_file(fs::path(opt.out) / "cost.csv", csv.str());
    std::cout << csv.str();
}

void cmd_synth(const Options& opt) {
    const Context ctx = load_context(opt, false);
    fs::create_directories(opt.out);
    SyntheticSceneOptions so;
    so.patch_size = ctx.cfg.arch.patch;
    const std::uint64_t base = opt.seed.value_or(ctx.cfg.seed);
    for (int i = 0; i < opt.synth_count; ++i) {
        Scene s = make_synthetic_scene(base + i, so, ctx.model);
        s.name = "scene_" + std::to_string(i);
        write_text_file(fs::path(opt.out) / (s.name + ".json"), dump(to_json(s)));
    }
}

int exit_code_for(const Error& e) {
    switch (e.category()) {
        case ErrorCategory::parse: return kParse;
        case ErrorCategory::validation: return kValidation;
        case ErrorCategory::compute: return kCompute;
        case ErrorCategory::io: return kIo;
    }
    return kCompute;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"satkit: scale-adaptive token toolkit"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub, bool scenes_required) {
        auto* s = sub->add_option("--scene", opt.scenes, "Scene JSON file (repeatable)");
        if (scenes_required) s->required();
        sub->add_option("--config", opt.config, "Run config JSON");
        sub->add_option("--weights", opt.weights, "Network weight JSON");
        sub->add_flag("--gt-scale-map", opt.gt_scale_map, "Use the ground-truth scale map");
        sub->add_option("--seed", opt.seed, "Seed for weights and synthesized pixels");
        sub->add_option("--out", opt.out, "Output directory");
        sub->add_option("--jobs", opt.jobs, "Scenes processed in parallel")->check(CLI::PositiveNumber);
    };

    std::function<void(const Options&)> action;
    auto* scale_map = app.add_subcommand("scale-map", "Write GT (and predicted) scale maps");
    add_common(scale_map, true);
    scale_map->callback([&] { action = cmd_scale_map; });

    auto* tokenize = app.add_subcommand("tokenize", "Write the scale-adaptive token layout");
    add_common(tokenize, true);
    tokenize->callback([&] { action = cmd_tokenize; });

    auto* forward_cmd = app.add_subcommand("forward", "Run the network forward pass");
    add_common(forward_cmd, true);
    forward_cmd->callback([&] { action = cmd_forward; });

    auto* eval = app.add_subcommand("eval", "Evaluate predictions against a scene");
    add_common(eval, true);
    eval->add_option("--pred", opt.pred, "predictions.json from forward")->required();
    eval->callback([&] { action = cmd_eval; });

    auto* cost = app.add_subcommand("cost", "Token counts and modeled multiply-adds per scheme");
    add_common(cost, true);
    cost->callback([&] { action = cmd_cost; });

    auto* synth = app.add_subcommand("synth", "Generate synthetic scene files");
    add_common(synth, false);
    synth->add_option("--count", opt.synth_count, "Number of scenes")->check(CLI::PositiveNumber);
    synth->callback([&] { action = cmd_synth; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        action(opt);
    } catch (const Error& e) {
        log(Level::error, std::string(errc_name(e.code())) + ": " + e.what());
        return exit_code_for(e);
    } catch (const fs::filesystem_error& e) {
        log(Level::error, std::string("io: ") + e.what());
        return kIo;
    } catch (const std::exception& e) {
        log(Level::error, e.what());
        return kCompute;
    }
    return kOk;
}

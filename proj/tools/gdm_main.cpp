#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gdm/dataset.hpp"
#include "gdm/digest.hpp"
#include "gdm/gdm_model.hpp"
#include "gdm/hyperparams.hpp"
#include "gdm/pca.hpp"
#include "gdm/report_io.hpp"
#include "gdm/scenarios.hpp"
#include "gdm/snapshot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string iso_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

json params_to_json(const gdm::GwrHyperParams& p) {
    return json{{"insertion_threshold", p.insertion_threshold},
                {"habituation_threshold", p.habituation_threshold},
                {"context_count", p.context_count},
                {"context_blend", p.context_blend},
                {"context_weights", p.context_weights},
                {"lr_bmu", p.lr_bmu},
                {"lr_neighbor", p.lr_neighbor},
                {"lr_context", p.lr_context},
                {"hab_tau_bmu", p.hab_tau_bmu},
                {"hab_tau_neighbor", p.hab_tau_neighbor},
                {"hab_kappa", p.hab_kappa},
                {"max_edge_age", p.max_edge_age},
                {"removal_threshold", p.removal_threshold},
                {"label_delta_pos", p.label_delta_pos},
                {"label_delta_neg", p.label_delta_neg},
                {"metric", gdm::metric_name(p.metric)}};
}

void params_from_json(const json& j, gdm::GwrHyperParams& p) {
    if (j.contains("insertion_threshold")) p.insertion_threshold = j["insertion_threshold"];
    if (j.contains("habituation_threshold")) p.habituation_threshold = j["habituation_threshold"];
    if (j.contains("context_count")) p.context_count = j["context_count"];
    if (j.contains("context_blend")) p.context_blend = j["context_blend"];
    if (j.contains("context_weights"))
        p.context_weights = j["context_weights"].get<std::vector<double>>();
    if (j.contains("lr_bmu")) p.lr_bmu = j["lr_bmu"];
    if (j.contains("lr_neighbor")) p.lr_neighbor = j["lr_neighbor"];
    if (j.contains("lr_context")) p.lr_context = j["lr_context"];
    if (j.contains("hab_tau_bmu")) p.hab_tau_bmu = j["hab_tau_bmu"];
    if (j.contains("hab_tau_neighbor")) p.hab_tau_neighbor = j["hab_tau_neighbor"];
    if (j.contains("hab_kappa")) p.hab_kappa = j["hab_kappa"];
    if (j.contains("max_edge_age")) p.max_edge_age = j["max_edge_age"];
    if (j.contains("removal_threshold")) p.removal_threshold = j["removal_threshold"];
    if (j.contains("label_delta_pos")) p.label_delta_pos = j["label_delta_pos"];
    if (j.contains("label_delta_neg")) p.label_delta_neg = j["label_delta_neg"];
    if (j.contains("metric")) p.metric = gdm::metric_from_string(j["metric"]);
}

// --- generate ---------------------------------------------------------------

struct GenerateArgs {
    gdm::CollectionSpec spec;
    std::string out_dir;
    bool text = false;
};

int cmd_generate(const GenerateArgs& args) {
    fs::create_directories(args.out_dir);
    const gdm::Dataset ds = gdm::generate_dataset(args.spec);

    std::vector<std::string> files;
    json digests = json::object();
    for (int coll = 0; coll < ds.collections; ++coll) {
        std::vector<const gdm::Sequence*> seqs;
        for (const auto& s : ds.sequences)
            if (s.collection == coll) seqs.push_back(&s);
        char name[64];
        std::snprintf(name, sizeof(name), "collection_%02d.gdmf", coll);
        const std::string path = (fs::path(args.out_dir) / name).string();
        gdm::write_gdmf_file(path, ds.dim, seqs, args.text);
        files.push_back(name);
        digests[name] = gdm::digest_of_file(path);
    }

    const auto& spec = args.spec;
    json manifest{{"command", "generate"},
                  {"code_version", kVersion},
                  {"created", iso_now()},
                  {"seed", spec.seed},
                  {"dim", spec.dim},
                  {"categories", spec.categories},
                  {"instances_per_category", spec.instances_per_category},
                  {"frames_per_sequence", spec.frames_per_sequence},
                  {"collections", spec.collections},
                  {"train_collections", spec.train_collections},
                  {"intra_sigma", spec.intra_sigma},
                  {"separation", spec.separation},
                  {"radius", spec.radius},
                  {"instance_offset", spec.instance_offset},
                  {"trajectory_amp", spec.trajectory_amp},
                  {"trajectory_dims", spec.trajectory_dims},
                  {"noise_sigma", spec.augmentation.noise_sigma},
                  {"drop_prob", spec.augmentation.drop_prob},
                  {"occlusion_block", spec.augmentation.occlusion_block},
                  {"text", args.text},
                  {"frames", ds.frame_count()},
                  {"files", files},
                  {"digests", digests}};
    write_json_file((fs::path(args.out_dir) / "manifest.json").string(), manifest);

    std::cout << "generated " << ds.sequences.size() << " sequences (" << ds.frame_count()
              << " frames, dim " << ds.dim << ") into " << args.out_dir << "\n";
    return 0;
}

// --- dataset loading --------------------------------------------------------

gdm::Dataset load_data_dir(const std::string& dir, int train_collections_flag) {
    std::vector<std::string> paths;
    int train_collections = train_collections_flag;

    const fs::path manifest_path = fs::path(dir) / "manifest.json";
    if (fs::exists(manifest_path)) {
        std::ifstream in(manifest_path);
        json manifest;
        in >> manifest;
        for (const auto& f : manifest["files"])
            paths.push_back((fs::path(dir) / f.get<std::string>()).string());
        if (train_collections <= 0) train_collections = manifest["train_collections"];
    } else {
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.path().extension() == ".gdmf") paths.push_back(entry.path().string());
        std::sort(paths.begin(), paths.end());
        if (train_collections <= 0)
            throw std::invalid_argument(
                "no manifest.json in data directory; pass --train-collections");
    }
    if (paths.empty()) throw std::runtime_error("no .gdmf files found in " + dir);
    return gdm::load_dataset(paths, train_collections);
}

// --- run ----------------------------------------------------------------

struct RunArgs {
    std::string scenario;
    std::string data_dir;
    std::string out_dir;
    std::string config_file;
    std::string profile;
    std::string metric;
    int trials = 5;
    int epochs = 35;
    int workers = 1;
    int train_collections = 0;
    std::uint64_t seed = 1;
    double label_availability = 1.0;
    double removal_threshold = -1.0;
    int max_edge_age = 0;
    bool replay = true;
    bool temporal_context = true;
    // which flags were given explicitly on the command line
    std::map<std::string, bool> given;
};

int cmd_run(const RunArgs& args) {
    const auto started = iso_now();
    const auto t_start = std::chrono::steady_clock::now();

    gdm::ScenarioConfig cfg;
    cfg.kind = gdm::scenario_from_string(args.scenario);

    // Precedence: profile defaults < config file < explicit flags.
    json file_cfg = json::object();
    if (!args.config_file.empty()) {
        std::ifstream in(args.config_file);
        if (!in) throw std::runtime_error("cannot open config: " + args.config_file);
        in >> file_cfg;
    }

    std::string profile = cfg.kind == gdm::ScenarioKind::batch ? "batch" : "incremental";
    if (file_cfg.contains("profile")) profile = file_cfg["profile"];
    if (args.given.at("profile")) profile = args.profile;

    cfg.temporal_context = true;
    if (file_cfg.contains("temporal_context")) cfg.temporal_context = file_cfg["temporal_context"];
    if (args.given.at("temporal_context")) cfg.temporal_context = args.temporal_context;

    gdm::GdmParams params = gdm::gdm_profile(profile, cfg.temporal_context);
    if (file_cfg.contains("em")) params_from_json(file_cfg["em"], params.em);
    if (file_cfg.contains("sm")) params_from_json(file_cfg["sm"], params.sm);
    if (file_cfg.contains("replay_window")) params.replay_window = file_cfg["replay_window"];
    if (file_cfg.contains("replay_updates_temporal"))
        params.replay_updates_temporal = file_cfg["replay_updates_temporal"];
    if (file_cfg.contains("sm_input_post_adapt"))
        params.sm_input_post_adapt = file_cfg["sm_input_post_adapt"];

    cfg.profile = profile;
    cfg.trials = file_cfg.value("trials", args.trials);
    cfg.epochs = file_cfg.value("epochs", args.epochs);
    cfg.seed = file_cfg.value("seed", args.seed);
    cfg.workers = file_cfg.value("workers", args.workers);
    cfg.label_availability = file_cfg.value("label_availability", args.label_availability);
    cfg.replay = file_cfg.value("replay", args.replay);
    if (args.given.at("trials")) cfg.trials = args.trials;
    if (args.given.at("epochs")) cfg.epochs = args.epochs;
    if (args.given.at("seed")) cfg.seed = args.seed;
    if (args.given.at("workers")) cfg.workers = args.workers;
    if (args.given.at("label_availability")) cfg.label_availability = args.label_availability;
    if (args.given.at("replay")) cfg.replay = args.replay;
    if (const char* env = std::getenv("GDM_WORKERS")) cfg.workers = std::atoi(env);

    if (args.given.at("metric")) {
        const auto metric = gdm::metric_from_string(args.metric);
        params.em.metric = metric;
        params.sm.metric = metric;
    }
    if (args.given.at("removal_threshold")) {
        params.em.removal_threshold = args.removal_threshold;
        params.sm.removal_threshold = args.removal_threshold;
    }
    if (args.given.at("max_edge_age")) {
        params.em.max_edge_age = args.max_edge_age;
        params.sm.max_edge_age = args.max_edge_age;
    }
    params.replay_enabled = cfg.replay;
    params.validate();
    cfg.validate();

    const gdm::Dataset ds = load_data_dir(args.data_dir, args.train_collections);

    json effective{{"scenario", args.scenario},
                   {"profile", profile},
                   {"trials", cfg.trials},
                   {"epochs", cfg.epochs},
                   {"seed", cfg.seed},
                   {"workers", cfg.workers},
                   {"replay", cfg.replay},
                   {"temporal_context", cfg.temporal_context},
                   {"label_availability", cfg.label_availability},
                   {"replay_window", params.effective_replay_window()},
                   {"replay_updates_temporal", params.replay_updates_temporal},
                   {"sm_input_post_adapt", params.sm_input_post_adapt},
                   {"em", params_to_json(params.em)},
                   {"sm", params_to_json(params.sm)}};

    gdm::ScenarioRunResult run = gdm::run_scenario(ds, cfg, params);

    fs::create_directories(args.out_dir);
    const std::string metrics_path = (fs::path(args.out_dir) / "metrics.jsonl").string();
    gdm::write_metrics_jsonl(metrics_path, run.report);

    std::vector<std::string> outputs{"metrics.jsonl"};
    json output_digests = json::object();
    output_digests["metrics.jsonl"] = gdm::digest_of_file(metrics_path);
    for (std::size_t t = 0; t < run.models.size(); ++t) {
        char name[64];
        std::snprintf(name, sizeof(name), "model_trial%zu.gdms", t);
        const std::string path = (fs::path(args.out_dir) / name).string();
        gdm::save_model(path, run.models[t]);
        outputs.push_back(name);
        output_digests[name] = gdm::digest_of_file(path);
    }

    const gdm::Footprint fp = gdm::measure_footprint(run.models.front(), ds, cfg.seed);

    double total_wall = 0.0;
    for (const auto& trial : run.report.trials)
        for (const auto& rec : trial.epochs) total_wall += rec.wall_ms;

    // Dataset digest covers every input file.
    gdm::Digest data_digest;
    {
        const fs::path manifest_path = fs::path(args.data_dir) / "manifest.json";
        std::vector<std::string> paths;
        if (fs::exists(manifest_path)) {
            std::ifstream in(manifest_path);
            json manifest;
            in >> manifest;
            for (const auto& f : manifest["files"])
                paths.push_back((fs::path(args.data_dir) / f.get<std::string>()).string());
        } else {
            for (const auto& entry : fs::directory_iterator(args.data_dir))
                if (entry.path().extension() == ".gdmf") paths.push_back(entry.path().string());
            std::sort(paths.begin(), paths.end());
        }
        for (const auto& p : paths) data_digest.update(gdm::digest_of_file(p));
    }

    const auto t_end = std::chrono::steady_clock::now();
    json manifest{{"command", "run"},
                  {"code_version", kVersion},
                  {"started", started},
                  {"finished", iso_now()},
                  {"config_digest", gdm::digest_of_string(effective.dump())},
                  {"dataset_digest", data_digest.hex()},
                  {"effective_config", effective},
                  {"outputs", outputs},
                  {"output_digests", output_digests},
                  {"timing",
                   {{"total_ms",
                     std::chrono::duration<double, std::milli>(t_end - t_start).count()},
                    {"train_eval_ms", total_wall},
                    {"inference_probe_ms", fp.inference_ms},
                    {"inference_probe_frames", fp.probe_frames}}},
                  {"footprint",
                   {{"em_bytes", fp.em_bytes},
                    {"sm_bytes", fp.sm_bytes},
                    {"total_bytes", fp.total_bytes}}}};
    write_json_file((fs::path(args.out_dir) / "manifest.json").string(), manifest);

    const auto& report = run.report;
    std::printf("%s: %d trials, %zu epochs\n", args.scenario.c_str(), cfg.trials,
                report.trials.front().epochs.size());
    std::printf("final category test accuracy (mean over trials): %.4f\n",
                report.mean_final_acc_category_test());
    std::printf("final instance test accuracy (mean over trials): %.4f\n",
                report.mean_final_acc_instance_test());
    std::printf("episodic neurons (trial 0): %zu, semantic: %zu\n",
                report.trials.front().epochs.back().neurons_em,
                report.trials.front().epochs.back().neurons_sm);
    std::printf("snapshot bytes: em %llu, sm %llu; inference probe %.2f ms / %zu frames\n",
                static_cast<unsigned long long>(fp.em_bytes),
                static_cast<unsigned long long>(fp.sm_bytes), fp.inference_ms, fp.probe_frames);
    std::printf("wrote %s\n", metrics_path.c_str());
    return 0;
}

// --- project ----------------------------------------------------------------

int cmd_project(const std::string& model_path, const std::string& out_path,
                const std::string& which) {
    const gdm::GdmModel model = gdm::load_model(model_path);
    const gdm::GammaGwrNet& net = which == "sm" ? model.sm : model.em;

    std::vector<const double*> rows;
    for (std::size_t j = 0; j < net.size(); ++j) rows.push_back(net.weight(static_cast<int>(j)));
    const gdm::PcaResult pca =
        gdm::pca_top2(rows, static_cast<std::size_t>(net.dim()));
    if (pca.rank < 2)
        std::cerr << "warning: projection rank " << pca.rank
                  << "; missing coordinates are emitted as 0\n";

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
    out << "id,x,y,category,habituation,edges\n";
    char buf[64];
    for (std::size_t j = 0; j < net.size(); ++j) {
        const auto [x, y] = gdm::pca_project(pca, net.weight(static_cast<int>(j)));
        const auto cat = net.predict_label(static_cast<int>(j), gdm::LabelLevel::category);
        out << j << ',';
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g", x, y);
        out << buf << ',' << (cat ? std::to_string(*cat) : std::string("-1")) << ',';
        std::snprintf(buf, sizeof(buf), "%.9g", net.neurons[j].habituation);
        out << buf << ',';
        bool first = true;
        for (const auto& [nb, age] : net.edges[j]) {
            (void)age;
            if (!first) out << ';';
            out << nb;
            first = false;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + out_path);
    std::cout << "projected " << net.size() << " neurons (rank " << pca.rank << ") to "
              << out_path << "\n";
    return 0;
}

// --- inspect ------------------------------------------------------------

void inspect_net(const char* name, const gdm::GammaGwrNet& net) {
    std::printf("[%s] neurons=%zu edges=%llu dim=%d K=%d metric=%s\n", name, net.size(),
                static_cast<unsigned long long>(net.edge_count()), net.dim(),
                net.context_count(), gdm::metric_name(net.params.metric));

    double hmin = 1.0, hmax = 0.0, hsum = 0.0;
    for (const auto& n : net.neurons) {
        hmin = std::min(hmin, n.habituation);
        hmax = std::max(hmax, n.habituation);
        hsum += n.habituation;
    }
    std::printf("  habituation min/mean/max: %.4f / %.4f / %.4f\n", hmin,
                hsum / static_cast<double>(net.size()), hmax);

    std::map<int, int> age_hist;
    for (std::size_t i = 0; i < net.edges.size(); ++i)
        for (const auto& [j, age] : net.edges[i])
            if (static_cast<int>(i) < j) ++age_hist[age / 10];
    std::printf("  edge age histogram (by decade):");
    for (const auto& [decade, count] : age_hist)
        std::printf(" [%d-%d]=%d", decade * 10, decade * 10 + 9, count);
    std::printf("\n");

    std::map<int, int> label_neurons;
    for (std::size_t j = 0; j < net.size(); ++j) {
        const auto cat = net.predict_label(static_cast<int>(j), gdm::LabelLevel::category);
        if (cat) ++label_neurons[*cat];
    }
    std::printf("  category -> neurons:");
    for (const auto& [cat, count] : label_neurons) std::printf(" %d:%d", cat, count);
    std::printf("\n");

    std::uint64_t links = 0;
    for (const auto& row : net.temporal) links += row.size();
    const double denom = static_cast<double>(net.size()) * static_cast<double>(net.size());
    std::printf("  temporal links: %llu nonzero (density %.4f)\n",
                static_cast<unsigned long long>(links),
                denom > 0.0 ? static_cast<double>(links) / denom : 0.0);
}

int cmd_inspect(const std::string& model_path) {
    const gdm::GdmModel model = gdm::load_model(model_path);
    std::printf("model %s\n", model_path.c_str());
    std::printf("replay=%s window=%d temporal_updates=%s sm_input=%s\n",
                model.params.replay_enabled ? "on" : "off",
                model.params.effective_replay_window(),
                model.params.replay_updates_temporal ? "on" : "off",
                model.params.sm_input_post_adapt ? "post_adapt" : "pre_adapt");
    inspect_net("episodic", model.em);
    inspect_net("semantic", model.sm);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"growing dual-memory feature-stream learner"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "synthesize a feature-stream corpus");
    generate->add_option("--out", gen.out_dir, "output directory")->required();
    generate->add_option("--categories", gen.spec.categories);
    generate->add_option("--instances", gen.spec.instances_per_category);
    generate->add_option("--frames", gen.spec.frames_per_sequence);
    generate->add_option("--collections", gen.spec.collections);
    generate->add_option("--train-collections", gen.spec.train_collections);
    generate->add_option("--dim", gen.spec.dim);
    generate->add_option("--seed", gen.spec.seed);
    generate->add_option("--intra-sigma", gen.spec.intra_sigma);
    generate->add_option("--separation", gen.spec.separation);
    generate->add_option("--radius", gen.spec.radius);
    generate->add_option("--instance-offset", gen.spec.instance_offset);
    generate->add_option("--trajectory-amp", gen.spec.trajectory_amp);
    generate->add_option("--trajectory-dims", gen.spec.trajectory_dims);
    generate->add_option("--noise-sigma", gen.spec.augmentation.noise_sigma);
    generate->add_option("--drop-prob", gen.spec.augmentation.drop_prob);
    generate->add_option("--occlusion-block", gen.spec.augmentation.occlusion_block);
    generate->add_flag("--text", gen.text, "write the text GDMF variant");

    RunArgs run;
    auto* runc = app.add_subcommand("run", "train and evaluate a scenario");
    runc->add_option("scenario", run.scenario, "batch|incremental|ni|nc|nic")->required();
    runc->add_option("--data", run.data_dir, "dataset directory")->required();
    runc->add_option("--out", run.out_dir, "output directory")->required();
    runc->add_option("--config", run.config_file, "JSON config file");
    auto* o_profile = runc->add_option("--profile", run.profile, "batch|incremental");
    auto* o_metric = runc->add_option("--metric", run.metric);
    auto* o_trials = runc->add_option("--trials", run.trials);
    auto* o_epochs = runc->add_option("--epochs", run.epochs);
    auto* o_workers = runc->add_option("--workers", run.workers);
    runc->add_option("--train-collections", run.train_collections,
                     "override when the data directory has no manifest");
    auto* o_seed = runc->add_option("--seed", run.seed);
    auto* o_avail = runc->add_option("--label-availability", run.label_availability);
    auto* o_nt = runc->add_option("--removal-threshold", run.removal_threshold);
    auto* o_age = runc->add_option("--max-edge-age", run.max_edge_age);
    auto* o_replay = runc->add_flag("--replay,!--no-replay", run.replay);
    auto* o_tc = runc->add_flag("--temporal-context,!--no-temporal-context", run.temporal_context);

    std::string project_model, project_out, project_net = "em";
    auto* project = app.add_subcommand("project", "2-D projection of a model snapshot");
    project->add_option("--model", project_model)->required();
    project->add_option("--out", project_out)->required();
    project->add_option("--net", project_net, "em|sm")->check(CLI::IsMember({"em", "sm"}));

    std::string inspect_model;
    auto* inspect = app.add_subcommand("inspect", "summarize a model snapshot");
    inspect->add_option("--model", inspect_model)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "error[usage]: " << e.what() << "\n";
        return 2;
    }

    try {
        if (generate->parsed()) return cmd_generate(gen);
        if (runc->parsed()) {
            run.given["profile"] = o_profile->count() > 0;
            run.given["metric"] = o_metric->count() > 0;
            run.given["trials"] = o_trials->count() > 0;
            run.given["epochs"] = o_epochs->count() > 0;
            run.given["workers"] = o_workers->count() > 0;
            run.given["seed"] = o_seed->count() > 0;
            run.given["label_availability"] = o_avail->count() > 0;
            run.given["removal_threshold"] = o_nt->count() > 0;
            run.given["max_edge_age"] = o_age->count() > 0;
            run.given["replay"] = o_replay->count() > 0;
            run.given["temporal_context"] = o_tc->count() > 0;
            return cmd_run(run);
        }
        if (project->parsed()) return cmd_project(project_model, project_out, project_net);
        if (inspect->parsed()) return cmd_inspect(inspect_model);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error[config]: " << e.what() << "\n";
        return 3;
    } catch (const json::exception& e) {
        std::cerr << "error[format]: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error[run]: " << e.what() << "\n";
        return 4;
    }
    return 0;
}

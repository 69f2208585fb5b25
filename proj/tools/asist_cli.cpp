// Command-line front end: train the cell classifier, build the model
// database, synthesize benchmark scenes, transform scenes, evaluate
// detections, and render reports.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <asist/asist.hpp>

namespace fs = std::filesystem;
using asist::fail;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON configuration file");
    cmd->add_option("--out", args.out_dir, "output directory (created if missing)");
    cmd->add_option("--seed", args.seed, "seed overriding the config value");
}

asist::PipelineConfig resolve_config(const CommonArgs& args) {
    asist::PipelineConfig cfg =
        args.config_path.empty() ? asist::PipelineConfig{} : asist::load_config(args.config_path);
    if (args.seed) cfg.seed = *args.seed;
    std::error_code ec;
    fs::create_directories(args.out_dir, ec);
    if (ec) fail("io-error", "cannot create output directory '" + args.out_dir + "'");
    return cfg;
}

std::string out_path(const CommonArgs& args, const std::string& name) {
    return (fs::path(args.out_dir) / name).string();
}

void run_train_forest(const CommonArgs& common, const std::vector<std::string>& cloud_paths) {
    const asist::PipelineConfig cfg = resolve_config(common);
    if (cloud_paths.empty()) fail("usage-error", "train-forest needs at least one --cloud");

    std::vector<asist::Cell> cells;
    std::vector<int> labels;
    for (const std::string& path : cloud_paths) {
        const asist::PointCloud cloud = asist::load_point_cloud(path);
        const asist::VoxelGrid grid = asist::voxelize_with_distance(cloud, cfg.voxel_size);
        asist::extract_training_cells(grid, cloud, cfg.forest.m, cells, labels);
    }
    asist::ForestConfig fc = cfg.forest;
    fc.seed = cfg.seed;
    const asist::Forest forest = asist::train_forest(cells, labels, fc);
    asist::save_forest(out_path(common, "forest.json"), forest);
    std::printf("{\"forest\": \"%s\", \"cells\": %zu, \"classes\": %d}\n",
                out_path(common, "forest.json").c_str(), cells.size(), forest.n_classes);
}

void run_build_exemplars(const CommonArgs& common, const std::string& models_dir,
                         const std::string& manifest) {
    const asist::PipelineConfig cfg = resolve_config(common);
    const std::vector<asist::ExemplarModel> models =
        asist::ingest_models(models_dir, manifest, 2000, cfg.seed);
    std::map<int, int> counts;
    for (const asist::ExemplarModel& m : models) counts[m.class_label] = cfg.exemplars_per_class;
    const asist::ExemplarSet set = asist::cluster_exemplars(models, counts, cfg.seed);
    asist::save_exemplars(common.out_dir, set);
    std::printf("{\"exemplars\": %d, \"classes\": %d, \"dir\": \"%s\"}\n", set.n_exemplars(),
                set.n_classes, common.out_dir.c_str());
}

void run_gen_benchmark(const CommonArgs& common, const std::string& exemplars_dir) {
    const asist::PipelineConfig cfg = resolve_config(common);
    const asist::ExemplarSet set = asist::load_exemplars(exemplars_dir);
    asist::Rng rng(cfg.seed);
    const std::vector<asist::BenchmarkScene> scenes = asist::gen_benchmark(
        set, cfg.benchmark_scenes, cfg.benchmark_classes, cfg.benchmark, rng);
    for (std::size_t s = 0; s < scenes.size(); ++s) {
        char name[64];
        std::snprintf(name, sizeof(name), "scene_%03zu.ply", s);
        asist::save_ply(out_path(common, name), scenes[s].cloud);
        std::snprintf(name, sizeof(name), "scene_%03zu_annotations.json", s);
        asist::save_annotations(out_path(common, name), scenes[s].objects);
    }
    std::printf("{\"scenes\": %zu, \"dir\": \"%s\"}\n", scenes.size(), common.out_dir.c_str());
}

void run_transform(const CommonArgs& common, const std::string& scene_path,
                   const std::string& forest_path, const std::string& exemplars_dir) {
    const asist::PipelineConfig cfg = resolve_config(common);
    const asist::PointCloud cloud = asist::load_point_cloud(scene_path);
    const asist::Forest forest = asist::load_forest(forest_path);
    const asist::ExemplarSet set = asist::load_exemplars(exemplars_dir);

    asist::AsistTrace trace;
    const asist::AsistResult result = asist::run_asist(cloud, set, forest, cfg, &trace);
    asist::save_placements(out_path(common, "placements.json"), result.placements);
    asist::save_trace(out_path(common, "trace.json"), trace);
    std::printf("{\"placements\": %zu, \"out\": \"%s\"}\n", result.placements.size(),
                out_path(common, "placements.json").c_str());
}

void run_evaluate(const CommonArgs& common, const std::vector<std::string>& placement_files,
                  const std::vector<std::string>& annotation_files,
                  const std::string& exemplars_dir) {
    const asist::PipelineConfig cfg = resolve_config(common);
    if (placement_files.size() != annotation_files.size() || placement_files.empty())
        fail("usage-error", "evaluate needs matching --placements/--annotations lists");
    const asist::ExemplarSet set = asist::load_exemplars(exemplars_dir);

    std::vector<asist::EvaluationReport> reports;
    for (std::size_t i = 0; i < placement_files.size(); ++i) {
        std::vector<asist::DetectionBox> detections;
        for (const asist::Placement& p : asist::load_placements(placement_files[i])) {
            if (p.exemplar_id < 1 || p.exemplar_id > set.n_exemplars())
                fail("parse-error", "placement references unknown model id");
            detections.push_back(
                {p.class_label,
                 asist::box_under_transform(set.exemplar(p.exemplar_id).box, p.pose)});
        }
        std::vector<asist::DetectionBox> annotations;
        for (const asist::SceneObject& o : asist::load_annotations(annotation_files[i]))
            annotations.push_back({o.class_label, o.box});
        reports.push_back(asist::evaluate(detections, annotations, cfg.iou_threshold, cfg.seed));
    }
    const asist::EvaluationReport pooled = asist::pool_reports(reports);
    asist::save_report(out_path(common, "report.json"), pooled);
    asist::write_metrics_csv(out_path(common, "metrics.csv"), pooled);
    std::printf("{\"geometric_f1\": %.6f, \"scenes\": %zu}\n", pooled.geometric.f1,
                reports.size());
}

void run_report(const CommonArgs& common, const std::string& trace_path,
                const std::string& report_path) {
    resolve_config(common);
    if (trace_path.empty() && report_path.empty())
        fail("usage-error", "report needs --trace and/or --report");
    if (!trace_path.empty()) {
        const nlohmann::json j = asist::trace_from_file(trace_path);
        asist::AsistTrace trace;
        try {
            for (const nlohmann::json& it : j.at("iterations")) {
                asist::IterationRecord rec;
                rec.outer = it.at("outer").get<int>();
                rec.inner = it.at("inner").get<int>();
                rec.lambda6 = it.at("lambda6").get<double>();
                rec.energy.semantic = it.at("semantic").get<double>();
                rec.energy.geometric = it.at("geometric").get<double>();
                rec.energy.smoothness = it.at("smoothness").get<double>();
                rec.energy.sparsity = it.at("sparsity").get<double>();
                rec.energy.vote_link = it.at("vote_link").get<double>();
                rec.energy.overlap = it.at("overlap").get<double>();
                rec.energy.total = it.at("total").get<double>();
                rec.active_instances = it.at("active_instances").get<int>();
                trace.iterations.push_back(rec);
            }
        } catch (const nlohmann::json::exception& e) {
            fail("parse-error", std::string("malformed trace: ") + e.what());
        }
        asist::write_trace_csv(out_path(common, "trace.csv"), trace);
        asist::render_energy_svg(out_path(common, "energy.svg"), trace);
    }
    if (!report_path.empty()) {
        const asist::EvaluationReport report = asist::load_report(report_path);
        asist::write_metrics_csv(out_path(common, "metrics.csv"), report);
        asist::render_metrics_svg(out_path(common, "metrics.svg"), report);
    }
    std::printf("{\"out\": \"%s\"}\n", common.out_dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"semantic scene transformation toolkit"};
    app.require_subcommand(1);

    CommonArgs train_args, build_args, gen_args, transform_args, eval_args, report_args;

    auto* train = app.add_subcommand("train-forest", "train the cell classifier on labeled clouds");
    add_common(train, train_args);
    std::vector<std::string> train_clouds;
    train->add_option("--cloud", train_clouds, "labeled PLY training cloud (repeatable)");

    auto* build = app.add_subcommand("build-exemplars", "cluster models into a replacement database");
    add_common(build, build_args);
    std::string models_dir, manifest;
    build->add_option("--models", models_dir, "directory of OFF models")->required();
    build->add_option("--manifest", manifest, "JSON file mapping model files to classes")->required();

    auto* gen = app.add_subcommand("gen-benchmark", "synthesize benchmark scenes with annotations");
    add_common(gen, gen_args);
    std::string gen_exemplars;
    gen->add_option("--exemplars", gen_exemplars, "exemplar database directory")->required();

    auto* transform = app.add_subcommand("transform", "replace scene objects with database models");
    add_common(transform, transform_args);
    std::string scene_path, forest_path, transform_exemplars;
    transform->add_option("--scene", scene_path, "scene point cloud (PLY)")->required();
    transform->add_option("--forest", forest_path, "trained forest JSON")->required();
    transform->add_option("--exemplars", transform_exemplars, "exemplar database directory")->required();

    auto* evaluate = app.add_subcommand("evaluate", "score placements against annotations");
    add_common(evaluate, eval_args);
    std::vector<std::string> placement_files, annotation_files;
    std::string eval_exemplars;
    evaluate->add_option("--placements", placement_files, "placements JSON (repeatable)")->required();
    evaluate->add_option("--annotations", annotation_files, "annotations JSON (repeatable)")->required();
    evaluate->add_option("--exemplars", eval_exemplars, "exemplar database directory")->required();

    auto* report = app.add_subcommand("report", "render CSV tables and SVG plots");
    add_common(report, report_args);
    std::string trace_path, report_path;
    report->add_option("--trace", trace_path, "trace JSON from transform");
    report->add_option("--report", report_path, "report JSON from evaluate");

    try {
        app.parse(argc, argv);
        if (train->parsed()) run_train_forest(train_args, train_clouds);
        if (build->parsed()) run_build_exemplars(build_args, models_dir, manifest);
        if (gen->parsed()) run_gen_benchmark(gen_args, gen_exemplars);
        if (transform->parsed())
            run_transform(transform_args, scene_path, forest_path, transform_exemplars);
        if (evaluate->parsed())
            run_evaluate(eval_args, placement_files, annotation_files, eval_exemplars);
        if (report->parsed()) run_report(report_args, trace_path, report_path);
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        const nlohmann::json err{{"error", {{"code", "usage-error"}, {"message", e.what()}}}};
        std::printf("%s\n", err.dump().c_str());
        return e.get_exit_code() != 0 ? e.get_exit_code() : 1;
    } catch (const asist::Error& e) {
        const nlohmann::json err{{"error", {{"code", e.code()}, {"message", e.what()}}}};
        std::printf("%s\n", err.dump().c_str());
        return 1;
    } catch (const std::exception& e) {
        const nlohmann::json err{{"error", {{"code", "internal-error"}, {"message", e.what()}}}};
        std::printf("%s\n", err.dump().c_str());
        return 1;
    }
}

// End-to-end tests for the command-line tool: every subcommand is exercised
// through a real subprocess, artifacts are checked on disk, and failure paths
// must emit a machine-readable error object plus a nonzero exit status.
#include <catch2/catch_amalgamated.hpp>

#include <asist/asist.hpp>

#include <json.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr combined
};

CliResult run_cli(const std::string& args) {
    const std::string cmd = std::string(ASIST_CLI_PATH) + " " + args + " 2>&1";
    std::FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult result;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe) != nullptr)
        result.output += buf.data();
    const int status = ::pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// The tool prints exactly one JSON object on failure; parse it and return the
// error code string.
std::string error_code_of(const CliResult& result) {
    json j;
    REQUIRE_NOTHROW(j = json::parse(result.output));
    REQUIRE(j.contains("error"));
    REQUIRE(j["error"].contains("code"));
    REQUIRE(j["error"].contains("message"));
    return j["error"]["code"].get<std::string>();
}

// Shared on-disk world: model files, a config, and the artifact directories
// produced by each pipeline stage. Built once per test binary; the
// TEST_CASEs below run in declaration order and consume earlier stages.
struct CliWorld {
    fs::path root;
    fs::path models_dir;
    fs::path manifest;
    fs::path config_file;
    fs::path exemplar_dir;
    fs::path bench_dir;
    fs::path forest_dir;
    fs::path transform_dir;
    fs::path eval_dir;
    fs::path report_dir;

    CliWorld() {
        root = fs::temp_directory_path() /
               ("asist-cli-" + std::to_string(::getpid()));
        fs::remove_all(root);
        models_dir = root / "models";
        fs::create_directories(models_dir);
        exemplar_dir = root / "exemplars";
        bench_dir = root / "bench";
        forest_dir = root / "forest";
        transform_dir = root / "transform";
        eval_dir = root / "eval";
        report_dir = root / "report";

        asist::save_off((models_dir / "chair-a.off").string(),
                        asist::make_chair_mesh(0.45, 0.45, 0.45, 0.9, 0.05));
        asist::save_off((models_dir / "chair-b.off").string(),
                        asist::make_chair_mesh(0.55, 0.5, 0.5, 1.0, 0.05));
        asist::save_off((models_dir / "table-a.off").string(),
                        asist::make_table_mesh(0.9, 0.6, 0.65, 0.06, 0.07));
        asist::save_off((models_dir / "table-b.off").string(),
                        asist::make_table_mesh(0.7, 0.7, 0.9, 0.05, 0.06));

        manifest = root / "manifest.json";
        {
            std::ofstream out(manifest);
            out << json{{"chair-a.off", 1},
                        {"chair-b.off", 1},
                        {"table-a.off", 2},
                        {"table-b.off", 2}}
                       .dump(2);
        }

        asist::PipelineConfig cfg;
        cfg.seed = 123;
        cfg.forest.n_trees = 5;
        cfg.forest.max_depth = 8;
        cfg.forest.pool_size = 200;
        cfg.forest.min_samples = 10;
        cfg.forest.cells_per_tree = 4000;
        cfg.forest.seed = 77;
        cfg.exemplars_per_class = 2;
        cfg.benchmark_scenes = 2;
        cfg.benchmark_classes = {1, 2};
        cfg.benchmark.objects_min = 1;
        cfg.benchmark.objects_max = 1;
        cfg.benchmark.points_per_object = 900;
        config_file = root / "config.json";
        asist::save_config(config_file.string(), cfg);
    }
};

CliWorld& world() {
    static CliWorld w;
    return w;
}

}  // namespace

TEST_CASE("cli: --help succeeds and lists every subcommand") {
    const auto result = run_cli("--help");
    REQUIRE(result.exit_code == 0);
    for (const char* name : {"train-forest", "build-exemplars", "gen-benchmark",
                             "transform", "evaluate", "report"})
        REQUIRE(result.output.find(name) != std::string::npos);
}

TEST_CASE("cli: missing subcommand is a usage error with JSON diagnostics") {
    const auto result = run_cli("");
    REQUIRE(result.exit_code != 0);
    REQUIRE(error_code_of(result) == "usage-error");
}

TEST_CASE("cli: build-exemplars writes a loadable database") {
    auto& w = world();
    const auto result =
        run_cli("build-exemplars --models " + w.models_dir.string() +
                " --manifest " + w.manifest.string() + " --config " +
                w.config_file.string() + " --out " + w.exemplar_dir.string());
    CAPTURE(result.output);
    REQUIRE(result.exit_code == 0);
    REQUIRE(fs::exists(w.exemplar_dir / "index.json"));

    const auto set = asist::load_exemplars(w.exemplar_dir.string());
    REQUIRE(set.n_classes == 2);
    REQUIRE(set.models.size() == 4);

    json summary;
    REQUIRE_NOTHROW(summary = json::parse(result.output));
    REQUIRE(summary.at("exemplars").get<int>() == 4);
}

TEST_CASE("cli: gen-benchmark writes scene clouds and annotations") {
    auto& w = world();
    const auto result =
        run_cli("gen-benchmark --exemplars " + w.exemplar_dir.string() +
                " --config " + w.config_file.string() + " --out " +
                w.bench_dir.string());
    CAPTURE(result.output);
    REQUIRE(result.exit_code == 0);
    for (int i = 0; i < 2; ++i) {
        const auto stem = "scene_00" + std::to_string(i);
        REQUIRE(fs::exists(w.bench_dir / (stem + ".ply")));
        REQUIRE(fs::exists(w.bench_dir / (stem + "_annotations.json")));
        const auto cloud =
            asist::load_point_cloud((w.bench_dir / (stem + ".ply")).string());
        REQUIRE(cloud.size() > 0);
        const auto annos = asist::load_annotations(
            (w.bench_dir / (stem + "_annotations.json")).string());
        REQUIRE(annos.size() == 2);  // one object per class requested
    }
}

TEST_CASE("cli: train-forest consumes labeled clouds and saves the model") {
    auto& w = world();
    const auto result = run_cli(
        "train-forest --cloud " + (w.bench_dir / "scene_000.ply").string() +
        " --cloud " + (w.bench_dir / "scene_001.ply").string() + " --config " +
        w.config_file.string() + " --out " + w.forest_dir.string());
    CAPTURE(result.output);
    REQUIRE(result.exit_code == 0);
    REQUIRE(fs::exists(w.forest_dir / "forest.json"));

    const auto forest =
        asist::load_forest((w.forest_dir / "forest.json").string());
    REQUIRE(forest.n_classes == 3);  // clutter + two object classes
    REQUIRE(forest.trees.size() == 5);

    json summary;
    REQUIRE_NOTHROW(summary = json::parse(result.output));
    REQUIRE(summary.at("cells").get<int>() > 0);
}

TEST_CASE("cli: transform emits placements and an optimization trace") {
    auto& w = world();
    const auto result = run_cli(
        "transform --scene " + (w.bench_dir / "scene_000.ply").string() +
        " --forest " + (w.forest_dir / "forest.json").string() +
        " --exemplars " + w.exemplar_dir.string() + " --config " +
        w.config_file.string() + " --out " + w.transform_dir.string());
    CAPTURE(result.output);
    REQUIRE(result.exit_code == 0);
    REQUIRE(fs::exists(w.transform_dir / "placements.json"));
    REQUIRE(fs::exists(w.transform_dir / "trace.json"));

    const auto placements = asist::load_placements(
        (w.transform_dir / "placements.json").string());
    for (const auto& p : placements) {
        REQUIRE(p.exemplar_id >= 1);
        REQUIRE((p.class_label == 1 || p.class_label == 2));
        REQUIRE(p.vote > 0.0);
        REQUIRE(p.weight_mass >= 0.1);
    }

    json trace;
    REQUIRE_NOTHROW(trace = json::parse(
                        read_file(w.transform_dir / "trace.json")));
    REQUIRE(trace.contains("iterations"));
    REQUIRE_FALSE(trace["iterations"].empty());
}

TEST_CASE("cli: transform with the same seed is byte-identical") {
    auto& w = world();
    const fs::path again = w.root / "transform-again";
    const auto result = run_cli(
        "transform --scene " + (w.bench_dir / "scene_000.ply").string() +
        " --forest " + (w.forest_dir / "forest.json").string() +
        " --exemplars " + w.exemplar_dir.string() + " --config " +
        w.config_file.string() + " --out " + again.string());
    CAPTURE(result.output);
    REQUIRE(result.exit_code == 0);
    REQUIRE(read_file(again / "placements.json") ==
            read_file(w.transform_dir / "placements.json"));
}

TEST_CASE("cli: a seed override changes the run configuration") {
    auto& w = world();
    const fs::path seeded = w.root / "bench-seeded";
    const auto result =
        run_cli("gen-benchmark --exemplars " + w.exemplar_dir.string() +
                " --config " + w.config_file.string() + " --seed 999 --out " +
                seeded.string());
    CAPTURE(result.output);
    REQUIRE(result.exit_code == 0);
    // Different seed, different scene bytes.
    REQUIRE(read_file(seeded / "scene_000.ply") !=
            read_file(w.bench_dir / "scene_000.ply"));
}

TEST_CASE("cli: evaluate scores placements against annotations") {
    auto& w = world();
    const auto result = run_cli(
        "evaluate --placements " +
        (w.transform_dir / "placements.json").string() + " --annotations " +
        (w.bench_dir / "scene_000_annotations.json").string() +
        " --exemplars " + w.exemplar_dir.string() + " --config " +
        w.config_file.string() + " --out " + w.eval_dir.string());
    CAPTURE(result.output);
    REQUIRE(result.exit_code == 0);
    REQUIRE(fs::exists(w.eval_dir / "report.json"));
    REQUIRE(fs::exists(w.eval_dir / "metrics.csv"));

    json report;
    REQUIRE_NOTHROW(report = json::parse(read_file(w.eval_dir / "report.json")));
    REQUIRE(report.contains("geometric"));
    REQUIRE(report.contains("semantic"));
    const double f1 = report["geometric"]["f1"].get<double>();
    REQUIRE(f1 >= 0.0);
    REQUIRE(f1 <= 1.0);

    const auto csv = read_file(w.eval_dir / "metrics.csv");
    REQUIRE(csv.find("precision") != std::string::npos);
    REQUIRE(csv.find("recall") != std::string::npos);
}

TEST_CASE("cli: report renders csv and svg artifacts") {
    auto& w = world();
    const auto result =
        run_cli("report --trace " + (w.transform_dir / "trace.json").string() +
                " --report " + (w.eval_dir / "report.json").string() +
                " --out " + w.report_dir.string());
    CAPTURE(result.output);
    REQUIRE(result.exit_code == 0);
    for (const char* name : {"trace.csv", "energy.svg", "metrics.csv",
                             "metrics.svg"}) {
        CAPTURE(name);
        REQUIRE(fs::exists(w.report_dir / name));
        REQUIRE(fs::file_size(w.report_dir / name) > 0);
    }
    const auto svg = read_file(w.report_dir / "energy.svg");
    REQUIRE(svg.find("<svg") != std::string::npos);
}

TEST_CASE("cli: report without any input is a usage error") {
    auto& w = world();
    const auto result = run_cli("report --out " + (w.root / "r2").string());
    REQUIRE(result.exit_code != 0);
    REQUIRE(error_code_of(result) == "usage-error");
}

TEST_CASE("cli: missing required flag is a usage error") {
    auto& w = world();
    const auto result = run_cli("transform --scene " +
                                (w.bench_dir / "scene_000.ply").string() +
                                " --out " + (w.root / "t2").string());
    REQUIRE(result.exit_code != 0);
    REQUIRE(error_code_of(result) == "usage-error");
}

TEST_CASE("cli: nonexistent scene file is an io error") {
    auto& w = world();
    const auto result = run_cli(
        "transform --scene " + (w.root / "no-such.ply").string() +
        " --forest " + (w.forest_dir / "forest.json").string() +
        " --exemplars " + w.exemplar_dir.string() + " --out " +
        (w.root / "t3").string());
    REQUIRE(result.exit_code != 0);
    REQUIRE(error_code_of(result) == "io-error");
}

TEST_CASE("cli: corrupt config file is a parse error") {
    auto& w = world();
    const fs::path bad = w.root / "bad-config.json";
    {
        std::ofstream out(bad);
        out << "{ definitely not json";
    }
    const auto result =
        run_cli("gen-benchmark --exemplars " + w.exemplar_dir.string() +
                " --config " + bad.string() + " --out " +
                (w.root / "b2").string());
    REQUIRE(result.exit_code != 0);
    REQUIRE(error_code_of(result) == "parse-error");
}

TEST_CASE("cli: config violating validation rules is rejected") {
    auto& w = world();
    const fs::path bad = w.root / "invalid-config.json";
    {
        std::ofstream out(bad);
        out << json{{"voxel_size", -1.0}}.dump();
    }
    const auto result =
        run_cli("gen-benchmark --exemplars " + w.exemplar_dir.string() +
                " --config " + bad.string() + " --out " +
                (w.root / "b3").string());
    REQUIRE(result.exit_code != 0);
    REQUIRE(error_code_of(result) == "invalid-config");
}

TEST_CASE("cli: evaluate rejects mismatched placement/annotation counts") {
    auto& w = world();
    const auto result = run_cli(
        "evaluate --placements " +
        (w.transform_dir / "placements.json").string() + " --annotations " +
        (w.bench_dir / "scene_000_annotations.json").string() +
        " --annotations " + (w.bench_dir / "scene_001_annotations.json").string() +
        " --exemplars " + w.exemplar_dir.string() + " --out " +
        (w.root / "e2").string());
    REQUIRE(result.exit_code != 0);
    REQUIRE(error_code_of(result) == "usage-error");
}

TEST_CASE("cli: train-forest with no clouds is a usage error") {
    auto& w = world();
    const auto result =
        run_cli("train-forest --out " + (w.root / "f2").string());
    REQUIRE(result.exit_code != 0);
    REQUIRE(error_code_of(result) == "usage-error");
}

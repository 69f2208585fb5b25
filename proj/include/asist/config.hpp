#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "asist/benchmark.hpp"
#include "asist/energy.hpp"
#include "asist/forest.hpp"

namespace asist {

struct PipelineConfig {
    int version = 1;
    std::uint64_t seed = 1;
    double voxel_size = 0.075;

    EnergyCoefficients coeffs;
    int n_out = 5;
    int n_in = 2;
    int n_irls = 5;

    int n_basis = 30;
    int knn = 10;
    double sigma_factor = 5.0;  // graph kernel width in units of voxel_size

    ForestConfig forest;

    double bandwidth_factor = 0.5;  // of the median class xy diagonal
    double output_threshold = 0.1;

    int exemplars_per_class = 3;
    BenchmarkParams benchmark;
    int benchmark_scenes = 10;
    std::vector<int> benchmark_classes = {1, 2, 3};
    double iou_threshold = 0.25;
};

inline void validate_config(const PipelineConfig& c) {
    const auto check = [](bool ok, const std::string& what) {
        if (!ok) fail("invalid-config", what);
    };
    check(c.version == 1, "unsupported config version");
    check(c.voxel_size > 0.0, "voxel_size must be positive");
    check(c.coeffs.lambda1 >= 0.0 && c.coeffs.lambda2 >= 0.0 && c.coeffs.lambda3 >= 0.0 &&
              c.coeffs.lambda4 >= 0.0 && c.coeffs.lambda5 >= 0.0,
          "energy coefficients must be nonnegative");
    check(c.coeffs.ell > 0.0 && c.coeffs.ell < 1.0, "sparsity exponent must lie in (0,1)");
    check(c.coeffs.d_clutter >= 0.0, "clutter distance must be nonnegative");
    check(!c.coeffs.lambda6_schedule.empty(), "overlap schedule must not be empty");
    for (std::size_t i = 0; i < c.coeffs.lambda6_schedule.size(); ++i) {
        check(c.coeffs.lambda6_schedule[i] >= 0.0, "overlap schedule must be nonnegative");
        if (i > 0)
            check(c.coeffs.lambda6_schedule[i] >= c.coeffs.lambda6_schedule[i - 1],
                  "overlap schedule must be non-decreasing");
    }
    check(c.n_out >= 1 && c.n_in >= 1 && c.n_irls >= 1, "iteration counts must be at least 1");
    check(c.n_basis >= 1, "spectral basis size must be at least 1");
    check(c.knn >= 1, "graph neighbor count must be at least 1");
    check(c.sigma_factor > 0.0, "graph kernel width must be positive");
    check(c.forest.n_trees >= 1 && c.forest.max_depth >= 1 && c.forest.pool_size >= 1 &&
              c.forest.min_samples >= 2 && c.forest.cells_per_tree >= 1,
          "forest parameters out of range");
    check(c.forest.m >= 3 && c.forest.m % 2 == 1, "cell size must be an odd number >= 3");
    check(c.forest.min_gain >= 0.0, "minimum split gain must be nonnegative");
    check(c.bandwidth_factor > 0.0, "bandwidth factor must be positive");
    check(c.output_threshold >= 0.0, "output threshold must be nonnegative");
    check(c.exemplars_per_class >= 1, "per-class exemplar count must be at least 1");
    check(c.benchmark.objects_min >= 1 && c.benchmark.objects_max >= c.benchmark.objects_min,
          "per-class object counts out of range");
    check(c.benchmark.points_per_object >= 1, "points per object must be at least 1");
    check(c.benchmark.noise_sigma >= 0.0, "noise sigma must be nonnegative");
    check(c.benchmark.footprint_fill > 0.0 && c.benchmark.footprint_fill <= 1.0,
          "footprint fill must lie in (0,1]");
    check(c.benchmark.max_attempts >= 1, "placement attempt budget must be at least 1");
    check(c.benchmark_scenes >= 1, "benchmark scene count must be at least 1");
    check(!c.benchmark_classes.empty(), "benchmark class list must not be empty");
    check(c.iou_threshold >= 0.0 && c.iou_threshold < 1.0, "IoU threshold must lie in [0,1)");
}

inline nlohmann::json config_to_json(const PipelineConfig& c) {
    nlohmann::json j;
    j["version"] = c.version;
    j["seed"] = c.seed;
    j["voxel_size"] = c.voxel_size;
    j["coefficients"] = {{"lambda1", c.coeffs.lambda1},       {"lambda2", c.coeffs.lambda2},
                         {"lambda3", c.coeffs.lambda3},       {"lambda4", c.coeffs.lambda4},
                         {"lambda5", c.coeffs.lambda5},       {"ell", c.coeffs.ell},
                         {"d_clutter", c.coeffs.d_clutter},
                         {"lambda6_schedule", c.coeffs.lambda6_schedule}};
    j["iterations"] = {{"outer", c.n_out}, {"inner", c.n_in}, {"reweighting", c.n_irls}};
    j["spectral"] = {{"n_basis", c.n_basis}, {"knn", c.knn}, {"sigma_factor", c.sigma_factor}};
    j["forest"] = {{"n_trees", c.forest.n_trees},
                   {"max_depth", c.forest.max_depth},
                   {"pool_size", c.forest.pool_size},
                   {"min_gain", c.forest.min_gain},
                   {"min_samples", c.forest.min_samples},
                   {"cells_per_tree", c.forest.cells_per_tree},
                   {"m", c.forest.m}};
    j["mean_shift"] = {{"bandwidth_factor", c.bandwidth_factor}};
    j["output_threshold"] = c.output_threshold;
    j["exemplars_per_class"] = c.exemplars_per_class;
    j["benchmark"] = {{"objects_min", c.benchmark.objects_min},
                      {"objects_max", c.benchmark.objects_max},
                      {"points_per_object", c.benchmark.points_per_object},
                      {"noise_sigma", c.benchmark.noise_sigma},
                      {"footprint_fill", c.benchmark.footprint_fill},
                      {"max_attempts", c.benchmark.max_attempts},
                      {"scenes", c.benchmark_scenes},
                      {"classes", c.benchmark_classes}};
    j["iou_threshold"] = c.iou_threshold;
    return j;
}

inline PipelineConfig config_from_json(const nlohmann::json& j) {
    PipelineConfig c;
    try {
        c.version = j.value("version", 1);
        c.seed = j.value("seed", std::uint64_t{1});
        c.voxel_size = j.value("voxel_size", c.voxel_size);
        if (j.contains("coefficients")) {
            const auto& co = j.at("coefficients");
            c.coeffs.lambda1 = co.value("lambda1", c.coeffs.lambda1);
            c.coeffs.lambda2 = co.value("lambda2", c.coeffs.lambda2);
            c.coeffs.lambda3 = co.value("lambda3", c.coeffs.lambda3);
            c.coeffs.lambda4 = co.value("lambda4", c.coeffs.lambda4);
            c.coeffs.lambda5 = co.value("lambda5", c.coeffs.lambda5);
            c.coeffs.ell = co.value("ell", c.coeffs.ell);
            c.coeffs.d_clutter = co.value("d_clutter", c.coeffs.d_clutter);
            if (co.contains("lambda6_schedule"))
                c.coeffs.lambda6_schedule = co.at("lambda6_schedule").get<std::vector<double>>();
        }
        if (j.contains("iterations")) {
            const auto& it = j.at("iterations");
            c.n_out = it.value("outer", c.n_out);
            c.n_in = it.value("inner", c.n_in);
            c.n_irls = it.value("reweighting", c.n_irls);
        }
        if (j.contains("spectral")) {
            const auto& sp = j.at("spectral");
            c.n_basis = sp.value("n_basis", c.n_basis);
            c.knn = sp.value("knn", c.knn);
            c.sigma_factor = sp.value("sigma_factor", c.sigma_factor);
        }
        if (j.contains("forest")) {
            const auto& fo = j.at("forest");
            c.forest.n_trees = fo.value("n_trees", c.forest.n_trees);
            c.forest.max_depth = fo.value("max_depth", c.forest.max_depth);
            c.forest.pool_size = fo.value("pool_size", c.forest.pool_size);
            c.forest.min_gain = fo.value("min_gain", c.forest.min_gain);
            c.forest.min_samples = fo.value("min_samples", c.forest.min_samples);
            c.forest.cells_per_tree = fo.value("cells_per_tree", c.forest.cells_per_tree);
            c.forest.m = fo.value("m", c.forest.m);
        }
        if (j.contains("mean_shift"))
            c.bandwidth_factor = j.at("mean_shift").value("bandwidth_factor", c.bandwidth_factor);
        c.output_threshold = j.value("output_threshold", c.output_threshold);
        c.exemplars_per_class = j.value("exemplars_per_class", c.exemplars_per_class);
        if (j.contains("benchmark")) {
            const auto& be = j.at("benchmark");
            c.benchmark.objects_min = be.value("objects_min", c.benchmark.objects_min);
            c.benchmark.objects_max = be.value("objects_max", c.benchmark.objects_max);
            c.benchmark.points_per_object =
                be.value("points_per_object", c.benchmark.points_per_object);
            c.benchmark.noise_sigma = be.value("noise_sigma", c.benchmark.noise_sigma);
            c.benchmark.footprint_fill = be.value("footprint_fill", c.benchmark.footprint_fill);
            c.benchmark.max_attempts = be.value("max_attempts", c.benchmark.max_attempts);
            c.benchmark_scenes = be.value("scenes", c.benchmark_scenes);
            if (be.contains("classes"))
                c.benchmark_classes = be.at("classes").get<std::vector<int>>();
        }
        c.iou_threshold = j.value("iou_threshold", c.iou_threshold);
    } catch (const nlohmann::json::exception& e) {
        fail("parse-error", std::string("malformed config: ") + e.what());
    }
    validate_config(c);
    return c;
}

inline PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("io-error", "cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail("parse-error", std::string("malformed config JSON: ") + e.what());
    }
    return config_from_json(j);
}

inline void save_config(const std::string& path, const PipelineConfig& c) {
    std::ofstream out(path);
    if (!out) fail("io-error", "cannot write config file '" + path + "'");
    out << config_to_json(c).dump(2) << "\n";
}

}  // namespace asist

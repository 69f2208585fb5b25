#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "asist/kmedoids.hpp"
#include "asist/mesh.hpp"
#include "asist/ply_io.hpp"
#include "asist/point_cloud.hpp"

namespace asist {

struct ExemplarModel {
    std::string id;
    int class_label = 0;           // 1..n_c
    TriMesh mesh;                  // may be empty after loading a persisted set
    std::vector<Vec3> cloud;       // canonical sampled surface points
    Aabb box;                      // canonical axis-aligned box of the cloud
    std::vector<float> descriptor; // normalized occupancy fingerprint
};

// Replacement database. Exemplar ids e run 1..n; e = 0 is the clutter slot by
// convention and has no geometry, so index e-1 addresses `models`.
struct ExemplarSet {
    std::vector<ExemplarModel> models;
    int n_classes = 0;  // object classes take labels 1..n_classes

    [[nodiscard]] int n_exemplars() const { return static_cast<int>(models.size()); }
    [[nodiscard]] const ExemplarModel& exemplar(int e) const { return models[e - 1]; }
};

namespace exemplar_detail {

inline std::uint64_t fnv1a(const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hash_string(std::uint64_t h) {
    char buf[19];
    std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace exemplar_detail

inline constexpr int kDescriptorResolution = 16;

// Coarse shape fingerprint: the model is stretched onto the unit cube, its
// points binned into a 16^3 occupancy grid, and the grid scaled to unit L2
// norm so descriptor distance ignores point count.
inline std::vector<float> shape_descriptor(const std::vector<Vec3>& points,
                                           int res = kDescriptorResolution) {
    if (points.empty()) fail("invalid-cloud", "descriptor of an empty cloud");
    const Aabb box = bounding_box(points);
    std::vector<float> grid(static_cast<std::size_t>(res) * res * res, 0.0f);
    for (const Vec3& p : points) {
        int idx[3];
        for (int a = 0; a < 3; ++a) {
            const double extent = box.max[a] - box.min[a];
            const double u = extent > 0.0 ? (p[a] - box.min[a]) / extent : 0.5;
            idx[a] = std::clamp(static_cast<int>(u * res), 0, res - 1);
        }
        grid[idx[0] + static_cast<std::size_t>(res) * (idx[1] + static_cast<std::size_t>(res) * idx[2])] = 1.0f;
    }
    double norm_sq = 0.0;
    for (float g : grid) norm_sq += g * g;
    const float inv = static_cast<float>(1.0 / std::sqrt(norm_sq));
    for (float& g : grid) g *= inv;
    return grid;
}

inline double descriptor_distance(const std::vector<float>& a, const std::vector<float>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

// Builds a model from an in-memory mesh: re-bases the ground plane to z = 0,
// samples the surface uniformly by area, and computes box + descriptor.
inline ExemplarModel make_model(std::string id, int class_label, TriMesh mesh,
                                std::size_t n_sample, std::uint64_t seed) {
    if (class_label < 1) fail("invalid-argument", "exemplar class labels start at 1");
    double min_z = std::numeric_limits<double>::infinity();
    for (const Vec3& v : mesh.vertices) min_z = std::min(min_z, v.z());
    for (Vec3& v : mesh.vertices) v.z() -= min_z;

    ExemplarModel model;
    model.id = std::move(id);
    model.class_label = class_label;
    Rng rng = Rng(seed).derive(exemplar_detail::fnv1a(model.id.data(), model.id.size()));
    model.cloud = sample_mesh_surface(mesh, n_sample, rng);
    model.mesh = std::move(mesh);
    model.box = bounding_box(model.cloud);
    model.descriptor = shape_descriptor(model.cloud);
    return model;
}

// Loads every labeled OFF model in a directory. The manifest is a flat JSON
// object mapping file names to integer class labels; every mesh file must be
// covered.
inline std::vector<ExemplarModel> ingest_models(const std::string& dir, const std::string& manifest_path,
                                                std::size_t n_sample = 2000, std::uint64_t seed = 1) {
    namespace fs = std::filesystem;
    std::ifstream mf(manifest_path);
    if (!mf) fail("io-error", "cannot open manifest '" + manifest_path + "'");
    nlohmann::json manifest;
    try {
        mf >> manifest;
    } catch (const std::exception& e) {
        fail("parse-error", std::string("manifest JSON: ") + e.what());
    }
    if (!manifest.is_object()) fail("parse-error", "manifest must be a JSON object of file -> class");

    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".off")
            files.push_back(entry.path().filename().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) fail("io-error", "no .off models under '" + dir + "'");

    std::vector<ExemplarModel> models;
    for (const std::string& file : files) {
        if (!manifest.contains(file))
            fail("unlabeled-model", "model '" + file + "' has no class in the manifest");
        const int label = manifest.at(file).get<int>();
        TriMesh mesh = load_off((fs::path(dir) / file).string());
        models.push_back(make_model(fs::path(file).stem().string(), label, std::move(mesh), n_sample, seed));
    }
    for (const auto& [file, label] : manifest.items()) {
        (void)label;
        if (std::find(files.begin(), files.end(), file) == files.end())
            fail("io-error", "manifest references missing model '" + file + "'");
    }
    return models;
}

namespace exemplar_detail {

inline void check_models(const std::vector<ExemplarModel>& models) {
    std::set<std::string> ids;
    for (const ExemplarModel& m : models) {
        if (!ids.insert(m.id).second) fail("duplicate-id", "exemplar id '" + m.id + "' appears twice");
        if (m.class_label < 1) fail("invalid-argument", "exemplar class labels start at 1");
        if (m.cloud.empty()) fail("invalid-cloud", "exemplar '" + m.id + "' has no points");
    }
}

}  // namespace exemplar_detail

// Uses every given model as an exemplar (no clustering), ordered by class
// then id.
inline ExemplarSet exemplar_set_from_models(std::vector<ExemplarModel> models) {
    exemplar_detail::check_models(models);
    if (models.empty()) fail("invalid-argument", "exemplar set needs at least one model");
    std::sort(models.begin(), models.end(), [](const ExemplarModel& a, const ExemplarModel& b) {
        if (a.class_label != b.class_label) return a.class_label < b.class_label;
        return a.id < b.id;
    });
    ExemplarSet set;
    for (const ExemplarModel& m : models) set.n_classes = std::max(set.n_classes, m.class_label);
    set.models = std::move(models);
    return set;
}

// Two-stage exemplar selection per class: k-medoids on bounding-box diagonal
// groups models by scale, then each scale group contributes shape-descriptor
// medoids, with counts allocated to groups proportionally to their size.
inline ExemplarSet cluster_exemplars(const std::vector<ExemplarModel>& models,
                                     const std::map<int, int>& per_class_count,
                                     std::uint64_t seed = 1234) {
    exemplar_detail::check_models(models);
    Rng rng(seed);

    std::vector<ExemplarModel> chosen;
    for (const auto& [cls, requested] : per_class_count) {
        if (requested < 1) fail("invalid-argument", "per-class exemplar count must be at least 1");
        std::vector<int> members;
        for (std::size_t i = 0; i < models.size(); ++i)
            if (models[i].class_label == cls) members.push_back(static_cast<int>(i));
        if (members.empty())
            fail("class-with-no-models", "no models available for class " + std::to_string(cls));

        const int n = static_cast<int>(members.size());
        const int count = std::min(requested, n);

        // stage 1: scale clusters; ceil(sqrt) keeps both stages non-trivial
        // while still giving one scale cluster per exemplar when count is 2
        const int k1 = std::min(n, std::max(1, static_cast<int>(std::ceil(std::sqrt(double(count))))));
        Eigen::MatrixXd scale_dist(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                scale_dist(i, j) = std::abs(models[members[i]].box.diagonal() -
                                            models[members[j]].box.diagonal());
        const KMedoidsResult stage1 = k_medoids(scale_dist, k1, rng);

        std::vector<std::vector<int>> groups(k1);  // local member positions
        for (int i = 0; i < n; ++i) groups[stage1.assignment[i]].push_back(i);

        // proportional allocation with largest remainders, capped by group size
        std::vector<int> quota(k1, 0);
        std::vector<std::pair<double, int>> remainder;
        int assigned = 0;
        for (int g = 0; g < k1; ++g) {
            const double exact = double(count) * groups[g].size() / n;
            quota[g] = static_cast<int>(std::floor(exact));
            assigned += quota[g];
            remainder.emplace_back(exact - quota[g], g);
        }
        std::sort(remainder.begin(), remainder.end(), [&](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return groups[a.second].size() > groups[b.second].size();
        });
        // count <= n, so capacity-respecting distribution always terminates
        for (int i = 0; assigned < count; i = (i + 1) % k1)
            if (quota[remainder[i].second] < static_cast<int>(groups[remainder[i].second].size())) {
                ++quota[remainder[i].second];
                ++assigned;
            }

        // stage 2: shape medoids inside each scale cluster
        std::vector<int> selected;  // model indices
        for (int g = 0; g < k1; ++g) {
            if (quota[g] == 0) continue;
            const int gn = static_cast<int>(groups[g].size());
            Eigen::MatrixXd shape_dist(gn, gn);
            for (int i = 0; i < gn; ++i)
                for (int j = 0; j < gn; ++j)
                    shape_dist(i, j) = descriptor_distance(models[members[groups[g][i]]].descriptor,
                                                           models[members[groups[g][j]]].descriptor);
            const KMedoidsResult stage2 = k_medoids(shape_dist, quota[g], rng);
            for (int m : stage2.medoids) selected.push_back(members[groups[g][m]]);
        }
        std::sort(selected.begin(), selected.end());
        for (int idx : selected) chosen.push_back(models[idx]);
    }
    return exemplar_set_from_models(std::move(chosen));
}

// 0/1 class membership, classes as rows (label c -> row c-1), exemplars as
// columns; every column sums to exactly 1.
inline Eigen::MatrixXd class_matrix(const ExemplarSet& set) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(set.n_classes, set.n_exemplars());
    for (int e = 1; e <= set.n_exemplars(); ++e) a(set.exemplar(e).class_label - 1, e - 1) = 1.0;
    return a;
}

inline void save_exemplars(const std::string& dir, const ExemplarSet& set) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    nlohmann::json index;
    index["format"] = "asist-exemplars";
    index["version"] = 1;
    index["n_classes"] = set.n_classes;
    nlohmann::json list = nlohmann::json::array();
    for (const ExemplarModel& m : set.models) {
        PointCloud cloud;
        cloud.points = m.cloud;
        save_ply((fs::path(dir) / (m.id + ".ply")).string(), cloud);
        nlohmann::json jm;
        jm["id"] = m.id;
        jm["class"] = m.class_label;
        jm["cloud"] = m.id + ".ply";
        jm["box_min"] = {m.box.min.x(), m.box.min.y(), m.box.min.z()};
        jm["box_max"] = {m.box.max.x(), m.box.max.y(), m.box.max.z()};
        jm["descriptor_hash"] = exemplar_detail::hash_string(exemplar_detail::fnv1a(
            m.descriptor.data(), m.descriptor.size() * sizeof(float)));
        list.push_back(std::move(jm));
    }
    index["exemplars"] = std::move(list);
    std::ofstream out((fs::path(dir) / "index.json").string());
    if (!out) fail("io-error", "cannot write exemplar index under '" + dir + "'");
    out << index.dump(1, '\t') << '\n';
}

inline ExemplarSet load_exemplars(const std::string& dir) {
    namespace fs = std::filesystem;
    std::ifstream in((fs::path(dir) / "index.json").string());
    if (!in) fail("io-error", "cannot open exemplar index under '" + dir + "'");
    nlohmann::json index;
    try {
        in >> index;
    } catch (const std::exception& e) {
        fail("parse-error", std::string("exemplar index JSON: ") + e.what());
    }
    if (index.value("format", "") != "asist-exemplars") fail("parse-error", "not an exemplar index");
    if (index.value("version", 0) != 1) fail("parse-error", "unsupported exemplar index version");

    ExemplarSet set;
    set.n_classes = index.at("n_classes").get<int>();
    for (const auto& jm : index.at("exemplars")) {
        ExemplarModel m;
        m.id = jm.at("id").get<std::string>();
        m.class_label = jm.at("class").get<int>();
        const PointCloud cloud = load_ply((fs::path(dir) / jm.at("cloud").get<std::string>()).string());
        m.cloud = cloud.points;
        m.box = bounding_box(m.cloud);
        m.descriptor = shape_descriptor(m.cloud);
        const std::string want = jm.at("descriptor_hash").get<std::string>();
        const std::string got = exemplar_detail::hash_string(exemplar_detail::fnv1a(
            m.descriptor.data(), m.descriptor.size() * sizeof(float)));
        if (want != got)
            fail("parse-error", "descriptor hash mismatch for exemplar '" + m.id + "'");
        set.models.push_back(std::move(m));
    }
    exemplar_detail::check_models(set.models);
    if (set.models.empty()) fail("parse-error", "exemplar index lists no exemplars");
    return set;
}

}  // namespace asist

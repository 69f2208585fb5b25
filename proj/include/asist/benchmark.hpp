#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "asist/boxes.hpp"
#include "asist/common.hpp"
#include "asist/exemplar.hpp"
#include "asist/mesh.hpp"
#include "asist/point_cloud.hpp"
#include "asist/rigid.hpp"

namespace asist {

struct SceneObject {
    int class_label = 0;
    std::string model_id;
    RigidTransform pose;
    OrientedBox box;  // tight yaw-aligned bounds of the placed model
};

struct BenchmarkScene {
    PointCloud cloud;  // labels carry the source class per point (0 never occurs)
    std::vector<SceneObject> objects;
};

struct BenchmarkParams {
    int objects_min = 1;        // per class, inclusive
    int objects_max = 2;        // per class, inclusive
    int points_per_object = 2500;
    double noise_sigma = 0.0;   // isotropic Gaussian jitter, meters
    double footprint_fill = 0.3;  // total object footprint / floor area
    int max_attempts = 1000;    // rejection-sampling budget per object
};

namespace benchmark_detail {

// Persisted sets carry only sampled clouds and boxes, no meshes; fall back to
// those so scene synthesis works on a reloaded database as well.
inline Aabb canonical_box(const ExemplarModel& model) {
    if (model.mesh.vertices.empty()) return model.box;
    Aabb box;
    for (const Vec3& v : model.mesh.vertices) box.expand(v);
    return box;
}

inline OrientedBox placed_box(const ExemplarModel& model, const RigidTransform& pose) {
    return box_under_transform(canonical_box(model), pose);
}

inline std::vector<Vec3> sample_model(const ExemplarModel& model, std::size_t n, Rng& rng) {
    if (!model.mesh.vertices.empty()) return sample_mesh_surface(model.mesh, n, rng);
    if (model.cloud.empty()) fail("invalid-argument", "model '" + model.id + "' has no geometry");
    std::vector<Vec3> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(model.cloud[rng.uniform_index(model.cloud.size())]);
    return out;
}

}  // namespace benchmark_detail

// Synthesizes one scene: for each requested class, 1-2 uniformly drawn models
// are dropped at uniform xy positions and yaws on a square floor sized so the
// object footprints cover at most `footprint_fill` of it; placements whose
// footprints overlap an earlier object are rejected and resampled.  The cloud
// is the union of fresh surface samples of every placed model.
inline BenchmarkScene gen_scene(const ExemplarSet& set, const std::vector<int>& classes,
                                const BenchmarkParams& params, Rng& rng) {
    struct Pick {
        int model_index;
        double footprint;
    };

    for (int scene_attempt = 0; scene_attempt < 50; ++scene_attempt) {
        std::vector<Pick> picks;
        double footprint_total = 0.0;
        for (int cls : classes) {
            std::vector<int> of_class;
            for (std::size_t i = 0; i < set.models.size(); ++i)
                if (set.models[i].class_label == cls) of_class.push_back(static_cast<int>(i));
            if (of_class.empty())
                fail("class-with-no-models", "no models for class " + std::to_string(cls));
            const int count = params.objects_min +
                              static_cast<int>(rng.uniform_index(static_cast<std::size_t>(
                                  params.objects_max - params.objects_min + 1)));
            for (int c = 0; c < count; ++c) {
                const int idx = of_class[rng.uniform_index(of_class.size())];
                const Aabb box =
                    benchmark_detail::canonical_box(set.models[static_cast<std::size_t>(idx)]);
                const Vec3 ext = box.extent();
                picks.push_back({idx, ext.x() * ext.y()});
                footprint_total += ext.x() * ext.y();
            }
        }

        const double side = std::sqrt(footprint_total / params.footprint_fill);
        BenchmarkScene scene;
        bool scene_ok = true;
        for (const Pick& pick : picks) {
            const ExemplarModel& model = set.models[static_cast<std::size_t>(pick.model_index)];
            bool placed = false;
            for (int attempt = 0; attempt < params.max_attempts && !placed; ++attempt) {
                RigidTransform pose;
                pose.rotation = rot_z(rng.uniform(0.0, 2.0 * kPi)).rotation;
                pose.translation =
                    Vec3(rng.uniform(0.0, side), rng.uniform(0.0, side), 0.0);
                const OrientedBox box = benchmark_detail::placed_box(model, pose);
                bool collides = false;
                for (const SceneObject& other : scene.objects)
                    if (footprints_overlap(box, other.box)) {
                        collides = true;
                        break;
                    }
                if (collides) continue;
                scene.objects.push_back({model.class_label, model.id, pose, box});
                placed = true;
            }
            if (!placed) {
                scene_ok = false;  // crowded draw: regenerate the whole scene
                break;
            }
        }
        if (!scene_ok) continue;

        for (const SceneObject& obj : scene.objects) {
            const ExemplarModel* model = nullptr;
            for (const ExemplarModel& m : set.models)
                if (m.id == obj.model_id) {
                    model = &m;
                    break;
                }
            const std::vector<Vec3> samples = benchmark_detail::sample_model(
                *model, static_cast<std::size_t>(params.points_per_object), rng);
            for (const Vec3& s : samples) {
                Vec3 p = obj.pose.apply(s);
                if (params.noise_sigma > 0.0)
                    p += params.noise_sigma * Vec3(rng.normal(), rng.normal(), rng.normal());
                scene.cloud.points.push_back(p);
                scene.cloud.labels.push_back(obj.class_label);
            }
        }
        return scene;
    }
    fail("placement-failure", "could not synthesize a non-overlapping scene");
}

inline std::vector<BenchmarkScene> gen_benchmark(const ExemplarSet& set, int n_scenes,
                                                 const std::vector<int>& classes,
                                                 const BenchmarkParams& params, Rng& rng) {
    if (n_scenes < 1) fail("invalid-argument", "at least one scene required");
    std::vector<BenchmarkScene> scenes;
    scenes.reserve(static_cast<std::size_t>(n_scenes));
    for (int s = 0; s < n_scenes; ++s) scenes.push_back(gen_scene(set, classes, params, rng));
    return scenes;
}

}  // namespace asist

#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "asist/benchmark.hpp"
#include "asist/boxes.hpp"
#include "asist/evaluate.hpp"
#include "asist/pipeline.hpp"

namespace asist {

namespace artifact_detail {

inline nlohmann::json transform_to_json(const RigidTransform& t) {
    const Eigen::Matrix4d m = t.matrix();
    nlohmann::json arr = nlohmann::json::array();
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) arr.push_back(m(r, c));
    return arr;
}

inline RigidTransform transform_from_json(const nlohmann::json& arr) {
    if (!arr.is_array() || arr.size() != 16)
        fail("parse-error", "transform must be 16 numbers, row-major");
    Eigen::Matrix4d m;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) m(r, c) = arr[static_cast<std::size_t>(4 * r + c)].get<double>();
    return rigid_from_matrix(m);
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("io-error", "cannot write '" + path + "'");
    out << text;
}

inline nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("io-error", "cannot open '" + path + "'");
    try {
        nlohmann::json j;
        in >> j;
        return j;
    } catch (const nlohmann::json::exception& e) {
        fail("parse-error", "malformed JSON in '" + path + "': " + e.what());
    }
}

}  // namespace artifact_detail

inline nlohmann::json placements_to_json(const std::vector<Placement>& placements) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Placement& p : placements)
        arr.push_back({{"exemplar_id", p.exemplar_id},
                       {"class", p.class_label},
                       {"transform", artifact_detail::transform_to_json(p.pose)},
                       {"vote", p.vote},
                       {"weight_mass", p.weight_mass}});
    return arr;
}

inline void save_placements(const std::string& path, const std::vector<Placement>& placements) {
    artifact_detail::write_text(path, placements_to_json(placements).dump(2) + "\n");
}

inline std::vector<Placement> load_placements(const std::string& path) {
    const nlohmann::json arr = artifact_detail::read_json(path);
    if (!arr.is_array()) fail("parse-error", "placements file must hold a JSON array");
    std::vector<Placement> out;
    try {
        for (const nlohmann::json& j : arr) {
            Placement p;
            p.exemplar_id = j.at("exemplar_id").get<int>();
            p.class_label = j.at("class").get<int>();
            p.pose = artifact_detail::transform_from_json(j.at("transform"));
            p.vote = j.at("vote").get<double>();
            p.weight_mass = j.at("weight_mass").get<double>();
            out.push_back(p);
        }
    } catch (const nlohmann::json::exception& e) {
        fail("parse-error", std::string("malformed placement entry: ") + e.what());
    }
    return out;
}

inline void save_annotations(const std::string& path, const std::vector<SceneObject>& objects) {
    nlohmann::json arr = nlohmann::json::array();
    for (const SceneObject& o : objects)
        arr.push_back({{"class", o.class_label},
                       {"model_id", o.model_id},
                       {"center", {o.box.center.x(), o.box.center.y(), o.box.center.z()}},
                       {"half_extents",
                        {o.box.half_extents.x(), o.box.half_extents.y(), o.box.half_extents.z()}},
                       {"yaw", o.box.yaw()},
                       {"transform", artifact_detail::transform_to_json(o.pose)}});
    artifact_detail::write_text(path, nlohmann::json{{"objects", arr}}.dump(2) + "\n");
}

inline std::vector<SceneObject> load_annotations(const std::string& path) {
    const nlohmann::json j = artifact_detail::read_json(path);
    std::vector<SceneObject> out;
    try {
        for (const nlohmann::json& o : j.at("objects")) {
            SceneObject obj;
            obj.class_label = o.at("class").get<int>();
            obj.model_id = o.at("model_id").get<std::string>();
            const auto& c = o.at("center");
            const auto& h = o.at("half_extents");
            obj.box = yaw_box(Vec3(c[0].get<double>(), c[1].get<double>(), c[2].get<double>()),
                              Vec3(h[0].get<double>(), h[1].get<double>(), h[2].get<double>()),
                              o.at("yaw").get<double>());
            if (o.contains("transform"))
                obj.pose = artifact_detail::transform_from_json(o.at("transform"));
            out.push_back(obj);
        }
    } catch (const nlohmann::json::exception& e) {
        fail("parse-error", std::string("malformed annotation entry: ") + e.what());
    }
    return out;
}

inline nlohmann::json trace_to_json(const AsistTrace& trace) {
    nlohmann::json iters = nlohmann::json::array();
    for (const IterationRecord& r : trace.iterations)
        iters.push_back({{"outer", r.outer},
                         {"inner", r.inner},
                         {"lambda6", r.lambda6},
                         {"semantic", r.energy.semantic},
                         {"geometric", r.energy.geometric},
                         {"smoothness", r.energy.smoothness},
                         {"sparsity", r.energy.sparsity},
                         {"vote_link", r.energy.vote_link},
                         {"overlap", r.energy.overlap},
                         {"total", r.energy.total},
                         {"active_instances", r.active_instances}});
    nlohmann::json j;
    j["iterations"] = iters;
    j["irls_surrogate"] = {{"before", trace.irls.before}, {"after", trace.irls.after}};
    j["icp_objectives"] = trace.icp_objectives;
    j["voting_energies"] = trace.voting_energies;
    return j;
}

inline void save_trace(const std::string& path, const AsistTrace& trace) {
    artifact_detail::write_text(path, trace_to_json(trace).dump(2) + "\n");
}

inline nlohmann::json report_to_json(const EvaluationReport& report) {
    const auto row_json = [](const MetricRow& r) {
        return nlohmann::json{{"class", r.class_label},   {"precision", r.precision},
                              {"recall", r.recall},       {"f1", r.f1},
                              {"matched", r.matched},     {"detections", r.n_detections},
                              {"annotations", r.n_annotations}};
    };
    nlohmann::json sem = nlohmann::json::array();
    for (const MetricRow& r : report.semantic) sem.push_back(row_json(r));
    return nlohmann::json{{"semantic", sem}, {"geometric", row_json(report.geometric)}};
}

inline void save_report(const std::string& path, const EvaluationReport& report) {
    artifact_detail::write_text(path, report_to_json(report).dump(2) + "\n");
}

inline EvaluationReport load_report(const std::string& path) {
    const nlohmann::json j = artifact_detail::read_json(path);
    const auto row_from = [](const nlohmann::json& r) {
        MetricRow row;
        row.class_label = r.at("class").get<int>();
        row.precision = r.at("precision").get<double>();
        row.recall = r.at("recall").get<double>();
        row.f1 = r.at("f1").get<double>();
        row.matched = r.at("matched").get<int>();
        row.n_detections = r.at("detections").get<int>();
        row.n_annotations = r.at("annotations").get<int>();
        return row;
    };
    EvaluationReport report;
    try {
        for (const nlohmann::json& r : j.at("semantic")) report.semantic.push_back(row_from(r));
        report.geometric = row_from(j.at("geometric"));
    } catch (const nlohmann::json::exception& e) {
        fail("parse-error", std::string("malformed report: ") + e.what());
    }
    return report;
}

inline nlohmann::json trace_from_file(const std::string& path) {
    return artifact_detail::read_json(path);
}

}  // namespace asist

#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "asist/boxes.hpp"
#include "asist/common.hpp"

namespace asist {

struct DetectionBox {
    int class_label = 0;
    OrientedBox box;
};

struct MatchRecord {
    int detection = -1;
    int annotation = -1;
    double iou = 0.0;
    bool class_match = false;
};

struct MetricRow {
    int class_label = -1;  // -1 marks the aggregate geometric row
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    int matched = 0;
    int n_detections = 0;
    int n_annotations = 0;
};

struct EvaluationReport {
    std::vector<MetricRow> semantic;  // one row per class present on either side
    MetricRow geometric;              // class-agnostic aggregate
    std::vector<MatchRecord> matches; // geometric greedy matching, descending IoU
};

namespace evaluate_detail {

inline double f1_of(double precision, double recall) {
    const double s = precision + recall;
    return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

// Greedy one-to-one matching over precomputed IoUs above threshold,
// descending, with index tie-breaks for determinism.
inline std::vector<MatchRecord> greedy_match(const Eigen::MatrixXd& iou, double threshold,
                                             const std::vector<char>& pair_allowed) {
    struct Cand {
        double iou;
        int det, ann;
    };
    std::vector<Cand> cands;
    for (int d = 0; d < iou.rows(); ++d)
        for (int a = 0; a < iou.cols(); ++a)
            if (iou(d, a) > threshold && pair_allowed[static_cast<std::size_t>(d) *
                                                          static_cast<std::size_t>(iou.cols()) +
                                                      static_cast<std::size_t>(a)])
                cands.push_back({iou(d, a), d, a});
    std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
        if (x.iou != y.iou) return x.iou > y.iou;
        if (x.det != y.det) return x.det < y.det;
        return x.ann < y.ann;
    });
    std::vector<char> det_used(static_cast<std::size_t>(iou.rows()), 0);
    std::vector<char> ann_used(static_cast<std::size_t>(iou.cols()), 0);
    std::vector<MatchRecord> out;
    for (const Cand& c : cands) {
        if (det_used[static_cast<std::size_t>(c.det)] || ann_used[static_cast<std::size_t>(c.ann)])
            continue;
        det_used[static_cast<std::size_t>(c.det)] = 1;
        ann_used[static_cast<std::size_t>(c.ann)] = 1;
        out.push_back({c.det, c.ann, c.iou, false});
    }
    return out;
}

}  // namespace evaluate_detail

// Detection-style evaluation: pairwise oriented-box IoUs (seeded Monte Carlo,
// deterministic per pair), greedy one-to-one matching, then precision/recall/
// F1 both class-agnostic (geometric) and per class with the matching
// restricted to equal-class pairs (semantic).
inline EvaluationReport evaluate(const std::vector<DetectionBox>& detections,
                                 const std::vector<DetectionBox>& annotations,
                                 double iou_threshold, std::uint64_t seed = 7) {
    const int n_d = static_cast<int>(detections.size());
    const int n_a = static_cast<int>(annotations.size());

    Eigen::MatrixXd iou = Eigen::MatrixXd::Zero(n_d, n_a);
    const Rng base(seed);
    for (int d = 0; d < n_d; ++d)
        for (int a = 0; a < n_a; ++a) {
            const Rng pair_rng = base.derive((static_cast<std::uint64_t>(d) << 32) |
                                             static_cast<std::uint64_t>(a));
            iou(d, a) = oriented_iou(detections[static_cast<std::size_t>(d)].box,
                                     annotations[static_cast<std::size_t>(a)].box, pair_rng)
                            .iou;
        }

    EvaluationReport report;
    std::vector<char> all_pairs(static_cast<std::size_t>(n_d) * static_cast<std::size_t>(n_a), 1);
    report.matches = evaluate_detail::greedy_match(iou, iou_threshold, all_pairs);
    for (MatchRecord& m : report.matches)
        m.class_match = detections[static_cast<std::size_t>(m.detection)].class_label ==
                        annotations[static_cast<std::size_t>(m.annotation)].class_label;

    report.geometric.n_detections = n_d;
    report.geometric.n_annotations = n_a;
    report.geometric.matched = static_cast<int>(report.matches.size());
    report.geometric.precision =
        n_d > 0 ? static_cast<double>(report.geometric.matched) / n_d : 0.0;
    report.geometric.recall = n_a > 0 ? static_cast<double>(report.geometric.matched) / n_a : 0.0;
    report.geometric.f1 = evaluate_detail::f1_of(report.geometric.precision, report.geometric.recall);

    std::vector<char> same_class(static_cast<std::size_t>(n_d) * static_cast<std::size_t>(n_a), 0);
    for (int d = 0; d < n_d; ++d)
        for (int a = 0; a < n_a; ++a)
            same_class[static_cast<std::size_t>(d) * static_cast<std::size_t>(n_a) +
                       static_cast<std::size_t>(a)] =
                detections[static_cast<std::size_t>(d)].class_label ==
                annotations[static_cast<std::size_t>(a)].class_label;
    const std::vector<MatchRecord> class_matches =
        evaluate_detail::greedy_match(iou, iou_threshold, same_class);

    std::set<int> classes;
    for (const DetectionBox& d : detections) classes.insert(d.class_label);
    for (const DetectionBox& a : annotations) classes.insert(a.class_label);
    for (int cls : classes) {
        MetricRow row;
        row.class_label = cls;
        for (const DetectionBox& d : detections) row.n_detections += d.class_label == cls;
        for (const DetectionBox& a : annotations) row.n_annotations += a.class_label == cls;
        for (const MatchRecord& m : class_matches)
            row.matched += detections[static_cast<std::size_t>(m.detection)].class_label == cls;
        row.precision = row.n_detections > 0
                            ? static_cast<double>(row.matched) / row.n_detections
                            : 0.0;
        row.recall = row.n_annotations > 0
                         ? static_cast<double>(row.matched) / row.n_annotations
                         : 0.0;
        row.f1 = evaluate_detail::f1_of(row.precision, row.recall);
        report.semantic.push_back(row);
    }
    return report;
}

// Sums raw match counts from several scenes into one report (metrics are
// recomputed from the pooled counts, not averaged).
inline EvaluationReport pool_reports(const std::vector<EvaluationReport>& reports) {
    EvaluationReport pooled;
    std::map<int, MetricRow> by_class;
    for (const EvaluationReport& r : reports) {
        pooled.geometric.matched += r.geometric.matched;
        pooled.geometric.n_detections += r.geometric.n_detections;
        pooled.geometric.n_annotations += r.geometric.n_annotations;
        for (const MetricRow& row : r.semantic) {
            MetricRow& acc = by_class[row.class_label];
            acc.class_label = row.class_label;
            acc.matched += row.matched;
            acc.n_detections += row.n_detections;
            acc.n_annotations += row.n_annotations;
        }
    }
    const auto finish = [](MetricRow& row) {
        row.precision =
            row.n_detections > 0 ? static_cast<double>(row.matched) / row.n_detections : 0.0;
        row.recall =
            row.n_annotations > 0 ? static_cast<double>(row.matched) / row.n_annotations : 0.0;
        row.f1 = evaluate_detail::f1_of(row.precision, row.recall);
    };
    finish(pooled.geometric);
    for (auto& [cls, row] : by_class) {
        finish(row);
        pooled.semantic.push_back(row);
    }
    return pooled;
}

}  // namespace asist

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "asist/artifacts.hpp"
#include "asist/evaluate.hpp"
#include "asist/pipeline.hpp"

namespace asist {

namespace report_detail {

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

inline std::string svg_header(int width, int height) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) +
           " " + std::to_string(height) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

}  // namespace report_detail

// `class,precision,recall,f1` rows per class plus the aggregate row labeled
// "geometric".
inline void write_metrics_csv(const std::string& path, const EvaluationReport& report) {
    std::string csv = "class,precision,recall,f1\n";
    for (const MetricRow& r : report.semantic)
        csv += std::to_string(r.class_label) + "," + report_detail::fmt(r.precision) + "," +
               report_detail::fmt(r.recall) + "," + report_detail::fmt(r.f1) + "\n";
    csv += "geometric," + report_detail::fmt(report.geometric.precision) + "," +
           report_detail::fmt(report.geometric.recall) + "," +
           report_detail::fmt(report.geometric.f1) + "\n";
    artifact_detail::write_text(path, csv);
}

inline void write_trace_csv(const std::string& path, const AsistTrace& trace) {
    std::string csv =
        "outer,inner,lambda6,semantic,geometric,smoothness,sparsity,vote_link,overlap,total,"
        "active_instances\n";
    for (const IterationRecord& r : trace.iterations) {
        csv += std::to_string(r.outer) + "," + std::to_string(r.inner) + "," +
               report_detail::fmt(r.lambda6) + "," + report_detail::fmt(r.energy.semantic) + "," +
               report_detail::fmt(r.energy.geometric) + "," +
               report_detail::fmt(r.energy.smoothness) + "," +
               report_detail::fmt(r.energy.sparsity) + "," +
               report_detail::fmt(r.energy.vote_link) + "," +
               report_detail::fmt(r.energy.overlap) + "," + report_detail::fmt(r.energy.total) +
               "," + std::to_string(r.active_instances) + "\n";
    }
    artifact_detail::write_text(path, csv);
}

// Line plot of the total energy across recorded iterations.
inline void render_energy_svg(const std::string& path, const AsistTrace& trace) {
    const int width = 640, height = 400, margin = 50;
    std::string svg = report_detail::svg_header(width, height);

    if (!trace.iterations.empty()) {
        double lo = trace.iterations.front().energy.total;
        double hi = lo;
        for (const IterationRecord& r : trace.iterations) {
            lo = std::min(lo, r.energy.total);
            hi = std::max(hi, r.energy.total);
        }
        if (hi <= lo) hi = lo + 1.0;

        const auto x_of = [&](std::size_t i) {
            return margin + (width - 2 * margin) * static_cast<double>(i) /
                                std::max<std::size_t>(trace.iterations.size() - 1, 1);
        };
        const auto y_of = [&](double v) {
            return height - margin - (height - 2 * margin) * (v - lo) / (hi - lo);
        };

        std::string pts;
        for (std::size_t i = 0; i < trace.iterations.size(); ++i)
            pts += report_detail::fmt(x_of(i)) + "," +
                   report_detail::fmt(y_of(trace.iterations[i].energy.total)) + " ";
        svg += "<polyline fill=\"none\" stroke=\"#2060c0\" stroke-width=\"2\" points=\"" + pts +
               "\"/>\n";
        svg += "<text x=\"" + std::to_string(margin) + "\" y=\"20\" font-size=\"14\">total energy "
               "per iteration</text>\n";
        svg += "<text x=\"" + std::to_string(margin) + "\" y=\"" + std::to_string(height - 10) +
               "\" font-size=\"11\">min " + report_detail::fmt(lo) + "  max " +
               report_detail::fmt(hi) + "</text>\n";
    } else {
        svg += "<text x=\"20\" y=\"40\" font-size=\"14\">no iterations recorded</text>\n";
    }

    // axes
    svg += "<line x1=\"" + std::to_string(margin) + "\" y1=\"" + std::to_string(height - margin) +
           "\" x2=\"" + std::to_string(width - margin) + "\" y2=\"" +
           std::to_string(height - margin) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + std::to_string(margin) + "\" y1=\"" + std::to_string(margin) +
           "\" x2=\"" + std::to_string(margin) + "\" y2=\"" + std::to_string(height - margin) +
           "\" stroke=\"black\"/>\n";
    svg += "</svg>\n";
    artifact_detail::write_text(path, svg);
}

// Bar chart of per-class F1 plus the aggregate geometric F1.
inline void render_metrics_svg(const std::string& path, const EvaluationReport& report) {
    const int width = 640, height = 400, margin = 50;
    std::string svg = report_detail::svg_header(width, height);

    std::vector<std::pair<std::string, double>> bars;
    for (const MetricRow& r : report.semantic)
        bars.emplace_back("class " + std::to_string(r.class_label), r.f1);
    bars.emplace_back("geometric", report.geometric.f1);

    const double band = static_cast<double>(width - 2 * margin) / static_cast<double>(bars.size());
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const double h = (height - 2 * margin) * std::clamp(bars[i].second, 0.0, 1.0);
        const double x = margin + band * static_cast<double>(i) + 0.15 * band;
        svg += "<rect x=\"" + report_detail::fmt(x) + "\" y=\"" +
               report_detail::fmt(height - margin - h) + "\" width=\"" +
               report_detail::fmt(0.7 * band) + "\" height=\"" + report_detail::fmt(h) +
               "\" fill=\"#40a060\"/>\n";
        svg += "<text x=\"" + report_detail::fmt(x) + "\" y=\"" + std::to_string(height - margin + 16) +
               "\" font-size=\"11\">" + bars[i].first + "</text>\n";
        svg += "<text x=\"" + report_detail::fmt(x) + "\" y=\"" +
               report_detail::fmt(height - margin - h - 4) + "\" font-size=\"11\">" +
               report_detail::fmt(bars[i].second) + "</text>\n";
    }
    svg += "<text x=\"" + std::to_string(margin) + "\" y=\"20\" font-size=\"14\">F1 by class</text>\n";
    svg += "</svg>\n";
    artifact_detail::write_text(path, svg);
}

}  // namespace asist

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "asist/common.hpp"
#include "asist/point_cloud.hpp"

namespace asist {

struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;

    [[nodiscard]] double total_area() const {
        double area = 0.0;
        for (const auto& t : triangles) {
            const Vec3 e1 = vertices[t[1]] - vertices[t[0]];
            const Vec3 e2 = vertices[t[2]] - vertices[t[0]];
            area += 0.5 * e1.cross(e2).norm();
        }
        return area;
    }
};

// Parses an OFF mesh. Faces with more than three vertices are fan-triangulated.
inline TriMesh load_off(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("io-error", "cannot open '" + path + "'");

    std::string line;
    std::size_t line_no = 0;
    auto next_content_line = [&](const char* what) {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            std::size_t pos = line.find_first_not_of(" \t");
            if (pos == std::string::npos) continue;
            if (line[pos] == '#') continue;
            return;
        }
        fail("parse-error", std::string("unexpected end of file (expected ") + what + ") in '" + path + "'");
    };

    next_content_line("OFF magic");
    std::size_t nv = 0, nf = 0, ne = 0;
    {
        std::istringstream ls(line);
        std::string magic;
        ls >> magic;
        if (magic != "OFF") fail("parse-error", "missing OFF magic at line " + std::to_string(line_no));
        // Counts may share the magic line ("OFF 8 6 0") or follow on their own.
        if (!(ls >> nv >> nf >> ne)) {
            next_content_line("vertex/face counts");
            std::istringstream cs(line);
            if (!(cs >> nv >> nf >> ne))
                fail("parse-error", "malformed count line at line " + std::to_string(line_no));
        }
    }
    if (nv == 0) fail("parse-error", "mesh has no vertices in '" + path + "'");

    TriMesh mesh;
    mesh.vertices.reserve(nv);
    for (std::size_t i = 0; i < nv; ++i) {
        next_content_line("vertex row");
        std::istringstream ls(line);
        double x, y, z;
        if (!(ls >> x >> y >> z)) fail("parse-error", "malformed vertex at line " + std::to_string(line_no));
        mesh.vertices.emplace_back(x, y, z);
    }
    for (std::size_t i = 0; i < nf; ++i) {
        next_content_line("face row");
        std::istringstream ls(line);
        int k = 0;
        if (!(ls >> k) || k < 3) fail("parse-error", "malformed face at line " + std::to_string(line_no));
        std::vector<int> idx(k);
        for (int j = 0; j < k; ++j) {
            if (!(ls >> idx[j]) || idx[j] < 0 || idx[j] >= static_cast<int>(nv))
                fail("parse-error", "face index out of range at line " + std::to_string(line_no));
        }
        for (int j = 1; j + 1 < k; ++j) mesh.triangles.push_back({idx[0], idx[j], idx[j + 1]});
    }
    if (mesh.triangles.empty()) fail("parse-error", "mesh has no faces in '" + path + "'");
    return mesh;
}

inline void save_off(const std::string& path, const TriMesh& mesh) {
    std::ofstream out(path);
    if (!out) fail("io-error", "cannot open '" + path + "' for writing");
    out << "OFF\n" << mesh.vertices.size() << ' ' << mesh.triangles.size() << " 0\n";
    char buf[96];
    for (const Vec3& v : mesh.vertices) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", v.x(), v.y(), v.z());
        out << buf;
    }
    for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    if (!out) fail("io-error", "write failure on '" + path + "'");
}

// Area-weighted surface sampling: triangles are picked proportionally to area
// (inverse-CDF on the cumulative area table), points uniformly by the
// square-root barycentric trick. Deterministic given the rng state.
inline std::vector<Vec3> sample_mesh_surface(const TriMesh& mesh, std::size_t n_samples, Rng& rng) {
    if (mesh.triangles.empty()) fail("invalid-mesh", "cannot sample a mesh with no triangles");
    std::vector<double> cum_area(mesh.triangles.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
        const auto& t = mesh.triangles[i];
        const Vec3 e1 = mesh.vertices[t[1]] - mesh.vertices[t[0]];
        const Vec3 e2 = mesh.vertices[t[2]] - mesh.vertices[t[0]];
        acc += 0.5 * e1.cross(e2).norm();
        cum_area[i] = acc;
    }
    if (acc <= 0.0) fail("invalid-mesh", "mesh has zero surface area");

    std::vector<Vec3> out;
    out.reserve(n_samples);
    for (std::size_t s = 0; s < n_samples; ++s) {
        const double u = rng.uniform() * acc;
        const std::size_t ti =
            std::lower_bound(cum_area.begin(), cum_area.end(), u) - cum_area.begin();
        const auto& t = mesh.triangles[std::min(ti, mesh.triangles.size() - 1)];
        double r1 = std::sqrt(rng.uniform());
        double r2 = rng.uniform();
        const Vec3 p = (1.0 - r1) * mesh.vertices[t[0]] + r1 * (1.0 - r2) * mesh.vertices[t[1]] +
                       r1 * r2 * mesh.vertices[t[2]];
        out.push_back(p);
    }
    return out;
}

}  // namespace asist

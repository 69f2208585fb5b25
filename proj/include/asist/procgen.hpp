#pragma once

#include <string>

#include "asist/common.hpp"
#include "asist/mesh.hpp"

namespace asist {

namespace procgen_detail {

// Appends the 12 triangles of the axis-aligned box [lo, hi] to the mesh.
inline void append_box(TriMesh& mesh, const Vec3& lo, const Vec3& hi) {
    const int base = static_cast<int>(mesh.vertices.size());
    for (int i = 0; i < 8; ++i)
        mesh.vertices.emplace_back((i & 1) ? hi.x() : lo.x(), (i & 2) ? hi.y() : lo.y(),
                                   (i & 4) ? hi.z() : lo.z());
    const int quads[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4},
                             {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
    for (const auto& q : quads) {
        mesh.triangles.push_back({base + q[0], base + q[1], base + q[2]});
        mesh.triangles.push_back({base + q[0], base + q[2], base + q[3]});
    }
}

}  // namespace procgen_detail

// Simple closed box: footprint w x d centered at the origin, height h above
// z = 0. The shared convention for all generated models is min-z = 0.
inline TriMesh make_box_mesh(double w, double d, double h) {
    if (!(w > 0.0 && d > 0.0 && h > 0.0)) fail("invalid-argument", "box dimensions must be positive");
    TriMesh mesh;
    procgen_detail::append_box(mesh, Vec3(-w / 2, -d / 2, 0.0), Vec3(w / 2, d / 2, h));
    return mesh;
}

// Four-legged table: slab top of the given thickness on corner legs.
inline TriMesh make_table_mesh(double w, double d, double h, double top_thickness,
                               double leg_thickness) {
    if (!(w > 0.0 && d > 0.0 && h > top_thickness && top_thickness > 0.0 && leg_thickness > 0.0))
        fail("invalid-argument", "inconsistent table dimensions");
    TriMesh mesh;
    procgen_detail::append_box(mesh, Vec3(-w / 2, -d / 2, h - top_thickness), Vec3(w / 2, d / 2, h));
    const double lt = leg_thickness;
    for (int sx = 0; sx < 2; ++sx)
        for (int sy = 0; sy < 2; ++sy) {
            const double x0 = sx ? w / 2 - lt : -w / 2;
            const double y0 = sy ? d / 2 - lt : -d / 2;
            procgen_detail::append_box(mesh, Vec3(x0, y0, 0.0),
                                       Vec3(x0 + lt, y0 + lt, h - top_thickness));
        }
    return mesh;
}

// Chair: seat slab on corner legs plus a raised back panel along +y.
inline TriMesh make_chair_mesh(double w, double d, double seat_h, double back_h,
                               double thickness) {
    if (!(w > 0.0 && d > 0.0 && seat_h > thickness && back_h > seat_h && thickness > 0.0))
        fail("invalid-argument", "inconsistent chair dimensions");
    TriMesh mesh;
    procgen_detail::append_box(mesh, Vec3(-w / 2, -d / 2, seat_h - thickness),
                               Vec3(w / 2, d / 2, seat_h));
    const double lt = thickness;
    for (int sx = 0; sx < 2; ++sx)
        for (int sy = 0; sy < 2; ++sy) {
            const double x0 = sx ? w / 2 - lt : -w / 2;
            const double y0 = sy ? d / 2 - lt : -d / 2;
            procgen_detail::append_box(mesh, Vec3(x0, y0, 0.0),
                                       Vec3(x0 + lt, y0 + lt, seat_h - thickness));
        }
    procgen_detail::append_box(mesh, Vec3(-w / 2, d / 2 - lt, seat_h), Vec3(w / 2, d / 2, back_h));
    return mesh;
}

}  // namespace asist

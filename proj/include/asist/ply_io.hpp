#pragma once

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "asist/point_cloud.hpp"

namespace asist {

namespace ply_detail {

enum class Scalar { f32, f64, i8, u8, i16, u16, i32, u32 };

inline bool scalar_from_name(const std::string& name, Scalar& out) {
    if (name == "float" || name == "float32") out = Scalar::f32;
    else if (name == "double" || name == "float64") out = Scalar::f64;
    else if (name == "char" || name == "int8") out = Scalar::i8;
    else if (name == "uchar" || name == "uint8") out = Scalar::u8;
    else if (name == "short" || name == "int16") out = Scalar::i16;
    else if (name == "ushort" || name == "uint16") out = Scalar::u16;
    else if (name == "int" || name == "int32") out = Scalar::i32;
    else if (name == "uint" || name == "uint32") out = Scalar::u32;
    else return false;
    return true;
}

inline std::size_t scalar_size(Scalar s) {
    switch (s) {
        case Scalar::f64: return 8;
        case Scalar::f32:
        case Scalar::i32:
        case Scalar::u32: return 4;
        case Scalar::i16:
        case Scalar::u16: return 2;
        default: return 1;
    }
}

inline bool scalar_is_integer(Scalar s) { return s != Scalar::f32 && s != Scalar::f64; }

struct Property {
    std::string name;
    Scalar type = Scalar::f32;
};

template <typename T>
T read_le(const char* bytes) {
    T v;
    std::memcpy(&v, bytes, sizeof(T));
    return v;
}

inline double decode_scalar(const char* bytes, Scalar s) {
    switch (s) {
        case Scalar::f32: return read_le<float>(bytes);
        case Scalar::f64: return read_le<double>(bytes);
        case Scalar::i8: return static_cast<double>(read_le<std::int8_t>(bytes));
        case Scalar::u8: return static_cast<double>(read_le<std::uint8_t>(bytes));
        case Scalar::i16: return static_cast<double>(read_le<std::int16_t>(bytes));
        case Scalar::u16: return static_cast<double>(read_le<std::uint16_t>(bytes));
        case Scalar::i32: return static_cast<double>(read_le<std::int32_t>(bytes));
        case Scalar::u32: return static_cast<double>(read_le<std::uint32_t>(bytes));
    }
    return 0.0;
}

}  // namespace ply_detail

// Reads a PLY point cloud: ascii or binary little-endian, x/y/z as 32- or
// 64-bit floats, optional integer "label" property. Extra scalar vertex
// properties are skipped; elements after the vertex list are ignored.
inline PointCloud load_ply(const std::string& path) {
    using namespace ply_detail;

    std::ifstream in(path, std::ios::binary);
    if (!in) fail("io-error", "cannot open '" + path + "'");

    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&](const char* what) {
        if (!std::getline(in, line)) fail("parse-error", std::string("unexpected end of header (expected ") + what + ") at line " + std::to_string(line_no));
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++line_no;
    };

    next_line("magic");
    if (line != "ply") fail("parse-error", "missing 'ply' magic at line 1");

    bool binary = false;
    bool format_seen = false;
    bool in_vertex_element = false;
    bool vertex_seen = false;
    std::size_t vertex_count = 0;
    std::vector<Property> vertex_props;

    while (true) {
        next_line("header line");
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "comment" || tok == "obj_info" || tok.empty()) continue;
        if (tok == "format") {
            std::string fmt, ver;
            ls >> fmt >> ver;
            if (fmt == "ascii") binary = false;
            else if (fmt == "binary_little_endian") binary = true;
            else fail("parse-error", "unsupported format '" + fmt + "' at line " + std::to_string(line_no));
            format_seen = true;
        } else if (tok == "element") {
            std::string name;
            std::size_t count = 0;
            ls >> name >> count;
            if (name == "vertex") {
                if (vertex_seen) fail("parse-error", "duplicate vertex element at line " + std::to_string(line_no));
                vertex_seen = true;
                in_vertex_element = true;
                vertex_count = count;
            } else {
                if (!vertex_seen)
                    fail("parse-error", "element '" + name + "' precedes vertex element at line " + std::to_string(line_no));
                in_vertex_element = false;
            }
        } else if (tok == "property") {
            if (!in_vertex_element) continue;  // properties of trailing elements are never read
            std::string type_name;
            ls >> type_name;
            if (type_name == "list")
                fail("parse-error", "list property in vertex element at line " + std::to_string(line_no));
            Property prop;
            if (!scalar_from_name(type_name, prop.type))
                fail("parse-error", "unknown property type '" + type_name + "' at line " + std::to_string(line_no));
            ls >> prop.name;
            vertex_props.push_back(prop);
        } else if (tok == "end_header") {
            break;
        } else {
            fail("parse-error", "unrecognized header token '" + tok + "' at line " + std::to_string(line_no));
        }
    }
    if (!format_seen) fail("parse-error", "header has no format line");
    if (!vertex_seen) fail("parse-error", "header has no vertex element");
    if (vertex_count == 0) fail("empty-cloud", "vertex element is empty in '" + path + "'");

    int ix = -1, iy = -1, iz = -1, ilabel = -1;
    for (std::size_t i = 0; i < vertex_props.size(); ++i) {
        const Property& p = vertex_props[i];
        if (p.name == "x") ix = static_cast<int>(i);
        else if (p.name == "y") iy = static_cast<int>(i);
        else if (p.name == "z") iz = static_cast<int>(i);
        else if (p.name == "label") ilabel = static_cast<int>(i);
    }
    if (ix < 0 || iy < 0 || iz < 0) fail("parse-error", "vertex element lacks x/y/z properties");
    if (scalar_is_integer(vertex_props[ix].type) || scalar_is_integer(vertex_props[iy].type) ||
        scalar_is_integer(vertex_props[iz].type))
        fail("parse-error", "x/y/z must be float or double");
    if (ilabel >= 0 && !scalar_is_integer(vertex_props[ilabel].type))
        fail("parse-error", "label property must be an integer type");

    PointCloud cloud;
    cloud.points.reserve(vertex_count);
    if (ilabel >= 0) cloud.labels.reserve(vertex_count);

    if (binary) {
        std::size_t row_size = 0;
        std::vector<std::size_t> offsets(vertex_props.size());
        for (std::size_t i = 0; i < vertex_props.size(); ++i) {
            offsets[i] = row_size;
            row_size += scalar_size(vertex_props[i].type);
        }
        std::vector<char> row(row_size);
        for (std::size_t v = 0; v < vertex_count; ++v) {
            in.read(row.data(), static_cast<std::streamsize>(row_size));
            if (static_cast<std::size_t>(in.gcount()) != row_size)
                fail("parse-error", "truncated binary body at byte offset " +
                                        std::to_string(static_cast<long long>(in.tellg())) + " (vertex " +
                                        std::to_string(v) + ")");
            Vec3 p(decode_scalar(row.data() + offsets[ix], vertex_props[ix].type),
                   decode_scalar(row.data() + offsets[iy], vertex_props[iy].type),
                   decode_scalar(row.data() + offsets[iz], vertex_props[iz].type));
            cloud.points.push_back(p);
            if (ilabel >= 0)
                cloud.labels.push_back(static_cast<int>(decode_scalar(row.data() + offsets[ilabel], vertex_props[ilabel].type)));
        }
    } else {
        for (std::size_t v = 0; v < vertex_count; ++v) {
            next_line("vertex row");
            std::istringstream ls(line);
            std::vector<double> vals(vertex_props.size());
            for (std::size_t i = 0; i < vertex_props.size(); ++i) {
                if (!(ls >> vals[i]))
                    fail("parse-error", "malformed vertex row at line " + std::to_string(line_no));
            }
            cloud.points.emplace_back(vals[ix], vals[iy], vals[iz]);
            if (ilabel >= 0) cloud.labels.push_back(static_cast<int>(vals[ilabel]));
        }
    }

    cloud.check_consistent();
    return cloud;
}

// Writes coordinates as 64-bit floats (binary) so save/load round-trips
// bit-exactly; ascii mode uses %.17g for the same property.
inline void save_ply(const std::string& path, const PointCloud& cloud, bool binary = true) {
    if (cloud.empty()) fail("empty-cloud", "refusing to write an empty cloud to '" + path + "'");
    cloud.check_consistent();

    std::ofstream out(path, std::ios::binary);
    if (!out) fail("io-error", "cannot open '" + path + "' for writing");

    out << "ply\n";
    out << (binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n");
    out << "element vertex " << cloud.size() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    if (cloud.has_labels()) out << "property int label\n";
    out << "end_header\n";

    if (binary) {
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            double xyz[3] = {cloud.points[i].x(), cloud.points[i].y(), cloud.points[i].z()};
            out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
            if (cloud.has_labels()) {
                std::int32_t label = cloud.labels[i];
                out.write(reinterpret_cast<const char*>(&label), sizeof(label));
            }
        }
    } else {
        char buf[96];
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g", cloud.points[i].x(), cloud.points[i].y(),
                          cloud.points[i].z());
            out << buf;
            if (cloud.has_labels()) out << ' ' << cloud.labels[i];
            out << '\n';
        }
    }
    if (!out) fail("io-error", "write failure on '" + path + "'");
}

// Dispatches on extension; currently only .ply scenes are accepted.
inline PointCloud load_point_cloud(const std::string& path) {
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".ply") == 0) return load_ply(path);
    fail("parse-error", "unsupported point-cloud format for '" + path + "' (expected .ply)");
}

}  // namespace asist

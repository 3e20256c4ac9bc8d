#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "untangle/mesh.hpp"

namespace untangle {

namespace detail {

// "12/34/56" -> 12; only the position index is used.
inline int parse_face_index(const std::string& token, int vertex_count, const std::string& where) {
    const size_t slash = token.find('/');
    const std::string head = slash == std::string::npos ? token : token.substr(0, slash);
    int idx = 0;
    try {
        size_t pos = 0;
        idx = std::stoi(head, &pos);
        if (pos != head.size()) throw std::invalid_argument(head);
    } catch (const std::exception&) {
        throw std::runtime_error(where + ": malformed face index '" + token + "'");
    }
    if (idx < 1 || idx > vertex_count)
        throw std::runtime_error(where + ": face index " + std::to_string(idx) +
                                 " out of range (have " + std::to_string(vertex_count) + " vertices)");
    return idx - 1;
}

} // namespace detail

/// Loads an ASCII OBJ file: `v` and triangular `f` records only. Normals and
/// texture coordinates are ignored; quads and larger polygons are rejected.
/// The mesh name defaults to the file stem; orientation is false and masses
/// are 1 kg until the caller says otherwise.
inline TriangleMesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");

    TriangleMesh mesh;
    mesh.name = std::filesystem::path(path).stem().string();

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = path + ":" + std::to_string(lineno);
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            Vec3 p;
            if (!(ss >> p.x() >> p.y() >> p.z()))
                throw std::runtime_error(where + ": malformed vertex record");
            mesh.vertices.push_back(p);
        } else if (tag == "f") {
            std::vector<std::string> tokens;
            std::string tok;
            while (ss >> tok) tokens.push_back(tok);
            if (tokens.size() != 3)
                throw std::runtime_error(where + ": non-triangular face (" +
                                         std::to_string(tokens.size()) + " vertices)");
            std::array<int, 3> f;
            for (int k = 0; k < 3; ++k)
                f[k] = detail::parse_face_index(tokens[k], mesh.vertex_count(), where);
            mesh.faces.push_back(f);
        }
        // vn/vt/o/g/s/usemtl/mtllib are ignored
    }
    mesh.ensure_defaults();
    validate(mesh);
    return mesh;
}

/// Writes positions and faces as ASCII OBJ, positions with 9 significant
/// digits. Output depends only on the mesh contents, so identical meshes
/// produce byte-identical files.
inline void save_obj(const TriangleMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    char buf[160];
    for (const Vec3& p : mesh.vertices) {
        std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", p.x(), p.y(), p.z());
        out << buf;
    }
    for (const auto& f : mesh.faces) {
        std::snprintf(buf, sizeof buf, "f %d %d %d\n", f[0] + 1, f[1] + 1, f[2] + 1);
        out << buf;
    }
    if (!out) throw std::runtime_error("write failure on '" + path + "'");
}

} // namespace untangle

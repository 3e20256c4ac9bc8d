#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "untangle/obj_io.hpp"
#include "untangle/untangler.hpp"

namespace untangle {

/// One mesh in a scene, as described by the scene config.
struct MeshEntry {
    std::string path;
    std::string name;            // defaults to the OBJ stem
    bool oriented = false;
    double density = 0;          // kg/m^2 lumped to vertices; 0 keeps unit masses
    std::vector<int> pinned;
    bool pin_all = false;        // kinematic mesh: every vertex pinned
    double gravity_scale = 1.0;
    double spring_stiffness = 0; // N/m on edge length change
    double spring_damping = 0;   // N s/m along the edge axis
    double pressure = 0;         // p = pressure / V; 0 disables
};

struct SceneConfig {
    std::string name = "scene";
    std::vector<MeshEntry> meshes;
    Vec3 gravity{0, 0, -9.8};
    double dt = 0.005;
    int total_steps = 0;
    int collision_interval = 1;    // untangle every k-th step
    int collision_enable_step = 0; // response disabled before this step
    int frame_interval = 1;        // write frames every N steps
    std::string output_dir = "out";
    UntangleConfig untangle;
};

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j, const std::string& key,
                                           const std::string& path) {
    if (!j.contains(key)) throw std::runtime_error("scene: missing field " + path + key);
    return j.at(key);
}

template <typename T>
T field_or(const nlohmann::json& j, const std::string& key, const T& fallback,
           const std::string& path) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw std::runtime_error("scene: field " + path + key + " has the wrong type");
    }
}

inline Vec3 vec3_field(const nlohmann::json& j, const std::string& key, const Vec3& fallback,
                       const std::string& path) {
    if (!j.contains(key)) return fallback;
    const auto& arr = j.at(key);
    if (!arr.is_array() || arr.size() != 3)
        throw std::runtime_error("scene: field " + path + key + " must be a 3-element array");
    return Vec3(arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>());
}

} // namespace detail

inline SceneConfig parse_scene(const nlohmann::json& j) {
    SceneConfig scene;
    scene.name = detail::field_or<std::string>(j, "name", "scene", "");
    scene.dt = detail::field_or(j, "dt", 0.005, "");
    scene.total_steps = detail::require_field(j, "total_steps", "").get<int>();
    scene.gravity = detail::vec3_field(j, "gravity", Vec3(0, 0, -9.8), "");
    scene.frame_interval = detail::field_or(j, "frame_interval", 1, "");
    scene.output_dir = detail::field_or<std::string>(j, "output_dir", "out", "");
    if (scene.dt <= 0) throw std::runtime_error("scene: dt must be positive");
    if (scene.frame_interval < 1) throw std::runtime_error("scene: frame_interval must be >= 1");

    if (j.contains("collision")) {
        const auto& c = j.at("collision");
        scene.collision_interval = detail::field_or(c, "interval", 1, "collision.");
        scene.collision_enable_step = detail::field_or(c, "enable_after_step", 0, "collision.");
        if (scene.collision_interval < 1)
            throw std::runtime_error("scene: collision.interval must be >= 1");
    }
    if (j.contains("untangle")) {
        const auto& u = j.at("untangle");
        scene.untangle.post_distance = detail::field_or(u, "post_distance", 0.0, "untangle.");
        scene.untangle.max_iters = detail::field_or(u, "max_iters", 32, "untangle.");
        if (u.contains("diffusion")) {
            const auto& d = u.at("diffusion");
            scene.untangle.diffusion.rings = detail::field_or(d, "rings", 2, "untangle.diffusion.");
            scene.untangle.diffusion.iters = detail::field_or(d, "iters", 20, "untangle.diffusion.");
        }
    }

    const auto& meshes = detail::require_field(j, "meshes", "");
    if (!meshes.is_array() || meshes.empty())
        throw std::runtime_error("scene: meshes must be a non-empty array");
    for (size_t i = 0; i < meshes.size(); ++i) {
        const std::string path = "meshes[" + std::to_string(i) + "].";
        const auto& mj = meshes[i];
        MeshEntry entry;
        entry.path = detail::require_field(mj, "path", path).get<std::string>();
        entry.name = detail::field_or<std::string>(mj, "name", "", path);
        entry.oriented = detail::field_or(mj, "oriented", false, path);
        entry.density = detail::field_or(mj, "density", 0.0, path);
        if (mj.contains("pinned")) {
            if (mj.at("pinned").is_string() && mj.at("pinned").get<std::string>() == "all")
                entry.pin_all = true;
            else
                entry.pinned = detail::field_or(mj, "pinned", std::vector<int>{}, path);
        }
        entry.gravity_scale = detail::field_or(mj, "gravity_scale", 1.0, path);
        entry.spring_stiffness = detail::field_or(mj, "spring_stiffness", 0.0, path);
        entry.spring_damping = detail::field_or(mj, "spring_damping", 0.0, path);
        entry.pressure = detail::field_or(mj, "pressure", 0.0, path);
        scene.meshes.push_back(std::move(entry));
    }
    return scene;
}

inline SceneConfig load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scene '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("scene: JSON parse failure in '" + path + "': " + e.what());
    }
    return parse_scene(j);
}

/// Uniform pressure from an ideal-gas-like law p = coefficient / V, applied
/// as p * area * n per face, split equally over the face's vertices.
/// Requires a closed oriented mesh.
inline std::vector<Vec3> pressure_force(const TriangleMesh& mesh, double coefficient) {
    if (!mesh.oriented)
        throw std::runtime_error("pressure_force: mesh '" + mesh.name + "' is not oriented");
    const double volume = enclosed_volume(mesh); // throws when the mesh is open
    const double p = coefficient / volume;
    std::vector<Vec3> force(mesh.vertex_count(), Vec3::Zero());
    for (const auto& f : mesh.faces) {
        const Vec3& a = mesh.vertices[f[0]];
        // p * area * n == p/2 * unnormalized cross product
        const Vec3 fa = 0.5 * p *
                        (mesh.vertices[f[1]] - a).cross(mesh.vertices[f[2]] - a) / 3.0;
        force[f[0]] += fa;
        force[f[1]] += fa;
        force[f[2]] += fa;
    }
    return force;
}

/// Hooke springs on mesh edges with axial damping: on edge (i, j) with unit
/// axis u, f_i = [k (len - rest) + c (v_j - v_i) . u] u and f_j = -f_i.
inline void accumulate_spring_forces(const TriangleMesh& mesh, const EdgeSet& edges,
                                     const std::vector<double>& rest_lengths,
                                     const std::vector<Vec3>& velocities, double stiffness,
                                     double damping, std::vector<Vec3>& force) {
    for (int e = 0; e < edges.edge_count(); ++e) {
        const int i = edges.edges[e][0], j = edges.edges[e][1];
        const Vec3 d = mesh.vertices[j] - mesh.vertices[i];
        const double len = d.norm();
        if (len <= 0) continue;
        const Vec3 u = d / len;
        double magnitude = stiffness * (len - rest_lengths[e]);
        if (damping > 0) magnitude += damping * (velocities[j] - velocities[i]).dot(u);
        force[i] += magnitude * u;
        force[j] -= magnitude * u;
    }
}

struct CollisionPassRecord {
    int step = 0;
    bool resolved = false;
    int iterations = 0;
    int final_intersections = 0;
    int stencils = 0; // summed over iterations
};

struct FrameRecord {
    int step = 0;
    double time = 0;
    int intersections = 0; // crossings with oriented faces at frame time
    std::vector<Vec3> centroids;
    std::vector<std::string> files;
};

struct RunReport {
    std::string scene;
    std::vector<FrameRecord> frames;
    std::vector<CollisionPassRecord> passes;
    int total_steps = 0;
};

inline void to_json(nlohmann::json& j, const CollisionPassRecord& r) {
    j = nlohmann::json{{"step", r.step},
                       {"resolved", r.resolved},
                       {"iterations", r.iterations},
                       {"final_intersections", r.final_intersections},
                       {"stencils", r.stencils}};
}

inline void to_json(nlohmann::json& j, const FrameRecord& r) {
    nlohmann::json centroids = nlohmann::json::array();
    for (const Vec3& c : r.centroids) centroids.push_back({c.x(), c.y(), c.z()});
    j = nlohmann::json{{"step", r.step},
                       {"time", r.time},
                       {"intersections", r.intersections},
                       {"centroids", centroids},
                       {"files", r.files}};
}

inline void to_json(nlohmann::json& j, const RunReport& r) {
    j = nlohmann::json{{"schema", 1},
                       {"scene", r.scene},
                       {"total_steps", r.total_steps},
                       {"frames", r.frames},
                       {"passes", r.passes}};
}

/// Time-stepped state for one scene. Meshes keep their topology; positions
/// and velocities evolve.
struct SimState {
    std::vector<TriangleMesh> meshes;
    std::vector<std::vector<Vec3>> velocities;
    std::vector<EdgeSet> edge_sets;
    std::vector<std::vector<double>> rest_lengths;
    double time = 0;
    int step_index = 0; // completed steps
};

inline SimState init_state(const SceneConfig& scene, const std::string& base_dir) {
    SimState state;
    for (const MeshEntry& entry : scene.meshes) {
        std::filesystem::path p(entry.path);
        if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
        TriangleMesh mesh = load_obj(p.string());
        if (!entry.name.empty()) mesh.name = entry.name;
        mesh.oriented = entry.oriented;
        const EdgeSet edges = EdgeSet::build(mesh);

        if (entry.density > 0) {
            std::vector<double> masses(mesh.vertex_count(), 0.0);
            for (int f = 0; f < mesh.face_count(); ++f) {
                const double share = entry.density * face_area(mesh, f) / 3.0;
                for (int k = 0; k < 3; ++k) masses[mesh.faces[f][k]] += share;
            }
            mesh.masses = std::move(masses);
        }
        if (entry.pin_all) {
            mesh.pinned.assign(mesh.vertex_count(), 1);
        } else {
            for (int v : entry.pinned) {
                if (v < 0 || v >= mesh.vertex_count())
                    throw std::runtime_error("scene: pinned vertex " + std::to_string(v) +
                                             " out of range for mesh '" + mesh.name + "'");
                mesh.pinned[v] = 1;
            }
        }
        if (entry.pressure != 0) enclosed_volume(mesh); // fail fast on open meshes
        validate(mesh);

        std::vector<double> rest(edges.edge_count());
        for (int e = 0; e < edges.edge_count(); ++e)
            rest[e] = (mesh.vertices[edges.edges[e][1]] - mesh.vertices[edges.edges[e][0]]).norm();

        state.velocities.emplace_back(mesh.vertex_count(), Vec3::Zero());
        state.rest_lengths.push_back(std::move(rest));
        state.edge_sets.push_back(edges);
        state.meshes.push_back(std::move(mesh));
    }
    return state;
}

/// One semi-implicit Euler step; every collision_interval-th step (once
/// enabled) runs untangle on each oriented mesh pair and feeds the position
/// corrections back into the velocities.
inline void sim_step(SimState& state, const SceneConfig& scene,
                     std::vector<CollisionPassRecord>* passes = nullptr) {
    const double dt = scene.dt;
    for (size_t m = 0; m < state.meshes.size(); ++m) {
        TriangleMesh& mesh = state.meshes[m];
        const MeshEntry& entry = scene.meshes[m];
        std::vector<Vec3> force(mesh.vertex_count(), Vec3::Zero());
        if (entry.gravity_scale != 0)
            for (int v = 0; v < mesh.vertex_count(); ++v)
                force[v] += entry.gravity_scale * mesh.masses[v] * scene.gravity;
        if (entry.spring_stiffness > 0 || entry.spring_damping > 0)
            accumulate_spring_forces(mesh, state.edge_sets[m], state.rest_lengths[m],
                                     state.velocities[m], entry.spring_stiffness,
                                     entry.spring_damping, force);
        if (entry.pressure != 0) {
            const std::vector<Vec3> pf = pressure_force(mesh, entry.pressure);
            for (int v = 0; v < mesh.vertex_count(); ++v) force[v] += pf[v];
        }

        std::vector<Vec3> positions = mesh.vertices;
        for (int v = 0; v < mesh.vertex_count(); ++v) {
            if (mesh.pinned[v]) {
                state.velocities[m][v].setZero();
                continue;
            }
            state.velocities[m][v] += dt * force[v] / mesh.masses[v];
            positions[v] += dt * state.velocities[m][v];
            if (!positions[v].allFinite() || !state.velocities[m][v].allFinite())
                throw std::runtime_error("simulation diverged: non-finite state at mesh '" +
                                         mesh.name + "' vertex " + std::to_string(v) +
                                         " (step " + std::to_string(state.step_index + 1) + ")");
        }
        mesh.vertices = std::move(positions);
    }

    ++state.step_index;
    state.time += dt;

    const bool collisions_on = state.step_index > scene.collision_enable_step &&
                               state.step_index % scene.collision_interval == 0;
    if (!collisions_on) return;

    for (size_t i = 0; i < state.meshes.size(); ++i)
        for (size_t j = i + 1; j < state.meshes.size(); ++j) {
            if (!state.meshes[i].oriented && !state.meshes[j].oriented) continue;
            std::vector<std::vector<Vec3>> before{state.meshes[i].vertices,
                                                  state.meshes[j].vertices};
            UntangleReport report = untangle_meshes(state.meshes[i], state.meshes[j], scene.untangle);
            const std::vector<TriangleMesh*> pair{&state.meshes[i], &state.meshes[j]};
            const std::vector<std::vector<Vec3>*> vel{&state.velocities[i], &state.velocities[j]};
            for (int s = 0; s < 2; ++s)
                for (int v = 0; v < pair[s]->vertex_count(); ++v) {
                    const Vec3 delta = pair[s]->vertices[v] - before[s][v];
                    (*vel[s])[v] += delta / dt; // zero for vertices that did not move
                }
            if (passes) {
                CollisionPassRecord rec;
                rec.step = state.step_index;
                rec.resolved = report.resolved();
                rec.iterations = static_cast<int>(report.iterations.size());
                rec.final_intersections = report.final_intersections;
                for (const auto& it : report.iterations) rec.stencils += it.stencils;
                passes->push_back(rec);
            }
        }
}

inline int count_scene_crossings(const SimState& state, const Tolerances& tol) {
    int total = 0;
    for (size_t i = 0; i < state.meshes.size(); ++i)
        for (size_t j = 0; j < state.meshes.size(); ++j) {
            if (i == j || !state.meshes[j].oriented) continue;
            total += static_cast<int>(find_intersections(state.meshes[i], state.edge_sets[i],
                                                         static_cast<int>(i), state.meshes[j],
                                                         static_cast<int>(j), tol)
                                          .size());
        }
    return total;
}

/// Runs a scene to completion, writing OBJ frames every frame_interval steps
/// and a report.json with per-frame crossing counts and collision pass
/// summaries.
inline RunReport run_scenario(const SceneConfig& scene, const std::string& base_dir = "") {
    SimState state = init_state(scene, base_dir);
    std::filesystem::path out_dir(scene.output_dir);
    if (out_dir.is_relative() && !base_dir.empty())
        out_dir = std::filesystem::path(base_dir) / out_dir;
    std::filesystem::create_directories(out_dir);

    RunReport report;
    report.scene = scene.name;
    report.total_steps = scene.total_steps;

    auto write_frame = [&](int frame_number) {
        FrameRecord frame;
        frame.step = state.step_index;
        frame.time = state.time;
        frame.intersections = count_scene_crossings(state, scene.untangle.tol);
        for (const TriangleMesh& mesh : state.meshes) {
            Vec3 centroid = Vec3::Zero();
            for (const Vec3& p : mesh.vertices) centroid += p;
            frame.centroids.push_back(centroid / mesh.vertex_count());
            char suffix[64];
            std::snprintf(suffix, sizeof suffix, "_f%04d.obj", frame_number);
            const std::string file = (out_dir / (mesh.name + suffix)).string();
            save_obj(mesh, file);
            frame.files.push_back(file);
        }
        report.frames.push_back(std::move(frame));
    };

    int frame_number = 0;
    for (int step = 1; step <= scene.total_steps; ++step) {
        sim_step(state, scene, &report.passes);
        if (step % scene.frame_interval == 0) write_frame(frame_number++);
    }

    std::ofstream out(out_dir / "report.json");
    nlohmann::json j = report;
    out << j.dump(2) << "\n";
    UNTANGLE_LOG_INFO("scenario '%s': %d steps, %zu frames, %zu collision passes",
                      scene.name.c_str(), scene.total_steps, report.frames.size(),
                      report.passes.size());
    return report;
}

} // namespace untangle

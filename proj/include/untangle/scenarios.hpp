#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "untangle/obj_io.hpp"
#include "untangle/shapes.hpp"

namespace untangle {

/// Desk-scale scenario generators. Each writes the mesh assets under
/// <dir>/assets/ and a scene config <dir>/<name>.json with paths relative to
/// <dir>, then returns the config path.

namespace detail {

inline std::filesystem::path ensure_assets_dir(const std::string& dir) {
    const std::filesystem::path assets = std::filesystem::path(dir) / "assets";
    std::filesystem::create_directories(assets);
    return assets;
}

inline std::string write_scene_json(const std::string& dir, const std::string& name,
                                    const nlohmann::json& j) {
    const std::string path = (std::filesystem::path(dir) / (name + ".json")).string();
    std::ofstream out(path);
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("cannot write scene '" + path + "'");
    return path;
}

} // namespace detail

/// A pinned oriented spike piercing a hanging sheet. Collision response is
/// off for the first `enable_after_step` steps, so the sheet sinks onto the
/// spike; once enabled, the existing penetration is repaired and stays
/// repaired.
inline std::string write_spike_sheet_scenario(const std::string& dir, int total_steps = 160,
                                              int enable_after_step = 40) {
    const auto assets = detail::ensure_assets_dir(dir);

    TriangleMesh spike = make_cone(16, 0.22, 0.5);
    spike.name = "spike";
    save_obj(spike, (assets / "spike.obj").string());

    const int n = 45; // 2025 vertices
    TriangleMesh sheet = make_grid(n, n, 1.5, 1.5, 0.0, 0.0, 0.35);
    sheet.name = "sheet";
    save_obj(sheet, (assets / "sheet.obj").string());

    std::vector<int> pinned;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            if (i == 0 || j == 0 || i == n - 1 || j == n - 1) pinned.push_back(j * n + i);

    nlohmann::json scene = {
        {"name", "spike_sheet"},
        {"dt", 0.005},
        {"total_steps", total_steps},
        {"gravity", {0, 0, -9.8}},
        {"frame_interval", 4},
        {"output_dir", "out/spike_sheet"},
        {"collision", {{"interval", 4}, {"enable_after_step", enable_after_step}}},
        {"untangle",
         {{"post_distance", 0.001}, {"max_iters", 16}, {"diffusion", {{"rings", 2}, {"iters", 20}}}}},
        {"meshes",
         {{{"path", "assets/spike.obj"},
           {"name", "spike"},
           {"oriented", true},
           {"pinned", "all"}},
          {{"path", "assets/sheet.obj"},
           {"name", "sheet"},
           {"oriented", false},
           {"density", 0.3},
           {"pinned", pinned},
           {"spring_stiffness", 20.0},
           {"spring_damping", 0.02}}}}};
    return detail::write_scene_json(dir, "spike_sheet", scene);
}

/// Two 576-vertex pressurized tori; the blue one falls onto the red one,
/// which floats (no gravity). The post-response distance controls how
/// elastic the collision looks.
inline std::string write_two_tori_scenario(const std::string& dir, double post_distance = 0.005,
                                           int collision_interval = 1, int total_steps = 120,
                                           const std::string& name = "two_tori") {
    const auto assets = detail::ensure_assets_dir(dir);

    TriangleMesh red = make_torus(24, 24, 0.5, 0.2);
    red.name = "torus_red";
    save_obj(red, (assets / "torus_red.obj").string());

    TriangleMesh blue = make_torus(24, 24, 0.5, 0.2, Vec3(0, 0, 0.55));
    blue.name = "torus_blue";
    save_obj(blue, (assets / "torus_blue.obj").string());

    auto torus_entry = [](const std::string& path, const std::string& mesh_name,
                          double gravity_scale) {
        return nlohmann::json{{"path", path},
                              {"name", mesh_name},
                              {"oriented", true},
                              {"density", 1.0},
                              {"gravity_scale", gravity_scale},
                              {"spring_stiffness", 50.0},
                              {"spring_damping", 0.2},
                              {"pressure", 2.0}};
    };

    nlohmann::json scene = {
        {"name", name},
        {"dt", 0.005},
        {"total_steps", total_steps},
        {"gravity", {0, 0, -9.8}},
        {"frame_interval", collision_interval >= 8 ? collision_interval : 4},
        {"output_dir", "out/" + name},
        {"collision", {{"interval", collision_interval}, {"enable_after_step", 0}}},
        {"untangle",
         {{"post_distance", post_distance},
          {"max_iters", 16},
          {"diffusion", {{"rings", 2}, {"iters", 20}}}}},
        {"meshes",
         {torus_entry("assets/torus_red.obj", "torus_red", 0.0),
          torus_entry("assets/torus_blue.obj", "torus_blue", 1.0)}}};
    return detail::write_scene_json(dir, name, scene);
}

/// The two-tori scene handled only once every `interval` steps; frames land
/// exactly on the collision steps, so every written frame should be clean.
inline std::string write_interval_sweep_scenario(const std::string& dir, int interval = 8,
                                                 int total_steps = 120) {
    return write_two_tori_scenario(dir, 0.005, interval, total_steps,
                                   "interval_sweep_k" + std::to_string(interval));
}

} // namespace untangle

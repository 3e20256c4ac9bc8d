// Procedural mesh and scenario generator for the shipped scene configs.

#include <CLI11.hpp>

#include <iostream>

#include "untangle/scenarios.hpp"

int main(int argc, char** argv) {
    CLI::App app{"procedural meshes and scenario assets"};
    app.require_subcommand(1);

    std::string out = "mesh.obj";
    std::string dir = "scenes";
    int segments = 24, minor_segments = 24, subdivisions = 2, nx = 45, ny = 45;
    double radius = 1.0, minor_radius = 0.2, height = 0.5, sx = 1.5, sy = 1.5, z = 0.0;

    CLI::App* torus = app.add_subcommand("torus", "torus around the z axis");
    torus->add_option("-o,--out", out, "output OBJ");
    torus->add_option("--major-segments", segments, "");
    torus->add_option("--minor-segments", minor_segments, "");
    torus->add_option("--major-radius", radius, "");
    torus->add_option("--minor-radius", minor_radius, "");

    CLI::App* icosphere = app.add_subcommand("icosphere", "subdivided icosahedron");
    icosphere->add_option("-o,--out", out, "output OBJ");
    icosphere->add_option("--subdivisions", subdivisions, "");
    icosphere->add_option("--radius", radius, "");

    CLI::App* cone = app.add_subcommand("cone", "closed cone, apex up");
    cone->add_option("-o,--out", out, "output OBJ");
    cone->add_option("--segments", segments, "");
    cone->add_option("--radius", radius, "");
    cone->add_option("--height", height, "");

    CLI::App* grid = app.add_subcommand("grid", "flat sheet in the z plane");
    grid->add_option("-o,--out", out, "output OBJ");
    grid->add_option("--nx", nx, "");
    grid->add_option("--ny", ny, "");
    grid->add_option("--sx", sx, "");
    grid->add_option("--sy", sy, "");
    grid->add_option("--z", z, "");

    CLI::App* scenes = app.add_subcommand("scenes", "write the shipped scenario configs + assets");
    scenes->add_option("dir", dir, "target directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (torus->parsed()) {
            untangle::save_obj(
                untangle::make_torus(segments, minor_segments, radius, minor_radius), out);
        } else if (icosphere->parsed()) {
            untangle::save_obj(untangle::make_icosphere(subdivisions, radius), out);
        } else if (cone->parsed()) {
            untangle::save_obj(untangle::make_cone(segments, radius, height), out);
        } else if (grid->parsed()) {
            untangle::save_obj(untangle::make_grid(nx, ny, sx, sy, 0.0, 0.0, z), out);
        } else if (scenes->parsed()) {
            std::cout << untangle::write_spike_sheet_scenario(dir) << "\n";
            std::cout << untangle::write_two_tori_scenario(dir) << "\n";
            std::cout << untangle::write_interval_sweep_scenario(dir) << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

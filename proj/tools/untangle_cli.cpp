// Command-line front end: detect, untangle, simulate.
//
// Exit codes: 0 success/resolved, 1 usage/IO/parse error,
// 2 iteration budget exhausted, 3 --expect-clean with crossings present.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "untangle/untangle.hpp"

namespace {

struct OrientedChoice {
    bool a = false;
    bool b = false;
};

OrientedChoice parse_oriented(const std::string& value) {
    if (value == "a") return {true, false};
    if (value == "b") return {false, true};
    if (value == "both") return {true, true};
    throw CLI::ValidationError("--oriented", "must be one of a|b|both");
}

struct CommonOptions {
    std::string oriented;
    int threads = 1;
    std::string json_path;
};

int run_detect(const std::string& path_a, const std::string& path_b, const CommonOptions& opts,
               bool dump_stencils, bool expect_clean) {
    untangle::TriangleMesh a = untangle::load_obj(path_a);
    untangle::TriangleMesh b = untangle::load_obj(path_b);
    // Detection is orientation-blind; the designation only matters for which
    // directions are scanned and for stencil construction.
    const OrientedChoice oriented =
        opts.oriented.empty() ? OrientedChoice{true, true} : parse_oriented(opts.oriented);
    a.oriented = oriented.a;
    b.oriented = oriented.b;

    const untangle::Tolerances tol;
    std::array<untangle::TriangleMesh, 2> meshes{std::move(a), std::move(b)};
    std::array<untangle::EdgeSet, 2> edges{untangle::EdgeSet::build(meshes[0]),
                                           untangle::EdgeSet::build(meshes[1])};

    std::vector<untangle::EdgeFaceIntersection> records;
    for (int em = 0; em < 2; ++em) {
        const int fm = 1 - em;
        if (!meshes[fm].oriented) continue;
        auto part = untangle::find_intersections(meshes[em], edges[em], em, meshes[fm], fm, tol,
                                                 opts.threads);
        records.insert(records.end(), part.begin(), part.end());
    }
    std::cout << records.size() << " intersections\n";

    if (!opts.json_path.empty()) {
        std::ofstream out(opts.json_path);
        if (!out) throw std::runtime_error("cannot open '" + opts.json_path + "' for writing");
        untangle::write_jsonl(out, records);
        if (dump_stencils) {
            const untangle::LegalityMap legality = untangle::classify_vertices(records, meshes);
            for (const auto& s : untangle::build_stencils(records, meshes)) {
                nlohmann::json j = s;
                out << j.dump() << "\n";
            }
            (void)legality;
        }
    }
    if (expect_clean && !records.empty()) return 3;
    return 0;
}

int run_untangle(const std::string& path_a, const std::string& path_b, const CommonOptions& opts,
                 untangle::UntangleConfig config, int snapshot_every) {
    untangle::TriangleMesh a = untangle::load_obj(path_a);
    untangle::TriangleMesh b = untangle::load_obj(path_b);
    const OrientedChoice oriented = parse_oriented(opts.oriented);
    if (!oriented.a && !oriented.b) {
        std::cerr << "untangle: at least one mesh must be oriented\n";
        return 1;
    }
    a.oriented = oriented.a;
    b.oriented = oriented.b;
    config.threads = opts.threads;

    if (snapshot_every > 0) {
        config.on_iteration = [&](int iteration, const untangle::TriangleMesh& ma,
                                  const untangle::TriangleMesh& mb) {
            if ((iteration + 1) % snapshot_every != 0) return;
            char suffix[48];
            std::snprintf(suffix, sizeof suffix, "_iter%03d.obj", iteration);
            untangle::save_obj(ma, ma.name + suffix);
            untangle::save_obj(mb, mb.name + suffix);
        };
    }

    const untangle::UntangleReport report = untangle::untangle_meshes(a, b, config);
    untangle::save_obj(a, a.name + "_out.obj");
    untangle::save_obj(b, b.name + "_out.obj");

    const std::string report_path = opts.json_path.empty() ? "report.json" : opts.json_path;
    std::ofstream out(report_path);
    if (!out) throw std::runtime_error("cannot open '" + report_path + "' for writing");
    nlohmann::json j = report;
    out << j.dump(2) << "\n";

    std::cout << (report.resolved() ? "resolved" : "iteration budget exhausted") << " after "
              << report.iterations.size() << " iterations, " << report.final_intersections
              << " crossings remain\n";
    return report.resolved() ? 0 : 2;
}

int run_simulate(const std::string& scene_path, int frames_override, int threads) {
    untangle::SceneConfig scene = untangle::load_scene(scene_path);
    scene.untangle.threads = threads;
    if (frames_override > 0) scene.total_steps = frames_override * scene.frame_interval;
    const std::string base_dir = std::filesystem::path(scene_path).parent_path().string();
    const untangle::RunReport report = untangle::run_scenario(scene, base_dir);
    std::cout << "simulated " << report.total_steps << " steps, " << report.frames.size()
              << " frames, " << report.passes.size() << " collision passes\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"penetration untangling between two triangle meshes"};
    app.require_subcommand(1);

    std::string path_a, path_b, scene_path;
    CommonOptions opts;
    bool dump_stencils = false, expect_clean = false;
    int snapshot_every = 0, frames_override = 0;
    untangle::UntangleConfig config;

    CLI::App* detect = app.add_subcommand("detect", "count edge-face crossings between two meshes");
    detect->add_option("mesh_a", path_a, "first OBJ file")->required();
    detect->add_option("mesh_b", path_b, "second OBJ file")->required();
    detect->add_option("--oriented", opts.oriented, "which mesh is oriented: a|b|both (default both)");
    detect->add_option("--json", opts.json_path, "write crossing records as JSON lines");
    detect->add_flag("--dump-stencils", dump_stencils, "append stencil records to the JSON dump");
    detect->add_flag("--expect-clean", expect_clean, "exit 3 if any crossing is found");
    detect->add_option("--threads", opts.threads, "narrow-phase threads");

    CLI::App* untangle_cmd = app.add_subcommand("untangle", "relocate vertices until penetration-free");
    untangle_cmd->add_option("mesh_a", path_a, "first OBJ file")->required();
    untangle_cmd->add_option("mesh_b", path_b, "second OBJ file")->required();
    untangle_cmd->add_option("--oriented", opts.oriented, "which mesh is oriented: a|b|both")
        ->required();
    untangle_cmd->add_option("--post-distance", config.post_distance,
                             "target signed distance after response (meters)");
    untangle_cmd->add_option("--max-iters", config.max_iters, "outer iteration budget");
    untangle_cmd->add_option("--diffusion-rings", config.diffusion.rings,
                             "correction diffusion radius (rings)");
    untangle_cmd->add_option("--diffusion-iters", config.diffusion.iters, "diffusion sweep budget");
    untangle_cmd->add_option("--snapshot-every", snapshot_every, "write OBJ snapshots every k iterations");
    untangle_cmd->add_option("--json", opts.json_path, "report path (default report.json)");
    untangle_cmd->add_option("--threads", opts.threads, "narrow-phase threads");

    CLI::App* simulate = app.add_subcommand("simulate", "run a scene config");
    simulate->add_option("scene", scene_path, "scene JSON file")->required();
    simulate->add_option("--frames", frames_override, "override the step count to N output frames");
    simulate->add_option("--threads", opts.threads, "narrow-phase threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e); // prints the message or help text
        return code == 0 ? 0 : 1;
    }

    try {
        if (detect->parsed()) return run_detect(path_a, path_b, opts, dump_stencils, expect_clean);
        if (untangle_cmd->parsed())
            return run_untangle(path_a, path_b, opts, config, snapshot_every);
        if (simulate->parsed()) return run_simulate(scene_path, frames_override, opts.threads);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

// Batch entry points. Every command is a thin wrapper over library calls;
// this file only parses flags, reads and writes files and formats output.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "facesketch/bench.hpp"
#include "facesketch/session.hpp"
#include "facesketch/suggest.hpp"
#include "facesketch/synthetic.hpp"
#include "facesketch/verify.hpp"

using namespace fsk;

namespace {

enum Exit : int {
    exit_ok = 0,
    exit_failed = 1,  // the command ran and its result is a failure
    exit_usage = 2,
    exit_input = 3,   // malformed or invalid input document
    exit_io = 4,
};

bool g_json = false;

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const std::string& path, const std::string& bytes)
{
    std::ofstream out(path, std::ios::binary);
    if (!out || !out.write(bytes.data(), static_cast<std::streamsize>(bytes.size())))
        throw std::runtime_error("cannot write " + path);
}

// Success output: JSON document on --json, the human text otherwise.
void report(const Json& j, const std::string& text)
{
    if (g_json)
        std::cout << j.dump(2) << "\n";
    else if (!text.empty())
        std::cout << text;
}

int diagnose(int code, const std::string& kind, const std::string& message, const std::string& field = "")
{
    if (g_json) {
        Json j{{"ok", false}, {"exit_code", code}, {"kind", kind}, {"error", message}};
        if (!field.empty()) j["field"] = field;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cerr << "facesketch: " << message << (field.empty() ? "" : " at " + field) << "\n";
    }
    return code;
}

std::string stage_table(const std::vector<StageReport>& stages)
{
    std::ostringstream s;
    for (const StageReport& r : stages)
        s << r.stage << ": " << r.vertices << " vertices, " << r.triangles << " triangles, " << r.boundary_edges
          << " boundary edges, " << r.wall_ms << " ms\n";
    return s.str();
}

Json stages_json(const std::vector<StageReport>& stages)
{
    Json list = Json::array();
    for (const StageReport& r : stages)
        list.push_back({{"stage", r.stage},
                        {"vertices", r.vertices},
                        {"triangles", r.triangles},
                        {"boundary_edges", r.boundary_edges},
                        {"wall_ms", r.wall_ms}});
    return list;
}

int cmd_coarse(const std::string& sketch_path, const std::string& out)
{
    const PartSketch sketch = part_sketch_from_json(parse_json_text(read_file(sketch_path)));
    const TriMesh mesh = merge_parts(generate_parts(sketch));
    export_obj(mesh, out);
    report({{"ok", true}, {"command", "coarse"}, {"out", out}, {"mesh", mesh_summary(mesh)}},
           "wrote " + out + " (" + std::to_string(mesh.num_vertices()) + " vertices)\n");
    return exit_ok;
}

int cmd_refine(const std::string& project_path, const std::string& out, const std::string& debug_dir)
{
    const Project project = load_project(project_path);
    const PipelineOutput r = run_pipeline(project, {true, debug_dir});
    if (!r.refine.ok) return diagnose(exit_failed, "refine", r.refine.diagnostic);
    if (!r.fine) return diagnose(exit_input, "input", "project has no sketch", "/sketch");
    export_obj(*r.fine, out);
    std::ostringstream text;
    text << "wrote " << out << ": " << r.fine->num_vertices() << " vertices, " << r.refine.moved_vertices
         << " moved by depth guidance, " << r.refine.subdivided_triangles << " triangles subdivided, "
         << r.refine.wall_ms << " ms\n";
    report({{"ok", true},
            {"command", "refine"},
            {"out", out},
            {"mesh", mesh_summary(*r.fine)},
            {"refine",
             {{"moved_vertices", r.refine.moved_vertices},
              {"reverted_vertices", r.refine.reverted_vertices},
              {"subdivided_triangles", r.refine.subdivided_triangles},
              {"wall_ms", r.refine.wall_ms}}}},
           text.str());
    return exit_ok;
}

int cmd_pipeline(const std::string& project_path, const std::string& out, const std::string& coarse_out)
{
    const Project project = load_project(project_path);
    const PipelineOutput r = run_pipeline(project);
    if (!r.refine.ok) return diagnose(exit_failed, "refine", r.refine.diagnostic);
    if (!r.fine) return diagnose(exit_input, "input", "project has no sketch", "/sketch");
    export_obj(*r.fine, out);
    if (!coarse_out.empty()) export_obj(r.coarse, coarse_out);
    report({{"ok", true}, {"command", "pipeline"}, {"out", out}, {"stages", stages_json(r.stages)}},
           stage_table(r.stages) + "wrote " + out + "\n");
    return exit_ok;
}

int cmd_bench(const std::string& field, int grid, int coarse_grid)
{
    BenchOptions options;
    options.mc_grid = grid;
    options.coarse_grid = coarse_grid;
    const BenchReport r = bench_mc_vs_idgmm(*bench_shape(field), demo_strokes(), options);
    if (g_json) {
        Json rows = Json::array();
        for (const BenchRow* row : {&r.idgmm, &r.marching_cubes})
            rows.push_back({{"method", row->method},
                            {"grid", row->grid},
                            {"wall_ms", row->wall_ms},
                            {"vertices", row->vertices},
                            {"triangles", row->triangles}});
        report({{"ok", true}, {"command", "bench"}, {"rows", rows}, {"ratio", r.ratio()}}, "");
    } else {
        std::cout << bench_csv(r);
        std::cerr << "ratio (marching_cubes / idgmm): " << r.ratio() << "\n";
    }
    return exit_ok;
}

int cmd_verify(const VerifyOptions& options)
{
    const std::vector<CheckResult> results = run_invariant_suite(options);
    int failed = 0;
    Json list = Json::array();
    std::ostringstream text;
    for (const CheckResult& r : results) {
        failed += r.passed ? 0 : 1;
        list.push_back({{"module", r.module},
                        {"name", r.name},
                        {"passed", r.passed},
                        {"detail", r.detail},
                        {"wall_ms", r.wall_ms}});
        text << (r.passed ? "PASS " : "FAIL ") << r.module << ": " << r.name;
        if (!r.passed) text << " (" << r.detail << ")";
        text << "\n";
    }
    text << results.size() - failed << "/" << results.size() << " checks passed\n";
    report({{"ok", failed == 0}, {"command", "verify"}, {"checks", list}}, text.str());
    return failed == 0 ? exit_ok : exit_failed;
}

int cmd_suggest(const std::string& corpus, const std::string& query_path)
{
    const SuggestionIndex index(load_corpus(corpus));
    const std::vector<Suggestion> hits = index.query(parse_query(read_file(query_path)));
    Json list = Json::array();
    std::ostringstream text;
    for (const Suggestion& s : hits) {
        list.push_back({{"id", s.id}, {"distance", s.distance}});
        text << s.id << "\t" << s.distance << "\n";
    }
    report({{"ok", true}, {"command", "suggest-index"}, {"suggestions", list}}, text.str());
    return exit_ok;
}

int cmd_example(const std::string& dir)
{
    std::filesystem::create_directories(dir);
    const Project project = demo_project();
    save_project(project, dir + "/project.json");
    write_file(dir + "/sketch.json", to_json(project.sketch).dump(2) + "\n");
    const Json query{{"category", "eye"}, {"contour", to_json(circle_contour(0.5, 0.5, 0.4, 32))}, {"top_n", 5}};
    write_file(dir + "/query.json", query.dump(2) + "\n");
    report({{"ok", true}, {"command", "example"}, {"dir", dir}},
           "wrote project.json, sketch.json and query.json to " + dir + "\n");
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"facesketch: sketch-based face modeling from the command line"};
    app.require_subcommand(1);
    app.add_flag("--json", g_json, "Machine-readable output and diagnostics on stdout");

    std::string sketch, project, out, coarse_out, debug_dir, corpus, query, field = "sphere", dir;
    int grid = 256, coarse_grid = 64;
    VerifyOptions verify;

    auto* coarse = app.add_subcommand("coarse", "Generate and merge the part meshes of a sketch");
    coarse->add_option("--sketch", sketch, "Part sketch JSON")->required();
    coarse->add_option("--out", out, "Output OBJ")->required();

    auto* refine = app.add_subcommand("refine", "Replay a project including the refinement");
    refine->add_option("--project", project, "Project JSON")->required();
    refine->add_option("--out", out, "Output OBJ of the fine mesh")->required();
    refine->add_option("--debug-dir", debug_dir, "Dump intermediate maps and point clouds here");

    auto* pipeline = app.add_subcommand("pipeline", "Coarse, profile and refine stages with a stage report");
    pipeline->add_option("--project", project, "Project JSON")->required();
    pipeline->add_option("--out", out, "Output OBJ of the fine mesh")->required();
    pipeline->add_option("--coarse-out", coarse_out, "Also write the coarse mesh");

    auto* bench = app.add_subcommand("bench", "Timing comparisons");
    bench->require_subcommand(1);
    auto* mc = bench->add_subcommand("mc-vs-idgmm", "One refinement pass against high-resolution marching cubes");
    mc->add_option("--field", field, "sphere, ellipsoid or a closed OBJ file");
    mc->add_option("--grid", grid, "Marching-cubes resolution")->check(CLI::Range(2, 1024));
    mc->add_option("--coarse-grid", coarse_grid, "Resolution of the coarse mesh")->check(CLI::Range(2, 1024));

    auto* verify_cmd = app.add_subcommand("verify", "Run the invariant suite of every module");
    verify_cmd->add_option("--corpus", verify.corpus_path, "Suggestion corpus for the retrieval check");
    verify_cmd->add_option("--module", verify.module, "Only this module");

    auto* suggest = app.add_subcommand("suggest-index", "Rank corpus entries against a query");
    suggest->add_option("--corpus", corpus, "Corpus JSON")->required();
    suggest->add_option("--query", query, "Query JSON")->required();

    auto* example = app.add_subcommand("example", "Write a demo project, sketch and query");
    example->add_option("--out-dir", dir, "Target directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return diagnose(exit_usage, "usage", e.what());
    }

    try {
        if (*coarse) return cmd_coarse(sketch, out);
        if (*refine) return cmd_refine(project, out, debug_dir);
        if (*pipeline) return cmd_pipeline(project, out, coarse_out);
        if (*mc) return cmd_bench(field, grid, coarse_grid);
        if (*verify_cmd) return cmd_verify(verify);
        if (*suggest) return cmd_suggest(corpus, query);
        if (*example) return cmd_example(dir);
    } catch (const JsonInputError& e) {
        return diagnose(exit_input, "input", e.detail(), e.location());
    } catch (const ProjectVersionError& e) {
        return diagnose(exit_input, "input", e.what(), "/schema_version");
    } catch (const std::invalid_argument& e) {
        return diagnose(exit_input, "input", e.what());
    } catch (const std::exception& e) {
        return diagnose(exit_io, "io", e.what());
    }
    return diagnose(exit_usage, "usage", "no command");
}
